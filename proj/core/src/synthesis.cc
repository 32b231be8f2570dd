#include "outsync/synthesis.h"

#include <algorithm>
#include <sstream>

#include "outsync/errors.h"

namespace outsync {

const char* ToString(SynthesisMode mode) {
  return mode == SynthesisMode::kData ? "data" : "model";
}

namespace {

// Solves coeff * x = rhs in the minimal-norm sense after scaling each row to
// unit infinity norm. Row scaling leaves the solution set of a consistent
// system unchanged; it keeps blocks of very different magnitude (state data
// versus output data) from masking each other in the SVD cutoff.
VectorXd SolveEquilibrated(const MatrixXd& coeff, const VectorXd& rhs,
                           const Tolerances& tol) {
  MatrixXd a = coeff;
  VectorXd b = rhs;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double scale = a.row(i).cwiseAbs().maxCoeff();
    if (scale > 0) {
      a.row(i) /= scale;
      b(i) /= scale;
    }
  }
  return SolveLinearLs(a, b, tol).solution;
}

void RequireRole(const DataRecord& r, AgentRole role) {
  r.CheckShapes();
  if (r.role != role) {
    throw std::invalid_argument(std::string("record is not a ") + ToString(role));
  }
}

void RequireExoMatch(const DataRecord& r, const ExoSystem& exo) {
  if (r.output_dim() != exo.output_dim()) {
    throw DimensionError("record output dimension differs from exosystem");
  }
}

RegulatorSolution RegulatorFromData(const DataRecord& r, const ExoSystem& exo,
                                    bool with_exo_constraint,
                                    const Tolerances& tol) {
  RequireExoMatch(r, exo);
  const Eigen::Index t = r.horizon;
  const Eigen::Index n = r.state_dim();
  const Eigen::Index p = r.output_dim();
  const Eigen::Index n0 = exo.state_dim();
  const MatrixXd eye0 = MatrixXd::Identity(n0, n0);

  const Eigen::Index rows = n * n0 + p * n0 * (with_exo_constraint ? 2 : 1);
  MatrixXd coeff(rows, t * n0);
  VectorXd rhs = VectorXd::Zero(rows);
  coeff.topRows(n * n0) = Kron(eye0, r.xf) - Kron(exo.s.transpose(), r.xp);
  coeff.middleRows(n * n0, p * n0) = Kron(eye0, r.yp);
  rhs.segment(n * n0, p * n0) = Vec(exo.r);
  if (with_exo_constraint) {
    coeff.bottomRows(p * n0) = Kron(eye0, r.y0p);
    rhs.tail(p * n0) = Vec(exo.r);
  }
  const MatrixXd m = Unvec(SolveEquilibrated(coeff, rhs, tol), t, n0);

  RegulatorSolution sol;
  sol.pi = r.xp * m;
  sol.gamma = r.up * m;
  sol.residual = std::max(MaxAbs(r.xf * m - r.xp * m * exo.s),
                          MaxAbs(r.yp * m - exo.r));
  if (with_exo_constraint) {
    sol.residual = std::max(sol.residual, MaxAbs(r.y0p * m - exo.r));
  }
  sol.m = m;
  return sol;
}

RegulatorSolution RequireFeasible(RegulatorSolution sol, const Tolerances& tol,
                                  std::optional<int> agent,
                                  const std::string& condition) {
  if (sol.residual > tol.residual_abs) {
    std::ostringstream os;
    os << "regulator equations have no solution (residual " << sol.residual
       << " > " << tol.residual_abs << ")";
    throw DesignError(FailureKind::kInfeasible, os.str(), agent, condition);
  }
  return sol;
}

}  // namespace

RegulatorSolution ComputeLeaderRegulatorFromData(const DataRecord& r,
                                                 const ExoSystem& exo,
                                                 const Tolerances& tol) {
  RequireRole(r, AgentRole::kLeader);
  return RegulatorFromData(r, exo, /*with_exo_constraint=*/true, tol);
}

RegulatorSolution ComputeFollowerRegulatorFromData(const DataRecord& r,
                                                   const ExoSystem& exo,
                                                   const Tolerances& tol) {
  RequireRole(r, AgentRole::kFollower);
  return RegulatorFromData(r, exo, /*with_exo_constraint=*/false, tol);
}

std::pair<double, double> ModelRegulatorResiduals(const AgentModel& a,
                                                  const ExoSystem& exo,
                                                  const MatrixRef& pi,
                                                  const MatrixRef& gamma) {
  MatrixXd state = a.a() * pi + a.b() * gamma - pi * exo.s;
  MatrixXd output = a.c() * pi + a.d() * gamma - exo.r;
  if (a.is_leader()) {
    state += *a.e() * exo.r;
    output += *a.f() * exo.r;
  }
  return {MaxAbs(state), MaxAbs(output)};
}

RegulatorSolution ComputeRegulatorFromModel(const AgentModel& a,
                                            const ExoSystem& exo,
                                            const Tolerances& tol) {
  const auto problems = a.ShapeProblems(exo.output_dim());
  if (!problems.empty()) throw DimensionError("agent model: " + problems.front());
  const Eigen::Index n = a.state_dim();
  const Eigen::Index m = a.input_dim();
  const Eigen::Index p = a.output_dim();
  const Eigen::Index n0 = exo.state_dim();
  const MatrixXd eye0 = MatrixXd::Identity(n0, n0);
  const MatrixXd eye_n = MatrixXd::Identity(n, n);
  const MatrixXd eye_p = MatrixXd::Identity(p, p);

  // Unknown vector [vec(Pi); vec(Gamma)].
  MatrixXd coeff(n * n0 + p * n0, n * n0 + m * n0);
  coeff.topLeftCorner(n * n0, n * n0) =
      Kron(eye0, a.a()) - Kron(exo.s.transpose(), eye_n);
  coeff.topRightCorner(n * n0, m * n0) = Kron(eye0, a.b());
  coeff.bottomLeftCorner(p * n0, n * n0) = Kron(eye0, a.c());
  coeff.bottomRightCorner(p * n0, m * n0) = Kron(eye0, a.d());
  VectorXd rhs(n * n0 + p * n0);
  if (a.is_leader()) {
    rhs.head(n * n0) = -Vec(*a.e() * exo.r);
    rhs.tail(p * n0) = Vec((eye_p - *a.f()) * exo.r);
  } else {
    rhs.head(n * n0).setZero();
    rhs.tail(p * n0) = Vec(exo.r);
  }
  const VectorXd x = SolveEquilibrated(coeff, rhs, tol);

  RegulatorSolution sol;
  sol.pi = Unvec(x.head(n * n0), n, n0);
  sol.gamma = Unvec(x.tail(m * n0), m, n0);
  const auto [state_res, output_res] =
      ModelRegulatorResiduals(a, exo, sol.pi, sol.gamma);
  sol.residual = std::max(state_res, output_res);
  return sol;
}

RegulatorSolution SolveLeaderRegulatorFromData(const DataRecord& r,
                                               const ExoSystem& exo,
                                               const Tolerances& tol) {
  return RequireFeasible(ComputeLeaderRegulatorFromData(r, exo, tol), tol,
                         r.agent_index, "ic");
}

RegulatorSolution SolveFollowerRegulatorFromData(const DataRecord& r,
                                                 const ExoSystem& exo,
                                                 const Tolerances& tol) {
  return RequireFeasible(ComputeFollowerRegulatorFromData(r, exo, tol), tol,
                         r.agent_index, "iic");
}

RegulatorSolution SolveRegulatorFromModel(const AgentModel& a,
                                          const ExoSystem& exo,
                                          const Tolerances& tol) {
  return RequireFeasible(ComputeRegulatorFromModel(a, exo, tol), tol,
                         std::nullopt, a.is_leader() ? "ii" : "iii");
}

GainDesign GainFromTheta(const DataRecord& r, const MatrixRef& q,
                         const Tolerances& tol) {
  const StabilizationData sd = BuildStabData(r, tol);
  GainDesign out;
  out.right_inverse = RightInverseFromTheta(sd, q);
  out.k = r.up * out.right_inverse;
  out.closed_loop_radius = SpectralRadius(r.xf * out.right_inverse);
  return out;
}

namespace {

GainDesign DesignGain(const DataRecord& r, AgentRole role,
                      const Tolerances& tol) {
  RequireRole(r, role);
  const bool leader = role == AgentRole::kLeader;
  const StabilizationData sd = BuildStabData(r, tol);
  const int agent = r.agent_index;
  if (!sd.rank_ok()) {
    throw DesignError(FailureKind::kNotInformative,
                      "data rank condition fails", agent, leader ? "ia" : "iia");
  }
  if (!PbhStabilizable(sd.g, sd.f, tol)) {
    throw DesignError(FailureKind::kNotInformative,
                      "data-based pair (G, F) is not stabilizable", agent,
                      leader ? "ib" : "iib");
  }
  MatrixXd theta;
  try {
    theta = StabilizingFeedback(sd.g, sd.f, tol);
  } catch (const DesignError& e) {
    throw DesignError(FailureKind::kNotStabilizable, e.what(), agent,
                      leader ? "ib" : "iib");
  }
  MatrixXd q = MatrixXd::Zero(sd.horizon(), sd.psi.rows());
  q.leftCols(sd.state_dim) = theta;

  GainDesign out;
  out.right_inverse = RightInverseFromTheta(sd, q);
  out.k = r.up * out.right_inverse;
  out.closed_loop_radius = SpectralRadius(r.xf * out.right_inverse);
  if (out.closed_loop_radius > 1.0 - tol.schur_margin) {
    std::ostringstream os;
    os << "Xf W has spectral radius " << out.closed_loop_radius;
    throw DesignError(FailureKind::kNotStabilizable, os.str(), agent,
                      leader ? "ib" : "iib");
  }
  const double identity_err =
      MaxAbs(r.xp * out.right_inverse -
             MatrixXd::Identity(sd.state_dim, sd.state_dim));
  const double scale = std::max(1.0, MaxAbs(r.xp) * MaxAbs(out.right_inverse));
  double constraint_err = 0.0;
  if (leader) constraint_err = MaxAbs(r.y0p * out.right_inverse);
  if (identity_err > tol.residual_abs * scale ||
      constraint_err > tol.residual_abs * scale) {
    throw DesignError(FailureKind::kNotStabilizable,
                      "right inverse fails Xp W = I or Y0p W = 0", agent,
                      leader ? "ia" : "iia");
  }
  return out;
}

}  // namespace

GainDesign DesignLeaderGain(const DataRecord& r, const Tolerances& tol) {
  return DesignGain(r, AgentRole::kLeader, tol);
}

GainDesign DesignFollowerGain(const DataRecord& r, const Tolerances& tol) {
  return DesignGain(r, AgentRole::kFollower, tol);
}

ControllerSet Synthesize(const Scenario& s, const std::vector<DataRecord>& records,
                         SynthesisMode mode, const Tolerances& tol) {
  tol.Validate();
  const auto violations = ValidateScenario(s, tol);
  if (!violations.empty()) {
    throw std::invalid_argument("scenario is invalid: " +
                                violations.front().message);
  }
  const int n = s.n_agents();
  std::vector<const DataRecord*> by_agent(n, nullptr);
  if (mode == SynthesisMode::kData) {
    for (const auto& r : records) {
      if (r.agent_index < 0 || r.agent_index >= n) {
        throw DimensionError("record agent index outside scenario");
      }
      by_agent[r.agent_index] = &r;
    }
    for (int i = 0; i < n; ++i) {
      if (by_agent[i] == nullptr) {
        throw std::invalid_argument("missing data record for agent " +
                                    std::to_string(i + 1));
      }
      if (by_agent[i]->role != s.agents[i].role()) {
        throw std::invalid_argument("data record role mismatch for agent " +
                                    std::to_string(i + 1));
      }
    }
  }

  ControllerSet out;
  out.mode = mode;
  out.tolerances = tol;
  out.agents.resize(n);
  for (int i = 0; i < n; ++i) {
    const AgentModel& a = s.agents[i];
    AgentController& c = out.agents[i];
    const bool leader = a.is_leader();
    if (mode == SynthesisMode::kModel) {
      try {
        c.k = StabilizingFeedback(a.a(), a.b(), tol);
      } catch (const DesignError& e) {
        throw DesignError(FailureKind::kNotStabilizable, e.what(), i, "i");
      }
      RegulatorSolution reg = ComputeRegulatorFromModel(a, s.exo, tol);
      reg = RequireFeasible(std::move(reg), tol, i, leader ? "ii" : "iii");
      c.pi = reg.pi;
      c.gamma = reg.gamma;
      c.regulator_residual = reg.residual;
    } else {
      const DataRecord& r = *by_agent[i];
      const GainDesign gain =
          leader ? DesignLeaderGain(r, tol) : DesignFollowerGain(r, tol);
      c.k = gain.k;
      c.data_closed_loop_radius = gain.closed_loop_radius;
      RegulatorSolution reg = leader ? SolveLeaderRegulatorFromData(r, s.exo, tol)
                                     : SolveFollowerRegulatorFromData(r, s.exo, tol);
      c.pi = reg.pi;
      c.gamma = reg.gamma;
      c.m = reg.m;
      c.regulator_residual = reg.residual;
    }
    // Certification against the scenario's model.
    c.model_closed_loop_radius = SpectralRadius(a.a() + a.b() * c.k);
    const auto [sr, orr] = ModelRegulatorResiduals(a, s.exo, c.pi, c.gamma);
    c.model_regulator_residual = std::max(sr, orr);
    if (c.model_closed_loop_radius > 1.0 - tol.schur_margin) {
      std::ostringstream os;
      os << "designed gain leaves rho(A + B K) = " << c.model_closed_loop_radius
         << " for the scenario model";
      throw DesignError(FailureKind::kDesignFailed, os.str(), i,
                        mode == SynthesisMode::kModel ? "i"
                                                      : (leader ? "ib" : "iib"));
    }
  }

  ObserverDesign l_design;
  try {
    l_design = DesignLeaderObserver(s.exo, tol);
  } catch (const DesignError& e) {
    throw DesignError(e.kind(), e.what(), std::nullopt, "c2");
  }
  out.observer_l = l_design.gain;
  out.observer_l_radius = l_design.radius;

  if (s.graph.n_followers() > 0) {
    const FollowerCoupling coupling =
        ComputeFollowerCoupling(BuildPartition(s.graph));
    ObserverDesign h_design;
    try {
      h_design = DesignFollowerObserver(s.exo, coupling, tol);
    } catch (const DesignError& e) {
      throw DesignError(e.kind(), e.what(), std::nullopt, "c5");
    }
    out.observer_h = h_design.gain;
    out.observer_h_radius = h_design.radius;
  } else {
    out.observer_h = MatrixXd::Zero(s.exo.state_dim(), s.exo.output_dim());
  }
  return out;
}

}  // namespace outsync
