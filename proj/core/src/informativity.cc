#include "outsync/informativity.h"

#include <sstream>

#include "outsync/errors.h"
#include "outsync/plant.h"
#include "outsync/synthesis.h"

namespace outsync {

namespace {

StabilizationData BuildFromPsi(AgentRole role, const DataRecord& r,
                               MatrixXd psi, int rank_constraint,
                               const Tolerances& tol) {
  StabilizationData sd;
  sd.role = role;
  sd.state_dim = r.state_dim();
  sd.psi = std::move(psi);
  sd.psi_pinv = Pinv(sd.psi, tol);
  const Eigen::Index n = sd.state_dim;
  const Eigen::Index t = r.horizon;
  sd.g = r.xf * sd.psi_pinv.leftCols(n);
  sd.f = r.xf * (MatrixXd::Identity(t, t) - sd.psi_pinv * sd.psi);
  sd.rank_psi = NumericalRank(sd.psi, tol);
  sd.rank_constraint = rank_constraint;
  return sd;
}

}  // namespace

StabilizationData BuildLeaderStabData(const DataRecord& r,
                                      const Tolerances& tol) {
  r.CheckShapes();
  if (r.role != AgentRole::kLeader) {
    throw std::invalid_argument("leader stabilization data needs a leader record");
  }
  MatrixXd psi(r.xp.rows() + r.y0p.rows(), r.horizon);
  psi << r.xp, r.y0p;
  return BuildFromPsi(AgentRole::kLeader, r, std::move(psi),
                      NumericalRank(r.y0p, tol), tol);
}

StabilizationData BuildFollowerStabData(const DataRecord& r,
                                        const Tolerances& tol) {
  r.CheckShapes();
  if (r.role != AgentRole::kFollower) {
    throw std::invalid_argument(
        "follower stabilization data needs a follower record");
  }
  return BuildFromPsi(AgentRole::kFollower, r, r.xp, 0, tol);
}

StabilizationData BuildStabData(const DataRecord& r, const Tolerances& tol) {
  return r.role == AgentRole::kLeader ? BuildLeaderStabData(r, tol)
                                      : BuildFollowerStabData(r, tol);
}

bool LeaderInformative(const DataRecord& r, const Tolerances& tol) {
  const StabilizationData sd = BuildLeaderStabData(r, tol);
  return sd.rank_ok() && PbhStabilizable(sd.g, sd.f, tol);
}

bool FollowerInformative(const DataRecord& r, const Tolerances& tol) {
  const StabilizationData sd = BuildFollowerStabData(r, tol);
  return sd.rank_ok() && PbhStabilizable(sd.g, sd.f, tol);
}

MatrixXd RightInverseFromTheta(const StabilizationData& sd, const MatrixRef& q) {
  const Eigen::Index n = sd.state_dim;
  const Eigen::Index t = sd.horizon();
  if (q.rows() != t || q.cols() != sd.psi.rows()) {
    throw DimensionError("right-inverse parameter must be T x (n + k)");
  }
  if (!sd.rank_ok()) {
    throw DesignError(FailureKind::kNotInformative,
                      "data matrix rank condition fails; no constrained right "
                      "inverse exists");
  }
  const MatrixXd projector = MatrixXd::Identity(t, t) - sd.psi_pinv * sd.psi;
  return sd.psi_pinv.leftCols(n) + projector * q.leftCols(n);
}

const char* InformativityReport::rank_label() const {
  return role == AgentRole::kLeader ? "ia" : "iia";
}
const char* InformativityReport::stab_label() const {
  return role == AgentRole::kLeader ? "ib" : "iib";
}
const char* InformativityReport::regulator_label() const {
  return role == AgentRole::kLeader ? "ic" : "iic";
}

InformativityReport AssessInformativity(const DataRecord& r,
                                        const ExoSystem& exo,
                                        const Tolerances& tol) {
  InformativityReport rep;
  rep.agent_index = r.agent_index;
  rep.role = r.role;
  const StabilizationData sd = BuildStabData(r, tol);
  rep.rank_ok = sd.rank_ok();
  rep.stab_ok = rep.rank_ok && PbhStabilizable(sd.g, sd.f, tol);
  const RegulatorSolution reg = r.role == AgentRole::kLeader
                                    ? ComputeLeaderRegulatorFromData(r, exo, tol)
                                    : ComputeFollowerRegulatorFromData(r, exo, tol);
  rep.residual = reg.residual;
  rep.regulator_ok = reg.residual <= tol.residual_abs;

  const Eigen::JacobiSVD<MatrixXd> svd(sd.psi);
  std::ostringstream os;
  os << "rank(" << (r.role == AgentRole::kLeader ? "[Xp;Y0p]" : "Xp")
     << ")=" << sd.rank_psi << " (need " << sd.state_dim + sd.rank_constraint
     << "); singular values:";
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    os << ' ' << svd.singularValues()(i);
  }
  os << "; regulator residual " << reg.residual;
  rep.details = os.str();
  return rep;
}

}  // namespace outsync
