#include "outsync/plant.h"

#include <algorithm>
#include <sstream>

#include "outsync/errors.h"

namespace outsync {

const char* ToString(AgentRole role) {
  return role == AgentRole::kLeader ? "leader" : "follower";
}

AgentModel AgentModel::Leader(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d,
                              MatrixXd e, MatrixXd f) {
  AgentModel m;
  m.role_ = AgentRole::kLeader;
  m.a_ = std::move(a);
  m.b_ = std::move(b);
  m.c_ = std::move(c);
  m.d_ = std::move(d);
  m.e_ = std::move(e);
  m.f_ = std::move(f);
  return m;
}

AgentModel AgentModel::Follower(MatrixXd a, MatrixXd b, MatrixXd c,
                                MatrixXd d) {
  AgentModel m;
  m.role_ = AgentRole::kFollower;
  m.a_ = std::move(a);
  m.b_ = std::move(b);
  m.c_ = std::move(c);
  m.d_ = std::move(d);
  return m;
}

namespace {

std::string Shape(const MatrixXd& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

std::vector<std::string> AgentModel::ShapeProblems(int p) const {
  std::vector<std::string> out;
  const auto n = a_.rows();
  const auto m = b_.cols();
  if (n < 1 || a_.cols() != n) out.push_back("A must be square, got " + Shape(a_));
  if (b_.rows() != n || m < 1) out.push_back("B must be n x m, got " + Shape(b_));
  if (c_.rows() != p || c_.cols() != n) out.push_back("C must be p x n, got " + Shape(c_));
  if (d_.rows() != p || d_.cols() != m) out.push_back("D must be p x m, got " + Shape(d_));
  if (is_leader()) {
    if (!e_ || e_->rows() != n || e_->cols() != p) {
      out.push_back("leader E must be n x p");
    }
    if (!f_ || f_->rows() != p || f_->cols() != p) {
      out.push_back("leader F must be p x p");
    }
  }
  for (const MatrixXd* mat : {&a_, &b_, &c_, &d_}) {
    if (!mat->allFinite()) {
      out.push_back("model has non-finite entries");
      break;
    }
  }
  return out;
}

int ObservabilityRank(const MatrixRef& r, const MatrixRef& s,
                      const Tolerances& tol) {
  const auto n = s.rows();
  const auto p = r.rows();
  MatrixXd obs(p * n, n);
  MatrixXd block = r;
  for (Eigen::Index k = 0; k < n; ++k) {
    obs.middleRows(k * p, p) = block;
    block = block * s;
  }
  return NumericalRank(obs, tol);
}

std::vector<Violation> ValidateExosystem(const ExoSystem& e,
                                         const Tolerances& tol) {
  std::vector<Violation> out;
  if (e.s.rows() < 1 || e.s.rows() != e.s.cols() || e.r.rows() < 1 ||
      e.r.cols() != e.s.rows()) {
    out.push_back({"structure", "exosystem S must be square and R must have "
                                "as many columns as S"});
    return out;
  }
  if (!e.s.allFinite() || !e.r.allFinite()) {
    out.push_back({"structure", "exosystem has non-finite entries"});
    return out;
  }
  const Spectrum spec = ComputeSpectrum(e.s);
  for (const auto& l : spec.eigenvalues) {
    if (std::abs(std::abs(l) - 1.0) > kUnitCircleTolerance) {
      std::ostringstream os;
      os << "eigenvalue " << l.real() << (l.imag() < 0 ? "" : "+") << l.imag()
         << "i of S has modulus " << std::abs(l) << ", not on the unit circle";
      out.push_back({"assumption1", os.str()});
    }
  }
  // Pairwise separation of the eigenvalues (sorted by modulus then angle, so
  // equal eigenvalues are adjacent, but checked all-pairs anyway).
  for (size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    for (size_t j = i + 1; j < spec.eigenvalues.size(); ++j) {
      const auto& a = spec.eigenvalues[i];
      const auto& b = spec.eigenvalues[j];
      if (std::abs(a - b) <= kEigenvalueSeparation) {
        std::ostringstream os;
        os << "eigenvalue " << a.real() << (a.imag() < 0 ? "" : "+")
           << a.imag() << "i of S is repeated";
        out.push_back({"assumption1", os.str()});
      }
    }
  }
  const int rank = ObservabilityRank(e.r, e.s, tol);
  if (rank < e.state_dim()) {
    std::ostringstream os;
    os << "(R, S) is not observable: observability rank " << rank << " < "
       << e.state_dim();
    out.push_back({"assumption2", os.str()});
  }
  return out;
}

std::vector<Violation> ValidateScenario(const Scenario& s,
                                        const Tolerances& tol) {
  std::vector<Violation> out = ValidateExosystem(s.exo, tol);
  bool graph_ok = true;
  try {
    s.graph.Validate();
  } catch (const std::exception& ex) {
    out.push_back({"structure", std::string("graph: ") + ex.what()});
    graph_ok = false;
  }
  if (graph_ok && s.graph.n_agents() != s.n_agents()) {
    std::ostringstream os;
    os << "graph has " << s.graph.n_agents() << " nodes but scenario has "
       << s.n_agents() << " agents";
    out.push_back({"structure", os.str()});
    graph_ok = false;
  }
  const int p = s.exo.output_dim();
  for (int i = 0; i < s.n_agents(); ++i) {
    const AgentModel& a = s.agents[i];
    const bool should_lead = graph_ok && i < s.graph.n_leaders;
    if (graph_ok && a.is_leader() != should_lead) {
      std::ostringstream os;
      os << "agent " << i + 1 << " is a " << ToString(a.role())
         << " but the graph places it among the "
         << (should_lead ? "leaders" : "followers")
         << " (leaders must be listed first)";
      out.push_back({"structure", os.str()});
    }
    for (const auto& problem : a.ShapeProblems(p)) {
      out.push_back({"structure", "agent " + std::to_string(i + 1) + ": " + problem});
    }
  }
  if (graph_ok && !HasRootedSpanningTree(s.graph)) {
    out.push_back({"assumption3", "graph extended with the exosystem node has "
                                  "no spanning tree rooted at the exosystem"});
  }
  return out;
}

ExoStep StepExo(const ExoSystem& e, const Eigen::Ref<const VectorXd>& x0) {
  if (x0.size() != e.state_dim()) throw DimensionError("exosystem state size");
  return {e.s * x0, e.r * x0};
}

AgentStep StepAgent(const AgentModel& a, const Eigen::Ref<const VectorXd>& x,
                    const Eigen::Ref<const VectorXd>& u,
                    const Eigen::Ref<const VectorXd>& y0) {
  if (x.size() != a.state_dim()) throw DimensionError("agent state size");
  if (u.size() != a.input_dim()) throw DimensionError("agent input size");
  AgentStep out{a.a() * x + a.b() * u, a.c() * x + a.d() * u};
  if (a.is_leader()) {
    if (y0.size() != a.output_dim()) throw DimensionError("exosystem output size");
    out.next += *a.e() * y0;
    out.output += *a.f() * y0;
  }
  return out;
}

}  // namespace outsync
