#pragma once

#include <optional>
#include <string>
#include <vector>

#include "outsync/matops.h"
#include "outsync/netgraph.h"

namespace outsync {

/// Autonomous reference generator x0+ = S x0, y0 = R x0.
struct ExoSystem {
  MatrixXd s;
  MatrixXd r;

  int state_dim() const { return static_cast<int>(s.rows()); }
  int output_dim() const { return static_cast<int>(r.rows()); }
};

enum class AgentRole { kLeader, kFollower };

const char* ToString(AgentRole role);

/// State-space model of one agent. Leaders carry the exosystem-output
/// injection matrices E and F; followers have neither.
class AgentModel {
 public:
  static AgentModel Leader(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d,
                           MatrixXd e, MatrixXd f);
  static AgentModel Follower(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d);

  AgentRole role() const { return role_; }
  bool is_leader() const { return role_ == AgentRole::kLeader; }

  const MatrixXd& a() const { return a_; }
  const MatrixXd& b() const { return b_; }
  const MatrixXd& c() const { return c_; }
  const MatrixXd& d() const { return d_; }
  /// Present iff the agent is a leader.
  const std::optional<MatrixXd>& e() const { return e_; }
  const std::optional<MatrixXd>& f() const { return f_; }

  int state_dim() const { return static_cast<int>(a_.rows()); }
  int input_dim() const { return static_cast<int>(b_.cols()); }
  int output_dim() const { return static_cast<int>(c_.rows()); }

  /// Human-readable shape problems; empty when the model is consistent with
  /// an exosystem of output dimension `p`.
  std::vector<std::string> ShapeProblems(int p) const;

 private:
  AgentModel() = default;

  AgentRole role_ = AgentRole::kFollower;
  MatrixXd a_, b_, c_, d_;
  std::optional<MatrixXd> e_, f_;
};

/// Full problem instance. Agents are ordered leaders first, matching the
/// graph's leader/follower split.
struct Scenario {
  ExoSystem exo;
  std::vector<AgentModel> agents;
  NetworkGraph graph;

  int n_agents() const { return static_cast<int>(agents.size()); }
};

struct Violation {
  /// "assumption1", "assumption2", "assumption3" or "structure".
  std::string code;
  std::string message;
};

/// Unit-circle and separation thresholds for the exosystem eigenvalue test.
inline constexpr double kUnitCircleTolerance = 1e-6;
inline constexpr double kEigenvalueSeparation = 1e-6;

/// Eigenvalues of S simple and on the unit circle; (R, S) observable.
std::vector<Violation> ValidateExosystem(const ExoSystem& e,
                                         const Tolerances& tol = {});

/// Exosystem assumptions, spanning-tree connectivity and structural checks.
std::vector<Violation> ValidateScenario(const Scenario& s,
                                        const Tolerances& tol = {});

/// rank [R; RS; ...; RS^(n-1)].
int ObservabilityRank(const MatrixRef& r, const MatrixRef& s,
                      const Tolerances& tol = {});

struct ExoStep {
  VectorXd next;
  VectorXd output;
};

ExoStep StepExo(const ExoSystem& e, const Eigen::Ref<const VectorXd>& x0);

struct AgentStep {
  VectorXd next;
  VectorXd output;
};

/// One step of the agent dynamics. `y0` is used only by leaders.
AgentStep StepAgent(const AgentModel& a, const Eigen::Ref<const VectorXd>& x,
                    const Eigen::Ref<const VectorXd>& u,
                    const Eigen::Ref<const VectorXd>& y0);

}  // namespace outsync
