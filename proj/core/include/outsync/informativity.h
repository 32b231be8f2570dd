#pragma once

#include <string>

#include "outsync/datagen.h"
#include "outsync/matops.h"

namespace outsync {

/// Quantities behind the data-based stabilization tests for one agent.
///
/// For a leader psi = [Xp; Y0p]; for a follower psi = Xp (no constraint
/// rows). `g` and `f` form the pair (G, F) whose stabilizability decides
/// informativity:
///   G = Xf psi^+ [I; 0],  F = Xf (I_T - psi^+ psi).
struct StabilizationData {
  AgentRole role = AgentRole::kFollower;
  int state_dim = 0;
  MatrixXd psi;
  MatrixXd psi_pinv;
  MatrixXd g;
  MatrixXd f;
  int rank_psi = 0;
  /// rank(Y0p) for leaders, 0 for followers.
  int rank_constraint = 0;

  /// rank(psi) == n + rank(Y0p) (leaders) or rank(Xp) == n (followers).
  bool rank_ok() const { return rank_psi == state_dim + rank_constraint; }
  int horizon() const { return static_cast<int>(psi.cols()); }
};

StabilizationData BuildLeaderStabData(const DataRecord& r,
                                      const Tolerances& tol = {});
StabilizationData BuildFollowerStabData(const DataRecord& r,
                                        const Tolerances& tol = {});
/// Dispatches on r.role.
StabilizationData BuildStabData(const DataRecord& r, const Tolerances& tol = {});

/// Rank condition and PBH stabilizability of (G, F).
bool LeaderInformative(const DataRecord& r, const Tolerances& tol = {});
bool FollowerInformative(const DataRecord& r, const Tolerances& tol = {});

/// Right inverse of Xp from the affine parametrization
///   (psi^+ + (I_T - psi^+ psi) q) [I_n; 0],
/// where q is T x (n + k) and k is the number of constraint rows of psi.
/// Whenever rank_ok() holds the result W satisfies psi W = [I_n; 0].
///
/// Throws DesignError(kNotInformative) when the rank precondition fails and
/// DimensionError on a wrongly sized q.
MatrixXd RightInverseFromTheta(const StabilizationData& sd, const MatrixRef& q);

/// Per-agent verdicts on the three data-based solvability conditions:
/// (ia, ib, ic) for leaders and (iia, iib, iic) for followers.
struct InformativityReport {
  int agent_index = 0;
  AgentRole role = AgentRole::kFollower;
  bool rank_ok = false;
  bool stab_ok = false;
  bool regulator_ok = false;
  /// Residual of the stacked regulator solve.
  double residual = 0.0;
  std::string details;

  bool ok() const { return rank_ok && stab_ok && regulator_ok; }
  /// Labels of the three conditions for this agent's role.
  const char* rank_label() const;
  const char* stab_label() const;
  const char* regulator_label() const;
};

InformativityReport AssessInformativity(const DataRecord& r,
                                        const ExoSystem& exo,
                                        const Tolerances& tol = {});

}  // namespace outsync
