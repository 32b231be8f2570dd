#pragma once

#include <cstdint>
#include <vector>

#include "outsync/plant.h"

namespace outsync {

/// Offline data of one agent over a horizon of T samples.
///
/// Column t of xp is x(t); column t of xf is x(t+1); up, yp and y0p hold
/// u(t), y(t) and the exosystem output y0(t) for t = 0 .. T-1.
struct DataRecord {
  int agent_index = 0;  // zero-based position in the scenario
  AgentRole role = AgentRole::kFollower;
  int horizon = 0;
  MatrixXd y0p;
  MatrixXd up;
  MatrixXd xp;
  MatrixXd xf;
  MatrixXd yp;

  int state_dim() const { return static_cast<int>(xp.rows()); }
  int input_dim() const { return static_cast<int>(up.rows()); }
  int output_dim() const { return static_cast<int>(yp.rows()); }

  /// Throws DimensionError unless every block has `horizon` columns and the
  /// row counts agree (xp/xf, yp/y0p).
  void CheckShapes() const;

  /// A copy restricted to the first `columns` samples.
  DataRecord Truncated(int columns) const;
};

/// Gaussian excitation for an offline experiment. The exosystem initial
/// state is always drawn with unit standard deviation; agent initial states
/// and inputs use state_scale and input_scale (zero disables them).
struct ExcitationConfig {
  std::uint64_t seed = 0;
  int horizon = 0;
  double input_scale = 1.0;
  double state_scale = 1.0;

  void Validate() const;
};

/// max_i (n_i + m_i + p) + 2.
int DefaultHorizon(const Scenario& s);

/// Simulates the true plants under seeded Gaussian excitation. One shared
/// exosystem rollout feeds every leader. Deterministic for a given seed:
/// the draws happen in the order x0(0), then per agent x_i(0) followed by
/// u_i(0..T-1), from a single std::mt19937_64 stream.
std::vector<DataRecord> Collect(const Scenario& s, const ExcitationConfig& cfg);

/// Max violation of [Xf; Yp] = [[A, B, E], [C, D, F]] [Xp; Up; Y0p] for the
/// agent's true model (E, F, Y0p terms only for leaders).
double ConsistencyResidual(const Scenario& s, const DataRecord& r);

/// True iff ConsistencyResidual <= residual_abs. A record whose shapes do not
/// fit the agent's model is inconsistent.
bool VerifyConsistency(const Scenario& s, const DataRecord& r,
                       const Tolerances& tol = {});

}  // namespace outsync
