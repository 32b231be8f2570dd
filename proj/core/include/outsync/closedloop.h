#pragma once

#include <vector>

#include "outsync/plant.h"
#include "outsync/synthesis.h"

namespace outsync {

/// Raw state of the interconnection at time t.
struct SimState {
  int t = 0;
  VectorXd x0;
  std::vector<VectorXd> x;  // plant states
  std::vector<VectorXd> z;  // exosystem-state estimates

  static SimState Zero(const Scenario& s);
};

/// Signals derived from a SimState and the controllers.
struct AgentSignals {
  VectorXd u;
  VectorXd y;
  VectorXd e;      // y - y0
  VectorXd delta;  // z - x0
  VectorXd eps;    // x - Pi z
};

struct StepSignals {
  VectorXd y0;
  std::vector<AgentSignals> agents;
};

/// Derived signals at one state.
StepSignals ComputeSignals(const Scenario& s, const ControllerSet& c,
                           const SimState& st);

/// One synchronous update of exosystem, observers and plants. Follower
/// observers use their neighbours' estimates from the current (pre-update)
/// state.
SimState Step(const Scenario& s, const ControllerSet& c, const SimState& st);

/// Closed-loop run holding raw states only; derived signals are recomputed
/// from the stored scenario and controllers on demand.
class Trajectory {
 public:
  Trajectory(Scenario scenario, ControllerSet controllers,
             std::vector<SimState> states);

  const std::vector<SimState>& states() const { return states_; }
  int size() const { return static_cast<int>(states_.size()); }
  const Scenario& scenario() const { return scenario_; }
  const ControllerSet& controllers() const { return controllers_; }

  StepSignals SignalsAt(int k) const;

 private:
  Scenario scenario_;
  ControllerSet controllers_;
  std::vector<SimState> states_;
};

/// Records `steps` states, t = 0 .. steps-1, starting from `init`.
Trajectory Run(const Scenario& s, const ControllerSet& c, const SimState& init,
               int steps);

/// Random initial condition (Gaussian, unit variance) for x0, x_i and z_i.
SimState RandomInitialState(const Scenario& s, std::uint64_t seed);

/// Per-step infinity norms of e_i, delta_i, eps_i for each agent.
struct NormSeries {
  std::vector<double> e;
  std::vector<double> delta;
  std::vector<double> eps;
};

std::vector<NormSeries> ComputeNormSeries(const Trajectory& tr);

struct SignalMetrics {
  double tail_max = 0.0;
  /// Per-step contraction factor from a log-linear fit; 0 for a signal that
  /// is identically zero after the transient.
  double decay = 0.0;
};

struct AgentMetrics {
  SignalMetrics e, delta, eps;
};

struct ConvergenceMetrics {
  int tail_window = 0;
  std::vector<AgentMetrics> agents;

  double max_e_tail() const;
};

/// Log-linear fit of log|signal| up to the first sample below 1e-10 of the
/// series peak (roundoff floor), skipping the first 10% of that range.
double EstimateDecay(const std::vector<double>& series);

/// Throws std::invalid_argument if tail_window exceeds the series length or
/// is < 1.
ConvergenceMetrics ComputeMetrics(const std::vector<NormSeries>& series,
                                  int tail_window);
ConvergenceMetrics ComputeMetrics(const Trajectory& tr, int tail_window);

}  // namespace outsync
