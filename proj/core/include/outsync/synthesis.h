#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "outsync/datagen.h"
#include "outsync/informativity.h"
#include "outsync/netgraph.h"
#include "outsync/plant.h"

namespace outsync {

/// Solution of the regulator equations of one agent. In data mode
/// pi = Xp M and gamma = Up M; in model mode `m` is empty.
struct RegulatorSolution {
  std::optional<MatrixXd> m;
  MatrixXd pi;
  MatrixXd gamma;
  /// Infinity-norm violation of the equations that were solved.
  double residual = 0.0;
};

/// Minimal-norm M solving Xf M = Xp M S, Yp M = R, Y0p M = R (leaders) or the
/// first two equations (followers). Never throws on infeasibility; check
/// `residual` against Tolerances::residual_abs.
RegulatorSolution ComputeLeaderRegulatorFromData(const DataRecord& r,
                                                 const ExoSystem& exo,
                                                 const Tolerances& tol = {});
RegulatorSolution ComputeFollowerRegulatorFromData(const DataRecord& r,
                                                   const ExoSystem& exo,
                                                   const Tolerances& tol = {});
/// Minimal-norm (Pi, Gamma) from the agent model:
///   A Pi + B Gamma + E R = Pi S,  C Pi + D Gamma + F R = R  (leaders)
///   A Pi + B Gamma = Pi S,        C Pi + D Gamma = R        (followers)
RegulatorSolution ComputeRegulatorFromModel(const AgentModel& a,
                                            const ExoSystem& exo,
                                            const Tolerances& tol = {});

/// Throwing variants: DesignError(kInfeasible) when residual > residual_abs,
/// with condition ic / iic (data) or ii / iii (model).
RegulatorSolution SolveLeaderRegulatorFromData(const DataRecord& r,
                                               const ExoSystem& exo,
                                               const Tolerances& tol = {});
RegulatorSolution SolveFollowerRegulatorFromData(const DataRecord& r,
                                                 const ExoSystem& exo,
                                                 const Tolerances& tol = {});
RegulatorSolution SolveRegulatorFromModel(const AgentModel& a,
                                          const ExoSystem& exo,
                                          const Tolerances& tol = {});

/// Residuals of the model-based regulator equations for a given (Pi, Gamma):
/// first = state equation, second = output equation (infinity norms).
std::pair<double, double> ModelRegulatorResiduals(const AgentModel& a,
                                                  const ExoSystem& exo,
                                                  const MatrixRef& pi,
                                                  const MatrixRef& gamma);

struct GainDesign {
  MatrixXd k;
  /// Right inverse W of Xp used for the gain (K = Up W).
  MatrixXd right_inverse;
  /// Spectral radius of Xf W.
  double closed_loop_radius = 0.0;
};

/// Data-driven gain: Theta from the Riccati design on (G, F), then
/// W = psi^+ [I; 0] + (I - psi^+ psi) Theta and K = Up W. Verifies Xf W is
/// Schur and, for leaders, Y0p W = 0.
///
/// Throws DesignError(kNotInformative) when the informativity test fails and
/// DesignError(kNotStabilizable) when the Riccati design or the verification
/// fails.
GainDesign DesignLeaderGain(const DataRecord& r, const Tolerances& tol = {});
GainDesign DesignFollowerGain(const DataRecord& r, const Tolerances& tol = {});

/// Same pipeline with a caller-supplied parameter q (T x (n + k)) in place of
/// the Riccati choice. Reports the radius without requiring it to be Schur.
GainDesign GainFromTheta(const DataRecord& r, const MatrixRef& q,
                         const Tolerances& tol = {});

struct ObserverDesign {
  MatrixXd gain;
  double radius = 0.0;
};

/// L = K^T with K = StabilizingFeedback(S^T, R^T), so S + L R is Schur.
ObserverDesign DesignLeaderObserver(const ExoSystem& exo,
                                    const Tolerances& tol = {});

/// max_k rho(S - lambda_k H R) over the coupling eigenvalues.
double WorstCouplingRadius(const ExoSystem& exo, const Spectrum& coupling,
                           const MatrixRef& h);

struct FollowerObserverOptions {
  int starts = 32;
  std::uint64_t seed = 0x5eed;
  int max_evaluations = 4000;
};

/// H with max_k rho(S - lambda_k H R) < 1 - schur_margin, found by multi-start
/// Nelder-Mead on the worst-case radius, with a rank-one H = q v^T search as
/// fallback. Only verified gains are returned.
///
/// Throws DesignError(kDesignFailed) if no verified H is found or the
/// coupling spectrum violates the disk condition.
ObserverDesign DesignFollowerObserver(const ExoSystem& exo,
                                      const FollowerCoupling& coupling,
                                      const Tolerances& tol = {},
                                      const FollowerObserverOptions& opts = {});

enum class SynthesisMode { kData, kModel };

const char* ToString(SynthesisMode mode);

struct AgentController {
  MatrixXd k;
  MatrixXd pi;
  MatrixXd gamma;
  /// Data mode only.
  std::optional<MatrixXd> m;
  double regulator_residual = 0.0;
  /// rho(Xf W), data mode only.
  std::optional<double> data_closed_loop_radius;
  /// rho(A + B K) for the scenario's model.
  double model_closed_loop_radius = 0.0;
  /// Model regulator equations evaluated at (pi, gamma).
  double model_regulator_residual = 0.0;
};

/// All design products with their certified margins.
struct ControllerSet {
  SynthesisMode mode = SynthesisMode::kModel;
  Tolerances tolerances;
  std::vector<AgentController> agents;
  MatrixXd observer_l;
  MatrixXd observer_h;
  /// rho(S + L R).
  double observer_l_radius = 0.0;
  /// max_k rho(S - lambda_k H R); absent without followers.
  std::optional<double> observer_h_radius;
};

/// Designs every gain, regulator and observer.
///
/// In model mode uses StabilizingFeedback(A_i, B_i) and the model regulator
/// equations. In data mode designs only from `records`; the scenario's agent
/// matrices are used afterwards to certify rho(A_i + B_i K_i).
///
/// Throws DesignError carrying the agent and failed condition.
ControllerSet Synthesize(const Scenario& s, const std::vector<DataRecord>& records,
                         SynthesisMode mode, const Tolerances& tol = {});

}  // namespace outsync
