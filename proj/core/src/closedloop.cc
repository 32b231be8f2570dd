#include "outsync/closedloop.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "outsync/errors.h"

namespace outsync {

SimState SimState::Zero(const Scenario& s) {
  SimState st;
  st.x0 = VectorXd::Zero(s.exo.state_dim());
  for (const auto& a : s.agents) {
    st.x.push_back(VectorXd::Zero(a.state_dim()));
    st.z.push_back(VectorXd::Zero(s.exo.state_dim()));
  }
  return st;
}

namespace {

void CheckDimensions(const Scenario& s, const ControllerSet& c,
                     const SimState& st) {
  const auto n = static_cast<size_t>(s.n_agents());
  if (c.agents.size() != n || st.x.size() != n || st.z.size() != n) {
    throw DimensionError("agent count differs between scenario, controllers "
                         "and state");
  }
  const Eigen::Index n0 = s.exo.state_dim();
  if (st.x0.size() != n0) throw DimensionError("exosystem state size");
  for (size_t i = 0; i < n; ++i) {
    const AgentModel& a = s.agents[i];
    const AgentController& k = c.agents[i];
    if (st.x[i].size() != a.state_dim() || st.z[i].size() != n0) {
      throw DimensionError("agent " + std::to_string(i + 1) + " state size");
    }
    if (k.k.rows() != a.input_dim() || k.k.cols() != a.state_dim() ||
        k.pi.rows() != a.state_dim() || k.pi.cols() != n0 ||
        k.gamma.rows() != a.input_dim() || k.gamma.cols() != n0) {
      throw DimensionError("agent " + std::to_string(i + 1) +
                           " controller shape");
    }
  }
  const Eigen::Index p = s.exo.output_dim();
  if (c.observer_l.rows() != n0 || c.observer_l.cols() != p) {
    throw DimensionError("observer gain L must be n0 x p");
  }
  if (s.graph.n_followers() > 0 &&
      (c.observer_h.rows() != n0 || c.observer_h.cols() != p)) {
    throw DimensionError("observer gain H must be n0 x p");
  }
}

VectorXd ControlInput(const AgentController& k, const VectorXd& x,
                      const VectorXd& z) {
  return k.k * (x - k.pi * z) + k.gamma * z;
}

}  // namespace

StepSignals ComputeSignals(const Scenario& s, const ControllerSet& c,
                           const SimState& st) {
  CheckDimensions(s, c, st);
  StepSignals out;
  out.y0 = s.exo.r * st.x0;
  for (int i = 0; i < s.n_agents(); ++i) {
    const AgentController& k = c.agents[i];
    AgentSignals sig;
    sig.u = ControlInput(k, st.x[i], st.z[i]);
    sig.y = StepAgent(s.agents[i], st.x[i], sig.u, out.y0).output;
    sig.e = sig.y - out.y0;
    sig.delta = st.z[i] - st.x0;
    sig.eps = st.x[i] - k.pi * st.z[i];
    out.agents.push_back(std::move(sig));
  }
  return out;
}

SimState Step(const Scenario& s, const ControllerSet& c, const SimState& st) {
  CheckDimensions(s, c, st);
  const int n = s.n_agents();
  const int nl = s.graph.n_leaders;
  const MatrixXd& sm = s.exo.s;
  const MatrixXd& rm = s.exo.r;
  const VectorXd y0 = rm * st.x0;

  SimState next;
  next.t = st.t + 1;
  next.x0 = sm * st.x0;
  next.x.resize(n);
  next.z.resize(n);
  for (int i = 0; i < n; ++i) {
    const VectorXd& zi = st.z[i];
    const VectorXd rzi = rm * zi;
    if (i < nl) {
      next.z[i] = sm * zi - c.observer_l * (y0 - rzi);
    } else {
      VectorXd innovation = VectorXd::Zero(rm.rows());
      double degree = 0.0;
      for (int j = 0; j < n; ++j) {
        const double w = s.graph.adjacency(i, j);
        if (w == 0.0) continue;
        degree += w;
        innovation += w * ((j < nl ? y0 : VectorXd(rm * st.z[j])) - rzi);
      }
      next.z[i] = sm * zi + c.observer_h * innovation / (1.0 + degree);
    }
    const VectorXd u = ControlInput(c.agents[i], st.x[i], zi);
    next.x[i] = StepAgent(s.agents[i], st.x[i], u, y0).next;
  }
  return next;
}

Trajectory::Trajectory(Scenario scenario, ControllerSet controllers,
                       std::vector<SimState> states)
    : scenario_(std::move(scenario)),
      controllers_(std::move(controllers)),
      states_(std::move(states)) {}

StepSignals Trajectory::SignalsAt(int k) const {
  return ComputeSignals(scenario_, controllers_, states_.at(k));
}

Trajectory Run(const Scenario& s, const ControllerSet& c, const SimState& init,
               int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  CheckDimensions(s, c, init);
  std::vector<SimState> states;
  states.reserve(steps);
  states.push_back(init);
  for (int k = 1; k < steps; ++k) states.push_back(Step(s, c, states.back()));
  return Trajectory(s, c, std::move(states));
}

SimState RandomInitialState(const Scenario& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Eigen::Index size) {
    VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = normal(rng);
    return v;
  };
  SimState st;
  st.x0 = draw(s.exo.state_dim());
  for (const auto& a : s.agents) {
    st.x.push_back(draw(a.state_dim()));
    st.z.push_back(draw(s.exo.state_dim()));
  }
  return st;
}

std::vector<NormSeries> ComputeNormSeries(const Trajectory& tr) {
  std::vector<NormSeries> out(tr.scenario().n_agents());
  auto inf_norm = [](const VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  };
  for (int k = 0; k < tr.size(); ++k) {
    const StepSignals sig = tr.SignalsAt(k);
    for (size_t i = 0; i < out.size(); ++i) {
      out[i].e.push_back(inf_norm(sig.agents[i].e));
      out[i].delta.push_back(inf_norm(sig.agents[i].delta));
      out[i].eps.push_back(inf_norm(sig.agents[i].eps));
    }
  }
  return out;
}

double EstimateDecay(const std::vector<double>& series) {
  double peak = 0.0;
  for (double v : series) peak = std::max(peak, v);
  if (!(peak > 0.0)) return 0.0;
  const double floor = 1e-10 * peak;
  size_t end = series.size();
  for (size_t k = 0; k < series.size(); ++k) {
    if (series[k] < floor) {
      end = k;
      break;
    }
  }
  double sum_t = 0, sum_y = 0, sum_tt = 0, sum_ty = 0;
  int count = 0;
  for (size_t k = end / 10; k < end; ++k) {
    const double v = series[k];
    if (!(v > 0.0)) continue;
    const double t = static_cast<double>(k);
    const double y = std::log(v);
    sum_t += t;
    sum_y += y;
    sum_tt += t * t;
    sum_ty += t * y;
    ++count;
  }
  if (count < 2) return 0.0;
  const double denom = count * sum_tt - sum_t * sum_t;
  if (denom == 0.0) return 0.0;
  const double slope = (count * sum_ty - sum_t * sum_y) / denom;
  return std::exp(slope);
}

double ConvergenceMetrics::max_e_tail() const {
  double m = 0.0;
  for (const auto& a : agents) m = std::max(m, a.e.tail_max);
  return m;
}

ConvergenceMetrics ComputeMetrics(const std::vector<NormSeries>& series,
                                  int tail_window) {
  ConvergenceMetrics out;
  out.tail_window = tail_window;
  auto summarize = [&](const std::vector<double>& v) {
    if (tail_window < 1 || static_cast<size_t>(tail_window) > v.size()) {
      throw std::invalid_argument("tail window larger than the trajectory");
    }
    SignalMetrics m;
    for (size_t k = v.size() - tail_window; k < v.size(); ++k) {
      m.tail_max = std::max(m.tail_max, v[k]);
    }
    m.decay = EstimateDecay(v);
    return m;
  };
  for (const auto& s : series) {
    out.agents.push_back({summarize(s.e), summarize(s.delta), summarize(s.eps)});
  }
  return out;
}

ConvergenceMetrics ComputeMetrics(const Trajectory& tr, int tail_window) {
  return ComputeMetrics(ComputeNormSeries(tr), tail_window);
}

}  // namespace outsync
