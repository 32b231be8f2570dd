#include "outsync/datagen.h"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "outsync/errors.h"

namespace outsync {

void DataRecord::CheckShapes() const {
  const Eigen::Index t = horizon;
  if (t < 1) throw DimensionError("data horizon must be >= 1");
  for (const MatrixXd* m : {&y0p, &up, &xp, &xf, &yp}) {
    if (m->cols() != t) throw DimensionError("data block column count != horizon");
  }
  if (xp.rows() != xf.rows()) throw DimensionError("Xp and Xf row counts differ");
  if (yp.rows() != y0p.rows()) throw DimensionError("Yp and Y0p row counts differ");
}

DataRecord DataRecord::Truncated(int columns) const {
  if (columns < 1 || columns > horizon) {
    throw std::invalid_argument("truncation length out of range");
  }
  DataRecord out = *this;
  out.horizon = columns;
  out.y0p = y0p.leftCols(columns);
  out.up = up.leftCols(columns);
  out.xp = xp.leftCols(columns);
  out.xf = xf.leftCols(columns);
  out.yp = yp.leftCols(columns);
  return out;
}

void ExcitationConfig::Validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(input_scale >= 0) || !(state_scale >= 0)) {
    throw std::invalid_argument("excitation scales must be nonnegative");
  }
}

int DefaultHorizon(const Scenario& s) {
  int best = 0;
  for (const auto& a : s.agents) {
    best = std::max(best, a.state_dim() + a.input_dim() + s.exo.output_dim());
  }
  return best + 2;
}

std::vector<DataRecord> Collect(const Scenario& s, const ExcitationConfig& cfg) {
  cfg.Validate();
  const int t_len = cfg.horizon;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    MatrixXd m(rows, cols);
    // Column-major fill so that column t is drawn before column t+1.
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * normal(rng);
    }
    return m;
  };

  const int p = s.exo.output_dim();
  MatrixXd y0p(p, t_len);
  VectorXd x0 = gaussian(s.exo.state_dim(), 1, 1.0);
  for (int t = 0; t < t_len; ++t) {
    const ExoStep step = StepExo(s.exo, x0);
    y0p.col(t) = step.output;
    x0 = step.next;
  }

  std::vector<DataRecord> out;
  out.reserve(s.agents.size());
  for (int i = 0; i < s.n_agents(); ++i) {
    const AgentModel& a = s.agents[i];
    DataRecord r;
    r.agent_index = i;
    r.role = a.role();
    r.horizon = t_len;
    r.y0p = y0p;
    VectorXd x = gaussian(a.state_dim(), 1, cfg.state_scale);
    r.up = gaussian(a.input_dim(), t_len, cfg.input_scale);
    r.xp.resize(a.state_dim(), t_len);
    r.xf.resize(a.state_dim(), t_len);
    r.yp.resize(p, t_len);
    for (int t = 0; t < t_len; ++t) {
      const AgentStep step = StepAgent(a, x, r.up.col(t), y0p.col(t));
      r.xp.col(t) = x;
      r.yp.col(t) = step.output;
      r.xf.col(t) = step.next;
      x = step.next;
    }
    out.push_back(std::move(r));
  }
  return out;
}

double ConsistencyResidual(const Scenario& s, const DataRecord& r) {
  r.CheckShapes();
  if (r.agent_index < 0 || r.agent_index >= s.n_agents()) {
    throw DimensionError("record agent index outside scenario");
  }
  const AgentModel& a = s.agents[r.agent_index];
  if (a.state_dim() != r.state_dim() || a.input_dim() != r.input_dim() ||
      a.output_dim() != r.output_dim()) {
    throw DimensionError("record dimensions do not match agent model");
  }
  MatrixXd next = a.a() * r.xp + a.b() * r.up;
  MatrixXd out = a.c() * r.xp + a.d() * r.up;
  if (a.is_leader()) {
    next += *a.e() * r.y0p;
    out += *a.f() * r.y0p;
  }
  return std::max(MaxAbs(next - r.xf), MaxAbs(out - r.yp));
}

bool VerifyConsistency(const Scenario& s, const DataRecord& r,
                       const Tolerances& tol) {
  try {
    return ConsistencyResidual(s, r) <= tol.residual_abs;
  } catch (const DimensionError&) {
    return false;
  }
}

}  // namespace outsync
