#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "outsync/errors.h"
#include "outsync/synthesis.h"

namespace outsync {

ObserverDesign DesignLeaderObserver(const ExoSystem& exo, const Tolerances& tol) {
  ObserverDesign out;
  out.gain = StabilizingFeedback(exo.s.transpose(), exo.r.transpose(), tol)
                 .transpose();
  out.radius = SpectralRadius(exo.s + out.gain * exo.r);
  return out;
}

double WorstCouplingRadius(const ExoSystem& exo, const Spectrum& coupling,
                           const MatrixRef& h) {
  if (h.rows() != exo.state_dim() || h.cols() != exo.output_dim()) {
    throw DimensionError("H must be n0 x p");
  }
  const MatrixXcd s = exo.s.cast<std::complex<double>>();
  const MatrixXcd hr = (h * exo.r).cast<std::complex<double>>();
  double worst = 0.0;
  for (const auto& lambda : coupling.eigenvalues) {
    worst = std::max(worst, SpectralRadius(MatrixXcd(s - lambda * hr)));
  }
  return worst;
}

namespace {

using Objective = std::function<double(const VectorXd&)>;

struct SearchResult {
  VectorXd point;
  double value = std::numeric_limits<double>::infinity();
};

// Nelder-Mead simplex minimization with the standard coefficients
// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
SearchResult NelderMead(const Objective& f, const VectorXd& start, double step,
                        int max_evaluations, double stop_below) {
  const Eigen::Index dim = start.size();
  std::vector<VectorXd> simplex(dim + 1, start);
  for (Eigen::Index i = 0; i < dim; ++i) simplex[i + 1](i) += step;
  std::vector<double> values(dim + 1);
  int evals = 0;
  auto eval = [&](const VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  for (size_t i = 0; i < simplex.size(); ++i) values[i] = eval(simplex[i]);

  std::vector<size_t> order(dim + 1);
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    const size_t best = order.front();
    const size_t worst = order.back();
    const size_t second_worst = order[order.size() - 2];
    if (values[best] < stop_below) break;
    if (values[worst] - values[best] <= 1e-12 * (1.0 + std::abs(values[best]))) {
      double diameter = 0.0;
      for (const auto& v : simplex) {
        diameter = std::max(diameter, (v - simplex[best]).cwiseAbs().maxCoeff());
      }
      if (diameter < 1e-10) break;
    }

    VectorXd centroid = VectorXd::Zero(dim);
    for (size_t i : order) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(dim);

    const VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const VectorXd contracted =
        outside ? VectorXd(centroid + 0.5 * (reflected - centroid))
                : VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < std::min(fr, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  SearchResult out;
  out.point = simplex[it - values.begin()];
  out.value = *it;
  return out;
}

MatrixXd ToMatrix(const VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return Unvec(v, rows, cols);
}

}  // namespace

ObserverDesign DesignFollowerObserver(const ExoSystem& exo,
                                      const FollowerCoupling& coupling,
                                      const Tolerances& tol,
                                      const FollowerObserverOptions& opts) {
  if (!SatisfiesCouplingDiskCondition(coupling.spectrum, tol)) {
    throw DesignError(FailureKind::kDesignFailed,
                      "follower coupling spectrum violates the disk condition "
                      "(eigenvalue at 0 or outside |z - 1| < 1); check graph "
                      "connectivity");
  }
  const Eigen::Index n0 = exo.state_dim();
  const Eigen::Index p = exo.output_dim();
  const double threshold = 1.0 - tol.schur_margin;
  const double r_norm = exo.r.norm();
  const double scale =
      exo.s.norm() / (r_norm > 0 ? r_norm : 1.0) / std::sqrt(double(n0));

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vector = [&](Eigen::Index size) {
    VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = normal(rng);
    return v;
  };

  // Stop each local search once the worst radius is comfortably inside the
  // unit disk; any H below the threshold is acceptable, but a deeper minimum
  // gives faster estimator convergence.
  const double stop_below = 1e-3;

  const Objective full = [&](const VectorXd& x) {
    return WorstCouplingRadius(exo, coupling.spectrum, ToMatrix(x, n0, p));
  };
  for (int k = 0; k < opts.starts; ++k) {
    const VectorXd start = scale * random_vector(n0 * p);
    const SearchResult res =
        NelderMead(full, start, 0.5 * scale, opts.max_evaluations, stop_below);
    const MatrixXd h = ToMatrix(res.point, n0, p);
    const double radius = WorstCouplingRadius(exo, coupling.spectrum, h);
    if (radius < threshold) return {h, radius};
  }

  // Rank-one fallback H = q v^T with (v^T R, S) observable.
  for (int k = 0; k < opts.starts; ++k) {
    const VectorXd v = k < p ? VectorXd(VectorXd::Unit(p, k)) : random_vector(p);
    const MatrixXd vr = v.transpose() * exo.r;
    if (ObservabilityRank(vr, exo.s, tol) < n0) continue;
    const Objective rank_one = [&](const VectorXd& q) {
      return WorstCouplingRadius(exo, coupling.spectrum,
                                 MatrixXd(q * v.transpose()));
    };
    const VectorXd start = scale * random_vector(n0);
    const SearchResult res =
        NelderMead(rank_one, start, 0.5 * scale, opts.max_evaluations, stop_below);
    const MatrixXd h = res.point * v.transpose();
    const double radius = WorstCouplingRadius(exo, coupling.spectrum, h);
    if (radius < threshold) return {h, radius};
  }

  throw DesignError(FailureKind::kDesignFailed,
                    "no H found with max_k rho(S - lambda_k H R) < 1 - margin");
}

}  // namespace outsync
