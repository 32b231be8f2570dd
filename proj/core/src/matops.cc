#include "outsync/matops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "outsync/errors.h"

namespace outsync {

const char* ToString(FailureKind kind) {
  switch (kind) {
    case FailureKind::kNotInformative: return "NotInformative";
    case FailureKind::kNotStabilizable: return "NotStabilizable";
    case FailureKind::kInfeasible: return "Infeasible";
    case FailureKind::kDesignFailed: return "DesignFailed";
  }
  return "Unknown";
}

DesignError::DesignError(FailureKind kind, const std::string& message,
                         std::optional<int> agent, std::string condition)
    : std::runtime_error(message),
      kind_(kind),
      agent_(agent),
      condition_(std::move(condition)) {}

void Tolerances::Validate() const {
  if (!(rank_rel > 0) || !(schur_margin > 0) || !(residual_abs > 0) ||
      !(riccati_tol > 0) || riccati_max_iter < 1) {
    throw std::invalid_argument("tolerances must be strictly positive");
  }
}

void RequireSquare(const MatrixRef& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

void RequireFinite(const MatrixRef& m, const char* what) {
  if (!m.allFinite()) {
    throw DimensionError(std::string(what) + " has non-finite entries");
  }
}

double MaxAbs(const MatrixRef& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

namespace {

template <typename Derived>
int RankFromSingularValues(const Eigen::MatrixBase<Derived>& sv,
                           double rank_rel, double reference = 0.0) {
  if (sv.size() == 0) return 0;
  const double smax = std::max<double>(sv(0), reference);
  if (!(smax > 0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rank_rel * smax) ++rank;
  }
  return rank;
}

}  // namespace

MatrixXd Pinv(const MatrixRef& m, const Tolerances& tol) {
  if (m.size() == 0) return MatrixXd::Zero(m.cols(), m.rows());
  RequireFinite(m, "pseudoinverse input");
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  const double cutoff = tol.rank_rel * sv(0);
  VectorXd inv = VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

int NumericalRank(const MatrixRef& m, const Tolerances& tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return RankFromSingularValues(svd.singularValues(), tol.rank_rel);
}

int NumericalRank(const Eigen::Ref<const MatrixXcd>& m, const Tolerances& tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  return RankFromSingularValues(svd.singularValues(), tol.rank_rel);
}

Spectrum ComputeSpectrum(const MatrixRef& m) {
  RequireSquare(m, "spectrum input");
  Spectrum out;
  if (m.rows() == 0) return out;
  Eigen::EigenSolver<MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue computation did not converge");
  }
  const auto& ev = es.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  // Conjugate pairs share a modulus up to roundoff; treat near-equal moduli as
  // ties so the angle decides.
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              const double ma = std::abs(a);
              const double mb = std::abs(b);
              const double slack = 1e-12 * std::max(1.0, std::max(ma, mb));
              if (std::abs(ma - mb) > slack) return ma > mb;
              return std::arg(a) < std::arg(b);
            });
  for (const auto& l : out.eigenvalues) {
    out.spectral_radius = std::max(out.spectral_radius, std::abs(l));
  }
  return out;
}

double SpectralRadius(const MatrixRef& m) {
  return ComputeSpectrum(m).spectral_radius;
}

double SpectralRadius(const Eigen::Ref<const MatrixXcd>& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral radius of non-square");
  if (m.rows() == 0) return 0.0;
  Eigen::ComplexEigenSolver<MatrixXcd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue computation did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool IsSchur(const MatrixRef& m, const Tolerances& tol) {
  return SpectralRadius(m) <= 1.0 - tol.schur_margin;
}

bool PbhStabilizable(const MatrixRef& a, const MatrixRef& b,
                     const Tolerances& tol) {
  RequireSquare(a, "PBH state matrix");
  const Eigen::Index n = a.rows();
  if (b.rows() != n) {
    throw DimensionError("PBH input matrix row count must match state matrix");
  }
  const Spectrum spec = ComputeSpectrum(a);
  // Ranks are judged against the size of [A B] so that a pencil made only of
  // roundoff is not mistaken for a full-rank one.
  MatrixXd ab(n, n + b.cols());
  ab << a, b;
  const double reference =
      n == 0 ? 0.0 : Eigen::JacobiSVD<MatrixXd>(ab).singularValues()(0);
  MatrixXcd test(n, n + b.cols());
  test.rightCols(b.cols()) = b.cast<std::complex<double>>();
  for (const auto& lambda : spec.eigenvalues) {
    if (std::abs(lambda) < 1.0 - tol.schur_margin) continue;
    test.leftCols(n) = a.cast<std::complex<double>>();
    test.leftCols(n).diagonal().array() -= lambda;
    Eigen::JacobiSVD<MatrixXcd> svd(test);
    if (RankFromSingularValues(svd.singularValues(), tol.rank_rel, reference) < n) {
      return false;
    }
  }
  return true;
}

MatrixXd StabilizingFeedback(const MatrixRef& a, const MatrixRef& b,
                             const Tolerances& tol) {
  RequireSquare(a, "feedback state matrix");
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (b.rows() != n) {
    throw DimensionError("feedback input matrix row count must match state");
  }
  const MatrixXd eye_n = MatrixXd::Identity(n, n);
  const MatrixXd eye_m = MatrixXd::Identity(m, m);

  auto gain = [&](const MatrixXd& p) -> MatrixXd {
    const MatrixXd btp = b.transpose() * p;
    return -(eye_m + btp * b).ldlt().solve(btp * a);
  };

  // An ill-conditioned P stalls at a roundoff floor above riccati_tol. Such
  // an iterate is accepted once it is below sqrt(riccati_tol) and has not
  // improved for kStallWindow steps; the closed loop is verified below.
  constexpr int kStallWindow = 200;
  const double stall_tol = std::sqrt(tol.riccati_tol);
  double best = std::numeric_limits<double>::infinity();
  int best_iter = 0;

  MatrixXd p = eye_n;
  bool converged = false;
  for (int k = 0; k < tol.riccati_max_iter; ++k) {
    const MatrixXd btp = b.transpose() * p;
    const MatrixXd btpa = btp * a;
    MatrixXd next = a.transpose() * p * a -
                    btpa.transpose() * (eye_m + btp * b).ldlt().solve(btpa) +
                    eye_n;
    next = (0.5 * (next + next.transpose())).eval();
    if (!next.allFinite()) break;
    const double step = (next - p).cwiseAbs().rowwise().sum().maxCoeff();
    const double scale = std::max(1.0, next.cwiseAbs().rowwise().sum().maxCoeff());
    if (!std::isfinite(step) || !std::isfinite(scale)) break;
    p = std::move(next);
    const double rel = step / scale;
    if (rel <= tol.riccati_tol) {
      converged = true;
      break;
    }
    if (rel < best) {
      best = rel;
      best_iter = k;
    } else if (best <= stall_tol && k - best_iter > kStallWindow) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw DesignError(FailureKind::kNotStabilizable,
                      "Riccati iteration did not converge; pair is not "
                      "stabilizable or badly conditioned");
  }
  MatrixXd k = gain(p);
  if (!k.allFinite()) {
    throw DesignError(FailureKind::kNotStabilizable, "Riccati gain is not finite");
  }
  const double radius = SpectralRadius(a + b * k);
  if (radius > 1.0 - tol.schur_margin) {
    std::ostringstream os;
    os << "Riccati gain leaves closed-loop spectral radius " << radius;
    throw DesignError(FailureKind::kNotStabilizable, os.str());
  }
  return k;
}

LeastSquaresSolution SolveLinearLs(const MatrixRef& coeff, const MatrixRef& rhs,
                                   const Tolerances& tol) {
  if (coeff.rows() != rhs.rows()) {
    throw DimensionError("least-squares coefficient and rhs row counts differ");
  }
  LeastSquaresSolution out;
  out.solution = Pinv(coeff, tol) * rhs;
  out.residual = MaxAbs(coeff * out.solution - rhs);
  return out;
}

MatrixXd Kron(const MatrixRef& a, const MatrixRef& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

VectorXd Vec(const MatrixRef& m) {
  VectorXd v(m.size());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    v.segment(j * m.rows(), m.rows()) = m.col(j);
  }
  return v;
}

MatrixXd Unvec(const Eigen::Ref<const VectorXd>& v, Eigen::Index rows,
               Eigen::Index cols) {
  if (v.size() != rows * cols) throw DimensionError("Unvec size mismatch");
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) m.col(j) = v.segment(j * rows, rows);
  return m;
}

}  // namespace outsync
