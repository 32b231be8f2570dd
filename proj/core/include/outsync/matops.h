#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace outsync {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXcd = Eigen::MatrixXcd;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;

/// Numerical thresholds shared by every rank, stability and residual test.
struct Tolerances {
  /// Singular values at or below rank_rel * sigma_max count as zero.
  double rank_rel = 1e-10;
  /// A matrix is Schur when its spectral radius is <= 1 - schur_margin.
  double schur_margin = 1e-6;
  /// Bound on the infinity-norm residual of an "exact" linear solve.
  double residual_abs = 1e-8;
  /// Riccati fixed-point stopping threshold (relative to max(1, |P|)).
  double riccati_tol = 1e-12;
  int riccati_max_iter = 100000;

  /// Throws std::invalid_argument if any field is non-positive.
  void Validate() const;
};

struct Spectrum {
  /// Sorted by modulus (descending), then by angle (ascending).
  std::vector<std::complex<double>> eigenvalues;
  double spectral_radius = 0.0;
};

/// Moore-Penrose pseudoinverse via SVD.
MatrixXd Pinv(const MatrixRef& m, const Tolerances& tol = {});

/// Number of singular values above rank_rel * sigma_max.
int NumericalRank(const MatrixRef& m, const Tolerances& tol = {});
int NumericalRank(const Eigen::Ref<const MatrixXcd>& m,
                  const Tolerances& tol = {});

Spectrum ComputeSpectrum(const MatrixRef& m);
double SpectralRadius(const MatrixRef& m);
double SpectralRadius(const Eigen::Ref<const MatrixXcd>& m);

bool IsSchur(const MatrixRef& m, const Tolerances& tol = {});

/// PBH test: rank [a - lambda I | b] = n at every eigenvalue of `a` with
/// modulus >= 1 - schur_margin. Singular values count as zero below
/// rank_rel times the largest singular value of [a b].
bool PbhStabilizable(const MatrixRef& a, const MatrixRef& b,
                     const Tolerances& tol = {});

/// Gain K with a + b K Schur, from the discrete Riccati fixed point with
/// identity state and input weights.
///
/// Throws DesignError(kNotStabilizable) if the iteration does not converge
/// within riccati_max_iter, diverges, or the closed loop fails IsSchur.
MatrixXd StabilizingFeedback(const MatrixRef& a, const MatrixRef& b,
                             const Tolerances& tol = {});

struct LeastSquaresSolution {
  MatrixXd solution;
  /// ||coeff * solution - rhs||_inf (max absolute entry).
  double residual = 0.0;
};

/// Minimal-norm least-squares solution of coeff * X = rhs through Pinv.
LeastSquaresSolution SolveLinearLs(const MatrixRef& coeff, const MatrixRef& rhs,
                                   const Tolerances& tol = {});

/// Kronecker product a (x) b.
MatrixXd Kron(const MatrixRef& a, const MatrixRef& b);

/// Column-stacking vectorization and its inverse.
VectorXd Vec(const MatrixRef& m);
MatrixXd Unvec(const Eigen::Ref<const VectorXd>& v, Eigen::Index rows,
               Eigen::Index cols);

/// Largest absolute entry; 0 for empty matrices.
double MaxAbs(const MatrixRef& m);

/// Throws DimensionError unless m is square.
void RequireSquare(const MatrixRef& m, const char* what);

/// Throws DimensionError unless every entry is finite.
void RequireFinite(const MatrixRef& m, const char* what);

}  // namespace outsync
