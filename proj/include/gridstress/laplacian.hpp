#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gridstress/gridio.hpp"

namespace gridstress {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace gridstress

namespace gridstress::laplacian {

struct Edge {
  int from = 0;
  int to = 0;
  double weight = 0.0;
};

/// Dense weighted graph Laplacian L = sum_{i<j} w_ij e_(i,j) e_(i,j)^T.
class Laplacian {
 public:
  static Laplacian from_edges(int dimension, std::span<const Edge> edges);
  /// Physical network Laplacian: lines and transformers.
  static Laplacian from_case(const gridio::GridCase& grid);
  /// Wraps an existing matrix after checking the Laplacian invariants.
  static Laplacian from_matrix(Matrix matrix);

  const Matrix& matrix() const { return matrix_; }
  int dimension() const { return static_cast<int>(matrix_.rows()); }

 private:
  explicit Laplacian(Matrix m) : matrix_(std::move(m)) {}
  Matrix matrix_;
};

/// Eigen-decomposition of a symmetric matrix, ascending eigenvalues.
///
/// Eigenvalues below `1e-10 * lambda_max` are treated as the kernel; the
/// pseudoinverse quantities drop those modes (deflation). For a connected
/// Laplacian this is exactly the uniform mode u^(1), whose sign is fixed so
/// that its components are positive.
class Spectrum {
 public:
  static Spectrum of(const Matrix& symmetric);
  static Spectrum of(const Laplacian& laplacian) { return of(laplacian.matrix()); }

  int dimension() const { return static_cast<int>(values_.size()); }
  const Vector& values() const { return values_; }
  const Matrix& vectors() const { return vectors_; }
  double value(int l) const { return values_(l); }
  double max_value() const { return values_(values_.size() - 1); }
  /// Number of leading modes treated as zero.
  int kernel_dimension() const { return kernel_; }
  /// Smallest non-kernel eigenvalue (lambda_2 for a connected Laplacian).
  double algebraic_connectivity() const;

  double pseudoinverse_quadratic(const Vector& v) const;
  double regularized_inverse_quadratic(const Vector& v, double epsilon) const;
  double resistance_distance(int i, int j) const;

  Vector apply_pseudoinverse(const Vector& v) const;
  Matrix pseudoinverse() const;
  Matrix regularized_inverse(double epsilon) const;
  /// Full matrix of resistance distances Omega_ij.
  Matrix resistance_matrix() const;

 private:
  Vector values_;
  Matrix vectors_;
  int kernel_ = 0;
};

inline constexpr double kZeroEigenvalueRatio = 1e-10;

Laplacian build_laplacian(const gridio::GridCase& grid);
Spectrum eigendecompose(const Laplacian& laplacian);

/// Regularization ladder used when probing eps -> 0 limits.
std::span<const double> default_epsilons();

/// Outcome of evaluating f(eps) down a geometric ladder of eps values.
struct EpsilonSweep {
  std::vector<double> epsilons;
  std::vector<double> values;
  /// Richardson extrapolation of the last two rungs to eps = 0.
  double limit = 0.0;
  /// Least-squares slope of log|f| against log eps (0 for a finite limit,
  /// -1 for a simple pole).
  double exponent = 0.0;
  /// Richardson extrapolation of eps * f(eps), the residue of a simple pole.
  double pole_coefficient = 0.0;
  bool finite = true;
};

EpsilonSweep epsilon_sweep(const std::function<double(double)>& f,
                           std::span<const double> epsilons = default_epsilons());

}  // namespace gridstress::laplacian
