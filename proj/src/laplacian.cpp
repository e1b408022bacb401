#include "gridstress/laplacian.hpp"

#include <array>
#include <cmath>

#include "gridstress/error.hpp"

namespace gridstress::laplacian {

Laplacian Laplacian::from_edges(int dimension, std::span<const Edge> edges) {
  if (dimension <= 0) fail(Errc::InvalidArgument, "Laplacian dimension must be positive");
  Matrix m = Matrix::Zero(dimension, dimension);
  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= dimension || e.to < 0 || e.to >= dimension || e.from == e.to) {
      fail(Errc::Validation, "edge endpoints must be two distinct existing nodes");
    }
    if (!(e.weight > 0.0)) fail(Errc::Validation, "edge weights must be positive");
    m(e.from, e.from) += e.weight;
    m(e.to, e.to) += e.weight;
    m(e.from, e.to) -= e.weight;
    m(e.to, e.from) -= e.weight;
  }
  return Laplacian(std::move(m));
}

Laplacian Laplacian::from_case(const gridio::GridCase& grid) {
  std::vector<Edge> edges;
  edges.reserve(grid.lines.size() + grid.transformers.size());
  for (const auto& l : grid.lines) edges.push_back({l.from, l.to, l.susceptance});
  for (const auto& t : grid.transformers) edges.push_back({t.from, t.to, t.susceptance});
  return from_edges(grid.size(), edges);
}

Laplacian Laplacian::from_matrix(Matrix matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    fail(Errc::InvalidArgument, "Laplacian must be a non-empty square matrix");
  }
  const double scale = std::max(matrix.cwiseAbs().maxCoeff(), 1e-300);
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    fail(Errc::Validation, "Laplacian is not symmetric");
  }
  const double max_diag = matrix.diagonal().cwiseAbs().maxCoeff();
  if (matrix.rowwise().sum().cwiseAbs().maxCoeff() > 1e-10 * std::max(max_diag, 1e-300)) {
    fail(Errc::Validation, "Laplacian rows do not sum to zero");
  }
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (i != j && matrix(i, j) > 1e-12 * scale) fail(Errc::Validation, "Laplacian has a positive off-diagonal");
    }
  }
  return Laplacian(std::move(matrix));
}

Spectrum Spectrum::of(const Matrix& symmetric) {
  if (symmetric.rows() != symmetric.cols() || symmetric.rows() == 0) {
    fail(Errc::InvalidArgument, "eigendecomposition needs a non-empty square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) fail(Errc::Convergence, "symmetric eigensolver did not converge");

  Spectrum s;
  s.values_ = solver.eigenvalues();
  s.vectors_ = solver.eigenvectors();
  const double scale = s.values_.cwiseAbs().maxCoeff();
  while (s.kernel_ < s.values_.size() && std::abs(s.values_(s.kernel_)) <= kZeroEigenvalueRatio * scale) {
    ++s.kernel_;
  }
  if (s.vectors_.col(0).sum() < 0.0) s.vectors_.col(0) *= -1.0;
  return s;
}

double Spectrum::algebraic_connectivity() const {
  if (kernel_ >= dimension()) return 0.0;
  return values_(kernel_);
}

double Spectrum::pseudoinverse_quadratic(const Vector& v) const {
  if (v.size() != dimension()) fail(Errc::InvalidArgument, "vector dimension mismatch");
  const Vector c = vectors_.transpose() * v;
  double sum = 0.0;
  for (int l = kernel_; l < dimension(); ++l) sum += c(l) * c(l) / values_(l);
  return sum;
}

double Spectrum::regularized_inverse_quadratic(const Vector& v, double epsilon) const {
  if (!(epsilon > 0.0)) fail(Errc::Domain, "regularization epsilon must be positive");
  if (v.size() != dimension()) fail(Errc::InvalidArgument, "vector dimension mismatch");
  const Vector c = vectors_.transpose() * v;
  double sum = 0.0;
  for (int l = 0; l < dimension(); ++l) {
    // Kernel modes carry lambda = 0 exactly; their numerical residue is noise.
    const double lambda = l < kernel_ ? 0.0 : values_(l);
    sum += c(l) * c(l) / (lambda + epsilon);
  }
  return sum;
}

double Spectrum::resistance_distance(int i, int j) const {
  if (i < 0 || j < 0 || i >= dimension() || j >= dimension()) fail(Errc::InvalidArgument, "node out of range");
  if (i == j) return 0.0;
  double sum = 0.0;
  for (int l = kernel_; l < dimension(); ++l) {
    const double d = vectors_(i, l) - vectors_(j, l);
    sum += d * d / values_(l);
  }
  return sum;
}

Vector Spectrum::apply_pseudoinverse(const Vector& v) const {
  if (v.size() != dimension()) fail(Errc::InvalidArgument, "vector dimension mismatch");
  Vector c = vectors_.transpose() * v;
  for (int l = 0; l < dimension(); ++l) c(l) = l < kernel_ ? 0.0 : c(l) / values_(l);
  return vectors_ * c;
}

Matrix Spectrum::pseudoinverse() const {
  Vector inv(dimension());
  for (int l = 0; l < dimension(); ++l) inv(l) = l < kernel_ ? 0.0 : 1.0 / values_(l);
  return vectors_ * inv.asDiagonal() * vectors_.transpose();
}

Matrix Spectrum::regularized_inverse(double epsilon) const {
  if (!(epsilon > 0.0)) fail(Errc::Domain, "regularization epsilon must be positive");
  Vector inv(dimension());
  for (int l = 0; l < dimension(); ++l) inv(l) = 1.0 / ((l < kernel_ ? 0.0 : values_(l)) + epsilon);
  return vectors_ * inv.asDiagonal() * vectors_.transpose();
}

Matrix Spectrum::resistance_matrix() const {
  const Matrix pinv = pseudoinverse();
  const Vector diag = pinv.diagonal();
  Matrix omega = (-2.0 * pinv).colwise() + diag;
  omega.rowwise() += diag.transpose();
  omega.diagonal().setZero();
  return omega;
}

Laplacian build_laplacian(const gridio::GridCase& grid) { return Laplacian::from_case(grid); }

Spectrum eigendecompose(const Laplacian& laplacian) { return Spectrum::of(laplacian); }

std::span<const double> default_epsilons() {
  static constexpr std::array<double, 5> kLadder = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
  return kLadder;
}

EpsilonSweep epsilon_sweep(const std::function<double(double)>& f, std::span<const double> epsilons) {
  if (epsilons.size() < 2) fail(Errc::InvalidArgument, "epsilon sweep needs at least two values");
  EpsilonSweep sweep;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) fail(Errc::Domain, "sweep epsilons must be positive");
    sweep.epsilons.push_back(eps);
    sweep.values.push_back(f(eps));
  }
  const std::size_t n = epsilons.size();
  const double e1 = sweep.epsilons[n - 2], e2 = sweep.epsilons[n - 1];
  const double f1 = sweep.values[n - 2], f2 = sweep.values[n - 1];
  // Linear-in-eps error model: f(eps) = f0 + a eps.
  sweep.limit = (e1 * f2 - e2 * f1) / (e1 - e2);
  sweep.pole_coefficient = (e1 * e2 * f2 - e2 * e1 * f1) / (e1 - e2);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (sweep.values[k] == 0.0) continue;
    const double x = std::log(sweep.epsilons[k]);
    const double y = std::log(std::abs(sweep.values[k]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  sweep.exponent = used >= 2 ? (used * sxy - sx * sy) / (used * sxx - sx * sx) : 0.0;
  sweep.finite = std::abs(sweep.exponent) < 0.5;
  return sweep;
}

}  // namespace gridstress::laplacian
