#include "gridstress/gramian.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "gridstress/error.hpp"

namespace gridstress::gramian {

namespace {

using Complex = std::complex<double>;

void check_system(const SecondOrderSystem& sys) {
  const int g = sys.size();
  if (g == 0 || sys.laplacian.cols() != g || sys.inertia.size() != g) {
    fail(Errc::InvalidArgument, "second-order system dimensions are inconsistent");
  }
  if (!(sys.gamma > 0.0)) fail(Errc::Domain, "damping ratio gamma must be positive");
  if (sys.epsilon < 0.0) fail(Errc::Domain, "regularization epsilon must be non-negative");
  if ((sys.inertia.array() <= 0.0).any()) fail(Errc::Domain, "inertias must be positive");
}

Matrix scaled_laplacian(const SecondOrderSystem& sys) {
  const Vector s = sys.inertia.cwiseSqrt().cwiseInverse();
  Matrix shifted = sys.laplacian;
  shifted.diagonal().array() += sys.epsilon;
  Matrix out = s.asDiagonal() * shifted * s.asDiagonal();
  return 0.5 * (out + out.transpose());
}

// Bracket factors of the closed-form X^(2,2) blocks. On the diagonal the
// frequency factor is 1/(2 gamma) for every lambda, including lambda = 0.
double frequency_bracket(double gamma, double lam_l, double lam_q, bool diagonal) {
  if (diagonal) return 1.0 / (2.0 * gamma);
  const double sum = lam_l + lam_q;
  const double diff = lam_q - lam_l;
  return gamma * sum / (2.0 * gamma * gamma * sum + diff * diff);
}

double angle_bracket(double gamma, double lam_l, double lam_q) {
  const double sum = lam_l + lam_q;
  const double diff = lam_q - lam_l;
  return 2.0 * gamma / (2.0 * gamma * gamma * sum + diff * diff);
}

Matrix modal_weight(const ModalBasis& basis, const Matrix& q) {
  if (q.rows() != basis.size() || q.cols() != basis.size()) fail(Errc::InvalidArgument, "weight matrix size mismatch");
  const auto& s = basis.inv_sqrt_inertia;
  return basis.vectors.transpose() * (s.asDiagonal() * q * s.asDiagonal()) * basis.vectors;
}

}  // namespace

ModalBasis modal_basis(const SecondOrderSystem& sys) {
  check_system(sys);
  const int g = sys.size();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(scaled_laplacian(sys));
  if (solver.info() != Eigen::Success) fail(Errc::Convergence, "modal eigensolver did not converge");

  ModalBasis basis;
  basis.vectors = solver.eigenvectors();
  basis.values = solver.eigenvalues();
  basis.inv_sqrt_inertia = sys.inertia.cwiseSqrt().cwiseInverse();
  basis.gamma = sys.gamma;
  basis.epsilon = sys.epsilon;
  if (basis.vectors.col(0).sum() < 0.0) basis.vectors.col(0) *= -1.0;

  const double scale = basis.values.cwiseAbs().maxCoeff();
  if (sys.epsilon == 0.0) {
    while (basis.kernel < g && std::abs(basis.values(basis.kernel)) <= 1e-10 * scale) {
      basis.values(basis.kernel) = 0.0;
      ++basis.kernel;
    }
  }

  basis.big_gamma.resize(g);
  basis.mu_plus.resize(g);
  basis.mu_minus.resize(g);
  for (int j = 0; j < g; ++j) {
    const double disc = sys.gamma * sys.gamma - 4.0 * basis.values(j);
    const Complex G = std::sqrt(Complex(disc, 0.0));
    if (std::abs(disc) < 1e-8 * sys.gamma * sys.gamma) {
      fail(Errc::CriticalDamping, "mode " + std::to_string(j) +
                                      " is critically damped (gamma^2 = 4 lambda^M); perturb gamma slightly");
    }
    basis.big_gamma(j) = G;
    basis.mu_plus(j) = 0.5 * (-sys.gamma + G);
    basis.mu_minus(j) = 0.5 * (-sys.gamma - G);
  }
  return basis;
}

GramianBlock x22_frequency(const ModalBasis& basis, const Matrix& q22) {
  const int g = basis.size();
  const Matrix w = modal_weight(basis, q22);
  Matrix k(g, g);
  for (int l = 0; l < g; ++l) {
    for (int q = 0; q < g; ++q) k(l, q) = frequency_bracket(basis.gamma, basis.values(l), basis.values(q), l == q);
  }
  GramianBlock out;
  out.kind = GramianKind::FrequencyBased;
  out.weight = q22;
  out.x22 = basis.vectors * w.cwiseProduct(k) * basis.vectors.transpose();
  out.x22 = 0.5 * (out.x22 + out.x22.transpose()).eval();
  return out;
}

GramianBlock x22_angle(const ModalBasis& basis, const Matrix& q11) {
  if (!(basis.epsilon > 0.0)) fail(Errc::Domain, "angle Gramian needs a positive regularization epsilon");
  const int g = basis.size();
  const Matrix w = modal_weight(basis, q11);
  Matrix k(g, g);
  for (int l = 0; l < g; ++l) {
    for (int q = 0; q < g; ++q) k(l, q) = angle_bracket(basis.gamma, basis.values(l), basis.values(q));
  }
  GramianBlock out;
  out.kind = GramianKind::AngleBased;
  out.weight = q11;
  out.x22 = basis.vectors * w.cwiseProduct(k) * basis.vectors.transpose();
  out.x22 = 0.5 * (out.x22 + out.x22.transpose()).eval();
  return out;
}

GramianBlock x22_angle_deflated(const ModalBasis& basis, const Matrix& q11) {
  const int g = basis.size();
  const Matrix w = modal_weight(basis, q11);
  Matrix k(g, g);
  for (int l = 0; l < g; ++l) {
    for (int q = 0; q < g; ++q) {
      k(l, q) = (l < basis.kernel && q < basis.kernel) ? 0.0 : angle_bracket(basis.gamma, basis.values(l), basis.values(q));
    }
  }
  GramianBlock out;
  out.kind = GramianKind::AngleBased;
  out.weight = q11;
  out.x22 = basis.vectors * w.cwiseProduct(k) * basis.vectors.transpose();
  out.x22 = 0.5 * (out.x22 + out.x22.transpose()).eval();
  return out;
}

double frequency_form(const ModalBasis& basis, const Matrix& q22, const Vector& probe) {
  const Matrix w = modal_weight(basis, q22);
  const Vector c = basis.vectors.transpose() * probe;
  double sum = 0.0;
  for (int l = 0; l < basis.size(); ++l) {
    for (int q = 0; q < basis.size(); ++q) {
      sum += c(l) * c(q) * w(l, q) * frequency_bracket(basis.gamma, basis.values(l), basis.values(q), l == q);
    }
  }
  return sum;
}

double angle_form(const ModalBasis& basis, const Matrix& q11, const Vector& probe) {
  if (!(basis.epsilon > 0.0)) fail(Errc::Domain, "angle Gramian needs a positive regularization epsilon");
  const Matrix w = modal_weight(basis, q11);
  const Vector c = basis.vectors.transpose() * probe;
  double sum = 0.0;
  for (int l = 0; l < basis.size(); ++l) {
    for (int q = 0; q < basis.size(); ++q) {
      sum += c(l) * c(q) * w(l, q) * angle_bracket(basis.gamma, basis.values(l), basis.values(q));
    }
  }
  return sum;
}

DeflatedForm angle_form_deflated(const ModalBasis& basis, const Matrix& q11, const Vector& probe) {
  const Matrix w = modal_weight(basis, q11);
  const Vector c = basis.vectors.transpose() * probe;
  DeflatedForm out;
  const double norm = probe.norm();
  for (int l = 0; l < basis.kernel; ++l) {
    out.kernel_overlap = std::max(out.kernel_overlap, norm > 0.0 ? std::abs(c(l)) / norm : 0.0);
  }
  for (int l = 0; l < basis.size(); ++l) {
    for (int q = 0; q < basis.size(); ++q) {
      if (l < basis.kernel && q < basis.kernel) continue;
      out.value += c(l) * c(q) * w(l, q) * angle_bracket(basis.gamma, basis.values(l), basis.values(q));
    }
  }
  return out;
}

Matrix state_matrix(const SecondOrderSystem& sys) {
  check_system(sys);
  const int g = sys.size();
  Matrix a = Matrix::Zero(2 * g, 2 * g);
  a.topRightCorner(g, g).setIdentity();
  a.bottomLeftCorner(g, g) = -scaled_laplacian(sys);
  a.bottomRightCorner(g, g).diagonal().setConstant(-sys.gamma);
  return a;
}

Matrix output_weight(const SecondOrderSystem& sys, const Matrix& q11, const Matrix& q22) {
  check_system(sys);
  const int g = sys.size();
  const Vector s = sys.inertia.cwiseSqrt().cwiseInverse();
  Matrix q = Matrix::Zero(2 * g, 2 * g);
  q.topLeftCorner(g, g) = s.asDiagonal() * q11 * s.asDiagonal();
  q.bottomRightCorner(g, g) = s.asDiagonal() * q22 * s.asDiagonal();
  return q;
}

Matrix lyapunov_eigenbasis(const SecondOrderSystem& sys, const Matrix& q11, const Matrix& q22) {
  if (!(sys.epsilon > 0.0)) fail(Errc::Domain, "eigenbasis Lyapunov solution needs a positive epsilon");
  const ModalBasis basis = modal_basis(sys);
  const int g = basis.size();

  ComplexMatrix right = ComplexMatrix::Zero(2 * g, 2 * g);
  ComplexMatrix left = ComplexMatrix::Zero(2 * g, 2 * g);
  const Complex i(0.0, 1.0);
  ComplexVector mu(2 * g);
  for (int j = 0; j < g; ++j) {
    const Complex root = std::sqrt(basis.big_gamma(j));
    const Complex mp = basis.mu_plus(j), mm = basis.mu_minus(j);
    mu(j) = mp;
    mu(g + j) = mm;
    // 2x2 mixing blocks of the right and left eigenvector matrices.
    right(j, j) = 1.0 / root;
    right(j, g + j) = i / root;
    right(g + j, j) = mp / root;
    right(g + j, g + j) = i * mm / root;
    left(j, j) = -mm / root;
    left(j, g + j) = 1.0 / root;
    left(g + j, j) = -i * mp / root;
    left(g + j, g + j) = i / root;
  }
  ComplexMatrix t2 = ComplexMatrix::Zero(2 * g, 2 * g);
  t2.topLeftCorner(g, g) = basis.vectors.cast<Complex>();
  t2.bottomRightCorner(g, g) = basis.vectors.cast<Complex>();
  const ComplexMatrix t_right = t2 * right;
  const ComplexMatrix t_left = left * t2.transpose();

  const double biorth = (t_left * t_right - ComplexMatrix::Identity(2 * g, 2 * g)).cwiseAbs().maxCoeff();
  if (biorth > 1e-8) fail(Errc::Consistency, "left/right eigenvectors are not bi-orthogonal");

  const ComplexMatrix qm = t_right.transpose() * output_weight(sys, q11, q22).cast<Complex>() * t_right;
  ComplexMatrix xbar(2 * g, 2 * g);
  for (int l = 0; l < 2 * g; ++l) {
    for (int q = 0; q < 2 * g; ++q) xbar(l, q) = -qm(l, q) / (mu(l) + mu(q));
  }
  const ComplexMatrix x = t_left.transpose() * xbar * t_left;
  const double scale = std::max(x.cwiseAbs().maxCoeff(), 1e-300);
  if (x.imag().cwiseAbs().maxCoeff() > 1e-10 * scale) {
    fail(Errc::Consistency, "eigenbasis Gramian has a non-negligible imaginary part");
  }
  Matrix out = x.real();
  return 0.5 * (out + out.transpose());
}

Matrix lyapunov_dense(const Matrix& a, const Matrix& q) {
  const auto n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n || n == 0) {
    fail(Errc::InvalidArgument, "Lyapunov operands must be square and of equal size");
  }
  const Eigen::VectorXcd eig = Eigen::EigenSolver<Matrix>(a, false).eigenvalues();
  if ((eig.real().array() >= 0.0).any()) fail(Errc::NotHurwitz, "state matrix is not Hurwitz");

  // vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X), column-major vec.
  const Matrix at = a.transpose();
  Matrix k = Matrix::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k.block(j * n, j * n, n, n) += at;
    for (Eigen::Index i = 0; i < n; ++i) {
      k.block(i * n, j * n, n, n).diagonal().array() += at(i, j);
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
  Eigen::PartialPivLU<Matrix> lu(k);
  Vector x = lu.solve(rhs);
  x += lu.solve(rhs - k * x);

  Matrix out = Eigen::Map<const Matrix>(x.data(), n, n);
  const double qmax = q.cwiseAbs().maxCoeff();
  const double residual = (at * out + out * a + q).cwiseAbs().maxCoeff();
  if (residual > 1e-9 * std::max(qmax, 1e-300) && qmax > 0.0) {
    fail(Errc::Consistency, "dense Lyapunov residual exceeds tolerance");
  }
  return out;
}

}  // namespace gridstress::gramian
