#pragma once

#include <complex>

#include "gridstress/laplacian.hpp"

namespace gridstress::gramian {

using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Linearized swing dynamics M phi'' = -gamma M phi' - (L + eps I) phi in the
/// mass-scaled coordinates (M^1/2 phi, M^1/2 omega).
struct SecondOrderSystem {
  Matrix laplacian;
  Vector inertia;
  double gamma = 0.0;
  double epsilon = 0.0;

  int size() const { return static_cast<int>(laplacian.rows()); }
};

/// Eigenbasis of M^-1/2 (L + eps I) M^-1/2 together with the eigenvalues
/// mu^{+-} = (-gamma +- Gamma) / 2, Gamma = sqrt(gamma^2 - 4 lambda^M), of the
/// state matrix.
struct ModalBasis {
  Matrix vectors;  // T_M, orthonormal columns
  Vector values;   // lambda^M, ascending
  ComplexVector big_gamma;
  ComplexVector mu_plus;
  ComplexVector mu_minus;
  Vector inv_sqrt_inertia;
  double gamma = 0.0;
  double epsilon = 0.0;
  /// Modes with lambda^M below 1e-10 lambda^M_max (only possible for eps = 0).
  int kernel = 0;

  int size() const { return static_cast<int>(values.size()); }
};

ModalBasis modal_basis(const SecondOrderSystem& sys);

enum class GramianKind { FrequencyBased, AngleBased };

struct GramianBlock {
  Matrix x22;
  GramianKind kind = GramianKind::FrequencyBased;
  Matrix weight;
};

/// X^(2,2) for a purely frequency-weighted output Q = diag(0, Q22).
GramianBlock x22_frequency(const ModalBasis& basis, const Matrix& q22);
/// X^(2,2) for a purely angle-weighted output Q = diag(Q11, 0). Needs eps > 0.
GramianBlock x22_angle(const ModalBasis& basis, const Matrix& q11);

/// probe^T X^(2,2) probe of the angle Gramian with the (1,1) kernel term
/// removed. Exact as eps -> 0 when the probe has no component along the
/// kernel direction M^1/2 u^(1); that component is returned in
/// `kernel_overlap` so callers can check the precondition.
struct DeflatedForm {
  double value = 0.0;
  double kernel_overlap = 0.0;
};
DeflatedForm angle_form_deflated(const ModalBasis& basis, const Matrix& q11, const Vector& probe);

/// The matrix behind angle_form_deflated: X^(2,2) of the angle Gramian with
/// the kernel-kernel block dropped. Valid for eps = 0.
GramianBlock x22_angle_deflated(const ModalBasis& basis, const Matrix& q11);

/// probe^T X^(2,2) probe without forming X^(2,2).
double frequency_form(const ModalBasis& basis, const Matrix& q22, const Vector& probe);
double angle_form(const ModalBasis& basis, const Matrix& q11, const Vector& probe);

/// 2g x 2g state matrix [[0, I], [-M^-1/2 (L + eps I) M^-1/2, -gamma I]].
Matrix state_matrix(const SecondOrderSystem& sys);

/// Output weight diag(M^-1/2 Q11 M^-1/2, M^-1/2 Q22 M^-1/2).
Matrix output_weight(const SecondOrderSystem& sys, const Matrix& q11, const Matrix& q22);

/// Full observability Gramian from the left/right eigenvectors of the state
/// matrix built out of the modal basis. Needs eps > 0.
Matrix lyapunov_eigenbasis(const SecondOrderSystem& sys, const Matrix& q11, const Matrix& q22);

/// Solves A^T X + X A = -Q through the Kronecker-vectorized linear system.
Matrix lyapunov_dense(const Matrix& a, const Matrix& q);

}  // namespace gridstress::gramian
