#pragma once

#include <optional>
#include <vector>

#include <Eigen/Cholesky>

#include "gridstress/gridio.hpp"
#include "gridstress/laplacian.hpp"

namespace gridstress::kron {

/// Active (g) / passive (c) partition of a physical Laplacian together with a
/// Cholesky factor of the passive block, computed once and shared read-only.
struct BlockView {
  std::vector<int> active;
  std::vector<int> passive;
  /// For every physical bus, its position inside `active` or `passive`.
  std::vector<int> local_index;
  Matrix gg, gc, cg, cc;
  Eigen::LLT<Matrix> cc_factor;

  int active_count() const { return static_cast<int>(active.size()); }
  int passive_count() const { return static_cast<int>(passive.size()); }

  /// [L_cc]^-1 v.
  Vector solve_cc(const Vector& v) const;
  Matrix solve_cc(const Matrix& v) const;
};

BlockView partition(const laplacian::Laplacian& physical, const gridio::GridCase& grid);

/// theta* = L^+ P in the zero-mean gauge.
Vector dc_power_flow(const laplacian::Spectrum& physical, const Vector& injections);

Vector injection_vector(const gridio::GridCase& grid);

struct ReducedSystem {
  Matrix laplacian;  // L_red, g x g
  Vector injections; // P_red
  Vector inertia;    // diagonal of M
  Vector damping;    // diagonal of D
  /// Pre-fault angles of every physical bus, zero mean over all buses.
  Vector theta;
  Vector theta_g;
  Vector theta_c;
  BlockView blocks;
  /// d_i / m_i when uniform within 1e-9 relative.
  std::optional<double> gamma;

  int size() const { return static_cast<int>(laplacian.rows()); }
};

/// Schur complement elimination of the passive block.
///
/// `theta` are the physical-network DC angles; they are split into the
/// active and passive parts and kept alongside the reduced model.
ReducedSystem kron_reduce(const BlockView& blocks, const gridio::GridCase& grid, const Vector& theta);

/// Laplacian, spectrum, DC flow, partition and reduction in one call.
struct PreparedCase {
  laplacian::Laplacian physical;
  laplacian::Spectrum spectrum;
  ReducedSystem reduced;
};

PreparedCase prepare(const gridio::GridCase& grid);

double line_flow(const Vector& theta, const gridio::Line& line);

std::optional<double> uniform_ratio(const Vector& damping, const Vector& inertia, double rel_tol = 1e-9);

}  // namespace gridstress::kron
