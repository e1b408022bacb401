#include "gridstress/kron.hpp"

#include <cmath>

#include "gridstress/error.hpp"

namespace gridstress::kron {

Vector BlockView::solve_cc(const Vector& v) const {
  if (passive.empty()) return Vector(0);
  return cc_factor.solve(v);
}

Matrix BlockView::solve_cc(const Matrix& v) const {
  if (passive.empty()) return Matrix(0, v.cols());
  return cc_factor.solve(v);
}

BlockView partition(const laplacian::Laplacian& physical, const gridio::GridCase& grid) {
  const int n = grid.size();
  if (physical.dimension() != n) fail(Errc::InvalidArgument, "Laplacian and case sizes differ");

  BlockView view;
  view.local_index.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& bucket = grid.is_active(i) ? view.active : view.passive;
    view.local_index[i] = static_cast<int>(bucket.size());
    bucket.push_back(i);
  }
  if (view.active.empty()) fail(Errc::Validation, "case needs at least one active bus");

  const Matrix& L = physical.matrix();
  const auto g = view.active_count();
  const auto c = view.passive_count();
  view.gg.resize(g, g);
  view.gc.resize(g, c);
  view.cg.resize(c, g);
  view.cc.resize(c, c);
  for (int a = 0; a < g; ++a) {
    for (int b = 0; b < g; ++b) view.gg(a, b) = L(view.active[a], view.active[b]);
    for (int b = 0; b < c; ++b) view.gc(a, b) = L(view.active[a], view.passive[b]);
  }
  for (int a = 0; a < c; ++a) {
    for (int b = 0; b < g; ++b) view.cg(a, b) = L(view.passive[a], view.active[b]);
    for (int b = 0; b < c; ++b) view.cc(a, b) = L(view.passive[a], view.passive[b]);
  }

  if (c > 0) {
    view.cc_factor.compute(view.cc);
    bool singular = view.cc_factor.info() != Eigen::Success;
    if (!singular) {
      // LLT succeeds on nearly singular blocks; check the pivots explicitly.
      const Vector diag = view.cc_factor.matrixLLT().diagonal();
      const double scale = view.cc.diagonal().maxCoeff();
      singular = (diag.array().square() <= 1e-12 * scale).any();
    }
    if (singular) {
      fail(Errc::SingularBlock, "passive block is singular: some passive buses have no path to an active bus");
    }
  }
  return view;
}

Vector injection_vector(const gridio::GridCase& grid) {
  Vector p(grid.size());
  for (int i = 0; i < grid.size(); ++i) p(i) = grid.buses[i].injection;
  return p;
}

Vector dc_power_flow(const laplacian::Spectrum& physical, const Vector& injections) {
  const double scale = std::max(injections.cwiseAbs().maxCoeff(), 1.0);
  if (std::abs(injections.sum()) > gridio::kBalanceTolerance * scale) {
    fail(Errc::Imbalance, "injections do not sum to zero");
  }
  Vector theta = physical.apply_pseudoinverse(injections);
  theta.array() -= theta.mean();
  return theta;
}

std::optional<double> uniform_ratio(const Vector& damping, const Vector& inertia, double rel_tol) {
  if (damping.size() == 0) return std::nullopt;
  const Vector ratio = damping.cwiseQuotient(inertia);
  const double mean = ratio.mean();
  if ((ratio.array() - mean).abs().maxCoeff() > rel_tol * std::abs(mean)) return std::nullopt;
  return mean;
}

ReducedSystem kron_reduce(const BlockView& blocks, const gridio::GridCase& grid, const Vector& theta) {
  const int g = blocks.active_count();
  const int c = blocks.passive_count();
  const Vector p = injection_vector(grid);

  ReducedSystem red;
  red.blocks = blocks;
  red.injections.resize(g);
  red.inertia.resize(g);
  red.damping.resize(g);
  red.theta = theta;
  red.theta_g.resize(g);
  red.theta_c.resize(c);
  Vector p_c(c);
  for (int a = 0; a < g; ++a) {
    const auto& bus = grid.buses[blocks.active[a]];
    red.injections(a) = bus.injection;
    red.inertia(a) = bus.inertia;
    red.damping(a) = bus.damping;
    red.theta_g(a) = theta(blocks.active[a]);
  }
  for (int a = 0; a < c; ++a) {
    p_c(a) = p(blocks.passive[a]);
    red.theta_c(a) = theta(blocks.passive[a]);
  }

  if (c > 0) {
    red.laplacian = blocks.gg - blocks.gc * blocks.solve_cc(blocks.cg);
    red.injections -= blocks.gc * blocks.solve_cc(p_c);
  } else {
    red.laplacian = blocks.gg;
  }
  red.laplacian = 0.5 * (red.laplacian + red.laplacian.transpose()).eval();
  red.gamma = uniform_ratio(red.damping, red.inertia);
  return red;
}

PreparedCase prepare(const gridio::GridCase& grid) {
  auto physical = laplacian::build_laplacian(grid);
  auto spectrum = laplacian::eigendecompose(physical);
  const Vector theta = dc_power_flow(spectrum, injection_vector(grid));
  auto blocks = partition(physical, grid);
  auto reduced = kron_reduce(blocks, grid, theta);
  return {std::move(physical), std::move(spectrum), std::move(reduced)};
}

double line_flow(const Vector& theta, const gridio::Line& line) {
  return line.susceptance * (theta(line.from) - theta(line.to));
}

}  // namespace gridstress::kron
