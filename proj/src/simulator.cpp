#include "gridstress/simulator.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gridstress/error.hpp"

namespace gridstress::simulator {

namespace {

double max_scaled_eigenvalue(const Matrix& l, const Vector& inertia) {
  const Vector s = inertia.cwiseSqrt().cwiseInverse();
  Matrix scaled = s.asDiagonal() * l * s.asDiagonal();
  scaled = 0.5 * (scaled + scaled.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(scaled, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(Errc::Convergence, "eigensolver did not converge");
  return solver.eigenvalues().maxCoeff();
}

// One classical RK4 step of y' = A y + c is exactly y <- R y + r with
// R = I + S A, r = S c and S = h (I + hA/2 + h^2 A^2/6 + h^3 A^3/24).
struct AffineStep {
  Matrix r;
  Vector offset;
};

AffineStep rk4_step(const Matrix& l, const Vector& drift, const Vector& inertia, const Vector& damping, double h) {
  const int g = static_cast<int>(l.rows());
  const Vector inv_m = inertia.cwiseInverse();
  Matrix a = Matrix::Zero(2 * g, 2 * g);
  a.topRightCorner(g, g).setIdentity();
  a.bottomLeftCorner(g, g) = -(inv_m.asDiagonal() * l);
  a.bottomRightCorner(g, g).diagonal() = -damping.cwiseProduct(inv_m);
  Vector c = Vector::Zero(2 * g);
  c.tail(g) = drift.cwiseProduct(inv_m);

  const Matrix id = Matrix::Identity(2 * g, 2 * g);
  const Matrix ha = h * a;
  const Matrix s = h * (id + ha * (0.5 * id + ha * (id / 6.0 + ha / 24.0)));
  return {id + s * a, s * c};
}

struct Sample {
  double angle = 0.0;
  double primary = 0.0;
  double angle_slope = 0.0;
  double primary_slope = 0.0;
};

Sample sample(const Vector& phi, const Vector& omega, const Matrix& l, const Vector& drift,
              const Vector& inertia, const Vector& damping) {
  Sample out;
  const Vector centered = phi.array() - phi.mean();
  const Vector omega_c = omega.array() - omega.mean();
  out.angle = centered.squaredNorm();
  out.angle_slope = 2.0 * centered.dot(omega_c);
  out.primary = damping.dot(omega.cwiseAbs2());
  const Vector accel = (drift - damping.cwiseProduct(omega) - l * phi).cwiseQuotient(inertia);
  out.primary_slope = 2.0 * damping.dot(omega.cwiseProduct(accel));
  return out;
}

double energy(const Vector& phi, const Vector& omega, const Matrix& l, const Vector& inertia) {
  return phi.dot(l * phi) + inertia.dot(omega.cwiseAbs2());
}

}  // namespace

FaultWindowDynamics fault_window(const gridio::GridCase& grid, const kron::ReducedSystem& red,
                                 const contingency::FaultScenario& scenario) {
  if (scenario.splits_network || contingency::is_bridge(grid, scenario.line_index)) {
    fail(Errc::BridgeLine, "cannot simulate the outage of a bridge line");
  }
  const auto& blocks = red.blocks;
  Matrix gg = blocks.gg, gc = blocks.gc, cc = blocks.cc;
  const int i = scenario.line.from, j = scenario.line.to;
  const double b = scenario.line.susceptance;
  const int li = blocks.local_index[i], lj = blocks.local_index[j];
  const bool ai = grid.is_active(i), aj = grid.is_active(j);

  // L^f = L - b e e^T on the block views.
  auto entry = [&](bool ra, int r, bool ca, int c) -> double* {
    if (ra && ca) return &gg(r, c);
    if (ra && !ca) return &gc(r, c);
    if (!ra && !ca) return &cc(r, c);
    return nullptr;  // cg mirrors gc
  };
  *entry(ai, li, ai, li) -= b;
  *entry(aj, lj, aj, lj) -= b;
  if (double* p = entry(ai, li, aj, lj)) *p += b;
  if (double* p = entry(aj, lj, ai, li)) *p += b;

  FaultWindowDynamics dyn;
  dyn.post_laplacian = red.laplacian;
  dyn.inertia = red.inertia;
  dyn.damping = red.damping;
  dyn.tau = scenario.tau;

  Vector p_g(blocks.active_count()), p_c(blocks.passive_count());
  for (int a = 0; a < blocks.active_count(); ++a) p_g(a) = grid.buses[blocks.active[a]].injection;
  for (int a = 0; a < blocks.passive_count(); ++a) p_c(a) = grid.buses[blocks.passive[a]].injection;

  if (blocks.passive_count() > 0) {
    Eigen::LLT<Matrix> llt(cc);
    if (llt.info() != Eigen::Success) fail(Errc::SingularBlock, "faulted passive block is singular");
    dyn.fault_laplacian = gg - gc * llt.solve(Matrix(gc.transpose()));
    p_g -= gc * llt.solve(p_c);
  } else {
    dyn.fault_laplacian = gg;
  }
  dyn.fault_laplacian = 0.5 * (dyn.fault_laplacian + dyn.fault_laplacian.transpose()).eval();
  dyn.drift = p_g - dyn.fault_laplacian * red.theta_g;
  return dyn;
}

Trajectory simulate(const FaultWindowDynamics& dyn, const SimulationOptions& options) {
  const int g = dyn.size();
  if (g == 0 || dyn.fault_laplacian.rows() != g || dyn.drift.size() != g || dyn.inertia.size() != g ||
      dyn.damping.size() != g) {
    fail(Errc::InvalidArgument, "fault-window dynamics have inconsistent dimensions");
  }
  if ((dyn.inertia.array() <= 0.0).any() || (dyn.damping.array() <= 0.0).any()) {
    fail(Errc::Domain, "inertias and dampings must be positive");
  }
  if (!(dyn.tau >= 0.0)) fail(Errc::Domain, "fault duration must be non-negative");
  const double dt = options.dt;
  if (!(dt > 0.0)) fail(Errc::StepSize, "step size must be positive");
  if (dyn.tau > 0.0 && dt > dyn.tau / 20.0) {
    fail(Errc::StepSize, "step size must resolve the fault window (dt <= tau / 20)");
  }
  const double lam = std::max(max_scaled_eigenvalue(dyn.post_laplacian, dyn.inertia),
                              max_scaled_eigenvalue(dyn.fault_laplacian, dyn.inertia));
  if (lam > 0.0 && dt > 0.1 / std::sqrt(lam)) {
    fail(Errc::StepSize, "step size must resolve the fastest mode (dt <= 0.1 / sqrt(lambda_max))");
  }
  const double gamma = dyn.damping.cwiseQuotient(dyn.inertia).mean();
  const double t_max = options.t_max > 0.0 ? options.t_max : 120.0 / gamma;

  Trajectory tr;
  Vector phi = Vector::Zero(g), omega = Vector::Zero(g);
  Vector y = Vector::Zero(2 * g);
  const Vector no_drift = Vector::Zero(g);
  const int stride = options.snapshot_stride;
  auto snapshot = [&](double t, bool force) {
    if (stride <= 0) return;
    if (!force && !tr.times.empty() && tr.times.back() == t) return;
    tr.times.push_back(t);
    tr.phi.push_back(phi);
    tr.omega.push_back(omega);
  };
  auto record = [&](const Sample& s) {
    tr.angle_integrand.push_back(s.angle);
    tr.primary_integrand.push_back(s.primary);
  };

  // Fault window.
  tr.fault_steps = dyn.tau > 0.0 ? static_cast<int>(std::ceil(dyn.tau / dt - 1e-9)) : 0;
  tr.dt_fault = tr.fault_steps > 0 ? dyn.tau / tr.fault_steps : 0.0;
  Sample s = sample(phi, omega, dyn.fault_laplacian, dyn.drift, dyn.inertia, dyn.damping);
  tr.angle_slope[0] = s.angle_slope;
  tr.primary_slope[0] = s.primary_slope;
  record(s);
  snapshot(0.0, true);
  if (tr.fault_steps > 0) {
    const AffineStep step = rk4_step(dyn.fault_laplacian, dyn.drift, dyn.inertia, dyn.damping, tr.dt_fault);
    for (int n = 1; n <= tr.fault_steps; ++n) {
      y = step.r * y + step.offset;
      phi = y.head(g);
      omega = y.tail(g);
      s = sample(phi, omega, dyn.fault_laplacian, dyn.drift, dyn.inertia, dyn.damping);
      record(s);
      if (stride > 0 && (n % stride == 0 || n == tr.fault_steps)) snapshot(n * tr.dt_fault, false);
    }
  }
  tr.angle_slope[1] = s.angle_slope;
  tr.primary_slope[1] = s.primary_slope;
  tr.phi_tau = phi;
  tr.omega_tau = omega;

  // Post-fault segment.
  const Matrix& lp = dyn.post_laplacian;
  s = sample(phi, omega, lp, no_drift, dyn.inertia, dyn.damping);
  tr.angle_slope[2] = tr.angle_slope[3] = s.angle_slope;
  tr.primary_slope[2] = tr.primary_slope[3] = s.primary_slope;
  tr.dt_post = dt;
  tr.energy_at_tau = energy(phi, omega, lp, dyn.inertia);
  tr.final_time = dyn.tau;
  tr.final_energy = tr.energy_at_tau;
  if (tr.energy_at_tau <= 0.0) return tr;

  record(s);
  const AffineStep step = rk4_step(lp, no_drift, dyn.inertia, dyn.damping, dt);
  const double threshold = options.stop_ratio * tr.energy_at_tau;
  const long max_steps = static_cast<long>(std::ceil((t_max - dyn.tau) / dt));
  // Energy samples one decay time apart for the tail estimate.
  const long window = std::max<long>(1, static_cast<long>(1.0 / (gamma * dt)));
  double previous = tr.energy_at_tau, window_energy = tr.energy_at_tau;
  double window_start_energy = tr.energy_at_tau;
  long n = 0;
  for (n = 1; n <= max_steps; ++n) {
    y = step.r * y + step.offset;
    phi = y.head(g);
    omega = y.tail(g);
    s = sample(phi, omega, lp, no_drift, dyn.inertia, dyn.damping);
    record(s);
    const double e = energy(phi, omega, lp, dyn.inertia);
    if (!std::isfinite(e) || std::abs(e) > tr.energy_at_tau * (1.0 + 1e-6)) {
      fail(Errc::NonDecay, "post-fault energy grows; the configuration is not asymptotically stable");
    }
    tr.max_energy_increase = std::max(tr.max_energy_increase, (e - previous) / tr.energy_at_tau);
    previous = e;
    if (n % window == 0) {
      window_start_energy = window_energy;
      window_energy = e;
    }
    if (stride > 0 && n % stride == 0) snapshot(dyn.tau + n * dt, false);
    if (std::abs(e) <= threshold) break;
  }
  if (n > max_steps) {
    n = max_steps;
    tr.truncated = true;
  }
  tr.final_time = dyn.tau + n * dt;
  tr.final_energy = previous;
  tr.angle_slope[3] = s.angle_slope;
  tr.primary_slope[3] = s.primary_slope;
  if (window_energy < window_start_energy && window_energy > 0.0) {
    tr.decay_rate = std::log(window_start_energy / window_energy) / (window * dt);
  } else {
    tr.decay_rate = gamma;
  }
  snapshot(tr.final_time, false);
  return tr;
}

IntegralResult performance_integral(const Trajectory& tr, contingency::MeasureKind kind) {
  const bool angle = kind == contingency::MeasureKind::AngleCoherence;
  const auto& f = angle ? tr.angle_integrand : tr.primary_integrand;
  const double* slope = angle ? tr.angle_slope : tr.primary_slope;
  IntegralResult out;
  if (f.empty()) return out;

  auto segment = [&](std::size_t first, std::size_t last, double h, double fa, double fb) {
    if (last <= first) return 0.0;
    double sum = 0.5 * (f[first] + f[last]);
    for (std::size_t k = first + 1; k < last; ++k) sum += f[k];
    return h * sum - h * h / 12.0 * (fb - fa);
  };
  const auto fault_end = static_cast<std::size_t>(tr.fault_steps);
  out.value = segment(0, fault_end, tr.dt_fault, slope[0], slope[1]);
  if (f.size() > fault_end + 1) {
    out.value += segment(fault_end + 1, f.size() - 1, tr.dt_post, slope[2], slope[3]);
    if (tr.decay_rate > 0.0) out.tail = f.back() / tr.decay_rate;
    out.value += out.tail;
  }
  out.lower_bound = tr.truncated;
  return out;
}

double tau_validity_bound(const kron::ReducedSystem& red) {
  const double gamma = contingency::require_gamma(red);
  const double lambda2 = laplacian::Spectrum::of(red.laplacian).algebraic_connectivity();
  if (!(lambda2 > 0.0)) fail(Errc::Domain, "reduced network has no positive algebraic connectivity");
  return gamma * red.inertia.minCoeff() / lambda2;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream out;
  const int g = tr.phi.empty() ? 0 : static_cast<int>(tr.phi.front().size());
  out << 't';
  for (int i = 0; i < g; ++i) out << ",phi_" << i;
  for (int i = 0; i < g; ++i) out << ",omega_" << i;
  out << '\n';
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out << gridio::format_number(tr.times[k]);
    for (int i = 0; i < g; ++i) out << ',' << gridio::format_number(tr.phi[k](i));
    for (int i = 0; i < g; ++i) out << ',' << gridio::format_number(tr.omega[k](i));
    out << '\n';
  }
  return out.str();
}

}  // namespace gridstress::simulator
