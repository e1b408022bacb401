#pragma once

#include <optional>
#include <vector>

#include "gridstress/contingency.hpp"

namespace gridstress::simulator {

/// Piecewise-constant linear swing dynamics in deviation coordinates
/// phi = theta_g - theta*_g:
///   t in [0, tau):  M phi'' = -D phi' - L_fault phi + drift
///   t >= tau:       M phi'' = -D phi' - L_post phi
/// For a line outage L_fault and drift come from re-reducing the physical
/// network without the line: drift = P_red^f - L_red^f theta*_g.
struct FaultWindowDynamics {
  Matrix fault_laplacian;
  Matrix post_laplacian;
  Vector drift;
  Vector inertia;
  Vector damping;
  double tau = 0.0;

  int size() const { return static_cast<int>(post_laplacian.rows()); }
};

/// Builds the dynamics of a line outage. Throws BridgeLine for bridges.
FaultWindowDynamics fault_window(const gridio::GridCase& grid, const kron::ReducedSystem& red,
                                 const contingency::FaultScenario& scenario);

struct SimulationOptions {
  double dt = 1e-4;
  /// Horizon; 0 selects 120 / gamma (gamma = mean d_i / m_i).
  double t_max = 0.0;
  /// Relative energy threshold that ends the run.
  double stop_ratio = 1e-12;
  /// Keep every `snapshot_stride`-th state in the trajectory (0 keeps none).
  int snapshot_stride = 0;
};

/// Integration record. Per-step integrands are stored for both measures; the
/// full states only at the requested stride.
struct Trajectory {
  /// Step sizes of the fault window and of the post-fault segment.
  double dt_fault = 0.0;
  double dt_post = 0.0;
  int fault_steps = 0;
  /// sum_i (phi_i - mean phi)^2 and sum_i d_i omega_i^2 at every grid point,
  /// the fault window first (fault_steps + 1 points), then the post-fault part.
  std::vector<double> angle_integrand;
  std::vector<double> primary_integrand;
  /// Time derivatives of the integrands at the four segment ends, used for
  /// the endpoint correction: [fault start, fault end, post start, post end].
  double angle_slope[4] = {0, 0, 0, 0};
  double primary_slope[4] = {0, 0, 0, 0};

  std::vector<double> times;
  std::vector<Vector> phi;
  std::vector<Vector> omega;

  double final_time = 0.0;
  double energy_at_tau = 0.0;
  double final_energy = 0.0;
  /// Largest step-to-step post-fault energy increase relative to energy_at_tau.
  double max_energy_increase = 0.0;
  /// Observed exponential decay rate of the energy near the end of the run.
  double decay_rate = 0.0;
  bool truncated = false;
  /// State right after the fault window.
  Vector phi_tau;
  Vector omega_tau;
};

/// Fixed-step classical RK4. The fault window is split into ceil(tau / dt)
/// equal steps so that t = tau falls on the grid.
///
/// Throws StepSize when dt > tau / 20 or dt > 0.1 / sqrt(lambda_max) of
/// M^-1/2 L M^-1/2, and NonDecay when the post-fault energy grows.
Trajectory simulate(const FaultWindowDynamics& dyn, const SimulationOptions& options = {});

struct IntegralResult {
  double value = 0.0;
  /// Estimated contribution beyond the end of the run (included in value).
  double tail = 0.0;
  /// Set when the run hit t_max; value is then a lower bound plus the tail.
  bool lower_bound = false;
};

/// Trapezoidal quadrature with an endpoint derivative correction.
IntegralResult performance_integral(const Trajectory& trajectory, contingency::MeasureKind kind);

/// gamma m / lambda_2(L_red); with heterogeneous inertia m = min_i m_i.
double tau_validity_bound(const kron::ReducedSystem& red);

/// CSV with columns t,phi_0..phi_{g-1},omega_0..omega_{g-1}.
std::string trajectory_csv(const Trajectory& trajectory);

}  // namespace gridstress::simulator
