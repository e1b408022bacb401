#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridstress/gramian.hpp"
#include "gridstress/kron.hpp"

namespace gridstress::contingency {

enum class CaseClass { GenGen, PassivePassive, GenPassive };

const char* case_class_name(CaseClass c);

/// A single line outage of duration tau. For GenPassive faults `line.from`
/// is always the active endpoint.
struct FaultScenario {
  int line_index = -1;
  gridio::Line line;
  CaseClass case_class = CaseClass::GenGen;
  double tau = 0.0;
  double p_flow = 0.0;  // b (theta*_from - theta*_to)
  bool splits_network = false;
};

/// True when removing `grid.lines[line_index]` disconnects the network.
bool is_bridge(const gridio::GridCase& grid, int line_index);

/// Throws BridgeLine when the outage splits the network.
FaultScenario classify(const gridio::GridCase& grid, const kron::ReducedSystem& red, int line_index,
                       double tau);

/// Impulse produced by the fault window. `momentum` is the g-vector p of
/// integrated drift (already multiplied by tau), so that the state right after
/// the impulse is (0, M^-1 p) and `lower` = M^-1/2 p is the lower block of B.
struct BVector {
  Vector momentum;
  Vector lower;
  /// 1 for GenGen, 1 - b e^T Lcc^-1 e (PassivePassive), 1 - b [Lcc^-1]_bb (GenPassive).
  double denominator = 1.0;

  /// Full 2g state [0; lower].
  Vector full() const;
};

BVector b_vector(const FaultScenario& scenario, const kron::ReducedSystem& red);

enum class MeasureKind { AngleCoherence, PrimaryControl };

const char* measure_kind_name(MeasureKind k);

struct MeasureResult {
  FaultScenario scenario;
  MeasureKind kind = MeasureKind::AngleCoherence;
  /// Closed-form value; empty when the case lies outside the closed-form
  /// hypotheses (angle coherence with heterogeneous inertia).
  std::optional<double> closed_form;
  double topology_factor = 0.0;
  /// P^2 tau^2 / (2d) for angle coherence, P^2 tau^2 / 2 for primary control.
  double prefactor = 0.0;
  /// Resistance distance between the endpoints on the physical network.
  double omega = 0.0;
  /// B^T X22 B through the modal Gramian at eps = 0 (deflated for angles).
  double gramian_path = 0.0;
  std::optional<double> simulated;
  bool beyond_scope = false;
};

/// Everything that is shared by all contingencies of one case: the reduced
/// model, the physical spectrum and resistance matrix, and the X22 matrices.
/// Read-only after construction, so one instance serves all workers.
class Evaluator {
 public:
  Evaluator(const gridio::GridCase& grid, const kron::PreparedCase& prepared);

  const gridio::GridCase& grid() const { return *grid_; }
  const kron::ReducedSystem& reduced() const { return prepared_->reduced; }
  const laplacian::Spectrum& physical_spectrum() const { return prepared_->spectrum; }
  const Matrix& resistance() const { return resistance_; }
  double gamma() const { return gamma_; }
  bool uniform_inertia() const { return uniform_inertia_; }

  FaultScenario scenario(int line_index, double tau) const { return classify(*grid_, reduced(), line_index, tau); }

  /// Closed form with the internal Gramian cross-check (1e-8 relative).
  /// Throws NonUniformInertia when inertias differ.
  MeasureResult angle_coherence(const FaultScenario& scenario) const;
  /// Closed form with the internal check against B^T (I/2) B (1e-10).
  MeasureResult primary_control_effort(const FaultScenario& scenario) const;
  /// Gramian-path value only; works for heterogeneous inertia and is marked
  /// beyond_scope in that case.
  MeasureResult angle_gramian(const FaultScenario& scenario) const;

  MeasureResult evaluate(const FaultScenario& scenario, MeasureKind kind) const;

  /// B^T X22(eps) B on the regularized system, swept over eps.
  laplacian::EpsilonSweep epsilon_path(const FaultScenario& scenario, MeasureKind kind,
                                       std::span<const double> epsilons = laplacian::default_epsilons()) const;

 private:
  const gridio::GridCase* grid_;
  const kron::PreparedCase* prepared_;
  Matrix resistance_;
  double gamma_ = 0.0;
  bool uniform_inertia_ = false;
  Matrix x22_angle_;
  Matrix x22_frequency_;
};

/// Uniform damping ratio of the reduced model; throws NonUniformDamping.
double require_gamma(const kron::ReducedSystem& red);

/// (1/2d) e_s^T (L + eps I)^-1 e_s: the response to a single power pulse at
/// node s. Diverges like 1/(2 d N eps).
double nodal_pulse_measure(const laplacian::Spectrum& spectrum, int s, double epsilon, double damping);

/// Finite difference of two nodal pulses, (L^+_ss - L^+_s's') / (2d),
/// evaluated on the deflated spectrum.
double pulse_difference(const laplacian::Spectrum& spectrum, int s, int s_prime, double damping);

/// N^-1 sum_i Omega_si for every node.
Vector average_resistance(const laplacian::Spectrum& spectrum);

}  // namespace gridstress::contingency
