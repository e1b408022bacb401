#include "gridstress/contingency.hpp"

#include <cmath>
#include <utility>

#include "gridstress/error.hpp"

namespace gridstress::contingency {

namespace {

// `floor` is the size of the terms whose difference forms the value; results
// that cancel down to roundoff are compared against it instead.
bool agrees(double a, double b, double rel, double floor = 0.0) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel * scale + 1e-12 * floor;
}

std::string line_label(const FaultScenario& s) {
  return std::to_string(s.line.from) + "-" + std::to_string(s.line.to);
}

}  // namespace

const char* case_class_name(CaseClass c) {
  switch (c) {
    case CaseClass::GenGen: return "GenGen";
    case CaseClass::PassivePassive: return "PassivePassive";
    case CaseClass::GenPassive: return "GenPassive";
  }
  return "?";
}

const char* measure_kind_name(MeasureKind k) {
  return k == MeasureKind::AngleCoherence ? "angle" : "primary";
}

bool is_bridge(const gridio::GridCase& grid, int line_index) {
  return gridio::component_count(grid, line_index) > 1;
}

FaultScenario classify(const gridio::GridCase& grid, const kron::ReducedSystem& red, int line_index, double tau) {
  if (line_index < 0 || line_index >= static_cast<int>(grid.lines.size())) {
    fail(Errc::InvalidArgument, "line index out of range");
  }
  if (!(tau >= 0.0)) fail(Errc::Domain, "fault duration must be non-negative");
  FaultScenario s;
  s.line_index = line_index;
  s.line = grid.lines[line_index];
  s.tau = tau;
  const bool a = grid.is_active(s.line.from);
  const bool b = grid.is_active(s.line.to);
  if (a && b) {
    s.case_class = CaseClass::GenGen;
  } else if (!a && !b) {
    s.case_class = CaseClass::PassivePassive;
  } else {
    s.case_class = CaseClass::GenPassive;
    if (!a) std::swap(s.line.from, s.line.to);
  }
  s.splits_network = is_bridge(grid, line_index);
  if (s.splits_network) {
    fail(Errc::BridgeLine, "line " + line_label(s) + " is a bridge; its outage splits the network");
  }
  s.p_flow = kron::line_flow(red.theta, s.line);
  return s;
}

Vector BVector::full() const {
  Vector out = Vector::Zero(2 * lower.size());
  out.tail(lower.size()) = lower;
  return out;
}

BVector b_vector(const FaultScenario& s, const kron::ReducedSystem& red) {
  if (s.splits_network) fail(Errc::BridgeLine, "bridge lines have no impulse vector");
  const auto& blocks = red.blocks;
  const int g = red.size();
  const int alpha = blocks.local_index[s.line.from];
  const int beta = blocks.local_index[s.line.to];
  const double b = s.line.susceptance;

  BVector out;
  Vector direction = Vector::Zero(g);
  switch (s.case_class) {
    case CaseClass::GenGen:
      direction(alpha) = 1.0;
      direction(beta) = -1.0;
      break;
    case CaseClass::PassivePassive: {
      Vector e = Vector::Zero(blocks.passive_count());
      e(alpha) = 1.0;
      e(beta) = -1.0;
      const Vector x = blocks.solve_cc(e);
      out.denominator = 1.0 - b * e.dot(x);
      direction = -(blocks.gc * x);
      break;
    }
    case CaseClass::GenPassive: {
      Vector e = Vector::Zero(blocks.passive_count());
      e(beta) = 1.0;
      const Vector x = blocks.solve_cc(e);
      out.denominator = 1.0 - b * x(beta);
      direction = blocks.gc * x;
      direction(alpha) += 1.0;
      break;
    }
  }
  if (std::abs(out.denominator) < 1e-10) {
    fail(Errc::Denominator, "fault on line " + line_label(s) + " has a vanishing Sherman-Morrison denominator");
  }
  out.momentum = (s.p_flow * s.tau / out.denominator) * direction;
  out.lower = out.momentum.cwiseQuotient(red.inertia.cwiseSqrt());
  return out;
}

double require_gamma(const kron::ReducedSystem& red) {
  if (!red.gamma) fail(Errc::NonUniformDamping, "damping-to-inertia ratio d_i/m_i is not uniform");
  return *red.gamma;
}

Evaluator::Evaluator(const gridio::GridCase& grid, const kron::PreparedCase& prepared)
    : grid_(&grid), prepared_(&prepared) {
  const auto& red = prepared.reduced;
  gamma_ = require_gamma(red);
  const double mean = red.inertia.mean();
  uniform_inertia_ = (red.inertia.array() - mean).abs().maxCoeff() <= 1e-9 * mean;
  resistance_ = prepared.spectrum.resistance_matrix();

  const int g = red.size();
  const auto basis = gramian::modal_basis({red.laplacian, red.inertia, gamma_, 0.0});
  x22_angle_ = gramian::x22_angle_deflated(basis, Matrix::Identity(g, g)).x22;
  x22_frequency_ = gramian::x22_frequency(basis, Matrix(red.damping.asDiagonal())).x22;
}

MeasureResult Evaluator::angle_gramian(const FaultScenario& s) const {
  const BVector bv = b_vector(s, reduced());
  MeasureResult r;
  r.scenario = s;
  r.kind = MeasureKind::AngleCoherence;
  r.omega = resistance_(s.line.from, s.line.to);
  r.gramian_path = bv.lower.dot(x22_angle_ * bv.lower);
  r.beyond_scope = !uniform_inertia_;
  return r;
}

MeasureResult Evaluator::angle_coherence(const FaultScenario& s) const {
  if (!uniform_inertia_) {
    fail(Errc::NonUniformInertia, "angle coherence closed form needs uniform inertia");
  }
  MeasureResult r = angle_gramian(s);
  const auto& blocks = reduced().blocks;
  const double b = s.line.susceptance;
  const int alpha = blocks.local_index[s.line.from];
  const int beta = blocks.local_index[s.line.to];

  double factor = r.omega;
  double magnitude = r.omega;
  if (s.case_class == CaseClass::PassivePassive) {
    Vector e = Vector::Zero(blocks.passive_count());
    e(alpha) = 1.0;
    e(beta) = -1.0;
    const double ele = e.dot(blocks.solve_cc(e));
    const double den = 1.0 - b * ele;
    factor = (r.omega - ele) / (den * den);
    magnitude = (r.omega + std::abs(ele)) / (den * den);
  } else if (s.case_class == CaseClass::GenPassive) {
    Vector e = Vector::Zero(blocks.passive_count());
    e(beta) = 1.0;
    const double lbb = blocks.solve_cc(e)(beta);
    const double den = 1.0 - b * lbb;
    factor = (r.omega - lbb) / (den * den);
    magnitude = (r.omega + std::abs(lbb)) / (den * den);
  }
  const double d = reduced().damping.mean();
  r.topology_factor = factor;
  r.prefactor = s.p_flow * s.p_flow * s.tau * s.tau / (2.0 * d);
  r.closed_form = r.prefactor * factor;
  if (!agrees(*r.closed_form, r.gramian_path, 1e-8, r.prefactor * magnitude)) {
    fail(Errc::Consistency, "angle coherence closed form and Gramian path disagree on line " + line_label(s));
  }
  return r;
}

MeasureResult Evaluator::primary_control_effort(const FaultScenario& s) const {
  const auto& red = reduced();
  const auto& blocks = red.blocks;
  const BVector bv = b_vector(s, red);
  MeasureResult r;
  r.scenario = s;
  r.kind = MeasureKind::PrimaryControl;
  r.omega = resistance_(s.line.from, s.line.to);
  r.gramian_path = bv.lower.dot(x22_frequency_ * bv.lower);

  const double b = s.line.susceptance;
  const int alpha = blocks.local_index[s.line.from];
  const int beta = blocks.local_index[s.line.to];
  const Vector inv_m = red.inertia.cwiseInverse();
  double factor = 0.0;
  if (s.case_class == CaseClass::GenGen) {
    factor = inv_m(alpha) + inv_m(beta);
  } else {
    Vector e = Vector::Zero(blocks.passive_count());
    Vector row;
    double den = 1.0;
    if (s.case_class == CaseClass::PassivePassive) {
      e(alpha) = 1.0;
      e(beta) = -1.0;
      const Vector x = blocks.solve_cc(e);
      den = 1.0 - b * e.dot(x);
      row = blocks.gc * x;  // e^T Lcc^-1 Lcg e_i for every i
    } else {
      e(beta) = 1.0;
      const Vector x = blocks.solve_cc(e);
      den = 1.0 - b * x(beta);
      row = blocks.gc * x;
      row(alpha) += 1.0;
    }
    factor = inv_m.dot(row.cwiseAbs2()) / (den * den);
  }
  r.topology_factor = factor;
  r.prefactor = s.p_flow * s.p_flow * s.tau * s.tau / 2.0;
  r.closed_form = r.prefactor * factor;

  const double half_b = 0.5 * bv.lower.squaredNorm();
  if (!agrees(*r.closed_form, half_b, 1e-10)) {
    fail(Errc::Consistency, "primary control closed form disagrees with B^T (I/2) B on line " + line_label(s));
  }
  return r;
}

MeasureResult Evaluator::evaluate(const FaultScenario& s, MeasureKind kind) const {
  if (kind == MeasureKind::PrimaryControl) return primary_control_effort(s);
  if (uniform_inertia_) return angle_coherence(s);
  return angle_gramian(s);
}

laplacian::EpsilonSweep Evaluator::epsilon_path(const FaultScenario& s, MeasureKind kind,
                                                std::span<const double> epsilons) const {
  const auto& red = reduced();
  const BVector bv = b_vector(s, red);
  const int g = red.size();
  return laplacian::epsilon_sweep(
      [&](double eps) {
        const auto basis = gramian::modal_basis({red.laplacian, red.inertia, gamma_, eps});
        if (kind == MeasureKind::AngleCoherence) {
          return gramian::angle_form(basis, Matrix::Identity(g, g), bv.lower);
        }
        return gramian::frequency_form(basis, Matrix(red.damping.asDiagonal()), bv.lower);
      },
      epsilons);
}

double nodal_pulse_measure(const laplacian::Spectrum& spectrum, int s, double epsilon, double damping) {
  if (!(damping > 0.0)) fail(Errc::Domain, "damping must be positive");
  if (!(epsilon > 0.0)) fail(Errc::Domain, "nodal pulse measure needs a positive epsilon");
  if (s < 0 || s >= spectrum.dimension()) fail(Errc::InvalidArgument, "node out of range");
  const Vector e = Vector::Unit(spectrum.dimension(), s);
  return spectrum.regularized_inverse_quadratic(e, epsilon) / (2.0 * damping);
}

double pulse_difference(const laplacian::Spectrum& spectrum, int s, int s_prime, double damping) {
  if (!(damping > 0.0)) fail(Errc::Domain, "damping must be positive");
  const int n = spectrum.dimension();
  if (s < 0 || s >= n || s_prime < 0 || s_prime >= n) fail(Errc::InvalidArgument, "node out of range");
  double sum = 0.0;
  for (int l = spectrum.kernel_dimension(); l < n; ++l) {
    const double a = spectrum.vectors()(s, l);
    const double c = spectrum.vectors()(s_prime, l);
    sum += (a * a - c * c) / spectrum.value(l);
  }
  return sum / (2.0 * damping);
}

Vector average_resistance(const laplacian::Spectrum& spectrum) {
  return spectrum.resistance_matrix().rowwise().sum() / spectrum.dimension();
}

}  // namespace gridstress::contingency
