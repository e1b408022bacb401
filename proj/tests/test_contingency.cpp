#include <gtest/gtest.h>

#include <random>

#include "gridstress/contingency.hpp"
#include "gridstress/error.hpp"
#include "random_cases.hpp"

using namespace gridstress;
using contingency::CaseClass;
using contingency::Evaluator;
using contingency::MeasureKind;

namespace {

gridio::GridCase make_case(std::vector<gridio::Bus> buses, std::vector<gridio::Line> lines) {
  gridio::GridCase g;
  g.base_frequency = 50;
  for (std::size_t i = 0; i < buses.size(); ++i) buses[i].id = static_cast<int>(i);
  g.buses = std::move(buses);
  g.lines = std::move(lines);
  gridio::validate(g);
  return g;
}

gridio::Bus active(double p, double m = 1.0, double d = 1.0) { return {0, gridio::BusKind::Active, p, m, d}; }
gridio::Bus passive(double p) { return {0, gridio::BusKind::Passive, p, 0, 0}; }

// A scenario built without the bridge check; the closed forms are algebraic
// and some hand examples use lines whose removal splits the network.
contingency::FaultScenario manual(const gridio::GridCase& g, const kron::ReducedSystem& red, int line, CaseClass c,
                                  double tau) {
  contingency::FaultScenario s;
  s.line_index = line;
  s.line = g.lines[line];
  s.case_class = c;
  s.tau = tau;
  s.p_flow = kron::line_flow(red.theta, s.line);
  return s;
}

}  // namespace

TEST(Contingency, ClassifiesByEndpointKinds) {
  // 0,1 active, 2,3 passive on a 4-cycle with a chord.
  const auto g = make_case({active(1), active(-1), passive(0.5), passive(-0.5)},
                           {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}, {0, 2, 1}});
  const auto p = kron::prepare(g);
  EXPECT_EQ(contingency::classify(g, p.reduced, 0, 0.1).case_class, CaseClass::GenGen);
  EXPECT_EQ(contingency::classify(g, p.reduced, 2, 0.1).case_class, CaseClass::PassivePassive);
  const auto gp = contingency::classify(g, p.reduced, 1, 0.1);
  EXPECT_EQ(gp.case_class, CaseClass::GenPassive);
  EXPECT_EQ(gp.line.from, 1);
  const auto pg = contingency::classify(g, p.reduced, 3, 0.1);
  EXPECT_EQ(pg.case_class, CaseClass::GenPassive);
  EXPECT_EQ(pg.line.from, 0);  // normalized: active endpoint first
  EXPECT_EQ(pg.line.to, 3);
  EXPECT_NEAR(pg.p_flow, kron::line_flow(p.reduced.theta, {0, 3, 1.0}), 1e-15);
  EXPECT_FALSE(pg.splits_network);
}

TEST(Contingency, TreeEdgesAreBridges) {
  const auto g = make_case({active(1), passive(0), active(-1)}, {{0, 1, 1}, {1, 2, 1}});
  const auto p = kron::prepare(g);
  EXPECT_TRUE(contingency::is_bridge(g, 0));
  try {
    contingency::classify(g, p.reduced, 0, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BridgeLine);
  }
}

TEST(Contingency, ChainGenPassiveImpulse) {
  // active - passive - active, unit susceptances, P = (1, 0, -1).
  const auto g = make_case({active(1), passive(0), active(-1)}, {{0, 1, 1}, {1, 2, 1}});
  const auto p = kron::prepare(g);
  const double tau = 0.1;
  const auto s = manual(g, p.reduced, 0, CaseClass::GenPassive, tau);
  EXPECT_NEAR(s.p_flow, 1.0, 1e-12);
  const auto bv = contingency::b_vector(s, p.reduced);
  EXPECT_NEAR(bv.denominator, 0.5, 1e-15);
  // 2 (e_0 + L_gc L_cc^-1 e_b)(theta_0 - theta_c) with L_gc L_cc^-1 e_b = (-1/2, -1/2).
  EXPECT_NEAR(bv.momentum(0), tau * 1.0, 1e-12);
  EXPECT_NEAR(bv.momentum(1), -tau * 1.0, 1e-12);
  EXPECT_EQ(bv.full().head(2), Vector::Zero(2));
}

TEST(Contingency, UnloadedLineHasNoImpulse) {
  const auto g = make_case({active(0), active(0), active(0)}, {{0, 1, 1}, {1, 2, 2}, {2, 0, 3}});
  const auto p = kron::prepare(g);
  const Evaluator ev(g, p);
  const auto s = ev.scenario(0, 0.05);
  EXPECT_EQ(contingency::b_vector(s, p.reduced).lower.norm(), 0.0);
  EXPECT_EQ(*ev.angle_coherence(s).closed_form, 0.0);
  EXPECT_EQ(*ev.primary_control_effort(s).closed_form, 0.0);
}

TEST(Contingency, TwoBusAngleCoherence) {
  const auto g = make_case({active(1), active(-1)}, {{0, 1, 2}});
  const auto p = kron::prepare(g);
  const Evaluator ev(g, p);
  const auto s = manual(g, p.reduced, 0, CaseClass::GenGen, 0.01);
  EXPECT_NEAR(s.p_flow, 1.0, 1e-14);
  const auto r = ev.angle_coherence(s);
  EXPECT_NEAR(r.omega, 0.5, 1e-14);
  EXPECT_NEAR(*r.closed_form, 2.5e-5, 1e-18);
  EXPECT_NEAR(r.prefactor * r.topology_factor, *r.closed_form, 1e-12 * *r.closed_form);
}

TEST(Contingency, GenGenPrimaryControlWithEqualInertia) {
  const double m = 2.5;
  const auto g = make_case({active(1, m, m), active(-0.4, m, m), active(-0.6, m, m)}, {{0, 1, 1}, {1, 2, 2}, {2, 0, 3}});
  const auto p = kron::prepare(g);
  const Evaluator ev(g, p);
  const auto s = ev.scenario(0, 0.03);
  const auto r = ev.primary_control_effort(s);
  EXPECT_NEAR(*r.closed_form, s.p_flow * s.p_flow * s.tau * s.tau / m, 1e-15);
}

TEST(Contingency, ImpulseIsOrthogonalToTheUniformMode) {
  std::mt19937 rng(42);
  int checked = 0;
  for (int k = 0; k < 50; ++k) {
    cases::RandomCaseOptions opt;
    opt.uniform_inertia = k % 2 == 0;
    const auto g = cases::random_case(rng, opt);
    const auto p = kron::prepare(g);
    for (int l = 0; l < static_cast<int>(g.lines.size()); ++l) {
      if (contingency::is_bridge(g, l)) continue;
      const auto s = contingency::classify(g, p.reduced, l, 1.0);
      const auto bv = contingency::b_vector(s, p.reduced);
      // (M^1/2 1)^T M^-1/2 p = 1^T p
      const Vector u = p.reduced.inertia.cwiseSqrt();
      EXPECT_LT(std::abs(u.dot(bv.lower)), 1e-12 + 1e-10 * bv.momentum.norm());
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Contingency, OracleChainOnRandomCases) {
  std::mt19937 rng(7);
  for (int k = 0; k < 20; ++k) {
    cases::RandomCaseOptions opt;
    opt.uniform_inertia = k % 2 == 0;
    const auto g = cases::random_case(rng, opt);
    const auto p = kron::prepare(g);
    const Evaluator ev(g, p);
    for (int l = 0; l < static_cast<int>(g.lines.size()); ++l) {
      if (contingency::is_bridge(g, l)) continue;
      const auto s = ev.scenario(l, 0.1);
      for (MeasureKind kind : {MeasureKind::AngleCoherence, MeasureKind::PrimaryControl}) {
        if (kind == MeasureKind::AngleCoherence && !ev.uniform_inertia()) {
          EXPECT_THROW(ev.angle_coherence(s), Error);
        }
        const auto r = ev.evaluate(s, kind);
        const double sweep = ev.epsilon_path(s, kind).limit;
        EXPECT_LT(cases::measure_gap(r.gramian_path, sweep, r, p.reduced), 1e-7);
        EXPECT_EQ(r.closed_form.has_value(), !r.beyond_scope);
        if (r.closed_form) {
          EXPECT_LT(cases::measure_gap(*r.closed_form, r.gramian_path, r, p.reduced), 1e-7);
          EXPECT_LT(cases::measure_gap(*r.closed_form, sweep, r, p.reduced), 1e-7);
        } else {
          EXPECT_FALSE(ev.uniform_inertia());
        }
      }
    }
  }
}

TEST(Contingency, ClosedFormsScaleWithTauAndFlowSquared) {
  std::mt19937 rng(9);
  const auto g = cases::random_case(rng);
  auto g2 = g;
  for (auto& b : g2.buses) b.injection *= 3.0;
  const auto p = kron::prepare(g);
  const auto p2 = kron::prepare(g2);
  const Evaluator ev(g, p), ev2(g2, p2);
  for (int l = 0; l < static_cast<int>(g.lines.size()); ++l) {
    if (contingency::is_bridge(g, l)) continue;
    for (MeasureKind kind : {MeasureKind::AngleCoherence, MeasureKind::PrimaryControl}) {
      const double a = *ev.evaluate(ev.scenario(l, 0.01), kind).closed_form;
      const double b = *ev.evaluate(ev.scenario(l, 0.04), kind).closed_form;
      const double c = *ev2.evaluate(ev2.scenario(l, 0.01), kind).closed_form;
      if (a == 0.0) continue;
      EXPECT_NEAR(b / a, 16.0, 16.0 * 1e-12);
      EXPECT_NEAR(c / a, 9.0, 9.0 * 1e-8);
    }
  }
}

TEST(Contingency, ReconstructionAndSign) {
  std::mt19937 rng(10);
  for (int k = 0; k < 10; ++k) {
    const auto g = cases::random_case(rng);
    const auto p = kron::prepare(g);
    const Evaluator ev(g, p);
    for (int l = 0; l < static_cast<int>(g.lines.size()); ++l) {
      if (contingency::is_bridge(g, l)) continue;
      for (MeasureKind kind : {MeasureKind::AngleCoherence, MeasureKind::PrimaryControl}) {
        const auto r = ev.evaluate(ev.scenario(l, 0.02), kind);
        EXPECT_GE(*r.closed_form, 0.0);
        EXPECT_NEAR(r.prefactor * r.topology_factor, *r.closed_form, 1e-12 * *r.closed_form);
      }
    }
  }
}

TEST(Contingency, PassivePassiveFactorsStayInRange) {
  std::mt19937 rng(12);
  int seen = 0;
  for (int k = 0; k < 40; ++k) {
    const auto g = cases::random_case(rng);
    const auto p = kron::prepare(g);
    const Evaluator ev(g, p);
    for (int l = 0; l < static_cast<int>(g.lines.size()); ++l) {
      if (contingency::is_bridge(g, l)) continue;
      const auto s = ev.scenario(l, 1.0);
      if (s.case_class != CaseClass::PassivePassive) continue;
      const auto bv = contingency::b_vector(s, p.reduced);
      EXPECT_GT(bv.denominator, 0.0);
      EXPECT_LE(bv.denominator, 1.0);
      EXPECT_GE(ev.angle_coherence(s).topology_factor, 0.0);
      ++seen;
    }
  }
  EXPECT_GT(seen, 10);
}

TEST(Contingency, MachinesWithoutPassiveNeighboursGetNoGenPassiveImpulse) {
  // Machine 2 touches only machine 0; the faulted line is 1 - 3 (passive 3).
  const auto g = make_case({active(1), active(0.5), active(-0.5), passive(-1)},
                           {{0, 1, 1}, {0, 2, 1}, {1, 3, 2}, {0, 3, 1}, {1, 2, 1}});
  const auto p = kron::prepare(g);
  const Evaluator ev(g, p);
  const auto s = ev.scenario(2, 0.1);
  ASSERT_EQ(s.case_class, CaseClass::GenPassive);
  const auto bv = contingency::b_vector(s, p.reduced);
  EXPECT_EQ(bv.momentum(2), 0.0);
}

TEST(Contingency, WithoutPassiveBusesTheFormulaUsesThePhysicalNetwork) {
  std::mt19937 rng(13);
  auto g = cases::random_case(rng);
  for (auto& b : g.buses) {
    b.kind = gridio::BusKind::Active;
    b.inertia = 1.5;
    b.damping = 0.6;
  }
  const auto p = kron::prepare(g);
  const Evaluator ev(g, p);
  const Matrix pinv = p.spectrum.pseudoinverse();
  for (int l = 0; l < static_cast<int>(g.lines.size()); ++l) {
    if (contingency::is_bridge(g, l)) continue;
    const auto s = ev.scenario(l, 0.02);
    const int a = s.line.from, b = s.line.to;
    const double omega = pinv(a, a) + pinv(b, b) - 2 * pinv(a, b);
    EXPECT_NEAR(*ev.angle_coherence(s).closed_form, s.p_flow * s.p_flow * 4e-4 * omega / 1.2,
                1e-10 * *ev.angle_coherence(s).closed_form + 1e-20);
  }
}

TEST(Contingency, NonUniformDampingRatioIsRejected) {
  auto g = make_case({active(1, 1, 1), active(-1, 1, 2)}, {{0, 1, 1}});
  const auto p = kron::prepare(g);
  try {
    Evaluator ev(g, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonUniformDamping);
  }
}

TEST(NodalPulse, PoleCoefficientIsOneOverTwoDN) {
  std::mt19937 rng(14);
  const auto s = laplacian::Spectrum::of(cases::random_graph(rng, 9));
  const double d = 0.8;
  const auto sweep = laplacian::epsilon_sweep([&](double e) { return contingency::nodal_pulse_measure(s, 3, e, d); });
  EXPECT_FALSE(sweep.finite);
  EXPECT_NEAR(sweep.pole_coefficient, 1.0 / (2 * d * 9), 1e-8);
  EXPECT_THROW(contingency::nodal_pulse_measure(s, 3, 0.0, d), Error);
}

TEST(NodalPulse, TwoBusFinitePart) {
  const double b = 3.0, d = 0.7, eps = 1e-6;
  const std::vector<laplacian::Edge> e = {{0, 1, b}};
  const auto s = laplacian::Spectrum::of(laplacian::Laplacian::from_edges(2, e));
  const double value = contingency::nodal_pulse_measure(s, 0, eps, d);
  const double pole = 1.0 / (2 * d * 2 * eps);
  const double finite = 1.0 / (2 * d) * 0.5 / (2 * b + eps);
  EXPECT_NEAR(value, pole + finite, 1e-9 * value);
}

TEST(PulseDifference, MatchesResistanceSums) {
  std::mt19937 rng(15);
  for (int k = 0; k < 10; ++k) {
    const int n = 4 + k;
    const auto s = laplacian::Spectrum::of(cases::random_graph(rng, n));
    const Matrix omega = s.resistance_matrix();
    const double d = 1.3;
    for (int a = 0; a < n; ++a) {
      for (int c = 0; c < n; ++c) {
        const double expected = (omega.row(a).sum() - omega.row(c).sum()) / (2 * d * n);
        EXPECT_NEAR(contingency::pulse_difference(s, a, c, d), expected, 1e-9 * (1 + std::abs(expected)));
      }
    }
  }
}

TEST(PulseDifference, SymmetricGraphs) {
  const auto ring = laplacian::Spectrum::of(cases::ring(7));
  for (int a = 0; a < 7; ++a) {
    EXPECT_EQ(contingency::pulse_difference(ring, a, a, 1.0), 0.0);
    for (int c = 0; c < 7; ++c) EXPECT_NEAR(contingency::pulse_difference(ring, a, c, 1.0), 0.0, 1e-12);
  }
  const auto star = laplacian::Spectrum::of(cases::star(5));
  EXPECT_LT(contingency::pulse_difference(star, 0, 1, 1.0), 0.0);
  // Hub sums to 5, a leaf to 1 + 4 * 2 = 9.
  EXPECT_NEAR(contingency::pulse_difference(star, 0, 1, 1.0), (5.0 - 9.0) / (2 * 6), 1e-12);
  const Vector avg = contingency::average_resistance(star);
  EXPECT_EQ(std::min_element(avg.data(), avg.data() + avg.size()) - avg.data(), 0);
}
