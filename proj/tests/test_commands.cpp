#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "gridstress/commands.hpp"
#include "gridstress/error.hpp"
#include "random_cases.hpp"

using namespace gridstress;
using commands::Command;
using commands::RunConfig;

namespace {

std::string cell(const gridio::ReportRow& r, const std::string& key) {
  for (const auto& [k, v] : r.extra) {
    if (k == key) return v;
  }
  return {};
}

std::string render(const commands::CommandReport& r) {
  return gridio::render_table(r.table, gridio::ReportFormat::Csv);
}

gridio::GridCase bus_graph(const laplacian::Laplacian& l) {
  gridio::GridCase g;
  g.base_frequency = 50;
  const Matrix& m = l.matrix();
  for (int i = 0; i < m.rows(); ++i) g.buses.push_back({i, gridio::BusKind::Active, 0.0, 1.0, 0.5});
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = i + 1; j < m.rows(); ++j) {
      if (m(i, j) != 0.0) g.lines.push_back({i, j, -m(i, j)});
    }
  }
  gridio::validate(g);
  return g;
}

}  // namespace

TEST(Commands, ParsesDurations) {
  EXPECT_EQ(commands::parse_tau_list("0.02", 50), (std::vector<double>{0.02}));
  const auto c = commands::parse_tau_list("1c..4c", 50);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c[0], 0.02);
  EXPECT_DOUBLE_EQ(c[3], 0.08);
  const auto mixed = commands::parse_tau_list("2c,0.1", 60);
  EXPECT_DOUBLE_EQ(mixed[0], 2.0 / 60.0);
  EXPECT_DOUBLE_EQ(mixed[1], 0.1);
  EXPECT_THROW(commands::parse_tau_list("abc", 50), Error);
  EXPECT_THROW(commands::parse_tau_list("-0.1", 50), Error);
  EXPECT_THROW(commands::parse_tau_list("4c..1c", 50), Error);
  EXPECT_THROW(commands::parse_tau_list("0.1..0.2", 50), Error);
}

TEST(Commands, ParsesNames) {
  EXPECT_EQ(commands::parse_command("rank"), Command::Rank);
  EXPECT_THROW(commands::parse_command("ranks"), Error);
  EXPECT_EQ(commands::parse_measures("both").size(), 2u);
  EXPECT_EQ(commands::parse_case_class("GenPassive"), contingency::CaseClass::GenPassive);
  EXPECT_FALSE(commands::parse_case_class("all").has_value());
  EXPECT_THROW(commands::parse_case_class("gen"), Error);
}

TEST(Commands, WorkersFromEnvironment) {
  setenv("GRIDSTRESS_WORKERS", "3", 1);
  EXPECT_EQ(commands::default_workers(), 3);
  setenv("GRIDSTRESS_WORKERS", "zero", 1);
  EXPECT_EQ(commands::default_workers(), 1);
  unsetenv("GRIDSTRESS_WORKERS");
  EXPECT_EQ(commands::default_workers(), 1);
}

TEST(Commands, AnalyzeIsIndependentOfWorkerCount) {
  std::mt19937 rng(31);
  cases::RandomCaseOptions opt;
  opt.min_nodes = 10;
  opt.max_nodes = 14;
  const auto g = cases::random_case(rng, opt);
  RunConfig cfg;
  cfg.taus = {0.02, 0.04};
  const auto one = render(commands::run(g, cfg));
  for (int w : {2, 4, 8}) {
    cfg.workers = w;
    EXPECT_EQ(render(commands::run(g, cfg)), one);
  }
}

TEST(Commands, AnalyzeRowsAndBridges) {
  std::mt19937 rng(32);
  const auto g = cases::random_case(rng);
  int bridges = 0;
  for (int l = 0; l < static_cast<int>(g.lines.size()); ++l) bridges += contingency::is_bridge(g, l);
  RunConfig cfg;
  const auto r = commands::run(g, cfg);
  EXPECT_EQ(r.bridges_excluded, bridges);
  EXPECT_EQ(r.rows.size(), 2 * (g.lines.size() - bridges));
  for (const auto& row : r.rows) {
    EXPECT_EQ(cell(row, "status"), "ok");
    EXPECT_DOUBLE_EQ(row.tau, 1.0 / 50.0);
  }
}

TEST(Commands, ClassFilter) {
  std::mt19937 rng(33);
  const auto g = cases::random_case(rng);
  RunConfig cfg;
  cfg.case_class = contingency::CaseClass::GenPassive;
  try {
    const auto r = commands::run(g, cfg);
    for (const auto& row : r.rows) EXPECT_EQ(row.case_class, "GenPassive");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyReport);
  }
}

TEST(Commands, RankTiesFollowLineOrder) {
  // Symmetric square: all four lines carry the same flow and measure.
  gridio::GridCase g;
  g.base_frequency = 50;
  g.buses = {{0, gridio::BusKind::Active, 1, 1, 1},
             {1, gridio::BusKind::Active, 0, 1, 1},
             {2, gridio::BusKind::Active, -1, 1, 1},
             {3, gridio::BusKind::Active, 0, 1, 1}};
  g.lines = {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}};
  gridio::validate(g);
  RunConfig cfg;
  cfg.command = Command::Rank;
  cfg.measures = {contingency::MeasureKind::PrimaryControl};
  const auto r = commands::run(g, cfg);
  ASSERT_EQ(r.rows.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(cell(r.rows[k], "load_rank"), std::to_string(k + 1));
    EXPECT_EQ(cell(r.rows[k], "measure_rank"), std::to_string(k + 1));
    EXPECT_EQ(cell(r.rows[k], "non_monotonic"), "0");
  }
  EXPECT_EQ(r.rows[0].line_from, 0);
  EXPECT_EQ(r.rows[3].line_from, 3);
}

TEST(Commands, ValidityWarning) {
  std::mt19937 rng(34);
  const auto g = cases::random_case(rng);
  RunConfig cfg;
  cfg.taus = {1e3};
  const auto r = commands::run(g, cfg);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_EQ(r.exit_code(false), 0);
  EXPECT_EQ(r.exit_code(true), 1);
}

TEST(Commands, CentralityOnSymmetricGraphs) {
  RunConfig cfg;
  cfg.command = Command::Centrality;
  const auto ring = commands::run(bus_graph(cases::ring(6)), cfg);
  ASSERT_EQ(ring.table.rows.size(), 6u);
  for (const auto& row : ring.table.rows) EXPECT_NEAR(std::stod(row[2]), std::stod(ring.table.rows[0][2]), 1e-12);

  const auto star = commands::run(bus_graph(cases::star(4)), cfg);
  EXPECT_EQ(star.table.rows[0][4], "1");

  cfg.pairs = true;
  const auto pairs = commands::run(bus_graph(cases::ring(5)), cfg);
  EXPECT_EQ(pairs.table.rows.size(), 10u);
  for (const auto& row : pairs.table.rows) EXPECT_LT(std::abs(std::stod(row[2])), 1e-12);
}

TEST(Commands, CompareReportsBothPaths) {
  std::mt19937 rng(35);
  cases::RandomCaseOptions opt;
  opt.max_nodes = 5;
  opt.gamma = 2.0;
  const auto g = cases::random_case(rng, opt);
  RunConfig cfg;
  cfg.command = Command::Compare;
  cfg.taus = {0.01};
  cfg.dt = 5e-4;
  int l = 0;
  while (contingency::is_bridge(g, l)) ++l;
  cfg.lines = {l};
  const auto r = commands::run(g, cfg);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    ASSERT_TRUE(row.measure_closed && row.measure_sim);
    EXPECT_NEAR(*row.measure_sim / *row.measure_closed, std::stod(cell(row, "ratio")), 1e-12);
    EXPECT_NEAR(std::stod(cell(row, "ratio")), 1.0, 0.1);
  }
}

TEST(Commands, FindLineAndScaling) {
  std::mt19937 rng(36);
  auto g = cases::random_case(rng);
  const auto& line = g.lines[0];
  EXPECT_EQ(commands::find_line(g, g.original_ids[line.to], g.original_ids[line.from]), 0);
  EXPECT_FALSE(commands::find_line(g, -5, -6).has_value());
  const double m0 = g.buses[line.from].inertia;
  commands::scale_inertia(g, 2.0);
  EXPECT_DOUBLE_EQ(g.buses[line.from].inertia, 2.0 * m0);
  EXPECT_THROW(commands::scale_inertia(g, -1.0), Error);
  EXPECT_THROW(commands::apply_gamma_jitter(g, -1.0), Error);
}
