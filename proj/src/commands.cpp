#include "gridstress/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <numeric>

#include "gridstress/error.hpp"
#include "gridstress/parallel.hpp"
#include "gridstress/simulator.hpp"

namespace gridstress::commands {

namespace {

using contingency::CaseClass;
using contingency::Evaluator;
using contingency::FaultScenario;
using contingency::MeasureKind;
using contingency::MeasureResult;
using gridio::ReportRow;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view text, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(Errc::InvalidArgument, std::string("cannot parse ") + what + " \"" + std::string(text) + "\"");
  }
  return v;
}

std::string num(double v) { return gridio::format_number(v); }

CaseClass class_of(const gridio::GridCase& grid, const gridio::Line& line) {
  const bool a = grid.is_active(line.from), b = grid.is_active(line.to);
  if (a && b) return CaseClass::GenGen;
  if (!a && !b) return CaseClass::PassivePassive;
  return CaseClass::GenPassive;
}

// Everything derived once per case and shared read-only by the workers.
struct Context {
  const gridio::GridCase& grid;
  const RunConfig& config;
  kron::PreparedCase prepared;
  std::optional<Evaluator> evaluator;
  std::vector<double> taus;
  double epsilon = 0.0;
  Matrix x22_angle_eps;
  Matrix x22_frequency_eps;
  double validity_bound = 0.0;
  std::vector<int> lines;

  Context(const gridio::GridCase& g, const RunConfig& c) : grid(g), config(c), prepared(kron::prepare(g)) {}
};

void build_context(Context& ctx) {
  const auto& red = ctx.prepared.reduced;
  ctx.evaluator.emplace(ctx.grid, ctx.prepared);
  ctx.taus = ctx.config.taus.empty() ? std::vector<double>{1.0 / ctx.grid.base_frequency} : ctx.config.taus;
  for (double tau : ctx.taus) {
    if (!(tau >= 0.0)) fail(Errc::Domain, "fault durations must be non-negative");
  }

  const double lambda2 = laplacian::Spectrum::of(red.laplacian).algebraic_connectivity();
  ctx.epsilon = ctx.config.epsilon.value_or(1e-5 * lambda2);
  if (!(ctx.epsilon > 0.0)) fail(Errc::Domain, "epsilon must be positive");
  const int g = red.size();
  const auto basis = gramian::modal_basis({red.laplacian, red.inertia, ctx.evaluator->gamma(), ctx.epsilon});
  ctx.x22_angle_eps = gramian::x22_angle(basis, Matrix::Identity(g, g)).x22;
  ctx.x22_frequency_eps = gramian::x22_frequency(basis, Matrix(red.damping.asDiagonal())).x22;
  ctx.validity_bound = simulator::tau_validity_bound(red);

  if (ctx.config.lines.empty()) {
    ctx.lines.resize(ctx.grid.lines.size());
    std::iota(ctx.lines.begin(), ctx.lines.end(), 0);
  } else {
    ctx.lines = ctx.config.lines;
    for (int i : ctx.lines) {
      if (i < 0 || i >= static_cast<int>(ctx.grid.lines.size())) fail(Errc::InvalidArgument, "line index out of range");
    }
  }
  if (ctx.config.case_class) {
    std::erase_if(ctx.lines, [&](int i) { return class_of(ctx.grid, ctx.grid.lines[i]) != *ctx.config.case_class; });
  }
}

ReportRow base_row(const Context& ctx, const gridio::Line& line, CaseClass cls, double tau) {
  ReportRow row;
  row.line_from = ctx.grid.original_ids[line.from];
  row.line_to = ctx.grid.original_ids[line.to];
  row.case_class = contingency::case_class_name(cls);
  row.p_flow = kron::line_flow(ctx.prepared.reduced.theta, line);
  row.omega_dist = ctx.evaluator->resistance()(line.from, line.to);
  row.tau = tau;
  return row;
}

// The line as the evaluator orients it (active endpoint first for GenPassive).
gridio::Line oriented(const gridio::GridCase& grid, gridio::Line line) {
  if (class_of(grid, line) == CaseClass::GenPassive && !grid.is_active(line.from)) std::swap(line.from, line.to);
  return line;
}

struct Outcome {
  std::vector<ReportRow> rows;
  std::vector<std::string> notes;
  bool bridge = false;
  int errors = 0;
};

using Columns = std::vector<std::pair<std::string, std::string>>;

ReportRow error_row(const Context& ctx, int line_index, double tau, MeasureKind kind, const Error& e,
                    const std::vector<std::string>& keys) {
  const gridio::Line line = oriented(ctx.grid, ctx.grid.lines[line_index]);
  ReportRow row = base_row(ctx, line, class_of(ctx.grid, line), tau);
  for (const auto& k : keys) row.extra.emplace_back(k, "");
  for (auto& [k, v] : row.extra) {
    if (k == "measure") v = contingency::measure_kind_name(kind);
    if (k == "status") v = errc_name(e.code());
  }
  return row;
}

const std::vector<std::string> kAnalyzeKeys = {"measure", "topology_factor", "gramian_path", "epsilon",
                                               "gramian_eps", "scope", "status"};

Outcome analyze_line(const Context& ctx, int line_index) {
  Outcome out;
  const auto& ev = *ctx.evaluator;
  FaultScenario base;
  try {
    base = ev.scenario(line_index, 1.0);
  } catch (const Error& e) {
    if (e.code() == Errc::BridgeLine) {
      out.bridge = true;
      return out;
    }
    throw;
  }
  for (double tau : ctx.taus) {
    FaultScenario s = base;
    s.tau = tau;
    for (MeasureKind kind : ctx.config.measures) {
      try {
        const MeasureResult r = ev.evaluate(s, kind);
        const auto bv = contingency::b_vector(s, ev.reduced());
        const Matrix& x = kind == MeasureKind::AngleCoherence ? ctx.x22_angle_eps : ctx.x22_frequency_eps;
        ReportRow row = base_row(ctx, s.line, s.case_class, tau);
        row.measure_closed = r.closed_form;
        row.extra = {{"measure", contingency::measure_kind_name(kind)},
                     {"topology_factor", r.closed_form ? num(r.topology_factor) : ""},
                     {"gramian_path", num(r.gramian_path)},
                     {"epsilon", num(ctx.epsilon)},
                     {"gramian_eps", num(bv.lower.dot(x * bv.lower))},
                     {"scope", r.beyond_scope ? "gramian_only" : "closed_form"},
                     {"status", "ok"}};
        out.rows.push_back(std::move(row));
      } catch (const Error& e) {
        out.rows.push_back(error_row(ctx, line_index, tau, kind, e, kAnalyzeKeys));
        out.notes.push_back("line " + std::to_string(out.rows.back().line_from) + "-" +
                            std::to_string(out.rows.back().line_to) + ": " + e.what());
        ++out.errors;
      }
    }
  }
  return out;
}

const std::vector<std::string> kSimulateKeys = {"measure", "gramian_path", "truncated", "tail", "final_time", "status"};
const std::vector<std::string> kCompareKeys = {"measure", "gramian_path", "truncated", "tail", "final_time",
                                               "ratio", "x_axis", "y_closed", "y_sim", "status"};

Outcome simulate_item(const Context& ctx, int line_index, double tau, bool compare) {
  Outcome out;
  const auto& ev = *ctx.evaluator;
  const auto& keys = compare ? kCompareKeys : kSimulateKeys;
  FaultScenario s;
  try {
    s = ev.scenario(line_index, tau);
  } catch (const Error& e) {
    if (e.code() == Errc::BridgeLine) {
      out.bridge = true;
      return out;
    }
    throw;
  }
  simulator::Trajectory tr;
  try {
    const auto dyn = simulator::fault_window(ctx.grid, ev.reduced(), s);
    simulator::SimulationOptions opts;
    opts.dt = ctx.config.dt;
    opts.t_max = ctx.config.t_max;
    tr = simulator::simulate(dyn, opts);
  } catch (const Error& e) {
    for (MeasureKind kind : ctx.config.measures) out.rows.push_back(error_row(ctx, line_index, tau, kind, e, keys));
    out.errors += static_cast<int>(ctx.config.measures.size());
    out.notes.push_back("line " + std::to_string(out.rows.back().line_from) + "-" +
                        std::to_string(out.rows.back().line_to) + ": " + e.what());
    return out;
  }
  for (MeasureKind kind : ctx.config.measures) {
    const auto integral = simulator::performance_integral(tr, kind);
    ReportRow row = base_row(ctx, s.line, s.case_class, tau);
    row.measure_sim = integral.value;
    std::string status = tr.truncated ? "truncated" : "ok";
    std::optional<MeasureResult> r;
    try {
      r = ev.evaluate(s, kind);
    } catch (const Error& e) {
      status = errc_name(e.code());
      ++out.errors;
    }
    Columns extra = {{"measure", contingency::measure_kind_name(kind)},
                     {"gramian_path", r ? num(r->gramian_path) : ""},
                     {"truncated", tr.truncated ? "1" : "0"},
                     {"tail", num(integral.tail)},
                     {"final_time", num(tr.final_time)}};
    if (r) row.measure_closed = r->closed_form;
    if (compare) {
      std::string ratio, x_axis, y_closed, y_sim;
      if (r) {
        const double reference = r->closed_form.value_or(r->gramian_path);
        if (reference != 0.0) ratio = num(integral.value / reference);
        const double p2t2 = s.p_flow * s.p_flow * tau * tau;
        const double scale = kind == MeasureKind::AngleCoherence ? 2.0 * ev.reduced().damping.mean() : 2.0;
        if (r->closed_form) {
          x_axis = num(r->topology_factor);
          y_closed = p2t2 > 0.0 ? num(*r->closed_form * scale / p2t2) : "";
        }
        if (p2t2 > 0.0) y_sim = num(integral.value * scale / p2t2);
      }
      extra.emplace_back("ratio", ratio);
      extra.emplace_back("x_axis", x_axis);
      extra.emplace_back("y_closed", y_closed);
      extra.emplace_back("y_sim", y_sim);
    }
    extra.emplace_back("status", status);
    row.extra = std::move(extra);
    out.rows.push_back(std::move(row));
  }
  return out;
}

CommandReport collect(std::vector<Outcome>& outcomes) {
  CommandReport report;
  for (auto& o : outcomes) {
    report.bridges_excluded += o.bridge ? 1 : 0;
    report.row_errors += o.errors;
    for (auto& r : o.rows) report.rows.push_back(std::move(r));
    for (auto& n : o.notes) report.notes.push_back(std::move(n));
  }
  return report;
}

void validity_warnings(const Context& ctx, CommandReport& report) {
  for (double tau : ctx.taus) {
    if (tau > ctx.validity_bound) {
      report.warnings.push_back("tau = " + num(tau) + " s exceeds the validity bound gamma m / lambda_2 = " +
                                num(ctx.validity_bound) + " s");
    }
  }
}

CommandReport run_analyze(const Context& ctx) {
  std::vector<Outcome> outcomes(ctx.lines.size());
  parallel_for(static_cast<int>(ctx.lines.size()), ctx.config.workers,
               [&](int k) { outcomes[k] = analyze_line(ctx, ctx.lines[k]); });
  return collect(outcomes);
}

CommandReport run_rank(const Context& ctx) {
  CommandReport base;
  {
    std::vector<Outcome> outcomes(ctx.lines.size());
    parallel_for(static_cast<int>(ctx.lines.size()), ctx.config.workers, [&](int k) {
      Outcome o = analyze_line(ctx, ctx.lines[k]);
      // Ranking uses the first duration only.
      std::erase_if(o.rows, [&](const ReportRow& r) { return r.tau != ctx.taus.front(); });
      outcomes[k] = std::move(o);
    });
    base = collect(outcomes);
  }
  CommandReport report;
  report.bridges_excluded = base.bridges_excluded;
  report.row_errors = base.row_errors;
  report.notes = base.notes;

  auto cell = [](const ReportRow& r, const std::string& key) {
    for (const auto& [k, v] : r.extra) {
      if (k == key) return v;
    }
    return std::string();
  };
  for (MeasureKind kind : ctx.config.measures) {
    const std::string name = contingency::measure_kind_name(kind);
    std::vector<std::size_t> ok, failed;
    for (std::size_t i = 0; i < base.rows.size(); ++i) {
      if (cell(base.rows[i], "measure") != name) continue;
      (cell(base.rows[i], "status") == "ok" ? ok : failed).push_back(i);
    }
    auto value = [&](std::size_t i) {
      const auto& r = base.rows[i];
      return r.measure_closed ? *r.measure_closed : std::stod(cell(r, "gramian_path"));
    };
    // Rows are in line-index order, so a stable sort breaks ties by line index.
    std::vector<std::size_t> by_load = ok, by_measure = ok;
    std::stable_sort(by_load.begin(), by_load.end(), [&](std::size_t a, std::size_t b) {
      return base.rows[a].p_flow * base.rows[a].p_flow > base.rows[b].p_flow * base.rows[b].p_flow;
    });
    std::stable_sort(by_measure.begin(), by_measure.end(),
                     [&](std::size_t a, std::size_t b) { return value(a) > value(b); });
    std::vector<int> measure_rank(base.rows.size(), 0);
    for (std::size_t k = 0; k < by_measure.size(); ++k) measure_rank[by_measure[k]] = static_cast<int>(k) + 1;

    for (std::size_t k = 0; k < by_load.size(); ++k) {
      ReportRow row = base.rows[by_load[k]];
      const int mr = measure_rank[by_load[k]];
      row.extra = {{"measure", name},
                   {"value", num(value(by_load[k]))},
                   {"load_rank", std::to_string(k + 1)},
                   {"measure_rank", std::to_string(mr)},
                   {"non_monotonic", mr != static_cast<int>(k) + 1 ? "1" : "0"},
                   {"status", "ok"}};
      report.rows.push_back(std::move(row));
    }
    if (!by_measure.empty()) {
      const auto top = by_measure.front();
      const auto load_pos = std::find(by_load.begin(), by_load.end(), top) - by_load.begin() + 1;
      report.notes.push_back(name + ": largest measure on line " + std::to_string(base.rows[top].line_from) + "-" +
                             std::to_string(base.rows[top].line_to) + ", which carries the load of rank " +
                             std::to_string(load_pos));
    }
    for (std::size_t i : failed) {
      ReportRow row = base.rows[i];
      row.extra = {{"measure", name}, {"value", ""}, {"load_rank", ""}, {"measure_rank", ""},
                   {"non_monotonic", ""}, {"status", cell(base.rows[i], "status")}};
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

CommandReport run_simulations(const Context& ctx, bool compare) {
  const int per_line = static_cast<int>(ctx.taus.size());
  const int n = static_cast<int>(ctx.lines.size()) * per_line;
  std::vector<Outcome> outcomes(n);
  parallel_for(n, ctx.config.workers, [&](int k) {
    outcomes[k] = simulate_item(ctx, ctx.lines[k / per_line], ctx.taus[k % per_line], compare);
  });
  CommandReport report = collect(outcomes);
  report.bridges_excluded /= std::max(per_line, 1);
  for (const auto& r : report.rows) {
    for (const auto& [k, v] : r.extra) {
      if (k == "truncated" && v == "1") {
        report.warnings.push_back("simulation of line " + std::to_string(r.line_from) + "-" +
                                  std::to_string(r.line_to) + " hit t_max; the integral is a lower bound");
      }
    }
  }
  return report;
}

CommandReport run_centrality(const gridio::GridCase& grid, const RunConfig& config) {
  const auto physical = laplacian::build_laplacian(grid);
  const auto spectrum = laplacian::eigendecompose(physical);
  CommandReport report;
  const int n = grid.size();
  if (!config.pairs) {
    const Vector avg = contingency::average_resistance(spectrum);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return avg(a) < avg(b); });
    std::vector<int> rank(n);
    for (int k = 0; k < n; ++k) rank[order[k]] = k + 1;
    report.table.columns = {"bus", "kind", "avg_resistance", "closeness", "rank"};
    for (int i = 0; i < n; ++i) {
      report.table.rows.push_back({std::to_string(grid.original_ids[i]), grid.is_active(i) ? "active" : "passive",
                                   num(avg(i)), num(1.0 / avg(i)), std::to_string(rank[i])});
    }
    return report;
  }
  double d_ref = 0.0;
  for (const auto& bus : grid.buses) d_ref += bus.damping;
  d_ref /= std::max(grid.active_count(), 1);
  report.notes.push_back("pulse differences use the mean active damping d = " + num(d_ref));
  report.table.columns = {"bus", "bus_prime", "pulse_difference"};
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      report.table.rows.push_back({std::to_string(grid.original_ids[s]), std::to_string(grid.original_ids[t]),
                                   num(contingency::pulse_difference(spectrum, s, t, d_ref))});
    }
  }
  return report;
}

}  // namespace

Command parse_command(std::string_view text) {
  if (text == "analyze") return Command::Analyze;
  if (text == "rank") return Command::Rank;
  if (text == "simulate") return Command::Simulate;
  if (text == "compare") return Command::Compare;
  if (text == "centrality") return Command::Centrality;
  fail(Errc::InvalidArgument, "unknown command \"" + std::string(text) + "\"");
}

CommandReport run(const gridio::GridCase& grid, const RunConfig& config) {
  if (config.workers < 1) fail(Errc::InvalidArgument, "workers must be at least 1");
  if (config.command == Command::Centrality) return run_centrality(grid, config);
  if (config.measures.empty()) fail(Errc::InvalidArgument, "no measure selected");

  Context ctx(grid, config);
  build_context(ctx);
  CommandReport report;
  switch (config.command) {
    case Command::Analyze: report = run_analyze(ctx); break;
    case Command::Rank: report = run_rank(ctx); break;
    case Command::Simulate: report = run_simulations(ctx, false); break;
    case Command::Compare: report = run_simulations(ctx, true); break;
    case Command::Centrality: break;
  }
  validity_warnings(ctx, report);
  if (report.bridges_excluded > 0) {
    report.notes.push_back("excluded " + std::to_string(report.bridges_excluded) + " bridge lines");
  }
  if (report.rows.empty()) fail(Errc::EmptyReport, "no line produced a row");
  report.table = gridio::report_table(report.rows);
  return report;
}

std::vector<double> parse_tau_list(std::string_view text, double base_frequency) {
  if (!(base_frequency > 0.0)) fail(Errc::Domain, "base frequency must be positive");
  std::vector<double> out;
  auto one = [&](const std::string& tok) {
    if (!tok.empty() && tok.back() == 'c') {
      return parse_double(std::string_view(tok).substr(0, tok.size() - 1), "cycle count") / base_frequency;
    }
    return parse_double(tok, "duration");
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string tok = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (tok.empty()) fail(Errc::InvalidArgument, "empty duration in list");
    const auto dots = tok.find("..");
    if (dots != std::string::npos) {
      const std::string a = trim(tok.substr(0, dots)), b = trim(tok.substr(dots + 2));
      if (a.empty() || b.empty() || a.back() != 'c' || b.back() != 'c') {
        fail(Errc::InvalidArgument, "ranges are written in cycles, e.g. 1c..4c");
      }
      const double lo = parse_double(std::string_view(a).substr(0, a.size() - 1), "cycle count");
      const double hi = parse_double(std::string_view(b).substr(0, b.size() - 1), "cycle count");
      if (hi < lo) fail(Errc::InvalidArgument, "empty cycle range");
      for (double c = lo; c <= hi + 1e-9; c += 1.0) out.push_back(c / base_frequency);
    } else {
      out.push_back(one(tok));
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (double t : out) {
    if (!(t >= 0.0)) fail(Errc::Domain, "durations must be non-negative");
  }
  return out;
}

std::vector<MeasureKind> parse_measures(std::string_view text) {
  if (text == "angle") return {MeasureKind::AngleCoherence};
  if (text == "primary") return {MeasureKind::PrimaryControl};
  if (text == "both") return {MeasureKind::AngleCoherence, MeasureKind::PrimaryControl};
  fail(Errc::InvalidArgument, "measure must be angle, primary or both");
}

std::optional<CaseClass> parse_case_class(std::string_view text) {
  if (text.empty() || text == "all") return std::nullopt;
  if (text == "GenGen") return CaseClass::GenGen;
  if (text == "PassivePassive") return CaseClass::PassivePassive;
  if (text == "GenPassive") return CaseClass::GenPassive;
  fail(Errc::InvalidArgument, "case class must be GenGen, PassivePassive, GenPassive or all");
}

int default_workers() {
  const char* env = std::getenv("GRIDSTRESS_WORKERS");
  if (!env) return 1;
  int v = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) return 1;
  return v;
}

void scale_inertia(gridio::GridCase& grid, double factor) {
  if (!(factor > 0.0)) fail(Errc::Domain, "inertia scale must be positive");
  for (auto& bus : grid.buses) {
    bus.inertia *= factor;
    bus.damping *= factor;
  }
}

void apply_gamma_jitter(gridio::GridCase& grid, double jitter) {
  if (!(jitter > -1.0)) fail(Errc::Domain, "gamma jitter must exceed -1");
  for (auto& bus : grid.buses) bus.damping *= 1.0 + jitter;
}

std::optional<int> find_line(const gridio::GridCase& grid, int from_id, int to_id) {
  for (std::size_t i = 0; i < grid.lines.size(); ++i) {
    const int a = grid.original_ids[grid.lines[i].from], b = grid.original_ids[grid.lines[i].to];
    if ((a == from_id && b == to_id) || (a == to_id && b == from_id)) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace gridstress::commands
