#include "gridstress/gridstress.h"

#include <cstdio>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "gridstress/commands.hpp"
#include "gridstress/error.hpp"
#include "gridstress/simulator.hpp"

using namespace gridstress;

struct gs_case {
  gridio::GridCase grid;
};

struct gs_report {
  commands::CommandReport report;
};

namespace {

thread_local std::string last_error;

template <class Fn>
gs_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return GS_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<gs_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GS_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(Errc::InvalidArgument, what);
}

const char* cell_or_null(const std::vector<std::string>& v, size_t i) {
  return i < v.size() ? v[i].c_str() : nullptr;
}

commands::RunConfig make_config(const gridio::GridCase& grid, gs_command command, const gs_options& o) {
  commands::RunConfig cfg;
  require(command >= GS_ANALYZE && command <= GS_CENTRALITY, "unknown command");
  cfg.command = static_cast<commands::Command>(command);
  switch (o.measure) {
    case GS_MEASURE_BOTH: cfg.measures = commands::parse_measures("both"); break;
    case GS_MEASURE_ANGLE: cfg.measures = commands::parse_measures("angle"); break;
    case GS_MEASURE_PRIMARY: cfg.measures = commands::parse_measures("primary"); break;
    default: fail(Errc::InvalidArgument, "unknown measure");
  }
  if (o.tau && *o.tau) cfg.taus = commands::parse_tau_list(o.tau, grid.base_frequency);
  if (o.epsilon > 0.0) cfg.epsilon = o.epsilon;
  cfg.dt = o.dt;
  cfg.t_max = o.t_max > 0.0 ? o.t_max : 0.0;
  require(o.workers >= 0, "workers must be non-negative");
  cfg.workers = o.workers > 0 ? o.workers : commands::default_workers();
  if (o.case_class) cfg.case_class = commands::parse_case_class(o.case_class);
  if (o.line_from >= 0 || o.line_to >= 0) {
    const auto idx = commands::find_line(grid, o.line_from, o.line_to);
    if (!idx) {
      fail(Errc::InvalidArgument,
           "no line between buses " + std::to_string(o.line_from) + " and " + std::to_string(o.line_to));
    }
    cfg.lines = {*idx};
  }
  cfg.pairs = o.pairs != 0;
  return cfg;
}

}  // namespace

extern "C" {

void gs_options_init(gs_options* o) {
  if (!o) return;
  o->measure = GS_MEASURE_BOTH;
  o->tau = nullptr;
  o->epsilon = 0.0;
  o->dt = 1e-4;
  o->t_max = 0.0;
  o->workers = 0;
  o->case_class = nullptr;
  o->line_from = -1;
  o->line_to = -1;
  o->pairs = 0;
}

const char* gs_version(void) { return GRIDSTRESS_VERSION; }

const char* gs_status_name(gs_status status) { return errc_name(static_cast<Errc>(status)); }

const char* gs_last_error(void) { return last_error.c_str(); }

gs_status gs_case_load(const char* path, gs_case** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    auto c = std::make_unique<gs_case>();
    c->grid = gridio::load_case(path);
    *out = c.release();
  });
}

gs_status gs_case_parse(const char* json_text, gs_case** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    *out = nullptr;
    auto c = std::make_unique<gs_case>();
    c->grid = gridio::parse_case(json_text);
    *out = c.release();
  });
}

void gs_case_free(gs_case* grid) { delete grid; }

gs_status gs_case_scale_inertia(gs_case* grid, double factor) {
  return guarded([&] {
    require(grid, "null case");
    commands::scale_inertia(grid->grid, factor);
  });
}

gs_status gs_case_gamma_jitter(gs_case* grid, double jitter) {
  return guarded([&] {
    require(grid, "null case");
    commands::apply_gamma_jitter(grid->grid, jitter);
  });
}

gs_status gs_case_info(const gs_case* grid, int* buses, int* active, int* lines, double* base_frequency) {
  return guarded([&] {
    require(grid, "null case");
    if (buses) *buses = grid->grid.size();
    if (active) *active = grid->grid.active_count();
    if (lines) *lines = static_cast<int>(grid->grid.lines.size());
    if (base_frequency) *base_frequency = grid->grid.base_frequency;
  });
}

size_t gs_case_warning_count(const gs_case* grid) { return grid ? grid->grid.warnings.size() : 0; }

const char* gs_case_warning(const gs_case* grid, size_t index) {
  return grid ? cell_or_null(grid->grid.warnings, index) : nullptr;
}

gs_status gs_tau_validity_bound(const gs_case* grid, double* seconds) {
  return guarded([&] {
    require(grid && seconds, "null argument");
    const auto prepared = kron::prepare(grid->grid);
    *seconds = simulator::tau_validity_bound(prepared.reduced);
  });
}

gs_status gs_run(const gs_case* grid, gs_command command, const gs_options* options, gs_report** out) {
  return guarded([&] {
    require(grid && out, "null argument");
    *out = nullptr;
    gs_options defaults;
    gs_options_init(&defaults);
    const auto cfg = make_config(grid->grid, command, options ? *options : defaults);
    auto r = std::make_unique<gs_report>();
    r->report = commands::run(grid->grid, cfg);
    *out = r.release();
  });
}

void gs_report_free(gs_report* report) { delete report; }

size_t gs_report_rows(const gs_report* r) { return r ? r->report.table.rows.size() : 0; }

size_t gs_report_columns(const gs_report* r) { return r ? r->report.table.columns.size() : 0; }

const char* gs_report_column(const gs_report* r, size_t column) {
  return r ? cell_or_null(r->report.table.columns, column) : nullptr;
}

const char* gs_report_cell(const gs_report* r, size_t row, size_t column) {
  if (!r || row >= r->report.table.rows.size()) return nullptr;
  return cell_or_null(r->report.table.rows[row], column);
}

int gs_report_row_errors(const gs_report* r) { return r ? r->report.row_errors : 0; }

int gs_report_bridges_excluded(const gs_report* r) { return r ? r->report.bridges_excluded : 0; }

size_t gs_report_warning_count(const gs_report* r) { return r ? r->report.warnings.size() : 0; }

const char* gs_report_warning(const gs_report* r, size_t index) {
  return r ? cell_or_null(r->report.warnings, index) : nullptr;
}

size_t gs_report_note_count(const gs_report* r) { return r ? r->report.notes.size() : 0; }

const char* gs_report_note(const gs_report* r, size_t index) {
  return r ? cell_or_null(r->report.notes, index) : nullptr;
}

int gs_report_exit_code(const gs_report* r, int strict) { return r ? r->report.exit_code(strict != 0) : 1; }

gs_status gs_report_write(const gs_report* r, const char* path, gs_format format) {
  return guarded([&] {
    require(r, "null report");
    require(format == GS_FORMAT_CSV || format == GS_FORMAT_JSON, "unknown format");
    const auto fmt = format == GS_FORMAT_JSON ? gridio::ReportFormat::Json : gridio::ReportFormat::Csv;
    if (r->report.table.rows.empty()) fail(Errc::EmptyReport, "report has no rows");
    const std::string text = gridio::render_table(r->report.table, fmt);
    if (!path || std::string(path) == "-") {
      std::fwrite(text.data(), 1, text.size(), stdout);
      std::fflush(stdout);
    } else {
      gridio::write_text(path, text);
    }
  });
}

gs_status gs_simulate_trajectory(const gs_case* grid, int line_from, int line_to, double tau, double dt, double t_max,
                                 int stride, const char* path) {
  return guarded([&] {
    require(grid && path, "null argument");
    require(stride >= 1, "stride must be at least 1");
    const auto idx = commands::find_line(grid->grid, line_from, line_to);
    if (!idx) fail(Errc::InvalidArgument, "no such line");
    const auto prepared = kron::prepare(grid->grid);
    const auto scenario = contingency::classify(grid->grid, prepared.reduced, *idx, tau);
    const auto dyn = simulator::fault_window(grid->grid, prepared.reduced, scenario);
    simulator::SimulationOptions opts;
    opts.dt = dt;
    opts.t_max = t_max > 0.0 ? t_max : 0.0;
    opts.snapshot_stride = stride;
    gridio::write_text(path, simulator::trajectory_csv(simulator::simulate(dyn, opts)));
  });
}

}  // extern "C"
