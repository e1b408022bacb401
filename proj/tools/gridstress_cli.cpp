// gridstress command-line front end. Links only the C interface.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "gridstress/gridstress.h"

namespace {

struct Args {
  std::string case_path;
  std::string measure = "both";
  std::string tau;
  std::string epsilon = "auto";
  double dt = 1e-4;
  double t_max = 0.0;
  int workers = 0;
  std::string out = "-";
  std::string format = "csv";
  bool strict = false;
  double gamma_jitter = 0.0;
  double inertia_scale = 1.0;
  std::string line;
  std::string case_class;
  std::string trajectory;
  int stride = 10;
  bool pairs = false;
};

int fatal(gs_status status) {
  std::fprintf(stderr, "error: %s: %s\n", gs_status_name(status), gs_last_error());
  return 2;
}

bool parse_line(const std::string& text, int& from, int& to) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) return false;
  try {
    std::size_t a = 0, b = 0;
    from = std::stoi(text.substr(0, dash), &a);
    to = std::stoi(text.substr(dash + 1), &b);
    return a == dash && b == text.size() - dash - 1;
  } catch (const std::exception&) {
    return false;
  }
}

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("--case", a.case_path, "Case file (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--measure", a.measure, "angle, primary or both")
      ->check(CLI::IsMember({"angle", "primary", "both"}));
  sub->add_option("--tau", a.tau, "Fault durations: seconds or cycles, e.g. 0.02,0.04 or 1c..4c");
  sub->add_option("--epsilon", a.epsilon, "Regularization for the gramian_eps column, or auto");
  sub->add_option("--dt", a.dt, "Integration step in seconds")->check(CLI::PositiveNumber);
  sub->add_option("--t-max", a.t_max, "Simulation horizon in seconds (default 120 / gamma)");
  sub->add_option("--workers", a.workers, "Worker threads (default GRIDSTRESS_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", a.out, "Output path, - for stdout");
  sub->add_option("--format", a.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--strict", a.strict, "Fail on validity warnings");
  sub->add_option("--gamma-jitter", a.gamma_jitter, "Scale every damping by 1 + X");
  sub->add_option("--inertia-scale", a.inertia_scale, "Scale every inertia and damping")->check(CLI::PositiveNumber);
  sub->add_option("--line", a.line, "Restrict to one line, FROM-TO in source bus ids");
  sub->add_option("--class", a.case_class, "Restrict to GenGen, PassivePassive or GenPassive lines")
      ->check(CLI::IsMember({"GenGen", "PassivePassive", "GenPassive", "all"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient performance of power networks under single-line faults"};
  app.set_version_flag("--version", std::string(gs_version()));
  app.require_subcommand(1);
  Args a;
  struct Entry {
    const char* name;
    gs_command command;
    const char* help;
  };
  const Entry entries[] = {
      {"analyze", GS_ANALYZE, "Closed-form measures for every non-bridge line"},
      {"rank", GS_RANK, "Lines ordered by pre-fault load with measure ranks"},
      {"simulate", GS_SIMULATE, "Time-domain simulation of line outages"},
      {"compare", GS_COMPARE, "Closed form against simulation, with rescaled columns"},
      {"centrality", GS_CENTRALITY, "Average resistance distance per bus"},
  };
  CLI::App* subs[5];
  for (int i = 0; i < 5; ++i) {
    subs[i] = app.add_subcommand(entries[i].name, entries[i].help);
    add_common(subs[i], a);
  }
  subs[GS_SIMULATE]->add_option("--trajectory", a.trajectory, "Write the trajectory of --line to this CSV");
  subs[GS_SIMULATE]->add_option("--stride", a.stride, "Keep every n-th step in the trajectory")
      ->check(CLI::PositiveNumber);
  subs[GS_CENTRALITY]->add_flag("--pairs", a.pairs, "Pairwise pulse differences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  gs_command command = GS_ANALYZE;
  for (int i = 0; i < 5; ++i) {
    if (subs[i]->parsed()) command = entries[i].command;
  }

  gs_options opts;
  gs_options_init(&opts);
  opts.measure = a.measure == "angle" ? GS_MEASURE_ANGLE : a.measure == "primary" ? GS_MEASURE_PRIMARY : GS_MEASURE_BOTH;
  opts.tau = a.tau.empty() ? nullptr : a.tau.c_str();
  if (a.epsilon != "auto") {
    try {
      opts.epsilon = std::stod(a.epsilon);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: --epsilon must be a number or auto\n");
      return 2;
    }
    if (!(opts.epsilon > 0.0)) {
      std::fprintf(stderr, "error: --epsilon must be positive\n");
      return 2;
    }
  }
  opts.dt = a.dt;
  opts.t_max = a.t_max;
  opts.workers = a.workers;
  opts.case_class = a.case_class.empty() ? nullptr : a.case_class.c_str();
  opts.pairs = a.pairs ? 1 : 0;
  if (!a.line.empty() && !parse_line(a.line, opts.line_from, opts.line_to)) {
    std::fprintf(stderr, "error: --line expects FROM-TO\n");
    return 2;
  }

  gs_case* grid = nullptr;
  gs_status st = gs_case_load(a.case_path.c_str(), &grid);
  if (st != GS_OK) return fatal(st);
  for (size_t i = 0; i < gs_case_warning_count(grid); ++i) std::fprintf(stderr, "note: %s\n", gs_case_warning(grid, i));
  if (a.inertia_scale != 1.0 && (st = gs_case_scale_inertia(grid, a.inertia_scale)) != GS_OK) {
    gs_case_free(grid);
    return fatal(st);
  }
  if (a.gamma_jitter != 0.0 && (st = gs_case_gamma_jitter(grid, a.gamma_jitter)) != GS_OK) {
    gs_case_free(grid);
    return fatal(st);
  }

  if (!a.trajectory.empty()) {
    if (a.line.empty()) {
      gs_case_free(grid);
      std::fprintf(stderr, "error: --trajectory needs --line\n");
      return 2;
    }
    double base = 50.0;
    gs_case_info(grid, nullptr, nullptr, nullptr, &base);
    double tau = 1.0 / base;
    if (!a.tau.empty()) {
      const std::string first = a.tau.substr(0, a.tau.find(','));
      try {
        tau = first.back() == 'c' ? std::stod(first.substr(0, first.size() - 1)) / base : std::stod(first);
      } catch (const std::exception&) {
        gs_case_free(grid);
        std::fprintf(stderr, "error: cannot parse --tau\n");
        return 2;
      }
    }
    st = gs_simulate_trajectory(grid, opts.line_from, opts.line_to, tau, a.dt, a.t_max, a.stride,
                                a.trajectory.c_str());
    if (st != GS_OK) {
      gs_case_free(grid);
      return fatal(st);
    }
  }

  gs_report* report = nullptr;
  st = gs_run(grid, command, &opts, &report);
  gs_case_free(grid);
  if (st != GS_OK) return fatal(st);

  for (size_t i = 0; i < gs_report_note_count(report); ++i) std::fprintf(stderr, "note: %s\n", gs_report_note(report, i));
  for (size_t i = 0; i < gs_report_warning_count(report); ++i) {
    std::fprintf(stderr, "warning: %s\n", gs_report_warning(report, i));
  }
  st = gs_report_write(report, a.out == "-" ? nullptr : a.out.c_str(),
                       a.format == "json" ? GS_FORMAT_JSON : GS_FORMAT_CSV);
  const int code = gs_report_exit_code(report, a.strict ? 1 : 0);
  gs_report_free(report);
  if (st != GS_OK) return fatal(st);
  return code;
}
