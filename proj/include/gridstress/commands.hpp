#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridstress/contingency.hpp"
#include "gridstress/gridio.hpp"

namespace gridstress::commands {

enum class Command { Analyze, Rank, Simulate, Compare, Centrality };

Command parse_command(std::string_view text);

struct RunConfig {
  Command command = Command::Analyze;
  std::vector<contingency::MeasureKind> measures = {contingency::MeasureKind::AngleCoherence,
                                                    contingency::MeasureKind::PrimaryControl};
  /// Fault durations in seconds. Empty means one AC cycle.
  std::vector<double> taus;
  /// Regularization for the gramian_eps column; empty means 1e-5 lambda_2(L_red).
  std::optional<double> epsilon;
  double dt = 1e-4;
  /// 0 selects 120 / gamma.
  double t_max = 0.0;
  int workers = 1;
  /// Indices into GridCase::lines; empty means every line.
  std::vector<int> lines;
  std::optional<contingency::CaseClass> case_class;
  /// Centrality: emit the pairwise pulse-difference table instead.
  bool pairs = false;
};

struct CommandReport {
  /// Per-line rows (all commands but centrality).
  std::vector<gridio::ReportRow> rows;
  /// The rendered layout of `rows`, or the centrality table.
  gridio::Table table;
  /// Validity warnings; `--strict` turns them into a failing exit code.
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  int row_errors = 0;
  int bridges_excluded = 0;

  int exit_code(bool strict) const { return row_errors > 0 || (strict && !warnings.empty()) ? 1 : 0; }
};

CommandReport run(const gridio::GridCase& grid, const RunConfig& config);

/// Comma-separated list of durations: seconds ("0.02") or AC cycles ("2c").
/// A range "1c..4c" expands to 1c,2c,3c,4c.
std::vector<double> parse_tau_list(std::string_view text, double base_frequency);

std::vector<contingency::MeasureKind> parse_measures(std::string_view text);

std::optional<contingency::CaseClass> parse_case_class(std::string_view text);

/// Value of GRIDSTRESS_WORKERS if set and valid, else 1.
int default_workers();

/// Multiplies every inertia and damping by `factor` (keeps gamma).
void scale_inertia(gridio::GridCase& grid, double factor);

/// Multiplies every damping by 1 + `jitter`, shifting gamma uniformly; used to
/// step away from critically damped modes.
void apply_gamma_jitter(gridio::GridCase& grid, double jitter);

/// Index of the line joining two buses given by their source ids.
std::optional<int> find_line(const gridio::GridCase& grid, int from_id, int to_id);

}  // namespace gridstress::commands
