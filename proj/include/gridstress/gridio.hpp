#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gridstress::gridio {

enum class BusKind { Active, Passive };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::Passive;
  double injection = 0.0;  // per unit
  double inertia = 0.0;    // m_i
  double damping = 0.0;    // d_i
};

struct Line {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;
};

/// A validated network. Bus ids are 0..N-1; `original_ids[i]` is the id the
/// bus carried in the source file.
///
/// `lines` are the transmission lines that are candidates for a contingency.
/// `transformers` are branches that belong to the network (and its Laplacian)
/// but are never faulted.
struct GridCase {
  std::string name;
  double base_frequency = 50.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Line> transformers;
  std::vector<int> original_ids;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(buses.size()); }
  bool is_active(int bus) const { return buses[bus].kind == BusKind::Active; }
  int active_count() const;
};

inline constexpr double kBalanceTolerance = 1e-9;

/// Parses the JSON case format and validates it. Parallel branches are merged
/// by summing susceptances and buses are renumbered by ascending source id.
GridCase parse_case(std::string_view json_text);
GridCase load_case(const std::filesystem::path& path);

/// Serializes with 17 significant digits using the source ids.
std::string serialize_case(const GridCase& grid);
void save_case(const GridCase& grid, const std::filesystem::path& path);

/// Checks every invariant of an in-memory case and restores exact injection
/// balance when the residual is within `kBalanceTolerance`.
void validate(GridCase& grid);

/// Connected-component count of the branch graph, optionally ignoring one
/// entry of `grid.lines`.
int component_count(const GridCase& grid, std::optional<int> skip_line = std::nullopt);

std::string format_number(double value);

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(std::string_view text);

/// One output row. The core columns are fixed; `extra` carries command
/// specific trailing columns and must use the same keys in every row.
struct ReportRow {
  int line_from = 0;
  int line_to = 0;
  std::string case_class;
  double p_flow = 0.0;
  double omega_dist = 0.0;
  std::optional<double> measure_closed;
  std::optional<double> measure_sim;
  double tau = 0.0;
  std::vector<std::pair<std::string, std::string>> extra;
};

inline constexpr const char* kReportHeader =
    "line_from,line_to,case_class,p_flow,omega_dist,measure_closed,measure_sim,tau";

/// Lays the rows out as a table with the core columns first.
struct Table;
Table report_table(std::span<const ReportRow> rows);

std::string render_report(std::span<const ReportRow> rows, ReportFormat format);
void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path,
                  ReportFormat format);

/// Generic table writer for outputs that are not per-line (centrality).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string render_table(const Table& table, ReportFormat format);
void write_table(const Table& table, const std::filesystem::path& path, ReportFormat format);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gridstress::gridio
