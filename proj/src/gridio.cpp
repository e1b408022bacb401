#include "gridstress/gridio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gridstress/error.hpp"

namespace gridstress::gridio {

namespace {

using nlohmann::json;

const json& require(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end()) fail(Errc::Parse, std::string("missing field \"") + key + "\"");
  return *it;
}

double number_field(const json& object, const char* key) {
  const json& v = require(object, key);
  if (!v.is_number()) fail(Errc::Parse, std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

int integer_field(const json& object, const char* key) {
  const json& v = require(object, key);
  if (!v.is_number_integer()) fail(Errc::Parse, std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

std::vector<Line> parse_branches(const json& array, const std::map<int, int>& index, const char* what) {
  if (!array.is_array()) fail(Errc::Parse, std::string("\"") + what + "\" must be an array");
  std::vector<Line> out;
  out.reserve(array.size());
  for (const json& item : array) {
    if (!item.is_object()) fail(Errc::Parse, std::string("entries of \"") + what + "\" must be objects");
    const int from = integer_field(item, "from");
    const int to = integer_field(item, "to");
    const double b = number_field(item, "b");
    auto f = index.find(from);
    auto t = index.find(to);
    if (f == index.end() || t == index.end()) {
      fail(Errc::Validation, std::string(what) + " " + std::to_string(from) + "-" + std::to_string(to) +
                                 " references an unknown bus");
    }
    out.push_back({f->second, t->second, b});
  }
  return out;
}

// Sums susceptances of branches sharing an unordered bus pair; keeps first-seen order.
std::vector<Line> merge_parallel(const std::vector<Line>& branches, int& merged) {
  std::vector<Line> out;
  std::map<std::pair<int, int>, std::size_t> seen;
  for (const Line& l : branches) {
    const auto key = std::minmax(l.from, l.to);
    auto [it, inserted] = seen.emplace(key, out.size());
    if (inserted) {
      out.push_back(l);
    } else {
      out[it->second].susceptance += l.susceptance;
      ++merged;
    }
  }
  return out;
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

std::string json_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool looks_numeric(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && s != "nan" && s != "inf" && s != "-inf";
}

std::string json_value(const std::string& cell) {
  if (cell.empty()) return "null";
  if (looks_numeric(cell)) return cell;
  return "\"" + json_escape(cell) + "\"";
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

int GridCase::active_count() const {
  return static_cast<int>(std::count_if(buses.begin(), buses.end(),
                                        [](const Bus& b) { return b.kind == BusKind::Active; }));
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

int component_count(const GridCase& grid, std::optional<int> skip_line) {
  DisjointSets sets(grid.size());
  int components = grid.size();
  for (int i = 0; i < static_cast<int>(grid.lines.size()); ++i) {
    if (skip_line && *skip_line == i) continue;
    if (sets.unite(grid.lines[i].from, grid.lines[i].to)) --components;
  }
  for (const Line& t : grid.transformers) {
    if (sets.unite(t.from, t.to)) --components;
  }
  return components;
}

void validate(GridCase& grid) {
  const int n = grid.size();
  if (n == 0) fail(Errc::Validation, "case has no buses");
  if (grid.original_ids.empty()) {
    grid.original_ids.resize(n);
    std::iota(grid.original_ids.begin(), grid.original_ids.end(), 0);
  }
  if (static_cast<int>(grid.original_ids.size()) != n) fail(Errc::Validation, "original id map has wrong size");
  for (int i = 0; i < n; ++i) {
    if (grid.buses[i].id != i) fail(Errc::Validation, "bus ids must be consecutive integers from 0");
  }
  if (!(grid.base_frequency > 0.0)) fail(Errc::Validation, "base frequency must be positive");

  auto check_branches = [&](const std::vector<Line>& branches, const char* what) {
    std::map<std::pair<int, int>, int> seen;
    for (const Line& l : branches) {
      if (l.from < 0 || l.from >= n || l.to < 0 || l.to >= n) {
        fail(Errc::Validation, std::string(what) + " references an unknown bus");
      }
      if (l.from == l.to) {
        fail(Errc::Validation, std::string(what) + " connects bus " + std::to_string(grid.original_ids[l.from]) +
                                   " to itself");
      }
      if (!(l.susceptance > 0.0) || !std::isfinite(l.susceptance)) {
        fail(Errc::Validation, std::string(what) + " " + std::to_string(grid.original_ids[l.from]) + "-" +
                                   std::to_string(grid.original_ids[l.to]) + " has non-positive susceptance");
      }
      if (++seen[std::minmax(l.from, l.to)] > 1) {
        fail(Errc::Validation, std::string("parallel ") + what + " between buses " +
                                   std::to_string(grid.original_ids[l.from]) + " and " +
                                   std::to_string(grid.original_ids[l.to]) + " must be merged");
      }
    }
  };
  check_branches(grid.lines, "line");
  check_branches(grid.transformers, "transformer");

  for (const Bus& b : grid.buses) {
    const std::string label = "bus " + std::to_string(grid.original_ids[b.id]);
    if (!std::isfinite(b.injection) || !std::isfinite(b.inertia) || !std::isfinite(b.damping)) {
      fail(Errc::Validation, label + " has a non-finite parameter");
    }
    if (b.kind == BusKind::Active && !(b.inertia > 0.0 && b.damping > 0.0)) {
      fail(Errc::Validation, label + " is active and needs positive inertia and damping");
    }
    if (b.kind == BusKind::Passive && (b.inertia != 0.0 || b.damping != 0.0)) {
      fail(Errc::Validation, label + " is passive and must have zero inertia and damping");
    }
  }

  double residual = 0.0;
  for (const Bus& b : grid.buses) residual += b.injection;
  if (std::abs(residual) > kBalanceTolerance) {
    fail(Errc::Validation, "injection imbalance: sum of injections is " + format_number(residual));
  }
  if (residual != 0.0) {
    const int active = grid.active_count();
    if (active > 0) {
      const double share = residual / active;
      for (Bus& b : grid.buses) {
        if (b.kind == BusKind::Active) b.injection -= share;
      }
      // Rounding-level residuals are not worth a warning.
      if (std::abs(residual) > 1e-12) {
        grid.warnings.push_back("injection residual " + format_number(residual) +
                                " removed uniformly across active buses");
      }
    }
  }

  if (component_count(grid) != 1) fail(Errc::Disconnected, "line graph is not connected");
}

GridCase parse_case(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    fail(Errc::Parse, std::string("malformed case file: ") + e.what());
  }
  if (!doc.is_object()) fail(Errc::Parse, "case file must be a JSON object");

  GridCase grid;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) fail(Errc::Parse, "field \"name\" must be a string");
    grid.name = it->get<std::string>();
  }
  grid.base_frequency = number_field(doc, "base_frequency_hz");

  const json& buses = require(doc, "buses");
  if (!buses.is_array()) fail(Errc::Parse, "\"buses\" must be an array");

  struct RawBus {
    int id;
    Bus bus;
  };
  std::vector<RawBus> raw;
  for (const json& item : buses) {
    if (!item.is_object()) fail(Errc::Parse, "entries of \"buses\" must be objects");
    RawBus r{};
    r.id = integer_field(item, "id");
    const json& kind = require(item, "kind");
    if (!kind.is_string()) fail(Errc::Parse, "bus kind must be a string");
    const auto k = kind.get<std::string>();
    if (k == "active") {
      r.bus.kind = BusKind::Active;
    } else if (k == "passive") {
      r.bus.kind = BusKind::Passive;
    } else {
      fail(Errc::Parse, "bus kind must be \"active\" or \"passive\", got \"" + k + "\"");
    }
    r.bus.injection = number_field(item, "p");
    r.bus.inertia = number_field(item, "m");
    r.bus.damping = number_field(item, "d");
    raw.push_back(r);
  }
  std::stable_sort(raw.begin(), raw.end(), [](const RawBus& a, const RawBus& b) { return a.id < b.id; });

  std::map<int, int> index;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!index.emplace(raw[i].id, static_cast<int>(i)).second) {
      fail(Errc::Validation, "duplicate bus id " + std::to_string(raw[i].id));
    }
    Bus b = raw[i].bus;
    b.id = static_cast<int>(i);
    grid.buses.push_back(b);
    grid.original_ids.push_back(raw[i].id);
  }

  int merged = 0;
  grid.lines = merge_parallel(parse_branches(require(doc, "lines"), index, "line"), merged);
  if (auto it = doc.find("transformers"); it != doc.end()) {
    grid.transformers = merge_parallel(parse_branches(*it, index, "transformer"), merged);
  }
  if (merged > 0) grid.warnings.push_back(std::to_string(merged) + " parallel branches merged");

  validate(grid);
  return grid;
}

GridCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open case file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_case(text.str());
}

std::string serialize_case(const GridCase& grid) {
  std::ostringstream out;
  out << "{\n  \"name\": \"" << json_escape(grid.name) << "\",\n";
  out << "  \"base_frequency_hz\": " << format_number(grid.base_frequency) << ",\n";
  out << "  \"buses\": [\n";
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    const Bus& b = grid.buses[i];
    out << "    {\"id\": " << grid.original_ids[i] << ", \"kind\": \""
        << (b.kind == BusKind::Active ? "active" : "passive") << "\", \"p\": " << format_number(b.injection)
        << ", \"m\": " << format_number(b.inertia) << ", \"d\": " << format_number(b.damping) << "}"
        << (i + 1 < grid.buses.size() ? ",\n" : "\n");
  }
  out << "  ],\n";
  auto branches = [&](const std::vector<Line>& list) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Line& l = list[i];
      out << "    {\"from\": " << grid.original_ids[l.from] << ", \"to\": " << grid.original_ids[l.to]
          << ", \"b\": " << format_number(l.susceptance) << "}" << (i + 1 < list.size() ? ",\n" : "\n");
    }
  };
  out << "  \"lines\": [\n";
  branches(grid.lines);
  out << "  ]";
  if (!grid.transformers.empty()) {
    out << ",\n  \"transformers\": [\n";
    branches(grid.transformers);
    out << "  ]";
  }
  out << "\n}\n";
  return out.str();
}

void save_case(const GridCase& grid, const std::filesystem::path& path) { write_text(path, serialize_case(grid)); }

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  fail(Errc::InvalidArgument, "unknown report format \"" + std::string(text) + "\"");
}

Table report_table(std::span<const ReportRow> rows) {
  if (rows.empty()) fail(Errc::EmptyReport, "report has no rows");
  Table table;
  table.columns = {"line_from", "line_to", "case_class", "p_flow", "omega_dist", "measure_closed", "measure_sim",
                   "tau"};
  for (const auto& [key, value] : rows.front().extra) table.columns.push_back(key);
  for (const ReportRow& r : rows) {
    if (r.extra.size() != rows.front().extra.size()) fail(Errc::Internal, "report rows disagree on columns");
    std::vector<std::string> cells = {std::to_string(r.line_from), std::to_string(r.line_to), r.case_class,
                                      format_number(r.p_flow),     format_number(r.omega_dist),
                                      optional_number(r.measure_closed), optional_number(r.measure_sim),
                                      format_number(r.tau)};
    for (const auto& [key, value] : r.extra) cells.push_back(value);
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::string render_report(std::span<const ReportRow> rows, ReportFormat format) {
  return render_table(report_table(rows), format);
}

void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path, ReportFormat format) {
  write_text(path, render_report(rows, format));
}

std::string render_table(const Table& table, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << csv_escape(table.columns[c]);
    out << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_escape(row[c]);
      out << "\n";
    }
    return out.str();
  }
  out << "[\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << "  {";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out << (c ? ", " : "") << "\"" << json_escape(table.columns[c]) << "\": " << json_value(table.rows[r][c]);
    }
    out << "}" << (r + 1 < table.rows.size() ? ",\n" : "\n");
  }
  out << "]\n";
  return out.str();
}

void write_table(const Table& table, const std::filesystem::path& path, ReportFormat format) {
  write_text(path, render_table(table, format));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) fail(Errc::Io, "failed writing " + path.string());
}

}  // namespace gridstress::gridio
