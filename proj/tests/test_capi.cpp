#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gridstress/gridstress.h"

extern "C" int gs_c_header_check(void);

namespace {

const char* kSquare = R"({
  "name": "square",
  "base_frequency_hz": 50,
  "buses": [
    {"id": 1, "kind": "active", "p": 1.0, "m": 2.0, "d": 1.0},
    {"id": 2, "kind": "active", "p": -0.4, "m": 2.0, "d": 1.0},
    {"id": 3, "kind": "passive", "p": -0.6, "m": 0, "d": 0},
    {"id": 4, "kind": "passive", "p": 0.0, "m": 0, "d": 0}
  ],
  "lines": [
    {"from": 1, "to": 2, "b": 1.0},
    {"from": 2, "to": 3, "b": 2.0},
    {"from": 3, "to": 4, "b": 1.5},
    {"from": 4, "to": 1, "b": 3.0},
    {"from": 1, "to": 3, "b": 0.5}
  ]
})";

struct CaseHandle {
  gs_case* ptr = nullptr;
  ~CaseHandle() { gs_case_free(ptr); }
};

struct ReportHandle {
  gs_report* ptr = nullptr;
  ~ReportHandle() { gs_report_free(ptr); }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(CApi, HeaderCompilesAsC) { EXPECT_EQ(gs_c_header_check(), 1); }

TEST(CApi, VersionAndNames) {
  EXPECT_STREQ(gs_version(), "0.1.0");
  EXPECT_STREQ(gs_status_name(GS_ERR_BRIDGE_LINE), "bridge_line_error");
  EXPECT_STREQ(gs_status_name(static_cast<gs_status>(99)), "unknown_error");
}

TEST(CApi, LoadAndInspect) {
  CaseHandle c;
  ASSERT_EQ(gs_case_parse(kSquare, &c.ptr), GS_OK);
  int buses = 0, active = 0, lines = 0;
  double f = 0;
  ASSERT_EQ(gs_case_info(c.ptr, &buses, &active, &lines, &f), GS_OK);
  EXPECT_EQ(buses, 4);
  EXPECT_EQ(active, 2);
  EXPECT_EQ(lines, 5);
  EXPECT_EQ(f, 50.0);
  EXPECT_EQ(gs_case_warning_count(c.ptr), 0u);
  double bound = 0;
  ASSERT_EQ(gs_tau_validity_bound(c.ptr, &bound), GS_OK);
  EXPECT_GT(bound, 0.0);
  ASSERT_EQ(gs_case_scale_inertia(c.ptr, 10.0), GS_OK);
  double scaled = 0;
  ASSERT_EQ(gs_tau_validity_bound(c.ptr, &scaled), GS_OK);
  EXPECT_NEAR(scaled, 10.0 * bound, 1e-12 * scaled);
}

TEST(CApi, ErrorsAreReported) {
  gs_case* c = nullptr;
  EXPECT_EQ(gs_case_parse("{", &c), GS_ERR_PARSE);
  EXPECT_EQ(c, nullptr);
  EXPECT_NE(std::string(gs_last_error()).size(), 0u);
  EXPECT_EQ(gs_case_load("/nonexistent.json", &c), GS_ERR_IO);
  EXPECT_EQ(gs_case_parse(kSquare, nullptr), GS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(gs_run(nullptr, GS_ANALYZE, nullptr, nullptr), GS_ERR_INVALID_ARGUMENT);

  CaseHandle h;
  ASSERT_EQ(gs_case_parse(kSquare, &h.ptr), GS_OK);
  gs_options opt;
  gs_options_init(&opt);
  opt.tau = "soon";
  gs_report* r = nullptr;
  EXPECT_EQ(gs_run(h.ptr, GS_ANALYZE, &opt, &r), GS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(r, nullptr);
  gs_options_init(&opt);
  opt.line_from = 1;
  opt.line_to = 4;
  opt.case_class = "GenGen";
  EXPECT_EQ(gs_run(h.ptr, GS_ANALYZE, &opt, &r), GS_ERR_EMPTY_REPORT);
  EXPECT_EQ(gs_simulate_trajectory(h.ptr, 1, 9, 0.02, 1e-3, 1.0, 10, nullptr), GS_ERR_INVALID_ARGUMENT);
}

TEST(CApi, AnalyzeReport) {
  CaseHandle c;
  ASSERT_EQ(gs_case_parse(kSquare, &c.ptr), GS_OK);
  gs_options opt;
  gs_options_init(&opt);
  opt.tau = "1c,2c";
  ReportHandle r;
  ASSERT_EQ(gs_run(c.ptr, GS_ANALYZE, &opt, &r.ptr), GS_OK);
  EXPECT_EQ(gs_report_rows(r.ptr), 5u * 2u * 2u);
  EXPECT_EQ(gs_report_bridges_excluded(r.ptr), 0);
  EXPECT_EQ(gs_report_row_errors(r.ptr), 0);
  EXPECT_EQ(gs_report_exit_code(r.ptr, 0), 0);
  EXPECT_STREQ(gs_report_column(r.ptr, 0), "line_from");
  EXPECT_STREQ(gs_report_cell(r.ptr, 0, 0), "1");
  EXPECT_EQ(gs_report_cell(r.ptr, 1000, 0), nullptr);
  EXPECT_EQ(gs_report_column(r.ptr, 1000), nullptr);

  const auto dir = std::filesystem::temp_directory_path();
  const auto csv = dir / "gs_capi_report.csv";
  ASSERT_EQ(gs_report_write(r.ptr, csv.c_str(), GS_FORMAT_CSV), GS_OK);
  const auto text = slurp(csv);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 21);
  const auto json = dir / "gs_capi_report.json";
  ASSERT_EQ(gs_report_write(r.ptr, json.c_str(), GS_FORMAT_JSON), GS_OK);
  EXPECT_EQ(slurp(json).front(), '[');
  std::filesystem::remove(csv);
  std::filesystem::remove(json);
}

TEST(CApi, SingleLineAndCentrality) {
  CaseHandle c;
  ASSERT_EQ(gs_case_parse(kSquare, &c.ptr), GS_OK);
  gs_options opt;
  gs_options_init(&opt);
  opt.measure = GS_MEASURE_PRIMARY;
  opt.line_from = 3;
  opt.line_to = 2;
  ReportHandle r;
  ASSERT_EQ(gs_run(c.ptr, GS_ANALYZE, &opt, &r.ptr), GS_OK);
  ASSERT_EQ(gs_report_rows(r.ptr), 1u);
  EXPECT_STREQ(gs_report_cell(r.ptr, 0, 2), "GenPassive");

  gs_options_init(&opt);
  ReportHandle cen;
  ASSERT_EQ(gs_run(c.ptr, GS_CENTRALITY, &opt, &cen.ptr), GS_OK);
  EXPECT_EQ(gs_report_rows(cen.ptr), 4u);
  EXPECT_STREQ(gs_report_column(cen.ptr, 2), "avg_resistance");
}

TEST(CApi, Trajectory) {
  CaseHandle c;
  ASSERT_EQ(gs_case_parse(kSquare, &c.ptr), GS_OK);
  const auto path = std::filesystem::temp_directory_path() / "gs_capi_traj.csv";
  ASSERT_EQ(gs_simulate_trajectory(c.ptr, 1, 2, 0.02, 1e-3, 2.0, 100, path.c_str()), GS_OK);
  const auto text = slurp(path);
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,phi_0,phi_1,omega_0,omega_1");
  std::filesystem::remove(path);
}
