#pragma once

// Comparison reports: paired exact-vs-empirical values with standard errors,
// z-scores and family-level test statistics, serializable to JSON (round
// trips field-for-field) and CSV (header row, '.' decimal separator, 17
// significant digits).

#include <cstdio>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace coalesce {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct ReportRow {
  double index = 0.0;       // j, i or k the row refers to
  double exact = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double z_score = 0.0;
  bool pass = true;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ReportTest {
  std::string name;  // "ks", "chi_square", ...
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = true;

  friend bool operator==(const ReportTest&, const ReportTest&) = default;
};

struct ComparisonReport {
  int version = 1;
  std::string quantity;
  nlohmann::json config;  // full simulation configuration, re-runnable
  std::vector<ReportRow> rows;
  std::vector<ReportTest> tests;
  std::vector<std::string> notes;
  bool pass = true;
  std::int64_t runtime_ms = 0;

  friend bool operator==(const ComparisonReport&,
                         const ComparisonReport&) = default;
};

inline void to_json(nlohmann::json& j, const ReportRow& r) {
  j = nlohmann::json{{"index", r.index},         {"exact", r.exact},
                     {"empirical", r.empirical}, {"std_error", r.std_error},
                     {"z_score", r.z_score},     {"pass", r.pass}};
}

inline void from_json(const nlohmann::json& j, ReportRow& r) {
  j.at("index").get_to(r.index);
  j.at("exact").get_to(r.exact);
  j.at("empirical").get_to(r.empirical);
  j.at("std_error").get_to(r.std_error);
  j.at("z_score").get_to(r.z_score);
  j.at("pass").get_to(r.pass);
}

inline void to_json(nlohmann::json& j, const ReportTest& t) {
  j = nlohmann::json{{"name", t.name},
                     {"statistic", t.statistic},
                     {"p_value", t.p_value},
                     {"pass", t.pass}};
}

inline void from_json(const nlohmann::json& j, ReportTest& t) {
  j.at("name").get_to(t.name);
  j.at("statistic").get_to(t.statistic);
  j.at("p_value").get_to(t.p_value);
  j.at("pass").get_to(t.pass);
}

inline void to_json(nlohmann::json& j, const ComparisonReport& r) {
  j = nlohmann::json{{"version", r.version}, {"quantity", r.quantity},
                     {"config", r.config},   {"rows", r.rows},
                     {"tests", r.tests},     {"notes", r.notes},
                     {"verdict", r.pass ? "pass" : "fail"},
                     {"runtime_ms", r.runtime_ms}};
}

inline void from_json(const nlohmann::json& j, ComparisonReport& r) {
  j.at("version").get_to(r.version);
  j.at("quantity").get_to(r.quantity);
  r.config = j.at("config");
  j.at("rows").get_to(r.rows);
  j.at("tests").get_to(r.tests);
  j.at("notes").get_to(r.notes);
  r.pass = (j.at("verdict").get<std::string>() == "pass");
  j.at("runtime_ms").get_to(r.runtime_ms);
}

inline void write_report_csv(const ComparisonReport& r, std::ostream& os) {
  os << "index,exact,empirical,std_error,z_score,pass\n";
  for (const auto& row : r.rows) {
    os << format_double(row.index) << ',' << format_double(row.exact) << ','
       << format_double(row.empirical) << ',' << format_double(row.std_error)
       << ',' << format_double(row.z_score) << ','
       << (row.pass ? "pass" : "fail") << '\n';
  }
  for (const auto& t : r.tests) {
    os << "# test " << t.name << " statistic=" << format_double(t.statistic)
       << " p=" << format_double(t.p_value) << ' '
       << (t.pass ? "pass" : "fail") << '\n';
  }
  for (const auto& n : r.notes) os << "# note " << n << '\n';
  os << "# verdict " << (r.pass ? "pass" : "fail") << '\n';
}

// Plain numeric table used by the `exact` and `simulate` commands.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_table_csv(const Table& t, std::ostream& os) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    os << (c ? "," : "") << t.columns[c];
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << (c ? "," : "") << format_double(row[c]);
    }
    os << '\n';
  }
}

inline nlohmann::json table_to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj;
    for (std::size_t c = 0; c < row.size(); ++c) obj[t.columns[c]] = row[c];
    rows.push_back(obj);
  }
  return nlohmann::json{{"columns", t.columns}, {"rows", rows}};
}

}  // namespace coalesce
