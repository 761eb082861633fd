#include <catch_amalgamated.hpp>

#include <sstream>

#include "coalesce/report.hpp"

using namespace coalesce;

namespace {

ComparisonReport sample_report() {
  ComparisonReport rep;
  rep.quantity = "records";
  rep.config = nlohmann::json{{"seed", 42}, {"replicas", 1000}};
  rep.rows.push_back({2.0, 1.0, 1.0, 0.001, 0.0, true});
  rep.rows.push_back({3.0, 1.0 / 6.0, 0.1671, 0.0011, 0.31, true});
  rep.tests.push_back({"chi_square", 3.2, 0.78, true});
  rep.notes.push_back("note");
  rep.pass = true;
  rep.runtime_ms = 17;
  return rep;
}

}  // namespace

TEST_CASE("json round trip reproduces the report field for field") {
  const auto rep = sample_report();
  nlohmann::json j = rep;
  const auto back = j.get<ComparisonReport>();
  REQUIRE(back == rep);
  // serialized doubles round-trip bit-exactly through the shortest
  // representation
  nlohmann::json j2 = back;
  REQUIRE(j.dump() == j2.dump());
}

TEST_CASE("csv emission carries 17 significant digits and the verdict") {
  const auto rep = sample_report();
  std::ostringstream os;
  write_report_csv(rep, os);
  const auto text = os.str();
  REQUIRE(text.find("index,exact,empirical,std_error,z_score,pass\n") == 0);
  REQUIRE(text.find("0.16666666666666666") != std::string::npos);
  REQUIRE(text.find("# verdict pass") != std::string::npos);
}

TEST_CASE("format_double uses '.' and shortest-exact form") {
  REQUIRE(format_double(1.0 / 3.0) == "0.33333333333333331");
  REQUIRE(format_double(2.0) == "2");
  REQUIRE(format_double(0.5) == "0.5");
}

TEST_CASE("tables serialize to csv and json") {
  Table t;
  t.columns = {"j", "p"};
  t.rows = {{2.0, 0.75}, {3.0, 0.25}};
  std::ostringstream os;
  write_table_csv(t, os);
  REQUIRE(os.str() == "j,p\n2,0.75\n3,0.25\n");
  const auto j = table_to_json(t);
  REQUIRE(j["rows"].size() == 2);
  REQUIRE(j["rows"][0]["p"] == 0.75);
}
