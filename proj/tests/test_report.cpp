#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kernord/report.hpp"

using namespace kernord;

namespace {

Report sample_report() {
  Report r;
  r.command = "check";
  r.inputs = {{"family", "poisson"}, {"nu1", "1"}, {"nu2", "2"}, {"orders", "lr,st"}};
  OrderVerdict a;
  a.order = Order::lr;
  a.direction = Direction::up;
  a.status = Status::fails;
  a.method = Method::kernel_criterion;
  a.witness = Witness{{0.0, 1.0}, 3.25, -0.1234567890123456789};
  a.claim = "P(nu) <=lr P(nu') for nu <= nu' in [3, 5]";
  a.certification = "scanned";
  a.note = "first offending pair";
  OrderVerdict b;
  b.order = Order::st;
  b.status = Status::holds;
  b.method = Method::oracle;
  b.witness = Witness{{std::numeric_limits<double>::infinity()}, std::nullopt, -std::numeric_limits<double>::infinity()};
  b.certification = "grid-certified";
  b.tolerances.shape = 1e-7;
  r.verdicts = {a, b};
  r.rows = Json::array({Json{{"id", "x"}, {"value", 0.1}, {"pass", true}}});
  r.tolerances.tail = 3e-9;
  r.runtime_ms = 17;
  return r;
}

}  // namespace

TEST_CASE("reports round-trip losslessly through JSON") {
  const Report r = sample_report();
  const std::string text = report_to_json(r);
  const Report back = report_from_json(text);
  CHECK(back == r);
  CHECK(report_to_json(back) == text);
}

TEST_CASE("JSON output has a fixed field order and 17-digit floats") {
  const std::string text = report_to_json(sample_report());
  // Top-level keys sit at two-space indentation.
  const auto pos = [&](const char* key) { return text.find(std::string("\n  \"") + key + "\""); };
  CHECK(pos("runtime_ms") != std::string::npos);
  CHECK(pos("command") < pos("inputs"));
  CHECK(pos("inputs") < pos("verdicts"));
  CHECK(pos("verdicts") < pos("rows"));
  CHECK(pos("rows") < pos("tolerances"));
  CHECK(pos("tolerances") < pos("runtime_ms"));
  CHECK(text.find("-0.12345678901234568") != std::string::npos);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("\"inf\"") != std::string::npos);
  CHECK(text.find("\"-inf\"") != std::string::npos);
  CHECK(text.back() == '\n');
  CHECK(report_to_json(sample_report()) == text);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::isinf(json_double(Json("inf"))));
  CHECK(std::isnan(json_double(Json("nan"))));
  CHECK(json_double(Json(2.5)) == 2.5);
  CHECK_THROWS(json_double(Json("two")));
}

TEST_CASE("malformed report JSON is rejected") {
  CHECK_THROWS_AS(report_from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(report_from_json("{\"command\": 3}"), std::invalid_argument);
  CHECK_THROWS_AS(report_from_json("[]"), std::invalid_argument);
}

TEST_CASE("verdicts and tolerances round-trip individually") {
  const Report r = sample_report();
  for (const auto& v : r.verdicts) {
    CHECK(verdict_from_json(to_json(v)) == v);
  }
  CHECK(tolerances_from_json(to_json(r.tolerances)) == r.tolerances);
}

TEST_CASE("text and CSV renderings mention every verdict") {
  const Report r = sample_report();
  const std::string text = report_to_text(r);
  CHECK(text.find("lr") != std::string::npos);
  CHECK(text.find("fails") != std::string::npos);
  CHECK(text.find("holds") != std::string::npos);
  const std::string csv = report_to_csv(r);
  CHECK(csv.find("id,value,pass") == 0);
  Report no_rows = r;
  no_rows.rows = Json::array();
  const std::string vcsv = report_to_csv(no_rows);
  CHECK(vcsv.find("order") != std::string::npos);
  CHECK(vcsv.find("fails") != std::string::npos);
}
