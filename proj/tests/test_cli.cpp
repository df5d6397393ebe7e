#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kernord/cli.hpp"
#include "kernord/report.hpp"

using namespace kernord;
using kernord::cli::run;

namespace {

Report parse(const cli::CliResult& r) { return report_from_json(r.out); }

bool all_hold(const Report& r) {
  for (const auto& v : r.verdicts) {
    if (!v.holds()) {
      return false;
    }
  }
  return !r.verdicts.empty();
}

std::string golden_dir() { return KERNORD_GOLDEN_DIR; }

}  // namespace

TEST_CASE("check: Poisson increases in lr, hr and st") {
  const auto res = run({"check", "--family", "poisson", "--nu1", "1", "--nu2", "2", "--orders", "lr,hr,st"});
  CHECK(res.exit_code == 0);
  const Report r = parse(res);
  CHECK(r.command == "check");
  CHECK(all_hold(r));
  CHECK(r.runtime_ms == 0);
  // Criterion and oracle verdict for each order.
  CHECK(r.verdicts.size() == 6);
}

TEST_CASE("check: zero-inflated Poisson fails lr with a witness") {
  const auto res = run({"check", "--family", "zero-inflated-poisson:pi=0.5", "--nu1", "3", "--nu2", "5", "--orders", "lr"});
  CHECK(res.exit_code == 1);
  const Report r = parse(res);
  REQUIRE(!r.verdicts.empty());
  for (const auto& v : r.verdicts) {
    CHECK(v.fails());
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->points.front() <= 1.0);
  }
}

TEST_CASE("check: equal parameters are reflexive") {
  const auto res = run({"check", "--family", "poisson", "--nu1", "2", "--nu2", "2"});
  CHECK(res.exit_code == 0);
  const Report r = parse(res);
  CHECK(r.verdicts.size() == 4);
  CHECK(all_hold(r));
}

TEST_CASE("check: explicit direction and endpoint methods") {
  const auto down = run({"check", "--family", "geometric", "--nu1", "0.2", "--nu2", "0.4", "--orders", "lr",
                         "--direction", "down"});
  CHECK(down.exit_code == 0);
  const auto up = run({"check", "--family", "geometric", "--nu1", "0.2", "--nu2", "0.4", "--orders", "lr",
                       "--direction", "up"});
  CHECK(up.exit_code == 1);
  const auto uni = run({"check", "--family", "half-student-in-df", "--nu1", "2", "--nu2", "5", "--orders", "hr",
                        "--method", "unimodal-endpoint", "--mode", "1"});
  CHECK(uni.exit_code == 0);
}

TEST_CASE("pairwise: binomial below Poisson in lr, lc and st") {
  const auto res = run({"pairwise", "--p", "binomial:n=10,p=0.05", "--q", "poisson:lambda=0.6", "--orders", "lr,lc,st"});
  CHECK(res.exit_code == 0);
  CHECK(all_hold(parse(res)));
}

TEST_CASE("compound: geometric counts decrease in lr") {
  const auto res = run({"compound", "--counting", "geometric", "--summand", "geometric:p=0.5", "--nu1", "0.3",
                        "--nu2", "0.6"});
  CHECK(res.exit_code == 0);
  const Report r = parse(res);
  REQUIRE(!r.verdicts.empty());
  for (const auto& v : r.verdicts) {
    CHECK(v.holds());
    CHECK(v.direction == Direction::down);
  }
}

TEST_CASE("path: negative binomial along a straight line") {
  const auto res = run({"path", "--spec", "nb-linear:r1=1,r2=4,q1=0.3,q2=0.5", "--orders", "lr,st"});
  CHECK(res.exit_code == 0);
  CHECK(all_hold(parse(res)));
}

TEST_CASE("tables match their golden files") {
  for (const char* id : {"table1", "table2", "katz"}) {
    CAPTURE(id);
    const auto res = run({"table", "--id", id, "--golden-dir", golden_dir()});
    CHECK(res.exit_code == 0);
    CHECK(res.err.empty());
    const Report r = parse(res);
    CHECK(!r.rows.empty());
    for (const auto& row : r.rows) {
      CHECK(row.at("pass").get<bool>());
    }
  }
  const Report t2 = parse(run({"table", "--id", "table2", "--golden-dir", golden_dir()}));
  std::string signs;
  for (const auto& row : t2.rows) {
    signs += row.at("observed_slope_sign").get<std::string>();
  }
  CHECK(signs == "+--++");
}

TEST_CASE("a tampered golden file is reported as a mismatch") {
  const auto dir = std::filesystem::temp_directory_path() / "kernord_golden_test";
  std::filesystem::create_directories(dir);
  const auto written = run({"table", "--id", "katz", "--write-golden", (dir / "katz.json").string()});
  REQUIRE(written.exit_code == 0);
  CHECK(run({"table", "--id", "katz", "--golden-dir", dir.string()}).exit_code == 0);
  {
    std::ifstream in(dir / "katz.json");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    text.replace(text.find("\"agree\": 25"), 11, "\"agree\": 24");
    std::ofstream(dir / "katz.json") << text;
  }
  const auto res = run({"table", "--id", "katz", "--golden-dir", dir.string()});
  CHECK(res.exit_code == 1);
  CHECK(res.err.find("golden mismatch") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical invocations give byte-identical output") {
  const std::vector<std::string> args = {"check", "--family", "negbinomial-in-shape:p=0.3", "--nu1", "1", "--nu2", "3"};
  CHECK(run(args).out == run(args).out);
  const std::vector<std::string> table = {"table", "--id", "katz", "--golden-dir", golden_dir()};
  CHECK(run(table).out == run(table).out);
}

TEST_CASE("output formats and flags") {
  const auto csv = run({"table", "--id", "table2", "--golden-dir", golden_dir(), "--format", "csv"});
  CHECK(csv.exit_code == 0);
  CHECK(csv.out.find("law,") == 0);
  const auto text = run({"check", "--family", "poisson", "--nu1", "1", "--nu2", "2", "--format", "text"});
  CHECK(text.exit_code == 0);
  CHECK(text.out.find("holds") != std::string::npos);
  const Report r = parse(run({"check", "--family", "poisson", "--nu1", "1", "--nu2", "2", "--tol-shape", "1e-7",
                              "--tol-tail", "1e-6", "--tail-eps", "1e-10", "--nu-grid", "5"}));
  CHECK(r.tolerances.shape == 1e-7);
  CHECK(r.tolerances.tail == 1e-6);
  CHECK(r.tolerances.eps_tail == 1e-10);
  CHECK(run({"check", "--family", "poisson", "--nu1", "1", "--nu2", "2", "--timing"}).exit_code == 0);
}

TEST_CASE("malformed input exits 2 and names the offending token") {
  const auto unknown_key = run({"check", "--family", "poisson:foo=1", "--nu1", "1", "--nu2", "2"});
  CHECK(unknown_key.exit_code == 2);
  CHECK(unknown_key.err.find("foo=1") != std::string::npos);
  const auto bad_value = run({"pairwise", "--p", "binomial:n=10,p=zero", "--q", "poisson:lambda=1"});
  CHECK(bad_value.exit_code == 2);
  CHECK(bad_value.err.find("p=zero") != std::string::npos);
  const auto bad_family = run({"check", "--family", "poison", "--nu1", "1", "--nu2", "2"});
  CHECK(bad_family.exit_code == 2);
  CHECK(bad_family.err.find("poison") != std::string::npos);
  const auto bad_order = run({"check", "--family", "poisson", "--nu1", "1", "--nu2", "2", "--orders", "lr,xx"});
  CHECK(bad_order.exit_code == 2);
  CHECK(bad_order.err.find("xx") != std::string::npos);
  CHECK(run({"check", "--family", "poisson", "--nu1", "-1", "--nu2", "2"}).exit_code == 2);
  CHECK(run({"table", "--id", "table9"}).exit_code == 2);
  CHECK(run({"frobnicate"}).exit_code == 2);
  CHECK(run({}).exit_code == 2);
  CHECK(run({"compound", "--counting", "poisson", "--summand", "geometric:p=1.5", "--nu1", "1", "--nu2", "2"}).exit_code ==
        2);
}
