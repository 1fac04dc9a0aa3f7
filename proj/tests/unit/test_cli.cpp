#include "cli.hpp"
#include "report.hpp"

#include <dblind/error.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

using namespace dblind;
using dblind::cli::Json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("angle expressions") {
  CHECK(cli::parse_angle("0.25", "x") == 0.25);
  CHECK(cli::parse_angle("pi", "x") == doctest::Approx(pi));
  CHECK(cli::parse_angle("pi/8", "x") == doctest::Approx(pi / 8));
  CHECK(cli::parse_angle("3pi/8", "x") == doctest::Approx(3 * pi / 8));
  CHECK(cli::parse_angle("3*pi/8", "x") == doctest::Approx(3 * pi / 8));
  CHECK(cli::parse_angle("-pi/4", "x") == doctest::Approx(-pi / 4));
  CHECK_THROWS_AS(cli::parse_angle("pie", "x"), DomainError);
  CHECK_THROWS_AS(cli::parse_angle("pi/0", "x"), DomainError);
  CHECK_THROWS_AS(cli::parse_angle("abc", "x"), DomainError);
  CHECK(cli::format_angle(pi / 8) == "0.392699082");
}

TEST_CASE("run: BBM92 attack summary") {
  const auto r = invoke({"run", "--scenario", "double-bbm92", "--protocol", "bbm92", "--rounds",
                         "1000000", "--seed", "42", "--workers", "4"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["qber"].get<double>() == 0.0);
  CHECK(j["efficiency"]["eta"].get<double>() > 1.0 - 3e-6);
  CHECK(j["chsh"].is_null());
  const std::vector<std::string> keys{"scenario", "protocol", "rounds", "seed", "parameters", "qber",
                                      "key", "chsh", "correlations", "efficiency", "monitors",
                                      "eve", "oracle"};
  std::vector<std::string> got;
  for (const auto& [k, v] : j.items()) got.push_back(k);
  CHECK(got == keys);
  CHECK(j["monitors"]["fair_sampling"]["verdict"] == "PASS");
  CHECK(j["eve"]["mismatches"] == 0);
}

TEST_CASE("run: Ekert attack summary") {
  const auto r = invoke({"run", "--scenario", "double-ekert", "--protocol", "ekert", "--rounds",
                         "1000000", "--seed", "42", "--workers", "4"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(std::abs(j["chsh"]["value"].get<double>() - 2 * std::sqrt(2.0)) < 0.01);
  CHECK(std::abs(j["efficiency"]["eta"].get<double>() - 0.854) < 0.002);
  CHECK(j["chsh"]["pairs"].size() == 4);
  CHECK(j["oracle"]["chsh"].get<double>() == doctest::Approx(2 * std::sqrt(2.0)));
}

TEST_CASE("run: validation and usage errors") {
  auto r = invoke({"run", "--rounds", "0"});
  CHECK(r.code == 1);
  CHECK(r.err.find("rounds") != std::string::npos);
  r = invoke({"run", "--scenario", "double-ekert", "--protocol", "ekert", "--alpha", "1.0", "--rounds", "10"});
  CHECK(r.code == 1);
  CHECK(r.err.find("alpha") != std::string::npos);
  r = invoke({"run", "--depolarize", "2", "--scenario", "honest", "--rounds", "10"});
  CHECK(r.code == 1);
  CHECK(r.err.find("depolarize") != std::string::npos);
  CHECK(invoke({"run", "--scenario", "nope"}).code == 2);
  CHECK(invoke({"run", "--bogus"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"run", "--help"}).code == 0);
}

TEST_CASE("run: golden summary is byte-stable across runs and worker counts") {
  const std::vector<std::string> base{"run", "--scenario", "double-ekert", "--protocol", "ekert",
                                      "--rounds", "20000", "--seed", "7"};
  auto with_workers = [&](const char* w) {
    auto a = base;
    a.insert(a.end(), {"--workers", w});
    return invoke(a);
  };
  const auto a = with_workers("1");
  const auto b = with_workers("1");
  const auto c = with_workers("5");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
}

TEST_CASE("records dump: public by default, eve view on request") {
  const auto path = std::string("test_cli_records.csv");
  auto r = invoke({"run", "--scenario", "double-bbm92", "--rounds", "5", "--records", path, "--out",
                   "summary.json"});
  REQUIRE(r.code == 0);
  auto read = [](const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  auto text = read(path);
  CHECK(text.rfind("round,theta_a,theta_b,outcome_a,outcome_b,weak_side\n", 0) == 0);
  CHECK(text.find("lambda") == std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);

  r = invoke({"run", "--scenario", "double-bbm92", "--rounds", "5", "--records", path, "--eve-view",
              "--out", "summary.json"});
  REQUIRE(r.code == 0);
  text = read(path);
  CHECK(text.rfind("round,theta_a,theta_b,outcome_a,outcome_b,weak_side,lambda,eve_pred_a,eve_pred_b\n", 0) == 0);

  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 9);
    CHECK(cols[3] == cols[7]);
    CHECK(cols[4] == cols[8]);
  }
}

TEST_CASE("run: flat csv summary") {
  const auto r = invoke({"run", "--scenario", "honest", "--rounds", "1000", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("key,value\n", 0) == 0);
  CHECK(r.out.find("\nscenario,honest\n") != std::string::npos);
}

TEST_CASE("sweep: delta grid") {
  const auto r = invoke({"sweep", "--axis", "delta", "--scenario", "double-bbm92", "--start", "0",
                         "--stop", "pi/2", "--step", "pi/36", "--rounds", "100000", "--workers", "4"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "delta,estimate,stderr,coincidences,oracle");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<double> v;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) v.push_back(std::stod(c));
    CHECK(v[4] == doctest::Approx(-1 + 4 / pi * std::abs(reduce_difference(v[0]))));
    CHECK(std::abs(v[1] - v[4]) <= 4 * std::max(v[2], 1e-9));
  }
  CHECK(rows == 19);
}

TEST_CASE("sweep: alpha grid") {
  const auto r = invoke({"sweep", "--axis", "alpha", "--scenario", "double-ekert", "--protocol",
                         "ekert", "--start", "0.1", "--stop", "0.7", "--step", "0.1", "--rounds",
                         "50000", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto rows = Json::parse(r.out);
  CHECK(rows.size() == 7);
  for (const auto& row : rows) {
    const double a = row["alpha"].get<double>();
    CHECK(row["eta_oracle"].get<double>() == doctest::Approx((1 + 4 * a / pi) / 2));
    CHECK(std::abs(row["eta"].get<double>() - row["eta_oracle"].get<double>()) <=
          4 * row["eta_stderr"].get<double>());
  }
}

TEST_CASE("sweep: invalid grids") {
  CHECK(invoke({"sweep", "--start", "1", "--stop", "0.5"}).code == 1);
  CHECK(invoke({"sweep", "--step", "0"}).code == 1);
  CHECK(invoke({"sweep", "--axis", "alpha", "--scenario", "double-bbm92"}).code == 1);
  CHECK(invoke({"sweep", "--axis", "theta"}).code == 2);
}

TEST_CASE("bounds table") {
  const auto r = invoke({"bounds", "--eta", "0.853", "--eta", "0.5", "--eta21", "0.9", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto rows = Json::parse(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["bound"].get<double>() == doctest::Approx(2.0 / (2 * 0.853 - 1)));
  CHECK(rows[0]["verdict"] == "attack feasible at S = 2√2");
  CHECK(rows[1]["bound"].is_null());
  CHECK(rows[1]["verdict"] == "out-of-domain");
  CHECK(rows[2]["bound"].get<double>() == doctest::Approx(4 / 0.9 - 2));
  CHECK(rows[2]["verdict"] == "violation certifiable");

  const auto t = invoke({"bounds", "--eta", "1"});
  CHECK(t.out == "kind,value,bound,verdict\neta,1.0,2.0,violation certifiable\n");
  CHECK(invoke({"bounds"}).code == 1);
}
