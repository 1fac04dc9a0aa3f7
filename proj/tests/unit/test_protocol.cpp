#include <dblind/analysis.hpp>
#include <dblind/error.hpp>
#include <dblind/protocol.hpp>

#include <doctest.h>

#include <cmath>

using namespace dblind;

namespace {

ScenarioConfig scenario(ScenarioKind kind) {
  ScenarioConfig s;
  s.kind = kind;
  return s;
}

bool within(const CorrelationEstimate& e, double expected, double sigmas = 4.0) {
  REQUIRE(e.value);
  // floor keeps exact +-1 estimates (zero stderr) comparable
  return std::abs(*e.value - expected) <= sigmas * std::max(*e.std_error, 1e-9);
}

} // namespace

TEST_CASE("default settings") {
  const auto b = ProtocolConfig::defaults(ProtocolKind::BBM92, 10, 1);
  CHECK(b.alice_settings.size() == 2);
  CHECK(b.bob_settings[1].radians() == doctest::Approx(pi / 4));
  const auto e = ProtocolConfig::defaults(ProtocolKind::Ekert, 10, 1);
  CHECK(e.alice_settings.size() == 3);
  CHECK(e.bob_settings[2].radians() == doctest::Approx(3 * pi / 8));
}

TEST_CASE("configuration errors surface before round 0") {
  auto p = ProtocolConfig::defaults(ProtocolKind::BBM92, 0, 1);
  auto check_param = [](auto&& fn, const std::string& name) {
    try {
      fn();
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(e.parameter() == name);
    }
  };
  check_param([&] { run_session(p, scenario(ScenarioKind::HonestSinglet)); }, "rounds");
  p.rounds = 5;
  p.alice_settings.clear();
  check_param([&] { run_session(p, scenario(ScenarioKind::HonestSinglet)); }, "alice_settings");
  auto e = ProtocolConfig::defaults(ProtocolKind::Ekert, 5, 1);
  auto bad = scenario(ScenarioKind::DoubleBlindEkert);
  bad.alpha = 1.0;
  check_param([&] { run_session(e, bad); }, "alpha");
  check_param([&] { run_session(e, scenario(ScenarioKind::SingleBlinding)); }, "scenario");
}

TEST_CASE("settings are drawn uniformly per side") {
  const auto p = ProtocolConfig::defaults(ProtocolKind::Ekert, 300000, 3);
  const auto rec = run_session(p, scenario(ScenarioKind::HonestSinglet));
  std::array<int, 3> ca{}, cb{};
  for (const auto& r : rec.rounds) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (r.theta_a == p.alice_settings[i]) ++ca[i];
      if (r.theta_b == p.bob_settings[i]) ++cb[i];
    }
  }
  const double n = 300000.0, sd = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(ca[i] - n / 3) < 4 * sd);
    CHECK(std::abs(cb[i] - n / 3) < 4 * sd);
  }
}

TEST_CASE("session determinism and worker independence") {
  const auto p = ProtocolConfig::defaults(ProtocolKind::BBM92, 10, 77);
  const auto a = run_session(p, scenario(ScenarioKind::HonestSinglet));
  const auto b = run_session(p, scenario(ScenarioKind::HonestSinglet));
  CHECK(a.rounds == b.rounds);

  const auto q = ProtocolConfig::defaults(ProtocolKind::Ekert, 100003, 5);
  const auto s = scenario(ScenarioKind::DoubleBlindEkert);
  const auto one = run_session(q, s, 1);
  for (unsigned w : {2u, 3u, 8u, 0u}) {
    const auto many = run_session(q, s, w);
    CHECK(many.rounds == one.rounds);
    CHECK(many.eve == one.eve);
  }
  // a single round regenerates identically in isolation
  const auto r = simulate_round(q, s, 4242);
  CHECK(r.pub == one.rounds[4242]);
}

TEST_CASE("double-blind BBM92 session") {
  const auto p = ProtocolConfig::defaults(ProtocolKind::BBM92, 1'000'000, 8);
  const auto rec = run_session(p, scenario(ScenarioKind::DoubleBlindBBM92), 4);
  std::size_t no_click = 0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto& r = rec.rounds[i];
    REQUIRE(r.outcome_a != Outcome::DoubleClick);
    REQUIRE(r.outcome_b != Outcome::DoubleClick);
    REQUIRE(rec.eve[i].hidden_lambda);
    if (!is_click(r.outcome_a) || !is_click(r.outcome_b)) ++no_click;
  }
  CHECK(no_click <= 3);
  const auto key = sift_bbm92(rec);
  REQUIRE(key.qber);
  CHECK(*key.qber == 0.0);
  CHECK(key.size() > 450000);
  CHECK(eve_knowledge_audit(key) == 1.0);
  const auto audit = audit_predictions(rec);
  REQUIRE(audit);
  CHECK(audit->mismatches == 0);
}

TEST_CASE("qber is zero for every seed under the BBM92 attack") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = ProtocolConfig::defaults(ProtocolKind::BBM92, 1 + seed * 37, seed);
    const auto key = sift_bbm92(run_session(p, scenario(ScenarioKind::DoubleBlindBBM92)));
    if (key.qber) CHECK(*key.qber == 0.0);
  }
}

TEST_CASE("honest sifting") {
  const auto p = ProtocolConfig::defaults(ProtocolKind::BBM92, 1'000'000, 21);
  auto s = scenario(ScenarioKind::HonestSinglet);
  SUBCASE("pure singlet") {
    const auto key = sift_bbm92(run_session(p, s));
    REQUIRE(key.qber);
    CHECK(*key.qber == 0.0);
    CHECK_FALSE(key.eve_bits.has_value());
    CHECK_FALSE(eve_knowledge_audit(key).has_value());
  }
  SUBCASE("depolarized") {
    s.depolarize_prob = 0.1;
    const auto key = sift_bbm92(run_session(p, s));
    REQUIRE(key.qber);
    CHECK(std::abs(*key.qber - 0.05) < 0.002);
    CHECK(key.alice_bits.size() == key.bob_bits.size());
  }
  CHECK_FALSE(audit_predictions(run_session(p, s)).has_value());
}

TEST_CASE("empty sift set has undefined qber") {
  auto p = ProtocolConfig::defaults(ProtocolKind::BBM92, 100, 2);
  p.alice_settings = {PolarizationAngle(0.0)};
  p.bob_settings = {PolarizationAngle(pi / 4)};
  const auto key = sift_bbm92(run_session(p, scenario(ScenarioKind::DoubleBlindBBM92)));
  CHECK(key.size() == 0);
  CHECK_FALSE(key.qber.has_value());
  CHECK_FALSE(eve_knowledge_audit(key).has_value());
}

TEST_CASE("sifting sees only the public column") {
  std::vector<PublicRound> rounds(3);
  rounds[0] = {0, PolarizationAngle(0.0), PolarizationAngle(0.0), Outcome::Plus, Outcome::Minus, Side::None};
  rounds[1] = {1, PolarizationAngle(0.0), PolarizationAngle(pi / 4), Outcome::Plus, Outcome::Plus, Side::None};
  rounds[2] = {2, PolarizationAngle(pi / 4), PolarizationAngle(pi / 4), Outcome::Minus, Outcome::Minus, Side::None};
  const auto key = sift_bbm92(rounds);
  CHECK(key.size() == 2);
  CHECK(key.alice_bits == std::vector<std::uint8_t>{0, 1});
  CHECK(key.bob_bits == std::vector<std::uint8_t>{0, 0});
  CHECK(key.errors == 1);
  CHECK(*key.qber == 0.5);
}

TEST_CASE("chsh_value") {
  const double h = std::sqrt(2.0) / 2;
  CHECK(chsh_value(-h, h, -h, -h) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(chsh_value(-1, 1, -1, -1) == 4.0);
  RoundRng rng(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double e1 = 2 * rng.uniform() - 1, e2 = 2 * rng.uniform() - 1;
    const double e3 = 2 * rng.uniform() - 1, e4 = 2 * rng.uniform() - 1;
    // a <-> a' together with relabeling b' -> -b'
    CHECK(chsh_value(e1, e2, e3, e4) == doctest::Approx(chsh_value(e3, -e4, e1, -e2)));
    // b <-> b' together with relabeling a' -> -a'
    CHECK(chsh_value(e1, e2, e3, e4) == doctest::Approx(chsh_value(e2, e1, -e4, -e3)));
  }
}

TEST_CASE("CHSH estimates") {
  const auto q = ChshQuadruple::defaults();
  SUBCASE("honest singlet at default Ekert angles") {
    const auto p = ProtocolConfig::defaults(ProtocolKind::Ekert, 1'000'000, 31);
    const auto rec = run_session(p, scenario(ScenarioKind::HonestSinglet), 4);
    const auto res = chsh_estimate(rec.rounds, q);
    REQUIRE(res.value);
    CHECK(std::abs(*res.value - 2 * std::sqrt(2.0)) < 0.01 + 4 * *res.std_error);
    const auto diag = estimate_correlation(rec.rounds, PolarizationAngle(pi / 4), PolarizationAngle(pi / 4));
    CHECK(within(diag, -1.0));
  }
  SUBCASE("Ekert attack at single-pair sessions") {
    auto p = ProtocolConfig::defaults(ProtocolKind::Ekert, 1'000'000, 32);
    p.alice_settings = {PolarizationAngle(0.0)};
    p.bob_settings = {PolarizationAngle(pi / 8)};
    auto rec = run_session(p, scenario(ScenarioKind::DoubleBlindEkert), 4);
    auto e = estimate_correlation(rec.rounds, p.alice_settings[0], p.bob_settings[0]);
    CHECK(std::abs(*e.value + 0.70711) < 0.004);
    p.bob_settings = {PolarizationAngle(3 * pi / 8)};
    rec = run_session(p, scenario(ScenarioKind::DoubleBlindEkert), 4);
    e = estimate_correlation(rec.rounds, p.alice_settings[0], p.bob_settings[0]);
    CHECK(std::abs(*e.value - 0.70711) < 0.004);
  }
  SUBCASE("honest diagonal pair") {
    auto p = ProtocolConfig::defaults(ProtocolKind::BBM92, 1'000'000, 33);
    p.alice_settings = {PolarizationAngle(0.0)};
    p.bob_settings = {PolarizationAngle(pi / 4)};
    const auto rec = run_session(p, scenario(ScenarioKind::HonestSinglet), 4);
    const auto e = estimate_correlation(rec.rounds, p.alice_settings[0], p.bob_settings[0]);
    CHECK(std::abs(*e.value) < 0.004);
  }
  SUBCASE("missing pair is undefined") {
    const auto p = ProtocolConfig::defaults(ProtocolKind::BBM92, 1000, 34);
    const auto rec = run_session(p, scenario(ScenarioKind::DoubleBlindEkert));
    const auto res = chsh_estimate(rec.rounds, q);
    CHECK_FALSE(res.pairs[0].value.has_value());
    CHECK_FALSE(res.value.has_value());
  }
}

TEST_CASE("correlations depend only on the setting difference") {
  const auto p = ProtocolConfig::defaults(ProtocolKind::Ekert, 1'000'000, 41);
  const auto rec = run_session(p, scenario(ScenarioKind::DoubleBlindEkert), 4);
  // pi/8 is realized by (0, pi/8), (pi/8, pi/4) and (pi/4, 3pi/8)
  const std::array<std::pair<double, double>, 3> pairs{{{0, pi / 8}, {pi / 8, pi / 4}, {pi / 4, 3 * pi / 8}}};
  const auto pooled = estimate_correlation_at_difference(rec.rounds, pi / 8);
  for (auto [a, b] : pairs) {
    const auto e = estimate_correlation(rec.rounds, PolarizationAngle(a), PolarizationAngle(b));
    const double se = std::hypot(*e.std_error, *pooled.std_error);
    CHECK(std::abs(*e.value - *pooled.value) < 4 * se);
    CHECK(within(e, oracle_corr_ekert(pi / 8, optimal_alpha)));
  }
}

TEST_CASE("Ekert attack session invariants") {
  const auto p = ProtocolConfig::defaults(ProtocolKind::Ekert, 1'000'000, 51);
  const auto rec = run_session(p, scenario(ScenarioKind::DoubleBlindEkert), 4);
  std::size_t strong_misses = 0, both_missing = 0;
  for (const auto& r : rec.rounds) {
    const auto strong = r.weak_side == Side::A ? r.outcome_b : r.outcome_a;
    if (!is_click(strong)) ++strong_misses;
    if (!is_click(r.outcome_a) && !is_click(r.outcome_b)) ++both_missing;
  }
  CHECK(strong_misses <= 3);
  CHECK(both_missing <= 3);
  const auto key = sift_bbm92(rec);
  REQUIRE(key.qber);
  CHECK(*key.qber == 0.0);
  CHECK(eve_knowledge_audit(key) == 1.0);
}

TEST_CASE("marginal fairness conditioned on a click") {
  for (auto kind : {ScenarioKind::HonestSinglet, ScenarioKind::SingleBlinding,
                    ScenarioKind::DoubleBlindBBM92, ScenarioKind::DoubleBlindEkert}) {
    const auto proto = kind == ScenarioKind::SingleBlinding ? ProtocolKind::BBM92 : ProtocolKind::Ekert;
    const auto p = ProtocolConfig::defaults(proto, 400000, 61);
    const auto rec = run_session(p, scenario(kind), 4);
    for (int side = 0; side < 2; ++side) {
      std::size_t plus = 0, clicks = 0;
      for (const auto& r : rec.rounds) {
        const auto o = side == 0 ? r.outcome_a : r.outcome_b;
        if (!is_click(o)) continue;
        ++clicks;
        if (o == Outcome::Plus) ++plus;
      }
      const double n = static_cast<double>(clicks);
      CHECK(std::abs(plus / n - 0.5) < 4 * 0.5 / std::sqrt(n));
    }
  }
}
