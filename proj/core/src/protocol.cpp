#include <dblind/protocol.hpp>

#include <dblind/error.hpp>

#include <algorithm>
#include <cmath>
#include <thread>

namespace dblind {

std::string_view to_string(ProtocolKind p) noexcept {
  return p == ProtocolKind::BBM92 ? "bbm92" : "ekert";
}

ProtocolConfig ProtocolConfig::defaults(ProtocolKind protocol, std::uint64_t rounds,
                                        std::uint64_t seed) {
  ProtocolConfig cfg;
  cfg.protocol = protocol;
  cfg.rounds = rounds;
  cfg.seed = seed;
  if (protocol == ProtocolKind::BBM92) {
    cfg.alice_settings = {PolarizationAngle(0.0), PolarizationAngle(pi / 4)};
    cfg.bob_settings = cfg.alice_settings;
  } else {
    cfg.alice_settings = {PolarizationAngle(0.0), PolarizationAngle(pi / 8), PolarizationAngle(pi / 4)};
    cfg.bob_settings = {PolarizationAngle(pi / 8), PolarizationAngle(pi / 4),
                        PolarizationAngle(3 * pi / 8)};
  }
  return cfg;
}

void validate(const ProtocolConfig& protocol, const ScenarioConfig& scenario) {
  if (protocol.rounds == 0) throw DomainError("rounds", "must be at least 1");
  if (protocol.alice_settings.empty()) throw DomainError("alice_settings", "must not be empty");
  if (protocol.bob_settings.empty()) throw DomainError("bob_settings", "must not be empty");
  validate(scenario);
  if (scenario.kind == ScenarioKind::SingleBlinding && protocol.protocol != ProtocolKind::BBM92)
    throw DomainError("scenario", "single blinding is only modelled against BBM92");
}

RoundRecord simulate_round(const ProtocolConfig& protocol, const ScenarioConfig& scenario,
                           std::uint64_t index) {
  RoundRng rng(protocol.seed, index);
  RoundRecord rec;
  rec.pub.index = index;
  rec.pub.theta_a = protocol.alice_settings[rng.index(protocol.alice_settings.size())];
  rec.pub.theta_b = protocol.bob_settings[rng.index(protocol.bob_settings.size())];
  const DetectorStation alice(rec.pub.theta_a);
  const DetectorStation bob(rec.pub.theta_b);

  switch (scenario.kind) {
  case ScenarioKind::HonestSinglet: {
    const auto [a, b] =
        emit_honest_singlet(rng, rec.pub.theta_a, rec.pub.theta_b, scenario.depolarize_prob);
    rec.pub.outcome_a = a;
    rec.pub.outcome_b = b;
    break;
  }
  case ScenarioKind::SingleBlinding: {
    const std::span<const PolarizationAngle> bases =
        scenario.eve_bases.empty() ? std::span(protocol.bob_settings) : std::span(scenario.eve_bases);
    const auto sb = emit_single_blinding(rng, bases, rec.pub.theta_a, scenario);
    rec.pub.outcome_a = sb.alice;
    rec.pub.outcome_b = measure_pulse(sb.forwarded, bob);
    rec.eve.predicted_b = sb.eve;
    break;
  }
  case ScenarioKind::DoubleBlindBBM92:
  case ScenarioKind::DoubleBlindEkert: {
    const auto emitted = scenario.kind == ScenarioKind::DoubleBlindBBM92
                             ? emit_double_blind_bbm92(rng, scenario)
                             : emit_double_blind_ekert(rng, scenario, index);
    rec.pub.outcome_a = measure_pulse(*emitted.pulse_a, alice);
    rec.pub.outcome_b = measure_pulse(*emitted.pulse_b, bob);
    rec.pub.weak_side = emitted.weak_side;
    rec.eve.hidden_lambda = emitted.hidden_lambda;
    if (auto pred = eve_predict(*emitted.hidden_lambda, rec.pub.theta_a, rec.pub.theta_b,
                                emitted.weak_side, scenario)) {
      rec.eve.predicted_a = pred->first;
      rec.eve.predicted_b = pred->second;
    }
    break;
  }
  }
  return rec;
}

SessionRecords run_session(const ProtocolConfig& protocol, const ScenarioConfig& scenario,
                           unsigned workers) {
  validate(protocol, scenario);
  const auto n = static_cast<std::size_t>(protocol.rounds);
  SessionRecords out;
  out.scenario = scenario.kind;
  out.protocol = protocol.protocol;
  out.rounds.resize(n);
  out.eve.resize(n);

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto rec = simulate_round(protocol, scenario, i);
      out.rounds[i] = rec.pub;
      out.eve[i] = std::move(rec.eve);
    }
  };

  if (workers <= 1) {
    fill(0, n);
    return out;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t begin = 0; begin < n; begin += chunk)
      pool.emplace_back(fill, begin, std::min(n, begin + chunk));
  }
  return out;
}

namespace {

std::uint8_t key_bit(Outcome o) { return o == Outcome::Minus ? 1 : 0; }

} // namespace

SiftedKey sift_bbm92(std::span<const PublicRound> rounds) {
  SiftedKey key;
  for (const auto& r : rounds) {
    if (!same_orientation(r.theta_a, r.theta_b)) continue;
    if (!is_click(r.outcome_a) || !is_click(r.outcome_b)) continue;
    const auto a = key_bit(r.outcome_a);
    const auto b = static_cast<std::uint8_t>(1 - key_bit(r.outcome_b));
    key.alice_bits.push_back(a);
    key.bob_bits.push_back(b);
    key.basis.push_back(r.theta_a);
    key.round_index.push_back(r.index);
    if (a != b) ++key.errors;
  }
  if (!key.alice_bits.empty())
    key.qber = static_cast<double>(key.errors) / static_cast<double>(key.alice_bits.size());
  return key;
}

SiftedKey sift_bbm92(const SessionRecords& records) {
  SiftedKey key = sift_bbm92(std::span<const PublicRound>(records.rounds));
  if (records.scenario == ScenarioKind::HonestSinglet) return key;
  std::vector<std::uint8_t> eve;
  eve.reserve(key.size());
  for (auto idx : key.round_index) {
    const auto& pred = records.eve.at(static_cast<std::size_t>(idx)).predicted_b;
    if (!pred) return key;
    eve.push_back(static_cast<std::uint8_t>(1 - key_bit(*pred)));
  }
  key.eve_bits = std::move(eve);
  return key;
}

std::optional<double> eve_knowledge_audit(const SiftedKey& key) {
  if (!key.eve_bits || key.size() == 0) return std::nullopt;
  std::size_t matches = 0;
  for (std::size_t i = 0; i < key.size(); ++i)
    if ((*key.eve_bits)[i] == key.bob_bits[i]) ++matches;
  return static_cast<double>(matches) / static_cast<double>(key.size());
}

std::optional<PredictionAudit> audit_predictions(const SessionRecords& records) {
  PredictionAudit audit;
  switch (records.scenario) {
  case ScenarioKind::HonestSinglet:
    return std::nullopt;
  case ScenarioKind::SingleBlinding:
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records.rounds[i];
      if (!is_click(r.outcome_b)) continue;
      ++audit.rounds_checked;
      if (records.eve[i].predicted_b != r.outcome_b) ++audit.mismatches;
    }
    return audit;
  case ScenarioKind::DoubleBlindBBM92:
  case ScenarioKind::DoubleBlindEkert:
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records.rounds[i];
      const auto& e = records.eve[i];
      ++audit.rounds_checked;
      if (e.predicted_a != r.outcome_a || e.predicted_b != r.outcome_b) ++audit.mismatches;
    }
    return audit;
  }
  return std::nullopt;
}

void CorrelationEstimate::add(Outcome a, Outcome b) noexcept {
  if (!is_click(a) || !is_click(b)) return;
  const bool pa = a == Outcome::Plus;
  const bool pb = b == Outcome::Plus;
  if (pa && pb) ++n_pp;
  else if (!pa && !pb) ++n_mm;
  else if (pa) ++n_pm;
  else ++n_mp;
}

void CorrelationEstimate::finalize() noexcept {
  const auto n = coincidences();
  if (n == 0) {
    value.reset();
    std_error.reset();
    return;
  }
  const double e = (static_cast<double>(n_pp + n_mm) - static_cast<double>(n_pm + n_mp)) /
                   static_cast<double>(n);
  value = e;
  std_error = std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(n));
}

CorrelationEstimate estimate_correlation(std::span<const PublicRound> rounds, PolarizationAngle a,
                                         PolarizationAngle b) {
  CorrelationEstimate est;
  for (const auto& r : rounds)
    if (same_orientation(r.theta_a, a) && same_orientation(r.theta_b, b))
      est.add(r.outcome_a, r.outcome_b);
  est.finalize();
  return est;
}

CorrelationEstimate estimate_correlation_at_difference(std::span<const PublicRound> rounds,
                                                       double delta) {
  CorrelationEstimate est;
  for (const auto& r : rounds)
    if (std::abs(reduce_difference(angle_difference(r.theta_a, r.theta_b) - delta)) <= 1e-12)
      est.add(r.outcome_a, r.outcome_b);
  est.finalize();
  return est;
}

ChshQuadruple ChshQuadruple::defaults() {
  return {PolarizationAngle(0.0), PolarizationAngle(pi / 4), PolarizationAngle(pi / 8),
          PolarizationAngle(3 * pi / 8)};
}

std::array<CorrelationEstimate, 4> chsh_select(std::span<const PublicRound> rounds,
                                               const ChshQuadruple& q) {
  return {estimate_correlation(rounds, q.a, q.b), estimate_correlation(rounds, q.a, q.b_prime),
          estimate_correlation(rounds, q.a_prime, q.b),
          estimate_correlation(rounds, q.a_prime, q.b_prime)};
}

double chsh_value(double e_ab, double e_ab_prime, double e_a_prime_b, double e_a_prime_b_prime) {
  return std::abs(e_ab - e_ab_prime + e_a_prime_b + e_a_prime_b_prime);
}

ChshResult chsh_estimate(std::span<const PublicRound> rounds, const ChshQuadruple& q) {
  ChshResult res;
  res.pairs = chsh_select(rounds, q);
  double var = 0.0;
  for (const auto& p : res.pairs) {
    if (!p.value) return res;
    var += *p.std_error * *p.std_error;
  }
  res.value = chsh_value(*res.pairs[0].value, *res.pairs[1].value, *res.pairs[2].value,
                         *res.pairs[3].value);
  res.std_error = std::sqrt(var);
  return res;
}

} // namespace dblind
