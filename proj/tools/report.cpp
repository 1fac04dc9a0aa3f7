#include "report.hpp"

#include <dblind/error.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace dblind::cli {

namespace {

std::optional<double> to_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  // std::from_chars for double is not reliable on every toolchain we target
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

} // namespace

double parse_angle(std::string_view text, const std::string& parameter) {
  auto bad = [&] { return DomainError(parameter, "cannot parse angle '" + std::string(text) + "'"); };
  const auto p = text.find("pi");
  if (p == std::string_view::npos) {
    if (auto v = to_double(text)) return *v;
    throw bad();
  }
  double coeff = 1.0;
  auto head = text.substr(0, p);
  if (!head.empty() && head.back() == '*') head.remove_suffix(1);
  if (head == "-") coeff = -1.0;
  else if (head == "+") coeff = 1.0;
  else if (!head.empty()) {
    auto v = to_double(head);
    if (!v) throw bad();
    coeff = *v;
  }
  double divisor = 1.0;
  auto tail = text.substr(p + 2);
  if (!tail.empty()) {
    if (tail.front() != '/') throw bad();
    auto v = to_double(tail.substr(1));
    if (!v || *v == 0.0) throw bad();
    divisor = *v;
  }
  return coeff * pi / divisor;
}

std::string format_angle(double radians) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", radians);
  return buf;
}

void write_records_csv(std::ostream& os, const SessionRecords& records, bool eve_view) {
  os << "round,theta_a,theta_b,outcome_a,outcome_b,weak_side";
  if (eve_view) os << ",lambda,eve_pred_a,eve_pred_b";
  os << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records.rounds[i];
    os << r.index << ',' << format_angle(r.theta_a.radians()) << ','
       << format_angle(r.theta_b.radians()) << ',' << to_string(r.outcome_a) << ','
       << to_string(r.outcome_b) << ',' << to_string(r.weak_side);
    if (eve_view) {
      const auto& e = records.eve[i];
      os << ',' << (e.hidden_lambda ? format_angle(e.hidden_lambda->radians()) : "") << ','
         << (e.predicted_a ? to_string(*e.predicted_a) : "") << ','
         << (e.predicted_b ? to_string(*e.predicted_b) : "");
    }
    os << '\n';
  }
}

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json angles(const std::vector<PolarizationAngle>& v) {
  Json arr = Json::array();
  for (auto a : v) arr.push_back(a.radians());
  return arr;
}

// Closed-form correlation for the configured scenario, if there is one.
std::optional<double> oracle_correlation(const ScenarioConfig& s, double delta) {
  switch (s.kind) {
  case ScenarioKind::HonestSinglet: return oracle_corr_singlet(delta, s.depolarize_prob);
  case ScenarioKind::DoubleBlindBBM92: return oracle_corr_bbm92(delta);
  case ScenarioKind::DoubleBlindEkert: return oracle_corr_ekert(delta, s.alpha);
  case ScenarioKind::SingleBlinding: break;
  }
  return std::nullopt;
}

Json rate_test_json(const RateTest& t) {
  Json cells = Json::array();
  for (std::size_t i = 0; i < t.trials.size(); ++i) {
    Json c;
    c["theta_a"] = t.cell_settings_a[i];
    if (!t.cell_settings_b.empty()) c["theta_b"] = t.cell_settings_b[i];
    c["trials"] = t.trials[i];
    c["successes"] = t.successes[i];
    c["rate"] = t.rates[i];
    cells.push_back(std::move(c));
  }
  Json j;
  j["name"] = std::string(t.name);
  j["verdict"] = std::string(to_string(t.verdict));
  j["chi_square"] = t.chi_square;
  j["dof"] = t.dof;
  j["p_value"] = t.p_value;
  j["cells"] = std::move(cells);
  return j;
}

Json oracle_json(const ProtocolConfig& p, const ScenarioConfig& s) {
  Json o;
  switch (s.kind) {
  case ScenarioKind::HonestSinglet:
    o["qber"] = s.depolarize_prob / 2.0;
    o["eta"] = 1.0;
    o["eta_21"] = 1.0;
    break;
  case ScenarioKind::SingleBlinding: {
    const auto& eve = s.eve_bases.empty() ? p.bob_settings : s.eve_bases;
    std::size_t matches = 0;
    for (auto e : eve)
      for (auto b : p.bob_settings)
        if (same_orientation(e, b)) ++matches;
    o["qber"] = 0.0;
    o["rate_a"] = 1.0;
    o["rate_b"] = static_cast<double>(matches) /
                  static_cast<double>(eve.size() * p.bob_settings.size());
    break;
  }
  case ScenarioKind::DoubleBlindBBM92:
    o["qber"] = 0.0;
    o["eta"] = 1.0;
    o["eta_21"] = 1.0;
    break;
  case ScenarioKind::DoubleBlindEkert:
    o["qber"] = 0.0;
    o["weak_detection_prob"] = oracle_weak_detection_prob(s.alpha);
    o["eta"] = oracle_eta(s.alpha);
    o["eta_21"] = oracle_eta_conditional(s.alpha);
    break;
  }
  if (p.protocol == ProtocolKind::Ekert && s.kind != ScenarioKind::SingleBlinding) {
    const auto q = ChshQuadruple::defaults();
    auto e = [&](PolarizationAngle a, PolarizationAngle b) {
      return *oracle_correlation(s, angle_difference(a, b));
    };
    o["chsh"] = chsh_value(e(q.a, q.b), e(q.a, q.b_prime), e(q.a_prime, q.b),
                           e(q.a_prime, q.b_prime));
  }
  return o;
}

} // namespace

Json session_summary(const SummaryInputs& in, const SessionRecords& records) {
  const auto& p = in.protocol;
  const auto& s = in.scenario;
  const std::span<const PublicRound> pub(records.rounds);

  Json j;
  j["scenario"] = std::string(to_string(s.kind));
  j["protocol"] = std::string(to_string(p.protocol));
  j["rounds"] = p.rounds;
  j["seed"] = p.seed;

  Json params;
  params["alpha"] = s.alpha;
  params["weak_side_policy"] = std::string(to_string(s.weak_side_policy));
  params["strong_intensity"] = s.strong_intensity;
  params["single_blind_intensity"] = s.single_blind_intensity;
  params["depolarize_prob"] = s.depolarize_prob;
  params["alice_settings"] = angles(p.alice_settings);
  params["bob_settings"] = angles(p.bob_settings);
  j["parameters"] = std::move(params);

  const auto key = sift_bbm92(records);
  j["qber"] = opt(key.qber);
  Json k;
  k["sifted_bits"] = key.size();
  k["errors"] = key.errors;
  j["key"] = std::move(k);

  if (p.protocol == ProtocolKind::Ekert) {
    const auto chsh = chsh_estimate(pub, ChshQuadruple::defaults());
    const auto q = ChshQuadruple::defaults();
    const std::array<std::pair<PolarizationAngle, PolarizationAngle>, 4> labels{
        {{q.a, q.b}, {q.a, q.b_prime}, {q.a_prime, q.b}, {q.a_prime, q.b_prime}}};
    Json pairs = Json::array();
    for (std::size_t i = 0; i < 4; ++i) {
      Json pj;
      pj["theta_a"] = labels[i].first.radians();
      pj["theta_b"] = labels[i].second.radians();
      pj["correlation"] = opt(chsh.pairs[i].value);
      pj["stderr"] = opt(chsh.pairs[i].std_error);
      pj["coincidences"] = chsh.pairs[i].coincidences();
      pairs.push_back(std::move(pj));
    }
    Json c;
    c["value"] = opt(chsh.value);
    c["pairs"] = std::move(pairs);
    c["stderr"] = opt(chsh.std_error);
    j["chsh"] = std::move(c);
  } else {
    j["chsh"] = nullptr;
  }

  Json corr = Json::array();
  for (auto a : p.alice_settings) {
    for (auto b : p.bob_settings) {
      const auto est = estimate_correlation(pub, a, b);
      const double delta = angle_difference(a, b);
      Json cj;
      cj["theta_a"] = a.radians();
      cj["theta_b"] = b.radians();
      cj["delta"] = delta;
      cj["correlation"] = opt(est.value);
      cj["stderr"] = opt(est.std_error);
      cj["coincidences"] = est.coincidences();
      cj["oracle"] = opt(oracle_correlation(s, delta));
      corr.push_back(std::move(cj));
    }
  }
  j["correlations"] = std::move(corr);

  const auto eff = estimate_efficiencies(
      pub, in.emitted_known ? std::optional<std::uint64_t>(p.rounds) : std::nullopt);
  Json e;
  e["eta"] = opt(eff.eta);
  e["eta_stderr"] = opt(eff.eta_std_error);
  e["eta_21"] = opt(eff.eta_21);
  e["eta_21_stderr"] = opt(eff.eta_21_std_error);
  e["per_side"] = {{"a", eff.rate_a}, {"b", eff.rate_b}};
  e["weak_side_rate"] = opt(eff.weak_side_rate);
  e["weak_side_stderr"] = opt(eff.weak_side_std_error);
  e["coincidences"] = eff.coincidences;
  e["no_clicks"] = {{"a", eff.side_a.no_clicks}, {"b", eff.side_b.no_clicks}};
  e["double_clicks"] = {{"a", eff.side_a.double_clicks}, {"b", eff.side_b.double_clicks}};
  j["efficiency"] = std::move(e);

  const auto fs = fair_sampling_monitor(pub, in.significance);
  Json f;
  f["verdict"] = std::string(to_string(fs.verdict));
  f["significance"] = fs.significance;
  f["tests"] = Json::array({rate_test_json(fs.alice), rate_test_json(fs.bob),
                            rate_test_json(fs.coincidences)});
  j["monitors"] = {{"fair_sampling", std::move(f)}};

  Json eve;
  if (const auto audit = audit_predictions(records)) {
    eve["rounds_checked"] = audit->rounds_checked;
    eve["mismatches"] = audit->mismatches;
  } else {
    eve["rounds_checked"] = nullptr;
    eve["mismatches"] = nullptr;
  }
  eve["key_match_fraction"] = opt(eve_knowledge_audit(key));
  j["eve"] = std::move(eve);

  j["oracle"] = oracle_json(p, s);
  return j;
}

namespace {

void flatten(std::ostream& os, const Json& j, const std::string& prefix) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(os, v, prefix.empty() ? k : prefix + "." + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(os, j[i], prefix + "." + std::to_string(i));
  } else {
    os << prefix << ',' << (j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
  }
}

} // namespace

void write_flat_csv(std::ostream& os, const Json& j) {
  os << "key,value\n";
  flatten(os, j, "");
}

} // namespace dblind::cli
