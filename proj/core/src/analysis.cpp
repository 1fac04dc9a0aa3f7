#include <dblind/analysis.hpp>

#include <dblind/error.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>
#include <utility>

namespace dblind {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < pi / 4)) throw DomainError("alpha", "must lie in (0, pi/4)");
}

} // namespace

double oracle_corr_bbm92(double delta) { return -1.0 + (4.0 / pi) * std::abs(delta); }

double oracle_corr_ekert(double delta, double alpha) {
  require_alpha(alpha);
  const double d = std::abs(delta);
  if (d < pi / 4 - alpha) return -1.0;
  if (d > pi / 4 + alpha) return 1.0;
  return (d - pi / 4) / alpha;
}

double oracle_corr_singlet(double delta, double depolarize_prob) {
  return -(1.0 - depolarize_prob) * std::cos(2.0 * delta);
}

double oracle_weak_detection_prob(double alpha) {
  require_alpha(alpha);
  return 4.0 * alpha / pi;
}

double oracle_eta(double alpha) { return (1.0 + oracle_weak_detection_prob(alpha)) / 2.0; }

double oracle_eta_conditional(double alpha) {
  return oracle_weak_detection_prob(alpha) / oracle_eta(alpha);
}

std::optional<double> chsh_bound_conditional(double eta_21) {
  if (!(eta_21 >= 2.0 / 3.0 && eta_21 <= 1.0)) return std::nullopt;
  return 4.0 / eta_21 - 2.0;
}

std::optional<double> chsh_bound_detection(double eta) {
  if (!(eta >= 0.75 && eta <= 1.0)) return std::nullopt;
  return 2.0 / (2.0 * eta - 1.0);
}

namespace {

void tally(SideCounts& c, Outcome o) {
  if (is_click(o)) ++c.clicks;
  else if (o == Outcome::DoubleClick) ++c.double_clicks;
  else ++c.no_clicks;
}

double binomial_se(double p, double n) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / n); }

} // namespace

EfficiencyReport estimate_efficiencies(std::span<const PublicRound> rounds,
                                       std::optional<std::uint64_t> n_emitted) {
  if (rounds.empty()) throw DomainError("records", "must not be empty");
  if (n_emitted && *n_emitted == 0) throw DomainError("n_emitted", "must be positive");
  EfficiencyReport rep;
  rep.records = rounds.size();
  rep.n_emitted = n_emitted;
  std::size_t weak_rounds = 0;
  std::size_t weak_clicks = 0;
  for (const auto& r : rounds) {
    tally(rep.side_a, r.outcome_a);
    tally(rep.side_b, r.outcome_b);
    if (is_click(r.outcome_a) && is_click(r.outcome_b)) ++rep.coincidences;
    if (r.weak_side != Side::None) {
      ++weak_rounds;
      const auto weak = r.weak_side == Side::A ? r.outcome_a : r.outcome_b;
      if (is_click(weak)) ++weak_clicks;
    }
  }
  const double n = static_cast<double>(rep.records);
  rep.rate_a = static_cast<double>(rep.side_a.clicks) / n;
  rep.rate_b = static_cast<double>(rep.side_b.clicks) / n;
  const double singles = static_cast<double>(rep.side_a.clicks + rep.side_b.clicks);

  // per-round click total k in {0, 1, 2} and coincidence indicator c
  double sk = 0.0, skk = 0.0, sc = 0.0, scc = 0.0, skc = 0.0;
  for (const auto& r : rounds) {
    const double k = (is_click(r.outcome_a) ? 1.0 : 0.0) + (is_click(r.outcome_b) ? 1.0 : 0.0);
    const double c = k == 2.0 ? 1.0 : 0.0;
    sk += k;
    skk += k * k;
    sc += c;
    scc += c * c;
    skc += k * c;
  }
  const double mean_k = sk / n;
  const double var_k = std::max(0.0, skk / n - mean_k * mean_k);
  if (n_emitted) {
    const double emitted = static_cast<double>(*n_emitted);
    rep.eta = singles / (2.0 * emitted);
    rep.eta_std_error = std::sqrt(var_k / emitted) / 2.0;
  }
  if (singles > 0.0) {
    const double ratio = 2.0 * static_cast<double>(rep.coincidences) / singles;
    rep.eta_21 = ratio;
    // delta method for the ratio of means 2 E[c] / E[k]
    const double mean_c = sc / n;
    const double var_c = std::max(0.0, scc / n - mean_c * mean_c);
    const double cov = skc / n - mean_k * mean_c;
    const double var_lin = std::max(0.0, 4.0 * var_c + ratio * ratio * var_k - 4.0 * ratio * cov);
    rep.eta_21_std_error = std::sqrt(var_lin / n) / mean_k;
  }
  if (weak_rounds > 0) {
    const double p = static_cast<double>(weak_clicks) / static_cast<double>(weak_rounds);
    rep.weak_side_rate = p;
    rep.weak_side_std_error = binomial_se(p, static_cast<double>(weak_rounds));
  }
  return rep;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
  case Verdict::Pass: return "PASS";
  case Verdict::Fail: return "FAIL";
  case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

namespace {

struct Cell {
  std::size_t trials = 0;
  std::size_t successes = 0;
};

// Cells keyed by canonical angles; std::map keeps a stable ordering.
using CellKey = std::pair<double, double>;

RateTest homogeneity_test(std::string_view name, const std::map<CellKey, Cell>& cells,
                          bool paired, double level, std::size_t min_cell_count) {
  RateTest t;
  t.name = name;
  std::size_t total_trials = 0;
  std::size_t total_successes = 0;
  bool sparse = false;
  for (const auto& [key, cell] : cells) {
    t.cell_settings_a.push_back(key.first);
    if (paired) t.cell_settings_b.push_back(key.second);
    t.trials.push_back(cell.trials);
    t.successes.push_back(cell.successes);
    t.rates.push_back(static_cast<double>(cell.successes) / static_cast<double>(cell.trials));
    total_trials += cell.trials;
    total_successes += cell.successes;
    if (cell.trials < min_cell_count) sparse = true;
  }
  if (cells.size() < 2 || sparse) return t;

  // r x 2 contingency table; a column with zero total contributes nothing
  const double p = static_cast<double>(total_successes) / static_cast<double>(total_trials);
  double chi = 0.0;
  for (const auto& [key, cell] : cells) {
    const double n = static_cast<double>(cell.trials);
    const double hit = static_cast<double>(cell.successes);
    const double exp_hit = n * p;
    const double exp_miss = n * (1.0 - p);
    if (exp_hit > 0.0) chi += (hit - exp_hit) * (hit - exp_hit) / exp_hit;
    if (exp_miss > 0.0) chi += ((n - hit) - exp_miss) * ((n - hit) - exp_miss) / exp_miss;
  }
  t.chi_square = chi;
  t.dof = cells.size() - 1;
  const boost::math::chi_squared dist(static_cast<double>(t.dof));
  t.p_value = boost::math::cdf(boost::math::complement(dist, chi));
  t.verdict = t.p_value < level ? Verdict::Fail : Verdict::Pass;
  return t;
}

} // namespace

FairSamplingReport fair_sampling_monitor(std::span<const PublicRound> rounds, double significance,
                                         std::size_t min_cell_count) {
  if (!(significance > 0.0 && significance < 1.0))
    throw DomainError("significance", "must lie in (0, 1)");
  std::map<CellKey, Cell> alice, bob, pairs;
  for (const auto& r : rounds) {
    const double a = r.theta_a.radians();
    const double b = r.theta_b.radians();
    auto& ca = alice[{a, 0.0}];
    ++ca.trials;
    if (is_click(r.outcome_a)) ++ca.successes;
    auto& cb = bob[{b, 0.0}];
    ++cb.trials;
    if (is_click(r.outcome_b)) ++cb.successes;
    auto& cp = pairs[{a, b}];
    ++cp.trials;
    if (is_click(r.outcome_a) && is_click(r.outcome_b)) ++cp.successes;
  }
  FairSamplingReport rep;
  rep.significance = significance;
  const double level = significance / 3.0;
  rep.alice = homogeneity_test("alice_singles", alice, false, level, min_cell_count);
  rep.bob = homogeneity_test("bob_singles", bob, false, level, min_cell_count);
  rep.coincidences = homogeneity_test("coincidences", pairs, true, level, min_cell_count);

  const Verdict vs[] = {rep.alice.verdict, rep.bob.verdict, rep.coincidences.verdict};
  rep.verdict = Verdict::Pass;
  for (auto v : vs)
    if (v == Verdict::Fail) rep.verdict = Verdict::Fail;
  if (rep.verdict != Verdict::Fail)
    for (auto v : vs)
      if (v == Verdict::Inconclusive) rep.verdict = Verdict::Inconclusive;
  return rep;
}

} // namespace dblind
