#include <dblind/sources.hpp>

#include <dblind/error.hpp>

#include <cmath>

namespace dblind {

std::string_view to_string(ScenarioKind k) noexcept {
  switch (k) {
  case ScenarioKind::HonestSinglet: return "honest";
  case ScenarioKind::SingleBlinding: return "single-blinding";
  case ScenarioKind::DoubleBlindBBM92: return "double-bbm92";
  case ScenarioKind::DoubleBlindEkert: return "double-ekert";
  }
  return "?";
}

std::string_view to_string(WeakSidePolicy p) noexcept {
  switch (p) {
  case WeakSidePolicy::Alternate: return "alternate";
  case WeakSidePolicy::Random: return "random";
  case WeakSidePolicy::FixedA: return "fixed-a";
  case WeakSidePolicy::FixedB: return "fixed-b";
  }
  return "?";
}

std::string_view to_string(Side s) noexcept {
  switch (s) {
  case Side::None: return "-";
  case Side::A: return "A";
  case Side::B: return "B";
  }
  return "?";
}

void validate(const ScenarioConfig& cfg) {
  if (!std::isfinite(cfg.strong_intensity) || cfg.strong_intensity <= 0.0)
    throw DomainError("strong_intensity", "must be positive");
  switch (cfg.kind) {
  case ScenarioKind::HonestSinglet:
    if (!(cfg.depolarize_prob >= 0.0 && cfg.depolarize_prob <= 1.0))
      throw DomainError("depolarize_prob", "must lie in [0, 1]");
    break;
  case ScenarioKind::SingleBlinding:
    if (!(cfg.single_blind_intensity > 1.0 && cfg.single_blind_intensity < 2.0))
      throw DomainError("single_blind_intensity", "must lie strictly between I_th and 2 I_th");
    break;
  case ScenarioKind::DoubleBlindEkert:
    if (!(cfg.alpha > 0.0 && cfg.alpha < pi / 4))
      throw DomainError("alpha", "must lie in (0, pi/4)");
    break;
  case ScenarioKind::DoubleBlindBBM92:
    break;
  }
}

double weak_intensity(double alpha) {
  if (!(alpha > 0.0 && alpha < pi / 4))
    throw DomainError("alpha", "must lie in (0, pi/4)");
  const double c = std::cos(alpha);
  return 1.0 / (c * c);
}

PolarizationAngle sample_lambda(RoundRng& rng) {
  return PolarizationAngle(rng.uniform() * pi);
}

namespace {

EmittedRound pulse_pair(PolarizationAngle lambda, double intensity_a, double intensity_b, Side weak) {
  return EmittedRound{
      .hidden_lambda = lambda,
      .pulse_a = Pulse{Intensity(intensity_a), lambda},
      .pulse_b = Pulse{Intensity(intensity_b), lambda + pi / 2},
      .weak_side = weak,
  };
}

} // namespace

EmittedRound emit_double_blind_bbm92(RoundRng& rng, const ScenarioConfig& cfg) {
  const auto lambda = sample_lambda(rng);
  return pulse_pair(lambda, cfg.strong_intensity, cfg.strong_intensity, Side::None);
}

EmittedRound emit_double_blind_ekert(RoundRng& rng, const ScenarioConfig& cfg,
                                     std::uint64_t round_index) {
  const double weak = weak_intensity(cfg.alpha);
  const auto lambda = sample_lambda(rng);
  Side side = Side::A;
  switch (cfg.weak_side_policy) {
  case WeakSidePolicy::Alternate: side = (round_index % 2 == 0) ? Side::A : Side::B; break;
  case WeakSidePolicy::Random: side = rng.coin() ? Side::B : Side::A; break;
  case WeakSidePolicy::FixedA: side = Side::A; break;
  case WeakSidePolicy::FixedB: side = Side::B; break;
  }
  if (side == Side::A) return pulse_pair(lambda, weak, cfg.strong_intensity, side);
  return pulse_pair(lambda, cfg.strong_intensity, weak, side);
}

std::pair<Outcome, Outcome> emit_honest_singlet(RoundRng& rng, PolarizationAngle theta_a,
                                                PolarizationAngle theta_b,
                                                double depolarize_prob) {
  const bool mixed = rng.uniform() < depolarize_prob;
  const Outcome a = rng.coin() ? Outcome::Plus : Outcome::Minus;
  if (mixed) return {a, rng.coin() ? Outcome::Plus : Outcome::Minus};
  // P(b = -a | a) = (1 + cos 2(theta_a - theta_b)) / 2
  const double p_opposite = (1.0 + std::cos(2.0 * (theta_a.radians() - theta_b.radians()))) / 2.0;
  const Outcome b = rng.uniform() < p_opposite ? negate(a) : a;
  return {a, b};
}

SingleBlindRound emit_single_blinding(RoundRng& rng, std::span<const PolarizationAngle> eve_bases,
                                      PolarizationAngle theta_a, const ScenarioConfig& cfg) {
  if (eve_bases.empty()) throw DomainError("eve_bases", "must not be empty");
  const auto basis = eve_bases[rng.index(eve_bases.size())];
  const auto [alice, eve] = emit_honest_singlet(rng, theta_a, basis, 0.0);
  const auto direction = eve == Outcome::Plus ? basis : basis + pi / 2;
  return SingleBlindRound{
      .alice = alice,
      .eve_basis = basis,
      .eve = eve,
      .forwarded = Pulse{Intensity(cfg.single_blind_intensity), direction},
  };
}

namespace {

// Strong pulse (2 I_th): channel follows the sign of cos 2(pol - theta).
// Weak pulse: clicks only outside the band |cos 2(pol - theta)| <= cos 2 alpha.
Outcome predicted(double c, bool weak, double alpha) {
  if (weak && std::abs(c) <= std::cos(2.0 * alpha)) return Outcome::NoClick;
  return sign_outcome(c);
}

} // namespace

std::optional<std::pair<Outcome, Outcome>> eve_predict(PolarizationAngle hidden_lambda,
                                                       PolarizationAngle theta_a,
                                                       PolarizationAngle theta_b, Side weak_side,
                                                       const ScenarioConfig& cfg) {
  if (cfg.kind != ScenarioKind::DoubleBlindBBM92 && cfg.kind != ScenarioKind::DoubleBlindEkert)
    return std::nullopt;
  const double lambda = hidden_lambda.radians();
  const double ca = std::cos(2.0 * (lambda - theta_a.radians()));
  // Bob's pulse is rotated by pi/2, which flips the sign of cos 2(.)
  const double cb = -std::cos(2.0 * (lambda - theta_b.radians()));
  const bool ekert = cfg.kind == ScenarioKind::DoubleBlindEkert;
  return std::pair{predicted(ca, ekert && weak_side == Side::A, cfg.alpha),
                   predicted(cb, ekert && weak_side == Side::B, cfg.alpha)};
}

} // namespace dblind
