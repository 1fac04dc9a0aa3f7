#pragma once

#include <dblind/optics.hpp>
#include <dblind/rng.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace dblind {

enum class ScenarioKind : std::uint8_t {
  HonestSinglet,
  SingleBlinding,
  DoubleBlindBBM92,
  DoubleBlindEkert,
};

enum class WeakSidePolicy : std::uint8_t { Alternate, Random, FixedA, FixedB };

enum class Side : std::uint8_t { None, A, B };

std::string_view to_string(ScenarioKind k) noexcept;
std::string_view to_string(WeakSidePolicy p) noexcept;
std::string_view to_string(Side s) noexcept;

/// Weak-pulse band half-width that makes the Ekert-tuned attack reproduce
/// the singlet CHSH value: pi / (4 sqrt 2).
inline const double optimal_alpha = pi / (4.0 * std::numbers::sqrt2);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::HonestSinglet;
  double alpha = optimal_alpha;
  double strong_intensity = 2.0;
  double single_blind_intensity = 1.5;
  WeakSidePolicy weak_side_policy = WeakSidePolicy::Random;
  double depolarize_prob = 0.0;
  /// Bases Eve measures in during single blinding. Empty means "use Bob's
  /// basis set", filled in by the protocol engine.
  std::vector<PolarizationAngle> eve_bases;
};

/// Throws DomainError naming the first offending parameter.
void validate(const ScenarioConfig& cfg);

/// Intensity of the weak pulse, I_th / cos^2(alpha), in units of I_th.
double weak_intensity(double alpha);

/// Eve's pulse pair for one round. Pulses are absent for the honest source,
/// which is sampled directly from the quantum joint law.
struct EmittedRound {
  std::optional<PolarizationAngle> hidden_lambda;
  std::optional<Pulse> pulse_a;
  std::optional<Pulse> pulse_b;
  Side weak_side = Side::None;
};

/// Hidden polarization, uniform on [0, pi).
PolarizationAngle sample_lambda(RoundRng& rng);

/// Both pulses at the strong intensity; Bob's polarization is lambda + pi/2.
EmittedRound emit_double_blind_bbm92(RoundRng& rng, const ScenarioConfig& cfg);

/// One weak pulse (I_th / cos^2 alpha) and one strong pulse. The weak side
/// follows cfg.weak_side_policy; Alternate uses the round index parity.
EmittedRound emit_double_blind_ekert(RoundRng& rng, const ScenarioConfig& cfg,
                                     std::uint64_t round_index);

/// Ideal unit-efficiency polarization singlet measured along (theta_a,
/// theta_b). Joint law P(a, b) = (1 - a b cos 2(theta_a - theta_b)) / 4; with
/// probability `depolarize_prob` the pair is replaced by two independent fair
/// outcomes.
std::pair<Outcome, Outcome> emit_honest_singlet(RoundRng& rng, PolarizationAngle theta_a,
                                                PolarizationAngle theta_b,
                                                double depolarize_prob);

struct SingleBlindRound {
  Outcome alice;          // Alice's genuine measurement
  PolarizationAngle eve_basis;
  Outcome eve;            // Eve's measurement of the photon meant for Bob
  Pulse forwarded;        // bright pulse sent on to Bob
};

/// Intercept-and-resend against Bob: Eve measures the singlet partner in a
/// basis drawn uniformly from `eve_bases` and forwards a pulse polarized
/// along her result (basis for +1, basis + pi/2 for -1).
SingleBlindRound emit_single_blinding(RoundRng& rng, std::span<const PolarizationAngle> eve_bases,
                                      PolarizationAngle theta_a, const ScenarioConfig& cfg);

/// Eve's prediction of both recorded outcomes from her hidden lambda, using
/// the closed-form sign patterns of the attack rather than the detector
/// model. Empty for scenarios without a hidden polarization.
std::optional<std::pair<Outcome, Outcome>> eve_predict(PolarizationAngle hidden_lambda,
                                                       PolarizationAngle theta_a,
                                                       PolarizationAngle theta_b, Side weak_side,
                                                       const ScenarioConfig& cfg);

} // namespace dblind
