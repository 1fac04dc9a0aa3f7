#pragma once

#include <dblind/optics.hpp>
#include <dblind/sources.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace dblind {

enum class ProtocolKind : std::uint8_t { BBM92, Ekert };

std::string_view to_string(ProtocolKind p) noexcept;

struct ProtocolConfig {
  ProtocolKind protocol = ProtocolKind::BBM92;
  std::vector<PolarizationAngle> alice_settings;
  std::vector<PolarizationAngle> bob_settings;
  std::uint64_t rounds = 0;
  std::uint64_t seed = 0;

  /// BBM92: {0, pi/4} on both sides. Ekert: Alice {0, pi/8, pi/4}, Bob
  /// {pi/8, pi/4, 3pi/8}.
  static ProtocolConfig defaults(ProtocolKind protocol, std::uint64_t rounds, std::uint64_t seed);
};

/// Throws DomainError naming the offending parameter. Also rejects scenario
/// and protocol combinations the engine does not model.
void validate(const ProtocolConfig& protocol, const ScenarioConfig& scenario);

/// What Alice and Bob see of one round.
struct PublicRound {
  std::uint64_t index = 0;
  PolarizationAngle theta_a;
  PolarizationAngle theta_b;
  Outcome outcome_a = Outcome::NoClick;
  Outcome outcome_b = Outcome::NoClick;
  Side weak_side = Side::None;

  friend bool operator==(const PublicRound&, const PublicRound&) = default;
};

/// What only Eve knows. For single blinding `predicted_b` is Eve's own
/// measurement outcome and `predicted_a` is empty.
struct EveRound {
  std::optional<PolarizationAngle> hidden_lambda;
  std::optional<Outcome> predicted_a;
  std::optional<Outcome> predicted_b;

  friend bool operator==(const EveRound&, const EveRound&) = default;
};

struct RoundRecord {
  PublicRound pub;
  EveRound eve;
};

/// Records of one session, kept as two parallel columns so that anything
/// Alice and Bob compute can be handed the public column alone.
struct SessionRecords {
  ScenarioKind scenario = ScenarioKind::HonestSinglet;
  ProtocolKind protocol = ProtocolKind::BBM92;
  std::vector<PublicRound> rounds;
  std::vector<EveRound> eve;

  std::size_t size() const noexcept { return rounds.size(); }
  RoundRecord record(std::size_t i) const { return {rounds.at(i), eve.at(i)}; }
};

/// Simulates a single round; a pure function of (configs, index).
RoundRecord simulate_round(const ProtocolConfig& protocol, const ScenarioConfig& scenario,
                           std::uint64_t index);

/// Runs `protocol.rounds` rounds on `workers` threads (0 picks the hardware
/// concurrency). Output is identical for every worker count.
SessionRecords run_session(const ProtocolConfig& protocol, const ScenarioConfig& scenario,
                           unsigned workers = 1);

struct SiftedKey {
  std::vector<std::uint8_t> alice_bits;
  std::vector<std::uint8_t> bob_bits;   // already inverted for the anticorrelation convention
  std::optional<std::vector<std::uint8_t>> eve_bits;
  std::vector<PolarizationAngle> basis;
  std::vector<std::uint64_t> round_index;
  std::size_t errors = 0;
  /// Empty when nothing survived sifting.
  std::optional<double> qber;

  std::size_t size() const noexcept { return alice_bits.size(); }
};

/// Keeps rounds with equal settings where both sides clicked. Bit 1 encodes
/// Minus; Bob's bit is inverted so that agreement means zero error.
SiftedKey sift_bbm92(std::span<const PublicRound> rounds);

/// As above, then attaches Eve's copy of Bob's bits when she has one.
SiftedKey sift_bbm92(const SessionRecords& records);

/// Fraction of sifted bits where Eve's bit equals Bob's. Empty when Eve has
/// no key (honest scenario) or the key is empty.
std::optional<double> eve_knowledge_audit(const SiftedKey& key);

struct PredictionAudit {
  std::size_t rounds_checked = 0;
  std::size_t mismatches = 0;
};

/// Compares Eve's per-round predictions with the simulated outcomes. In
/// double blinding both sides are checked on every round; in single blinding
/// Bob's outcome is checked on rounds where he clicked. Empty for the honest
/// source.
std::optional<PredictionAudit> audit_predictions(const SessionRecords& records);

struct CorrelationEstimate {
  std::size_t n_pp = 0, n_mm = 0, n_pm = 0, n_mp = 0;
  std::optional<double> value;
  std::optional<double> std_error;

  std::size_t coincidences() const noexcept { return n_pp + n_mm + n_pm + n_mp; }
  void add(Outcome a, Outcome b) noexcept;
  void finalize() noexcept;
};

/// Coincidence-conditioned correlation at one pair of settings.
CorrelationEstimate estimate_correlation(std::span<const PublicRound> rounds, PolarizationAngle a,
                                         PolarizationAngle b);

/// Correlation estimate of every round whose setting difference matches
/// `delta` (modulo pi), pooling all absolute settings.
CorrelationEstimate estimate_correlation_at_difference(std::span<const PublicRound> rounds,
                                                       double delta);

struct ChshQuadruple {
  PolarizationAngle a, a_prime, b, b_prime;

  /// a = 0, a' = pi/4, b = pi/8, b' = 3pi/8.
  static ChshQuadruple defaults();
};

/// Order: E(a,b), E(a,b'), E(a',b), E(a',b').
std::array<CorrelationEstimate, 4> chsh_select(std::span<const PublicRound> rounds,
                                               const ChshQuadruple& q);

/// S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|.
double chsh_value(double e_ab, double e_ab_prime, double e_a_prime_b, double e_a_prime_b_prime);

struct ChshResult {
  std::array<CorrelationEstimate, 4> pairs;
  std::optional<double> value;
  std::optional<double> std_error;
};

/// Empty value when any of the four pairs has no coincidences.
ChshResult chsh_estimate(std::span<const PublicRound> rounds, const ChshQuadruple& q);

} // namespace dblind
