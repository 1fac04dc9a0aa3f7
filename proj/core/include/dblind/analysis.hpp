#pragma once

#include <dblind/protocol.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace dblind {

// Closed-form predictions. Angle differences must already be reduced to
// [-pi/2, pi/2]; alpha-dependent functions throw DomainError outside (0, pi/4).

/// Correlation of the 2 I_th attack: -1 + (4/pi)|delta|.
double oracle_corr_bbm92(double delta);

/// Coincidence-conditioned correlation of the weak-pulse attack.
double oracle_corr_ekert(double delta, double alpha);

/// -(1 - p) cos 2 delta, the depolarized singlet.
double oracle_corr_singlet(double delta, double depolarize_prob = 0.0);

/// Detection probability on the weak side, 4 alpha / pi.
double oracle_weak_detection_prob(double alpha);

/// Average detection efficiency with the weak side balanced between parties.
double oracle_eta(double alpha);

/// Coincidences per single: p_w / eta.
double oracle_eta_conditional(double alpha);

/// Largest CHSH value reachable by a local model at conditional efficiency
/// eta_21: 4/eta_21 - 2. Empty below eta_21 = 2/3 or above 1.
std::optional<double> chsh_bound_conditional(double eta_21);

/// Largest CHSH value reachable by a local model at detection efficiency
/// eta when non-detections may be correlated: 2/(2 eta - 1). Empty below
/// eta = 3/4 or above 1.
std::optional<double> chsh_bound_detection(double eta);

struct SideCounts {
  std::size_t clicks = 0;
  std::size_t no_clicks = 0;
  std::size_t double_clicks = 0;
};

struct EfficiencyReport {
  /// Singles per emitted pulse. Empty when the number of emissions is unknown.
  std::optional<double> eta;
  std::optional<double> eta_std_error;
  /// Coincidences per single, symmetrized over sides.
  std::optional<double> eta_21;
  std::optional<double> eta_21_std_error;
  double rate_a = 0.0;
  double rate_b = 0.0;
  /// Click rate on whichever side received the weak pulse.
  std::optional<double> weak_side_rate;
  std::optional<double> weak_side_std_error;
  std::size_t records = 0;
  std::size_t coincidences = 0;
  std::optional<std::uint64_t> n_emitted;
  SideCounts side_a;
  SideCounts side_b;
};

/// Throws DomainError on an empty record list.
EfficiencyReport estimate_efficiencies(std::span<const PublicRound> rounds,
                                       std::optional<std::uint64_t> n_emitted);

enum class Verdict : std::uint8_t { Pass, Fail, Inconclusive };

std::string_view to_string(Verdict v) noexcept;

/// Chi-square homogeneity test of a detection rate across setting cells.
struct RateTest {
  std::string_view name;
  std::vector<double> cell_settings_a;  // setting per cell (Alice, or the pair's first angle)
  std::vector<double> cell_settings_b;  // empty for single-side tests
  std::vector<std::size_t> trials;
  std::vector<std::size_t> successes;
  std::vector<double> rates;
  double chi_square = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  Verdict verdict = Verdict::Inconclusive;
};

struct FairSamplingReport {
  double significance = 0.01;
  RateTest alice;
  RateTest bob;
  RateTest coincidences;
  Verdict verdict = Verdict::Inconclusive;
};

/// Checks that single-side detection rates and the coincidence rate do not
/// depend on the local settings. Each of the three tests runs at
/// significance / 3 so the family has the requested level. Any cell with
/// fewer than `min_cell_count` rounds, or fewer than two cells per test,
/// makes the verdict inconclusive.
FairSamplingReport fair_sampling_monitor(std::span<const PublicRound> rounds,
                                         double significance = 0.01,
                                         std::size_t min_cell_count = 100);

} // namespace dblind
