#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>
#include <utility>

namespace dblind {

inline constexpr double pi = std::numbers::pi;

/// Direction of linear polarization (or analyzer orientation), stored as its
/// canonical representative in [0, pi).
class PolarizationAngle {
public:
  constexpr PolarizationAngle() = default;
  explicit PolarizationAngle(double radians) : value_(canonicalize(radians)) {}

  double radians() const noexcept { return value_; }

  /// Maps any real angle onto [0, pi). Idempotent.
  static double canonicalize(double radians) noexcept;

  friend PolarizationAngle operator+(PolarizationAngle a, double shift) {
    return PolarizationAngle(a.value_ + shift);
  }
  friend bool operator==(PolarizationAngle, PolarizationAngle) = default;

private:
  double value_ = 0.0;
};

/// Reduces an angle difference to [-pi/2, pi/2], the domain used by the
/// correlation formulas.
double reduce_difference(double radians) noexcept;

/// Signed difference to - from, reduced to [-pi/2, pi/2].
inline double angle_difference(PolarizationAngle from, PolarizationAngle to) noexcept {
  return reduce_difference(to.radians() - from.radians());
}

/// True when the two orientations coincide modulo pi, up to `tolerance`.
bool same_orientation(PolarizationAngle a, PolarizationAngle b, double tolerance = 1e-12) noexcept;

/// Non-negative light intensity, in units of the detector threshold.
class Intensity {
public:
  constexpr Intensity() = default;
  /// Throws DomainError for negative or non-finite values.
  explicit Intensity(double value);

  double value() const noexcept { return value_; }

  friend auto operator<=>(Intensity, Intensity) = default;

private:
  double value_ = 0.0;
};

struct Pulse {
  Intensity intensity;
  PolarizationAngle polarization;
};

/// A pair of threshold detectors behind a polarizing beamsplitter, blinded
/// into linear mode.
class DetectorStation {
public:
  /// Throws DomainError unless threshold > 0.
  DetectorStation(Intensity threshold, PolarizationAngle setting);
  explicit DetectorStation(PolarizationAngle setting) : DetectorStation(Intensity(1.0), setting) {}

  Intensity threshold() const noexcept { return threshold_; }
  PolarizationAngle setting() const noexcept { return setting_; }

private:
  Intensity threshold_;
  PolarizationAngle setting_;
};

/// Result of one detection window at one station.
enum class Outcome : std::uint8_t {
  Plus,       // channel 0 clicked
  Minus,      // channel 1 clicked
  NoClick,
  DoubleClick,
};

/// +1 / -1 / 0; empty for DoubleClick.
constexpr std::optional<int> numeric_value(Outcome o) noexcept {
  switch (o) {
  case Outcome::Plus: return 1;
  case Outcome::Minus: return -1;
  case Outcome::NoClick: return 0;
  case Outcome::DoubleClick: break;
  }
  return std::nullopt;
}

/// Exactly one channel clicked.
constexpr bool is_click(Outcome o) noexcept {
  return o == Outcome::Plus || o == Outcome::Minus;
}

constexpr Outcome negate(Outcome o) noexcept {
  if (o == Outcome::Plus) return Outcome::Minus;
  if (o == Outcome::Minus) return Outcome::Plus;
  return o;
}

/// Sign of `x` as an outcome; zero maps to NoClick.
constexpr Outcome sign_outcome(double x) noexcept {
  if (x > 0.0) return Outcome::Plus;
  if (x < 0.0) return Outcome::Minus;
  return Outcome::NoClick;
}

std::string_view to_string(Outcome o) noexcept;

/// Malus-law split of a pulse at a polarizing beamsplitter oriented along
/// `setting`: (I cos^2(lambda - theta), I sin^2(lambda - theta)).
std::pair<Intensity, Intensity> malus_split(const Pulse& pulse, PolarizationAngle setting);

/// Linear-mode click rule: a channel clicks only if its intensity strictly
/// exceeds the threshold.
Outcome threshold_click(Intensity channel0, Intensity channel1, Intensity threshold) noexcept;

Outcome measure_pulse(const Pulse& pulse, const DetectorStation& station);

} // namespace dblind
