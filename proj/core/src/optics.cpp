#include <dblind/optics.hpp>

#include <dblind/error.hpp>

#include <cmath>

namespace dblind {

double PolarizationAngle::canonicalize(double radians) noexcept {
  double r = std::fmod(radians, pi);
  if (r < 0.0) r += pi;
  // r + pi can round up to exactly pi for tiny negative r
  if (r >= pi) r = 0.0;
  return r;
}

double reduce_difference(double radians) noexcept {
  double r = PolarizationAngle::canonicalize(radians);
  if (r > pi / 2) r -= pi;
  return r;
}

bool same_orientation(PolarizationAngle a, PolarizationAngle b, double tolerance) noexcept {
  return std::abs(angle_difference(a, b)) <= tolerance;
}

Intensity::Intensity(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0)
    throw DomainError("intensity", "must be finite and non-negative");
}

DetectorStation::DetectorStation(Intensity threshold, PolarizationAngle setting)
    : threshold_(threshold), setting_(setting) {
  if (threshold.value() <= 0.0)
    throw DomainError("threshold", "must be strictly positive");
}

std::string_view to_string(Outcome o) noexcept {
  switch (o) {
  case Outcome::Plus: return "+1";
  case Outcome::Minus: return "-1";
  case Outcome::NoClick: return "0";
  case Outcome::DoubleClick: return "X";
  }
  return "?";
}

std::pair<Intensity, Intensity> malus_split(const Pulse& pulse, PolarizationAngle setting) {
  const double total = pulse.intensity.value();
  const double c = std::cos(2.0 * (pulse.polarization.radians() - setting.radians()));
  // half-angle form keeps both outputs non-negative and their sum at `total`
  const double i0 = total * (1.0 + c) / 2.0;
  const double i1 = total - i0;
  return {Intensity(i0), Intensity(i1 < 0.0 ? 0.0 : i1)};
}

Outcome threshold_click(Intensity channel0, Intensity channel1, Intensity threshold) noexcept {
  const bool c0 = channel0 > threshold;
  const bool c1 = channel1 > threshold;
  if (c0 && c1) return Outcome::DoubleClick;
  if (c0) return Outcome::Plus;
  if (c1) return Outcome::Minus;
  return Outcome::NoClick;
}

Outcome measure_pulse(const Pulse& pulse, const DetectorStation& station) {
  const auto [i0, i1] = malus_split(pulse, station.setting());
  return threshold_click(i0, i1, station.threshold());
}

} // namespace dblind
