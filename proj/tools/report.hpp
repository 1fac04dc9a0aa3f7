#pragma once

#include <dblind/analysis.hpp>
#include <dblind/protocol.hpp>
#include <dblind/sources.hpp>

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <string_view>

namespace dblind::cli {

using Json = nlohmann::ordered_json;

/// Parses "0.3", "pi", "-pi/4", "3pi/8" or "3*pi/8". Throws DomainError
/// naming `parameter` on malformed input.
double parse_angle(std::string_view text, const std::string& parameter);

/// Radians with 9 significant digits.
std::string format_angle(double radians);

/// Columns: round, theta_a, theta_b, outcome_a, outcome_b, weak_side; with
/// `eve_view` also lambda, eve_pred_a, eve_pred_b.
void write_records_csv(std::ostream& os, const SessionRecords& records, bool eve_view);

struct SummaryInputs {
  const ProtocolConfig& protocol;
  const ScenarioConfig& scenario;
  bool emitted_known = true;
  double significance = 0.01;
};

/// Everything a run reports: key statistics, CHSH, efficiencies, monitors,
/// Eve's audit and the closed-form expectations for the same parameters.
Json session_summary(const SummaryInputs& in, const SessionRecords& records);

/// Flattens nested JSON into "a.b.c,value" lines.
void write_flat_csv(std::ostream& os, const Json& j);

} // namespace dblind::cli
