#include "cli.hpp"

#include "report.hpp"

#include <dblind/analysis.hpp>
#include <dblind/error.hpp>
#include <dblind/protocol.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

namespace dblind::cli {

namespace {

struct RunOptions {
  std::string scenario = "double-bbm92";
  std::string protocol = "bbm92";
  long long rounds = 1'000'000;
  std::uint64_t seed = 42;
  std::string alpha = "";
  std::string weak_side = "random";
  double depolarize = 0.0;
  double strong_intensity = 2.0;
  double single_blind_intensity = 1.5;
  std::vector<std::string> theta_a;
  std::vector<std::string> theta_b;
  unsigned workers = 1;
  std::string out = "-";
  std::string records;
  bool eve_view = false;
  bool hide_emitted = false;
  double significance = 0.01;
  std::string format = "json";
};

struct SweepOptions {
  std::string axis = "delta";
  std::string start;
  std::string stop;
  std::string step;
};

struct BoundsOptions {
  std::vector<double> eta;
  std::vector<double> eta_21;
  std::string format = "csv";
  std::string out = "-";
};

const std::map<std::string, ScenarioKind> scenario_names{
    {"honest", ScenarioKind::HonestSinglet},
    {"single-blinding", ScenarioKind::SingleBlinding},
    {"double-bbm92", ScenarioKind::DoubleBlindBBM92},
    {"double-ekert", ScenarioKind::DoubleBlindEkert},
};
const std::map<std::string, ProtocolKind> protocol_names{
    {"bbm92", ProtocolKind::BBM92},
    {"ekert", ProtocolKind::Ekert},
};
const std::map<std::string, WeakSidePolicy> weak_side_names{
    {"alternate", WeakSidePolicy::Alternate},
    {"random", WeakSidePolicy::Random},
    {"fixed-a", WeakSidePolicy::FixedA},
    {"fixed-b", WeakSidePolicy::FixedB},
};

template <class Map>
std::vector<std::string> keys(const Map& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

void add_session_options(CLI::App& app, RunOptions& o) {
  app.add_option("--scenario", o.scenario, "Source scenario")
      ->check(CLI::IsMember(keys(scenario_names)));
  app.add_option("--protocol", o.protocol, "Protocol run by Alice and Bob")
      ->check(CLI::IsMember(keys(protocol_names)));
  app.add_option("--rounds", o.rounds, "Emitted pulse pairs (per grid point for sweeps)");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--alpha", o.alpha, "Weak-pulse band half-width, radians (accepts pi/8 etc.)");
  app.add_option("--weak-side", o.weak_side, "Weak-side policy for the Ekert-tuned attack")
      ->check(CLI::IsMember(keys(weak_side_names)));
  app.add_option("--depolarize", o.depolarize, "Depolarizing probability of the honest source");
  app.add_option("--strong-intensity", o.strong_intensity, "Strong pulse intensity, units of I_th");
  app.add_option("--single-blind-intensity", o.single_blind_intensity,
                 "Pulse intensity forwarded in single blinding, units of I_th");
  app.add_option("--theta-a", o.theta_a, "Alice's analyzer settings (overrides protocol default)");
  app.add_option("--theta-b", o.theta_b, "Bob's analyzer settings (overrides protocol default)");
  app.add_option("--workers", o.workers, "Simulation threads (0 = hardware concurrency)");
  app.add_option("--out", o.out, "Output path, - for stdout");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

ScenarioConfig scenario_config(const RunOptions& o) {
  ScenarioConfig s;
  s.kind = scenario_names.at(o.scenario);
  if (!o.alpha.empty()) s.alpha = parse_angle(o.alpha, "alpha");
  s.weak_side_policy = weak_side_names.at(o.weak_side);
  s.depolarize_prob = o.depolarize;
  s.strong_intensity = o.strong_intensity;
  s.single_blind_intensity = o.single_blind_intensity;
  return s;
}

ProtocolConfig protocol_config(const RunOptions& o) {
  if (o.rounds < 1) throw DomainError("rounds", "must be at least 1");
  auto p = ProtocolConfig::defaults(protocol_names.at(o.protocol), static_cast<std::uint64_t>(o.rounds), o.seed);
  if (!o.theta_a.empty()) {
    p.alice_settings.clear();
    for (const auto& t : o.theta_a) p.alice_settings.emplace_back(parse_angle(t, "theta-a"));
  }
  if (!o.theta_b.empty()) {
    p.bob_settings.clear();
    for (const auto& t : o.theta_b) p.bob_settings.emplace_back(parse_angle(t, "theta-b"));
  }
  return p;
}

void check_significance(double s) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("significance", "must lie in (0, 1)");
}

// Writes to `path`, or to `out` when path is "-".
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path == "-") {
    fn(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("out", "cannot open '" + path + "' for writing");
  fn(f);
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  const auto scenario = scenario_config(o);
  const auto protocol = protocol_config(o);
  check_significance(o.significance);
  validate(protocol, scenario);
  const auto records = run_session(protocol, scenario, o.workers);
  const auto summary = session_summary(
      {.protocol = protocol, .scenario = scenario, .emitted_known = !o.hide_emitted,
       .significance = o.significance},
      records);
  emit(o.out, out, [&](std::ostream& os) {
    if (o.format == "csv") write_flat_csv(os, summary);
    else os << summary.dump(2) << '\n';
  });
  if (!o.records.empty())
    emit(o.records, out, [&](std::ostream& os) { write_records_csv(os, records, o.eve_view); });
  return exit_ok;
}

std::vector<double> make_grid(const SweepOptions& s, double default_start, double default_stop,
                              double default_step) {
  const double start = s.start.empty() ? default_start : parse_angle(s.start, "start");
  const double stop = s.stop.empty() ? default_stop : parse_angle(s.stop, "stop");
  const double step = s.step.empty() ? default_step : parse_angle(s.step, "step");
  if (!(step > 0.0) || !(stop >= start))
    throw DomainError("grid", "empty or non-monotone grid");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid.push_back(start + static_cast<double>(i) * step);
  return grid;
}

Json delta_sweep(const RunOptions& o, const SweepOptions& s) {
  const auto grid = make_grid(s, 0.0, pi / 2, pi / 36);
  const auto scenario = scenario_config(o);
  Json rows = Json::array();
  for (double delta : grid) {
    auto protocol = protocol_config(o);
    protocol.alice_settings = {PolarizationAngle(0.0)};
    protocol.bob_settings = {PolarizationAngle(delta)};
    const auto records = run_session(protocol, scenario, o.workers);
    const auto est = estimate_correlation(records.rounds, protocol.alice_settings[0],
                                          protocol.bob_settings[0]);
    const double reduced = reduce_difference(delta);
    std::optional<double> oracle;
    switch (scenario.kind) {
    case ScenarioKind::HonestSinglet: oracle = oracle_corr_singlet(reduced, scenario.depolarize_prob); break;
    case ScenarioKind::DoubleBlindBBM92: oracle = oracle_corr_bbm92(reduced); break;
    case ScenarioKind::DoubleBlindEkert: oracle = oracle_corr_ekert(reduced, scenario.alpha); break;
    case ScenarioKind::SingleBlinding: break;
    }
    Json r;
    r["delta"] = delta;
    r["estimate"] = est.value ? Json(*est.value) : Json(nullptr);
    r["stderr"] = est.std_error ? Json(*est.std_error) : Json(nullptr);
    r["coincidences"] = est.coincidences();
    r["oracle"] = oracle ? Json(*oracle) : Json(nullptr);
    rows.push_back(std::move(r));
  }
  return rows;
}

Json alpha_sweep(const RunOptions& o, const SweepOptions& s) {
  if (scenario_names.at(o.scenario) != ScenarioKind::DoubleBlindEkert)
    throw DomainError("scenario", "the alpha axis requires double-ekert");
  const auto grid = make_grid(s, 0.1, 0.7, 0.05);
  Json rows = Json::array();
  for (double alpha : grid) {
    auto scenario = scenario_config(o);
    scenario.alpha = alpha;
    const auto protocol = protocol_config(o);
    validate(protocol, scenario);
    const auto records = run_session(protocol, scenario, o.workers);
    const auto eff = estimate_efficiencies(records.rounds, protocol.rounds);
    auto val = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    Json r;
    r["alpha"] = alpha;
    r["weak_rate"] = val(eff.weak_side_rate);
    r["weak_rate_stderr"] = val(eff.weak_side_std_error);
    r["weak_rate_oracle"] = oracle_weak_detection_prob(alpha);
    r["eta"] = val(eff.eta);
    r["eta_stderr"] = val(eff.eta_std_error);
    r["eta_oracle"] = oracle_eta(alpha);
    r["eta_21"] = val(eff.eta_21);
    r["eta_21_stderr"] = val(eff.eta_21_std_error);
    r["eta_21_oracle"] = oracle_eta_conditional(alpha);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_rows_csv(std::ostream& os, const Json& rows) {
  if (rows.empty()) return;
  bool first = true;
  for (const auto& [k, v] : rows.front().items()) {
    os << (first ? "" : ",") << k;
    first = false;
  }
  os << '\n';
  for (const auto& row : rows) {
    first = true;
    for (const auto& [k, v] : row.items()) {
      os << (first ? "" : ",");
      if (!v.is_null()) os << v.dump();
      first = false;
    }
    os << '\n';
  }
}

int cmd_sweep(RunOptions o, const SweepOptions& s, bool format_given, std::ostream& out) {
  if (!format_given) o.format = "csv";
  const Json rows = s.axis == "alpha" ? alpha_sweep(o, s) : delta_sweep(o, s);
  emit(o.out, out, [&](std::ostream& os) {
    if (o.format == "json") os << rows.dump(2) << '\n';
    else write_rows_csv(os, rows);
  });
  return exit_ok;
}

int cmd_bounds(const BoundsOptions& b, std::ostream& out) {
  if (b.eta.empty() && b.eta_21.empty())
    throw DomainError("eta", "give at least one --eta or --eta21 value");
  const double qm_max = 2.0 * std::numbers::sqrt2;
  Json rows = Json::array();
  auto row = [&](const char* kind, double value, std::optional<double> bound) {
    Json r;
    r["kind"] = kind;
    r["value"] = value;
    r["bound"] = bound ? Json(*bound) : Json(nullptr);
    if (!bound) r["verdict"] = "out-of-domain";
    else if (*bound >= qm_max - 1e-12) r["verdict"] = "attack feasible at S = 2√2";
    else r["verdict"] = "violation certifiable";
    rows.push_back(std::move(r));
  };
  for (double v : b.eta) row("eta", v, chsh_bound_detection(v));
  for (double v : b.eta_21) row("eta_21", v, chsh_bound_conditional(v));
  emit(b.out, out, [&](std::ostream& os) {
    if (b.format == "json") {
      os << rows.dump(2) << '\n';
      return;
    }
    os << "kind,value,bound,verdict\n";
    for (const auto& r : rows)
      os << r["kind"].get<std::string>() << ',' << r["value"].dump() << ','
         << (r["bound"].is_null() ? "" : r["bound"].dump()) << ','
         << r["verdict"].get<std::string>() << '\n';
  });
  return exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Double blinding-attack simulator for entanglement-based QKD", "dblind"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Simulate one session and write a JSON summary");
  add_session_options(*run, run_opts);
  run->add_option("--records", run_opts.records, "Write the per-round CSV dump here");
  run->add_flag("--eve-view", run_opts.eve_view, "Include lambda and Eve's predictions in the dump");
  run->add_flag("--hide-emitted", run_opts.hide_emitted,
                "Treat the number of emitted pairs as unknown (eta unavailable)");
  run->add_option("--significance", run_opts.significance, "Fair-sampling test level");

  RunOptions sweep_opts;
  SweepOptions sweep_axis;
  auto* sweep = app.add_subcommand("sweep", "Sweep the setting difference or alpha");
  add_session_options(*sweep, sweep_opts);
  sweep->add_option("--axis", sweep_axis.axis, "delta or alpha")
      ->check(CLI::IsMember({"delta", "alpha"}));
  sweep->add_option("--start", sweep_axis.start, "First grid point");
  sweep->add_option("--stop", sweep_axis.stop, "Last grid point (inclusive)");
  sweep->add_option("--step", sweep_axis.step, "Grid spacing");

  BoundsOptions bounds_opts;
  auto* bounds = app.add_subcommand("bounds", "Local-model CHSH bounds at given efficiencies");
  bounds->add_option("--eta", bounds_opts.eta, "Detection efficiencies");
  bounds->add_option("--eta21", bounds_opts.eta_21, "Conditional efficiencies");
  bounds->add_option("--format", bounds_opts.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  bounds->add_option("--out", bounds_opts.out, "Output path, - for stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage_error;
  }

  try {
    if (*run) return cmd_run(run_opts, out);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_axis, sweep->count("--format") > 0, out);
    return cmd_bounds(bounds_opts, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_domain_error;
  }
}

} // namespace dblind::cli
