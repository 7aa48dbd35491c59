// Copyright 2026 The mirrorsqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MIRRORSQKD_CLI_HPP
#define MIRRORSQKD_CLI_HPP

#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mirrorsqkd/scenarios.hpp"

/// Command-line front end: rate, curve, threshold, and validate commands
/// over JSON configs, with machine-readable JSON/CSV reports.
///
/// Exit codes: 0 success (non-negative rate), 1 usage or validation error,
/// 2 negative rate (abort), 3 statistics infeasible under the attack model.
namespace mirrorsqkd::cli {

inline constexpr const char* kToolName = "mirror_keyrate";
inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNegativeRate = 2;
inline constexpr int kExitInfeasible = 3;

using Json = nlohmann::ordered_json;

/// Everything one invocation needs; file values are overridden by flags.
struct RunConfig {
  ScenarioConfig scenario;
  int grid_points = 2001;
  std::uint64_t seed = 0;
  // curve
  double qz_start = 0.0;
  double qz_end = 0.15;
  int steps = 100;
  // threshold
  double tolerance = 1e-4;
  // validate
  std::uint64_t rounds = 1000000;
  int threads = 0;  // 0 = hardware default
  std::optional<ObservedStatistics> explicit_stats;
};

/// Locale-independent decimal rendering at 12 significant digits, the fixed
/// CSV contract.
inline std::string format_double(double v) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v,
                                 std::chars_format::general, 12);
  return std::string(buffer, ptr);
}

namespace detail {

inline std::string model_name(NoiseModel m) {
  switch (m) {
    case NoiseModel::Dependent: return "dependent";
    case NoiseModel::Independent: return "independent";
    case NoiseModel::Explicit:
    default: return "explicit";
  }
}

inline NoiseModel parse_model(const std::string& s) {
  if (s == "dependent") return NoiseModel::Dependent;
  if (s == "independent") return NoiseModel::Independent;
  if (s == "explicit") return NoiseModel::Explicit;
  throw std::invalid_argument("unknown noise model: " + s);
}

inline std::string loss_mode_name(LossMode m) {
  switch (m) {
    case LossMode::None: return "none";
    case LossMode::Explicit: return "explicit";
    case LossMode::Fiber:
    default: return "fiber";
  }
}

inline LossMode parse_loss_mode(const std::string& s) {
  if (s == "none") return LossMode::None;
  if (s == "explicit") return LossMode::Explicit;
  if (s == "fiber") return LossMode::Fiber;
  throw std::invalid_argument("unknown loss mode: " + s);
}

inline std::string db_convention_name(DbConvention c) {
  return c == DbConvention::PaperLiteral ? "paper-literal" : "db-per-10";
}

inline DbConvention parse_db_convention(const std::string& s) {
  if (s == "paper" || s == "paper-literal") return DbConvention::PaperLiteral;
  if (s == "db10" || s == "db-per-10") return DbConvention::DbPer10;
  throw std::invalid_argument("unknown dB convention: " + s);
}

}  // namespace detail

inline Json statistics_to_json(const ObservedStatistics& s) {
  Json j;
  for (const auto& [name, value] : statistics_fields(s)) j[name] = value;
  return j;
}

inline ObservedStatistics statistics_from_json(const Json& j) {
  ObservedStatistics s;
  for (auto& [name, value] : statistics_field_refs(s)) {
    if (!j.contains(name)) {
      throw std::invalid_argument(std::string("statistics: missing field ") + name);
    }
    *value = j.at(name).get<double>();
  }
  return s;
}

inline Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["model"] = detail::model_name(cfg.scenario.model);
  j["qz"] = cfg.scenario.qz;
  j["qx"] = cfg.scenario.qx;
  j["loss_mode"] = detail::loss_mode_name(cfg.scenario.loss_mode);
  j["p_loss_forward"] = cfg.scenario.p_loss_forward;
  j["p_loss_reverse"] = cfg.scenario.p_loss_reverse;
  j["alpha"] = cfg.scenario.alpha;
  j["length_km"] = cfg.scenario.length_km;
  j["db_convention"] = detail::db_convention_name(cfg.scenario.db_convention);
  j["grid_points"] = cfg.grid_points;
  j["seed"] = cfg.seed;
  j["qz_start"] = cfg.qz_start;
  j["qz_end"] = cfg.qz_end;
  j["steps"] = cfg.steps;
  j["tolerance"] = cfg.tolerance;
  j["rounds"] = cfg.rounds;
  if (cfg.explicit_stats) j["statistics"] = statistics_to_json(*cfg.explicit_stats);
  return j;
}

inline void config_from_json(const Json& j, RunConfig& cfg) {
  auto read = [&](const char* key, auto& target) {
    if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
  };
  if (j.contains("model")) cfg.scenario.model = detail::parse_model(j.at("model").get<std::string>());
  read("qz", cfg.scenario.qz);
  read("qx", cfg.scenario.qx);
  if (j.contains("loss_mode")) {
    cfg.scenario.loss_mode = detail::parse_loss_mode(j.at("loss_mode").get<std::string>());
  }
  read("p_loss_forward", cfg.scenario.p_loss_forward);
  read("p_loss_reverse", cfg.scenario.p_loss_reverse);
  read("alpha", cfg.scenario.alpha);
  read("length_km", cfg.scenario.length_km);
  if (j.contains("db_convention")) {
    cfg.scenario.db_convention =
        detail::parse_db_convention(j.at("db_convention").get<std::string>());
  }
  read("grid_points", cfg.grid_points);
  read("seed", cfg.seed);
  read("qz_start", cfg.qz_start);
  read("qz_end", cfg.qz_end);
  read("steps", cfg.steps);
  read("tolerance", cfg.tolerance);
  read("rounds", cfg.rounds);
  read("threads", cfg.threads);
  if (j.contains("statistics")) cfg.explicit_stats = statistics_from_json(j.at("statistics"));
}

inline Json keyrate_to_json(const KeyRateResult& kr) {
  Json j;
  j["feasible"] = kr.feasible;
  if (kr.feasible) {
    j["rate"] = kr.rate;
    j["sae_lower"] = kr.sae_lower;
    j["h_a_given_b"] = kr.h_a_given_b;
    j["argmin_re03"] = kr.argmin_re03;
    j["argmin_re12"] = kr.argmin_re12;
    j["lambda1"] = kr.lambda1;
    j["lambda2"] = kr.lambda2;
  }
  return j;
}

/// Self-describing run record: echoing the config reproduces the run
/// bit-identically (modulo wall time).
inline Json make_report(const std::string& command, const RunConfig& cfg, Json result,
                        const ObservedStatistics* stats_used, double wall_time_s) {
  Json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["config"] = config_to_json(cfg);
  if (stats_used != nullptr) j["statistics"] = statistics_to_json(*stats_used);
  j["result"] = std::move(result);
  j["wall_time_s"] = wall_time_s;
  return j;
}

inline void write_output_file(const std::string& path, const std::string& content,
                              std::ostream& err) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    err << "error: cannot open output file " << path << "\n";
    throw std::runtime_error("cannot open output file");
  }
  file << content;
}

/// CSV for curve rows: fixed column order, 12 significant digits.
inline std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
  std::string csv =
      "qz,qx,rate,rate_throughput_weighted,bb84_rate,sae_lower,h_a_given_b,feasible\n";
  for (const CurvePoint& p : curve) {
    csv += format_double(p.qz) + ',' + format_double(p.qx) + ',' + format_double(p.rate) + ',' +
           format_double(p.rate_throughput_weighted) + ',' + format_double(p.bb84_rate) + ',' +
           format_double(p.sae_lower) + ',' + format_double(p.h_a_given_b) + ',' +
           (p.feasible ? '1' : '0') + '\n';
  }
  return csv;
}

namespace detail {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

inline int cmd_rate(const RunConfig& cfg, const std::string& out_path, std::ostream& out,
                    std::ostream& err) {
  Timer timer;
  ObservedStatistics stats;
  if (cfg.explicit_stats) {
    stats = *cfg.explicit_stats;
    stats.validate();
  } else {
    stats = closed_form_statistics(cfg.scenario);
  }
  const KeyRateResult kr = key_rate(stats, cfg.grid_points);

  out << "command: rate\n";
  if (!kr.feasible) {
    out << "feasible: no (statistics are inconsistent with any attack under the model)\n";
  } else {
    out << "feasible: yes\n"
        << "sae_lower = " << format_double(kr.sae_lower) << " bits\n"
        << "h_a_given_b = " << format_double(kr.h_a_given_b) << " bits\n"
        << "rate = " << format_double(kr.rate) << " bits per raw-key round\n"
        << "argmin_re03 = " << format_double(kr.argmin_re03)
        << "  argmin_re12 = " << format_double(kr.argmin_re12) << "\n"
        << "lambda1 = " << format_double(kr.lambda1)
        << "  lambda2 = " << format_double(kr.lambda2) << "\n";
  }
  if (!out_path.empty()) {
    const Json report = make_report("rate", cfg, keyrate_to_json(kr), &stats, timer.seconds());
    write_output_file(out_path, report.dump(2) + "\n", err);
  }
  if (!kr.feasible) return kExitInfeasible;
  return kr.rate >= 0.0 ? kExitOk : kExitNegativeRate;
}

inline int cmd_curve(const RunConfig& cfg, const std::string& out_path, std::ostream& out,
                     std::ostream& err) {
  const auto curve = sweep_curve(cfg.scenario, cfg.qz_start, cfg.qz_end, cfg.steps,
                                 cfg.grid_points);
  const std::string csv = curve_to_csv(curve);
  out << csv;
  if (!out_path.empty()) write_output_file(out_path, csv, err);
  return kExitOk;
}

inline int cmd_threshold(const RunConfig& cfg, const std::string& out_path, std::ostream& out,
                         std::ostream& err) {
  Timer timer;
  const ThresholdResult th = find_threshold(cfg.scenario, cfg.tolerance, cfg.grid_points);
  out << "command: threshold\n"
      << "model: " << model_name(cfg.scenario.model) << "\n"
      << "threshold_qz = " << format_double(th.qz) << " (tolerance " << format_double(cfg.tolerance)
      << ", bracket [" << format_double(th.qz_low) << ", " << format_double(th.qz_high) << "])\n";
  if (!out_path.empty()) {
    Json result;
    result["threshold_qz"] = th.qz;
    result["qz_low"] = th.qz_low;
    result["qz_high"] = th.qz_high;
    result["iterations"] = th.iterations;
    result["tolerance"] = cfg.tolerance;
    const Json report = make_report("threshold", cfg, std::move(result), nullptr, timer.seconds());
    write_output_file(out_path, report.dump(2) + "\n", err);
  }
  return kExitOk;
}

inline int cmd_validate(const RunConfig& cfg, const std::string& out_path, std::ostream& out,
                        std::ostream& err) {
  Timer timer;
  const NoiseChannelSpec spec = cfg.scenario.to_channel_spec();
  auto [first, second] = build_depolarizing_attack(spec);
  const auto [analytic, vecs] = analytic_statistics(first, second);
  const MonteCarloResult mc =
      monte_carlo_statistics(first, second, cfg.rounds, cfg.seed, {}, cfg.threads);

  const auto analytic_fields = statistics_fields(analytic);
  const auto value_fields = statistics_fields(mc.values);
  const auto error_fields = statistics_fields(mc.standard_errors);

  bool all_pass = true;
  Json rows = Json::array();
  out << "command: validate (Monte Carlo vs analytic, " << cfg.rounds << " rounds, seed "
      << cfg.seed << ")\n";
  out << "field          analytic        estimate        std_error       z      verdict\n";
  for (std::size_t i = 0; i < analytic_fields.size(); ++i) {
    const double expect = analytic_fields[i].second;
    const double got = value_fields[i].second;
    const double se = error_fields[i].second;
    const double z = std::isinf(se) ? 0.0 : std::abs(got - expect) / (se > 0.0 ? se : 1.0);
    const bool pass = z <= 5.0;
    all_pass = all_pass && pass;
    char line[160];
    std::snprintf(line, sizeof(line), "%-14s %-15.9g %-15.9g %-15.9g %-6.2f %s\n",
                  analytic_fields[i].first, expect, got, se, z, pass ? "PASS" : "FAIL");
    out << line;
    Json row;
    row["field"] = analytic_fields[i].first;
    row["analytic"] = expect;
    row["estimate"] = got;
    row["std_error"] = se;
    row["z"] = z;
    row["pass"] = pass;
    rows.push_back(std::move(row));
  }
  out << (all_pass ? "all fields PASS at 5 sigma\n" : "some fields FAIL at 5 sigma\n");
  if (!out_path.empty()) {
    Json result;
    result["fields"] = std::move(rows);
    result["all_pass"] = all_pass;
    result["rounds"] = cfg.rounds;
    const Json report = make_report("validate", cfg, std::move(result), &analytic, timer.seconds());
    write_output_file(out_path, report.dump(2) + "\n", err);
  }
  return all_pass ? kExitOk : kExitUsage;
}

}  // namespace detail

/// Parses arguments (excluding the program name) and runs one command.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mirror-protocol key-rate calculator under collective attacks"};
  app.require_subcommand(1);

  struct FlagValues {
    std::string config_path;
    std::string out_path;
    std::string model;
    std::string loss_mode;
    std::string db_convention;
    double qz = 0, qx = 0, loss_forward = 0, loss_reverse = 0, alpha = 0, length_km = 0;
    double qz_start = 0, qz_end = 0, tolerance = 0;
    int grid = 0, steps = 0, threads = 0;
    std::uint64_t seed = 0, rounds = 0;
  } flags;

  auto add_shared = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "JSON config file; flags override its values");
    cmd->add_option("--seed", flags.seed, "RNG seed (default 0; never wall-clock)");
    cmd->add_option("--grid", flags.grid, "grid points for the entropy minimization");
    cmd->add_option("--out", flags.out_path, "write the machine-readable report here");
    cmd->add_option("--db-convention", flags.db_convention,
                    "fiber-loss exponent convention: paper | db10");
    cmd->add_option("--model", flags.model, "noise model: dependent | independent | explicit");
    cmd->add_option("--qz", flags.qz, "raw-key error rate");
    cmd->add_option("--qx", flags.qx, "test-round error rate (explicit model only)");
    cmd->add_option("--loss-mode", flags.loss_mode, "loss model: none | explicit | fiber");
    cmd->add_option("--loss-forward", flags.loss_forward, "forward-channel loss probability");
    cmd->add_option("--loss-reverse", flags.loss_reverse, "reverse-channel loss probability");
    cmd->add_option("--alpha", flags.alpha, "fiber loss coefficient (dB/km)");
    cmd->add_option("--length-km", flags.length_km, "fiber length (km)");
  };

  CLI::App* rate = app.add_subcommand("rate", "compute the key rate for one configuration");
  add_shared(rate);
  CLI::App* curve = app.add_subcommand("curve", "sweep the key rate over a qz range (CSV)");
  add_shared(curve);
  curve->add_option("--qz-start", flags.qz_start, "first qz of the sweep");
  curve->add_option("--qz-end", flags.qz_end, "last qz of the sweep");
  curve->add_option("--steps", flags.steps, "number of sweep points");
  CLI::App* threshold = app.add_subcommand("threshold", "bisect for the zero-rate noise level");
  add_shared(threshold);
  threshold->add_option("--tolerance", flags.tolerance, "bisection tolerance on qz");
  CLI::App* validate =
      app.add_subcommand("validate", "Monte Carlo cross-check of the analytic statistics");
  add_shared(validate);
  validate->add_option("--rounds", flags.rounds, "Monte Carlo rounds");
  validate->add_option("--threads", flags.threads, "worker threads (0 = hardware)");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back(kToolName);
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    RunConfig cfg;
    if (cmd->count("--config") > 0) {
      std::ifstream file(flags.config_path);
      if (!file) {
        err << "error: cannot read config file " << flags.config_path << "\n";
        return kExitUsage;
      }
      Json j = Json::parse(file);
      config_from_json(j, cfg);
    }
    auto overridden = [&](const char* name) {
      const CLI::Option* opt = cmd->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (overridden("--model")) cfg.scenario.model = detail::parse_model(flags.model);
    if (overridden("--qz")) cfg.scenario.qz = flags.qz;
    if (overridden("--qx")) cfg.scenario.qx = flags.qx;
    if (overridden("--loss-mode")) cfg.scenario.loss_mode = detail::parse_loss_mode(flags.loss_mode);
    if (overridden("--loss-forward")) cfg.scenario.p_loss_forward = flags.loss_forward;
    if (overridden("--loss-reverse")) cfg.scenario.p_loss_reverse = flags.loss_reverse;
    if (overridden("--alpha")) cfg.scenario.alpha = flags.alpha;
    if (overridden("--length-km")) cfg.scenario.length_km = flags.length_km;
    if (overridden("--db-convention")) {
      cfg.scenario.db_convention = detail::parse_db_convention(flags.db_convention);
    }
    if (overridden("--grid")) cfg.grid_points = flags.grid;
    if (overridden("--seed")) cfg.seed = flags.seed;
    if (overridden("--qz-start")) cfg.qz_start = flags.qz_start;
    if (overridden("--qz-end")) cfg.qz_end = flags.qz_end;
    if (overridden("--steps")) cfg.steps = flags.steps;
    if (overridden("--tolerance")) cfg.tolerance = flags.tolerance;
    if (overridden("--rounds")) cfg.rounds = flags.rounds;
    if (overridden("--threads")) cfg.threads = flags.threads;

    if (cmd == rate) return detail::cmd_rate(cfg, flags.out_path, out, err);
    if (cmd == curve) return detail::cmd_curve(cfg, flags.out_path, out, err);
    if (cmd == threshold) return detail::cmd_threshold(cfg, flags.out_path, out, err);
    return detail::cmd_validate(cfg, flags.out_path, out, err);
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace mirrorsqkd::cli

#endif  // MIRRORSQKD_CLI_HPP
