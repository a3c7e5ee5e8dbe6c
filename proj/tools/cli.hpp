/*
 * Copyright 2026 The ofdma-maxmin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Command-line front end. Kept in a header so the tests can drive it
// in-process with captured streams.
//
// Exit codes: 0 success, 2 input error, 3 solver failure or infeasible verdict.

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ofdma.hpp"

namespace ofdma::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;

namespace detail {

inline void init_logging() {
  static const bool once = [] {
    auto logger = spdlog::stderr_logger_mt("maxmin");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("MAXMIN_LOG")) {
      spdlog::set_level(spdlog::level::from_str(env));
    }
    return true;
  }();
  (void)once;
}

inline std::string join(const std::vector<double>& v, bool display) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += display ? format_display(v[i]) : format_double(v[i]);
  }
  return s;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("file", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json manifest(const std::string& command, const std::string& fingerprint_source,
                               std::uint64_t seed) {
  return {{"command", command},
          {"config_hash", io::hex64(io::fnv1a64(fingerprint_source))},
          {"seed", seed},
          {"rng", std::string(rng::kAlgorithm)},
          {"tool_version", kVersion},
          {"timestamp", utc_timestamp()}};
}

inline void add_manifest(io::AtomicBundle& bundle, const nlohmann::json& m) {
  bundle.add("manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
}

struct Args {
  std::string input;
  std::string weights;
  std::string desired;
  std::string rmin;
  std::string out_dir;
  std::string dump_tableau;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t threads = 0;
};

inline int cmd_solve(const Args& a, std::ostream& out) {
  const RateMatrix r = io::load_rates(a.input);
  const std::vector<double> w =
      a.weights.empty() ? std::vector<double>(r.n_users(), 1.0) : io::parse_list(a.weights, "weights");
  const WeightVector weights(w);
  if (weights.size() != r.n_users()) {
    throw InputError("weights", "expected " + std::to_string(r.n_users()) + " weights, got " +
                                    std::to_string(weights.size()));
  }
  lp::Options options;
  std::ofstream dump;
  if (!a.dump_tableau.empty()) {
    dump.open(a.dump_tableau);
    if (!dump) throw InputError("dump-tableau", "cannot write " + a.dump_tableau);
    options.tableau_dump = &dump;
  }
  spdlog::info("solving {} users x {} bins", r.n_users(), r.n_bins());
  const MaxMinResult res = solve_maxmin(r, weights, options);
  out << "status=" << lp::to_string(res.status) << '\n';
  if (res.status != lp::Status::Optimal) return kExitSolver;
  out << "c=" << format_display(res.c) << '\n';
  out << "rates=" << join(res.user_rates, true) << '\n';
  io::write_allocation_csv(out, res.allocation);

  if (!a.out_dir.empty()) {
    io::AtomicBundle bundle(a.out_dir);
    bundle.add("allocation.csv", [&](std::ostream& os) { io::write_allocation_csv(os, res.allocation); });
    bundle.add("rates.csv", [&](std::ostream& os) {
      os << "# user: index; rate: total rate (bits/use); weighted: gamma * rate\n";
      os << "user,rate,weighted\n";
      for (std::size_t n = 0; n < res.user_rates.size(); ++n) {
        os << n << ',' << format_double(res.user_rates[n]) << ','
           << format_double(weights[n] * res.user_rates[n]) << '\n';
      }
    });
    add_manifest(bundle, manifest("solve", read_file(a.input) + "|" + a.weights, 0));
    bundle.commit();
  }
  if (res.zero_rate_user) {
    spdlog::warn("a user has zero rate on every bin; the max-min value is 0");
    return kExitSolver;
  }
  return kExitOk;
}

inline int cmd_two_user(const Args& a, std::ostream& out) {
  const RateMatrix r = io::load_rates(a.input);
  if (r.n_users() != 2) {
    throw InputError("channel_file", "two-user solver needs exactly 2 users, got " + std::to_string(r.n_users()));
  }
  TwoUserInstance inst;
  const auto row1 = r.values().row(0);
  const auto row2 = r.values().row(1);
  inst.r1.assign(row1.begin(), row1.end());
  inst.r2.assign(row2.begin(), row2.end());
  inst.gamma = a.gamma;
  const TwoUserSolution sol = solve_two_user(inst);

  auto fixed2 = [](double v) {
    if (std::isinf(v)) return std::string("inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto sig3 = [](double v) {
    if (std::isinf(v)) return std::string("inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%#.3g", v);
    return std::string(buf);
  };
  out << "k,bin,R1,R2,L,A,B,Gamma\n";
  for (std::size_t i = 0; i < sol.sorted.permutation.size(); ++i) {
    const std::size_t bin = sol.sorted.permutation[i];
    out << i + 1 << ',' << bin + 1 << ',' << format_display(inst.r1[bin]) << ','
        << format_display(inst.r2[bin]) << ',' << fixed2(sol.sorted.ratio[i]) << ','
        << format_display(sol.thresholds.a[i]) << ',' << format_display(sol.thresholds.b[i]) << ','
        << sig3(sol.thresholds.threshold[i]) << '\n';
  }
  if (!sol.sorted.permutation.empty()) out << "k_min=" << sol.k_min + 1 << '\n';
  out << "alpha_split=" << format_display(sol.alpha_split) << '\n';
  out << "rates=" << format_display(sol.rate1) << ',' << format_display(sol.rate2) << '\n';
  out << "c=" << format_display(sol.c) << '\n';

  if (!a.out_dir.empty()) {
    io::AtomicBundle bundle(a.out_dir);
    bundle.add("allocation.csv", [&](std::ostream& os) {
      AllocationMatrix alloc{Matrix(2, inst.r1.size())};
      for (std::size_t k = 0; k < inst.r1.size(); ++k) {
        alloc.alpha(0, k) = sol.alpha[k];
        alloc.alpha(1, k) = 1.0 - sol.alpha[k];
      }
      io::write_allocation_csv(os, alloc);
    });
    add_manifest(bundle, manifest("two-user", read_file(a.input) + "|" + format_double(a.gamma), 0));
    bundle.commit();
  }
  return kExitOk;
}

inline int cmd_feasible(const Args& a, std::ostream& out) {
  const RateMatrix r = io::load_rates(a.input);
  if (a.desired.empty()) throw InputError("desired", "required");
  const FeasibilityResult res = check_feasibility(r, io::parse_list(a.desired, "desired"));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s c=%.3f", res.feasible ? "feasible" : "infeasible", res.c);
  out << buf << '\n';
  out << "rates=" << join(res.user_rates, true) << '\n';
  return res.feasible ? kExitOk : kExitSolver;
}

// --rmin lists one entry per user: a number makes the user a voice user with
// that floor, '-' makes it a data user (weight from --weights, default 1).
inline int cmd_mixed(const Args& a, std::ostream& out) {
  const RateMatrix r = io::load_rates(a.input);
  if (a.rmin.empty()) throw InputError("rmin", "required");
  const auto tokens = io::detail::split(a.rmin, ',');
  if (tokens.size() != r.n_users()) {
    throw InputError("rmin", "expected " + std::to_string(r.n_users()) + " entries");
  }
  const std::vector<double> w =
      a.weights.empty() ? std::vector<double>(r.n_users(), 1.0) : io::parse_list(a.weights, "weights");
  if (w.size() != r.n_users()) throw InputError("weights", "expected one weight per user");
  ServiceProfile profile;
  for (std::size_t n = 0; n < tokens.size(); ++n) {
    if (io::detail::trim(tokens[n]) == "-") {
      profile.data.push_back({n, w[n]});
    } else {
      profile.voice.push_back({n, io::detail::parse_double(tokens[n], "rmin")});
    }
  }
  const MixedResult res = solve_mixed(r, profile);
  if (res.status == MixedStatus::VoiceInfeasible) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "status=voice_infeasible voice_margin=%.3f", res.voice_margin);
    out << buf << '\n';
    return kExitSolver;
  }
  out << "status=feasible\n";
  out << "c=" << format_display(res.c) << '\n';
  out << "rates=" << join(res.user_rates, true) << '\n';
  io::write_allocation_csv(out, res.allocation);
  return kExitOk;
}

inline int cmd_simulate(const Args& a, const std::vector<std::string>& overrides, std::ostream& out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(a.input));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config", e.what());
  }
  io::SimJob job = io::parse_sim_config(j);
  for (const auto& o : overrides) {
    if (o == "seed") job.config.rng_seed = a.seed;
    if (o == "trials") job.config.n_trials = a.trials;
    if (o == "threads") job.config.threads = a.threads;
  }
  job.config.validate();
  spdlog::info("simulating {} gamma points x {} trials", job.config.gamma_grid.size(), job.config.n_trials);

  const auto started = std::chrono::steady_clock::now();
  const sim::SimResult res =
      job.which == io::SimCase::Case1 ? sim::run_case1(job.config) : sim::run_case2(job.config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::string dir = a.out_dir.empty() ? "." : a.out_dir;
  io::AtomicBundle bundle(dir);
  bundle.add("trials.csv", [&](std::ostream& os) { sim::write_trials_csv(os, job.config, res); });
  bundle.add("outage.csv", [&](std::ostream& os) { sim::write_outage_csv(os, job.config, res); });
  bundle.add("hist.csv", [&](std::ostream& os) { sim::write_hist_csv(os, job.config, res); });
  bundle.add("averages.csv", [&](std::ostream& os) { sim::write_averages_csv(os, job.config, res); });
  add_manifest(bundle, manifest("simulate", io::to_json(job).dump(), job.config.rng_seed));
  bundle.commit();

  out << "trials=" << res.trials.size() << '\n';
  out << "max_ray_deviation=" << format_display(res.max_ray_deviation) << '\n';
  out << "max_weighted_spread=" << format_display(res.max_weighted_spread) << '\n';
  out << "seconds=" << format_display(seconds) << '\n';
  out << "out_dir=" << dir << '\n';
  return kExitOk;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  detail::init_logging();
  CLI::App app{"Weighted max-min OFDMA subcarrier allocation", "maxmin"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  detail::Args a;

  auto* solve = app.add_subcommand("solve", "Weighted max-min allocation via linear programming");
  solve->add_option("channel_file", a.input, "Rate CSV or channel JSON")->required();
  solve->add_option("--weights", a.weights, "Comma-separated per-user weights (default all 1)");
  solve->add_option("--out-dir", a.out_dir, "Write allocation.csv, rates.csv and manifest.json here");
  solve->add_option("--dump-tableau", a.dump_tableau, "Write the final simplex tableau as CSV");

  auto* two = app.add_subcommand("two-user", "Sort-and-threshold two-user solver");
  two->add_option("channel_file", a.input, "Rate CSV or channel JSON with 2 users")->required();
  two->add_option("--gamma", a.gamma, "Weight of user 2 (user 1 has weight 1)")->check(CLI::PositiveNumber);
  two->add_option("--out-dir", a.out_dir, "Write allocation.csv and manifest.json here");

  auto* feasible = app.add_subcommand("feasible", "Test whether a rate vector is achievable");
  feasible->add_option("channel_file", a.input, "Rate CSV or channel JSON")->required();
  feasible->add_option("--desired", a.desired, "Comma-separated desired rates")->required();

  auto* mixed = app.add_subcommand("mixed", "Voice floors plus weighted max-min for data users");
  mixed->add_option("channel_file", a.input, "Rate CSV or channel JSON")->required();
  mixed->add_option("--rmin", a.rmin, "Per user: voice rate floor, or '-' for a data user")->required();
  mixed->add_option("--weights", a.weights, "Per-user weights (used for data users)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo fading simulation");
  simulate->add_option("config_file", a.input, "Simulation config JSON")->required();
  simulate->add_option("--seed", a.seed, "Override rng_seed");
  simulate->add_option("--trials", a.trials, "Override n_trials")->check(CLI::PositiveNumber);
  simulate->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--out-dir", a.out_dir, "Output directory (default .)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (solve->parsed()) return detail::cmd_solve(a, out);
    if (two->parsed()) return detail::cmd_two_user(a, out);
    if (feasible->parsed()) return detail::cmd_feasible(a, out);
    if (mixed->parsed()) return detail::cmd_mixed(a, out);
    if (simulate->parsed()) {
      std::vector<std::string> overrides;
      for (const char* name : {"seed", "trials", "threads"}) {
        if (simulate->count(std::string("--") + name) > 0) overrides.emplace_back(name);
      }
      return detail::cmd_simulate(a, overrides, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace ofdma::cli
