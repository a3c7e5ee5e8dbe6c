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

// Monte Carlo harness over i.i.d. Rayleigh block-fading channels.
//
// Each (gamma index, trial) pair draws its own channel from a SplitMix64
// stream keyed by (seed, gamma index, trial), so results do not depend on how
// trials are scheduled across threads. Data users are drawn before voice
// users; a scenario that only adds voice users leaves the data draws intact.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ofdma/error.hpp"
#include "ofdma/format.hpp"
#include "ofdma/maxmin.hpp"
#include "ofdma/rates.hpp"
#include "ofdma/rng.hpp"
#include "ofdma/services.hpp"

namespace ofdma::sim {

enum class GroupKind { Voice, Data };

struct GroupSpec {
  std::string name;
  std::size_t size = 1;
  double snr_db = 0.0;
  GroupKind kind = GroupKind::Data;
  // Data groups: base weight multiplied into the sweep weight (1 by default).
  // Voice groups: per-user rate floor R_min.
  double weight_or_rmin = 1.0;
};

struct SimConfig {
  std::size_t n_bins = 64;
  std::vector<GroupSpec> groups;
  std::vector<double> gamma_grid;
  std::size_t n_trials = 10000;
  std::vector<double> outage_probs;
  std::uint64_t rng_seed = 0;
  std::size_t histogram_bins = 40;
  // Worker threads; 0 picks std::thread::hardware_concurrency().
  std::size_t threads = 0;

  std::size_t count(GroupKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        groups.begin(), groups.end(), [&](const GroupSpec& g) { return g.kind == kind; }));
  }

  void validate() const {
    if (n_bins == 0) throw InputError("n_bins", "must be >= 1");
    if (n_trials == 0) throw InputError("n_trials", "must be >= 1");
    if (groups.empty()) throw InputError("groups", "at least one group is required");
    if (histogram_bins == 0) throw InputError("histogram_bins", "must be >= 1");
    for (const auto& g : groups) {
      if (g.size == 0) throw InputError("groups", "group '" + g.name + "' has size 0");
      if (!std::isfinite(g.snr_db)) throw InputError("groups", "group '" + g.name + "' has non-finite SNR");
      if (g.kind == GroupKind::Data && !(g.weight_or_rmin > 0.0 && std::isfinite(g.weight_or_rmin))) {
        throw InputError("groups", "data group '" + g.name + "' needs a finite weight > 0");
      }
      if (g.kind == GroupKind::Voice && !(g.weight_or_rmin >= 0.0 && std::isfinite(g.weight_or_rmin))) {
        throw InputError("groups", "voice group '" + g.name + "' needs a finite rmin >= 0");
      }
    }
    if (gamma_grid.empty()) throw InputError("gamma_grid", "at least one gamma is required");
    for (double g : gamma_grid) {
      if (!(g > 0.0 && g < 1.0)) throw InputError("gamma_grid", "values must lie strictly inside (0, 1)");
    }
    for (double p : outage_probs) {
      if (!(p > 0.0 && p < 1.0)) throw InputError("outage_probs", "values must lie strictly inside (0, 1)");
    }
  }
};

// Users in simulation order: data groups (config order), then voice groups.
struct UserLayout {
  std::vector<std::size_t> group_of_user;
  std::vector<std::size_t> data_groups;   // indices into SimConfig::groups
  std::vector<std::size_t> voice_groups;

  explicit UserLayout(const SimConfig& cfg) {
    for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
      (cfg.groups[g].kind == GroupKind::Data ? data_groups : voice_groups).push_back(g);
    }
    for (auto list : {&data_groups, &voice_groups}) {
      for (std::size_t g : *list) group_of_user.insert(group_of_user.end(), cfg.groups[g].size, g);
    }
  }

  std::size_t n_users() const noexcept { return group_of_user.size(); }
};

// |h|^2 ~ Exp(1) per user and bin; the group SNR is folded into the mask with
// unit noise, so the SNR argument is snr_linear(group) * |h|^2.
inline ChannelRealization draw_channel(const SimConfig& cfg, rng::SplitMix64& gen) {
  const UserLayout layout(cfg);
  ChannelRealization ch{Matrix(layout.n_users(), cfg.n_bins), Matrix(layout.n_users(), cfg.n_bins),
                        Matrix(layout.n_users(), cfg.n_bins, 1.0)};
  for (std::size_t n = 0; n < layout.n_users(); ++n) {
    const double snr = snr_db_to_linear(cfg.groups[layout.group_of_user[n]].snr_db);
    for (std::size_t k = 0; k < cfg.n_bins; ++k) {
      ch.gain(n, k) = gen.exponential();
      ch.psd_mask(n, k) = snr;
    }
  }
  return ch;
}

inline rng::SplitMix64 trial_stream(std::uint64_t seed, std::size_t gamma_index, std::size_t trial) {
  return rng::SplitMix64(rng::derive(seed, {gamma_index, trial}));
}

struct TrialRecord {
  std::size_t gamma_index = 0;
  std::size_t trial = 0;
  double gamma = 0.0;
  std::vector<double> group_totals;  // SimConfig::groups order
  std::vector<double> user_rates;    // UserLayout order
  double c = 0.0;
  bool voice_feasible = true;
  // max_n |gamma_n R_n - c| over data users.
  double weighted_spread = 0.0;
};

struct OutagePoint {
  double gamma = 0.0;
  double p = 0.0;
  std::vector<double> rate;  // one per data group, UserLayout::data_groups order
};

struct OutageSummary {
  std::vector<OutagePoint> points;
};

struct Histogram {
  double gamma = 0.0;
  std::size_t group = 0;
  std::vector<double> edges;  // counts.size() + 1 edges
  std::vector<std::size_t> counts;
};

struct GammaAverage {
  double gamma = 0.0;
  std::vector<double> mean;  // SimConfig::groups order
};

struct SimResult {
  std::vector<TrialRecord> trials;  // gamma-major, then trial
  OutageSummary outage;
  std::vector<GammaAverage> averages;
  std::vector<Histogram> histograms;
  // Largest relative deviation of the group-total ratio of the first two data
  // groups from its weight-implied constant (0 with fewer than two groups).
  double max_ray_deviation = 0.0;
  double max_weighted_spread = 0.0;
};

// Per-user data weight at sweep point gamma: with two data groups the first
// gets gamma and the second 1 - gamma (times their base weights).
inline double data_weight(const SimConfig& cfg, const UserLayout& layout, std::size_t group,
                          double gamma) {
  const double base = cfg.groups[group].weight_or_rmin;
  if (layout.data_groups.size() != 2) return base;
  return group == layout.data_groups[0] ? gamma * base : (1.0 - gamma) * base;
}

// Group-1 total over group-2 total implied by the weights: user rate is
// c / gamma_user, so a group total is size * c / gamma_group.
inline double ray_ratio(const SimConfig& cfg, const UserLayout& layout, double gamma) {
  const std::size_t g1 = layout.data_groups.at(0);
  const std::size_t g2 = layout.data_groups.at(1);
  const double t1 = static_cast<double>(cfg.groups[g1].size) / data_weight(cfg, layout, g1, gamma);
  const double t2 = static_cast<double>(cfg.groups[g2].size) / data_weight(cfg, layout, g2, gamma);
  return t1 / t2;
}

// Empirical per-axis quantile: the sorted value at position floor(p n), so the
// fraction of samples strictly below it is at most p.
inline double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto idx = std::min(values.size() - 1, static_cast<std::size_t>(std::floor(p * static_cast<double>(values.size()))));
  return values[idx];
}

inline Histogram make_histogram(const std::vector<double>& values, std::size_t bins) {
  Histogram h;
  h.counts.assign(bins, 0);
  double lo = values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
  double hi = values.empty() ? 1.0 : *std::max_element(values.begin(), values.end());
  if (hi <= lo) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(i == bins ? hi : lo + width * static_cast<double>(i));
  for (double v : values) {
    auto idx = static_cast<std::size_t>((v - lo) / width);
    h.counts[std::min(idx, bins - 1)]++;
  }
  return h;
}

namespace detail {

enum class Mode { Case1, Case2 };

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline TrialRecord run_trial(const SimConfig& cfg, const UserLayout& layout, Mode mode,
                             std::size_t gamma_index, std::size_t trial) {
  const double gamma = cfg.gamma_grid[gamma_index];
  rng::SplitMix64 gen = trial_stream(cfg.rng_seed, gamma_index, trial);
  const RateMatrix r = compute_rate_matrix(draw_channel(cfg, gen));
  const std::size_t users = layout.n_users();

  TrialRecord rec;
  rec.gamma_index = gamma_index;
  rec.trial = trial;
  rec.gamma = gamma;
  rec.group_totals.assign(cfg.groups.size(), 0.0);
  rec.user_rates.assign(users, 0.0);

  std::vector<double> weight(users, 0.0);
  for (std::size_t n = 0; n < users; ++n) {
    const std::size_t g = layout.group_of_user[n];
    if (cfg.groups[g].kind == GroupKind::Data) weight[n] = data_weight(cfg, layout, g, gamma);
  }

  if (mode == Mode::Case1) {
    const MaxMinResult res = solve_maxmin(r, WeightVector(weight));
    if (res.status != lp::Status::Optimal) throw SolverError("simulation: max-min program not optimal");
    rec.c = res.c;
    rec.user_rates = res.user_rates;
  } else {
    ServiceProfile profile;
    for (std::size_t n = 0; n < users; ++n) {
      const auto& g = cfg.groups[layout.group_of_user[n]];
      if (g.kind == GroupKind::Data) {
        profile.data.push_back({n, weight[n]});
      } else {
        profile.voice.push_back({n, g.weight_or_rmin});
      }
    }
    const MixedResult res = solve_mixed(r, profile);
    if (res.status == MixedStatus::VoiceInfeasible) {
      // Counted as an outage for every reported rate: all totals stay at 0.
      rec.voice_feasible = false;
      return rec;
    }
    rec.c = res.c;
    rec.user_rates = res.user_rates;
  }

  for (std::size_t n = 0; n < users; ++n) {
    rec.group_totals[layout.group_of_user[n]] += rec.user_rates[n];
    if (weight[n] > 0.0) {
      rec.weighted_spread = std::max(rec.weighted_spread, std::abs(weight[n] * rec.user_rates[n] - rec.c));
    }
  }
  return rec;
}

inline SimResult run(const SimConfig& cfg, Mode mode) {
  const UserLayout layout(cfg);
  const std::size_t n_gamma = cfg.gamma_grid.size();
  SimResult out;
  out.trials.resize(n_gamma * cfg.n_trials);
  parallel_for(out.trials.size(), cfg.threads, [&](std::size_t i) {
    out.trials[i] = run_trial(cfg, layout, mode, i / cfg.n_trials, i % cfg.n_trials);
  });

  const bool has_ray = layout.data_groups.size() == 2;
  for (std::size_t gi = 0; gi < n_gamma; ++gi) {
    const double gamma = cfg.gamma_grid[gi];
    const auto first = out.trials.begin() + static_cast<std::ptrdiff_t>(gi * cfg.n_trials);
    const auto last = first + static_cast<std::ptrdiff_t>(cfg.n_trials);

    GammaAverage avg{gamma, std::vector<double>(cfg.groups.size(), 0.0)};
    std::vector<std::vector<double>> totals(cfg.groups.size());
    for (auto it = first; it != last; ++it) {
      for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
        avg.mean[g] += it->group_totals[g];
        totals[g].push_back(it->group_totals[g]);
      }
      out.max_weighted_spread = std::max(out.max_weighted_spread, it->weighted_spread);
      if (has_ray && it->voice_feasible) {
        const double t1 = it->group_totals[layout.data_groups[0]];
        const double t2 = it->group_totals[layout.data_groups[1]];
        if (t2 > 0.0) {
          const double dev = std::abs(t1 / t2 / ray_ratio(cfg, layout, gamma) - 1.0);
          out.max_ray_deviation = std::max(out.max_ray_deviation, dev);
        }
      }
    }
    for (double& m : avg.mean) m /= static_cast<double>(cfg.n_trials);
    out.averages.push_back(std::move(avg));

    for (double p : cfg.outage_probs) {
      OutagePoint pt{gamma, p, {}};
      for (std::size_t g : layout.data_groups) pt.rate.push_back(empirical_quantile(totals[g], p));
      out.outage.points.push_back(std::move(pt));
    }
    for (std::size_t g : layout.data_groups) {
      Histogram h = make_histogram(totals[g], cfg.histogram_bins);
      h.gamma = gamma;
      h.group = g;
      out.histograms.push_back(std::move(h));
    }
  }
  return out;
}

}  // namespace detail

// Two data groups, no voice groups; per-user weights gamma and 1 - gamma.
inline SimResult run_case1(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.count(GroupKind::Data) != 2 || cfg.count(GroupKind::Voice) != 0) {
    throw InputError("groups", "case 1 needs exactly two data groups and no voice group");
  }
  return detail::run(cfg, detail::Mode::Case1);
}

// Voice groups with rate floors plus data groups; a trial whose voice floors
// are infeasible reports zero rate for every group.
inline SimResult run_case2(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.count(GroupKind::Voice) == 0 || cfg.count(GroupKind::Data) == 0) {
    throw InputError("groups", "case 2 needs at least one voice group and one data group");
  }
  return detail::run(cfg, detail::Mode::Case2);
}

// ---------------------------------------------------------------------------
// CSV emitters. Every file starts with one '#' line documenting its columns.

inline std::string group_label(const SimConfig& cfg, std::size_t g) {
  return cfg.groups[g].name.empty() ? "group" + std::to_string(g + 1) : cfg.groups[g].name;
}

inline void write_trials_csv(std::ostream& os, const SimConfig& cfg, const SimResult& res) {
  os << "# trial: index within gamma; gamma: sweep weight; <group>: total rate of each group "
        "(bits/use); c: common weighted rate; voice_feasible: 1 unless voice floors failed\n";
  os << "trial,gamma";
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) os << ',' << group_label(cfg, g);
  os << ",c,voice_feasible\n";
  for (const auto& t : res.trials) {
    os << t.trial << ',' << format_double(t.gamma);
    for (double v : t.group_totals) os << ',' << format_double(v);
    os << ',' << format_double(t.c) << ',' << (t.voice_feasible ? 1 : 0) << '\n';
  }
}

inline void write_outage_csv(std::ostream& os, const SimConfig& cfg, const SimResult& res) {
  const UserLayout layout(cfg);
  os << "# gamma: sweep weight; p: outage probability; <group>: rate r* with "
        "P(group rate < r*) <= p (empirical quantile)\n";
  os << "gamma,p";
  for (std::size_t g : layout.data_groups) os << ',' << group_label(cfg, g);
  os << '\n';
  for (const auto& pt : res.outage.points) {
    os << format_double(pt.gamma) << ',' << format_double(pt.p);
    for (double v : pt.rate) os << ',' << format_double(v);
    os << '\n';
  }
}

inline void write_hist_csv(std::ostream& os, const SimConfig& cfg, const SimResult& res) {
  os << "# gamma: sweep weight; group: group name; bin_lo,bin_hi: bin edges of the group "
        "total rate; count: trials in [bin_lo, bin_hi)\n";
  os << "gamma,group,bin_lo,bin_hi,count\n";
  for (const auto& h : res.histograms) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      os << format_double(h.gamma) << ',' << group_label(cfg, h.group) << ','
         << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i]
         << '\n';
    }
  }
}

inline void write_averages_csv(std::ostream& os, const SimConfig& cfg, const SimResult& res) {
  os << "# gamma: sweep weight; <group>: mean total rate of each group over all trials\n";
  os << "gamma";
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) os << ',' << group_label(cfg, g);
  os << '\n';
  for (const auto& a : res.averages) {
    os << format_double(a.gamma);
    for (double v : a.mean) os << ',' << format_double(v);
    os << '\n';
  }
}

}  // namespace ofdma::sim
