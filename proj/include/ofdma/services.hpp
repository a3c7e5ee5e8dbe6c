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

// Mixed voice/data allocation and the rate-vector feasibility test.
//
// Voice users need a fixed rate floor R_min; data users share what is left by
// weighted max-min. A rate vector R^d is achievable iff the weighted max-min
// value with gamma_n = 1 / R^d_n is at least 1.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ofdma/error.hpp"
#include "ofdma/lp.hpp"
#include "ofdma/maxmin.hpp"
#include "ofdma/rates.hpp"

namespace ofdma {

inline constexpr double kFeasibilityTol = 1e-9;

struct VoiceUser {
  std::size_t user = 0;
  double r_min = 0.0;
};

struct DataUser {
  std::size_t user = 0;
  double gamma = 1.0;
};

struct ServiceProfile {
  std::vector<VoiceUser> voice;
  std::vector<DataUser> data;

  void validate(std::size_t n_users) const {
    std::vector<int> seen(n_users, 0);
    auto mark = [&](std::size_t u) {
      if (u >= n_users) throw InputError("profile", "user index " + std::to_string(u) + " out of range");
      if (seen[u]++) throw InputError("profile", "user " + std::to_string(u) + " listed twice");
    };
    for (const auto& v : voice) {
      mark(v.user);
      if (!(v.r_min >= 0.0) || !std::isfinite(v.r_min)) {
        throw InputError("r_min", "voice rate floor must be finite and >= 0");
      }
    }
    for (const auto& d : data) {
      mark(d.user);
      if (!(d.gamma > 0.0) || !std::isfinite(d.gamma)) {
        throw InputError("weights", "data weight must be finite and > 0");
      }
    }
    for (std::size_t u = 0; u < n_users; ++u) {
      if (!seen[u]) throw InputError("profile", "user " + std::to_string(u) + " is in neither group");
    }
  }
};

struct FeasibilityResult {
  bool feasible = false;
  double c = 0.0;
  AllocationMatrix allocation;
  std::vector<double> user_rates;
};

inline FeasibilityResult check_feasibility(const RateMatrix& r, const std::vector<double>& desired,
                                           const lp::Options& options = {}) {
  if (desired.size() != r.n_users()) {
    throw InputError("desired", "expected " + std::to_string(r.n_users()) + " rates, got " +
                                    std::to_string(desired.size()));
  }
  std::vector<double> gamma(desired.size());
  for (std::size_t n = 0; n < desired.size(); ++n) {
    if (!(desired[n] > 0.0) || !std::isfinite(desired[n])) {
      throw InputError("desired", "every desired rate must be finite and > 0");
    }
    gamma[n] = 1.0 / desired[n];
  }
  MaxMinResult res = solve_maxmin(r, WeightVector(std::move(gamma)), options);
  if (res.status != lp::Status::Optimal) {
    throw SolverError(std::string("feasibility test: solver returned ") + lp::to_string(res.status));
  }
  return {res.c >= 1.0 - kFeasibilityTol, res.c, std::move(res.allocation), std::move(res.user_rates)};
}

enum class MixedStatus { Feasible, VoiceInfeasible };

struct MixedResult {
  MixedStatus status = MixedStatus::VoiceInfeasible;
  // Voice-only margin from the first stage (+inf when no voice user has a
  // positive floor).
  double voice_margin = 0.0;
  // Common weighted data rate; 0 when there are no data users.
  double c = 0.0;
  AllocationMatrix allocation;
  std::vector<double> user_rates;
  std::vector<double> voice_rates;  // in profile.voice order
  std::vector<double> data_rates;   // in profile.data order
};

// Rows follow `users` order: a data user contributes
// sum_k alpha R - c / gamma >= 0, a voice user sum_k alpha R >= R_min. With
// only data users this is exactly build_maxmin_lp on the same rows.
struct MixedRow {
  std::size_t user;
  bool voice;
  double value;  // gamma for data users, R_min for voice users
};

inline lp::LinearProgram build_mixed_lp(const RateMatrix& r, const std::vector<MixedRow>& users) {
  const std::size_t active = users.size();
  const std::size_t bins = r.n_bins();
  const std::size_t vars = active * bins + 1;
  const std::size_t c_col = vars - 1;

  lp::LinearProgram program;
  program.objective.assign(vars, 0.0);
  program.objective[c_col] = 1.0;
  program.constraints.reserve(active + bins);
  for (std::size_t i = 0; i < active; ++i) {
    const auto& u = users[i];
    lp::Constraint row{std::vector<double>(vars, 0.0), lp::Relation::GreaterEqual, 0.0};
    for (std::size_t k = 0; k < bins; ++k) row.coeffs[alpha_index(i, k, bins)] = r(u.user, k);
    if (u.voice) {
      row.rhs = u.value;
    } else {
      row.coeffs[c_col] = -1.0 / u.value;
    }
    program.constraints.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < bins; ++k) {
    lp::Constraint row{std::vector<double>(vars, 0.0), lp::Relation::Equal, 1.0};
    for (std::size_t i = 0; i < active; ++i) row.coeffs[alpha_index(i, k, bins)] = 1.0;
    program.constraints.push_back(std::move(row));
  }
  return program;
}

// Two stages: the voice floors alone must pass the feasibility test, then c is
// maximized for data users subject to the voice floors. Voice users with a
// zero floor impose nothing and are left out of the program (zero share).
inline MixedResult solve_mixed(const RateMatrix& r, const ServiceProfile& profile,
                               const lp::Options& options = {}) {
  const std::size_t users = r.n_users();
  const std::size_t bins = r.n_bins();
  profile.validate(users);

  MixedResult out;
  out.allocation.alpha = Matrix(users, bins);

  // Stage 1: voice-only feasibility on the voice rows of r.
  std::vector<const VoiceUser*> binding;
  for (const auto& v : profile.voice) {
    if (v.r_min > 0.0) binding.push_back(&v);
  }
  std::optional<FeasibilityResult> voice_only;
  out.voice_margin = std::numeric_limits<double>::infinity();
  if (!binding.empty()) {
    Matrix sub(binding.size(), bins);
    std::vector<double> desired(binding.size());
    for (std::size_t i = 0; i < binding.size(); ++i) {
      for (std::size_t k = 0; k < bins; ++k) sub(i, k) = r(binding[i]->user, k);
      desired[i] = binding[i]->r_min;
    }
    voice_only = check_feasibility(RateMatrix(std::move(sub)), desired, options);
    out.voice_margin = voice_only->c;
    if (!voice_only->feasible) {
      out.status = MixedStatus::VoiceInfeasible;
      return out;
    }
  }

  auto finish = [&](MixedStatus status) {
    out.status = status;
    out.user_rates = user_rates(out.allocation, r);
    for (const auto& v : profile.voice) out.voice_rates.push_back(out.user_rates[v.user]);
    for (const auto& d : profile.data) out.data_rates.push_back(out.user_rates[d.user]);
    return out;
  };

  if (profile.data.empty()) {
    // Nothing to maximize: the voice-only allocation already meets every floor.
    if (voice_only) {
      for (std::size_t i = 0; i < binding.size(); ++i) {
        for (std::size_t k = 0; k < bins; ++k) {
          out.allocation.alpha(binding[i]->user, k) = voice_only->allocation.alpha(i, k);
        }
      }
    } else {
      for (std::size_t k = 0; k < bins; ++k) out.allocation.alpha(profile.voice.front().user, k) = 1.0;
    }
    return finish(MixedStatus::Feasible);
  }

  // Stage 2. Rows are ordered by user index.
  std::vector<MixedRow> rows;
  std::vector<std::size_t> active_users;
  for (std::size_t u = 0; u < users; ++u) {
    for (const auto& d : profile.data) {
      if (d.user == u) rows.push_back({u, false, d.gamma});
    }
    for (const VoiceUser* v : binding) {
      if (v->user == u) rows.push_back({u, true, v->r_min});
    }
  }
  for (const auto& row : rows) active_users.push_back(row.user);

  const lp::Solution sol = lp::solve(build_mixed_lp(r, rows), options);
  if (sol.status != lp::Status::Optimal) {
    // Stage 1 passed, so the program is feasible in exact arithmetic.
    throw SolverError(std::string("mixed allocation: solver returned ") + lp::to_string(sol.status));
  }
  MaxMinResult res = unpack_allocation_solution(sol, r, active_users);
  out.allocation = std::move(res.allocation);
  out.c = res.c;
  return finish(MixedStatus::Feasible);
}

}  // namespace ofdma
