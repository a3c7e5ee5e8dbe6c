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

// Sort-and-threshold solver for the two-user weighted max-min problem with
// weights (1, gamma). Runs in O(K log K), dominated by one stable sort.
//
// Bins are ordered by decreasing rate ratio L(k) = R_1k / R_2k. With
//   A_k = sum_{m <= k} R_1m,  B_k = sum_{m > k} R_2m,  Gamma_k = A_k / (gamma B_k)
// the split bin is the first k with A_k >= gamma B_k. User 1 takes every bin
// before it plus a fraction of it; user 2 takes the rest.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "ofdma/error.hpp"

namespace ofdma {

struct TwoUserInstance {
  std::vector<double> r1;
  std::vector<double> r2;
  double gamma = 1.0;

  void validate() const {
    if (r1.empty()) throw InputError("r1", "at least one bin is required");
    if (r1.size() != r2.size()) throw InputError("r2", "length differs from r1");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw InputError("gamma", "must be finite and > 0");
    }
    for (std::size_t k = 0; k < r1.size(); ++k) {
      if (!(r1[k] >= 0.0) || !std::isfinite(r1[k])) throw InputError("r1", "rates must be finite and >= 0");
      if (!(r2[k] >= 0.0) || !std::isfinite(r2[k])) throw InputError("r2", "rates must be finite and >= 0");
    }
  }
};

// Bins with positive rate for at least one user, in decreasing-L order.
// ratio[i] belongs to bin permutation[i]; a bin useless to user 2 has L = inf.
struct SortedRatios {
  std::vector<std::size_t> permutation;
  std::vector<double> ratio;
  // Bins with zero rate for both users; they go to user 1 and take no part in
  // the ordering.
  std::vector<std::size_t> idle_bins;
};

struct MovingThresholds {
  std::vector<double> a;          // A_k
  std::vector<double> b;          // B_k
  std::vector<double> threshold;  // Gamma_k, +inf where B_k = 0
};

struct TwoUserSolution {
  SortedRatios sorted;
  MovingThresholds thresholds;
  // 0-based position of the split bin in sorted order (the conventional 1-based k_min
  // is k_min + 1). Meaningless when `sorted.permutation` is empty.
  std::size_t k_min = 0;
  double alpha_split = 0.0;
  // User 1's time share of every bin, in original bin order.
  std::vector<double> alpha;
  double rate1 = 0.0;
  double rate2 = 0.0;
  double c = 0.0;
};

inline SortedRatios sorted_ratios(const TwoUserInstance& inst) {
  inst.validate();
  SortedRatios out;
  std::vector<std::size_t> order;
  order.reserve(inst.r1.size());
  for (std::size_t k = 0; k < inst.r1.size(); ++k) {
    if (inst.r1[k] == 0.0 && inst.r2[k] == 0.0) {
      out.idle_bins.push_back(k);
    } else {
      order.push_back(k);
    }
  }
  auto ratio = [&](std::size_t k) {
    return inst.r2[k] == 0.0 ? std::numeric_limits<double>::infinity() : inst.r1[k] / inst.r2[k];
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return ratio(x) > ratio(y); });
  out.ratio.reserve(order.size());
  for (std::size_t k : order) out.ratio.push_back(ratio(k));
  out.permutation = std::move(order);
  return out;
}

inline MovingThresholds moving_thresholds(const TwoUserInstance& inst, const SortedRatios& sorted) {
  const std::size_t n = sorted.permutation.size();
  MovingThresholds t;
  t.a.resize(n);
  t.b.resize(n);
  t.threshold.resize(n);
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a += inst.r1[sorted.permutation[i]];
    t.a[i] = a;
  }
  // Suffix sums, so B_K is exactly 0.
  double b = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    t.b[i] = b;
    b += inst.r2[sorted.permutation[i]];
  }
  for (std::size_t i = 0; i < n; ++i) {
    t.threshold[i] =
        t.b[i] == 0.0 ? std::numeric_limits<double>::infinity() : t.a[i] / (t.b[i] * inst.gamma);
  }
  return t;
}

inline TwoUserSolution solve_two_user(const TwoUserInstance& inst) {
  inst.validate();
  TwoUserSolution sol;
  sol.sorted = sorted_ratios(inst);
  sol.thresholds = moving_thresholds(inst, sol.sorted);
  sol.alpha.assign(inst.r1.size(), 0.0);
  for (std::size_t k : sol.sorted.idle_bins) sol.alpha[k] = 1.0;

  const auto& perm = sol.sorted.permutation;
  const auto& a = sol.thresholds.a;
  const auto& b = sol.thresholds.b;
  const std::size_t n = perm.size();
  if (n == 0) return sol;

  std::size_t k_min = 0;
  while (k_min + 1 < n && a[k_min] < b[k_min] * inst.gamma) ++k_min;

  double total2 = 0.0;
  for (std::size_t k : perm) total2 += inst.r2[k];
  const double a_prev = k_min == 0 ? 0.0 : a[k_min - 1];
  const double b_prev = k_min == 0 ? total2 : b[k_min - 1];
  const std::size_t split = perm[k_min];
  const double r1 = inst.r1[split];
  const double r2 = inst.r2[split];
  double alpha = (inst.gamma * b_prev - a_prev) / (r1 + inst.gamma * r2);
  alpha = std::clamp(alpha, 0.0, 1.0);

  for (std::size_t i = 0; i < k_min; ++i) sol.alpha[perm[i]] = 1.0;
  sol.alpha[split] = alpha;

  sol.k_min = k_min;
  sol.alpha_split = alpha;
  sol.rate1 = a_prev + alpha * r1;
  sol.rate2 = b[k_min] + (1.0 - alpha) * r2;
  sol.c = sol.rate1;
  return sol;
}

}  // namespace ofdma
