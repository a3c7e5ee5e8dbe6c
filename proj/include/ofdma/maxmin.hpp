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

// Weighted max-min fair joint TDM/FDM allocation under a PSD mask.
//
// Variables are alpha_nk (time share of user n on bin k) and the common
// weighted rate c. The program is
//
//   maximize c
//   s.t.  sum_k alpha_nk R_nk - c / gamma_n >= 0     n = 1..N
//         sum_n alpha_nk = 1                          k = 1..K
//         alpha, c >= 0

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ofdma/error.hpp"
#include "ofdma/lp.hpp"
#include "ofdma/matrix.hpp"
#include "ofdma/rates.hpp"

namespace ofdma {

class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> gamma) : gamma_(std::move(gamma)) {
    if (gamma_.empty()) throw InputError("weights", "at least one weight is required");
    for (double g : gamma_) {
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw InputError("weights", "every weight must be finite and > 0");
      }
    }
  }

  std::size_t size() const noexcept { return gamma_.size(); }
  double operator[](std::size_t n) const { return gamma_[n]; }
  const std::vector<double>& values() const noexcept { return gamma_; }

 private:
  std::vector<double> gamma_;
};

// alpha(n, k): fraction of time user n owns bin k.
struct AllocationMatrix {
  Matrix alpha;

  std::size_t n_users() const noexcept { return alpha.rows(); }
  std::size_t n_bins() const noexcept { return alpha.cols(); }

  // Entries in [0, 1] and every column summing to 1 within `tol`.
  void validate(double tol = 1e-9) const {
    for (std::size_t k = 0; k < alpha.cols(); ++k) {
      double sum = 0.0;
      for (std::size_t n = 0; n < alpha.rows(); ++n) {
        const double a = alpha(n, k);
        if (!(a >= -tol && a <= 1.0 + tol)) {
          throw InputError("allocation", "entry (" + std::to_string(n) + ", " +
                                             std::to_string(k) + ") outside [0, 1]");
        }
        sum += a;
      }
      if (std::abs(sum - 1.0) > tol) {
        throw InputError("allocation", "column " + std::to_string(k) + " sums to " +
                                           std::to_string(sum) + ", expected 1");
      }
    }
  }
};

inline std::vector<double> user_rates(const AllocationMatrix& a, const RateMatrix& r) {
  std::vector<double> rates(a.n_users(), 0.0);
  for (std::size_t n = 0; n < a.n_users(); ++n) {
    for (std::size_t k = 0; k < a.n_bins(); ++k) rates[n] += a.alpha(n, k) * r(n, k);
  }
  return rates;
}

// Lagrange multipliers of the allocation program: delta on the rate rows,
// lambda on the column-sum rows, mu on alpha >= 0 and beta on c >= 0.
struct MaxMinDuals {
  std::vector<double> delta;
  std::vector<double> lambda;
  Matrix mu;
  double beta = 0.0;
};

struct MaxMinResult {
  lp::Status status = lp::Status::Infeasible;
  double c = 0.0;
  AllocationMatrix allocation;
  std::vector<double> user_rates;
  MaxMinDuals duals;
  // Set when some user has an all-zero rate row, which pins c to 0.
  bool zero_rate_user = false;
};

namespace detail {

inline void check_dimensions(const RateMatrix& r, const WeightVector& w) {
  if (w.size() != r.n_users()) {
    throw InputError("weights", "expected " + std::to_string(r.n_users()) + " weights, got " +
                                    std::to_string(w.size()));
  }
}

// Snaps entries below `floor` to zero and renormalizes each column.
inline void clean_allocation(Matrix& alpha, double floor = 1e-12) {
  for (std::size_t k = 0; k < alpha.cols(); ++k) {
    double sum = 0.0;
    for (std::size_t n = 0; n < alpha.rows(); ++n) {
      double& a = alpha(n, k);
      if (a < floor) a = 0.0;
      sum += a;
    }
    if (sum > 0.0) {
      for (std::size_t n = 0; n < alpha.rows(); ++n) alpha(n, k) /= sum;
    }
  }
}

}  // namespace detail

// Variable layout: alpha_{1,1..K}, ..., alpha_{N,1..K}, c.
inline std::size_t alpha_index(std::size_t n, std::size_t k, std::size_t n_bins) {
  return n * n_bins + k;
}

inline lp::LinearProgram build_maxmin_lp(const RateMatrix& r, const WeightVector& w) {
  detail::check_dimensions(r, w);
  const std::size_t users = r.n_users();
  const std::size_t bins = r.n_bins();
  const std::size_t vars = users * bins + 1;
  const std::size_t c_col = vars - 1;

  lp::LinearProgram program;
  program.objective.assign(vars, 0.0);
  program.objective[c_col] = 1.0;
  program.constraints.reserve(users + bins);
  for (std::size_t n = 0; n < users; ++n) {
    lp::Constraint row{std::vector<double>(vars, 0.0), lp::Relation::GreaterEqual, 0.0};
    for (std::size_t k = 0; k < bins; ++k) row.coeffs[alpha_index(n, k, bins)] = r(n, k);
    row.coeffs[c_col] = -1.0 / w[n];
    program.constraints.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < bins; ++k) {
    lp::Constraint row{std::vector<double>(vars, 0.0), lp::Relation::Equal, 1.0};
    for (std::size_t n = 0; n < users; ++n) row.coeffs[alpha_index(n, k, bins)] = 1.0;
    program.constraints.push_back(std::move(row));
  }
  return program;
}

// Maps an LP solution of the allocation program (user rows first, then bin
// rows, c last) back onto allocation, rates and multipliers. Rows of users
// that were left out of the program (`active[n] == false`) get zero share.
inline MaxMinResult unpack_allocation_solution(const lp::Solution& sol, const RateMatrix& r,
                                               const std::vector<std::size_t>& active_users) {
  const std::size_t users = r.n_users();
  const std::size_t bins = r.n_bins();
  const std::size_t active = active_users.size();
  const std::size_t c_col = active * bins;

  MaxMinResult res;
  res.status = sol.status;
  res.allocation.alpha = Matrix(users, bins);
  res.duals.delta.assign(users, 0.0);
  res.duals.lambda.assign(bins, 0.0);
  res.duals.mu = Matrix(users, bins);
  if (sol.status != lp::Status::Optimal) return res;

  res.c = std::max(0.0, sol.primal[c_col]);
  for (std::size_t i = 0; i < active; ++i) {
    const std::size_t n = active_users[i];
    for (std::size_t k = 0; k < bins; ++k) {
      res.allocation.alpha(n, k) = sol.primal[alpha_index(i, k, bins)];
      // mu_nk = -(reduced cost of alpha_nk).
      res.duals.mu(n, k) = -sol.reduced_costs[alpha_index(i, k, bins)];
    }
    // Rate rows are >= rows of a maximization, so their multipliers are <= 0.
    res.duals.delta[n] = -sol.dual[i];
  }
  for (std::size_t k = 0; k < bins; ++k) res.duals.lambda[k] = sol.dual[active + k];
  res.duals.beta = -sol.reduced_costs[c_col];

  detail::clean_allocation(res.allocation.alpha);
  res.user_rates = user_rates(res.allocation, r);
  return res;
}

inline MaxMinResult solve_maxmin(const RateMatrix& r, const WeightVector& w,
                                 const lp::Options& options = {}) {
  const lp::LinearProgram program = build_maxmin_lp(r, w);
  const lp::Solution sol = lp::solve(program, options);
  std::vector<std::size_t> all(r.n_users());
  for (std::size_t n = 0; n < all.size(); ++n) all[n] = n;
  MaxMinResult res = unpack_allocation_solution(sol, r, all);
  for (std::size_t n = 0; n < r.n_users(); ++n) {
    const auto row = r.values().row(n);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      res.zero_rate_user = true;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// KKT verification

enum class CheckOutcome { Pass, Fail, NotApplicable };

struct KktCheck {
  std::string name;
  CheckOutcome outcome = CheckOutcome::NotApplicable;
  double worst_violation = 0.0;
};

struct KktReport {
  std::vector<KktCheck> checks;

  bool all_passed() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const KktCheck& c) { return c.outcome == CheckOutcome::Fail; });
  }

  const KktCheck& at(std::string_view name) const {
    for (const auto& c : checks) {
      if (c.name == name) return c;
    }
    throw InputError("kkt", "no check named " + std::string(name));
  }
};

namespace kkt {
inline constexpr std::string_view kBetaZero = "beta_zero";
inline constexpr std::string_view kDeltaNormalization = "delta_normalization";
inline constexpr std::string_view kActiveBins = "active_bins";
inline constexpr std::string_view kInactiveBins = "inactive_bins";
inline constexpr std::string_view kStationarity = "stationarity";
inline constexpr std::string_view kDualSigns = "dual_signs";
}  // namespace kkt

// Checks the optimality conditions of `res` against (r, w):
//   beta_zero            beta = 0                          (c > 0 only)
//   delta_normalization  sum_n delta_n / gamma_n = 1       (c > 0 only)
//   active_bins          alpha_nk > tol  =>  lambda_k = delta_n R_nk
//   inactive_bins        alpha_nk <= tol =>  lambda_k >= delta_n R_nk - tol
//   stationarity         -mu_nk + lambda_k - delta_n R_nk = 0
//   dual_signs           delta, mu, beta >= -tol
inline KktReport verify_kkt(const MaxMinResult& res, const RateMatrix& r, const WeightVector& w,
                            double tol) {
  detail::check_dimensions(r, w);
  const auto& d = res.duals;
  const std::size_t users = r.n_users();
  const std::size_t bins = r.n_bins();
  const bool positive = res.c > tol;

  auto make = [&](std::string_view name, bool applicable, double worst) {
    KktCheck c{std::string(name), CheckOutcome::NotApplicable, worst};
    if (applicable) c.outcome = worst <= tol ? CheckOutcome::Pass : CheckOutcome::Fail;
    return c;
  };

  KktReport report;
  report.checks.push_back(make(kkt::kBetaZero, positive, std::abs(d.beta)));

  double norm = 0.0;
  for (std::size_t n = 0; n < users; ++n) norm += d.delta[n] / w[n];
  report.checks.push_back(make(kkt::kDeltaNormalization, positive, std::abs(norm - 1.0)));

  double active = 0.0;
  double inactive = 0.0;
  double stationarity = 0.0;
  double signs = std::max(0.0, -d.beta);
  bool any_active = false;
  bool any_inactive = false;
  for (std::size_t n = 0; n < users; ++n) {
    signs = std::max(signs, -d.delta[n]);
    for (std::size_t k = 0; k < bins; ++k) {
      const double marginal = d.delta[n] * r(n, k);
      if (res.allocation.alpha(n, k) > tol) {
        any_active = true;
        active = std::max(active, std::abs(d.lambda[k] - marginal));
      } else {
        any_inactive = true;
        // A shortfall of exactly tol is allowed, so report the excess over it
        // on the same scale as the other checks.
        inactive = std::max(inactive, std::max(0.0, marginal - d.lambda[k]));
      }
      stationarity = std::max(stationarity, std::abs(-d.mu(n, k) + d.lambda[k] - marginal));
      signs = std::max(signs, -d.mu(n, k));
    }
  }
  report.checks.push_back(make(kkt::kActiveBins, any_active, active));
  report.checks.push_back(make(kkt::kInactiveBins, any_inactive, inactive));
  report.checks.push_back(make(kkt::kStationarity, true, stationarity));
  report.checks.push_back(make(kkt::kDualSigns, true, signs));
  return report;
}

// Number of bins time-shared by two or more users, i.e. columns with at least
// two entries strictly inside (tol, 1 - tol).
inline std::size_t count_shared_bins(const AllocationMatrix& a, double tol) {
  std::size_t shared = 0;
  for (std::size_t k = 0; k < a.n_bins(); ++k) {
    std::size_t fractional = 0;
    for (std::size_t n = 0; n < a.n_users(); ++n) {
      const double v = a.alpha(n, k);
      if (v > tol && v < 1.0 - tol) ++fractional;
    }
    if (fractional >= 2) ++shared;
  }
  return shared;
}

// Largest |gamma_n R_n - c| over users.
inline double weighted_rate_spread(const MaxMinResult& res, const WeightVector& w) {
  double worst = 0.0;
  for (std::size_t n = 0; n < res.user_rates.size(); ++n) {
    worst = std::max(worst, std::abs(w[n] * res.user_rates[n] - res.c));
  }
  return worst;
}

}  // namespace ofdma
