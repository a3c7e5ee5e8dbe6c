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

// Two-phase revised primal simplex.
//
// Pricing is either pure Bland (lowest-index improving column) or the default
// largest-reduced-cost rule, which switches to Bland after a run of
// degenerate pivots and back after the next nondegenerate one. Both rules
// break ties by lowest index and never cycle.
//
// Columns are stored sparse and the basis inverse dense, which suits the
// allocation programs in this library (a few thousand columns with two
// nonzeros each, a few hundred rows). Every solve owns its state, so
// concurrent solves of distinct programs are safe.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ofdma/error.hpp"

namespace ofdma::lp {

enum class Relation { LessEqual, GreaterEqual, Equal };

struct Constraint {
  std::vector<double> coeffs;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

struct VariableBound {
  double lower = 0.0;
  std::optional<double> upper;
};

// maximize objective . x  subject to constraints and per-variable bounds.
// An empty `bounds` means every variable is x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  std::vector<VariableBound> bounds;

  std::size_t num_variables() const noexcept { return objective.size(); }

  void validate() const {
    const std::size_t n = objective.size();
    for (double c : objective) {
      if (!std::isfinite(c)) throw InputError("objective", "coefficients must be finite");
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto& row = constraints[i];
      const std::string field = "constraints[" + std::to_string(i) + "]";
      if (row.coeffs.size() != n) {
        throw InputError(field, "arity " + std::to_string(row.coeffs.size()) +
                                    " differs from objective arity " + std::to_string(n));
      }
      if (!std::isfinite(row.rhs)) throw InputError(field, "right-hand side must be finite");
      for (double a : row.coeffs) {
        if (!std::isfinite(a)) throw InputError(field, "coefficients must be finite");
      }
    }
    if (!bounds.empty() && bounds.size() != n) {
      throw InputError("bounds", "must be empty or have one entry per variable");
    }
    for (std::size_t j = 0; j < bounds.size(); ++j) {
      const auto& b = bounds[j];
      const std::string field = "bounds[" + std::to_string(j) + "]";
      if (!std::isfinite(b.lower)) throw InputError(field, "lower bound must be finite");
      if (b.upper && (!std::isfinite(*b.upper) || *b.upper < b.lower)) {
        throw InputError(field, "upper bound must be finite and >= lower bound");
      }
    }
  }
};

enum class Status { Optimal, Infeasible, Unbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

struct Solution {
  Status status = Status::Infeasible;
  double objective_value = 0.0;
  std::vector<double> primal;
  // One multiplier per entry of LinearProgram::constraints. For a maximization,
  // <= rows carry y >= 0, >= rows y <= 0, = rows are free.
  std::vector<double> dual;
  // Multipliers of the explicit upper bounds (0 where no upper bound exists).
  std::vector<double> upper_bound_dual;
  // c_j - y^T A_j for each structural variable, read from the final objective
  // row. Nonpositive at optimality for variables resting on their lower bound.
  std::vector<double> reduced_costs;
  // Basic column per tableau row, in internal column numbering: structural
  // variables first, then slack/surplus columns, then artificials.
  std::vector<std::size_t> basis;
  std::size_t iterations = 0;
};

enum class PivotRule { Bland, DantzigBlandFallback };

struct Options {
  PivotRule pivot_rule = PivotRule::DantzigBlandFallback;
  // Consecutive degenerate pivots before the default rule falls back to Bland.
  std::size_t degenerate_limit = 50;
  double pivot_tol = 1e-10;
  double feas_tol = 1e-9;
  double optimality_tol = 1e-11;
  std::size_t max_iterations = 200000;
  // When set, the final tableau is written here as CSV.
  std::ostream* tableau_dump = nullptr;
};

namespace detail {

// Sparse column of the internal constraint matrix.
struct Column {
  std::vector<std::size_t> rows;
  std::vector<double> values;

  double dot(const std::vector<double>& y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) s += values[i] * y[rows[i]];
    return s;
  }
};

// Revised simplex state: explicit dense basis inverse, refactorized from the
// original columns at a fixed cadence to bound error growth.
class RevisedSimplex {
 public:
  RevisedSimplex(std::vector<Column> columns, std::vector<double> rhs, std::vector<std::size_t> basis,
                 const Options& options)
      : cols_(std::move(columns)),
        b_(std::move(rhs)),
        basis_(std::move(basis)),
        m_(b_.size()),
        options_(options),
        binv_(m_ * m_, 0.0),
        x_b_(m_, 0.0),
        y_(m_, 0.0) {
    refactorize();
  }

  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return cols_.size(); }
  const std::vector<std::size_t>& basis() const noexcept { return basis_; }
  const std::vector<double>& basic_values() const noexcept { return x_b_; }
  const std::vector<double>& duals() const noexcept { return y_; }
  const Column& column(std::size_t j) const { return cols_[j]; }
  std::size_t iterations() const noexcept { return iterations_; }

  void set_cost(std::vector<double> cost) {
    cost_ = std::move(cost);
    update_duals();
  }

  double objective() const {
    double v = 0.0;
    for (std::size_t r = 0; r < m_; ++r) v += cost_[basis_[r]] * x_b_[r];
    return v;
  }

  double reduced_cost(std::size_t j) const { return cost_[j] - cols_[j].dot(y_); }

  // B^{-1} A_j.
  std::vector<double> ftran(std::size_t j) const {
    std::vector<double> u(m_, 0.0);
    const Column& c = cols_[j];
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
      const std::size_t k = c.rows[i];
      const double v = c.values[i];
      for (std::size_t r = 0; r < m_; ++r) u[r] += binv_[r * m_ + k] * v;
    }
    return u;
  }

  // Row r of B^{-1} A_j.
  double tableau_entry(std::size_t r, std::size_t j) const {
    const Column& c = cols_[j];
    double s = 0.0;
    for (std::size_t i = 0; i < c.rows.size(); ++i) s += binv_[r * m_ + c.rows[i]] * c.values[i];
    return s;
  }

  // B^{-1} entry; column r of B^{-1} is the final image of the r-th starting
  // unit column.
  double inverse(std::size_t r, std::size_t k) const { return binv_[r * m_ + k]; }

  // `limit` excludes columns >= limit from entering. Returns false when the
  // entering column has no positive entry (unbounded).
  bool optimize(std::size_t limit) {
    std::size_t degenerate_run = 0;
    for (;;) {
      const bool bland = options_.pivot_rule == PivotRule::Bland ||
                         degenerate_run >= options_.degenerate_limit;
      std::size_t enter = limit;
      double best_d = options_.optimality_tol;
      for (std::size_t j = 0; j < limit; ++j) {
        if (in_basis(j)) continue;
        const double d = reduced_cost(j);
        if (d > best_d) {
          enter = j;
          if (bland) break;
          best_d = d;
        }
      }
      if (enter == limit) return true;

      const std::vector<double> u = ftran(enter);
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        if (u[r] <= options_.pivot_tol) continue;
        const double ratio = x_b_[r] / u[r];
        if (leave == m_ || ratio < best - 1e-12) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + 1e-12 && basis_[r] < basis_[leave]) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave == m_) return false;
      degenerate_run = best <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(leave, enter, u, reduced_cost(enter));
    }
  }

  void pivot(std::size_t leave, std::size_t enter) {
    pivot(leave, enter, ftran(enter), reduced_cost(enter));
  }

 private:
  bool in_basis(std::size_t j) const {
    if (basic_mark_.size() != cols_.size()) {
      basic_mark_.assign(cols_.size(), 0);
      for (std::size_t c : basis_) basic_mark_[c] = 1;
    }
    return basic_mark_[j] != 0;
  }

  // `d_enter` is the reduced cost of the entering column before the pivot.
  void pivot(std::size_t leave, std::size_t enter, const std::vector<double>& u, double d_enter) {
    const double piv = u[leave];
    if (!(std::abs(piv) > options_.pivot_tol) || !std::isfinite(piv)) {
      throw SolverError("simplex: pivot element below tolerance (singular basis)");
    }
    double* prow = binv_.data() + leave * m_;
    const double inv = 1.0 / piv;
    for (std::size_t k = 0; k < m_; ++k) prow[k] *= inv;
    const double theta = x_b_[leave] * inv;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == leave) continue;
      const double f = u[r];
      if (f == 0.0) continue;
      double* row = binv_.data() + r * m_;
      for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
      x_b_[r] -= f * theta;
    }
    x_b_[leave] = theta;
    if (!basic_mark_.empty()) {
      basic_mark_[basis_[leave]] = 0;
      basic_mark_[enter] = 1;
    }
    basis_[leave] = enter;

    if (++iterations_ > options_.max_iterations) {
      throw SolverError("simplex: iteration limit " + std::to_string(options_.max_iterations) +
                        " exceeded");
    }
    if (++since_refactor_ >= kRefactorInterval) {
      refactorize();
    } else {
      // Clamp tiny negative basic values produced by cancellation.
      for (double& x : x_b_) {
        if (x < 0.0 && x > -options_.feas_tol) x = 0.0;
      }
      // y' = y + d_q * (row `leave` of the new inverse).
      if (!cost_.empty() && d_enter != 0.0) {
        for (std::size_t k = 0; k < m_; ++k) y_[k] += d_enter * prow[k];
      }
    }
  }

  void update_duals() {
    if (cost_.empty()) return;
    std::fill(y_.begin(), y_.end(), 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = cost_[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = binv_.data() + r * m_;
      for (std::size_t k = 0; k < m_; ++k) y_[k] += cb * row[k];
    }
    for (double v : y_) {
      if (!std::isfinite(v)) throw SolverError("simplex: non-finite dual values (singular basis)");
    }
  }

  // Gauss-Jordan inversion of the current basis with partial pivoting.
  void refactorize() {
    since_refactor_ = 0;
    std::vector<double> a(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const Column& c = cols_[basis_[r]];
      for (std::size_t i = 0; i < c.rows.size(); ++i) a[c.rows[i] * m_ + r] = c.values[i];
    }
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (std::size_t r = 0; r < m_; ++r) binv_[r * m_ + r] = 1.0;
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t p = col;
      for (std::size_t r = col + 1; r < m_; ++r) {
        if (std::abs(a[r * m_ + col]) > std::abs(a[p * m_ + col])) p = r;
      }
      if (!(std::abs(a[p * m_ + col]) > options_.pivot_tol)) {
        throw SolverError("simplex: basis matrix is numerically singular");
      }
      if (p != col) {
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(a[p * m_ + k], a[col * m_ + k]);
          std::swap(binv_[p * m_ + k], binv_[col * m_ + k]);
        }
      }
      const double inv = 1.0 / a[col * m_ + col];
      for (std::size_t k = 0; k < m_; ++k) {
        a[col * m_ + k] *= inv;
        binv_[col * m_ + k] *= inv;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = a[r * m_ + col];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          a[r * m_ + k] -= f * a[col * m_ + k];
          binv_[r * m_ + k] -= f * binv_[col * m_ + k];
        }
      }
    }
    for (std::size_t r = 0; r < m_; ++r) {
      double v = 0.0;
      for (std::size_t k = 0; k < m_; ++k) v += binv_[r * m_ + k] * b_[k];
      x_b_[r] = (v < 0.0 && v > -options_.feas_tol) ? 0.0 : v;
    }
    update_duals();
  }

  static constexpr std::size_t kRefactorInterval = 100;

  std::vector<Column> cols_;
  std::vector<double> b_;
  std::vector<std::size_t> basis_;
  std::size_t m_;
  Options options_;
  std::vector<double> binv_;
  std::vector<double> x_b_;
  std::vector<double> y_;
  std::vector<double> cost_;
  mutable std::vector<char> basic_mark_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

}  // namespace detail

// Solves `program` by the two-phase method. Identical inputs always produce identical pivots, bases and outputs.
inline Solution solve(const LinearProgram& program, const Options& options = {}) {
  program.validate();
  const std::size_t n = program.num_variables();
  auto lower = [&](std::size_t j) { return program.bounds.empty() ? 0.0 : program.bounds[j].lower; };

  // Internal rows: user constraints, then one x_j <= u_j - l_j row per upper
  // bound. Variables are shifted so that every internal variable is >= 0.
  struct Row {
    std::vector<double> coeffs;
    Relation relation;
    double rhs;
    bool flipped = false;
  };
  std::vector<Row> rows;
  rows.reserve(program.constraints.size());
  for (const auto& c : program.constraints) {
    double rhs = c.rhs;
    for (std::size_t j = 0; j < n; ++j) rhs -= c.coeffs[j] * lower(j);
    rows.push_back({c.coeffs, c.relation, rhs});
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> upper_row(n, kNone);
  for (std::size_t j = 0; j < program.bounds.size(); ++j) {
    const auto& b = program.bounds[j];
    if (!b.upper) continue;
    std::vector<double> coeffs(n, 0.0);
    coeffs[j] = 1.0;
    upper_row[j] = rows.size();
    rows.push_back({std::move(coeffs), Relation::LessEqual, *b.upper - b.lower});
  }

  // Normalize to rhs >= 0. A >= row with zero rhs becomes a <= row so that its
  // slack can start in the basis without an artificial.
  for (auto& row : rows) {
    const bool flip = row.rhs < 0.0 || (row.rhs == 0.0 && row.relation == Relation::GreaterEqual);
    if (!flip) continue;
    for (double& a : row.coeffs) a = -a;
    row.rhs = -row.rhs;
    if (row.relation == Relation::LessEqual) {
      row.relation = Relation::GreaterEqual;
    } else if (row.relation == Relation::GreaterEqual) {
      row.relation = Relation::LessEqual;
    }
    row.flipped = true;
  }

  const std::size_t m = rows.size();
  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  for (const auto& row : rows) {
    if (row.relation != Relation::Equal) ++n_slack;
    if (row.relation != Relation::LessEqual) ++n_art;
  }
  const std::size_t art_begin = n + n_slack;
  const std::size_t total = art_begin + n_art;

  // Column layout: structural, then slack/surplus, then artificial.
  std::vector<detail::Column> columns(total);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = rows[r].coeffs[j];
      if (a == 0.0) continue;
      columns[j].rows.push_back(r);
      columns[j].values.push_back(a);
    }
  }
  std::vector<double> rhs(m);
  std::vector<std::size_t> basis(m);
  {
    std::size_t s = n;
    std::size_t a = art_begin;
    for (std::size_t r = 0; r < m; ++r) {
      rhs[r] = rows[r].rhs;
      switch (rows[r].relation) {
        case Relation::LessEqual:
          columns[s] = {{r}, {1.0}};
          basis[r] = s++;
          break;
        case Relation::GreaterEqual:
          columns[s++] = {{r}, {-1.0}};
          columns[a] = {{r}, {1.0}};
          basis[r] = a++;
          break;
        case Relation::Equal:
          columns[a] = {{r}, {1.0}};
          basis[r] = a++;
          break;
      }
    }
  }
  // The starting basis is the identity, so column r of B^{-1} always equals
  // the image of starting unit column r and y = c_B B^{-1} are the row duals.

  Solution sol;
  sol.primal.assign(n, 0.0);
  sol.dual.assign(program.constraints.size(), 0.0);
  sol.upper_bound_dual.assign(n, 0.0);
  sol.reduced_costs.assign(n, 0.0);

  double rhs_scale = 1.0;
  for (double v : rhs) rhs_scale = std::max(rhs_scale, std::abs(v));

  detail::RevisedSimplex simplex(std::move(columns), std::move(rhs), std::move(basis), options);
  auto is_artificial = [&](std::size_t j) { return j >= art_begin; };

  // Phase 1: maximize -sum(artificials).
  if (n_art > 0) {
    std::vector<double> cost(total, 0.0);
    for (std::size_t j = art_begin; j < total; ++j) cost[j] = -1.0;
    simplex.set_cost(std::move(cost));
    simplex.optimize(total);
    if (-simplex.objective() > options.feas_tol * rhs_scale) {
      sol.status = Status::Infeasible;
      sol.basis = simplex.basis();
      sol.iterations = simplex.iterations();
      return sol;
    }
    // Drive zero-valued artificials out of the basis where possible. Rows
    // with no usable column are redundant and keep their artificial at 0.
    for (std::size_t r = 0; r < m; ++r) {
      if (!is_artificial(simplex.basis()[r])) continue;
      for (std::size_t j = 0; j < art_begin; ++j) {
        if (std::find(simplex.basis().begin(), simplex.basis().end(), j) != simplex.basis().end()) continue;
        if (std::abs(simplex.tableau_entry(r, j)) > options.pivot_tol) {
          simplex.pivot(r, j);
          break;
        }
      }
    }
  }

  std::vector<double> cost(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = program.objective[j];
  simplex.set_cost(cost);
  const bool bounded = simplex.optimize(art_begin);
  sol.basis = simplex.basis();
  sol.iterations = simplex.iterations();
  if (!bounded) {
    sol.status = Status::Unbounded;
    return sol;
  }

  for (std::size_t r = 0; r < m; ++r) {
    if (sol.basis[r] < n) sol.primal[sol.basis[r]] = simplex.basic_values()[r];
  }
  double objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sol.primal[j] += lower(j);
    objective += program.objective[j] * sol.primal[j];
    sol.reduced_costs[j] = simplex.reduced_cost(j);
  }
  const auto& y = simplex.duals();
  for (std::size_t r = 0; r < program.constraints.size(); ++r) {
    sol.dual[r] = rows[r].flipped ? -y[r] : y[r];
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (upper_row[j] == kNone) continue;
    const std::size_t r = upper_row[j];
    sol.upper_bound_dual[j] = rows[r].flipped ? -y[r] : y[r];
  }
  sol.objective_value = objective;
  sol.status = Status::Optimal;

  if (options.tableau_dump != nullptr) {
    auto& os = *options.tableau_dump;
    const auto precision = os.precision(17);
    os << "row,basic";
    for (std::size_t j = 0; j < total; ++j) os << ",x" << j;
    os << ",rhs\n";
    for (std::size_t r = 0; r < m; ++r) {
      os << r << ',' << sol.basis[r];
      for (std::size_t j = 0; j < total; ++j) os << ',' << simplex.tableau_entry(r, j);
      os << ',' << simplex.basic_values()[r] << '\n';
    }
    os << "reduced,";
    for (std::size_t j = 0; j < total; ++j) os << ',' << simplex.reduced_cost(j);
    os << ',' << simplex.objective() << '\n';
    os.precision(precision);
  }
  return sol;
}

}  // namespace ofdma::lp
