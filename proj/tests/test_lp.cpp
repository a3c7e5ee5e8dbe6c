#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ofdma/lp.hpp"
#include "ofdma/maxmin.hpp"
#include "oracles.hpp"

namespace ofdma::lp {
namespace {

Constraint row(std::vector<double> a, Relation rel, double b) { return {std::move(a), rel, b}; }

TEST(LpTest, SingleUpperBound) {
  LinearProgram p{{1.0}, {row({1.0}, Relation::LessEqual, 1.0)}, {}};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_DOUBLE_EQ(s.objective_value, 1.0);
  EXPECT_DOUBLE_EQ(s.primal[0], 1.0);
  EXPECT_DOUBLE_EQ(s.dual[0], 1.0);
}

TEST(LpTest, ContradictoryBoundsAreInfeasible) {
  LinearProgram p{{1.0}, {row({1.0}, Relation::GreaterEqual, 2.0), row({1.0}, Relation::LessEqual, 1.0)}, {}};
  EXPECT_EQ(solve(p).status, Status::Infeasible);
}

TEST(LpTest, VertexSolutionPutsMassOnOneVariable) {
  LinearProgram p{{1.0, 1.0}, {row({1.0, 1.0}, Relation::LessEqual, 1.0)}, {}};
  for (auto rule : {PivotRule::Bland, PivotRule::DantzigBlandFallback}) {
    Options o;
    o.pivot_rule = rule;
    const Solution s = solve(p, o);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_DOUBLE_EQ(s.objective_value, 1.0);
    const int nonzero = (s.primal[0] != 0.0) + (s.primal[1] != 0.0);
    EXPECT_EQ(nonzero, 1);
  }
}

TEST(LpTest, Unbounded) {
  LinearProgram p{{1.0, 0.0}, {row({-1.0, 1.0}, Relation::LessEqual, 1.0)}, {}};
  EXPECT_EQ(solve(p).status, Status::Unbounded);
}

TEST(LpTest, EqualityRowsAndDualSigns) {
  // maximize 2x + 3y  s.t. x + y = 4, x <= 3, y >= 1, y <= 2.5
  LinearProgram p{{2.0, 3.0},
                  {row({1.0, 1.0}, Relation::Equal, 4.0), row({1.0, 0.0}, Relation::LessEqual, 3.0),
                   row({0.0, 1.0}, Relation::GreaterEqual, 1.0), row({0.0, 1.0}, Relation::LessEqual, 2.5)},
                  {}};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.primal[0], 1.5, 1e-12);
  EXPECT_NEAR(s.primal[1], 2.5, 1e-12);
  EXPECT_NEAR(s.objective_value, 10.5, 1e-12);
  EXPECT_GE(s.dual[1], -1e-12);
  EXPECT_LE(s.dual[2], 1e-12);
  EXPECT_GE(s.dual[3], -1e-12);
  const double dual_obj = 4.0 * s.dual[0] + 3.0 * s.dual[1] + 1.0 * s.dual[2] + 2.5 * s.dual[3];
  EXPECT_NEAR(dual_obj, s.objective_value, 1e-10);
}

TEST(LpTest, NegativeRhsAndVariableBounds) {
  // maximize -x - y  s.t. -x - y <= -3, 1 <= x <= 2, y >= 0.5  ->  x + y = 3
  LinearProgram p{{-1.0, -1.0}, {row({-1.0, -1.0}, Relation::LessEqual, -3.0)}, {{1.0, 2.0}, {0.5, {}}}};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.objective_value, -3.0, 1e-12);
  EXPECT_NEAR(s.primal[0] + s.primal[1], 3.0, 1e-12);
  EXPECT_GE(s.primal[0], 1.0 - 1e-12);
  EXPECT_LE(s.primal[0], 2.0 + 1e-12);
  EXPECT_GE(s.primal[1], 0.5 - 1e-12);
}

TEST(LpTest, UpperBoundDualIsReported) {
  // maximize x with x <= 5 as a bound only.
  LinearProgram p{{1.0}, {}, {{0.0, 5.0}}};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_DOUBLE_EQ(s.primal[0], 5.0);
  EXPECT_DOUBLE_EQ(s.upper_bound_dual[0], 1.0);
}

TEST(LpTest, RedundantEqualityRows) {
  LinearProgram p{{1.0, 2.0},
                  {row({1.0, 1.0}, Relation::Equal, 1.0), row({2.0, 2.0}, Relation::Equal, 2.0)},
                  {}};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.objective_value, 2.0, 1e-12);
}

TEST(LpTest, ValidationErrors) {
  LinearProgram arity{{1.0, 1.0}, {row({1.0}, Relation::LessEqual, 1.0)}, {}};
  EXPECT_THROW(solve(arity), InputError);
  LinearProgram rhs{{1.0}, {row({1.0}, Relation::LessEqual, std::numeric_limits<double>::infinity())}, {}};
  EXPECT_THROW(solve(rhs), InputError);
  LinearProgram bounds{{1.0}, {}, {{2.0, 1.0}}};
  EXPECT_THROW(solve(bounds), InputError);
}

TEST(LpTest, IterationLimitIsASolverError) {
  const RateMatrix r = testing::six_bin_rates();
  Options o;
  o.max_iterations = 1;
  EXPECT_THROW(solve(build_maxmin_lp(r, WeightVector({1.0, 1.25})), o), SolverError);
}

// Random feasible programs: primal feasibility, strong duality, dual signs,
// vertex property and determinism.
TEST(LpTest, RandomProgramProperties) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> coef(-10.0, 10.0);
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + gen() % 6;
    const std::size_t m = 1 + gen() % 6;
    LinearProgram p;
    for (std::size_t j = 0; j < n; ++j) p.objective.push_back(coef(gen));
    // A box row keeps everything bounded; the point x0 keeps it feasible.
    std::vector<double> x0(n);
    for (double& v : x0) v = pos(gen) / static_cast<double>(n);
    p.constraints.push_back(row(std::vector<double>(n, 1.0), Relation::LessEqual, 20.0));
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> a(n);
      double ax = 0.0;
      for (std::size_t j = 0; j < n; ++j) ax += (a[j] = coef(gen)) * x0[j];
      const auto rel = static_cast<Relation>(gen() % 3);
      const double b = rel == Relation::LessEqual ? ax + pos(gen) : rel == Relation::GreaterEqual ? ax - pos(gen) : ax;
      p.constraints.push_back(row(std::move(a), rel, b));
    }
    const Solution s = solve(p);
    ASSERT_EQ(s.status, Status::Optimal) << "trial " << trial;

    double dual_obj = 0.0;
    std::size_t nonzero = 0;
    for (double x : s.primal) {
      EXPECT_GE(x, -1e-9);
      nonzero += std::abs(x) > 1e-12;
    }
    EXPECT_LE(nonzero, p.constraints.size());
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      const auto& c = p.constraints[i];
      double ax = 0.0;
      for (std::size_t j = 0; j < n; ++j) ax += c.coeffs[j] * s.primal[j];
      switch (c.relation) {
        case Relation::LessEqual:
          EXPECT_LE(ax, c.rhs + 1e-9);
          EXPECT_GE(s.dual[i], -1e-9);
          break;
        case Relation::GreaterEqual:
          EXPECT_GE(ax, c.rhs - 1e-9);
          EXPECT_LE(s.dual[i], 1e-9);
          break;
        case Relation::Equal:
          EXPECT_NEAR(ax, c.rhs, 1e-9);
          break;
      }
      // Complementary slackness.
      EXPECT_NEAR(s.dual[i] * (ax - c.rhs), 0.0, 1e-8);
      dual_obj += c.rhs * s.dual[i];
    }
    EXPECT_NEAR(dual_obj, s.objective_value, 1e-8 * std::max(1.0, std::abs(s.objective_value)));

    const Solution again = solve(p);
    EXPECT_EQ(again.basis, s.basis);
    EXPECT_EQ(again.status, s.status);
    EXPECT_EQ(again.objective_value, s.objective_value);
  }
}

TEST(LpTest, PivotRulesAgreeOnOptimum) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const RateMatrix r = testing::random_rates(gen, 2 + trial % 3, 10);
    const WeightVector w(testing::random_weights(gen, r.n_users()));
    Options bland;
    bland.pivot_rule = PivotRule::Bland;
    const double a = solve(build_maxmin_lp(r, w), bland).objective_value;
    const double b = solve(build_maxmin_lp(r, w)).objective_value;
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, a));
  }
}

TEST(LpTest, TableauDumpIsCsv) {
  std::ostringstream dump;
  Options o;
  o.tableau_dump = &dump;
  LinearProgram p{{1.0, 1.0}, {row({1.0, 2.0}, Relation::LessEqual, 4.0), row({1.0, 0.0}, Relation::LessEqual, 1.0)}, {}};
  solve(p, o);
  std::istringstream in(dump.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("row,basic,x0,x1", 0), 0u);
  int lines = 1;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1 + 2 + 1);
}

}  // namespace
}  // namespace ofdma::lp
