#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fleetsp/errors.h"
#include "fleetsp/lpcore.h"
#include "oracles.h"

using namespace fleet;

namespace {

Comparator random_cmp(std::mt19937_64& rng, int le_weight = 6) {
  const int k = std::uniform_int_distribution<int>(0, le_weight + 1)(rng);
  if (k < le_weight) return Comparator::kLessEqual;
  return k == le_weight ? Comparator::kGreaterEqual : Comparator::kEqual;
}

// Random program over x >= 0. With `box`, a final row sum x <= B keeps it
// bounded.
LinearProgram random_lp(std::mt19937_64& rng, int max_vars, int max_rows, bool box) {
  std::uniform_int_distribution<int> coef(-5, 5);
  std::uniform_int_distribution<int> rhs(-6, 20);
  const int n = std::uniform_int_distribution<int>(1, max_vars)(rng);
  const int m = std::uniform_int_distribution<int>(1, max_rows)(rng);
  LinearProgram lp;
  for (int j = 0; j < n; ++j) lp.add_variable({}, coef(rng));
  for (int i = 0; i < m; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j) {
      const int a = coef(rng);
      if (a != 0) terms.push_back({j, static_cast<double>(a)});
    }
    lp.add_row(std::move(terms), random_cmp(rng), rhs(rng));
  }
  if (box) {
    std::vector<Term> all;
    for (int j = 0; j < n; ++j) all.push_back({j, 1.0});
    lp.add_row(std::move(all), Comparator::kLessEqual, std::uniform_int_distribution<int>(1, 30)(rng));
  }
  return lp;
}

// Row activity a_i . x.
std::vector<double> column_products(const LinearProgram& lp, const std::vector<double>& y) {
  std::vector<double> out(lp.num_variables(), 0.0);
  for (int i = 0; i < lp.num_rows(); ++i) {
    for (const auto& t : lp.rows()[i].terms) out[t.var] += y[i] * t.coef;
  }
  return out;
}

void check_multiplier_signs(const LinearProgram& lp, const std::vector<double>& y, double tol) {
  for (int i = 0; i < lp.num_rows(); ++i) {
    if (lp.rows()[i].cmp == Comparator::kLessEqual) CHECK(y[i] >= -tol);
    if (lp.rows()[i].cmp == Comparator::kGreaterEqual) CHECK(y[i] <= tol);
  }
}

}  // namespace

TEST_CASE("textbook LP: optimum, point and duals") {
  LinearProgram lp;
  const int x1 = lp.add_variable("x1", 1.0);
  const int x2 = lp.add_variable("x2", 2.0);
  lp.add_row({{x1, 1.0}, {x2, 1.0}}, Comparator::kLessEqual, 4.0);
  lp.add_row({{x2, 1.0}}, Comparator::kLessEqual, 3.0);
  const auto out = solve_lp(lp);
  REQUIRE(out.status == LpStatus::kOptimal);
  CHECK(out.objective == doctest::Approx(7.0));
  CHECK(out.primal[x1] == doctest::Approx(1.0));
  CHECK(out.primal[x2] == doctest::Approx(3.0));
  CHECK(out.duals[0] == doctest::Approx(1.0));
  CHECK(out.duals[1] == doctest::Approx(1.0));
  const auto oracle = oracle::vertex_enumeration(lp);
  CHECK(oracle.objective == doctest::Approx(7.0));
}

TEST_CASE("unbounded LP returns the improving ray") {
  LinearProgram lp;
  lp.add_variable("x1", 1.0);
  const auto out = solve_lp(lp);
  REQUIRE(out.status == LpStatus::kUnbounded);
  REQUIRE(out.ray.size() == 1);
  CHECK(out.ray[0] > 0.0);
}

TEST_CASE("contradictory bounds are infeasible") {
  LinearProgram lp;
  const int x = lp.add_variable("x1", 1.0);
  lp.add_row({{x, 1.0}}, Comparator::kLessEqual, -1.0);
  const auto out = solve_lp(lp);
  CHECK(out.status == LpStatus::kInfeasible);
  REQUIRE(out.farkas.size() == 1);
  CHECK(out.farkas[0] * -1.0 < 0.0);
}

TEST_CASE("general bounds: shifted, mirrored, boxed and free variables") {
  {
    LinearProgram lp;  // max x, x in [-5, 2], x <= 3
    const int x = lp.add_variable("x", 1.0, -5.0, 2.0);
    lp.add_row({{x, 1.0}}, Comparator::kLessEqual, 3.0);
    const auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::kOptimal);
    CHECK(out.objective == doctest::Approx(2.0));
  }
  {
    LinearProgram lp;  // max -x, x free, x >= -4
    const int x = lp.add_variable("x", -1.0, -kInfinity, kInfinity);
    lp.add_row({{x, 1.0}}, Comparator::kGreaterEqual, -4.0);
    const auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::kOptimal);
    CHECK(out.primal[x] == doctest::Approx(-4.0));
    CHECK(out.duals[0] == doctest::Approx(-1.0));
  }
  {
    LinearProgram lp;  // max x + y, x <= 3 (upper only), y in [1, 1]
    const int x = lp.add_variable("x", 1.0, -kInfinity, 3.0);
    const int y = lp.add_variable("y", 1.0, 1.0, 1.0);
    lp.add_row({{x, 1.0}, {y, 1.0}}, Comparator::kLessEqual, 10.0);
    const auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::kOptimal);
    CHECK(out.objective == doctest::Approx(4.0));
    CHECK(out.primal[y] == doctest::Approx(1.0));
  }
  {
    LinearProgram lp;  // equality with negative rhs
    const int x = lp.add_variable("x", 1.0, -kInfinity, kInfinity);
    const int y = lp.add_variable("y", -2.0);
    lp.add_row({{x, 1.0}, {y, -1.0}}, Comparator::kEqual, -3.0);
    lp.add_row({{x, 1.0}}, Comparator::kLessEqual, 5.0);
    const auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::kOptimal);
    // y = x + 3 >= 0, objective x - 2x - 6 = -x - 6 maximized at x = -3.
    CHECK(out.objective == doctest::Approx(-3.0));
  }
}

TEST_CASE("redundant equalities and degenerate vertices solve cleanly") {
  LinearProgram lp;
  const int a = lp.add_variable("a", 1.0);
  const int b = lp.add_variable("b", 1.0);
  lp.add_row({{a, 1.0}, {b, 1.0}}, Comparator::kEqual, 2.0);
  lp.add_row({{a, 2.0}, {b, 2.0}}, Comparator::kEqual, 4.0);
  lp.add_row({{a, 1.0}}, Comparator::kLessEqual, 0.0);
  lp.add_row({{a, 1.0}, {b, -1.0}}, Comparator::kLessEqual, 0.0);
  const auto out = solve_lp(lp);
  REQUIRE(out.status == LpStatus::kOptimal);
  CHECK(out.objective == doctest::Approx(2.0));
  CHECK(lp.max_violation(out.primal) <= 1e-9);
}

TEST_CASE("property: random small LPs match vertex enumeration") {
  std::mt19937_64 rng(101);
  int optimal = 0;
  for (int round = 0; round < 400; ++round) {
    const LinearProgram lp = random_lp(rng, 3, 4, true);
    const auto oracle = oracle::vertex_enumeration(lp);
    const auto out = solve_lp(lp);
    if (!oracle.feasible) {
      CHECK(out.status == LpStatus::kInfeasible);
      continue;
    }
    REQUIRE(out.status == LpStatus::kOptimal);
    ++optimal;
    CHECK(std::abs(out.objective - oracle.objective) <= 1e-7);
    CHECK(lp.max_violation(out.primal) <= 1e-7);
    CHECK(std::abs(lp.evaluate(out.primal) - out.objective) <= 1e-7);
  }
  CHECK(optimal > 100);
}

TEST_CASE("property: strong duality and dual feasibility") {
  std::mt19937_64 rng(202);
  int checked = 0;
  for (int round = 0; round < 300; ++round) {
    const LinearProgram lp = random_lp(rng, 8, 8, true);
    const auto out = solve_lp(lp);
    if (out.status != LpStatus::kOptimal) continue;
    ++checked;
    double dual_obj = 0.0;
    for (int i = 0; i < lp.num_rows(); ++i) dual_obj += out.duals[i] * lp.rows()[i].rhs;
    CHECK(std::abs(dual_obj - out.objective) <= 1e-6 * (1.0 + std::abs(out.objective)));
    check_multiplier_signs(lp, out.duals, 1e-9);
    const auto aty = column_products(lp, out.duals);
    for (int j = 0; j < lp.num_variables(); ++j) CHECK(aty[j] >= lp.objective()[j] - 1e-7);
  }
  CHECK(checked > 100);
}

TEST_CASE("property: unbounded rays stay feasible and improve") {
  std::mt19937_64 rng(303);
  int rays = 0;
  for (int round = 0; round < 400; ++round) {
    const LinearProgram lp = random_lp(rng, 4, 3, false);
    const auto out = solve_lp(lp);
    if (out.status != LpStatus::kUnbounded) continue;
    ++rays;
    double slope = 0.0;
    for (int j = 0; j < lp.num_variables(); ++j) slope += lp.objective()[j] * out.ray[j];
    CHECK(slope > 1e-9);
    const double base = lp.evaluate(out.primal);
    for (const double alpha : {1.0, 10.0, 100.0}) {
      std::vector<double> x = out.primal;
      for (int j = 0; j < lp.num_variables(); ++j) x[j] += alpha * out.ray[j];
      CHECK(lp.max_violation(x) <= 1e-7 * (1.0 + alpha));
      CHECK(lp.evaluate(x) > base);
    }
  }
  CHECK(rays > 20);
}

TEST_CASE("property: infeasible programs carry a Farkas certificate") {
  std::mt19937_64 rng(404);
  int certificates = 0;
  for (int round = 0; round < 400; ++round) {
    const LinearProgram lp = random_lp(rng, 4, 5, false);
    const auto out = solve_lp(lp);
    if (out.status != LpStatus::kInfeasible) continue;
    ++certificates;
    check_multiplier_signs(lp, out.farkas, 1e-9);
    const auto ya = column_products(lp, out.farkas);
    for (const double v : ya) CHECK(v >= -1e-9);
    double yb = 0.0;
    for (int i = 0; i < lp.num_rows(); ++i) yb += out.farkas[i] * lp.rows()[i].rhs;
    CHECK(yb < -1e-9);
  }
  CHECK(certificates > 20);
}

TEST_CASE("identical programs give identical outcomes") {
  std::mt19937_64 rng(505);
  for (int round = 0; round < 50; ++round) {
    const LinearProgram lp = random_lp(rng, 6, 6, true);
    const auto a = solve_lp(lp);
    const auto b = solve_lp(lp);
    CHECK(a.status == b.status);
    CHECK(a.primal == b.primal);
    CHECK(a.duals == b.duals);
    CHECK(a.pivots == b.pivots);
  }
}

TEST_CASE("frequent refactorization does not change answers") {
  std::mt19937_64 rng(606);
  SimplexOptions often;
  often.refactor_interval = 1;
  for (int round = 0; round < 60; ++round) {
    const LinearProgram lp = random_lp(rng, 8, 8, true);
    const auto a = solve_lp(lp);
    const auto b = solve_lp(lp, often);
    REQUIRE(a.status == b.status);
    if (a.status == LpStatus::kOptimal) CHECK(a.objective == doctest::Approx(b.objective));
  }
}

TEST_CASE("invalid programs are rejected") {
  LinearProgram lp;
  lp.add_variable("x", 1.0);
  CHECK_THROWS_AS(lp.add_row({{3, 1.0}}, Comparator::kLessEqual, 1.0), ConfigError);
  LinearProgram inverted;
  CHECK_THROWS_AS(inverted.add_variable("x", 1.0, 2.0, 1.0), ConfigError);
}

TEST_CASE("write_lp lists objective, rows and bounds") {
  LinearProgram lp;
  const int x = lp.add_variable("x", 3.0, 0.0, 4.0, true);
  lp.add_row({{x, 2.0}}, Comparator::kLessEqual, 5.0, "cap");
  std::ostringstream out;
  lp.write_lp(out);
  const std::string text = out.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("cap") != std::string::npos);
  CHECK(text.find("x") != std::string::npos);
}

TEST_CASE("MIP: floor of a single integer variable") {
  LinearProgram lp;
  const int x = lp.add_variable("x", 1.0, 0.0, kInfinity, true);
  lp.add_row({{x, 1.0}}, Comparator::kLessEqual, 2.5);
  const auto out = solve_mip(lp);
  REQUIRE(out.status == MipStatus::kOptimal);
  CHECK(out.objective == 2.0);
  CHECK(out.primal[x] == 2.0);
  CHECK(out.root_bound == doctest::Approx(2.5));
}

TEST_CASE("MIP: binary knapsack") {
  LinearProgram lp;
  const int a = lp.add_variable("a", 5.0, 0.0, 1.0, true);
  const int b = lp.add_variable("b", 4.0, 0.0, 1.0, true);
  lp.add_row({{a, 3.0}, {b, 2.0}}, Comparator::kLessEqual, 4.0);
  // Enumeration: (0,1) -> 4, (1,0) -> 5, (1,1) infeasible.
  const auto out = solve_mip(lp);
  REQUIRE(out.status == MipStatus::kOptimal);
  CHECK(out.objective == doctest::Approx(5.0));
  CHECK(out.primal[a] == 1.0);
  CHECK(out.primal[b] == 0.0);
}

TEST_CASE("MIP: integral relaxation is solved at the root") {
  LinearProgram lp;
  const int a = lp.add_variable("a", 1.0, 0.0, kInfinity, true);
  const int b = lp.add_variable("b", 1.0, 0.0, kInfinity, true);
  lp.add_row({{a, 1.0}}, Comparator::kLessEqual, 3.0);
  lp.add_row({{b, 1.0}}, Comparator::kLessEqual, 2.0);
  const auto mip = solve_mip(lp);
  const auto relax = solve_lp(lp);
  REQUIRE(mip.status == MipStatus::kOptimal);
  CHECK(mip.objective == doctest::Approx(relax.objective));
  CHECK(mip.nodes == 1);
}

TEST_CASE("MIP: infeasible and unbounded statuses") {
  LinearProgram infeasible;
  const int x = infeasible.add_variable("x", 1.0, 0.0, kInfinity, true);
  infeasible.add_row({{x, 2.0}}, Comparator::kEqual, 1.0);
  CHECK(solve_mip(infeasible).status == MipStatus::kInfeasible);

  LinearProgram unbounded;
  unbounded.add_variable("x", 1.0, 0.0, kInfinity, true);
  CHECK(solve_mip(unbounded).status == MipStatus::kUnbounded);
}

TEST_CASE("property: random bounded integer programs match enumeration") {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> coef(-4, 6);
  for (int round = 0; round < 150; ++round) {
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const int m = std::uniform_int_distribution<int>(1, 3)(rng);
    LinearProgram lp;
    for (int j = 0; j < n; ++j) lp.add_variable({}, coef(rng), 0.0, 4.0, true);
    for (int i = 0; i < m; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < n; ++j) terms.push_back({j, static_cast<double>(coef(rng))});
      lp.add_row(std::move(terms), random_cmp(rng, 3),
                 std::uniform_int_distribution<int>(-3, 15)(rng) + 0.5 * (round % 2));
    }
    // Exhaustive search over the integer box.
    double best = -kInfinity;
    std::vector<double> x(n, 0.0);
    const int points = static_cast<int>(std::pow(5, n));
    for (int code = 0; code < points; ++code) {
      int c = code;
      for (int j = 0; j < n; ++j) {
        x[j] = c % 5;
        c /= 5;
      }
      if (lp.max_violation(x) <= 1e-9) best = std::max(best, lp.evaluate(x));
    }
    const auto out = solve_mip(lp);
    if (best == -kInfinity) {
      CHECK(out.status == MipStatus::kInfeasible);
    } else {
      REQUIRE(out.status == MipStatus::kOptimal);
      CHECK(std::abs(out.objective - best) <= 1e-6);
      CHECK(lp.max_violation(out.primal) <= 1e-7);
      for (const double v : out.primal) CHECK(v == std::round(v));
    }
  }
}

TEST_CASE("MIP: a feasible start becomes the first incumbent, an infeasible one is ignored") {
  LinearProgram lp;
  const int a = lp.add_variable("a", 5.0, 0.0, 1.0, true);
  const int b = lp.add_variable("b", 4.0, 0.0, 1.0, true);
  lp.add_row({{a, 3.0}, {b, 2.0}}, Comparator::kLessEqual, 4.0);
  MipOptions opts;
  // (1, 0) is already optimal, so nothing beats it and it comes back.
  opts.start = {1.0, 0.0};
  const auto hinted = solve_mip(lp, opts);
  REQUIRE(hinted.status == MipStatus::kOptimal);
  CHECK(hinted.primal == std::vector<double>{1.0, 0.0});
  CHECK(hinted.objective == 5.0);
  for (const auto& bad : {std::vector<double>{1.0, 1.0}, std::vector<double>{0.5, 0.0}, std::vector<double>{1.0}}) {
    opts.start = bad;
    const auto out = solve_mip(lp, opts);
    REQUIRE(out.status == MipStatus::kOptimal);
    CHECK(out.objective == doctest::Approx(5.0));
  }
}

TEST_CASE("property: the proven bound brackets the optimum within the gap") {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> coef(1, 9);
  for (int round = 0; round < 60; ++round) {
    // Bounded knapsack-like programs with fractional relaxations.
    const int n = std::uniform_int_distribution<int>(2, 5)(rng);
    LinearProgram lp;
    std::vector<Term> w;
    for (int j = 0; j < n; ++j) {
      lp.add_variable({}, coef(rng) + 0.25 * (j % 3), 0.0, 6.0, true);
      w.push_back({j, static_cast<double>(coef(rng))});
    }
    lp.add_row(std::move(w), Comparator::kLessEqual, std::uniform_int_distribution<int>(5, 40)(rng) + 0.5);
    const auto exact = solve_mip(lp);
    REQUIRE(exact.status == MipStatus::kOptimal);
    CHECK(exact.bound >= exact.objective);
    CHECK(exact.bound <= exact.objective + 1e-6);

    MipOptions loose;
    loose.absolute_gap = 2.0;
    const auto rough = solve_mip(lp, loose);
    REQUIRE(rough.status == MipStatus::kOptimal);
    CHECK(rough.objective <= exact.objective + 1e-9);
    CHECK(rough.bound >= exact.objective - 1e-9);
    CHECK(rough.bound <= rough.objective + 2.0 + 1e-9);
  }
}
