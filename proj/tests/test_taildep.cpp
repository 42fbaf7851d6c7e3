#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "epiproc/gridfn.hpp"
#include "epiproc/matrix.hpp"
#include "epiproc/rng.hpp"
#include "epiproc/taildep.hpp"

using namespace epiproc;
using namespace epiproc::taildep;
using epiproc::gridfn::GridDomain;
using epiproc::gridfn::GridFunction;
using epiproc::rng::Rng;

namespace {

Matrix comonotone_rows(std::size_t n) {
  Matrix m(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    m.at(i, 0) = 0.1 * static_cast<double>(i + 1);
    m.at(i, 1) = 0.2 * static_cast<double>(i + 1);
  }
  return m;
}

GridDomain orthant_grid(std::size_t points) {
  return GridDomain({0.0, 0.0}, {2.0, 2.0}, {points, points});
}

}  // namespace

TEST_SUITE("taildep") {

TEST_CASE("model closed forms") {
  const TailModel mx = tail_model_max();
  CHECK(mx.L({1.0, 2.0}) == 2.0);
  CHECK(mx.L({3.0, 0.5}) == 3.0);
  CHECK(mx.grad(0, {2.0, 1.0}) == 1.0);  // below the diagonal: d/dx max = 1
  CHECK(mx.grad(1, {2.0, 1.0}) == 0.0);
  CHECK(mx.grad(0, {1.0, 2.0}) == 0.0);
  CHECK(mx.grad(1, {1.0, 2.0}) == 1.0);
  CHECK(!mx.in_S({1.0, 1.0}));
  CHECK(mx.in_S({1.0, 2.0}));
  CHECK_THROWS_AS(mx.grad(0, {1.0, 1.0}), std::invalid_argument);

  const TailModel ind = tail_model_indep();
  CHECK(ind.L({1.0, 2.0}) == 3.0);
  CHECK(ind.grad(0, {0.3, 0.4}) == 1.0);
  CHECK(ind.grad(1, {0.3, 0.4}) == 1.0);
  CHECK(ind.in_S({1.0, 1.0}));
}

TEST_CASE("model families satisfy the tail dependence function axioms") {
  Rng rng(5);
  for (const TailModel& m : {tail_model_max(), tail_model_indep()}) {
    for (int trial = 0; trial < 200; ++trial) {
      const std::vector<double> x = {3.0 * rng.uniform01(),
                                     3.0 * rng.uniform01()};
      const std::vector<double> y = {3.0 * rng.uniform01(),
                                     3.0 * rng.uniform01()};
      const double t = rng.uniform01();
      const double c = 0.1 + 4.0 * rng.uniform01();
      CHECK(m.L(x) >= std::max(x[0], x[1]) - 1e-12);
      CHECK(m.L(x) <= x[0] + x[1] + 1e-12);
      CHECK(m.L({c * x[0], c * x[1]}) == doctest::Approx(c * m.L(x)));
      const std::vector<double> mix = {t * x[0] + (1.0 - t) * y[0],
                                       t * x[1] + (1.0 - t) * y[1]};
      CHECK(m.L(mix) <= t * m.L(x) + (1.0 - t) * m.L(y) + 1e-12);
    }
  }
}

TEST_CASE("samplers match their models") {
  Rng rng(6);
  const Matrix co = tail_model_max().sample(200, rng);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(co.at(i, 0) == co.at(i, 1));
  }
  const Matrix ind = tail_model_indep().sample(200, rng);
  std::size_t ties = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    if (ind.at(i, 0) == ind.at(i, 1)) ++ties;
  }
  CHECK(ties == 0);
}

TEST_CASE("hand-computed estimates on five comonotone rows") {
  // Ranks are (i, i), i = 1..5, and k = 2. The symmetric rank threshold is
  // n + 1/2 - k x_j: at x = (1,1) rows 4 and 5 exceed in a coordinate, at
  // x = (1,2) rows 2..5 do.
  const Matrix raw = comonotone_rows(5);
  CHECK(stable_tail_estimator(raw, 2, {1.0, 1.0}) == 1.0);
  CHECK(stable_tail_estimator(raw, 2, {1.0, 2.0}) == 2.0);
  CHECK(stable_tail_estimator(raw, 2, {0.0, 0.0}) == 0.0);
}

TEST_CASE("estimator input validation") {
  const Matrix raw = comonotone_rows(5);
  CHECK_THROWS_AS(stable_tail_estimator(raw, 0, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(stable_tail_estimator(raw, 5, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(stable_tail_estimator(raw, 2, {-1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(stable_tail_estimator(raw, 2, {1.0}),
                  std::invalid_argument);

  Matrix tied(3, 2);
  tied.at(0, 0) = 1.0;
  tied.at(0, 1) = 1.0;
  tied.at(1, 0) = 1.0;
  tied.at(1, 1) = 2.0;
  tied.at(2, 0) = 3.0;
  tied.at(2, 1) = 3.0;
  try {
    stable_tail_estimator(tied, 1, {1.0, 1.0});
    FAIL("expected a tie error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("column") != std::string::npos);
  }
}

TEST_CASE("estimates are invariant under monotone marginal transforms") {
  Rng rng(8);
  const Matrix raw = tail_model_indep().sample(300, rng);
  Matrix warped(300, 2);
  for (std::size_t i = 0; i < 300; ++i) {
    warped.at(i, 0) = std::exp(3.0 * raw.at(i, 0));
    warped.at(i, 1) = std::atan(raw.at(i, 1) - 0.5);
  }
  for (double x1 : {0.0, 0.5, 1.0, 1.7}) {
    for (double x2 : {0.0, 0.5, 1.0, 1.7}) {
      CHECK(stable_tail_estimator(raw, 30, {x1, x2}) ==
            stable_tail_estimator(warped, 30, {x1, x2}));
    }
  }
}

TEST_CASE("estimates grow with the argument and start at zero") {
  Rng rng(9);
  const Matrix raw = tail_model_max().sample(400, rng);
  CHECK(stable_tail_estimator(raw, 20, {0.0, 0.0}) == 0.0);
  double prev = 0.0;
  for (double t : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    const double cur = stable_tail_estimator(raw, 20, {t, t});
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("grid process equals pointwise calls exactly") {
  Rng rng(10);
  const TailModel m = tail_model_indep();
  const Matrix raw = m.sample(200, rng);
  const std::size_t k = 20;
  const GridDomain grid = orthant_grid(9);
  const GridFunction proc = estimator_process(raw, m, k, grid);
  const double root_k = std::sqrt(static_cast<double>(k));
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      const std::vector<double> x = {grid.coordinate(0, i),
                                     grid.coordinate(1, j)};
      const double direct =
          root_k * (stable_tail_estimator(raw, k, x) - m.L(x));
      CHECK(proc.at({i, j}) == direct);
    }
  }
}

TEST_CASE("process grid must live in the nonnegative orthant") {
  Rng rng(11);
  const TailModel m = tail_model_indep();
  const Matrix raw = m.sample(50, rng);
  const GridDomain bad({-0.5, 0.0}, {2.0, 2.0}, {5, 5});
  CHECK_THROWS_AS(estimator_process(raw, m, 5, bad), std::invalid_argument);
}

TEST_CASE("gradient extension brackets the diagonal kink") {
  const GridDomain grid = orthant_grid(9);
  const GridDomain axis({0.0}, {2.0}, {9});
  const std::vector<GridFunction> a = {
      GridFunction(axis, std::vector<double>(9, -1.0)),
      GridFunction(axis, std::vector<double>(9, 1.0))};
  const hypi::ScExtension ext = dL_extension(tail_model_max(), a, grid);
  CHECK(ext.max_radius_used >= 1);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      const double lo = ext.lower.at({i, j});
      const double hi = ext.upper.at({i, j});
      if (i == j) {
        // On the diagonal the off-diagonal neighbors contribute both signs.
        CHECK(lo == -1.0);
        CHECK(hi == 1.0);
      } else {
        const double g = (i > j) ? -1.0 : 1.0;
        CHECK(lo == g);
        CHECK(hi == g);
      }
    }
  }
}

}  // TEST_SUITE
