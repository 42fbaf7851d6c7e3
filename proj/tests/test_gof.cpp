#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "epiproc/copula.hpp"
#include "epiproc/gof.hpp"
#include "epiproc/gridfn.hpp"
#include "epiproc/matrix.hpp"
#include "epiproc/rng.hpp"

using namespace epiproc;
using namespace epiproc::gof;
using epiproc::copula::PseudoSample;
using epiproc::gridfn::GridDomain;
using epiproc::gridfn::GridFunction;
using epiproc::rng::Rng;

namespace {

PseudoSample toy_pseudo() {
  Matrix x(2, 2);
  x.at(0, 0) = 0.2;
  x.at(0, 1) = 0.3;
  x.at(1, 0) = 0.7;
  x.at(1, 1) = 0.6;
  return copula::pseudo_observations(x);
}

}  // namespace

TEST_SUITE("gof") {

TEST_CASE("local alternative validation and realization") {
  CHECK_THROWS_AS(LocalAlternative(-0.5, 100), std::invalid_argument);
  CHECK_THROWS_AS(LocalAlternative(10.0, 25), std::invalid_argument);
  CHECK_THROWS_AS(LocalAlternative(1.0, 0), std::invalid_argument);

  const LocalAlternative null_alt(0.0, 100);
  const copula::CopulaModel c0 = null_alt.realize();
  CHECK(c0.eval({0.3, 0.7}) == 0.3 * 0.7);

  const LocalAlternative alt(2.0, 400);  // mixture weight 0.1
  const copula::CopulaModel c1 = alt.realize();
  CHECK(c1.eval({0.3, 0.7}) ==
        doctest::Approx(0.9 * 0.21 + 0.1 * 0.3).epsilon(1e-15));
}

TEST_CASE("frozen toy statistics") {
  // Two pseudo-observations (0.5, 0.5) and (1, 1) against the product
  // copula on the 3x3 unit-cube grid: five grid points have difference 0.5
  // and the center has 0.25, so T_2 = 2 * 1.3125 / 9 = 7/24 and
  // S_2 = sqrt(2) * 0.5.
  const PseudoSample s = toy_pseudo();
  const GridDomain grid = gridfn::unit_cube_domain(2, 3);
  CHECK(cvm_statistic(s, grid) == doctest::Approx(7.0 / 24.0).epsilon(1e-14));
  CHECK(ks_statistic(s, grid) == std::sqrt(2.0) * 0.5);
}

TEST_CASE("quadrature functional matches the L2 distance bit for bit") {
  Rng rng(7);
  const GridDomain grid = gridfn::unit_cube_domain(2, 13);
  std::vector<double> vals(grid.total_points());
  for (double& v : vals) v = rng.normal();
  const GridFunction proc(grid, vals);
  const GridFunction zero(grid, std::vector<double>(grid.total_points(), 0.0));
  CHECK(std::sqrt(cvm_from_process(proc)) ==
        gridfn::lp_distance(proc, zero, 2.0));
}

TEST_CASE("sup functional is the max absolute value") {
  const GridDomain grid = gridfn::unit_cube_domain(1, 4);
  const GridFunction proc(grid, {0.2, -0.9, 0.4, 0.1});
  CHECK(ks_from_process(proc) == 0.9);

  const GridFunction flat(grid, std::vector<double>(4, 0.3));
  CHECK(ks_from_process(flat) == 0.3);
  CHECK(cvm_from_process(flat) == doctest::Approx(0.09).epsilon(1e-15));
}

TEST_CASE("power curve input validation") {
  const GridDomain grid = gridfn::unit_cube_domain(2, 5);
  const std::vector<double> deltas = {0.0};
  CHECK_THROWS_AS(power_curve(deltas, 100, grid, 0.05, 100, 500, 1),
                  std::invalid_argument);  // reps too small
  CHECK_THROWS_AS(power_curve(deltas, 100, grid, 0.05, 600, 500, 1),
                  std::invalid_argument);  // null phase smaller than reps
  CHECK_THROWS_AS(power_curve(deltas, 100, grid, 0.0, 500, 500, 1),
                  std::invalid_argument);  // level zero
  CHECK_THROWS_AS(power_curve(deltas, 100, grid, 1.5, 500, 500, 1),
                  std::invalid_argument);  // level above one
  const GridDomain cube = gridfn::unit_cube_domain(3, 5);
  CHECK_THROWS_AS(power_curve(deltas, 100, cube, 0.05, 500, 500, 1),
                  std::invalid_argument);  // alternatives are bivariate
}

TEST_CASE("level one rejects everything") {
  const GridDomain grid = gridfn::unit_cube_domain(2, 5);
  const std::vector<PowerRow> rows =
      power_curve({0.0}, 30, grid, 1.0, 500, 500, 11);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].reject_rate_T == 1.0);
  CHECK(rows[0].reject_rate_S == 1.0);
  CHECK(rows[0].mc_se == 0.0);
}

TEST_CASE("null rejection tracks the level and power grows with delta") {
  const GridDomain grid = gridfn::unit_cube_domain(2, 9);
  const std::vector<PowerRow> rows =
      power_curve({0.0, 4.0}, 50, grid, 0.1, 600, 1200, 2024);
  REQUIRE(rows.size() == 2);
  // Binomial SE at rate 0.1 with 600 reps is about 0.0122.
  CHECK(rows[0].reject_rate_T == doctest::Approx(0.1).epsilon(0.5));
  CHECK(std::fabs(rows[0].reject_rate_T - 0.1) <= 4.0 * 0.0123);
  CHECK(std::fabs(rows[0].reject_rate_S - 0.1) <= 4.0 * 0.0123);
  CHECK(rows[1].reject_rate_T >= rows[0].reject_rate_T);
  CHECK(rows[1].reject_rate_S >= rows[0].reject_rate_S);
  for (const PowerRow& row : rows) {
    const double se_t =
        std::sqrt(row.reject_rate_T * (1.0 - row.reject_rate_T) / 600.0);
    const double se_s =
        std::sqrt(row.reject_rate_S * (1.0 - row.reject_rate_S) / 600.0);
    CHECK(row.mc_se == std::max(se_t, se_s));
  }
}

TEST_CASE("power curve is deterministic and thread-invariant") {
  const GridDomain grid = gridfn::unit_cube_domain(2, 5);
  const std::vector<PowerRow> one =
      power_curve({0.0, 2.0}, 40, grid, 0.1, 500, 500, 99, 1);
  const std::vector<PowerRow> three =
      power_curve({0.0, 2.0}, 40, grid, 0.1, 500, 500, 99, 3);
  REQUIRE(one.size() == three.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].reject_rate_T == three[i].reject_rate_T);
    CHECK(one[i].reject_rate_S == three[i].reject_rate_S);
    CHECK(one[i].mc_se == three[i].mc_se);
  }
}

}  // TEST_SUITE
