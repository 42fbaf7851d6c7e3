#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "epiproc/gridfn.hpp"
#include "epiproc/hypi.hpp"
#include "epiproc/rng.hpp"

using namespace epiproc::gridfn;
using namespace epiproc::hypi;
using epiproc::rng::Rng;

namespace {

GridFunction random_function(const GridDomain& dom, Rng& rng, double scale) {
  std::vector<double> v(dom.total_points());
  for (double& x : v) x = scale * (2.0 * rng.uniform01() - 1.0);
  return GridFunction(dom, std::move(v));
}

GridFunction step_at(const GridDomain& dom, double threshold) {
  std::vector<double> v(dom.total_points());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = dom.coordinate(0, i) >= threshold ? 1.0 : 0.0;
  }
  return GridFunction(dom, std::move(v));
}

}  // namespace

TEST_SUITE("hypi") {

TEST_CASE("config validation") {
  CHECK_THROWS_AS(HypiConfig(1.0, 0.0, 11), std::invalid_argument);
  CHECK_THROWS_AS(HypiConfig(0.0, 1.0, 1), std::invalid_argument);
  const GridDomain dom({0.0}, {1.0}, {11});
  const HypiConfig cfg(-2.0, 2.0, 41);
  CHECK(cfg.cell_diameter(dom) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("rasters of a flat function") {
  const GridDomain dom({0.0}, {1.0}, {3});
  const GridFunction zero(dom, {0.0, 0.0, 0.0});
  const HypiConfig cfg(0.0, 1.0, 3);
  const RasterSet epi = epigraph(zero, cfg);
  const RasterSet hypo = hypograph(zero, cfg);
  CHECK(epi.member_count() == 9);   // every column filled from y = 0 upward
  CHECK(hypo.member_count() == 3);  // only the y = 0 row
  for (std::size_t x = 0; x < 3; ++x) {
    CHECK(epi.boundary()[x] == 0);
    CHECK(hypo.boundary()[x] == 0);
    CHECK(epi.contains(x, 2));
    CHECK(!hypo.contains(x, 1));
  }
}

TEST_CASE("window violations name the offending value") {
  const GridDomain dom({0.0}, {1.0}, {3});
  const GridFunction f(dom, {0.0, 2.0, 0.0});
  const HypiConfig cfg(0.0, 1.0, 3);
  try {
    epigraph(f, cfg);
    FAIL("expected a window violation");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("jump relocation distance is the horizontal offset") {
  const GridDomain dom({0.0}, {1.0}, {11});
  const GridFunction f = step_at(dom, 0.5);
  const GridFunction g = step_at(dom, 0.6);
  const HypiConfig cfg(-0.5, 1.5, 201);
  CHECK(sup_distance(f, g) == 1.0);
  CHECK(hypi_distance(f, g, cfg) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("spike against zero separates at the full height") {
  const GridDomain dom({0.0}, {1.0}, {101});
  std::vector<double> v(101, 0.0);
  v[50] = 1.0;
  const GridFunction spike(dom, v);
  const GridFunction zero(dom, std::vector<double>(101, 0.0));
  const HypiConfig cfg(-0.5, 1.5, 201);
  CHECK(hypi_distance(spike, zero, cfg) == 1.0);
}

TEST_CASE("functions sharing both hulls are at distance zero") {
  // Alternating combs offset by one grid point: radius-1 hulls agree
  // although the functions disagree everywhere on the teeth.
  const GridDomain dom({0.0}, {1.0}, {5});
  const GridFunction f(dom, {0.0, 1.0, 0.0, 1.0, 0.0});
  const GridFunction g(dom, {1.0, 0.0, 1.0, 0.0, 1.0});
  const HypiConfig cfg(-0.5, 1.5, 101);
  CHECK(sup_distance(f, g) == 1.0);
  CHECK(hypi_distance(f, g, cfg) == 0.0);
}

TEST_CASE("semimetric properties on random functions") {
  Rng rng(21);
  const HypiConfig cfg(-2.0, 2.0, 81);
  const GridDomain line({0.0}, {1.0}, {31});
  const GridDomain square({0.0, 0.0}, {1.0, 1.0}, {9, 9});
  for (int trial = 0; trial < 25; ++trial) {
    for (const GridDomain& dom : {line, square}) {
      const GridFunction f = random_function(dom, rng, 1.5);
      const GridFunction g = random_function(dom, rng, 1.5);
      const GridFunction h = random_function(dom, rng, 1.5);
      const double fg = hypi_distance(f, g, cfg);
      const double gf = hypi_distance(g, f, cfg);
      CHECK(fg == gf);
      CHECK(fg >= 0.0);
      CHECK(hypi_distance(f, f, cfg) == 0.0);
      const double fh = hypi_distance(f, h, cfg);
      const double hg = hypi_distance(h, g, cfg);
      CHECK(fg <= fh + hg + 1e-12);
      CHECK(fg <= sup_distance(f, g) + cfg.cell_diameter(dom) + 1e-12);
    }
  }
}

TEST_CASE("both backends agree bit for bit") {
  Rng rng(22);
  const GridDomain line({0.0}, {1.0}, {41});
  const GridDomain square({0.0, 0.0}, {1.0, 1.0}, {7, 11});
  for (int trial = 0; trial < 15; ++trial) {
    for (const GridDomain& dom : {line, square}) {
      const GridFunction f = random_function(dom, rng, 1.0);
      const GridFunction g = random_function(dom, rng, 1.0);
      const HypiConfig brute(-2.0, 2.0, 61, 1, HausdorffBackend::brute_force);
      const HypiConfig fast(-2.0, 2.0, 61, 1,
                            HausdorffBackend::distance_transform);
      CHECK(hypi_distance(f, g, brute) == hypi_distance(f, g, fast));
      // Mixed orientations exercise the documented brute-force fallback.
      const RasterSet epi_f = epigraph(f, fast);
      const RasterSet hypo_g = hypograph(g, fast);
      CHECK(hausdorff_distance(epi_f, hypo_g,
                               HausdorffBackend::distance_transform) ==
            hausdorff_distance(epi_f, hypo_g, HausdorffBackend::brute_force));
    }
  }
}

TEST_CASE("semicontinuous extension of a masked function") {
  const GridDomain dom({0.0}, {1.0}, {5});
  const GridFunction base(dom, {9.0, 1.0, 9.0, 9.0, 5.0});
  const MaskedGridFunction masked(base, {0, 1, 0, 0, 1});

  const ScExtension ext0 = sc_extension(masked, 0);
  CHECK(ext0.lower.values() == std::vector<double>{1.0, 1.0, 1.0, 5.0, 5.0});
  CHECK(ext0.upper.values() == std::vector<double>{1.0, 1.0, 1.0, 5.0, 5.0});
  CHECK(ext0.radius_used == std::vector<std::size_t>{1, 0, 1, 1, 0});
  CHECK(ext0.max_radius_used == 1);

  const ScExtension ext1 = sc_extension(masked, 1);
  CHECK(ext1.lower.values() == std::vector<double>{1.0, 1.0, 1.0, 5.0, 5.0});
  CHECK(ext1.radius_used == std::vector<std::size_t>{1, 1, 1, 1, 1});

  // A fully defined mask with radius >= 1 reduces to the plain hulls.
  const MaskedGridFunction full(base, {1, 1, 1, 1, 1});
  const ScExtension hulls = sc_extension(full, 1);
  CHECK(hulls.lower.values() == lsc_hull(base, 1).values());
  CHECK(hulls.upper.values() == usc_hull(base, 1).values());
  CHECK(hulls.max_radius_used == 1);
}

TEST_CASE("directional extension brackets a sign jump across the diagonal") {
  // Gradient field of the two-dimensional max function with constant
  // directions a = (-1, +1): the sum is -1 below the diagonal and +1 above
  // it, undefined on it. The extension must sandwich the diagonal.
  const GridDomain dom({0.0, 0.0}, {1.0, 1.0}, {5, 5});
  const GridDomain axis({0.0}, {1.0}, {5});
  const std::vector<GridFunction> a = {
      GridFunction(axis, std::vector<double>(5, -1.0)),
      GridFunction(axis, std::vector<double>(5, 1.0))};
  const auto partial = [](std::size_t j, const std::vector<double>& v) {
    const bool below = v[0] > v[1];  // x > y lies below the diagonal
    return (j == 0) == below ? 1.0 : 0.0;
  };
  const auto in_S = [](const std::vector<double>& v) {
    return std::fabs(v[0] - v[1]) > 1e-12;
  };
  const ScExtension ext = directional_extension(dom, partial, in_S, a, 0);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double lo = ext.lower.at({i, j});
      const double hi = ext.upper.at({i, j});
      if (i == j) {
        CHECK(lo == -1.0);
        CHECK(hi == 1.0);
      } else {
        CHECK(lo == hi);
        CHECK(lo == (i > j ? -1.0 : 1.0));
      }
    }
  }
}

TEST_CASE("convergence report separates hypi from uniform convergence") {
  const GridDomain dom({0.0}, {1.0}, {101});
  const HypiConfig cfg(-0.5, 1.5, 201);

  // Shrinking tent spikes: hypi-converge to the single-point spike, but
  // never uniformly.
  std::vector<double> limit_vals(101, 0.0);
  limit_vals[50] = 1.0;
  const GridFunction limit(dom, limit_vals);
  std::vector<GridFunction> seq;
  for (int n : {2, 4, 8, 16, 32, 64, 128, 256}) {
    std::vector<double> v(101);
    for (std::size_t i = 0; i < 101; ++i) {
      const double x = dom.coordinate(0, i);
      v[i] = std::max(0.0, 1.0 - n * std::fabs(x - 0.5));
    }
    seq.emplace_back(dom, std::move(v));
  }
  const ConvergenceReport spiky = check_hypi_convergence(seq, limit, cfg);
  CHECK(spiky.hypi_converges);
  CHECK(!spiky.uniform_converges);
  CHECK(spiky.tail_start == 5);  // last third of eight terms, at least one

  // Uniformly convergent perturbations converge in both senses.
  std::vector<GridFunction> smooth;
  for (int n : {1, 2, 4, 8, 16, 32}) {
    std::vector<double> v(101);
    for (std::size_t i = 0; i < 101; ++i) {
      const double x = dom.coordinate(0, i);
      v[i] = x + std::cos(8.0 * x) / (4.0 * n);
    }
    smooth.emplace_back(dom, std::move(v));
  }
  std::vector<double> id(101);
  for (std::size_t i = 0; i < 101; ++i) id[i] = dom.coordinate(0, i);
  const ConvergenceReport tame =
      check_hypi_convergence(smooth, GridFunction(dom, id), cfg);
  CHECK(tame.hypi_converges);
  CHECK(tame.uniform_converges);
}

}  // TEST_SUITE
