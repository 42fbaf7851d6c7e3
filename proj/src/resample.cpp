#include "epiproc/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace epiproc::resample {

namespace gf = epiproc::gridfn;

namespace {

std::vector<double> multinomial_weights(std::size_t n, rng::Rng& rng) {
  std::vector<double> w(n, 0.0);
  for (std::size_t trial = 0; trial < n; ++trial) {
    w[rng.uniform_below(n)] += 1.0;
  }
  return w;
}

std::vector<double> exponential_weights(std::size_t n, rng::Rng& rng) {
  std::vector<double> w(n);
  for (double& v : w) v = rng.exponential();
  return w;
}

/// Shared driver: pseudo-observations once, the same construction with unit
/// weights as the base, then one weighted copula per replicate from a
/// deterministically split RNG substream so results do not depend on
/// evaluation order.
template <typename WeightFn>
BootstrapDraws bootstrap_impl(const Matrix& raw, const gf::GridDomain& grid,
                              std::size_t m_count, rng::Rng& rng,
                              const char* op, WeightFn&& draw_weights) {
  if (raw.rows < 2) {
    throw std::invalid_argument(std::string(op) + ": need at least 2 rows");
  }
  if (m_count == 0) {
    throw std::invalid_argument(std::string(op) + ": m_count must be positive");
  }
  const copula::PseudoSample s = copula::pseudo_observations(raw);
  const std::vector<double> ones(s.n, 1.0);
  const gf::GridFunction base = weighted_copula_on_grid(s, ones, grid);
  const double sqrt_n = std::sqrt(static_cast<double>(s.n));

  const std::uint64_t master = rng.next();
  std::vector<gf::GridFunction> processes;
  processes.reserve(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    rng::Rng sub(rng::split_seed(master, m));
    const std::vector<double> w = draw_weights(s.n, sub);
    const gf::GridFunction cw = weighted_copula_on_grid(s, w, grid);
    std::vector<double> proc(grid.total_points());
    for (std::size_t k = 0; k < proc.size(); ++k) {
      proc[k] = sqrt_n * (cw[k] - base[k]);
    }
    processes.emplace_back(grid, std::move(proc));
  }
  return BootstrapDraws(std::move(processes), base);
}

}  // namespace

BootstrapDraws::BootstrapDraws(std::vector<gf::GridFunction> procs,
                               gf::GridFunction base)
    : m_count(procs.size()),
      processes(std::move(procs)),
      base_process(std::move(base)) {
  if (m_count == 0) {
    throw std::invalid_argument("BootstrapDraws: no replicates");
  }
  for (const auto& p : processes) {
    if (p.domain() != base_process.domain()) {
      throw std::invalid_argument("BootstrapDraws: mismatched grids");
    }
  }
}

gf::GridFunction weighted_copula_on_grid(const copula::PseudoSample& s,
                                         const std::vector<double>& weights,
                                         const gf::GridDomain& grid) {
  if (grid.dim() != s.dim) {
    throw std::invalid_argument(
        "weighted_copula_on_grid: grid dimension mismatch");
  }
  if (weights.size() != s.n) {
    throw std::invalid_argument(
        "weighted_copula_on_grid: weight count mismatch");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(
          "weighted_copula_on_grid: weights must be finite and nonnegative");
    }
  }
  bool any_positive = false;
  for (double w : weights) any_positive = any_positive || w > 0.0;
  if (!any_positive) {
    throw std::invalid_argument(
        "weighted_copula_on_grid: total weight must be positive");
  }

  const std::size_t d = s.dim;
  const std::size_t n = s.n;
  const double n_as_double = static_cast<double>(n);

  // Sorted column positions come straight from the rank structure of the
  // pseudo-sample: u = rank / n with distinct ranks per column.
  std::vector<std::size_t> pos(n * d);
  std::vector<std::vector<std::size_t>> order(
      d, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto p = static_cast<std::size_t>(
          std::llround(s.u.at(i, j) * n_as_double) - 1);
      pos[i * d + j] = p;
      order[j][p] = i;
    }
  }

  // Per axis, resolve each grid level (plus a virtual full-mass level when
  // the grid does not reach one) into the crossing position, the crossing
  // observation, and the fraction of its weight needed to meet the mass
  // target exactly. The 1e-9 guard absorbs float dust so integer weights at
  // integer targets snap to whole atoms, keeping those sums exact.
  std::vector<std::size_t> levels(d);
  std::vector<std::vector<std::size_t>> cross_pos(d), cross_row(d);
  std::vector<std::vector<double>> cross_frac(d);
  std::vector<double> cumulative(n);
  for (std::size_t j = 0; j < d; ++j) {
    double running = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      running += weights[order[j][p]];
      cumulative[p] = running;
    }
    const double total = cumulative[n - 1];
    const std::size_t shape_j = grid.shape()[j];
    const bool reaches_one = grid.coordinate(j, shape_j - 1) == 1.0;
    levels[j] = shape_j + (reaches_one ? 0 : 1);
    cross_pos[j].resize(levels[j]);
    cross_row[j].resize(levels[j]);
    cross_frac[j].resize(levels[j]);
    for (std::size_t a = 0; a < levels[j]; ++a) {
      const double ug = a < shape_j ? grid.coordinate(j, a) : 1.0;
      if (!(ug >= 0.0 && ug <= 1.0)) {
        throw std::invalid_argument(
            "weighted_copula_on_grid: grid coordinate outside [0, 1]");
      }
      std::size_t p = 0;
      double k = 0.0;
      if (ug == 0.0) {
        // Level zero keeps the plain inverse's convention: the smallest
        // positive-weight observation enters in full.
        while (cumulative[p] <= 0.0) ++p;
        k = weights[order[j][p]];
      } else {
        const double target = total * ug;
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(),
                                         target - 1e-9);
        p = it == cumulative.end()
                ? n - 1
                : static_cast<std::size_t>(it - cumulative.begin());
        const double below = p > 0 ? cumulative[p - 1] : 0.0;
        const double atom = weights[order[j][p]];
        k = target - below;
        if (k > atom - 1e-9) {
          k = atom;
        } else if (k < 1e-9) {
          k = 0.0;
        }
      }
      const double atom = weights[order[j][p]];
      cross_pos[j][a] = p;
      cross_row[j][a] = order[j][p];
      cross_frac[j][a] = atom > 0.0 ? k / atom : 0.0;
    }
  }

  // Bin each positive-weight row at the first level that strictly covers it
  // on every axis, with one overflow slot per axis, then prefix-sum. A
  // lattice read at a level multi-index is then the mass strictly below the
  // crossing observations there; the crossing atoms themselves are added
  // pointwise with their fractions. An observation crossing on several axes
  // at once enters with the smallest of its fractions: its resampled copies
  // are spread in one common order, so their inclusions are nested.
  std::vector<std::size_t> ext_shape(d);
  std::size_t ext_total = 1;
  for (std::size_t j = 0; j < d; ++j) {
    ext_shape[j] = levels[j] + 1;
    ext_total *= ext_shape[j];
  }
  const auto ext_flatten = [&](const std::vector<std::size_t>& multi) {
    std::size_t flat = 0;
    for (std::size_t j = 0; j < multi.size(); ++j) {
      flat = flat * ext_shape[j] + multi[j];
    }
    return flat;
  };
  std::vector<double> acc(ext_total, 0.0);
  std::vector<std::size_t> bin(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      const auto& cp = cross_pos[j];
      const auto it = std::upper_bound(cp.begin(), cp.end(), pos[i * d + j]);
      bin[j] = static_cast<std::size_t>(it - cp.begin());  // end() overflows
    }
    acc[ext_flatten(bin)] += weights[i];
  }
  for (std::size_t j = 0; j < d; ++j) {
    gf::cumsum_along_axis(acc, ext_shape, j);
  }

  const auto box_at = [&](const std::vector<std::size_t>& m) {
    double box = acc[ext_flatten(m)];
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t r = cross_row[j][m[j]];
      if (cross_frac[j][m[j]] <= 0.0) continue;
      bool seen = false;
      for (std::size_t l = 0; l < j; ++l) {
        seen = seen || (cross_frac[l][m[l]] > 0.0 && cross_row[l][m[l]] == r);
      }
      if (seen) continue;
      double fraction = 1.0;
      bool inside = true;
      for (std::size_t l = 0; l < d && inside; ++l) {
        const std::size_t pr = pos[r * d + l];
        const std::size_t pl = cross_pos[l][m[l]];
        if (pr < pl) continue;
        if (pr == pl && cross_frac[l][m[l]] > 0.0) {
          fraction = std::min(fraction, cross_frac[l][m[l]]);
        } else {
          inside = false;
        }
      }
      if (inside) box += weights[r] * fraction;
    }
    return box;
  };

  std::vector<std::size_t> corner(d);
  for (std::size_t j = 0; j < d; ++j) corner[j] = levels[j] - 1;
  const double denom = box_at(corner);

  std::vector<double> values(grid.total_points());
  std::vector<std::size_t> multi(d, 0);
  for (std::size_t flat = 0; flat < grid.total_points(); ++flat) {
    values[flat] = box_at(multi) / denom;
    for (std::size_t j = d; j-- > 0;) {
      if (++multi[j] < grid.shape()[j]) break;
      multi[j] = 0;
    }
  }
  return gf::GridFunction(grid, std::move(values));
}

BootstrapDraws multinomial_bootstrap(const Matrix& raw,
                                     const gf::GridDomain& grid,
                                     std::size_t m_count, rng::Rng& rng) {
  return bootstrap_impl(raw, grid, m_count, rng, "multinomial_bootstrap",
                        multinomial_weights);
}

BootstrapDraws multiplier_bootstrap(const Matrix& raw,
                                    const gf::GridDomain& grid,
                                    std::size_t m_count, rng::Rng& rng) {
  return bootstrap_impl(raw, grid, m_count, rng, "multiplier_bootstrap",
                        exponential_weights);
}

double confidence_band(const BootstrapDraws& draws, double level) {
  if (draws.m_count < 50) {
    throw std::invalid_argument("confidence_band: need at least 50 draws, got " +
                                std::to_string(draws.m_count));
  }
  if (!(level >= 0.0 && level <= 1.0)) {
    throw std::invalid_argument("confidence_band: level outside [0, 1]");
  }
  std::vector<double> sups;
  sups.reserve(draws.m_count);
  for (const auto& p : draws.processes) {
    sups.push_back(std::max(std::abs(p.min_value()), std::abs(p.max_value())));
  }
  std::sort(sups.begin(), sups.end());
  const double m = static_cast<double>(sups.size());
  double idx = std::ceil(level * m - 1e-9) - 1.0;
  if (idx < 0.0) idx = 0.0;
  return sups[static_cast<std::size_t>(idx)];
}

}  // namespace epiproc::resample
