#include "epiproc/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "epiproc/parallel.hpp"

namespace epiproc::gof {

namespace gf = epiproc::gridfn;

namespace {

/// T and S from one sample, sharing a single process evaluation.
std::pair<double, double> both_statistics(const copula::PseudoSample& s,
                                          const gf::GridDomain& grid) {
  const copula::CopulaModel product = copula::independence_copula(s.dim);
  const gf::GridFunction proc = copula::empirical_copula_process(s, product, grid);
  return {cvm_from_process(proc), ks_from_process(proc)};
}

/// k-th smallest with k = ceil((1-level) R), the Monte Carlo (1-level)
/// quantile. k < 1 (level = 1) yields -infinity so everything rejects.
double null_quantile(std::vector<double> stats, double level) {
  std::sort(stats.begin(), stats.end());
  const double r = static_cast<double>(stats.size());
  const double k = std::ceil((1.0 - level) * r - 1e-9);
  if (k < 1.0) return -std::numeric_limits<double>::infinity();
  const std::size_t idx = std::min(stats.size() - 1,
                                   static_cast<std::size_t>(k) - 1);
  return stats[idx];
}

}  // namespace

LocalAlternative::LocalAlternative(double delta_value, std::size_t sample_size)
    : delta(delta_value), n(sample_size) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("LocalAlternative: delta must be >= 0");
  }
  if (n == 0) {
    throw std::invalid_argument("LocalAlternative: n must be positive");
  }
  if (!(delta / std::sqrt(static_cast<double>(n)) < 1.0)) {
    throw std::invalid_argument(
        "LocalAlternative: delta/sqrt(n) must be < 1, got " +
        gf::format_double(delta / std::sqrt(static_cast<double>(n))));
  }
}

copula::CopulaModel LocalAlternative::realize() const {
  if (delta == 0.0) return copula::independence_copula(2);
  return copula::mixture_copula(delta / std::sqrt(static_cast<double>(n)));
}

double cvm_from_process(const gf::GridFunction& proc) {
  double acc = 0.0;
  for (std::size_t i = 0; i < proc.values().size(); ++i) {
    const double d = proc[i];
    acc += d * d;
  }
  const double mean = acc / static_cast<double>(proc.values().size());
  return mean * proc.domain().box_volume();
}

double ks_from_process(const gf::GridFunction& proc) {
  const auto [lo, hi] = gf::extremum_over_region(proc, proc.domain().lower(),
                                                 proc.domain().upper());
  return std::max(std::abs(lo), std::abs(hi));
}

double cvm_statistic(const copula::PseudoSample& s,
                     const gf::GridDomain& grid) {
  const copula::CopulaModel product = copula::independence_copula(s.dim);
  return cvm_from_process(copula::empirical_copula_process(s, product, grid));
}

double ks_statistic(const copula::PseudoSample& s, const gf::GridDomain& grid) {
  const copula::CopulaModel product = copula::independence_copula(s.dim);
  return ks_from_process(copula::empirical_copula_process(s, product, grid));
}

std::vector<PowerRow> power_curve(const std::vector<double>& deltas,
                                  std::size_t n, const gf::GridDomain& grid,
                                  double level, std::size_t reps,
                                  std::size_t null_reps,
                                  std::uint64_t master_seed,
                                  std::size_t threads) {
  if (grid.dim() != 2) {
    throw std::invalid_argument("power_curve: grid must be two-dimensional");
  }
  if (!(level > 0.0 && level <= 1.0)) {
    throw std::invalid_argument("power_curve: level outside (0, 1]");
  }
  if (reps < 500) {
    throw std::invalid_argument("power_curve: reps must be >= 500, got " +
                                std::to_string(reps));
  }
  if (null_reps < reps) {
    throw std::invalid_argument("power_curve: null_reps must be >= reps");
  }
  for (double d : deltas) {
    static_cast<void>(LocalAlternative(d, n));  // range check before any work
  }

  const auto replicate = [&](const LocalAlternative& alt, std::uint64_t seed) {
    rng::Rng stream(seed);
    const copula::CopulaModel model = alt.realize();
    const Matrix raw = model.sample(n, stream);
    const copula::PseudoSample s = copula::pseudo_observations(raw);
    return both_statistics(s, grid);
  };

  // Phase one: null calibration at delta = 0.
  const LocalAlternative null_alt(0.0, n);
  const auto null_stats = parallel::map_indexed<std::pair<double, double>>(
      null_reps, threads, [&](std::size_t r) {
        return replicate(null_alt, rng::split_seed(master_seed, r));
      });
  std::vector<double> null_t(null_reps), null_s(null_reps);
  for (std::size_t r = 0; r < null_reps; ++r) {
    null_t[r] = null_stats[r].first;
    null_s[r] = null_stats[r].second;
  }
  const double q_t = null_quantile(std::move(null_t), level);
  const double q_s = null_quantile(std::move(null_s), level);

  // Phase two: rejection frequencies per delta over fresh substreams.
  std::vector<PowerRow> table;
  table.reserve(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const LocalAlternative alt(deltas[i], n);
    const auto stats = parallel::map_indexed<std::pair<double, double>>(
        reps, threads, [&](std::size_t r) {
          const std::uint64_t idx = null_reps + i * reps + r;
          return replicate(alt, rng::split_seed(master_seed, idx));
        });
    std::size_t hits_t = 0;
    std::size_t hits_s = 0;
    for (const auto& [t, s] : stats) {
      hits_t += t > q_t ? 1 : 0;
      hits_s += s > q_s ? 1 : 0;
    }
    const double rt = static_cast<double>(hits_t) / static_cast<double>(reps);
    const double rs = static_cast<double>(hits_s) / static_cast<double>(reps);
    const double se_t = std::sqrt(rt * (1.0 - rt) / static_cast<double>(reps));
    const double se_s = std::sqrt(rs * (1.0 - rs) / static_cast<double>(reps));
    table.push_back(PowerRow{deltas[i], rt, rs, std::max(se_t, se_s)});
  }
  return table;
}

}  // namespace epiproc::gof
