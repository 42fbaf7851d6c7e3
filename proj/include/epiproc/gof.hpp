#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "epiproc/copula.hpp"
#include "epiproc/gridfn.hpp"
#include "epiproc/rng.hpp"

namespace epiproc::gof {

/// Local departure from independence along the comonotone direction: the
/// implied copula is the two-dimensional mixture with weight delta/sqrt(n),
/// which shrinks toward the product copula at the parametric rate. delta = 0
/// degenerates to independence itself.
struct LocalAlternative {
  double delta;
  std::size_t n;

  LocalAlternative(double delta_value, std::size_t sample_size);
  copula::CopulaModel realize() const;
};

/// Quadrature functional behind the Cramer-von Mises statistic: mean of the
/// squared process over the grid times the box volume. Exposed so tests can
/// feed synthetic processes; its square root equals lp_distance(proc, 0, 2)
/// bit for bit because both accumulate plain squares in flat order.
double cvm_from_process(const gridfn::GridFunction& proc);

/// Sup functional behind the Kolmogorov-Smirnov statistic: max |proc| over
/// the grid, read off extremum_over_region on the full domain.
double ks_from_process(const gridfn::GridFunction& proc);

/// T_n = n x quadrature of (C_n - product)^2 over the grid.
double cvm_statistic(const copula::PseudoSample& s,
                     const gridfn::GridDomain& grid);

/// S_n = sqrt(n) x max over the grid of |C_n - product|.
double ks_statistic(const copula::PseudoSample& s,
                    const gridfn::GridDomain& grid);

/// One row of a power table: rejection frequencies of both statistics at a
/// given departure delta, plus the larger of the two binomial Monte Carlo
/// standard errors sqrt(rate(1-rate)/reps).
struct PowerRow {
  double delta;
  double reject_rate_T;
  double reject_rate_S;
  double mc_se;
};

/// Monte Carlo power curve. Phase one draws null_reps samples at delta = 0
/// to estimate the (1-level) null quantiles of T_n and S_n; phase two draws
/// reps fresh samples per delta and counts strict exceedances. Replicate r
/// of the null phase uses the RNG substream split_seed(master, r); replicate
/// r at deltas[i] uses split_seed(master, null_reps + i*reps + r), so the
/// output is independent of evaluation order. level may be 1 (everything
/// rejects); reps must be >= 500 and null_reps >= reps.
std::vector<PowerRow> power_curve(const std::vector<double>& deltas,
                                  std::size_t n,
                                  const gridfn::GridDomain& grid, double level,
                                  std::size_t reps, std::size_t null_reps,
                                  std::uint64_t master_seed,
                                  std::size_t threads = 1);

}  // namespace epiproc::gof
