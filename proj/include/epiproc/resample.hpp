#pragma once

#include <cstddef>
#include <vector>

#include "epiproc/copula.hpp"
#include "epiproc/gridfn.hpp"
#include "epiproc/matrix.hpp"
#include "epiproc/rng.hpp"

namespace epiproc::resample {

/// A family of resampled copula processes on a common grid.
/// base_process holds the unit-weight copula on the same grid (the plain
/// empirical copula wherever grid levels are multiples of 1/n): the
/// centering every replicate is measured against, and the curve a
/// confidence band is drawn around.
struct BootstrapDraws {
  std::size_t m_count;
  std::vector<gridfn::GridFunction> processes;
  gridfn::GridFunction base_process;

  BootstrapDraws(std::vector<gridfn::GridFunction> procs,
                 gridfn::GridFunction base);
};

/// Weighted empirical copula on a grid, with mass-exact marginal sections.
/// Per axis, a grid level u picks the observation where the cumulative
/// weight in ascending column order first reaches u times the total weight,
/// and that crossing observation enters the joint box with exactly the
/// fraction of its weight needed to meet the target, the way ranks of a
/// resampled sample spread tied copies of a row across consecutive ranks in
/// one common per-row order (so an observation crossing several axes at
/// once enters with the smallest of its fractions). Margins then satisfy
/// W(u, 1, ..., 1) = u for u in (0, 1], the all-ones corner is exactly one,
/// and unit weights on a grid whose levels are multiples of 1/n reproduce
/// the plain empirical copula bit for bit. Level zero keeps the plain
/// inverse's convention and carries the smallest positive-weight
/// observation in full. Two cheaper readings both fail: an unnormalized
/// weighted distribution leaks a global Gaussian component of shape
/// C(u) - sum_j dC_j(u) u_j driven by the weight total, and keeping whole
/// crossing atoms overshoots every marginal target by a nonnegative
/// renewal residual whose supremum inflates the resampled sup law well
/// above the process it mimics at desk-scale n. Exposed so the two
/// bootstrap flavors below share one code path and tests can force
/// degenerate weights.
gridfn::GridFunction weighted_copula_on_grid(const copula::PseudoSample& s,
                                             const std::vector<double>& weights,
                                             const gridfn::GridDomain& grid);

/// Multinomial bootstrap: per replicate, draw n observation weights from a
/// multinomial with n trials and equal probabilities, and return
/// sqrt(n) (C_n^[m] - C_n) on the grid.
BootstrapDraws multinomial_bootstrap(const Matrix& raw,
                                     const gridfn::GridDomain& grid,
                                     std::size_t m_count, rng::Rng& rng);

/// Multiplier bootstrap: i.i.d. standard-exponential weights (mean one,
/// variance one, square-root-tail integrable), normalized by their total
/// inside the weighted copula so each replicate is a proper copula pinned
/// at the cube corners.
BootstrapDraws multiplier_bootstrap(const Matrix& raw,
                                    const gridfn::GridDomain& grid,
                                    std::size_t m_count, rng::Rng& rng);

/// Half-width b of the sup-norm bootstrap band: the level-quantile of
/// { sup |process_m| : m }, so C_n +/- b/sqrt(n) has empirical bootstrap
/// coverage `level`. Requires m_count >= 50; level 0 gives the smallest sup.
double confidence_band(const BootstrapDraws& draws, double level);

}  // namespace epiproc::resample
