#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "epiproc/gridfn.hpp"
#include "epiproc/hypi.hpp"
#include "epiproc/matrix.hpp"
#include "epiproc/rng.hpp"

namespace epiproc::copula {

/// A closed-form copula: evaluator, sampler, partial-derivative oracle, and
/// membership test for the set where the partials exist and are continuous.
/// Axis indices are 0-based throughout.
struct CopulaModel {
  std::size_t dim;
  std::function<double(const std::vector<double>& u)> eval;
  /// Draw `count` rows of pseudo-uniform observations.
  std::function<Matrix(std::size_t count, rng::Rng& rng)> sample;
  /// Partial derivative in direction `axis`; only defined where in_S holds.
  std::function<double(std::size_t axis, const std::vector<double>& u)> partial;
  std::function<bool(const std::vector<double>& u)> in_S;
};

/// Two-dimensional mix of independence and comonotonicity:
///   C(u1, u2) = (1-lambda) u1 u2 + lambda min(u1, u2).
/// Partials exist off the diagonal; the sampler sets U2 = U1 with
/// probability lambda and draws independently otherwise.
CopulaModel mixture_copula(double lambda);

/// Product copula in any dimension >= 2; differentiable everywhere.
CopulaModel independence_copula(std::size_t dim);

/// Componentwise ranks scaled by 1/n; each column is a permutation of
/// {1/n, ..., 1}. Entries live in (0, 1].
struct PseudoSample {
  std::size_t n;
  std::size_t dim;
  Matrix u;

  explicit PseudoSample(Matrix u_matrix);
};

/// Rank transform of raw data, column by column. Ties within a column are
/// an error naming the column.
PseudoSample pseudo_observations(const Matrix& x);

/// The plug-in copula estimate F_n(F_{n1}^-(u_1), ..., F_{nd}^-(u_d)) with
/// the exact two-branch generalized inverse
///   H^-(u) = inf{x: H(x) >= u}   for u in (0, 1],
///   H^-(0) = sup{x: H(x) = 0}    (the smallest observation).
double empirical_copula(const PseudoSample& s, const std::vector<double>& u);

/// sqrt(n) (C_n - C) evaluated at every grid point. The grid box must lie in
/// [0,1]^dim. Evaluation is by thresholded counting (histogram plus prefix
/// sums), exactly equal to pointwise empirical_copula calls.
gridfn::GridFunction empirical_copula_process(const PseudoSample& s,
                                              const CopulaModel& c,
                                              const gridfn::GridDomain& grid);

/// Generalized-inverse thresholds per axis: thresholds[j][g] is the column-j
/// value that the empirical copula compares row entries against at grid
/// coordinate g of axis j. Exposed for the weighted bootstrap variants.
std::vector<std::vector<double>> marginal_thresholds(
    const PseudoSample& s, const gridfn::GridDomain& grid);

/// Directional-derivative extension: build G(v) = sum_j partial(j, v) a_j(v_j)
/// on the grid points where in_S holds, then extend semicontinuously to the
/// whole grid. The lower extension is the limit-theory object; the upper one
/// is returned for hull checks. a_j must live exactly on axis j of the grid.
///
/// The default radius 0 keeps G untouched on the differentiability set and
/// fills its complement from the nearest defined neighbors, which is the
/// shrinking-neighborhood limit the sup-inf definition prescribes. A larger
/// radius is available for sensitivity checks.
hypi::ScExtension dC_extension(const CopulaModel& c,
                               const std::vector<gridfn::GridFunction>& a,
                               const gridfn::GridDomain& grid,
                               std::size_t radius_cells = 0);

/// One realization of the weak limit of the empirical copula process.
struct LimitDraw {
  gridfn::GridFunction realization;          // alpha + lower dC extension
  gridfn::GridFunction alpha;                // the C-bridge field itself
  std::vector<gridfn::GridFunction> margins; // alpha_j on each axis grid
  hypi::ScExtension extension;               // dC with a = (-alpha_1, ...)
};

/// Simulate the limit by the normal-multiplier construction over a fresh
/// latent sample of size n_approx:
///   alpha(u) ~= n^{-1/2} sum_i xi_i (1{U_i <= u} - C(u)),  xi_i ~ N(0,1).
/// Margins are read off the grid faces, so every axis grid must end at 1.
LimitDraw simulate_limit(const CopulaModel& c, const gridfn::GridDomain& grid,
                         std::size_t n_approx, rng::Rng& rng);

/// alpha evaluated at a list of arbitrary points from one latent draw
/// (sample U, weights xi); shares the simulate_limit construction without
/// requiring a grid. Returns one value per requested point.
std::vector<double> multiplier_alpha_at(const CopulaModel& c,
                                        const Matrix& latent_u,
                                        const std::vector<double>& xi,
                                        const std::vector<std::vector<double>>& points);

}  // namespace epiproc::copula
