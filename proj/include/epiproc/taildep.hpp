#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "epiproc/gridfn.hpp"
#include "epiproc/hypi.hpp"
#include "epiproc/matrix.hpp"
#include "epiproc/rng.hpp"

namespace epiproc::taildep {

/// A closed-form stable tail dependence function together with its gradient
/// on the differentiability set, a membership test for that set, and a
/// sampler producing raw data whose true tail dependence function is L.
/// Any valid L is bounded by max_j x_j <= L(x) <= sum_j x_j, positively
/// homogeneous of degree one, and convex.
struct TailModel {
  std::size_t dim;
  std::function<double(const std::vector<double>& x)> L;
  std::function<double(std::size_t axis, const std::vector<double>& x)> grad;
  std::function<bool(const std::vector<double>& x)> in_S;
  std::function<Matrix(std::size_t count, rng::Rng& rng)> sample;
};

/// Complete dependence in two dimensions: L(x, y) = max(x, y), gradient
/// (1,0) below the diagonal and (0,1) above it, undefined on it. The
/// sampler emits comonotone pairs (V, V).
TailModel tail_model_max();

/// Asymptotic independence in two dimensions: L(x, y) = x + y with constant
/// gradient (1,1) everywhere. The sampler emits independent uniforms.
TailModel tail_model_indep();

/// Rank-based tail dependence estimator: (1/k) x the number of rows whose
/// rank R_ij exceeds n + 1/2 - k x_j in at least one coordinate, with the
/// same half-integer correction on every axis. Ranks are componentwise and
/// ties are an error naming the column.
double stable_tail_estimator(const Matrix& raw, std::size_t k,
                             const std::vector<double>& x);

/// Semicontinuous extension of sum_j grad(j, y) a_j(y_j) from the
/// differentiability set to the whole grid; the lower extension is the
/// limit-theory object. Mirrors the copula-derivative extension with the
/// tail model's gradient in place of the copula partials.
hypi::ScExtension dL_extension(const TailModel& m,
                               const std::vector<gridfn::GridFunction>& a,
                               const gridfn::GridDomain& grid,
                               std::size_t radius_cells = 0);

/// sqrt(k) (Lhat_n - L) at every grid point, by binning rank vectors and
/// suffix-summing so the result matches pointwise stable_tail_estimator
/// calls exactly.
gridfn::GridFunction estimator_process(const Matrix& raw, const TailModel& m,
                                       std::size_t k,
                                       const gridfn::GridDomain& grid);

}  // namespace epiproc::taildep
