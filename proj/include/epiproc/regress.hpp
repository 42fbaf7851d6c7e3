#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "epiproc/gridfn.hpp"
#include "epiproc/matrix.hpp"
#include "epiproc/rng.hpp"

namespace epiproc::regress {

/// Zero-mean two-sided exponential mixture: an exponential with mean
/// -theta_minus on the negative half-line carrying weight
/// w = theta_plus / (theta_minus + theta_plus), and an exponential with
/// mean theta_plus on the positive half-line carrying weight 1 - w. The
/// weights make the overall mean exactly zero. The density has one-sided
/// limits w/theta_minus and (1-w)/theta_plus at the origin, which differ
/// unless the two scales coincide; density() itself takes the
/// right-continuous value there.
struct MixedExponential {
  double theta_minus;
  double theta_plus;
  double w;

  MixedExponential(double tm, double tp);

  double density(double z) const;
  double density_left(double z) const;   // limit from below, f(z-)
  double density_right(double z) const;  // limit from above, f(z+)
  double cdf(double z) const;
  double quantile(double p) const;  // p in (0, 1), exact two-branch inverse
  double sample(rng::Rng& rng) const;
  /// Points where the density jumps: {0}, or empty when symmetric.
  std::vector<double> discontinuities() const;
};

MixedExponential mixed_exponential(double theta_minus, double theta_plus);

/// Law of the regressor row: a sampler plus optional closed forms. When
/// pos_part_mean is empty, expectations fall back to a deterministic
/// million-draw Monte Carlo using a fixed internal seed; when mean_vector
/// is empty, E[X'gamma] is recovered from the positive-part identity.
struct XDesign {
  std::size_t p;
  std::function<Matrix(std::size_t count, rng::Rng& rng)> sample;
  /// E[max(X'gamma, 0)]; the reflected term uses pos_part_mean(-gamma).
  std::function<double(const std::vector<double>& gamma)> pos_part_mean;
  std::function<std::vector<double>()> mean_vector;  // E[X]
};

/// Rows of p i.i.d. standard normals: X'gamma is centered normal with
/// standard deviation |gamma|, so E[max(+-X'gamma, 0)] = |gamma|/sqrt(2 pi).
XDesign gaussian_design(std::size_t p);

/// A one-dimensional function with explicit one-sided limit evaluators and
/// pinned values at the infinities. At continuity points the three
/// evaluators agree.
struct LadlagFunction {
  std::function<double(double z)> value;
  std::function<double(double z)> left_limit;
  std::function<double(double z)> right_limit;
  double at_neg_inf = 0.0;
  double at_pos_inf = 0.0;
};

/// The deterministic ingredient of the residual-process limit:
///   g(gamma)(z)  = -f(z-) E[max(-X'gamma, 0)] + f(z+) E[max(X'gamma, 0)],
///   g(gamma)(z-) =  f(z-) E[X'gamma],
///   g(gamma)(z+) =  f(z+) E[X'gamma],
/// and 0 at both infinities. Nonzero only near the density's jumps once
/// the design is centered.
LadlagFunction g_gamma(const MixedExponential& model, const XDesign& x_law,
                       const std::vector<double>& gamma);

/// (min, max) of the three candidate values {left limit, value, right
/// limit} at z; at +-infinity both are the pinned 0.
std::pair<double, double> g_gamma_hulls(const LadlagFunction& g, double z);

/// Fixed design matrix with responses. The OLS expansion additionally
/// needs the empirical second-moment matrix to be invertible, which
/// ols_fit checks at solve time.
struct RegressionSample {
  std::size_t n;
  std::size_t p;
  Matrix x;
  std::vector<double> y;

  RegressionSample(Matrix design, std::vector<double> response);
};

struct OlsFit {
  std::vector<double> beta_hat;
  /// Row i holds Ghat^{-1} x_i ehat_i, the plug-in influence evaluation
  /// (Ghat = empirical second-moment matrix, ehat = fitted residual).
  Matrix influence;
};

/// Least squares by Gaussian elimination with partial pivoting on the
/// p x p normal equations. Errors on a singular second-moment matrix.
OlsFit ols_fit(const RegressionSample& s);

std::vector<double> residuals(const RegressionSample& s,
                              const std::vector<double>& beta_hat);

/// count(values <= z) / n over an ascending-sorted vector.
double empirical_cdf(const std::vector<double>& sorted_values, double z);

/// A grid function on a finite interval plus the two infinity sentinels
/// the extended real line contributes; the process values there are
/// pinned to zero.
struct ExtendedProcess {
  gridfn::GridFunction interior;
  double neg_inf_value;
  double pos_inf_value;
};

/// sqrt(n) (Fhat_n - F) over the one-dimensional z-grid, where Fhat_n is
/// the empirical cdf of the fitted residuals y - x beta_hat.
ExtendedProcess residual_process(const RegressionSample& s,
                                 const std::vector<double>& beta_hat,
                                 const std::function<double(double)>& true_cdf,
                                 const gridfn::GridDomain& z_grid);

/// Exact (inf, sup) of Fhat - F over the open interval (a, b), computed
/// from the sorted residuals: between jumps the difference decreases, so
/// the sup is attained at jump points (or the right limit at a) and the
/// inf at left limits of jump points (or at b-). Unscaled; multiply by
/// sqrt(n) for the process version.
std::pair<double, double> window_extremum(
    const std::vector<double>& sorted_residuals,
    const std::function<double(double)>& true_cdf, double a, double b);

/// Influence evaluator psi(x_row, eps) used by the limit simulation.
using PsiFn =
    std::function<std::vector<double>(const std::vector<double>& x, double eps)>;

/// psi(x, eps) = x * eps, the OLS influence for designs whose population
/// second-moment matrix is the identity (the Gaussian design here).
PsiFn ols_psi_identity_gram(std::size_t p);

/// Pieces of one limit draw, exposed so tests can reassemble them with a
/// forced multiplier field.
struct LimitComponents {
  gridfn::GridFunction bridge;   // multiplier bridge of the error indicators
  std::vector<double> g_psi;     // the p-vector multiplier average of psi
  gridfn::GridFunction g_term;   // g(g_psi) evaluated over the grid
};

/// Normal-multiplier realization over a fresh latent sample of size
/// n_approx: draw the design matrix, then the errors, then the multiplier
/// normals (in that documented order); both coordinates are empirically
/// centered before weighting so the covariance matches the latent law.
LimitComponents limit_process_components(const MixedExponential& model,
                                         const XDesign& x_law, const PsiFn& psi,
                                         const gridfn::GridDomain& z_grid,
                                         std::size_t n_approx, rng::Rng& rng);

/// One realization of the residual-process limit on the grid: the bridge
/// plus g(multiplier psi average) with one-sided density limits baked into
/// the g evaluation.
gridfn::GridFunction limit_process_draw(const MixedExponential& model,
                                        const XDesign& x_law, const PsiFn& psi,
                                        const gridfn::GridDomain& z_grid,
                                        std::size_t n_approx, rng::Rng& rng);

/// g(gamma) sampled at every grid point (value convention, which equals
/// the function away from jumps and the spiked value at them).
gridfn::GridFunction g_gamma_on_grid(const MixedExponential& model,
                                     const XDesign& x_law,
                                     const std::vector<double>& gamma,
                                     const gridfn::GridDomain& z_grid);

}  // namespace epiproc::regress
