#include "epiproc/regress.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace epiproc::regress {

namespace gf = epiproc::gridfn;

namespace {

constexpr std::uint64_t kExpectationMcSeed = 0xA11CE5EED5u;
constexpr std::size_t kExpectationMcDraws = 1000000;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// (E[max(X'gamma, 0)], E[max(-X'gamma, 0)]) by closed form when the
/// design provides one, else by a fixed-seed Monte Carlo pass.
std::pair<double, double> half_means(const XDesign& x_law,
                                     const std::vector<double>& gamma) {
  if (gamma.size() != x_law.p) {
    throw std::invalid_argument("g_gamma: gamma has dimension " +
                                std::to_string(gamma.size()) +
                                ", design wants " + std::to_string(x_law.p));
  }
  if (x_law.pos_part_mean) {
    std::vector<double> neg(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) neg[i] = -gamma[i];
    return {x_law.pos_part_mean(gamma), x_law.pos_part_mean(neg)};
  }
  rng::Rng mc(kExpectationMcSeed);
  const Matrix xs = x_law.sample(kExpectationMcDraws, mc);
  double pos = 0.0;
  double negv = 0.0;
  std::vector<double> row(x_law.p);
  for (std::size_t i = 0; i < xs.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < xs.cols; ++j) s += xs.at(i, j) * gamma[j];
    pos += std::max(s, 0.0);
    negv += std::max(-s, 0.0);
  }
  const double inv = 1.0 / static_cast<double>(xs.rows);
  return {pos * inv, negv * inv};
}

/// Invert a p x p matrix by Gauss-Jordan elimination with partial
/// pivoting; throws when a pivot collapses relative to the matrix scale.
Matrix invert(Matrix g, const char* op) {
  const std::size_t p = g.rows;
  double scale = 0.0;
  for (double v : g.data) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) {
    throw std::invalid_argument(std::string(op) +
                                ": singular second-moment matrix");
  }
  Matrix inv(p, p);
  for (std::size_t i = 0; i < p; ++i) inv.at(i, i) = 1.0;
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::abs(g.at(r, c)) > std::abs(g.at(pivot, c))) pivot = r;
    }
    if (std::abs(g.at(pivot, c)) < 1e-12 * scale) {
      throw std::invalid_argument(std::string(op) +
                                  ": singular second-moment matrix");
    }
    if (pivot != c) {
      for (std::size_t j = 0; j < p; ++j) {
        std::swap(g.at(c, j), g.at(pivot, j));
        std::swap(inv.at(c, j), inv.at(pivot, j));
      }
    }
    const double d = g.at(c, c);
    for (std::size_t j = 0; j < p; ++j) {
      g.at(c, j) /= d;
      inv.at(c, j) /= d;
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double m = g.at(r, c);
      if (m == 0.0) continue;
      for (std::size_t j = 0; j < p; ++j) {
        g.at(r, j) -= m * g.at(c, j);
        inv.at(r, j) -= m * inv.at(c, j);
      }
    }
  }
  return inv;
}

}  // namespace

MixedExponential::MixedExponential(double tm, double tp)
    : theta_minus(tm), theta_plus(tp), w(tp / (tm + tp)) {
  if (!(tm > 0.0) || !(tp > 0.0)) {
    throw std::invalid_argument(
        "mixed_exponential: parameters must be positive");
  }
}

double MixedExponential::density(double z) const {
  return z < 0.0 ? density_left(z) : density_right(z);
}

double MixedExponential::density_left(double z) const {
  if (z <= 0.0) return w / theta_minus * std::exp(z / theta_minus);
  return (1.0 - w) / theta_plus * std::exp(-z / theta_plus);
}

double MixedExponential::density_right(double z) const {
  if (z < 0.0) return w / theta_minus * std::exp(z / theta_minus);
  return (1.0 - w) / theta_plus * std::exp(-z / theta_plus);
}

double MixedExponential::cdf(double z) const {
  if (z < 0.0) return w * std::exp(z / theta_minus);
  return w + (1.0 - w) * (1.0 - std::exp(-z / theta_plus));
}

double MixedExponential::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("mixed_exponential quantile: p outside (0, 1)");
  }
  if (p <= w) return theta_minus * std::log(p / w);
  return -theta_plus * std::log((1.0 - p) / (1.0 - w));
}

double MixedExponential::sample(rng::Rng& rng) const {
  return quantile(rng.uniform01());
}

std::vector<double> MixedExponential::discontinuities() const {
  if (theta_minus == theta_plus) return {};
  return {0.0};
}

MixedExponential mixed_exponential(double theta_minus, double theta_plus) {
  return MixedExponential(theta_minus, theta_plus);
}

XDesign gaussian_design(std::size_t p) {
  if (p == 0) {
    throw std::invalid_argument("gaussian_design: p must be positive");
  }
  XDesign d;
  d.p = p;
  d.sample = [p](std::size_t count, rng::Rng& rng) {
    Matrix out(count, p);
    for (double& v : out.data) v = rng.normal();
    return out;
  };
  d.pos_part_mean = [p](const std::vector<double>& gamma) {
    if (gamma.size() != p) {
      throw std::invalid_argument("gaussian_design: gamma dimension mismatch");
    }
    double norm2 = 0.0;
    for (double v : gamma) norm2 += v * v;
    return std::sqrt(norm2) / std::sqrt(2.0 * 3.14159265358979323846);
  };
  d.mean_vector = [p]() { return std::vector<double>(p, 0.0); };
  return d;
}

LadlagFunction g_gamma(const MixedExponential& model, const XDesign& x_law,
                       const std::vector<double>& gamma) {
  const auto [c_pos, c_neg] = half_means(x_law, gamma);
  const double mean_xg =
      x_law.mean_vector ? dot(x_law.mean_vector(), gamma) : c_pos - c_neg;
  LadlagFunction g;
  g.value = [model, c_pos, c_neg](double z) {
    return -model.density_left(z) * c_neg + model.density_right(z) * c_pos;
  };
  g.left_limit = [model, mean_xg](double z) {
    return model.density_left(z) * mean_xg;
  };
  g.right_limit = [model, mean_xg](double z) {
    return model.density_right(z) * mean_xg;
  };
  g.at_neg_inf = 0.0;
  g.at_pos_inf = 0.0;
  return g;
}

std::pair<double, double> g_gamma_hulls(const LadlagFunction& g, double z) {
  if (std::isinf(z)) {
    const double v = z < 0.0 ? g.at_neg_inf : g.at_pos_inf;
    return {v, v};
  }
  const double a = g.left_limit(z);
  const double b = g.value(z);
  const double c = g.right_limit(z);
  return {std::min({a, b, c}), std::max({a, b, c})};
}

RegressionSample::RegressionSample(Matrix design, std::vector<double> response)
    : n(design.rows), p(design.cols), x(std::move(design)),
      y(std::move(response)) {
  if (n == 0 || p == 0) {
    throw std::invalid_argument("RegressionSample: empty design");
  }
  if (y.size() != n) {
    throw std::invalid_argument("RegressionSample: response length " +
                                std::to_string(y.size()) + ", design has " +
                                std::to_string(n) + " rows");
  }
}

OlsFit ols_fit(const RegressionSample& s) {
  const double inv_n = 1.0 / static_cast<double>(s.n);
  Matrix gram(s.p, s.p);
  std::vector<double> rhs(s.p, 0.0);
  for (std::size_t i = 0; i < s.n; ++i) {
    for (std::size_t a = 0; a < s.p; ++a) {
      const double xa = s.x.at(i, a);
      rhs[a] += xa * s.y[i];
      for (std::size_t b = 0; b < s.p; ++b) {
        gram.at(a, b) += xa * s.x.at(i, b);
      }
    }
  }
  for (double& v : gram.data) v *= inv_n;
  for (double& v : rhs) v *= inv_n;

  const Matrix gram_inv = invert(gram, "ols_fit");
  std::vector<double> beta(s.p, 0.0);
  for (std::size_t a = 0; a < s.p; ++a) {
    for (std::size_t b = 0; b < s.p; ++b) {
      beta[a] += gram_inv.at(a, b) * rhs[b];
    }
  }

  Matrix influence(s.n, s.p);
  for (std::size_t i = 0; i < s.n; ++i) {
    double fitted = 0.0;
    for (std::size_t a = 0; a < s.p; ++a) fitted += s.x.at(i, a) * beta[a];
    const double resid = s.y[i] - fitted;
    for (std::size_t a = 0; a < s.p; ++a) {
      double v = 0.0;
      for (std::size_t b = 0; b < s.p; ++b) {
        v += gram_inv.at(a, b) * s.x.at(i, b);
      }
      influence.at(i, a) = v * resid;
    }
  }
  return OlsFit{std::move(beta), std::move(influence)};
}

std::vector<double> residuals(const RegressionSample& s,
                              const std::vector<double>& beta_hat) {
  if (beta_hat.size() != s.p) {
    throw std::invalid_argument("residuals: beta dimension mismatch");
  }
  std::vector<double> r(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    double fitted = 0.0;
    for (std::size_t a = 0; a < s.p; ++a) fitted += s.x.at(i, a) * beta_hat[a];
    r[i] = s.y[i] - fitted;
  }
  return r;
}

double empirical_cdf(const std::vector<double>& sorted_values, double z) {
  if (sorted_values.empty()) {
    throw std::invalid_argument("empirical_cdf: empty sample");
  }
  const auto it =
      std::upper_bound(sorted_values.begin(), sorted_values.end(), z);
  return static_cast<double>(it - sorted_values.begin()) /
         static_cast<double>(sorted_values.size());
}

ExtendedProcess residual_process(const RegressionSample& s,
                                 const std::vector<double>& beta_hat,
                                 const std::function<double(double)>& true_cdf,
                                 const gf::GridDomain& z_grid) {
  if (z_grid.dim() != 1) {
    throw std::invalid_argument("residual_process: grid must be 1-dimensional");
  }
  std::vector<double> r = residuals(s, beta_hat);
  std::sort(r.begin(), r.end());
  const double sqrt_n = std::sqrt(static_cast<double>(s.n));
  std::vector<double> values(z_grid.shape()[0]);
  for (std::size_t g = 0; g < values.size(); ++g) {
    const double z = z_grid.coordinate(0, g);
    values[g] = sqrt_n * (empirical_cdf(r, z) - true_cdf(z));
  }
  return ExtendedProcess{gf::GridFunction(z_grid, std::move(values)), 0.0, 0.0};
}

std::pair<double, double> window_extremum(
    const std::vector<double>& sorted_residuals,
    const std::function<double(double)>& true_cdf, double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("window_extremum: need finite a < b");
  }
  if (sorted_residuals.empty()) {
    throw std::invalid_argument("window_extremum: empty sample");
  }
  const double n = static_cast<double>(sorted_residuals.size());
  const auto begin = sorted_residuals.begin();
  const auto first_inside =
      std::upper_bound(begin, sorted_residuals.end(), a);
  const auto first_at_or_after_b =
      std::lower_bound(begin, sorted_residuals.end(), b);

  // Right limit at a starts the sup race; the left limit at b ends the inf
  // race. In between, jump points contribute their value (sup side) and
  // their left limit (inf side).
  double sup = static_cast<double>(first_inside - begin) / n - true_cdf(a);
  double inf =
      static_cast<double>(first_at_or_after_b - begin) / n - true_cdf(b);
  for (auto it = first_inside; it != first_at_or_after_b; ++it) {
    const double fz = true_cdf(*it);
    const double below = static_cast<double>(it - begin);
    sup = std::max(sup, (below + 1.0) / n - fz);
    inf = std::min(inf, below / n - fz);
  }
  return {inf, sup};
}

PsiFn ols_psi_identity_gram(std::size_t p) {
  return [p](const std::vector<double>& x, double eps) {
    if (x.size() != p) {
      throw std::invalid_argument("ols_psi: design row dimension mismatch");
    }
    std::vector<double> out(p);
    for (std::size_t j = 0; j < p; ++j) out[j] = x[j] * eps;
    return out;
  };
}

LimitComponents limit_process_components(const MixedExponential& model,
                                         const XDesign& x_law, const PsiFn& psi,
                                         const gf::GridDomain& z_grid,
                                         std::size_t n_approx, rng::Rng& rng) {
  if (z_grid.dim() != 1) {
    throw std::invalid_argument(
        "limit_process_components: grid must be 1-dimensional");
  }
  if (n_approx < 1000) {
    throw std::invalid_argument(
        "limit_process_components: n_approx must be >= 1000");
  }
  // Documented draw order: design, then errors, then multiplier normals.
  const Matrix xs = x_law.sample(n_approx, rng);
  std::vector<double> eps(n_approx);
  for (double& e : eps) e = model.sample(rng);
  std::vector<double> xi(n_approx);
  for (double& v : xi) v = rng.normal();

  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n_approx));
  const double inv_n = 1.0 / static_cast<double>(n_approx);

  // Multiplier average of the empirically centered influence vectors.
  std::vector<double> psi_bar(x_law.p, 0.0);
  Matrix psi_rows(n_approx, x_law.p);
  std::vector<double> row(x_law.p);
  for (std::size_t i = 0; i < n_approx; ++i) {
    for (std::size_t j = 0; j < x_law.p; ++j) row[j] = xs.at(i, j);
    const std::vector<double> v = psi(row, eps[i]);
    if (v.size() != x_law.p) {
      throw std::invalid_argument(
          "limit_process_components: psi dimension mismatch");
    }
    for (std::size_t j = 0; j < x_law.p; ++j) {
      psi_rows.at(i, j) = v[j];
      psi_bar[j] += v[j];
    }
  }
  for (double& v : psi_bar) v *= inv_n;
  std::vector<double> g_psi(x_law.p, 0.0);
  for (std::size_t i = 0; i < n_approx; ++i) {
    for (std::size_t j = 0; j < x_law.p; ++j) {
      g_psi[j] += xi[i] * (psi_rows.at(i, j) - psi_bar[j]);
    }
  }
  for (double& v : g_psi) v *= inv_sqrt;

  // Multiplier bridge of the error indicators, centered at the latent
  // empirical cdf: sort errors once, prefix-sum the weights, then walk the
  // ascending grid.
  std::vector<std::size_t> order(n_approx);
  for (std::size_t i = 0; i < n_approx; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return eps[l] < eps[r]; });
  double xi_total = 0.0;
  for (double v : xi) xi_total += v;

  std::vector<double> bridge_values(z_grid.shape()[0]);
  std::size_t k = 0;
  double xi_prefix = 0.0;
  for (std::size_t g = 0; g < bridge_values.size(); ++g) {
    const double z = z_grid.coordinate(0, g);
    while (k < n_approx && eps[order[k]] <= z) {
      xi_prefix += xi[order[k]];
      ++k;
    }
    const double ecdf = static_cast<double>(k) * inv_n;
    bridge_values[g] = inv_sqrt * (xi_prefix - ecdf * xi_total);
  }
  gf::GridFunction bridge(z_grid, std::move(bridge_values));

  const LadlagFunction g = g_gamma(model, x_law, g_psi);
  std::vector<double> g_values(z_grid.shape()[0]);
  for (std::size_t i = 0; i < g_values.size(); ++i) {
    g_values[i] = g.value(z_grid.coordinate(0, i));
  }
  gf::GridFunction g_term(z_grid, std::move(g_values));
  return LimitComponents{std::move(bridge), std::move(g_psi),
                         std::move(g_term)};
}

gf::GridFunction limit_process_draw(const MixedExponential& model,
                                    const XDesign& x_law, const PsiFn& psi,
                                    const gf::GridDomain& z_grid,
                                    std::size_t n_approx, rng::Rng& rng) {
  const LimitComponents parts =
      limit_process_components(model, x_law, psi, z_grid, n_approx, rng);
  std::vector<double> values(z_grid.shape()[0]);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = parts.bridge[i] + parts.g_term[i];
  }
  return gf::GridFunction(z_grid, std::move(values));
}

gf::GridFunction g_gamma_on_grid(const MixedExponential& model,
                                 const XDesign& x_law,
                                 const std::vector<double>& gamma,
                                 const gf::GridDomain& z_grid) {
  if (z_grid.dim() != 1) {
    throw std::invalid_argument("g_gamma_on_grid: grid must be 1-dimensional");
  }
  const LadlagFunction g = g_gamma(model, x_law, gamma);
  std::vector<double> values(z_grid.shape()[0]);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = g.value(z_grid.coordinate(0, i));
  }
  return gf::GridFunction(z_grid, std::move(values));
}

}  // namespace epiproc::regress
