#include "epiproc/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace epiproc::copula {

namespace gf = epiproc::gridfn;

namespace {

void require_point_dim(const std::vector<double>& u, std::size_t dim,
                       const char* op) {
  if (u.size() != dim) {
    throw std::invalid_argument(std::string(op) + ": point has dimension " +
                                std::to_string(u.size()) + ", model wants " +
                                std::to_string(dim));
  }
}

/// Smallest rank index k (1-based) such that the k-th order statistic is the
/// generalized inverse at u in (0, 1]: k = ceil(n u), guarded against
/// floating dust so exact multiples of 1/n stay exact.
std::size_t inverse_rank(double u, std::size_t n) {
  const double k = std::ceil(static_cast<double>(n) * u - 1e-9);
  if (k < 1.0) return 1;
  if (k > static_cast<double>(n)) return n;
  return static_cast<std::size_t>(k);
}

std::vector<double> sorted_column(const Matrix& m, std::size_t j) {
  std::vector<double> col(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) col[i] = m.at(i, j);
  std::sort(col.begin(), col.end());
  return col;
}

}  // namespace

CopulaModel mixture_copula(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("mixture_copula: lambda must lie in [0, 1]");
  }
  CopulaModel m;
  m.dim = 2;
  m.eval = [lambda](const std::vector<double>& u) {
    require_point_dim(u, 2, "mixture eval");
    return (1.0 - lambda) * u[0] * u[1] + lambda * std::min(u[0], u[1]);
  };
  m.partial = [lambda](std::size_t axis, const std::vector<double>& u) {
    require_point_dim(u, 2, "mixture partial");
    if (u[0] == u[1]) {
      throw std::invalid_argument(
          "mixture partial: not differentiable on the diagonal");
    }
    const double other = axis == 0 ? u[1] : u[0];
    const bool own_smaller = axis == 0 ? u[0] < u[1] : u[1] < u[0];
    return (1.0 - lambda) * other + (own_smaller ? lambda : 0.0);
  };
  m.in_S = [](const std::vector<double>& u) { return u[0] != u[1]; };
  m.sample = [lambda](std::size_t count, rng::Rng& rng) {
    Matrix out(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
      const double u1 = rng.uniform01();
      const double coin = rng.uniform01();
      out.at(i, 0) = u1;
      out.at(i, 1) = coin < lambda ? u1 : rng.uniform01();
    }
    return out;
  };
  return m;
}

CopulaModel independence_copula(std::size_t dim) {
  if (dim < 2) {
    throw std::invalid_argument("independence_copula: dim must be >= 2");
  }
  CopulaModel m;
  m.dim = dim;
  m.eval = [dim](const std::vector<double>& u) {
    require_point_dim(u, dim, "independence eval");
    double p = 1.0;
    for (double v : u) p *= v;
    return p;
  };
  m.partial = [dim](std::size_t axis, const std::vector<double>& u) {
    require_point_dim(u, dim, "independence partial");
    double p = 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
      if (k != axis) p *= u[k];
    }
    return p;
  };
  m.in_S = [](const std::vector<double>&) { return true; };
  m.sample = [dim](std::size_t count, rng::Rng& rng) {
    Matrix out(count, dim);
    for (double& v : out.data) v = rng.uniform01();
    return out;
  };
  return m;
}

PseudoSample::PseudoSample(Matrix u_matrix)
    : n(u_matrix.rows), dim(u_matrix.cols), u(std::move(u_matrix)) {
  if (n == 0 || dim == 0) {
    throw std::invalid_argument("PseudoSample: empty matrix");
  }
  for (double v : u.data) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw std::invalid_argument(
          "PseudoSample: entries must lie in (0, 1], got " +
          gf::format_double(v));
    }
  }
}

PseudoSample pseudo_observations(const Matrix& x) {
  if (x.rows == 0 || x.cols == 0) {
    throw std::invalid_argument("pseudo_observations: empty matrix");
  }
  const std::size_t n = x.rows;
  Matrix u(n, x.cols);
  std::vector<std::size_t> idx(n);
  for (std::size_t j = 0; j < x.cols; ++j) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return x.at(a, j) < x.at(b, j);
    });
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (x.at(idx[k], j) == x.at(idx[k + 1], j)) {
        throw std::invalid_argument("pseudo_observations: ties in column " +
                                    std::to_string(j));
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      u.at(idx[k], j) = static_cast<double>(k + 1) / static_cast<double>(n);
    }
  }
  return PseudoSample(std::move(u));
}

double empirical_copula(const PseudoSample& s, const std::vector<double>& u) {
  require_point_dim(u, s.dim, "empirical_copula");
  std::vector<double> threshold(s.dim);
  for (std::size_t j = 0; j < s.dim; ++j) {
    if (!(u[j] >= 0.0 && u[j] <= 1.0)) {
      throw std::invalid_argument("empirical_copula: coordinate " +
                                  gf::format_double(u[j]) +
                                  " outside [0, 1]");
    }
    const auto col = sorted_column(s.u, j);
    threshold[j] = u[j] == 0.0 ? col.front() : col[inverse_rank(u[j], s.n) - 1];
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.n; ++i) {
    bool all = true;
    for (std::size_t j = 0; j < s.dim; ++j) {
      if (s.u.at(i, j) > threshold[j]) {
        all = false;
        break;
      }
    }
    count += all ? 1 : 0;
  }
  return static_cast<double>(count) / static_cast<double>(s.n);
}

std::vector<std::vector<double>> marginal_thresholds(
    const PseudoSample& s, const gf::GridDomain& grid) {
  if (grid.dim() != s.dim) {
    throw std::invalid_argument("marginal_thresholds: grid dimension mismatch");
  }
  std::vector<std::vector<double>> thresholds(s.dim);
  for (std::size_t j = 0; j < s.dim; ++j) {
    const auto col = sorted_column(s.u, j);
    thresholds[j].resize(grid.shape()[j]);
    for (std::size_t g = 0; g < grid.shape()[j]; ++g) {
      const double ug = grid.coordinate(j, g);
      if (!(ug >= 0.0 && ug <= 1.0)) {
        throw std::invalid_argument(
            "marginal_thresholds: grid coordinate outside [0, 1]");
      }
      thresholds[j][g] =
          ug == 0.0 ? col.front() : col[inverse_rank(ug, s.n) - 1];
    }
  }
  return thresholds;
}

gf::GridFunction empirical_copula_process(const PseudoSample& s,
                                          const CopulaModel& c,
                                          const gf::GridDomain& grid) {
  if (c.dim != s.dim || grid.dim() != s.dim) {
    throw std::invalid_argument("empirical_copula_process: dimension mismatch");
  }
  const auto thresholds = marginal_thresholds(s, grid);

  // Count rows below the per-axis thresholds for every grid point at once:
  // bin each row at the first grid index whose threshold covers it, then
  // cumulative-sum along every axis.
  std::vector<double> counts(grid.total_points(), 0.0);
  std::vector<std::size_t> cell(s.dim);
  for (std::size_t i = 0; i < s.n; ++i) {
    bool inside = true;
    for (std::size_t j = 0; j < s.dim; ++j) {
      const auto& t = thresholds[j];
      const auto it = std::lower_bound(t.begin(), t.end(), s.u.at(i, j));
      if (it == t.end()) {
        inside = false;  // row exceeds the last threshold on this axis
        break;
      }
      cell[j] = static_cast<std::size_t>(it - t.begin());
    }
    if (inside) counts[grid.flatten(cell)] += 1.0;
  }
  for (std::size_t j = 0; j < s.dim; ++j) {
    gf::cumsum_along_axis(counts, grid.shape(), j);
  }

  const double sqrt_n = std::sqrt(static_cast<double>(s.n));
  const double n_as_double = static_cast<double>(s.n);
  std::vector<double> values(grid.total_points());
  std::vector<std::size_t> multi(s.dim, 0);
  std::vector<double> point(s.dim);
  for (std::size_t flat = 0; flat < grid.total_points(); ++flat) {
    for (std::size_t j = 0; j < s.dim; ++j) {
      point[j] = grid.coordinate(j, multi[j]);
    }
    // Divide rather than multiply by a precomputed reciprocal so the value
    // is bit-identical to the pointwise empirical copula evaluation.
    values[flat] = sqrt_n * (counts[flat] / n_as_double - c.eval(point));
    for (std::size_t j = s.dim; j-- > 0;) {
      if (++multi[j] < grid.shape()[j]) break;
      multi[j] = 0;
    }
  }
  return gf::GridFunction(grid, std::move(values));
}

hypi::ScExtension dC_extension(const CopulaModel& c,
                               const std::vector<gf::GridFunction>& a,
                               const gf::GridDomain& grid,
                               std::size_t radius_cells) {
  if (c.dim != grid.dim()) {
    throw std::invalid_argument("dC_extension: dimension mismatch");
  }
  return hypi::directional_extension(grid, c.partial, c.in_S, a, radius_cells);
}

LimitDraw simulate_limit(const CopulaModel& c, const gf::GridDomain& grid,
                         std::size_t n_approx, rng::Rng& rng) {
  if (grid.dim() != c.dim) {
    throw std::invalid_argument("simulate_limit: grid dimension mismatch");
  }
  for (std::size_t j = 0; j < grid.dim(); ++j) {
    if (std::abs(grid.coordinate(j, grid.shape()[j] - 1) - 1.0) > 1e-12) {
      throw std::invalid_argument(
          "simulate_limit: axis " + std::to_string(j) +
          " must end at 1 so margins can be read off the grid faces");
    }
  }
  const Matrix latent = c.sample(n_approx, rng);
  std::vector<double> xi(n_approx);
  for (double& w : xi) w = rng.normal();

  // Weighted counting field S(u) = sum_i xi_i 1{U_i <= u} on the grid.
  std::vector<double> field(grid.total_points(), 0.0);
  std::vector<std::size_t> cell(grid.dim());
  for (std::size_t i = 0; i < n_approx; ++i) {
    bool inside = true;
    for (std::size_t j = 0; j < grid.dim(); ++j) {
      // First grid index whose coordinate is >= the latent value.
      std::size_t lo = 0;
      std::size_t hi = grid.shape()[j];
      const double v = latent.at(i, j);
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (grid.coordinate(j, mid) >= v) {
          hi = mid;
        } else {
          lo = mid + 1;
        }
      }
      if (lo == grid.shape()[j]) {
        inside = false;
        break;
      }
      cell[j] = lo;
    }
    if (inside) field[grid.flatten(cell)] += xi[i];
  }
  for (std::size_t j = 0; j < grid.dim(); ++j) {
    gf::cumsum_along_axis(field, grid.shape(), j);
  }
  // Total weight read off the all-ones corner of the summed field, so the
  // centering term C(1,...,1) * total cancels it exactly there and alpha
  // vanishes at the corner bit for bit.
  const double xi_total = field[grid.total_points() - 1];

  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n_approx));
  std::vector<double> alpha_values(grid.total_points());
  std::vector<std::size_t> multi(grid.dim(), 0);
  std::vector<double> point(grid.dim());
  for (std::size_t flat = 0; flat < grid.total_points(); ++flat) {
    for (std::size_t j = 0; j < grid.dim(); ++j) {
      point[j] = grid.coordinate(j, multi[j]);
    }
    alpha_values[flat] =
        inv_sqrt * (field[flat] - c.eval(point) * xi_total);
    for (std::size_t j = grid.dim(); j-- > 0;) {
      if (++multi[j] < grid.shape()[j]) break;
      multi[j] = 0;
    }
  }
  gf::GridFunction alpha(grid, std::move(alpha_values));

  // Margins alpha_j: alpha evaluated at (1, ..., 1, u_j, 1, ..., 1).
  std::vector<gf::GridFunction> margins;
  std::vector<gf::GridFunction> direction;
  margins.reserve(grid.dim());
  direction.reserve(grid.dim());
  for (std::size_t j = 0; j < grid.dim(); ++j) {
    std::vector<std::size_t> corner(grid.dim());
    for (std::size_t k = 0; k < grid.dim(); ++k) {
      corner[k] = grid.shape()[k] - 1;
    }
    std::vector<double> marg(grid.shape()[j]);
    std::vector<double> neg(grid.shape()[j]);
    for (std::size_t g = 0; g < grid.shape()[j]; ++g) {
      corner[j] = g;
      marg[g] = alpha[grid.flatten(corner)];
      neg[g] = -marg[g];
    }
    const gf::GridDomain axis({grid.lower()[j]}, {grid.upper()[j]},
                              {grid.shape()[j]});
    margins.emplace_back(axis, std::move(marg));
    direction.emplace_back(axis, std::move(neg));
  }

  hypi::ScExtension ext = dC_extension(c, direction, grid);
  std::vector<double> realization(grid.total_points());
  for (std::size_t flat = 0; flat < grid.total_points(); ++flat) {
    realization[flat] = alpha[flat] + ext.lower[flat];
  }
  return LimitDraw{gf::GridFunction(grid, std::move(realization)),
                   std::move(alpha), std::move(margins), std::move(ext)};
}

std::vector<double> multiplier_alpha_at(
    const CopulaModel& c, const Matrix& latent_u, const std::vector<double>& xi,
    const std::vector<std::vector<double>>& points) {
  if (latent_u.rows != xi.size()) {
    throw std::invalid_argument("multiplier_alpha_at: weight count mismatch");
  }
  const double xi_total = std::accumulate(xi.begin(), xi.end(), 0.0);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(latent_u.rows));
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    require_point_dim(p, latent_u.cols, "multiplier_alpha_at");
    double s = 0.0;
    for (std::size_t i = 0; i < latent_u.rows; ++i) {
      bool below = true;
      for (std::size_t j = 0; j < latent_u.cols; ++j) {
        if (latent_u.at(i, j) > p[j]) {
          below = false;
          break;
        }
      }
      if (below) s += xi[i];
    }
    out.push_back(inv_sqrt * (s - c.eval(p) * xi_total));
  }
  return out;
}

}  // namespace epiproc::copula
