#include "epiproc/taildep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace epiproc::taildep {

namespace gf = epiproc::gridfn;

namespace {

/// Componentwise 1-based ranks as doubles; ties within a column are an
/// error because the estimator's rank thresholds assume distinct values.
Matrix column_ranks(const Matrix& raw, const char* op) {
  if (raw.rows < 2 || raw.cols == 0) {
    throw std::invalid_argument(std::string(op) + ": need at least 2 rows");
  }
  Matrix ranks(raw.rows, raw.cols);
  std::vector<std::size_t> idx(raw.rows);
  for (std::size_t j = 0; j < raw.cols; ++j) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return raw.at(a, j) < raw.at(b, j);
    });
    for (std::size_t r = 0; r + 1 < raw.rows; ++r) {
      if (raw.at(idx[r], j) == raw.at(idx[r + 1], j)) {
        throw std::invalid_argument(std::string(op) + ": ties in column " +
                                    std::to_string(j));
      }
    }
    for (std::size_t r = 0; r < raw.rows; ++r) {
      ranks.at(idx[r], j) = static_cast<double>(r + 1);
    }
  }
  return ranks;
}

void require_k(std::size_t k, std::size_t n, const char* op) {
  if (k == 0 || k >= n) {
    throw std::invalid_argument(std::string(op) +
                                ": k must satisfy 1 <= k < n, got k = " +
                                std::to_string(k) + ", n = " +
                                std::to_string(n));
  }
}

/// The rank threshold at tail coordinate x: a row exceeds on axis j when
/// its rank is strictly above this. Shared verbatim by the pointwise
/// estimator and the grid evaluator so the two agree bit for bit.
double rank_threshold(std::size_t n, std::size_t k, double x) {
  return static_cast<double>(n) + 0.5 - static_cast<double>(k) * x;
}

}  // namespace

TailModel tail_model_max() {
  TailModel m;
  m.dim = 2;
  m.L = [](const std::vector<double>& x) {
    if (x.size() != 2) {
      throw std::invalid_argument("tail max L: point must be 2-dimensional");
    }
    return std::max(x[0], x[1]);
  };
  m.grad = [](std::size_t axis, const std::vector<double>& x) {
    if (x[0] == x[1]) {
      throw std::invalid_argument(
          "tail max grad: not differentiable on the diagonal");
    }
    const bool own_larger = axis == 0 ? x[0] > x[1] : x[1] > x[0];
    return own_larger ? 1.0 : 0.0;
  };
  m.in_S = [](const std::vector<double>& x) { return x[0] != x[1]; };
  m.sample = [](std::size_t count, rng::Rng& rng) {
    Matrix out(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
      const double v = rng.uniform01();
      out.at(i, 0) = v;
      out.at(i, 1) = v;
    }
    return out;
  };
  return m;
}

TailModel tail_model_indep() {
  TailModel m;
  m.dim = 2;
  m.L = [](const std::vector<double>& x) {
    if (x.size() != 2) {
      throw std::invalid_argument("tail indep L: point must be 2-dimensional");
    }
    return x[0] + x[1];
  };
  m.grad = [](std::size_t, const std::vector<double>&) { return 1.0; };
  m.in_S = [](const std::vector<double>&) { return true; };
  m.sample = [](std::size_t count, rng::Rng& rng) {
    Matrix out(count, 2);
    for (double& v : out.data) v = rng.uniform01();
    return out;
  };
  return m;
}

double stable_tail_estimator(const Matrix& raw, std::size_t k,
                             const std::vector<double>& x) {
  const Matrix ranks = column_ranks(raw, "stable_tail_estimator");
  require_k(k, raw.rows, "stable_tail_estimator");
  if (x.size() != raw.cols) {
    throw std::invalid_argument(
        "stable_tail_estimator: point dimension mismatch");
  }
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(
          "stable_tail_estimator: coordinates must be finite and >= 0");
    }
  }
  std::vector<double> threshold(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    threshold[j] = rank_threshold(raw.rows, k, x[j]);
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < raw.rows; ++i) {
    for (std::size_t j = 0; j < raw.cols; ++j) {
      if (ranks.at(i, j) > threshold[j]) {
        ++count;
        break;
      }
    }
  }
  return static_cast<double>(count) / static_cast<double>(k);
}

hypi::ScExtension dL_extension(const TailModel& m,
                               const std::vector<gf::GridFunction>& a,
                               const gf::GridDomain& grid,
                               std::size_t radius_cells) {
  if (m.dim != grid.dim()) {
    throw std::invalid_argument("dL_extension: dimension mismatch");
  }
  return hypi::directional_extension(grid, m.grad, m.in_S, a, radius_cells);
}

gf::GridFunction estimator_process(const Matrix& raw, const TailModel& m,
                                   std::size_t k, const gf::GridDomain& grid) {
  const Matrix ranks = column_ranks(raw, "estimator_process");
  require_k(k, raw.rows, "estimator_process");
  if (grid.dim() != raw.cols || grid.dim() != m.dim) {
    throw std::invalid_argument("estimator_process: dimension mismatch");
  }
  for (std::size_t j = 0; j < grid.dim(); ++j) {
    if (grid.lower()[j] < 0.0) {
      throw std::invalid_argument(
          "estimator_process: grid must lie in the nonnegative orthant");
    }
  }
  const std::size_t n = raw.rows;

  // A row fails to exceed at grid index g on axis j exactly when its rank
  // stays within the (decreasing) threshold there. Bin each row at its last
  // such index per axis, then suffix-sum: the result at a grid point is the
  // number of rows exceeding nowhere, and the estimator counts the rest.
  std::vector<double> non_exceed(grid.total_points(), 0.0);
  std::vector<std::size_t> cell(grid.dim());
  for (std::size_t i = 0; i < n; ++i) {
    bool in_grid = true;
    for (std::size_t j = 0; j < grid.dim(); ++j) {
      const double r = ranks.at(i, j);
      // First grid index where the row's rank exceeds the threshold; the
      // comparison is the exact one the pointwise estimator makes.
      std::size_t lo = 0;
      std::size_t hi = grid.shape()[j];
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (r > rank_threshold(n, k, grid.coordinate(j, mid))) {
          hi = mid;
        } else {
          lo = mid + 1;
        }
      }
      if (lo == 0) {
        in_grid = false;  // exceeds everywhere on this axis
        break;
      }
      cell[j] = lo - 1;
    }
    if (in_grid) non_exceed[grid.flatten(cell)] += 1.0;
  }
  for (std::size_t j = 0; j < grid.dim(); ++j) {
    gf::suffix_sum_along_axis(non_exceed, grid.shape(), j);
  }

  const double sqrt_k = std::sqrt(static_cast<double>(k));
  const double n_real = static_cast<double>(n);
  const double k_real = static_cast<double>(k);
  std::vector<double> values(grid.total_points());
  std::vector<std::size_t> multi(grid.dim(), 0);
  std::vector<double> point(grid.dim());
  for (std::size_t flat = 0; flat < grid.total_points(); ++flat) {
    for (std::size_t j = 0; j < grid.dim(); ++j) {
      point[j] = grid.coordinate(j, multi[j]);
    }
    const double lhat = (n_real - non_exceed[flat]) / k_real;
    values[flat] = sqrt_k * (lhat - m.L(point));
    for (std::size_t j = grid.dim(); j-- > 0;) {
      if (++multi[j] < grid.shape()[j]) break;
      multi[j] = 0;
    }
  }
  return gf::GridFunction(grid, std::move(values));
}

}  // namespace epiproc::taildep
