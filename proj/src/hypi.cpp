#include "epiproc/hypi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace epiproc::hypi {

namespace gf = epiproc::gridfn;

namespace {

/// Lowest grid-y index with y >= v (used for epigraph boundaries) or highest
/// with y <= v (hypograph). The 1e-9 index-unit guard keeps values that are
/// exactly on a grid line from flipping to the neighboring cell under
/// floating-point dust.
std::size_t boundary_index(double v, double y_low, double h_y,
                           std::size_t y_points, bool upward) {
  const double q = (v - y_low) / h_y;
  double idx = upward ? std::ceil(q - 1e-9) : std::floor(q + 1e-9);
  idx = std::max(idx, 0.0);
  idx = std::min(idx, static_cast<double>(y_points - 1));
  return static_cast<std::size_t>(idx);
}

void check_range(const gf::GridFunction& f, const HypiConfig& cfg,
                 const char* op) {
  const double mn = f.min_value();
  const double mx = f.max_value();
  if (mn < cfg.y_low || mx > cfg.y_high) {
    const double offender = mn < cfg.y_low ? mn : mx;
    throw std::invalid_argument(
        std::string(op) + ": function value " + gf::format_double(offender) +
        " outside the truncation window [" + gf::format_double(cfg.y_low) +
        ", " + gf::format_double(cfg.y_high) + "]");
  }
}

std::vector<std::size_t> boundaries_of(const gf::GridFunction& hull,
                                       const HypiConfig& cfg, bool upward) {
  const double h_y = cfg.y_spacing();
  std::vector<std::size_t> b(hull.values().size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = boundary_index(hull[i], cfg.y_low, h_y, cfg.y_points, upward);
  }
  return b;
}

/// Everything a directed-distance evaluation needs from one raster.
struct ProfileView {
  const gf::GridDomain* x_dom;
  const std::vector<std::size_t>* boundary;
  bool upward;
  double h_y;
};

/// Vertical gap (in physical units) from the boundary cell of column xa of A
/// to set B's column xb: zero when A's boundary cell already lies inside
/// B's column, else the distance to B's boundary.
double vertical_gap(const ProfileView& a, const ProfileView& b, std::size_t xa,
                    std::size_t xb) {
  const std::ptrdiff_t ya = static_cast<std::ptrdiff_t>((*a.boundary)[xa]);
  const std::ptrdiff_t yb = static_cast<std::ptrdiff_t>((*b.boundary)[xb]);
  const std::ptrdiff_t gap = a.upward ? yb - ya : ya - yb;
  return gap > 0 ? static_cast<double>(gap) * a.h_y : 0.0;
}

/// Directed Hausdorff distance max_{p in A} dist(p, B) for two same-oriented
/// y-monotone rasters.
///
/// For an upward-closed B, dist((x,y), B) = min_t max(xdist(x,t),
/// h_y (Yb(t)-y)^+) is nonincreasing in y, so the max over a column of A is
/// attained at A's boundary cell; only boundary cells are evaluated.
/// Columns are processed in decreasing order of their same-column vertical
/// gap (an upper bound for the column's distance), so the running maximum
/// converges immediately and later columns terminate on the first test.
double directed_profile(const ProfileView& a, const ProfileView& b) {
  const gf::GridDomain& dom = *a.x_dom;
  const std::size_t cols = dom.total_points();
  const std::size_t d = dom.dim();

  std::vector<double> gap0(cols);
  for (std::size_t x = 0; x < cols; ++x) gap0[x] = vertical_gap(a, b, x, x);
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return gap0[i] > gap0[j]; });

  std::vector<double> w(d);
  double min_w = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d; ++j) {
    w[j] = dom.spacing(j);
    min_w = std::min(min_w, w[j]);
  }

  double h = 0.0;
  std::vector<std::size_t> center(d), lo(d), hi(d), t(d);
  for (std::size_t oi = 0; oi < cols; ++oi) {
    const std::size_t x = order[oi];
    if (gap0[x] <= h) break;  // sorted: no later column can raise the max
    double best = gap0[x];
    center = dom.unflatten(x);
    for (std::size_t k = 1; min_w * static_cast<double>(k) < best; ++k) {
      // Visit columns at Chebyshev index-radius exactly k around x.
      bool any_in_range = false;
      for (std::size_t j = 0; j < d; ++j) {
        lo[j] = center[j] >= k ? center[j] - k : 0;
        hi[j] = std::min(center[j] + k, dom.shape()[j] - 1);
        t[j] = lo[j];
      }
      while (true) {
        std::size_t cheb = 0;
        for (std::size_t j = 0; j < d; ++j) {
          const std::size_t delta =
              t[j] > center[j] ? t[j] - center[j] : center[j] - t[j];
          cheb = std::max(cheb, delta);
        }
        if (cheb == k) {
          any_in_range = true;
          double xdist = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double delta = t[j] > center[j]
                                     ? static_cast<double>(t[j] - center[j])
                                     : static_cast<double>(center[j] - t[j]);
            xdist = std::max(xdist, w[j] * delta);
          }
          if (xdist < best) {
            const double cand =
                std::max(xdist, vertical_gap(a, b, x, dom.flatten(t)));
            best = std::min(best, cand);
          }
        }
        bool carried_out = true;
        for (std::size_t j = d; j-- > 0;) {
          if (++t[j] <= hi[j]) {
            carried_out = false;
            break;
          }
          t[j] = lo[j];
        }
        if (carried_out) break;
      }
      if (!any_in_range) break;  // ring left the grid entirely
    }
    h = std::max(h, best);
  }
  return h;
}

double hausdorff_profiles(const ProfileView& a, const ProfileView& b) {
  return std::max(directed_profile(a, b), directed_profile(b, a));
}

ProfileView view_of(const RasterSet& r) {
  return ProfileView{&r.x_domain(), &r.boundary(),
                     r.orientation() == RasterSet::Orientation::upward,
                     r.y_spacing()};
}

/// Member cells of a raster as (x_flat, y_index) pairs.
std::vector<std::pair<std::size_t, std::size_t>> member_cells(
    const RasterSet& r) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  cells.reserve(r.member_count());
  const std::size_t cols = r.x_domain().total_points();
  for (std::size_t x = 0; x < cols; ++x) {
    const std::size_t b = r.boundary()[x];
    if (r.orientation() == RasterSet::Orientation::upward) {
      for (std::size_t y = b; y < r.y_points(); ++y) cells.emplace_back(x, y);
    } else {
      for (std::size_t y = 0; y <= b; ++y) cells.emplace_back(x, y);
    }
  }
  return cells;
}

double directed_brute(const RasterSet& ra, const RasterSet& rb) {
  const gf::GridDomain& dom = ra.x_domain();
  const std::size_t d = dom.dim();
  const double h_y = ra.y_spacing();
  std::vector<double> w(d);
  for (std::size_t j = 0; j < d; ++j) w[j] = dom.spacing(j);

  const auto cells_a = member_cells(ra);
  const auto cells_b = member_cells(rb);
  // Multi-indices per x-column, computed once.
  std::vector<std::vector<std::size_t>> multi(dom.total_points());
  for (std::size_t x = 0; x < multi.size(); ++x) multi[x] = dom.unflatten(x);

  double h = 0.0;
  for (const auto& [xa, ya] : cells_a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [xb, yb] : cells_b) {
      double dist = h_y * std::abs(static_cast<double>(ya) -
                                   static_cast<double>(yb));
      for (std::size_t j = 0; j < d && dist < best; ++j) {
        const double delta = std::abs(static_cast<double>(multi[xa][j]) -
                                      static_cast<double>(multi[xb][j]));
        dist = std::max(dist, w[j] * delta);
      }
      best = std::min(best, dist);
      if (best <= h) break;  // this cell cannot raise the running max
    }
    h = std::max(h, best);
  }
  return h;
}

}  // namespace

HypiConfig::HypiConfig(double y_low_in, double y_high_in,
                       std::size_t y_points_in, std::size_t hull_radius_in,
                       HausdorffBackend backend_in)
    : y_low(y_low_in),
      y_high(y_high_in),
      y_points(y_points_in),
      hull_radius_cells(hull_radius_in),
      backend(backend_in) {
  if (!(y_low < y_high)) {
    throw std::invalid_argument("HypiConfig: y_low must be < y_high");
  }
  if (y_points < 2) {
    throw std::invalid_argument("HypiConfig: y_points must be >= 2");
  }
  if (hull_radius_cells < 1) {
    throw std::invalid_argument("HypiConfig: hull_radius_cells must be >= 1");
  }
}

double HypiConfig::cell_diameter(const gf::GridDomain& dom) const {
  return std::max(dom.max_spacing(), y_spacing());
}

RasterSet::RasterSet(gf::GridDomain x_domain, double y_low, double y_high,
                     std::size_t y_points, Orientation orientation,
                     std::vector<std::size_t> boundary)
    : x_domain_(std::move(x_domain)),
      y_low_(y_low),
      y_high_(y_high),
      y_points_(y_points),
      orientation_(orientation),
      boundary_(std::move(boundary)) {
  if (boundary_.size() != x_domain_.total_points()) {
    throw std::invalid_argument("RasterSet: boundary size mismatch");
  }
  for (std::size_t b : boundary_) {
    if (b >= y_points_) {
      throw std::invalid_argument("RasterSet: boundary index out of range");
    }
  }
  membership_.assign(x_domain_.total_points() * y_points_, 0);
  for (std::size_t x = 0; x < boundary_.size(); ++x) {
    char* col = membership_.data() + x * y_points_;
    if (orientation_ == Orientation::upward) {
      std::fill(col + boundary_[x], col + y_points_, char(1));
    } else {
      std::fill(col, col + boundary_[x] + 1, char(1));
    }
  }
}

std::size_t RasterSet::member_count() const {
  std::size_t n = 0;
  for (std::size_t x = 0; x < boundary_.size(); ++x) {
    n += orientation_ == Orientation::upward ? y_points_ - boundary_[x]
                                             : boundary_[x] + 1;
  }
  return n;
}

bool RasterSet::same_raster_domain(const RasterSet& other) const {
  return x_domain_ == other.x_domain_ && y_low_ == other.y_low_ &&
         y_high_ == other.y_high_ && y_points_ == other.y_points_;
}

RasterSet epigraph(const gf::GridFunction& f, const HypiConfig& cfg) {
  check_range(f, cfg, "epigraph");
  const gf::GridFunction hull = gf::lsc_hull(f, cfg.hull_radius_cells);
  return RasterSet(f.domain(), cfg.y_low, cfg.y_high, cfg.y_points,
                   RasterSet::Orientation::upward,
                   boundaries_of(hull, cfg, /*upward=*/true));
}

RasterSet hypograph(const gf::GridFunction& f, const HypiConfig& cfg) {
  check_range(f, cfg, "hypograph");
  const gf::GridFunction hull = gf::usc_hull(f, cfg.hull_radius_cells);
  return RasterSet(f.domain(), cfg.y_low, cfg.y_high, cfg.y_points,
                   RasterSet::Orientation::downward,
                   boundaries_of(hull, cfg, /*upward=*/false));
}

double hausdorff_distance(const RasterSet& a, const RasterSet& b,
                          HausdorffBackend backend) {
  if (!a.same_raster_domain(b)) {
    throw std::invalid_argument("hausdorff_distance: raster domains differ");
  }
  if (backend == HausdorffBackend::distance_transform &&
      a.orientation() == b.orientation()) {
    return hausdorff_profiles(view_of(a), view_of(b));
  }
  return std::max(directed_brute(a, b), directed_brute(b, a));
}

double hypi_distance(const gf::GridFunction& f, const gf::GridFunction& g,
                     const HypiConfig& cfg) {
  if (f.domain() != g.domain()) {
    throw std::invalid_argument("hypi_distance: grid domains do not match");
  }
  check_range(f, cfg, "hypi_distance");
  check_range(g, cfg, "hypi_distance");
  if (cfg.backend == HausdorffBackend::brute_force) {
    const double d_epi = hausdorff_distance(epigraph(f, cfg), epigraph(g, cfg),
                                            HausdorffBackend::brute_force);
    const double d_hypo = hausdorff_distance(
        hypograph(f, cfg), hypograph(g, cfg), HausdorffBackend::brute_force);
    return std::max(d_epi, d_hypo);
  }
  // Distance-transform path: boundary indices are read off the hull values
  // directly; the full membership raster is never materialized.
  const double h_y = cfg.y_spacing();
  const gf::GridFunction f_lo = gf::lsc_hull(f, cfg.hull_radius_cells);
  const gf::GridFunction g_lo = gf::lsc_hull(g, cfg.hull_radius_cells);
  const auto bf_lo = boundaries_of(f_lo, cfg, true);
  const auto bg_lo = boundaries_of(g_lo, cfg, true);
  const ProfileView ef{&f.domain(), &bf_lo, true, h_y};
  const ProfileView eg{&g.domain(), &bg_lo, true, h_y};
  const double d_epi = hausdorff_profiles(ef, eg);

  const gf::GridFunction f_hi = gf::usc_hull(f, cfg.hull_radius_cells);
  const gf::GridFunction g_hi = gf::usc_hull(g, cfg.hull_radius_cells);
  const auto bf_hi = boundaries_of(f_hi, cfg, false);
  const auto bg_hi = boundaries_of(g_hi, cfg, false);
  const ProfileView hf{&f.domain(), &bf_hi, false, h_y};
  const ProfileView hg{&g.domain(), &bg_hi, false, h_y};
  const double d_hypo = hausdorff_profiles(hf, hg);
  return std::max(d_epi, d_hypo);
}

ScExtension sc_extension(const gf::MaskedGridFunction& f,
                         std::size_t radius_cells) {
  const gf::GridDomain& dom = f.base.domain();
  const std::size_t n = dom.total_points();
  const std::size_t d = dom.dim();
  std::vector<double> lower(n), upper(n);
  std::vector<std::size_t> radius_used(n);
  std::size_t max_radius = 0;

  std::vector<std::size_t> center(d), lo(d), hi(d), t(d);
  for (std::size_t p = 0; p < n; ++p) {
    center = dom.unflatten(p);
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    std::size_t r = radius_cells;
    while (true) {
      // Scan the full clipped box of radius r around p over defined points.
      for (std::size_t j = 0; j < d; ++j) {
        lo[j] = center[j] >= r ? center[j] - r : 0;
        hi[j] = std::min(center[j] + r, dom.shape()[j] - 1);
        t[j] = lo[j];
      }
      mn = std::numeric_limits<double>::infinity();
      mx = -mn;
      while (true) {
        const std::size_t q = dom.flatten(t);
        if (f.defined[q]) {
          mn = std::min(mn, f.base[q]);
          mx = std::max(mx, f.base[q]);
        }
        bool carried_out = true;
        for (std::size_t j = d; j-- > 0;) {
          if (++t[j] <= hi[j]) {
            carried_out = false;
            break;
          }
          t[j] = lo[j];
        }
        if (carried_out) break;
      }
      if (std::isfinite(mn)) break;
      ++r;  // no defined point that close; grow (mask is nonempty, so finite)
    }
    lower[p] = mn;
    upper[p] = mx;
    radius_used[p] = r;
    max_radius = std::max(max_radius, r);
  }
  return ScExtension{gf::GridFunction(dom, std::move(lower)),
                     gf::GridFunction(dom, std::move(upper)),
                     std::move(radius_used), max_radius};
}

ScExtension directional_extension(
    const gf::GridDomain& grid,
    const std::function<double(std::size_t, const std::vector<double>&)>&
        partial,
    const std::function<bool(const std::vector<double>&)>& in_S,
    const std::vector<gf::GridFunction>& a, std::size_t radius_cells) {
  if (a.size() != grid.dim()) {
    throw std::invalid_argument(
        "directional_extension: need one direction function per axis");
  }
  for (std::size_t j = 0; j < a.size(); ++j) {
    const gf::GridDomain expected({grid.lower()[j]}, {grid.upper()[j]},
                                  {grid.shape()[j]});
    if (a[j].domain() != expected) {
      throw std::invalid_argument(
          "directional_extension: direction function " + std::to_string(j) +
          " does not live on axis " + std::to_string(j) + " of the grid");
    }
  }
  std::vector<double> values(grid.total_points(), 0.0);
  std::vector<char> defined(grid.total_points(), 0);
  std::vector<std::size_t> multi(grid.dim(), 0);
  std::vector<double> point(grid.dim());
  for (std::size_t flat = 0; flat < grid.total_points(); ++flat) {
    for (std::size_t j = 0; j < grid.dim(); ++j) {
      point[j] = grid.coordinate(j, multi[j]);
    }
    if (in_S(point)) {
      double g = 0.0;
      for (std::size_t j = 0; j < grid.dim(); ++j) {
        g += partial(j, point) * a[j][multi[j]];
      }
      values[flat] = g;
      defined[flat] = 1;
    }
    for (std::size_t j = grid.dim(); j-- > 0;) {
      if (++multi[j] < grid.shape()[j]) break;
      multi[j] = 0;
    }
  }
  gf::MaskedGridFunction masked(gf::GridFunction(grid, std::move(values)),
                                std::move(defined));
  return sc_extension(masked, radius_cells);
}

ConvergenceReport check_hypi_convergence(
    const std::vector<gf::GridFunction>& seq, const gf::GridFunction& f,
    const HypiConfig& cfg, double tolerance) {
  if (seq.empty()) {
    throw std::invalid_argument("check_hypi_convergence: empty sequence");
  }
  const gf::GridDomain& dom = f.domain();
  if (tolerance <= 0.0) tolerance = 3.0 * cfg.cell_diameter(dom);

  ConvergenceReport rep;
  rep.tolerance = tolerance;
  const std::size_t len = seq.size();
  rep.tail_start = len - (len + 2) / 3;  // last third, at least one element

  const gf::GridFunction f_lo = gf::lsc_hull(f, cfg.hull_radius_cells);
  const gf::GridFunction f_hi = gf::usc_hull(f, cfg.hull_radius_cells);
  rep.epi_residuals.assign(dom.total_points(), 0.0);
  rep.hypo_residuals.assign(dom.total_points(), 0.0);

  rep.hypi_distances.reserve(len);
  rep.sup_distances.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    rep.hypi_distances.push_back(hypi_distance(seq[i], f, cfg));
    rep.sup_distances.push_back(gf::sup_distance(seq[i], f));
    if (i >= rep.tail_start) {
      const gf::GridFunction n_lo = gf::lsc_hull(seq[i], cfg.hull_radius_cells);
      const gf::GridFunction n_hi = gf::usc_hull(seq[i], cfg.hull_radius_cells);
      for (std::size_t p = 0; p < dom.total_points(); ++p) {
        rep.epi_residuals[p] =
            std::max(rep.epi_residuals[p], std::abs(n_lo[p] - f_lo[p]));
        rep.hypo_residuals[p] =
            std::max(rep.hypo_residuals[p], std::abs(n_hi[p] - f_hi[p]));
      }
    }
  }
  double tail_hypi = 0.0;
  double tail_sup = 0.0;
  for (std::size_t i = rep.tail_start; i < len; ++i) {
    tail_hypi = std::max(tail_hypi, rep.hypi_distances[i]);
    tail_sup = std::max(tail_sup, rep.sup_distances[i]);
  }
  rep.hypi_converges = tail_hypi <= tolerance;
  rep.uniform_converges = tail_sup <= tolerance;
  return rep;
}

}  // namespace epiproc::hypi
