#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "epiproc/gridfn.hpp"

namespace epiproc::hypi {

enum class HausdorffBackend { brute_force, distance_transform };

/// Everything needed to turn the epigraph/hypograph semimetric into a
/// concrete number: the y truncation window, its resolution, the hull
/// radius, and the set-distance backend.
///
/// The window [y_low, y_high] must contain the value range of every function
/// compared under this config; violations are reported at call time. The
/// window must be held fixed across an experiment for distances to be
/// comparable.
struct HypiConfig {
  double y_low;
  double y_high;
  std::size_t y_points;
  std::size_t hull_radius_cells = 1;
  HausdorffBackend backend = HausdorffBackend::distance_transform;

  HypiConfig(double y_low_in, double y_high_in, std::size_t y_points_in,
             std::size_t hull_radius_in = 1,
             HausdorffBackend backend_in = HausdorffBackend::distance_transform);

  double y_spacing() const {
    return (y_high - y_low) / static_cast<double>(y_points - 1);
  }
  /// Diameter of one grid cell of domain `dom` extended by the y axis,
  /// under the max metric (the largest single spacing involved).
  double cell_diameter(const gridfn::GridDomain& dom) const;
};

/// A subset of the discretized product of an x-grid and the y window.
///
/// Only epigraphs (upward-closed in y) and hypographs (downward-closed) are
/// constructible, so every instance is y-monotone with one boundary index
/// per x-column. Membership is stored explicitly; layout is x-flat-major
/// with the y index fastest.
class RasterSet {
 public:
  enum class Orientation { upward, downward };

  RasterSet(gridfn::GridDomain x_domain, double y_low, double y_high,
            std::size_t y_points, Orientation orientation,
            std::vector<std::size_t> boundary);

  const gridfn::GridDomain& x_domain() const { return x_domain_; }
  double y_low() const { return y_low_; }
  double y_high() const { return y_high_; }
  std::size_t y_points() const { return y_points_; }
  double y_spacing() const {
    return (y_high_ - y_low_) / static_cast<double>(y_points_ - 1);
  }
  Orientation orientation() const { return orientation_; }
  /// Per x-column boundary y-index: lowest member for upward sets,
  /// highest member for downward sets.
  const std::vector<std::size_t>& boundary() const { return boundary_; }
  const std::vector<char>& membership() const { return membership_; }
  bool contains(std::size_t x_flat, std::size_t y_index) const {
    return membership_[x_flat * y_points_ + y_index] != 0;
  }
  std::size_t member_count() const;

  bool same_raster_domain(const RasterSet& other) const;

 private:
  gridfn::GridDomain x_domain_;
  double y_low_;
  double y_high_;
  std::size_t y_points_;
  Orientation orientation_;
  std::vector<std::size_t> boundary_;
  std::vector<char> membership_;
};

/// Rasterized epigraph of the lsc hull of f: column x is filled from the
/// lowest grid y with y >= lsc_hull(f)(x) upward. Throws if the range of f
/// leaves the window, naming the offending value.
RasterSet epigraph(const gridfn::GridFunction& f, const HypiConfig& cfg);

/// Rasterized hypograph of the usc hull of f (filled downward).
RasterSet hypograph(const gridfn::GridFunction& f, const HypiConfig& cfg);

/// Symmetric Hausdorff distance between two rasters under the max metric on
/// physical (x, y) coordinates.
///
/// brute_force scans all member pairs and is the ground truth. The
/// distance_transform backend computes per-column vertical distance maps
/// from the boundary indices and evaluates them only at boundary cells,
/// where the directed maximum is attained for same-oriented y-monotone
/// rasters; it returns exactly the brute-force value. For mixed
/// orientations it falls back to the brute-force scan.
double hausdorff_distance(
    const RasterSet& a, const RasterSet& b,
    HausdorffBackend backend = HausdorffBackend::distance_transform);

/// The epi/hypograph semimetric:
///   max{ H(epi lsc-hull f, epi lsc-hull g), H(hypo usc-hull f, hypo usc-hull g) }.
/// Symmetric; zero whenever f and g share both hulls; triangle inequality
/// inherited from the Hausdorff distance.
double hypi_distance(const gridfn::GridFunction& f,
                     const gridfn::GridFunction& g, const HypiConfig& cfg);

/// Semicontinuous extension of a partially defined grid function.
struct ScExtension {
  gridfn::GridFunction lower;   // neighborhood minima over defined points
  gridfn::GridFunction upper;   // neighborhood maxima over defined points
  /// Effective radius used at each grid point; exceeds the requested radius
  /// exactly where the neighborhood had to grow to reach a defined point.
  std::vector<std::size_t> radius_used;
  std::size_t max_radius_used;
};

/// At each grid point, min resp. max of f over defined points within
/// radius_cells (Chebyshev). Where no defined point is that close, the
/// radius grows per point until one is found, and the growth is recorded.
/// With a fully defined mask and radius >= 1 this reduces to
/// (lsc_hull, usc_hull); radius 0 evaluates defined points in place and
/// fills undefined ones from their nearest defined neighbors.
ScExtension sc_extension(const gridfn::MaskedGridFunction& f,
                         std::size_t radius_cells);

/// Shared machinery for the directional-derivative extensions: evaluate
/// G(v) = sum_j partial(j, v) a_j(v_j) on the grid points where in_S holds
/// and extend semicontinuously. a_j must live exactly on axis j of the grid.
ScExtension directional_extension(
    const gridfn::GridDomain& grid,
    const std::function<double(std::size_t, const std::vector<double>&)>&
        partial,
    const std::function<bool(const std::vector<double>&)>& in_S,
    const std::vector<gridfn::GridFunction>& a, std::size_t radius_cells);

/// Diagnostics for a sequence f_n against a candidate limit f.
struct ConvergenceReport {
  std::vector<double> hypi_distances;  // d_hypi(f_n, f) per n
  std::vector<double> sup_distances;   // sup |f_n - f| per n
  /// Per grid point, worst tail deviation of the hulled sequence from the
  /// hulled limit: max over tail n of |lsc_hull(f_n,r) - lsc_hull(f,r)|.
  std::vector<double> epi_residuals;
  std::vector<double> hypo_residuals;  // same with usc hulls
  std::size_t tail_start;              // first index counted as tail
  double tolerance;
  bool hypi_converges;     // max over tail of hypi_distances <= tolerance
  bool uniform_converges;  // max over tail of sup_distances  <= tolerance
};

/// Check discretized epi/hypo convergence of f_n to f. The tail is the last
/// third of the sequence (at least one element). tolerance <= 0 selects the
/// default of 3 cell diameters.
ConvergenceReport check_hypi_convergence(
    const std::vector<gridfn::GridFunction>& seq, const gridfn::GridFunction& f,
    const HypiConfig& cfg, double tolerance = 0.0);

}  // namespace epiproc::hypi
