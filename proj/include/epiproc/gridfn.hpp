#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace epiproc::gridfn {

/// Regular rectangular grid over a compact box [lower_1,upper_1] x ... .
///
/// Axis j carries points_per_axis[j] >= 2 equally spaced points including
/// both endpoints, so spacing(j) = (upper[j]-lower[j])/(points_per_axis[j]-1).
class GridDomain {
 public:
  GridDomain(std::vector<double> lower, std::vector<double> upper,
             std::vector<std::size_t> points_per_axis);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  double spacing(std::size_t axis) const;
  double max_spacing() const;
  /// Physical coordinate of grid index `index` along `axis`.
  double coordinate(std::size_t axis, std::size_t index) const;
  std::size_t total_points() const { return total_; }
  double box_volume() const;

  /// Row-major flattening: the last axis varies fastest.
  std::size_t flatten(const std::vector<std::size_t>& multi) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  bool operator==(const GridDomain& other) const;
  bool operator!=(const GridDomain& other) const { return !(*this == other); }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::size_t> shape_;
  std::size_t total_;
};

/// Convenience factory for the d-dimensional unit cube [0,1]^d.
GridDomain unit_cube_domain(std::size_t dim, std::size_t points_per_axis);

/// Real values sampled on every point of a GridDomain (row-major order).
/// Values are validated finite at construction; instances are immutable.
class GridFunction {
 public:
  GridFunction(GridDomain domain, std::vector<double> values);

  const GridDomain& domain() const { return domain_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t flat) const { return values_[flat]; }
  double at(const std::vector<std::size_t>& multi) const {
    return values_[domain_.flatten(multi)];
  }
  double min_value() const;
  double max_value() const;

 private:
  GridDomain domain_;
  std::vector<double> values_;
};

/// Grid function defined only on a subset of grid points.
/// `defined` uses char (not bool) so rows can be written concurrently.
struct MaskedGridFunction {
  GridFunction base;
  std::vector<char> defined;

  MaskedGridFunction(GridFunction base_fn, std::vector<char> defined_mask);
};

/// Pointwise minimum of f over the Chebyshev neighborhood of radius_cells
/// grid cells (the discrete lower semicontinuous hull). radius_cells = 0 is
/// the identity, so lsc_hull(lsc_hull(f, r), 0) == lsc_hull(f, r).
GridFunction lsc_hull(const GridFunction& f, std::size_t radius_cells);

/// Pointwise maximum over the same neighborhood; satisfies
/// usc_hull(f, r) == -lsc_hull(-f, r) exactly.
GridFunction usc_hull(const GridFunction& f, std::size_t radius_cells);

/// Restriction of f to a sub-grid whose points all coincide with points of
/// f's grid (offset and integer stride per axis). Values copied bit-exactly.
/// Throws std::invalid_argument naming the first misaligned axis.
GridFunction restrict_to(const GridFunction& f, const GridDomain& sub);

/// max over the grid of |f - g|. Domains must match exactly.
double sup_distance(const GridFunction& f, const GridFunction& g);

/// ( mean over grid of |f-g|^p  x  box volume )^(1/p), p >= 1.
/// The uniform-grid mean discretizes the Lebesgue integral over the box.
double lp_distance(const GridFunction& f, const GridFunction& g, double p);

/// (min, max) of f over all grid points lying in the closed box
/// [region_lower, region_upper]. Throws if no grid point is inside.
std::pair<double, double> extremum_over_region(
    const GridFunction& f, const std::vector<double>& region_lower,
    const std::vector<double>& region_upper);

/// Text serialization: one header line
///   # dim=<d> lower=<v,...> upper=<v,...> shape=<n,...>
/// followed by the row-major values, one per line, 17 significant digits.
void write_csv(const GridFunction& f, std::ostream& out);
void write_csv_file(const GridFunction& f, const std::string& path);
GridFunction read_csv(std::istream& in);
GridFunction read_csv_file(const std::string& path);

/// Format a double with 17 significant digits (round-trip exact), C locale.
std::string format_double(double v);

/// In-place cumulative sum of a row-major array along one axis (grid
/// plumbing shared by the counting-based process evaluators).
void cumsum_along_axis(std::vector<double>& values,
                       const std::vector<std::size_t>& shape, std::size_t axis);

/// Reversed companion of cumsum_along_axis: each entry becomes the sum of
/// itself and everything after it along the axis (for counts of the form
/// "at least one coordinate beyond a threshold").
void suffix_sum_along_axis(std::vector<double>& values,
                           const std::vector<std::size_t>& shape,
                           std::size_t axis);

}  // namespace epiproc::gridfn
