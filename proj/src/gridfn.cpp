#include "epiproc/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace epiproc::gridfn {

namespace {

std::string axis_msg(const char* what, std::size_t axis) {
  return std::string(what) + " at axis " + std::to_string(axis);
}

/// Visit every 1D line of a row-major array along `axis`.
/// Calls fn(base_offset, stride) once per line; line length = shape[axis].
template <typename Fn>
void for_each_line(const std::vector<std::size_t>& shape, std::size_t axis,
                   Fn&& fn) {
  std::size_t inner = 1;
  for (std::size_t j = axis + 1; j < shape.size(); ++j) inner *= shape[j];
  std::size_t outer = 1;
  for (std::size_t j = 0; j < axis; ++j) outer *= shape[j];
  const std::size_t axis_len = shape[axis];
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t block = o * axis_len * inner;
    for (std::size_t i = 0; i < inner; ++i) fn(block + i, inner);
  }
}

/// Sliding-window extremum along one line, window [i-r, i+r] clamped to the
/// line. Monotone-deque algorithm, O(len) regardless of r.
/// cmp(a, b) true means a should evict b from the back (e.g. <= for minimum).
template <typename Cmp>
void window_extremum_line(const double* in, double* out, std::size_t len,
                          std::ptrdiff_t stride_in, std::ptrdiff_t stride_out,
                          std::size_t r, Cmp cmp) {
  std::deque<std::size_t> dq;
  std::size_t pushed = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t hi = std::min(len - 1, i + r);
    for (; pushed <= hi; ++pushed) {
      const double v = in[pushed * stride_in];
      while (!dq.empty() && cmp(v, in[dq.back() * stride_in])) dq.pop_back();
      dq.push_back(pushed);
    }
    const std::size_t lo = i >= r ? i - r : 0;
    while (dq.front() < lo) dq.pop_front();
    out[i * stride_out] = in[dq.front() * stride_in];
  }
}

enum class HullKind { minimum, maximum };

GridFunction hull_impl(const GridFunction& f, std::size_t radius_cells,
                       HullKind kind) {
  if (radius_cells == 0) return f;
  const auto& shape = f.domain().shape();
  std::vector<double> cur = f.values();
  std::vector<double> next(cur.size());
  for (std::size_t axis = 0; axis < shape.size(); ++axis) {
    for_each_line(shape, axis, [&](std::size_t base, std::size_t stride) {
      if (kind == HullKind::minimum) {
        window_extremum_line(
            cur.data() + base, next.data() + base, shape[axis],
            static_cast<std::ptrdiff_t>(stride),
            static_cast<std::ptrdiff_t>(stride), radius_cells,
            [](double a, double b) { return a <= b; });
      } else {
        window_extremum_line(
            cur.data() + base, next.data() + base, shape[axis],
            static_cast<std::ptrdiff_t>(stride),
            static_cast<std::ptrdiff_t>(stride), radius_cells,
            [](double a, double b) { return a >= b; });
      }
    });
    cur.swap(next);
  }
  return GridFunction(f.domain(), std::move(cur));
}

void require_same_domain(const GridFunction& f, const GridFunction& g,
                         const char* op) {
  if (f.domain() != g.domain()) {
    throw std::invalid_argument(std::string(op) +
                                ": grid domains do not match");
  }
}

}  // namespace

GridDomain::GridDomain(std::vector<double> lower, std::vector<double> upper,
                       std::vector<std::size_t> points_per_axis)
    : lower_(std::move(lower)),
      upper_(std::move(upper)),
      shape_(std::move(points_per_axis)) {
  if (lower_.empty()) throw std::invalid_argument("GridDomain: dim must be >= 1");
  if (upper_.size() != lower_.size() || shape_.size() != lower_.size()) {
    throw std::invalid_argument("GridDomain: lower/upper/shape sizes differ");
  }
  total_ = 1;
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    if (!(lower_[j] < upper_[j])) {
      throw std::invalid_argument(axis_msg("GridDomain: lower must be < upper", j));
    }
    if (shape_[j] < 2) {
      throw std::invalid_argument(axis_msg("GridDomain: need >= 2 points", j));
    }
    const double h = (upper_[j] - lower_[j]) / static_cast<double>(shape_[j] - 1);
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw std::invalid_argument(axis_msg("GridDomain: bad spacing", j));
    }
    total_ *= shape_[j];
  }
}

double GridDomain::spacing(std::size_t axis) const {
  return (upper_[axis] - lower_[axis]) / static_cast<double>(shape_[axis] - 1);
}

double GridDomain::max_spacing() const {
  double h = 0.0;
  for (std::size_t j = 0; j < dim(); ++j) h = std::max(h, spacing(j));
  return h;
}

double GridDomain::coordinate(std::size_t axis, std::size_t index) const {
  // Hit the upper endpoint exactly regardless of rounding.
  if (index + 1 == shape_[axis]) return upper_[axis];
  return lower_[axis] + static_cast<double>(index) * spacing(axis);
}

double GridDomain::box_volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < dim(); ++j) v *= upper_[j] - lower_[j];
  return v;
}

std::size_t GridDomain::flatten(const std::vector<std::size_t>& multi) const {
  std::size_t flat = 0;
  for (std::size_t j = 0; j < dim(); ++j) flat = flat * shape_[j] + multi[j];
  return flat;
}

std::vector<std::size_t> GridDomain::unflatten(std::size_t flat) const {
  std::vector<std::size_t> multi(dim());
  for (std::size_t j = dim(); j-- > 0;) {
    multi[j] = flat % shape_[j];
    flat /= shape_[j];
  }
  return multi;
}

bool GridDomain::operator==(const GridDomain& other) const {
  return lower_ == other.lower_ && upper_ == other.upper_ &&
         shape_ == other.shape_;
}

GridDomain unit_cube_domain(std::size_t dim, std::size_t points_per_axis) {
  return GridDomain(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0),
                    std::vector<std::size_t>(dim, points_per_axis));
}

GridFunction::GridFunction(GridDomain domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (values_.size() != domain_.total_points()) {
    throw std::invalid_argument(
        "GridFunction: expected " + std::to_string(domain_.total_points()) +
        " values, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("GridFunction: non-finite value at flat index " +
                                  std::to_string(i));
    }
  }
}

double GridFunction::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double GridFunction::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

MaskedGridFunction::MaskedGridFunction(GridFunction base_fn,
                                       std::vector<char> defined_mask)
    : base(std::move(base_fn)), defined(std::move(defined_mask)) {
  if (defined.size() != base.domain().total_points()) {
    throw std::invalid_argument("MaskedGridFunction: mask size mismatch");
  }
  if (std::find(defined.begin(), defined.end(), char(1)) == defined.end()) {
    throw std::invalid_argument("MaskedGridFunction: mask is entirely undefined");
  }
}

GridFunction lsc_hull(const GridFunction& f, std::size_t radius_cells) {
  return hull_impl(f, radius_cells, HullKind::minimum);
}

GridFunction usc_hull(const GridFunction& f, std::size_t radius_cells) {
  return hull_impl(f, radius_cells, HullKind::maximum);
}

GridFunction restrict_to(const GridFunction& f, const GridDomain& sub) {
  const GridDomain& dom = f.domain();
  if (sub.dim() != dom.dim()) {
    throw std::invalid_argument("restrict_to: dimension mismatch");
  }
  // Per axis, the sub-grid must sit on parent points: offset + stride both
  // integral in parent-cell units.
  std::vector<std::size_t> offset(dom.dim()), stride(dom.dim());
  for (std::size_t j = 0; j < dom.dim(); ++j) {
    const double h = dom.spacing(j);
    const double off_real = (sub.lower()[j] - dom.lower()[j]) / h;
    const double step_real = sub.spacing(j) / h;
    const double off_round = std::round(off_real);
    const double step_round = std::round(step_real);
    const double tol = 1e-9 * std::max(1.0, std::abs(off_real));
    if (off_round < 0.0 || std::abs(off_real - off_round) > tol ||
        step_round < 1.0 || std::abs(step_real - step_round) > 1e-9) {
      throw std::invalid_argument(axis_msg("restrict_to: sub-grid misaligned", j));
    }
    offset[j] = static_cast<std::size_t>(off_round);
    stride[j] = static_cast<std::size_t>(step_round);
    const std::size_t last = offset[j] + stride[j] * (sub.shape()[j] - 1);
    if (last >= dom.shape()[j]) {
      throw std::invalid_argument(axis_msg("restrict_to: sub-box exceeds domain", j));
    }
  }
  std::vector<double> out(sub.total_points());
  std::vector<std::size_t> sub_multi(sub.dim(), 0);
  std::vector<std::size_t> parent_multi(sub.dim());
  for (std::size_t flat = 0; flat < sub.total_points(); ++flat) {
    for (std::size_t j = 0; j < sub.dim(); ++j) {
      parent_multi[j] = offset[j] + stride[j] * sub_multi[j];
    }
    out[flat] = f[dom.flatten(parent_multi)];
    for (std::size_t j = sub.dim(); j-- > 0;) {
      if (++sub_multi[j] < sub.shape()[j]) break;
      sub_multi[j] = 0;
    }
  }
  return GridFunction(sub, std::move(out));
}

double sup_distance(const GridFunction& f, const GridFunction& g) {
  require_same_domain(f, g, "sup_distance");
  double best = 0.0;
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    best = std::max(best, std::abs(f[i] - g[i]));
  }
  return best;
}

double lp_distance(const GridFunction& f, const GridFunction& g, double p) {
  require_same_domain(f, g, "lp_distance");
  if (!(p >= 1.0)) throw std::invalid_argument("lp_distance: p must be >= 1");
  double acc = 0.0;
  if (p == 2.0) {
    // Squares via plain multiplication and a correctly rounded sqrt, so
    // square-integral statistics built on the same accumulation order agree
    // with this distance bit for bit.
    for (std::size_t i = 0; i < f.values().size(); ++i) {
      const double d = f[i] - g[i];
      acc += d * d;
    }
    const double mean = acc / static_cast<double>(f.values().size());
    return std::sqrt(mean * f.domain().box_volume());
  }
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    acc += std::pow(std::abs(f[i] - g[i]), p);
  }
  const double mean = acc / static_cast<double>(f.values().size());
  return std::pow(mean * f.domain().box_volume(), 1.0 / p);
}

std::pair<double, double> extremum_over_region(
    const GridFunction& f, const std::vector<double>& region_lower,
    const std::vector<double>& region_upper) {
  const GridDomain& dom = f.domain();
  if (region_lower.size() != dom.dim() || region_upper.size() != dom.dim()) {
    throw std::invalid_argument("extremum_over_region: box dimension mismatch");
  }
  std::vector<std::size_t> i_lo(dom.dim()), i_hi(dom.dim());
  for (std::size_t j = 0; j < dom.dim(); ++j) {
    const double h = dom.spacing(j);
    // Closed-box containment with a half-ulp-style guard so that region
    // endpoints that are exactly grid points are included.
    const double lo_real = (region_lower[j] - dom.lower()[j]) / h;
    const double hi_real = (region_upper[j] - dom.lower()[j]) / h;
    double lo = std::ceil(lo_real - 1e-9);
    double hi = std::floor(hi_real + 1e-9);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, static_cast<double>(dom.shape()[j] - 1));
    if (lo > hi) {
      throw std::invalid_argument(
          axis_msg("extremum_over_region: no grid point inside box", j));
    }
    i_lo[j] = static_cast<std::size_t>(lo);
    i_hi[j] = static_cast<std::size_t>(hi);
  }
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  std::vector<std::size_t> multi = i_lo;
  while (true) {
    const double v = f[dom.flatten(multi)];
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    bool carried_out = true;
    for (std::size_t j = dom.dim(); j-- > 0;) {
      if (++multi[j] <= i_hi[j]) {
        carried_out = false;
        break;
      }
      multi[j] = i_lo[j];
    }
    if (carried_out) break;
  }
  return {mn, mx};
}

void cumsum_along_axis(std::vector<double>& values,
                       const std::vector<std::size_t>& shape,
                       std::size_t axis) {
  for_each_line(shape, axis, [&](std::size_t base, std::size_t stride) {
    for (std::size_t i = 1; i < shape[axis]; ++i) {
      values[base + i * stride] += values[base + (i - 1) * stride];
    }
  });
}

void suffix_sum_along_axis(std::vector<double>& values,
                           const std::vector<std::size_t>& shape,
                           std::size_t axis) {
  for_each_line(shape, axis, [&](std::size_t base, std::size_t stride) {
    for (std::size_t i = shape[axis] - 1; i-- > 0;) {
      values[base + i * stride] += values[base + (i + 1) * stride];
    }
  });
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j) out += ',';
    out += format_double(v[j]);
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j) out += ',';
    out += std::to_string(v[j]);
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string header_field(const std::string& header, const std::string& key) {
  const std::string tag = key + "=";
  const std::size_t pos = header.find(tag);
  if (pos == std::string::npos) {
    throw std::runtime_error("grid csv: header missing field " + key);
  }
  const std::size_t start = pos + tag.size();
  std::size_t end = header.find(' ', start);
  if (end == std::string::npos) end = header.size();
  return header.substr(start, end - start);
}

}  // namespace

void write_csv(const GridFunction& f, std::ostream& out) {
  const GridDomain& dom = f.domain();
  out << "# dim=" << dom.dim() << " lower=" << join_doubles(dom.lower())
      << " upper=" << join_doubles(dom.upper())
      << " shape=" << join_sizes(dom.shape()) << "\n";
  for (double v : f.values()) out << format_double(v) << "\n";
}

void write_csv_file(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(f, out);
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

GridFunction read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.empty() || header[0] != '#') {
    throw std::runtime_error("grid csv: missing '#' header line");
  }
  const std::size_t dim = std::stoul(header_field(header, "dim"));
  const auto lower_s = split_commas(header_field(header, "lower"));
  const auto upper_s = split_commas(header_field(header, "upper"));
  const auto shape_s = split_commas(header_field(header, "shape"));
  if (lower_s.size() != dim || upper_s.size() != dim || shape_s.size() != dim) {
    throw std::runtime_error("grid csv: header field lengths disagree with dim");
  }
  std::vector<double> lower(dim), upper(dim);
  std::vector<std::size_t> shape(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    lower[j] = std::stod(lower_s[j]);
    upper[j] = std::stod(upper_s[j]);
    shape[j] = std::stoul(shape_s[j]);
  }
  GridDomain dom(std::move(lower), std::move(upper), std::move(shape));
  std::vector<double> values;
  values.reserve(dom.total_points());
  std::string line;
  while (values.size() < dom.total_points() && std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  if (values.size() != dom.total_points()) {
    throw std::runtime_error("grid csv: expected " +
                             std::to_string(dom.total_points()) + " values, got " +
                             std::to_string(values.size()));
  }
  return GridFunction(std::move(dom), std::move(values));
}

GridFunction read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_csv(in);
}

}  // namespace epiproc::gridfn
