#pragma once

// Surface analytics: max-value standardization, sensitivity (SNI) and
// smoothness (SMI) per dimension and aggregated.
//
//   SNI = -log10( integral |dy/dx| dx )        (slope magnitude integral)
//   SMI = -log10( integral (d2y/dx2)^2 dx )    (curvature energy integral)
//
// Derivatives use central differences inside and second-order one-sided
// stencils at the boundaries; integrals are trapezoidal. Integrands are
// clamped at 1e-12 before the log. Per-dimension values on multi-dim grids
// are means over all axis-parallel 1-D lines; overall = sum_i metric_i / n!.

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "tsgrid/grid.hpp"

namespace tsgrid {

inline constexpr double kLogClamp = 1e-12;

class AnalyticsError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct StandardizedGrid {
  IndexGrid grid;
  double reference_value = 0.0;  // the max divided by
};

inline StandardizedGrid standardize(const IndexGrid& g) {
  if (g.has_gaps())
    throw AnalyticsError("cannot standardize a grid with gaps");
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : g.values) mx = std::max(mx, v);
  if (mx == 0.0 || !std::isfinite(mx))
    throw AnalyticsError("degenerate data: dataset max is zero or non-finite");
  StandardizedGrid out;
  out.grid = g;
  out.reference_value = mx;
  for (double& v : out.grid.values) v /= mx;
  return out;
}

namespace detail {

inline std::vector<double> first_derivative(const std::vector<double>& y,
                                            const std::vector<double>& x) {
  const std::size_t n = y.size();
  std::vector<double> d(n);
  for (std::size_t k = 1; k + 1 < n; ++k)
    d[k] = (y[k + 1] - y[k - 1]) / (x[k + 1] - x[k - 1]);
  // second-order one-sided stencils (uniform spacing assumed at the ends)
  double h0 = x[1] - x[0], hn = x[n - 1] - x[n - 2];
  d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h0);
  d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * hn);
  return d;
}

inline std::vector<double> second_derivative(const std::vector<double>& y,
                                             const std::vector<double>& x) {
  const std::size_t n = y.size();
  std::vector<double> d(n);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    double h = 0.5 * (x[k + 1] - x[k - 1]);
    d[k] = (y[k + 1] - 2.0 * y[k] + y[k - 1]) / (h * h);
  }
  double h0 = x[1] - x[0], hn = x[n - 1] - x[n - 2];
  d[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / (h0 * h0);
  d[n - 1] = (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / (hn * hn);
  return d;
}

inline double trapezoid(const std::vector<double>& f, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < f.size(); ++k)
    s += 0.5 * (f[k] + f[k + 1]) * (x[k + 1] - x[k]);
  return s;
}

inline void check_line(const std::vector<double>& y, const std::vector<double>& x,
                       std::size_t min_points) {
  if (y.size() != x.size()) throw AnalyticsError("x/y length mismatch");
  if (y.size() < min_points)
    throw AnalyticsError("need at least " + std::to_string(min_points) + " points");
  for (std::size_t k = 1; k < x.size(); ++k)
    if (x[k] <= x[k - 1]) throw AnalyticsError("x must be strictly increasing");
}

}  // namespace detail

struct MetricValue {
  double value = 0.0;
  bool clamped = false;  // the 1e-12 floor fired
};

inline MetricValue sni_1d_checked(const std::vector<double>& y,
                                  const std::vector<double>& x) {
  detail::check_line(y, x, 3);
  auto d = detail::first_derivative(y, x);
  for (double& v : d) v = std::abs(v);
  double integral = detail::trapezoid(d, x);
  MetricValue m;
  m.clamped = integral < kLogClamp;
  m.value = -std::log10(std::max(kLogClamp, integral));
  return m;
}

inline MetricValue smi_1d_checked(const std::vector<double>& y,
                                  const std::vector<double>& x) {
  detail::check_line(y, x, y.size() >= 4 ? std::size_t{4} : std::size_t{3});
  std::vector<double> d;
  if (y.size() >= 4) {
    d = detail::second_derivative(y, x);
  } else {
    // 3 points: a single central estimate, constant over the line
    double h = 0.5 * (x[2] - x[0]);
    double c = (y[2] - 2.0 * y[1] + y[0]) / (h * h);
    d.assign(3, c);
  }
  for (double& v : d) v = v * v;
  double integral = detail::trapezoid(d, x);
  MetricValue m;
  m.clamped = integral < kLogClamp;
  m.value = -std::log10(std::max(kLogClamp, integral));
  return m;
}

inline double sni_1d(const std::vector<double>& y, const std::vector<double>& x) {
  return sni_1d_checked(y, x).value;
}

inline double smi_1d(const std::vector<double>& y, const std::vector<double>& x) {
  return smi_1d_checked(y, x).value;
}

struct SurfaceMetrics {
  std::vector<double> sni;  // per dimension
  std::vector<double> smi;
  double sni_overall = 0.0;
  double smi_overall = 0.0;
  bool any_clamped = false;
};

namespace detail {

// Visit every axis-parallel 1-D line of the grid along dimension `dim`.
template <typename Fn>
inline void for_each_line(const IndexGrid& g, int dim, Fn&& fn) {
  const int nd = g.dims();
  std::vector<std::size_t> shape(nd);
  for (int d = 0; d < nd; ++d) shape[d] = g.axis_coords[d].size();
  std::vector<std::size_t> coord(nd, 0);
  std::vector<double> line(shape[dim]);
  while (true) {
    for (std::size_t k = 0; k < shape[dim]; ++k) {
      coord[dim] = k;
      line[k] = g.values[g.flat_index(coord)];
    }
    coord[dim] = 0;
    fn(line);
    // advance the outer coordinates, skipping `dim`
    int d = nd - 1;
    for (; d >= 0; --d) {
      if (d == dim) continue;
      if (++coord[d] < shape[d]) break;
      coord[d] = 0;
    }
    if (d < 0) break;
  }
}

}  // namespace detail

inline SurfaceMetrics surface_metrics(const StandardizedGrid& sg) {
  const IndexGrid& g = sg.grid;
  const int nd = g.dims();
  if (nd < 1 || nd > 3) throw AnalyticsError("surface_metrics supports 1 to 3 dimensions");
  if (g.has_gaps())
    throw AnalyticsError("grid has gaps; interpolate or complete the store first");
  SurfaceMetrics out;
  out.sni.resize(nd);
  out.smi.resize(nd);
  double nfact = 1.0;
  for (int d = 1; d <= nd; ++d) nfact *= d;
  for (int d = 0; d < nd; ++d) {
    double sni_sum = 0.0, smi_sum = 0.0;
    std::size_t lines = 0;
    detail::for_each_line(g, d, [&](const std::vector<double>& line) {
      auto s = sni_1d_checked(line, g.axis_coords[d]);
      auto m = smi_1d_checked(line, g.axis_coords[d]);
      sni_sum += s.value;
      smi_sum += m.value;
      out.any_clamped = out.any_clamped || s.clamped || m.clamped;
      ++lines;
    });
    out.sni[d] = sni_sum / static_cast<double>(lines);
    out.smi[d] = smi_sum / static_cast<double>(lines);
    out.sni_overall += out.sni[d] / nfact;
    out.smi_overall += out.smi[d] / nfact;
  }
  return out;
}

// Linear gap fill along the first axis; refused by surface_metrics unless
// applied first. Only intended for isolated failed scenarios.
inline IndexGrid interpolate_gaps(const IndexGrid& g) {
  IndexGrid out = g;
  const int nd = g.dims();
  // operate on flat lines along the last (fastest-varying) axis
  if (nd == 0) throw AnalyticsError("grid has no axes");
  std::size_t line_len = g.axis_coords[nd - 1].size();
  if (line_len == 0) throw AnalyticsError("grid axis is empty");
  for (std::size_t start = 0; start < out.values.size(); start += line_len) {
    for (std::size_t k = 0; k < line_len; ++k) {
      if (!std::isnan(out.values[start + k])) continue;
      std::size_t lo = k, hi = k;
      while (lo > 0 && std::isnan(out.values[start + lo])) --lo;
      while (hi + 1 < line_len && std::isnan(out.values[start + hi])) ++hi;
      double a = out.values[start + lo], b = out.values[start + hi];
      if (std::isnan(a)) a = b;
      if (std::isnan(b)) b = a;
      if (std::isnan(a))
        throw AnalyticsError("cannot interpolate: entire grid line missing");
      double t = hi == lo ? 0.0 : double(k - lo) / double(hi - lo);
      out.values[start + k] = a + t * (b - a);
    }
  }
  return out;
}

}  // namespace tsgrid
