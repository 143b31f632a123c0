#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "polariton/error.hpp"

namespace polariton {

enum class Channel { R, T, A, S, raw };

inline const char* to_string(Channel c) {
  switch (c) {
    case Channel::R: return "R";
    case Channel::T: return "T";
    case Channel::A: return "A";
    case Channel::S: return "S";
    case Channel::raw: return "raw";
  }
  return "raw";
}

/// Real-valued signal on a strictly increasing energy grid (eV).
struct Spectrum {
  std::vector<double> energies;
  std::vector<double> values;
  Channel channel = Channel::raw;

  std::size_t size() const { return energies.size(); }
  bool empty() const { return energies.empty(); }

  /// Throws if the grid is not strictly increasing, values are non-finite,
  /// or a power-fraction channel leaves [0, 1] by more than 1e-9.
  void validate() const {
    if (energies.size() != values.size())
      throw Error(ErrorCode::alignment, "energy and value columns differ in length");
    for (std::size_t i = 1; i < energies.size(); ++i)
      if (!(energies[i] > energies[i - 1]))
        throw Error(ErrorCode::order, "energy grid is not strictly increasing at index " + std::to_string(i));
    for (double v : values)
      if (!std::isfinite(v)) throw Error(ErrorCode::parse, "non-finite spectrum value");
    if (channel != Channel::raw) {
      constexpr double slack = 1e-9;
      for (double v : values)
        if (v < -slack || v > 1.0 + slack)
          throw Error(ErrorCode::unphysical_balance,
                      std::string("channel ") + to_string(channel) + " value outside [0, 1]");
    }
  }
};

/// Uniform grid [min, max] with the given step; the endpoint is included when
/// it lands on the grid within a tenth of a step.
inline std::vector<double> make_grid(double min_ev, double max_ev, double step_ev) {
  if (!(step_ev > 0.0) || !(max_ev >= min_ev)) throw Error(ErrorCode::schema, "invalid energy grid");
  const auto n = static_cast<std::size_t>(std::floor((max_ev - min_ev) / step_ev + 0.1)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = min_ev + static_cast<double>(i) * step_ev;
  return grid;
}

/// Vertex of the parabola through three neighbouring samples; returns the
/// centre abscissa when the samples are collinear.
inline double parabolic_vertex(double x0, double x1, double x2, double y0, double y1, double y2) {
  const double d1 = x1 - x0, d2 = x2 - x1;
  const double s1 = (y1 - y0) / d1, s2 = (y2 - y1) / d2;
  const double curvature = (s2 - s1) / (x2 - x0);
  if (curvature == 0.0 || !std::isfinite(curvature)) return x1;
  // y = y1 + b (x - x1) + c (x - x1)^2 with c = curvature
  const double b = s1 + curvature * d1;
  const double vertex = x1 - b / (2.0 * curvature);
  return std::clamp(vertex, x0, x2);
}

struct Extremum {
  std::size_t index = 0;
  double energy = 0.0;  ///< sub-grid refined position
  double value = 0.0;   ///< sample value at index
};

/// Interior strict-or-plateau local maxima of `y`, refined parabolically.
inline std::vector<Extremum> local_maxima(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<Extremum> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) {
      out.push_back({i, parabolic_vertex(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1]), y[i]});
    }
  }
  return out;
}

inline std::vector<Extremum> local_minima(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> neg(y.size());
  std::transform(y.begin(), y.end(), neg.begin(), [](double v) { return -v; });
  auto out = local_maxima(x, neg);
  for (auto& e : out) e.value = -e.value;
  return out;
}

/// Position of the global minimum of `y`, parabolically refined when interior.
inline double refined_argmin(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty()) throw Error(ErrorCode::insufficient_data, "empty spectrum");
  const auto it = std::min_element(y.begin(), y.end());
  const auto i = static_cast<std::size_t>(it - y.begin());
  if (i == 0 || i + 1 == y.size()) return x[i];
  return parabolic_vertex(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1]);
}

/// Centered moving average with a window of `width` points (odd), shrinking
/// at the edges.
inline std::vector<double> moving_average(const std::vector<double>& y, std::size_t width) {
  const std::size_t half = width / 2;
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(y.size() - 1, i + half);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += y[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace polariton
