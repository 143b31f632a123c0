#pragma once

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "polariton/error.hpp"
#include "polariton/fitting.hpp"
#include "polariton/spectrum.hpp"

namespace polariton {

/// Error function, exactly odd in its argument.
inline double erf(double x) { return x < 0.0 ? -std::erf(-x) : std::erf(x); }

/// A * exp(-t^2) * (1 + erf(beta * t / sqrt(2))), t = (E - E0) / width.
struct SkewedGaussianPeak {
  double amplitude = 1.0;
  double centre_ev = 2.11;
  double width_ev = 0.03;
  double skew = 0.0;

  void validate() const {
    if (!(amplitude >= 0.0) || !(width_ev > 0.0) || !std::isfinite(centre_ev) || !std::isfinite(skew))
      throw Error(ErrorCode::schema, "skewed Gaussian requires amplitude >= 0 and width > 0");
  }
};

inline double eval_peak(const SkewedGaussianPeak& p, double energy_ev) {
  const double t = (energy_ev - p.centre_ev) / p.width_ev;
  return p.amplitude * std::exp(-t * t) * (1.0 + erf(p.skew * t / std::sqrt(2.0)));
}

/// Integral of the peak over centre +- 12 widths by adaptive Gauss-Kronrod.
/// The odd erf term cancels, so the exact value is A * width * sqrt(pi).
inline double peak_area(const SkewedGaussianPeak& p) {
  p.validate();
  if (p.amplitude == 0.0) return 0.0;
  auto f = [&p](double e) { return eval_peak(p, e); };
  const double a = p.centre_ev - 12.0 * p.width_ev;
  const double b = p.centre_ev + 12.0 * p.width_ev;
  // absolute target 1e-10 * A * width, expressed relative to the L1 norm A * width * sqrt(pi)
  const double rel_tol = 1e-10 / std::sqrt(std::numbers::pi) * 0.5;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol);
}

/// Unskewed peak with the given FWHM and apex height.
inline SkewedGaussianPeak film_peak(double centre_ev, double fwhm_ev, double height) {
  return {height, centre_ev, fwhm_ev / (2.0 * std::sqrt(std::log(2.0))), 0.0};
}

struct TwoPeakFit {
  SkewedGaussianPeak upper;
  SkewedGaussianPeak lower;
  double baseline = 0.0;
  FitResult fit;

  double eval(double energy_ev) const { return eval_peak(upper, energy_ev) + eval_peak(lower, energy_ev) + baseline; }
};

namespace detail {

inline Vector pack(const TwoPeakFit& f) {
  Vector v(9);
  v << f.upper.amplitude, f.upper.centre_ev, f.upper.width_ev, f.upper.skew, f.lower.amplitude, f.lower.centre_ev,
      f.lower.width_ev, f.lower.skew, f.baseline;
  return v;
}

inline TwoPeakFit unpack(const Vector& v) {
  TwoPeakFit f;
  f.upper = {v[0], v[1], v[2], v[3]};
  f.lower = {v[4], v[5], v[6], v[7]};
  f.baseline = v[8];
  return f;
}

/// Half-height extent of the peak at index k above `floor`, as (left, right) indices.
inline std::pair<std::size_t, std::size_t> half_height_extent(const std::vector<double>& y, std::size_t k,
                                                              double floor) {
  const double half = floor + 0.5 * (y[k] - floor);
  std::size_t left = k, right = k;
  while (left > 0 && y[left - 1] > half) --left;
  while (right + 1 < y.size() && y[right + 1] > half) ++right;
  return {left, right};
}

}  // namespace detail

/// Seed from the two dominant maxima of a 5-point running mean.
///
/// The first is the global maximum. The second is, among the local maxima
/// outside the first's half-height extent, the one standing highest above
/// the valley that separates it from the first; this keeps noise ripples on
/// the first peak's shoulder from being taken for a weak second branch.
/// Widths start at FWHM / 1.665, skews at zero and the baseline at the
/// smoothed minimum. Equal heights resolve to the lower-energy sample first,
/// which the energy ordering then labels as the lower branch.
inline TwoPeakFit initial_two_peak_guess(const Spectrum& spec) {
  if (spec.size() < 9) throw Error(ErrorCode::insufficient_data, "two-peak fit needs at least 9 points");
  const auto& x = spec.energies;
  const auto smooth = moving_average(spec.values, 5);
  const double floor = *std::min_element(smooth.begin(), smooth.end());
  auto maxima = local_maxima(x, smooth);
  if (maxima.empty()) throw Error(ErrorCode::degenerate_fit, "spectrum has no interior maximum");
  std::stable_sort(maxima.begin(), maxima.end(), [](const Extremum& a, const Extremum& b) { return a.value > b.value; });
  const Extremum first = maxima.front();
  const auto [l1, r1] = detail::half_height_extent(smooth, first.index, floor);
  std::optional<Extremum> second;
  double best_prominence = 0.0;
  for (const auto& m : maxima) {
    if (m.index >= l1 && m.index <= r1) continue;
    const auto lo = std::min(m.index, first.index), hi = std::max(m.index, first.index);
    const double valley = *std::min_element(smooth.begin() + static_cast<std::ptrdiff_t>(lo),
                                            smooth.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    const double prominence = m.value - valley;
    if (prominence > best_prominence) {
      best_prominence = prominence;
      second = m;
    }
  }
  if (!second) throw Error(ErrorCode::degenerate_fit, "only one resolvable peak in the spectrum");
  const auto [l2, r2] = detail::half_height_extent(smooth, second->index, floor);

  auto width_of = [&](std::size_t l, std::size_t r) {
    const double fwhm = std::max(x[r] - x[l], 2.0 * (x[1] - x[0]));
    return fwhm / 1.665;
  };
  SkewedGaussianPeak a{first.value - floor, first.energy, width_of(l1, r1), 0.0};
  SkewedGaussianPeak b{second->value - floor, second->energy, width_of(l2, r2), 0.0};
  // the first peak's half-height extent can swallow the second's shoulder
  b.width_ev = std::min(b.width_ev, std::abs(a.centre_ev - b.centre_ev));
  TwoPeakFit out;
  if (a.centre_ev > b.centre_ev) {
    out.upper = a;
    out.lower = b;
  } else {
    out.upper = b;
    out.lower = a;
  }
  out.baseline = floor;
  return out;
}

/// Least-squares fit of two skewed Gaussians plus a constant baseline.
///
/// To first order in beta the erf factor only translates a peak, so E0 and
/// beta are nearly degenerate for mildly skewed data. The symmetric model is
/// fitted first and the skews are released only when an F-test at the 1%
/// level says the two extra parameters are warranted.
inline TwoPeakFit fit_two_peaks(const Spectrum& spec, const TwoPeakFit& init, int max_iterations = 500) {
  if (spec.size() < 9) throw Error(ErrorCode::insufficient_data, "two-peak fit needs at least 9 points");
  const auto& x = spec.energies;
  const double e_min = x.front(), e_max = x.back();
  for (double c : {init.upper.centre_ev, init.lower.centre_ev})
    if (c < e_min || c > e_max) throw Error(ErrorCode::bad_start, "initial centre outside the spectrum");

  const double span = e_max - e_min;
  const double step = span / static_cast<double>(x.size() - 1);
  constexpr double inf = std::numeric_limits<double>::infinity();
  FitProblem problem;
  problem.max_iterations = max_iterations;
  problem.lower.resize(9);
  problem.upper.resize(9);
  problem.lower << 0.0, e_min, step * 0.25, -20.0, 0.0, e_min, step * 0.25, -20.0, -inf;
  problem.upper << inf, e_max, span, 20.0, inf, e_max, span, 20.0, inf;
  const std::vector<double>& y = spec.values;
  problem.residual = [&x, &y](const Vector& p) {
    const TwoPeakFit model = detail::unpack(p);
    Vector r(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) r[static_cast<Eigen::Index>(i)] = model.eval(x[i]) - y[i];
    return r;
  };
  auto clamped = [&](Vector v) {
    for (Eigen::Index j = 0; j < 9; ++j) v[j] = std::clamp(v[j], problem.lower[j], problem.upper[j]);
    return v;
  };
  auto check = [](const FitResult& r) {
    if (r.status == Convergence::max_iterations)
      throw Error(ErrorCode::fit_failed, "two-peak fit did not converge in " + std::to_string(r.iterations) +
                                             " iterations (cost " + std::to_string(r.cost) + ")");
  };

  FitProblem symmetric = problem;
  symmetric.lower[3] = symmetric.upper[3] = symmetric.lower[7] = symmetric.upper[7] = 0.0;
  symmetric.initial = detail::pack(init);
  for (Eigen::Index j = 0; j < 9; ++j)
    symmetric.initial[j] = std::clamp(symmetric.initial[j], symmetric.lower[j], symmetric.upper[j]);
  FitResult result = least_squares(symmetric);
  check(result);

  // beta = 0 is stationary at the symmetric optimum, so nudge off it
  std::vector<Vector> starts;
  for (double b : {0.3, -0.3}) {
    Vector v = result.params;
    v[3] = v[7] = b;
    starts.push_back(v);
  }
  if (init.upper.skew != 0.0 || init.lower.skew != 0.0) starts.push_back(clamped(detail::pack(init)));
  std::optional<FitResult> skewed;
  for (const auto& start : starts) {
    problem.initial = start;
    FitResult trial = least_squares(problem);
    if (trial.status == Convergence::max_iterations) continue;
    if (!skewed || trial.cost < skewed->cost) skewed = std::move(trial);
  }
  const auto dof = static_cast<double>(x.size()) - 9.0;
  bool keep_skew = false;
  if (skewed && skewed->cost < result.cost) {
    if (skewed->cost == 0.0 || !(dof > 0.0)) {
      keep_skew = true;
    } else {
      const double f = (result.cost - skewed->cost) / 2.0 / (skewed->cost / dof);
      keep_skew = f > boost::math::quantile(boost::math::fisher_f_distribution<double>(2.0, dof), 0.99);
    }
  }
  if (keep_skew) result = std::move(*skewed);
  TwoPeakFit out = detail::unpack(result.params);
  if (out.upper.centre_ev < out.lower.centre_ev) {
    std::swap(out.upper, out.lower);
    for (Vector* v : {&result.params, &result.uncertainty}) {
      const Vector copy = *v;
      v->segment(0, 4) = copy.segment(4, 4);
      v->segment(4, 4) = copy.segment(0, 4);
    }
  }
  const double min_width = std::min(out.upper.width_ev, out.lower.width_ev);
  if (out.upper.centre_ev - out.lower.centre_ev < 0.1 * min_width)
    throw Error(ErrorCode::degenerate_fit, "fitted peak centres collapsed onto each other");
  out.fit = std::move(result);
  return out;
}

/// Seeds itself with initial_two_peak_guess.
inline TwoPeakFit fit_two_peaks(const Spectrum& spec, int max_iterations = 500) {
  return fit_two_peaks(spec, initial_two_peak_guess(spec), max_iterations);
}

struct RelativeStrengths {
  double upper = 0.5;
  double lower = 0.5;
};

/// Integrated areas normalised to their sum.
inline RelativeStrengths relative_strengths(const SkewedGaussianPeak& upper, const SkewedGaussianPeak& lower) {
  const double su = peak_area(upper);
  const double sl = peak_area(lower);
  const double total = su + sl;
  if (!(total > 0.0)) throw Error(ErrorCode::undefined_ratio, "both peak areas are zero");
  RelativeStrengths out;
  out.upper = su / total;
  out.lower = 1.0 - out.upper;
  return out;
}

inline RelativeStrengths relative_strengths(const TwoPeakFit& fit) { return relative_strengths(fit.upper, fit.lower); }

}  // namespace polariton
