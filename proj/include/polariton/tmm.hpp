#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "polariton/dielectric.hpp"
#include "polariton/error.hpp"
#include "polariton/spectrum.hpp"

namespace polariton {

/// hbar * c in eV nm.
inline constexpr double hbar_c_ev_nm = 197.3269804;

struct Matrix2 {
  std::array<complex, 4> m{complex(1.0), complex(0.0), complex(0.0), complex(1.0)};

  complex& operator()(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }
  const complex& operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }

  complex determinant() const { return m[0] * m[3] - m[1] * m[2]; }

  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    Matrix2 out;
    out(0, 0) = a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0);
    out(0, 1) = a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1);
    out(1, 0) = a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0);
    out(1, 1) = a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1);
    return out;
  }
};

/// Characteristic matrix of a homogeneous film at normal incidence, relating
/// (E, H) tangential fields across the film. Phase is k0 * n * d with
/// k0 = E / (hbar c).
inline Matrix2 layer_matrix(complex n, double thickness_nm, double energy_ev) {
  if (!std::isfinite(n.real()) || !std::isfinite(n.imag()) || !std::isfinite(thickness_nm) ||
      !std::isfinite(energy_ev))
    throw Error(ErrorCode::invalid_stack, "non-finite layer matrix input");
  if (thickness_nm < 0.0 || !(energy_ev > 0.0))
    throw Error(ErrorCode::invalid_stack, "layer matrix requires d >= 0 and E > 0");
  Matrix2 out;
  if (thickness_nm == 0.0) return out;
  const complex phase = (energy_ev / hbar_c_ev_nm) * n * thickness_nm;
  const complex c = std::cos(phase);
  const complex s = std::sin(phase);
  const complex i(0.0, 1.0);
  out(0, 0) = c;
  out(0, 1) = -i * s / n;
  out(1, 0) = -i * n * s;
  out(1, 1) = c;
  return out;
}

struct ReflectTransmit {
  double reflectance = 0.0;
  double transmittance = 0.0;
  double absorbance() const { return 1.0 - reflectance - transmittance; }
};

namespace detail {

inline ReflectTransmit solve_stack(const Stack& stack, double energy_ev) {
  const complex n0 = refractive_index(stack.layers.front().model, energy_ev);
  const complex ns = refractive_index(stack.layers.back().model, energy_ev);
  Matrix2 total;
  for (std::size_t i = 1; i + 1 < stack.layers.size(); ++i) {
    const auto& layer = stack.layers[i];
    total = total * layer_matrix(refractive_index(layer.model, energy_ev), layer.thickness_nm, energy_ev);
  }
  const complex b = total(0, 0) + total(0, 1) * ns;
  const complex c = total(1, 0) + total(1, 1) * ns;
  const complex denom = n0 * b + c;
  const complex r = (n0 * b - c) / denom;
  const complex t = 2.0 * n0 / denom;
  ReflectTransmit out;
  out.reflectance = std::norm(r);
  out.transmittance = ns.real() / n0.real() * std::norm(t);
  return out;
}

}  // namespace detail

/// Normal-incidence power reflectance and transmittance of `stack` at one energy.
inline ReflectTransmit reflectance_transmittance(const Stack& stack, double energy_ev) {
  stack.validate();
  return detail::solve_stack(stack, energy_ev);
}

struct SpectrumTriple {
  Spectrum reflectance;
  Spectrum transmittance;
  Spectrum absorbance;
};

/// Pointwise R, T and A = 1 - R - T over `grid`.
inline SpectrumTriple spectrum_sweep(const Stack& stack, const std::vector<double>& grid) {
  stack.validate();
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::order, "sweep grid is not strictly increasing");
  SpectrumTriple out{{grid, {}, Channel::R}, {grid, {}, Channel::T}, {grid, {}, Channel::A}};
  out.reflectance.values.reserve(grid.size());
  out.transmittance.values.reserve(grid.size());
  out.absorbance.values.reserve(grid.size());
  for (double e : grid) {
    const auto rt = detail::solve_stack(stack, e);
    out.reflectance.values.push_back(rt.reflectance);
    out.transmittance.values.push_back(rt.transmittance);
    out.absorbance.values.push_back(rt.absorbance());
  }
  return out;
}

/// Energy of the deepest reflectance minimum of `stack` inside
/// [lo_ev, hi_ev], sampled at `step_ev` and refined parabolically.
inline double reflectance_dip(const Stack& stack, double lo_ev, double hi_ev, double step_ev = 0.001) {
  const auto grid = make_grid(lo_ev, hi_ev, step_ev);
  const auto spectra = spectrum_sweep(stack, grid);
  return refined_argmin(grid, spectra.reflectance.values);
}

/// Parametric metal / dye-film / metal microcavity on a substrate.
///
/// Light enters from the ambient through the top mirror. The film is a
/// Lorentz medium whose oscillator strength is strength_per_mm * concentration.
struct Cavity {
  double ambient_index = 1.0;
  double substrate_index = 1.5;
  double top_mirror_nm = 35.0;
  double bottom_mirror_nm = 120.0;
  double film_nm = 135.0;
  DielectricModel mirror = silver();
  double host_eps = 2.2;
  double exciton_ev = 2.11;
  double exciton_fwhm_ev = 0.040;
  double strength_per_mm = 0.0;  ///< eV^2 per mM
  double concentration_mm = 0.0;

  double oscillator_strength() const { return strength_per_mm * concentration_mm; }

  model::Lorentz film_model() const {
    return model::Lorentz{host_eps, exciton_ev, exciton_fwhm_ev, oscillator_strength()};
  }

  Cavity undoped() const {
    Cavity c = *this;
    c.concentration_mm = 0.0;
    return c;
  }

  Cavity with_film(double nm) const {
    Cavity c = *this;
    c.film_nm = nm;
    return c;
  }

  Cavity with_concentration(double mm) const {
    Cavity c = *this;
    c.concentration_mm = mm;
    return c;
  }

  /// Index of the film layer inside stack().layers.
  static constexpr std::size_t film_index = 2;

  Stack stack() const {
    Stack s;
    s.layers.push_back(Layer::bounding(model::Constant{ambient_index * ambient_index}));
    s.layers.push_back(Layer::film(top_mirror_nm, mirror));
    s.layers.push_back(Layer::film(film_nm, film_model()));
    s.layers.push_back(Layer::film(bottom_mirror_nm, mirror));
    s.layers.push_back(Layer::bounding(model::Constant{substrate_index * substrate_index}));
    return s;
  }

  /// The same film on the bottom mirror only (no top mirror).
  Stack bare_film_stack() const {
    Stack s;
    s.layers.push_back(Layer::bounding(model::Constant{ambient_index * ambient_index}));
    s.layers.push_back(Layer::film(film_nm, film_model()));
    s.layers.push_back(Layer::film(bottom_mirror_nm, mirror));
    s.layers.push_back(Layer::bounding(model::Constant{substrate_index * substrate_index}));
    return s;
  }
};

/// Window in which cavity dips are searched.
struct DipWindow {
  double lo_ev = 1.5;
  double hi_ev = 3.0;
  double step_ev = 0.001;
};

/// Fundamental resonance energy of the undoped cavity.
inline double cavity_resonance(const Cavity& cavity, const DipWindow& window = {}) {
  return reflectance_dip(cavity.undoped().stack(), window.lo_ev, window.hi_ev, window.step_ev);
}

struct ThicknessSearch {
  double min_nm = 90.0;
  double max_nm = 220.0;
  double tolerance_ev = 1e-4;
  int max_iterations = 60;
  DipWindow window{1.3, 3.2, 0.001};
};

/// Film thickness that puts the undoped-cavity reflectance dip at `target_ev`.
///
/// Bisection on the dip position, which decreases monotonically with
/// thickness inside the search bracket.
inline double find_cavity_thickness(const Cavity& cavity, double target_ev, const ThicknessSearch& opt = {}) {
  if (!(target_ev >= 1.8 && target_ev <= 2.6))
    throw Error(ErrorCode::not_tunable, "target resonance must lie in [1.8, 2.6] eV");
  const Cavity empty = cavity.undoped();
  auto miss = [&](double nm) { return cavity_resonance(empty.with_film(nm), opt.window) - target_ev; };
  double lo = opt.min_nm, hi = opt.max_nm;
  double f_lo = miss(lo), f_hi = miss(hi);
  if (f_lo < 0.0 || f_hi > 0.0)
    throw Error(ErrorCode::not_tunable, "target resonance not bracketed by the thickness search range");
  for (int it = 0; it < opt.max_iterations && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = miss(mid);
    if (std::abs(f_mid) < opt.tolerance_ev * 1e-2) return mid;
    if (f_mid > 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  const double best = std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
  if (std::abs(miss(best)) > opt.tolerance_ev)
    throw Error(ErrorCode::not_tunable, "bisection did not converge on the target resonance");
  return best;
}

}  // namespace polariton
