#pragma once

#include <cmath>
#include <complex>

#include "polariton/error.hpp"

namespace polariton {

/// Two coupled damped oscillators: a cavity mode and an exciton line.
/// Linewidths are full widths at half maximum.
struct CoupledOscillatorParams {
  double cavity_ev = 2.11;
  double exciton_ev = 2.11;
  double coupling_ev = 0.075;
  double cavity_fwhm_ev = 0.060;
  double exciton_fwhm_ev = 0.040;

  double detuning() const { return cavity_ev - exciton_ev; }

  void validate() const {
    if (!(cavity_ev > 0.0) || !(exciton_ev > 0.0) || !(coupling_ev >= 0.0) || !(cavity_fwhm_ev >= 0.0) ||
        !(exciton_fwhm_ev >= 0.0))
      throw Error(ErrorCode::schema, "coupled-oscillator parameters out of range");
  }
};

struct PolaritonEnergies {
  std::complex<double> upper;
  std::complex<double> lower;
  /// The square-root term vanishes; the branch labels are arbitrary there.
  bool exceptional_point = false;
};

/// Complex eigenenergies of the damped two-oscillator problem,
///   E(+-) = (E_c + E_x)/2 + i (g_c + g_x)/2 +- sqrt(V^2 + [D - i (g_c - g_x)/2]^2 / 4),
/// labelled so that Re(upper) >= Re(lower).
inline PolaritonEnergies polariton_energies(const CoupledOscillatorParams& p) {
  using cd = std::complex<double>;
  const cd centre(0.5 * (p.cavity_ev + p.exciton_ev), 0.5 * (p.cavity_fwhm_ev + p.exciton_fwhm_ev));
  const cd shifted(p.detuning(), -0.5 * (p.cavity_fwhm_ev - p.exciton_fwhm_ev));
  const cd root = std::sqrt(p.coupling_ev * p.coupling_ev + 0.25 * shifted * shifted);
  PolaritonEnergies out{centre + root, centre - root, std::abs(root) < 1e-12};
  if (out.upper.real() < out.lower.real()) std::swap(out.upper, out.lower);
  return out;
}

/// Real-part separation of the two branches.
inline double splitting(const CoupledOscillatorParams& p) {
  const auto e = polariton_energies(p);
  return e.upper.real() - e.lower.real();
}

struct PhotonWeights {
  double upper = 0.5;
  double lower = 0.5;
};

/// Photonic Hopfield fractions of the lossless two-level problem at detuning
/// `detuning_ev` (cavity minus exciton).
inline PhotonWeights hopfield_photon_weights(double detuning_ev, double coupling_ev) {
  if (!(coupling_ev >= 0.0) || !std::isfinite(detuning_ev))
    throw Error(ErrorCode::undefined_mixture, "coupling must be nonnegative and detuning finite");
  const double norm = std::hypot(detuning_ev, 2.0 * coupling_ev);
  if (norm == 0.0) throw Error(ErrorCode::undefined_mixture, "zero coupling at zero detuning");
  const double x = detuning_ev / norm;
  PhotonWeights w;
  w.upper = 0.5 * (1.0 + x);
  w.lower = 1.0 - w.upper;
  return w;
}

struct PolaritonPair {
  std::complex<double> upper;
  std::complex<double> lower;
  double photon_weight_upper = 0.5;
  double photon_weight_lower = 0.5;
  bool exceptional_point = false;
};

inline PolaritonPair polaritons(const CoupledOscillatorParams& p) {
  const auto e = polariton_energies(p);
  const auto w = hopfield_photon_weights(p.detuning(), p.coupling_ev);
  return {e.upper, e.lower, w.upper, w.lower, e.exceptional_point};
}

namespace si {
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F / m
inline constexpr double debye = 3.33564095e-30;          // C m
inline constexpr double electron_volt = 1.602176634e-19;  // J
}  // namespace si

/// Inputs to the collective vacuum Rabi frequency, SI units throughout.
struct RabiParams {
  double dipole_cm = si::debye;
  double cavity_omega = 3.2e15;  ///< rad/s
  double background_eps = 2.2;
  double mode_volume_m3 = 1e-19;
  double molecules = 1e8;
};

/// Omega_R = (2 d / hbar) sqrt(hbar w_c N / (2 eps0 eps V_c)) in rad/s.
/// The square root is the vacuum field amplitude of the mode; eps is relative.
inline double collective_rabi(const RabiParams& r) {
  if (!(r.dipole_cm > 0.0) || !(r.cavity_omega > 0.0) || !(r.background_eps > 0.0) || !(r.mode_volume_m3 > 0.0) ||
      !(r.molecules > 0.0))
    throw Error(ErrorCode::schema, "Rabi parameters must all be positive");
  const double field_sq =
      si::hbar * r.cavity_omega * r.molecules / (2.0 * si::vacuum_permittivity * r.background_eps * r.mode_volume_m3);
  return 2.0 * r.dipole_cm / si::hbar * std::sqrt(field_sq);
}

}  // namespace polariton
