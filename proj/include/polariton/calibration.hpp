#pragma once

#include <cmath>

#include "polariton/dispersion.hpp"
#include "polariton/error.hpp"
#include "polariton/tmm.hpp"

namespace polariton {

/// Polariton reflectance dips of the doped cavity.
inline BranchEnergies cavity_branch_energies(const Cavity& cavity, const DipWindow& window = {}) {
  const auto grid = make_grid(window.lo_ev, window.hi_ev, window.step_ev);
  const auto spectra = spectrum_sweep(cavity.stack(), grid);
  return extract_branch_energies(spectra.reflectance, ExtremumKind::dips);
}

/// Oscillator strength per mM that gives `target_splitting_ev` between the
/// reflectance dips of `cavity` at `concentration_mm`. The film thickness is
/// taken as given, so tune it to resonance first.
inline double calibrate_strength_per_mm(const Cavity& cavity, double concentration_mm, double target_splitting_ev,
                                        const DipWindow& window = {}) {
  if (!(concentration_mm > 0.0) || !(target_splitting_ev > 0.0))
    throw Error(ErrorCode::schema, "calibration needs a positive concentration and splitting");
  auto miss = [&](double strength) {
    Cavity c = cavity;
    c.concentration_mm = 1.0;
    c.strength_per_mm = strength;
    try {
      return cavity_branch_energies(c, window).splitting() - target_splitting_ev;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::unresolved_splitting) throw;
      return -target_splitting_ev;  // dips not yet resolved
    }
  };
  double lo = 1e-3, hi = 1.0;
  if (miss(lo) > 0.0 || miss(hi) < 0.0) throw Error(ErrorCode::not_tunable, "target splitting not bracketed");
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    (miss(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi) / concentration_mm;
}

}  // namespace polariton
