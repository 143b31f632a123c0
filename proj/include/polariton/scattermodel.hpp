#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "polariton/error.hpp"
#include "polariton/lineshape.hpp"
#include "polariton/oscillator.hpp"
#include "polariton/spectrum.hpp"

namespace polariton {

/// Empirical scattering law: each branch's share of the integrated scattering
/// is slope * (photon weight) + offset, renormalised to sum to one.
struct ScatteringLaw {
  double peak_efficiency = 0.25;  ///< maximum of the synthesized spectrum
  double slope = 1.0;
  double offset_upper = 0.0;
  double offset_lower = 0.0;
  double width_ev = 0.035;
  double skew_upper = 0.0;
  double skew_lower = 0.0;
  double noise_floor = 0.03;

  void validate() const {
    if (!(peak_efficiency >= 0.0 && peak_efficiency <= 1.0))
      throw Error(ErrorCode::invalid_law, "peak efficiency must lie in [0, 1]");
    if (!(noise_floor >= 0.0 && noise_floor <= 0.05))
      throw Error(ErrorCode::invalid_law, "noise floor must lie in [0, 0.05]");
    if (!(width_ev > 0.0)) throw Error(ErrorCode::invalid_law, "peak width must be positive");
    if (!std::isfinite(slope) || !std::isfinite(offset_upper) || !std::isfinite(offset_lower) ||
        !std::isfinite(skew_upper) || !std::isfinite(skew_lower))
      throw Error(ErrorCode::invalid_law, "law parameters must be finite");
  }
};

/// Uniform deviates in [0, 1) from the raw 64-bit Mersenne Twister stream,
/// so sequences do not depend on the standard library's distributions.
class UniformNoise {
 public:
  explicit UniformNoise(std::uint64_t seed) : engine_(seed) {}

  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<double> uniform_noise(std::size_t n, double amplitude, std::uint64_t seed) {
  UniformNoise gen(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = amplitude * gen.next();
  return out;
}

struct ScatteringSynthesis {
  Spectrum spectrum;
  RelativeStrengths strengths;  ///< generating shares
  SkewedGaussianPeak upper;     ///< noiseless peaks after scaling
  SkewedGaussianPeak lower;
};

/// Branch shares implied by the law at the given detuning and coupling.
inline RelativeStrengths law_strengths(const CoupledOscillatorParams& p, const ScatteringLaw& law) {
  const auto w = hopfield_photon_weights(p.detuning(), p.coupling_ev);
  const double su = law.slope * w.upper + law.offset_upper;
  const double sl = law.slope * w.lower + law.offset_lower;
  if (su < 0.0 || sl < 0.0 || !(su + sl > 0.0))
    throw Error(ErrorCode::invalid_law, "law yields a negative or vanishing branch share");
  RelativeStrengths out;
  out.upper = su / (su + sl);
  out.lower = 1.0 - out.upper;
  return out;
}

/// Two skewed-Gaussian peaks at the real polariton energies with areas in the
/// law's proportions, plus seeded uniform noise in [0, noise_floor). The
/// common amplitude scale is chosen so that the maximum of the noisy
/// spectrum equals the law's peak efficiency.
inline ScatteringSynthesis synthesize_scattering(const CoupledOscillatorParams& p, const ScatteringLaw& law,
                                                 const std::vector<double>& grid, std::uint64_t seed) {
  p.validate();
  law.validate();
  const auto strengths = law_strengths(p, law);
  const auto energies = polariton_energies(p);
  const double unit = 1.0 / (law.width_ev * std::sqrt(std::numbers::pi));
  SkewedGaussianPeak upper{strengths.upper * unit, energies.upper.real(), law.width_ev, law.skew_upper};
  SkewedGaussianPeak lower{strengths.lower * unit, energies.lower.real(), law.width_ev, law.skew_lower};

  const auto noise = uniform_noise(grid.size(), law.noise_floor, seed);
  std::vector<double> shape(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) shape[i] = eval_peak(upper, grid[i]) + eval_peak(lower, grid[i]);

  // smallest scale at which some sample reaches the target; no sample exceeds it
  double scale = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (shape[i] > 0.0) scale = std::min(scale, (law.peak_efficiency - noise[i]) / shape[i]);
  if (!grid.empty() && (!std::isfinite(scale) || scale < 0.0))
    throw Error(ErrorCode::invalid_law, "peak efficiency is below the noise floor on this grid");
  if (grid.empty()) scale = 0.0;

  ScatteringSynthesis out;
  out.strengths = strengths;
  out.upper = upper;
  out.lower = lower;
  out.upper.amplitude *= scale;
  out.lower.amplitude *= scale;
  out.spectrum.channel = Channel::S;
  out.spectrum.energies = grid;
  out.spectrum.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.spectrum.values[i] = scale * shape[i] + noise[i];
  return out;
}

/// Scattering from the dye film without a top mirror: one unskewed peak at
/// the exciton energy whose width matches the absorption FWHM.
inline Spectrum uncoupled_film_scattering(double exciton_ev, double exciton_fwhm_ev, double peak_efficiency,
                                          const std::vector<double>& grid) {
  if (!(peak_efficiency >= 0.0 && peak_efficiency <= 1.0))
    throw Error(ErrorCode::invalid_law, "peak efficiency must lie in [0, 1]");
  const SkewedGaussianPeak peak = film_peak(exciton_ev, exciton_fwhm_ev, peak_efficiency);
  Spectrum out{grid, std::vector<double>(grid.size()), Channel::S};
  for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = eval_peak(peak, grid[i]);
  return out;
}

/// Featureless detection floor of the undoped cavity.
inline Spectrum empty_cavity_scattering(const std::vector<double>& grid, double noise_floor, std::uint64_t seed) {
  if (!(noise_floor >= 0.0 && noise_floor <= 0.05))
    throw Error(ErrorCode::invalid_law, "noise floor must lie in [0, 0.05]");
  return Spectrum{grid, uniform_noise(grid.size(), noise_floor, seed), Channel::S};
}

/// A = 1 - T - R - S pointwise.
inline Spectrum energy_balance(const Spectrum& r, const Spectrum& t, const Spectrum& s) {
  if (r.energies != t.energies || r.energies != s.energies)
    throw Error(ErrorCode::alignment, "R, T and S are not on identical grids");
  Spectrum a{r.energies, std::vector<double>(r.size()), Channel::A};
  for (std::size_t i = 0; i < r.size(); ++i) {
    a.values[i] = 1.0 - t.values[i] - r.values[i] - s.values[i];
    if (a.values[i] < -1e-6)
      throw Error(ErrorCode::unphysical_balance,
                  "absorbance " + std::to_string(a.values[i]) + " at " + std::to_string(r.energies[i]) + " eV");
  }
  return a;
}

/// Caps S at the power left over after reflection and transmission.
inline Spectrum clip_to_balance(const Spectrum& r, const Spectrum& t, const Spectrum& s) {
  if (r.energies != t.energies || r.energies != s.energies)
    throw Error(ErrorCode::alignment, "R, T and S are not on identical grids");
  Spectrum out = s;
  for (std::size_t i = 0; i < s.size(); ++i)
    out.values[i] = std::clamp(s.values[i], 0.0, std::max(0.0, 1.0 - r.values[i] - t.values[i]));
  return out;
}

}  // namespace polariton
