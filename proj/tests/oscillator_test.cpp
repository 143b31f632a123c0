#include <gtest/gtest.h>

#include <cmath>

#include "polariton/oscillator.hpp"
#include "polariton/scattermodel.hpp"

namespace polariton {
namespace {

TEST(PolaritonEnergies, LosslessResonance) {
  const auto e = polariton_energies({2.11, 2.11, 0.075, 0.0, 0.0});
  EXPECT_NEAR(e.upper.real(), 2.185, 1e-12);
  EXPECT_NEAR(e.lower.real(), 2.035, 1e-12);
  EXPECT_EQ(e.upper.imag(), 0.0);
}

TEST(PolaritonEnergies, UncoupledLimit) {
  const auto e = polariton_energies({2.21, 2.11, 0.0, 0.05, 0.05});
  EXPECT_NEAR(e.upper.real(), 2.21, 1e-12);
  EXPECT_NEAR(e.lower.real(), 2.11, 1e-12);
}

TEST(PolaritonEnergies, DampedResonanceSplitting) {
  const CoupledOscillatorParams p{2.11, 2.11, 0.070, 0.060, 0.040};
  const double closed_form = 2.0 * std::sqrt(0.070 * 0.070 - std::pow(0.060 - 0.040, 2) / 16.0);
  EXPECT_NEAR(splitting(p), closed_form, 1e-12);
  EXPECT_NEAR(splitting(p), 0.1396, 1e-4);
}

TEST(PolaritonEnergies, UpperLabelHasLargerRealPart) {
  UniformNoise u(21);
  for (int i = 0; i < 500; ++i) {
    const CoupledOscillatorParams p{1.8 + 0.6 * u.next(), 2.11, 0.2 * u.next(), 0.1 * u.next(), 0.1 * u.next()};
    const auto e = polariton_energies(p);
    EXPECT_GE(e.upper.real(), e.lower.real());
  }
}

TEST(PolaritonEnergies, TraceIsPreserved) {
  UniformNoise u(22);
  for (int i = 0; i < 500; ++i) {
    const CoupledOscillatorParams p{1.8 + 0.6 * u.next(), 1.9 + 0.4 * u.next(), 0.2 * u.next(), 0.1 * u.next(),
                                    0.1 * u.next()};
    const auto e = polariton_energies(p);
    const std::complex<double> trace(p.cavity_ev + p.exciton_ev, p.cavity_fwhm_ev + p.exciton_fwhm_ev);
    EXPECT_LE(std::abs(e.upper + e.lower - trace), 1e-12);
  }
}

TEST(PolaritonEnergies, MeanAtResonanceIsExciton) {
  for (double v : {0.01, 0.05, 0.075, 0.15}) {
    const auto e = polariton_energies({2.11, 2.11, v, 0.060, 0.040});
    EXPECT_NEAR(0.5 * (e.upper.real() + e.lower.real()), 2.11, 1e-12);
  }
}

TEST(PolaritonEnergies, ExceptionalPointIsFlagged) {
  // V = |gamma_c - gamma_x| / 4 cancels the square root at zero detuning; binary-exact values
  const auto e = polariton_energies({2.0, 2.0, 0.0625, 0.5, 0.25});
  EXPECT_TRUE(e.exceptional_point);
  EXPECT_FALSE(polariton_energies({2.11, 2.11, 0.070, 0.060, 0.040}).exceptional_point);
}

TEST(Splitting, Examples) {
  EXPECT_NEAR(splitting({2.11, 2.11, 0.075, 0.0, 0.0}), 0.150, 1e-12);
  EXPECT_NEAR(splitting({2.11, 2.11, 0.070, 0.060, 0.040}), 0.139642, 1e-6);
  // below the exceptional point the root is purely imaginary
  EXPECT_NEAR(splitting({2.11, 2.11, 0.001, 0.060, 0.040}), 0.0, 1e-15);
  EXPECT_NEAR(splitting({2.11, 2.11, 0.0, 0.060, 0.040}), 0.0, 1e-15);
}

TEST(Splitting, NondecreasingInCoupling) {
  for (double detuning : {-0.15, -0.05, 0.0, 0.08}) {
    double previous = -1.0;
    for (int k = 0; k <= 200; ++k) {
      const double s = splitting({2.11 + detuning, 2.11, 0.001 * k, 0.060, 0.040});
      EXPECT_GE(s, previous - 1e-15);
      previous = s;
    }
  }
}

TEST(HopfieldWeights, Examples) {
  const auto resonant = hopfield_photon_weights(0.0, 0.075);
  EXPECT_EQ(resonant.upper, 0.5);
  EXPECT_EQ(resonant.lower, 0.5);
  const auto detuned = hopfield_photon_weights(0.15, 0.075);
  EXPECT_NEAR(detuned.upper, 0.5 * (1.0 + 1.0 / std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(detuned.lower, 0.5 * (1.0 - 1.0 / std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(detuned.upper, 0.8536, 1e-4);
  const auto far = hopfield_photon_weights(1e6, 0.075);
  EXPECT_NEAR(far.upper, 1.0, 1e-12);
  EXPECT_NEAR(far.lower, 0.0, 1e-12);
}

TEST(HopfieldWeights, PairSumsToOne) {
  UniformNoise u(23);
  for (int i = 0; i < 1000; ++i) {
    const auto w = hopfield_photon_weights(-0.5 + u.next(), 1e-3 + 0.2 * u.next());
    EXPECT_NEAR(w.upper + w.lower, 1.0, 1e-12);
    EXPECT_GE(w.lower, 0.0);
    EXPECT_LE(w.upper, 1.0);
  }
}

TEST(HopfieldWeights, ZeroCouplingAtResonanceIsUndefined) {
  try {
    hopfield_photon_weights(0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::undefined_mixture);
  }
}

TEST(Polaritons, CombinesEnergiesAndWeights) {
  const auto p = polaritons({2.2, 2.11, 0.075, 0.060, 0.040});
  EXPECT_GT(p.upper.real(), p.lower.real());
  EXPECT_NEAR(p.photon_weight_upper + p.photon_weight_lower, 1.0, 1e-12);
  EXPECT_GT(p.photon_weight_upper, 0.5);  // positive detuning: upper branch is photon-like
}

TEST(CollectiveRabi, ScalesAsSquareRootOfMolecules) {
  RabiParams r;
  const double base = collective_rabi(r);
  r.molecules *= 4.0;
  EXPECT_NEAR(collective_rabi(r) / base, 2.0, 1e-12);
}

TEST(CollectiveRabi, HalvesWithFourfoldModeVolume) {
  RabiParams r;
  const double base = collective_rabi(r);
  r.mode_volume_m3 *= 4.0;
  EXPECT_NEAR(collective_rabi(r) / base, 0.5, 1e-12);
}

TEST(CollectiveRabi, UnitByUnitEvaluation) {
  // 1 D, 3.2e15 rad/s, eps 2.2, 1e-19 m^3, 1e8 molecules
  const double photon_energy_j = 1.054571817e-34 * 3.2e15;
  const double field_v_per_m = std::sqrt(photon_energy_j * 1e8 / (2.0 * 8.8541878128e-12 * 2.2 * 1e-19));
  const double coupling_j = 3.33564095e-30 * field_v_per_m;  // d * E
  const double expected = 2.0 * coupling_j / 1.054571817e-34;
  const double omega = collective_rabi({3.33564095e-30, 3.2e15, 2.2, 1e-19, 1e8});
  EXPECT_NEAR(omega / expected, 1.0, 1e-12);
  EXPECT_NEAR(omega, 1.86185e14, 1e9);
  EXPECT_TRUE(std::isfinite(omega));
}

TEST(CollectiveRabi, MonotoneInMolecules) {
  RabiParams r;
  double previous = 0.0;
  for (double n = 1e6; n <= 1e10; n *= 3.0) {
    r.molecules = n;
    const double v = collective_rabi(r);
    EXPECT_GT(v, previous);
    previous = v;
  }
  r.molecules = 0.0;
  EXPECT_THROW(collective_rabi(r), Error);
}

}  // namespace
}  // namespace polariton
