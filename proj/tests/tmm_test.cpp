#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "polariton/calibration.hpp"
#include "polariton/dispersion.hpp"
#include "polariton/oscillator.hpp"
#include "polariton/scattermodel.hpp"
#include "polariton/tmm.hpp"
#include "test_support.hpp"

namespace polariton {
namespace {

using testing::resonant_cavity;

Stack two_media(double n1, double n2, double interior_nm = 0.0, double interior_n = 1.0) {
  return Stack{{Layer::bounding(model::Constant{n1 * n1}), Layer::film(interior_nm, model::Constant{interior_n * interior_n}),
                Layer::bounding(model::Constant{n2 * n2})}};
}

TEST(LayerMatrix, ZeroThicknessIsIdentity) {
  const auto m = layer_matrix({1.7, 0.3}, 0.0, 2.0);
  EXPECT_EQ(m(0, 0), complex(1.0));
  EXPECT_EQ(m(0, 1), complex(0.0));
  EXPECT_EQ(m(1, 0), complex(0.0));
  EXPECT_EQ(m(1, 1), complex(1.0));
}

TEST(LayerMatrix, UnimodularForLosslessIndex) {
  UniformNoise u(3);
  for (int i = 0; i < 200; ++i) {
    const double n = 1.0 + 3.0 * u.next(), d = 500.0 * u.next(), e = 1.0 + 2.0 * u.next();
    EXPECT_NEAR(std::abs(layer_matrix(n, d, e).determinant() - 1.0), 0.0, 1e-12);
  }
}

TEST(LayerMatrix, HalfWaveLayerIsMinusIdentity) {
  const double n = 1.5, e = 2.0;
  const double d = std::numbers::pi * hbar_c_ev_nm / (e * n);  // phase exactly pi
  const auto m = layer_matrix(n, d, e);
  EXPECT_NEAR(std::abs(m(0, 0) + 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(m(1, 1) + 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(m(0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(m(1, 0)), 0.0, 1e-12);
}

TEST(ReflectanceTransmittance, SingleInterfaceFresnel) {
  const auto rt = reflectance_transmittance(two_media(1.0, 1.5), 2.0);
  const double fresnel = std::pow((1.0 - 1.5) / (1.0 + 1.5), 2);
  EXPECT_NEAR(rt.reflectance, fresnel, 1e-12);
  EXPECT_NEAR(rt.reflectance, 0.04, 1e-12);
  EXPECT_NEAR(rt.transmittance, 0.96, 1e-12);
}

TEST(ReflectanceTransmittance, ZeroThicknessInteriorReproducesFresnel) {
  UniformNoise u(4);
  for (int i = 0; i < 100; ++i) {
    const double n1 = 1.0 + u.next(), n2 = 1.0 + 2.0 * u.next(), ni = 1.0 + 3.0 * u.next();
    const double fresnel = std::pow((n1 - n2) / (n1 + n2), 2);
    EXPECT_NEAR(reflectance_transmittance(two_media(n1, n2, 0.0, ni), 1.5 + u.next()).reflectance, fresnel, 1e-10);
  }
}

TEST(ReflectanceTransmittance, LosslessSlabConservesEnergy) {
  UniformNoise u(5);
  for (int i = 0; i < 200; ++i) {
    const auto stack = two_media(1.0, 1.0 + u.next(), 1000.0 * u.next(), 1.0 + 3.0 * u.next());
    const auto rt = reflectance_transmittance(stack, 1.0 + 2.0 * u.next());
    EXPECT_NEAR(rt.reflectance + rt.transmittance, 1.0, 1e-10);
  }
}

TEST(ReflectanceTransmittance, MultilayerLosslessConservesEnergy) {
  UniformNoise u(6);
  for (int trial = 0; trial < 20; ++trial) {
    Stack s;
    s.layers.push_back(Layer::bounding(model::Constant{1.0}));
    for (int j = 0; j < 6; ++j) s.layers.push_back(Layer::film(300.0 * u.next(), model::Constant{1.0 + 5.0 * u.next()}));
    s.layers.push_back(Layer::bounding(model::Constant{2.25}));
    const auto spectra = spectrum_sweep(s, make_grid(1.5, 3.0, 0.01));
    for (std::size_t k = 0; k < spectra.reflectance.size(); ++k)
      EXPECT_NEAR(spectra.reflectance.values[k] + spectra.transmittance.values[k], 1.0, 1e-10);
  }
}

TEST(ReflectanceTransmittance, TransmittanceIsReciprocal) {
  Cavity c = resonant_cavity();
  c.bottom_mirror_nm = 30.0;  // thin enough for measurable transmission
  const Stack forward = c.stack();
  const Stack backward = forward.reversed();
  for (double e = 1.8; e <= 2.4; e += 0.01) {
    const double tf = reflectance_transmittance(forward, e).transmittance;
    const double tb = reflectance_transmittance(backward, e).transmittance;
    EXPECT_NEAR(tf, tb, 1e-10);
  }
}

TEST(ReflectanceTransmittance, InteriorSemiInfiniteLayerIsRejected) {
  Stack s = two_media(1.0, 1.5, 10.0);
  s.layers[1].semi_infinite = true;
  try {
    reflectance_transmittance(s, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_stack);
  }
}

TEST(ReflectanceTransmittance, DopedCavityHasPolaritonDips) {
  // coupled-oscillator branches at V = 70 meV
  const auto oracle = polariton_energies({2.11, 2.11, 0.070, 0.060, 0.040});
  const auto dips = cavity_branch_energies(resonant_cavity());
  EXPECT_NEAR(dips.upper_ev, oracle.upper.real(), 0.010);
  EXPECT_NEAR(dips.lower_ev, oracle.lower.real(), 0.010);
  EXPECT_NEAR(dips.upper_ev, 2.18, 0.010);
  EXPECT_NEAR(dips.lower_ev, 2.04, 0.010);
}

TEST(SpectrumSweep, EmptyGrid) {
  const auto s = spectrum_sweep(resonant_cavity().stack(), {});
  EXPECT_TRUE(s.reflectance.empty());
  EXPECT_TRUE(s.transmittance.empty());
  EXPECT_TRUE(s.absorbance.empty());
}

TEST(SpectrumSweep, RejectsUnorderedGrid) {
  EXPECT_THROW(spectrum_sweep(resonant_cavity().stack(), {2.0, 1.9}), Error);
}

TEST(SpectrumSweep, ThickBottomMirrorBlocksTransmission) {
  const auto s = spectrum_sweep(resonant_cavity().stack(), make_grid(1.8, 2.4, 0.001));
  for (double t : s.transmittance.values) EXPECT_LT(t, 0.01);
  for (std::size_t i = 0; i < s.absorbance.size(); ++i) {
    EXPECT_GE(s.absorbance.values[i], -1e-9);
    EXPECT_DOUBLE_EQ(s.absorbance.values[i], 1.0 - s.reflectance.values[i] - s.transmittance.values[i]);
  }
  EXPECT_NO_THROW(s.reflectance.validate());
}

TEST(SpectrumSweep, UndopedCavityHasSingleDip) {
  const auto grid = make_grid(1.8, 2.4, 0.001);
  const auto s = spectrum_sweep(resonant_cavity().undoped().stack(), grid);
  const auto minima = local_minima(grid, s.reflectance.values);
  ASSERT_EQ(minima.size(), 1u);
  EXPECT_NEAR(minima[0].energy, 2.11, 0.001);
}

TEST(FindCavityThickness, ThickerFilmsResonateLower) {
  const Cavity c;
  double previous = 10.0;
  for (double nm = 100.0; nm <= 210.0; nm += 10.0) {
    const double e = cavity_resonance(c.with_film(nm));
    EXPECT_LT(e, previous);
    previous = e;
  }
}

TEST(FindCavityThickness, RoundTrip) {
  const Cavity c;
  for (double target : {1.8, 1.96, 2.11, 2.26, 2.6}) {
    const double nm = find_cavity_thickness(c, target);
    EXPECT_NEAR(cavity_resonance(c.with_film(nm)), target, 0.001) << target;
  }
  const double nm = find_cavity_thickness(c, 2.11);
  EXPECT_GT(nm, 100.0);
  EXPECT_LT(nm, 200.0);
}

TEST(FindCavityThickness, OutOfRangeTargetsAreNotTunable) {
  const Cavity c;
  for (double target : {1.5, 2.9}) {
    try {
      find_cavity_thickness(c, target);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::not_tunable);
    }
  }
  ThicknessSearch narrow;
  narrow.min_nm = 100.0;
  narrow.max_nm = 110.0;
  EXPECT_THROW(find_cavity_thickness(c, 2.11, narrow), Error);
}

TEST(ConcentrationSweep, SplittingFollowsSquareRootLaw) {
  std::vector<double> x, y;
  for (double mm : {17.0, 34.0, 56.0, 85.0, 170.0}) {
    x.push_back(std::sqrt(mm));
    y.push_back(cavity_branch_energies(resonant_cavity().with_concentration(mm)).splitting());
  }
  const auto reg = ordinary_least_squares([&] {
    std::vector<RegressionPoint> p;
    for (std::size_t i = 0; i < x.size(); ++i) p.push_back({x[i], y[i]});
    return p;
  }());
  double my = 0.0;
  for (double v : y) my += v / static_cast<double>(y.size());
  double ss_tot = 0.0;
  for (double v : y) ss_tot += (v - my) * (v - my);
  const double r2 = 1.0 - reg.rms * reg.rms * static_cast<double>(y.size()) / ss_tot;
  EXPECT_GE(r2, 0.99);
  EXPECT_NEAR(y[2], 0.140, 1e-6);  // calibration anchor at 56 mM
}

TEST(Calibration, RecoversShippedStrength) {
  Cavity c = resonant_cavity();
  const double k = calibrate_strength_per_mm(c, 56.0, 0.140);
  EXPECT_NEAR(k / default_strength_per_mm, 1.0, 1e-6);
}

}  // namespace
}  // namespace polariton
