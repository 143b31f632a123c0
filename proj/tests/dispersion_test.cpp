#include <gtest/gtest.h>

#include <cmath>

#include "polariton/calibration.hpp"
#include "polariton/dispersion.hpp"
#include "polariton/scattermodel.hpp"
#include "test_support.hpp"

namespace polariton {
namespace {

using testing::nominal_params;

DetuningSeries model_series(double coupling_ev, const std::vector<double>& noise = {}) {
  DetuningSeries s;
  const auto detunings = testing::linspace(-0.15, 0.15, 9);
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    const auto e = polariton_energies(nominal_params(detunings[i], coupling_ev));
    const double nu = noise.empty() ? 0.0 : noise[2 * i], nl = noise.empty() ? 0.0 : noise[2 * i + 1];
    s.records.push_back({detunings[i], e.upper.real() + nu, e.lower.real() + nl, std::nullopt, std::nullopt});
  }
  return s;
}

DetuningSeries with_law_strengths(DetuningSeries s, double coupling_ev, double offset_upper, double offset_lower) {
  for (auto& r : s.records) {
    const auto w = hopfield_photon_weights(r.detuning_ev, coupling_ev);
    r.sigma_upper = w.upper + offset_upper;
    r.sigma_lower = w.lower + offset_lower;
  }
  return s;
}

TEST(ExtractBranchEnergies, TwoDeepestDips) {
  const auto grid = make_grid(1.9, 2.3, 0.001);
  Spectrum r{grid, {}, Channel::R};
  for (double e : grid)
    r.values.push_back(1.0 - 0.6 * std::exp(-std::pow((e - 2.18) / 0.02, 2)) -
                       0.5 * std::exp(-std::pow((e - 2.04) / 0.02, 2)) -
                       0.05 * std::exp(-std::pow((e - 1.95) / 0.01, 2)));
  const auto b = extract_branch_energies(r, ExtremumKind::dips);
  EXPECT_NEAR(b.upper_ev, 2.18, 1e-4);
  EXPECT_NEAR(b.lower_ev, 2.04, 1e-4);
  EXPECT_NEAR(b.splitting(), 0.14, 2e-4);
}

TEST(ExtractBranchEnergies, SingleDipIsUnresolved) {
  const auto grid = make_grid(1.9, 2.3, 0.001);
  Spectrum r{grid, {}, Channel::R};
  for (double e : grid) r.values.push_back(1.0 - 0.6 * std::exp(-std::pow((e - 2.11) / 0.1, 2)));
  try {
    extract_branch_energies(r, ExtremumKind::dips);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unresolved_splitting);
  }
}

TEST(FitCoupling, RecoversNoiselessCoupling) {
  for (double v : {0.05, 0.075, 0.1}) {
    const auto fit = fit_coupling(model_series(v));
    EXPECT_NEAR(fit.coupling_ev, v, 1e-6) << v;
    EXPECT_LT(fit.rms_ev, 1e-6);
  }
}

TEST(FitCoupling, FreeCavityEnergiesAlsoRecover) {
  CouplingFitOptions opt;
  opt.free_cavity_energies = true;
  const auto fit = fit_coupling(model_series(0.075), opt);
  EXPECT_NEAR(fit.coupling_ev, 0.075, 1e-6);
  ASSERT_EQ(fit.cavity_ev.size(), 9u);
  EXPECT_NEAR(fit.cavity_ev.front(), 2.11 - 0.15, 1e-6);
}

TEST(FitCoupling, ToleratesMillielectronvoltNoise) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto fit = fit_coupling(model_series(0.075, testing::symmetric_noise(18, 0.003, seed)));
    EXPECT_NEAR(fit.coupling_ev, 0.075, 0.002);
  }
}

TEST(FitCoupling, NeedsThreeRecords) {
  DetuningSeries s = model_series(0.075);
  s.records.resize(2);
  try {
    fit_coupling(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_data);
  }
}

TEST(FitCoupling, RejectsInvertedOrDuplicateRecords) {
  DetuningSeries s = model_series(0.075);
  std::swap(s.records[0].upper_ev, s.records[0].lower_ev);
  EXPECT_THROW(fit_coupling(s), Error);
  s = model_series(0.075);
  s.records[1].detuning_ev = s.records[0].detuning_ev;
  EXPECT_THROW(fit_coupling(s), Error);
}

TEST(FitCoupling, SimulatedCavitySeries) {
  DetuningSeries s;
  const Cavity base = testing::resonant_cavity();
  for (double d : testing::linspace(-0.15, 0.15, 9)) {
    const Cavity c = base.with_film(find_cavity_thickness(base.undoped(), 2.11 + d));
    const auto b = cavity_branch_energies(c);
    s.records.push_back({d, b.upper_ev, b.lower_ev, std::nullopt, std::nullopt});
  }
  const auto fit = fit_coupling(s);
  EXPECT_NEAR(fit.coupling_ev, 0.070, 0.008);
}

TEST(HopfieldRegression, UnitSlopeWithSymmetricOffsets) {
  // opposite offsets keep the law's shares summing to one
  const auto s = with_law_strengths(model_series(0.075), 0.075, -0.05, 0.05);
  const auto reg = hopfield_regression(s, 0.075);
  EXPECT_NEAR(reg.upper.slope, 1.0, 1e-12);
  EXPECT_NEAR(reg.upper.intercept, -0.05, 1e-12);
  EXPECT_NEAR(reg.lower.slope, 1.0, 1e-12);
  EXPECT_NEAR(reg.lower.intercept, 0.05, 1e-12);
  EXPECT_LT(reg.upper.rms, 1e-12);
  EXPECT_EQ(reg.upper.points.size(), 9u);
}

TEST(HopfieldRegression, RequiresStrengthsAndCoupling) {
  EXPECT_THROW(hopfield_regression(model_series(0.075), 0.075), Error);
  const auto s = with_law_strengths(model_series(0.075), 0.075, 0.0, 0.0);
  try {
    hopfield_regression(s, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::undefined_mixture);
  }
}

TEST(OrdinaryLeastSquares, ExactLine) {
  const auto fit = ordinary_least_squares({{0.0, 1.0}, {1.0, 3.0}, {2.0, 5.0}});
  EXPECT_NEAR(fit.slope, 2.0, 1e-15);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-15);
  EXPECT_THROW(ordinary_least_squares({{1.0, 1.0}, {1.0, 2.0}}), Error);
}

TEST(CrossingDetuning, ZeroForUnbiasedLaw) {
  const auto s = with_law_strengths(model_series(0.075), 0.075, 0.0, 0.0);
  EXPECT_NEAR(find_crossing_detuning(s), 0.0, 1e-12);
}

TEST(CrossingDetuning, ShiftsWithLowerBranchBias) {
  const auto s = with_law_strengths(model_series(0.075), 0.075, -0.05, 0.05);
  const double d = find_crossing_detuning(s);
  EXPECT_GT(d, 0.0);
  EXPECT_LT(d, 0.15);
}

TEST(CrossingDetuning, InterpolatesUnsortedRecords) {
  DetuningSeries s;
  s.records.push_back({0.1, 2.2, 2.0, 0.7, 0.3});
  s.records.push_back({-0.1, 2.1, 1.9, 0.3, 0.7});
  EXPECT_NEAR(find_crossing_detuning(s), 0.0, 1e-15);
}

TEST(CrossingDetuning, NoCrossing) {
  DetuningSeries s;
  s.records.push_back({-0.1, 2.1, 1.9, 0.6, 0.4});
  s.records.push_back({0.1, 2.2, 2.0, 0.7, 0.3});
  try {
    find_crossing_detuning(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_crossing);
  }
}

}  // namespace
}  // namespace polariton
