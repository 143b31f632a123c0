#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "polariton/error.hpp"
#include "polariton/fitting.hpp"
#include "polariton/oscillator.hpp"
#include "polariton/spectrum.hpp"

namespace polariton {

struct DetuningRecord {
  double detuning_ev = 0.0;
  double upper_ev = 0.0;
  double lower_ev = 0.0;
  std::optional<double> sigma_upper;
  std::optional<double> sigma_lower;

  bool has_strengths() const { return sigma_upper.has_value() && sigma_lower.has_value(); }
};

struct DetuningSeries {
  std::vector<DetuningRecord> records;

  void validate() const {
    std::set<double> seen;
    for (const auto& r : records) {
      if (!(r.upper_ev > r.lower_ev))
        throw Error(ErrorCode::schema, "record at detuning " + std::to_string(r.detuning_ev) +
                                           " has upper branch below lower branch");
      if (!seen.insert(r.detuning_ev).second)
        throw Error(ErrorCode::schema, "duplicate detuning " + std::to_string(r.detuning_ev));
    }
  }

  bool has_strengths() const {
    return !records.empty() &&
           std::all_of(records.begin(), records.end(), [](const DetuningRecord& r) { return r.has_strengths(); });
  }
};

enum class ExtremumKind { dips, peaks };

struct BranchEnergies {
  double upper_ev = 0.0;
  double lower_ev = 0.0;
  double splitting() const { return upper_ev - lower_ev; }
};

/// Two deepest local minima (dips) or two highest local maxima (peaks),
/// parabolically refined and returned in energy order.
inline BranchEnergies extract_branch_energies(const Spectrum& spec, ExtremumKind kind) {
  auto extrema = kind == ExtremumKind::dips ? local_minima(spec.energies, spec.values)
                                            : local_maxima(spec.energies, spec.values);
  if (extrema.size() < 2) throw Error(ErrorCode::unresolved_splitting, "fewer than two extrema in the spectrum");
  std::stable_sort(extrema.begin(), extrema.end(), [kind](const Extremum& a, const Extremum& b) {
    return kind == ExtremumKind::dips ? a.value < b.value : a.value > b.value;
  });
  const double a = extrema[0].energy, b = extrema[1].energy;
  return {std::max(a, b), std::min(a, b)};
}

struct CouplingFitOptions {
  double exciton_ev = 2.11;
  double cavity_fwhm_ev = 0.060;
  double exciton_fwhm_ev = 0.040;
  /// Fit one cavity energy per record (initialised from its detuning)
  /// instead of holding E_c = E_x + detuning fixed.
  bool free_cavity_energies = false;
  int max_iterations = 500;
};

struct CouplingFit {
  double coupling_ev = 0.0;
  std::vector<double> cavity_ev;  ///< per record, fitted or fixed
  double rms_ev = 0.0;
  FitResult fit;
};

/// Fits the real parts of both coupled-oscillator branches to the measured
/// branch energies of every record.
inline CouplingFit fit_coupling(const DetuningSeries& series, const CouplingFitOptions& opt = {}) {
  series.validate();
  const auto& rec = series.records;
  const auto n = static_cast<Eigen::Index>(rec.size());
  if (rec.size() < 3) throw Error(ErrorCode::insufficient_data, "coupling fit needs at least 3 detuning points");

  // seed from the record closest to resonance: splitting^2 ~ 4 V^2 + detuning^2
  const auto nearest = std::min_element(rec.begin(), rec.end(), [](const auto& a, const auto& b) {
    return std::abs(a.detuning_ev) < std::abs(b.detuning_ev);
  });
  const double split = nearest->upper_ev - nearest->lower_ev;
  const double inner = split * split - nearest->detuning_ev * nearest->detuning_ev;
  const double v0 = inner > 0.0 ? 0.5 * std::sqrt(inner) : 0.5 * split;

  const Eigen::Index np = opt.free_cavity_energies ? 1 + n : 1;
  FitProblem problem;
  problem.max_iterations = opt.max_iterations;
  problem.initial = Vector::Zero(np);
  problem.lower = Vector::Zero(np);
  problem.upper = Vector::Zero(np);
  problem.initial[0] = v0;
  problem.upper[0] = 1.0;
  for (Eigen::Index i = 0; i + 1 < np; ++i) {
    problem.initial[1 + i] = opt.exciton_ev + rec[static_cast<std::size_t>(i)].detuning_ev;
    problem.lower[1 + i] = 0.1;
    problem.upper[1 + i] = 10.0;
  }
  auto cavity_of = [&](const Vector& p, std::size_t i) {
    return opt.free_cavity_energies ? p[1 + static_cast<Eigen::Index>(i)] : opt.exciton_ev + rec[i].detuning_ev;
  };
  problem.residual = [&](const Vector& p) {
    Vector r(2 * n);
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const CoupledOscillatorParams osc{cavity_of(p, i), opt.exciton_ev, p[0], opt.cavity_fwhm_ev,
                                        opt.exciton_fwhm_ev};
      const auto e = polariton_energies(osc);
      r[static_cast<Eigen::Index>(2 * i)] = e.upper.real() - rec[i].upper_ev;
      r[static_cast<Eigen::Index>(2 * i + 1)] = e.lower.real() - rec[i].lower_ev;
    }
    return r;
  };

  CouplingFit out;
  out.fit = least_squares(problem);
  if (out.fit.status == Convergence::max_iterations)
    throw Error(ErrorCode::fit_failed, "coupling fit did not converge");
  out.coupling_ev = out.fit.params[0];
  for (std::size_t i = 0; i < rec.size(); ++i) out.cavity_ev.push_back(cavity_of(out.fit.params, i));
  out.rms_ev = std::sqrt(2.0 * out.fit.cost / static_cast<double>(2 * n));
  return out;
}

struct RegressionPoint {
  double photon_weight = 0.0;
  double strength = 0.0;
};

struct HopfieldRegression {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
  std::vector<RegressionPoint> points;
};

struct HopfieldRegressionPair {
  HopfieldRegression upper;
  HopfieldRegression lower;
};

/// Ordinary least-squares line through (x, y).
inline HopfieldRegression ordinary_least_squares(std::vector<RegressionPoint> pts) {
  if (pts.size() < 2) throw Error(ErrorCode::insufficient_data, "regression needs at least 2 points");
  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.photon_weight;
    my += p.strength;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.photon_weight - mx) * (p.photon_weight - mx);
    sxy += (p.photon_weight - mx) * (p.strength - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::insufficient_data, "photon weights do not vary across the series");
  HopfieldRegression out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss = 0.0;
  for (const auto& p : pts) {
    const double res = p.strength - (out.slope * p.photon_weight + out.intercept);
    ss += res * res;
  }
  out.rms = std::sqrt(ss / n);
  out.points = std::move(pts);
  return out;
}

/// Relative scattering strength of each branch against its photon weight,
/// one line per branch.
inline HopfieldRegressionPair hopfield_regression(const DetuningSeries& series, double coupling_ev) {
  if (!(coupling_ev > 0.0)) throw Error(ErrorCode::undefined_mixture, "coupling must be positive");
  if (!series.has_strengths()) throw Error(ErrorCode::insufficient_data, "series lacks relative strengths");
  std::vector<RegressionPoint> up, lo;
  for (const auto& r : series.records) {
    const auto w = hopfield_photon_weights(r.detuning_ev, coupling_ev);
    up.push_back({w.upper, *r.sigma_upper});
    lo.push_back({w.lower, *r.sigma_lower});
  }
  return {ordinary_least_squares(std::move(up)), ordinary_least_squares(std::move(lo))};
}

/// Detuning where the upper and lower relative strengths cross, by linear
/// interpolation between the first bracketing pair of records.
inline double find_crossing_detuning(const DetuningSeries& series) {
  if (!series.has_strengths()) throw Error(ErrorCode::insufficient_data, "series lacks relative strengths");
  auto rec = series.records;
  std::sort(rec.begin(), rec.end(), [](const auto& a, const auto& b) { return a.detuning_ev < b.detuning_ev; });
  auto diff = [](const DetuningRecord& r) { return *r.sigma_upper - *r.sigma_lower; };
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double d0 = diff(rec[i]);
    if (d0 == 0.0) return rec[i].detuning_ev;
    if (i + 1 < rec.size()) {
      const double d1 = diff(rec[i + 1]);
      if ((d0 < 0.0) != (d1 < 0.0) && d1 != 0.0) {
        const double t = d0 / (d0 - d1);
        return rec[i].detuning_ev + t * (rec[i + 1].detuning_ev - rec[i].detuning_ev);
      }
    }
  }
  throw Error(ErrorCode::no_crossing, "relative strengths do not cross within the series");
}

}  // namespace polariton
