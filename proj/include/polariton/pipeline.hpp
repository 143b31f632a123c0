#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polariton/calibration.hpp"
#include "polariton/config.hpp"
#include "polariton/dispersion.hpp"
#include "polariton/io.hpp"
#include "polariton/lineshape.hpp"
#include "polariton/oscillator.hpp"
#include "polariton/scattermodel.hpp"
#include "polariton/tmm.hpp"

namespace polariton::pipeline {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.3.0";

/// Files produced by one command, held in memory until the whole command
/// has succeeded.
struct Outputs {
  std::map<std::string, std::string> files;
  json summary = json::object();

  void add(const std::string& name, std::string content) { files[name] = std::move(content); }
  void add_json(const std::string& name, const json& doc) { files[name] = doc.dump(2) + "\n"; }
  void merge(const Outputs& other, const std::string& prefix = "") {
    for (const auto& [name, content] : other.files) files[prefix + name] = content;
  }
};

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Provenance record: a hash over the validated config and every input file.
inline json manifest(const std::string& command, const RunConfig& cfg, const std::vector<std::string>& inputs,
                     const Outputs& out) {
  std::uint64_t h = fnv1a(cfg.source.dump());
  for (const auto& content : inputs) h = fnv1a(content, h);
  json files = json::array();
  for (const auto& [name, content] : out.files) files.push_back({{"name", name}, {"fnv1a", hex64(fnv1a(content))}});
  return json{{"tool", "polariton"},
              {"version", tool_version},
              {"command", command},
              {"seed", cfg.seed},
              {"inputs_hash", hex64(h)},
              {"outputs", files}};
}

/// Writes every file under `dir`, staging each to a temporary name first.
inline void commit(const Outputs& out, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + dir.string() + "'");
  std::vector<std::pair<fs::path, fs::path>> staged;
  for (const auto& [name, content] : out.files) {
    const fs::path target = dir / name;
    fs::create_directories(target.parent_path(), ec);
    const fs::path tmp = target.string() + ".partial";
    io::write_text(tmp, content);
    staged.emplace_back(tmp, target);
  }
  for (const auto& [tmp, target] : staged) {
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorCode::io, "cannot move '" + tmp.string() + "' into place");
  }
}

inline json peak_json(const SkewedGaussianPeak& p) {
  return json{{"amplitude", p.amplitude},
              {"centre_ev", p.centre_ev},
              {"width_ev", p.width_ev},
              {"skew", p.skew},
              {"area", peak_area(p)}};
}

inline CoupledOscillatorParams oscillator_for(const RunConfig& cfg, double cavity_ev, double coupling_ev) {
  return {cavity_ev, cfg.cavity.exciton_ev, coupling_ev, cfg.coupling.cavity_fwhm_ev, cfg.coupling.exciton_fwhm_ev};
}

inline double max_value(const Spectrum& s) {
  return s.empty() ? 0.0 : *std::max_element(s.values.begin(), s.values.end());
}

// --- simulate -------------------------------------------------------------

inline Outputs simulate(const RunConfig& cfg) {
  const Stack stack = simulation_stack(cfg);
  const auto grid = cfg.grid.points();
  const auto spectra = spectrum_sweep(stack, grid);
  Outputs out;
  out.add("reflectance.csv", io::format_spectrum_csv(spectra.reflectance));
  out.add("transmittance.csv", io::format_spectrum_csv(spectra.transmittance));
  out.add("absorbance.csv", io::format_spectrum_csv(spectra.absorbance));

  json dips = json::array();
  auto minima = local_minima(grid, spectra.reflectance.values);
  std::stable_sort(minima.begin(), minima.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  for (const auto& m : minima) dips.push_back({{"energy_ev", m.energy}, {"reflectance", m.value}});
  double worst_balance = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    worst_balance = std::max(worst_balance, std::abs(spectra.absorbance.values[i]));
  out.summary = json{{"command", "simulate"},
                     {"layers", stack.layers.size()},
                     {"reflectance_dips", dips},
                     {"max_transmittance", max_value(spectra.transmittance)},
                     {"max_abs_absorbance", worst_balance}};
  if (!cfg.stack) out.summary["film_nm"] = resolved_cavity(cfg).film_nm;
  out.add_json("simulate.json", out.summary);
  out.add_json("manifest.json", manifest("simulate", cfg, {}, out));
  return out;
}

// --- synth-scatter --------------------------------------------------------

enum class Fixture { coupled, bare_film, empty };

inline Fixture parse_fixture(const std::string& name) {
  if (name == "coupled") return Fixture::coupled;
  if (name == "bare-film") return Fixture::bare_film;
  if (name == "empty") return Fixture::empty;
  throw Error(ErrorCode::schema, "unknown fixture '" + name + "' (expected coupled, bare-film or empty)");
}

inline Outputs synth_scatter(const RunConfig& cfg, Fixture fixture) {
  const Cavity cavity = resolved_cavity(cfg);
  const auto grid = cfg.grid.points();
  Stack stack;
  Spectrum s;
  json info = json::object();
  switch (fixture) {
    case Fixture::coupled: {
      const double ec = cavity_resonance(cavity);
      const auto synth = synthesize_scattering(oscillator_for(cfg, ec, cfg.coupling.coupling_ev), cfg.law, grid, cfg.seed);
      s = synth.spectrum;
      stack = cavity.stack();
      info = {{"fixture", "coupled"},
              {"cavity_ev", ec},
              {"sigma_u", synth.strengths.upper},
              {"sigma_l", synth.strengths.lower},
              {"upper_peak", peak_json(synth.upper)},
              {"lower_peak", peak_json(synth.lower)}};
      break;
    }
    case Fixture::bare_film:
      s = uncoupled_film_scattering(cfg.cavity.exciton_ev, cfg.cavity.exciton_fwhm_ev, cfg.bare_film_efficiency, grid);
      stack = cavity.bare_film_stack();
      info = {{"fixture", "bare-film"}};
      break;
    case Fixture::empty:
      s = empty_cavity_scattering(grid, cfg.law.noise_floor, cfg.seed);
      stack = cavity.undoped().stack();
      info = {{"fixture", "empty"}};
      break;
  }
  const auto rt = spectrum_sweep(stack, grid);
  const Spectrum clipped = clip_to_balance(rt.reflectance, rt.transmittance, s);
  const Spectrum a = energy_balance(rt.reflectance, rt.transmittance, clipped);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    worst = std::max(worst, std::abs(rt.reflectance.values[i] + rt.transmittance.values[i] + clipped.values[i] +
                                     a.values[i] - 1.0));

  const auto peak_at = std::max_element(clipped.values.begin(), clipped.values.end());
  Outputs out;
  out.add("scattering.csv", io::format_spectrum_csv(clipped));
  out.add("reflectance.csv", io::format_spectrum_csv(rt.reflectance));
  out.add("transmittance.csv", io::format_spectrum_csv(rt.transmittance));
  out.add("absorbance_balance.csv", io::format_spectrum_csv(a));
  info["film_nm"] = cavity.film_nm;
  info["max_scattering"] = max_value(clipped);
  info["max_scattering_energy_ev"] =
      grid.empty() ? 0.0 : grid[static_cast<std::size_t>(peak_at - clipped.values.begin())];
  info["balance_residual"] = worst;
  out.summary = info;
  out.summary["command"] = "synth-scatter";
  out.add_json("synth_scatter.json", out.summary);
  out.add_json("manifest.json", manifest("synth-scatter", cfg, {}, out));
  return out;
}

// --- fit-spectrum ---------------------------------------------------------

inline json two_peak_json(const TwoPeakFit& fit) {
  const auto rel = relative_strengths(fit);
  return json{{"upper", peak_json(fit.upper)},
              {"lower", peak_json(fit.lower)},
              {"baseline", fit.baseline},
              {"sigma_u", rel.upper},
              {"sigma_l", rel.lower},
              {"cost", fit.fit.cost},
              {"iterations", fit.fit.iterations},
              {"status", to_string(fit.fit.status)}};
}

inline Outputs fit_spectrum(const RunConfig& cfg, const std::string& csv_text, const std::string& source) {
  std::istringstream in(csv_text);
  const Spectrum spec = io::parse_spectrum_csv(in, source).as_spectrum(Channel::S);
  const TwoPeakFit fit = fit_two_peaks(spec, cfg.fit.max_iterations);
  Outputs out;
  Spectrum curve{spec.energies, std::vector<double>(spec.size()), Channel::raw};
  for (std::size_t i = 0; i < spec.size(); ++i) curve.values[i] = fit.eval(spec.energies[i]);
  out.add("fit_curve.csv", io::format_spectrum_csv(curve));
  out.summary = two_peak_json(fit);
  out.summary["command"] = "fit-spectrum";
  out.add_json("fit_spectrum.json", out.summary);
  out.add_json("manifest.json", manifest("fit-spectrum", cfg, {csv_text}, out));
  return out;
}

// --- fit-dispersion -------------------------------------------------------

inline CouplingFitOptions coupling_options(const RunConfig& cfg, bool free_cavity) {
  return {cfg.cavity.exciton_ev, cfg.coupling.cavity_fwhm_ev, cfg.coupling.exciton_fwhm_ev, free_cavity,
          cfg.fit.max_iterations};
}

inline json coupling_json(const DetuningSeries& series, const CouplingFit& fit, double exciton_ev) {
  json points = json::array();
  for (std::size_t i = 0; i < series.records.size(); ++i) {
    const double detuning = fit.cavity_ev[i] - exciton_ev;
    const auto w = hopfield_photon_weights(detuning, fit.coupling_ev);
    points.push_back({{"detuning_ev", detuning},
                      {"e_upper_ev", series.records[i].upper_ev},
                      {"e_lower_ev", series.records[i].lower_ev},
                      {"photon_weight_u", w.upper},
                      {"photon_weight_l", w.lower}});
  }
  return json{{"coupling_ev", fit.coupling_ev},
              {"coupling_uncertainty_ev", fit.fit.uncertainty[0]},
              {"rabi_splitting_ev", 2.0 * fit.coupling_ev},
              {"residual_rms_ev", fit.rms_ev},
              {"iterations", fit.fit.iterations},
              {"status", to_string(fit.fit.status)},
              {"points", points}};
}

inline Outputs fit_dispersion(const RunConfig& cfg, const std::string& csv_text, const std::string& source) {
  std::istringstream in(csv_text);
  const DetuningSeries series = io::parse_series_csv(in, source);
  const CouplingFit fit = fit_coupling(series, coupling_options(cfg, cfg.fit.free_cavity_energies));
  Outputs out;
  out.summary = coupling_json(series, fit, cfg.cavity.exciton_ev);
  out.summary["command"] = "fit-dispersion";
  out.add_json("fit_dispersion.json", out.summary);
  out.add_json("manifest.json", manifest("fit-dispersion", cfg, {csv_text}, out));
  return out;
}

// --- hopfield -------------------------------------------------------------

inline json regression_json(const HopfieldRegression& r) {
  return json{{"slope", r.slope}, {"intercept", r.intercept}, {"rms", r.rms}};
}

inline Outputs hopfield(const RunConfig& cfg, const std::string& csv_text, const std::string& source,
                        double coupling_ev) {
  std::istringstream in(csv_text);
  const DetuningSeries series = io::parse_series_csv(in, source);
  if (!series.has_strengths())
    throw Error(ErrorCode::schema, source + ": series has no sigma_u/sigma_l columns");
  const auto reg = hopfield_regression(series, coupling_ev);
  Outputs out;
  out.summary = json{{"command", "hopfield"},
                     {"coupling_ev", coupling_ev},
                     {"upper", regression_json(reg.upper)},
                     {"lower", regression_json(reg.lower)}};
  try {
    out.summary["crossing_detuning_ev"] = find_crossing_detuning(series);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_crossing) throw;
    out.summary["crossing_detuning_ev"] = nullptr;
  }
  std::string points = "photon_weight_u,sigma_u,photon_weight_l,sigma_l\n";
  for (std::size_t i = 0; i < series.records.size(); ++i) {
    points += io::detail::format_number(reg.upper.points[i].photon_weight) + ',' +
              io::detail::format_number(reg.upper.points[i].strength) + ',' +
              io::detail::format_number(reg.lower.points[i].photon_weight) + ',' +
              io::detail::format_number(reg.lower.points[i].strength) + '\n';
  }
  out.add("hopfield_points.csv", points);
  out.add_json("hopfield.json", out.summary);
  out.add_json("manifest.json", manifest("hopfield", cfg, {csv_text}, out));
  return out;
}

// --- sweep ----------------------------------------------------------------

struct SweepPoint {
  double parameter = 0.0;
  double film_nm = 0.0;
  double cavity_ev = 0.0;
  std::optional<BranchEnergies> dips;
  std::optional<TwoPeakFit> scattering;
  std::optional<RelativeStrengths> strengths;
  std::string flag;  ///< empty when the point resolved cleanly
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<RegressionPoint> pts;
  for (std::size_t i = 0; i < x.size(); ++i) pts.push_back({x[i], y[i]});
  const auto reg = ordinary_least_squares(pts);
  double my = 0.0;
  for (double v : y) my += v;
  my /= static_cast<double>(y.size());
  double ss_tot = 0.0;
  for (double v : y) ss_tot += (v - my) * (v - my);
  const double ss_res = reg.rms * reg.rms * static_cast<double>(y.size());
  return {reg.slope, reg.intercept, ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

inline std::string point_name(const char* stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "points/%s_%02zu.csv", stem, i);
  return buf;
}

inline Outputs sweep(const RunConfig& cfg) {
  const auto cavities = sweep_cavities(cfg);
  const auto grid = cfg.grid.points();
  const bool by_concentration = cfg.sweep.kind == SweepKind::concentrations;
  Outputs out;
  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < cavities.size(); ++i) {
    const Cavity& cav = cavities[i];
    SweepPoint pt;
    pt.parameter = cfg.sweep.values[i];
    pt.film_nm = cav.film_nm;
    pt.cavity_ev = cavity_resonance(cav);
    const auto rt = spectrum_sweep(cav.stack(), grid);
    out.add(point_name("reflectance", i), io::format_spectrum_csv(rt.reflectance));
    try {
      pt.dips = extract_branch_energies(rt.reflectance, ExtremumKind::dips);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::unresolved_splitting) throw;
      pt.flag = "unresolved-splitting";
    }
    // coupling follows the square root of concentration relative to the configured sample
    double coupling = cfg.coupling.coupling_ev;
    if (by_concentration) {
      coupling = cfg.cavity.concentration_mm > 0.0
                     ? cfg.coupling.coupling_ev * std::sqrt(cav.concentration_mm / cfg.cavity.concentration_mm)
                     : 0.0;
    }
    try {
      const auto synth =
          synthesize_scattering(oscillator_for(cfg, pt.cavity_ev, coupling), cfg.law, grid, cfg.seed + i);
      out.add(point_name("scattering", i), io::format_spectrum_csv(synth.spectrum));
      pt.scattering = fit_two_peaks(synth.spectrum, cfg.fit.max_iterations);
      pt.strengths = relative_strengths(*pt.scattering);
    } catch (const Error& e) {
      if (category_of(e.code()) != ErrorCategory::fit && e.code() != ErrorCode::undefined_ratio &&
          e.code() != ErrorCode::undefined_mixture)
        throw;
      if (pt.flag.empty()) pt.flag = to_string(e.code());
    }
    points.push_back(std::move(pt));
  }

  json records = json::array();
  for (const auto& pt : points) {
    json r{{"parameter", pt.parameter}, {"film_nm", pt.film_nm}, {"cavity_ev", pt.cavity_ev}};
    r["detuning_ev"] = pt.cavity_ev - cfg.cavity.exciton_ev;
    r["e_upper_ev"] = pt.dips ? json(pt.dips->upper_ev) : json(nullptr);
    r["e_lower_ev"] = pt.dips ? json(pt.dips->lower_ev) : json(nullptr);
    if (pt.scattering) {
      r["scatter_upper_ev"] = pt.scattering->upper.centre_ev;
      r["scatter_lower_ev"] = pt.scattering->lower.centre_ev;
    }
    r["sigma_u"] = pt.strengths ? json(pt.strengths->upper) : json(nullptr);
    r["sigma_l"] = pt.strengths ? json(pt.strengths->lower) : json(nullptr);
    r["flag"] = pt.flag.empty() ? json(nullptr) : json(pt.flag);
    records.push_back(r);
  }
  out.summary = json{{"command", "sweep"}, {"points", records}};

  if (by_concentration) {
    std::string csv = "concentration_mm,sqrt_concentration,e_upper_ev,e_lower_ev,splitting_ev\n";
    std::vector<double> x, y;
    for (const auto& pt : points) {
      if (!pt.dips) continue;
      using io::detail::format_number;
      csv += format_number(pt.parameter) + ',' + format_number(std::sqrt(pt.parameter)) + ',' +
             format_number(pt.dips->upper_ev) + ',' + format_number(pt.dips->lower_ev) + ',' +
             format_number(pt.dips->splitting()) + '\n';
      x.push_back(std::sqrt(pt.parameter));
      y.push_back(pt.dips->splitting());
    }
    out.add("concentration_series.csv", csv);
    if (x.size() >= 2) {
      const auto lf = linear_fit(x, y);
      out.summary["sqrt_law"] = {{"slope_ev_per_sqrt_mm", lf.slope}, {"intercept_ev", lf.intercept}, {"r_squared", lf.r_squared}};
    }
  } else {
    DetuningSeries series;
    for (const auto& pt : points) {
      if (!pt.dips) continue;
      DetuningRecord rec{pt.cavity_ev - cfg.cavity.exciton_ev, pt.dips->upper_ev, pt.dips->lower_ev, std::nullopt,
                         std::nullopt};
      if (pt.strengths) {
        rec.sigma_upper = pt.strengths->upper;
        rec.sigma_lower = pt.strengths->lower;
      }
      series.records.push_back(rec);
    }
    // drop strengths everywhere if any resolved point lacks them, so the CSV stays rectangular
    if (!series.has_strengths())
      for (auto& r : series.records) r.sigma_upper = r.sigma_lower = std::nullopt;
    series.validate();
    out.add("series.csv", io::format_series_csv(series));
  }
  out.add_json("sweep.json", out.summary);
  out.add_json("manifest.json", manifest("sweep", cfg, {}, out));
  return out;
}

// --- report ---------------------------------------------------------------

/// Full reproduction: forward spectra, scattering fixtures, line-shape fit,
/// detuning and concentration sweeps, coupling fit and photon-weight regression.
inline Outputs report(const RunConfig& cfg) {
  if (cfg.sweep.kind != SweepKind::detunings && cfg.sweep.kind != SweepKind::thicknesses)
    throw Error(ErrorCode::schema, "report needs a detunings_ev or thicknesses_nm sweep");
  Outputs out;
  const Outputs sim = simulate(cfg);
  out.merge(sim, "simulate/");
  json fixtures = json::object();
  for (const auto& [name, fixture] :
       {std::pair{"coupled", Fixture::coupled}, std::pair{"bare-film", Fixture::bare_film}, std::pair{"empty", Fixture::empty}}) {
    const Outputs syn = synth_scatter(cfg, fixture);
    out.merge(syn, std::string("synth-") + name + "/");
    fixtures[name] = {{"max_scattering", syn.summary["max_scattering"]},
                      {"max_scattering_energy_ev", syn.summary["max_scattering_energy_ev"]},
                      {"balance_residual", syn.summary["balance_residual"]}};
  }
  const std::string coupled_csv = out.files.at("synth-coupled/scattering.csv");
  const Outputs spec_fit = fit_spectrum(cfg, coupled_csv, "synth-coupled/scattering.csv");
  out.merge(spec_fit, "fit-spectrum/");

  const Outputs sw = sweep(cfg);
  out.merge(sw, "sweep/");
  RunConfig conc = cfg;
  conc.sweep = {SweepKind::concentrations, {17.0, 34.0, 56.0, 85.0, 170.0}};
  const Outputs conc_sweep = sweep(conc);
  out.merge(conc_sweep, "concentration/");

  const std::string series_csv = out.files.at("sweep/series.csv");
  const Outputs disp = fit_dispersion(cfg, series_csv, "sweep/series.csv");
  out.merge(disp, "fit-dispersion/");
  const double coupling = disp.summary["coupling_ev"].get<double>();
  json hop = nullptr;
  if (sw.summary["points"].size() > 0 && series_csv.rfind(io::series_header, 0) == 0) {
    const Outputs h = hopfield(cfg, series_csv, "sweep/series.csv", coupling);
    out.merge(h, "hopfield/");
    hop = h.summary;
  }

  json dips = sim.summary["reflectance_dips"];
  out.summary = json{{"command", "report"},
                     {"reflectance_dips", dips},
                     {"fixtures", fixtures},
                     {"coupled_fit", {{"sigma_u", spec_fit.summary["sigma_u"]}, {"sigma_l", spec_fit.summary["sigma_l"]}}},
                     {"sqrt_law", conc_sweep.summary.value("sqrt_law", json(nullptr))},
                     {"coupling_ev", coupling},
                     {"coupling_rms_ev", disp.summary["residual_rms_ev"]},
                     {"hopfield", hop}};
  out.add_json("summary.json", out.summary);
  out.add_json("manifest.json", manifest("report", cfg, {}, out));
  return out;
}

}  // namespace polariton::pipeline
