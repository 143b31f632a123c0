#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polariton/dielectric.hpp"
#include "polariton/error.hpp"
#include "polariton/scattermodel.hpp"
#include "polariton/tmm.hpp"

namespace polariton {

/// Oscillator strength per mM of dye that puts 140 meV between the dips of
/// the default cavity at 56 mM when tuned to the exciton.
inline constexpr double default_strength_per_mm = 8.50406296726e-4;

inline constexpr int config_version = 1;

struct GridSpec {
  double min_ev = 1.8;
  double max_ev = 2.4;
  double step_ev = 0.001;
  std::vector<double> points() const { return make_grid(min_ev, max_ev, step_ev); }
};

enum class SweepKind { none, concentrations, detunings, thicknesses };

struct SweepSpec {
  SweepKind kind = SweepKind::none;
  std::vector<double> values;
};

/// Coupled-oscillator parameters for scattering synthesis. The default
/// coupling matches the calibrated cavity's 140 meV dip splitting.
struct CouplingSpec {
  double coupling_ev = 0.070;
  double cavity_fwhm_ev = 0.060;
  double exciton_fwhm_ev = 0.040;
};

struct FitOptions {
  int max_iterations = 500;
  bool free_cavity_energies = true;
};

struct RunConfig {
  int version = config_version;
  std::uint64_t seed = 1;
  GridSpec grid;
  Cavity cavity;
  /// Undoped-cavity resonance to tune the film to when film_nm is not given.
  std::optional<double> resonance_ev;
  std::optional<Stack> stack;
  SweepSpec sweep;
  CouplingSpec coupling;
  ScatteringLaw law;
  double bare_film_efficiency = 0.18;
  FitOptions fit;
  nlohmann::json source;  ///< validated input after overrides
};

namespace detail {

/// Reads keys from one JSON object and rejects whatever is left unread.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("must be an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  double number(const std::string& key, double fallback) {
    if (!obj_.contains(key)) return fallback;
    return number(key);
  }

  double number(const std::string& key) {
    const auto& v = take(key);
    if (!v.is_number()) fail(key + " must be a number");
    return v.get<double>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!obj_.contains(key)) return fallback;
    const auto& v = take(key);
    if (!v.is_boolean()) fail(key + " must be a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const auto& v = take(key);
    if (!v.is_string()) fail(key + " must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = take(key);
    if (!v.is_array()) fail(key + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key + " must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  const nlohmann::json& child(const std::string& key) { return take(key); }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!used_.count(it.key())) fail("unknown key '" + it.key() + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::schema, (path_.empty() ? std::string("config") : path_) + ": " + what);
  }

 private:
  const nlohmann::json& take(const std::string& key) {
    if (!obj_.contains(key)) fail("missing required key '" + key + "'");
    used_.insert(key);
    return obj_.at(key);
  }

  const nlohmann::json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

inline double positive(ObjectReader& r, const std::string& key, double fallback) {
  const double v = r.number(key, fallback);
  if (!(v > 0.0)) r.fail(key + " must be positive");
  return v;
}

inline double nonnegative(ObjectReader& r, const std::string& key, double fallback) {
  const double v = r.number(key, fallback);
  if (!(v >= 0.0)) r.fail(key + " must be nonnegative");
  return v;
}

inline DielectricModel parse_model(ObjectReader& r) {
  const std::string name = r.string("model");
  DielectricModel m;
  if (name == "constant") {
    m = model::Constant{r.number("eps")};
  } else if (name == "lorentz") {
    model::Lorentz l;
    l.eps_b = r.number("eps_b", l.eps_b);
    l.resonance_ev = r.number("resonance_ev", l.resonance_ev);
    l.fwhm_ev = r.number("fwhm_ev", l.fwhm_ev);
    l.strength_ev2 = r.number("strength_ev2", l.strength_ev2);
    m = l;
  } else if (name == "drude") {
    model::Drude d;
    d.eps_inf = r.number("eps_inf", d.eps_inf);
    d.plasma_ev = r.number("plasma_ev", d.plasma_ev);
    d.damping_ev = r.number("damping_ev", d.damping_ev);
    m = d;
  } else {
    r.fail("unknown model '" + name + "'");
  }
  try {
    validate(m);
  } catch (const Error& e) {
    r.fail(e.what());
  }
  return m;
}

}  // namespace detail

/// Replaces the value at a dotted path; the value text is read as JSON when
/// it parses and as a plain string otherwise.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorCode::schema, "override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorCode::schema, "override key '" + key + "' has an empty component");
    if (!node->is_object()) throw Error(ErrorCode::schema, "override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

/// Validates a parsed document against the run schema and applies defaults.
inline RunConfig parse_config(const nlohmann::json& doc) {
  using detail::ObjectReader;
  RunConfig cfg;
  ObjectReader top(doc, "");
  const double version = top.number("version");
  if (version != config_version) top.fail("unsupported version " + nlohmann::json(version).dump());
  cfg.version = config_version;
  {
    const double seed = top.number("seed", 1.0);
    if (seed < 0.0 || seed != std::floor(seed) || seed > 9.007199254740992e15) top.fail("seed must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }

  if (top.has("grid")) {
    ObjectReader g(top.child("grid"), "grid");
    cfg.grid.min_ev = detail::positive(g, "min_ev", cfg.grid.min_ev);
    cfg.grid.max_ev = detail::positive(g, "max_ev", cfg.grid.max_ev);
    cfg.grid.step_ev = detail::positive(g, "step_ev", cfg.grid.step_ev);
    if (!(cfg.grid.max_ev > cfg.grid.min_ev)) g.fail("max_ev must exceed min_ev");
    g.finish();
  }

  cfg.cavity.strength_per_mm = default_strength_per_mm;
  cfg.cavity.concentration_mm = 56.0;
  bool film_given = false;
  if (top.has("cavity")) {
    ObjectReader c(top.child("cavity"), "cavity");
    auto& cav = cfg.cavity;
    cav.ambient_index = detail::positive(c, "ambient_index", cav.ambient_index);
    cav.substrate_index = detail::positive(c, "substrate_index", cav.substrate_index);
    cav.top_mirror_nm = detail::nonnegative(c, "top_mirror_nm", cav.top_mirror_nm);
    cav.bottom_mirror_nm = detail::nonnegative(c, "bottom_mirror_nm", cav.bottom_mirror_nm);
    if (c.has("film_nm")) {
      cav.film_nm = detail::nonnegative(c, "film_nm", cav.film_nm);
      film_given = true;
    }
    if (c.has("resonance_ev")) cfg.resonance_ev = detail::positive(c, "resonance_ev", 2.11);
    cav.host_eps = detail::positive(c, "host_eps", cav.host_eps);
    cav.exciton_ev = detail::positive(c, "exciton_ev", cav.exciton_ev);
    cav.exciton_fwhm_ev = detail::positive(c, "exciton_fwhm_ev", cav.exciton_fwhm_ev);
    cav.strength_per_mm = detail::nonnegative(c, "strength_per_mm", cav.strength_per_mm);
    cav.concentration_mm = detail::nonnegative(c, "concentration_mm", cav.concentration_mm);
    if (c.has("mirror")) {
      ObjectReader m(c.child("mirror"), c.child_path("mirror"));
      cav.mirror = detail::parse_model(m);
      m.finish();
    }
    if (film_given && cfg.resonance_ev) c.fail("give either film_nm or resonance_ev, not both");
    c.finish();
  }
  if (!film_given && !cfg.resonance_ev) cfg.resonance_ev = cfg.cavity.exciton_ev;

  if (top.has("stack")) {
    const auto& layers = top.child("stack");
    if (!layers.is_array()) top.fail("stack must be an array of layers");
    Stack s;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      ObjectReader l(layers[i], "stack[" + std::to_string(i) + "]");
      const bool bounding = (i == 0 || i + 1 == layers.size());
      if (bounding && l.has("thickness_nm")) l.fail("bounding layers are semi-infinite and take no thickness");
      Layer layer;
      layer.semi_infinite = bounding;
      if (!bounding) {
        layer.thickness_nm = l.number("thickness_nm");
        if (!(layer.thickness_nm >= 0.0) || !std::isfinite(layer.thickness_nm)) l.fail("thickness_nm must be nonnegative");
      }
      layer.model = detail::parse_model(l);
      l.finish();
      s.layers.push_back(std::move(layer));
    }
    try {
      s.validate();
    } catch (const Error& e) {
      top.fail(std::string("stack: ") + e.what());
    }
    cfg.stack = std::move(s);
  }

  if (top.has("sweep")) {
    ObjectReader s(top.child("sweep"), "sweep");
    int kinds = 0;
    for (const auto& [key, kind] : {std::pair{"concentrations_mm", SweepKind::concentrations},
                                    std::pair{"detunings_ev", SweepKind::detunings},
                                    std::pair{"thicknesses_nm", SweepKind::thicknesses}}) {
      if (s.has(key)) {
        cfg.sweep.kind = kind;
        cfg.sweep.values = s.numbers(key);
        ++kinds;
      }
    }
    if (kinds != 1) s.fail("exactly one of concentrations_mm, detunings_ev, thicknesses_nm is required");
    if (cfg.sweep.values.empty()) s.fail("sweep list is empty");
    for (double v : cfg.sweep.values) {
      if (!std::isfinite(v)) s.fail("sweep values must be finite");
      if (cfg.sweep.kind != SweepKind::detunings && v < 0.0) s.fail("sweep values must be nonnegative");
    }
    std::set<double> unique(cfg.sweep.values.begin(), cfg.sweep.values.end());
    if (unique.size() != cfg.sweep.values.size()) s.fail("sweep values must be distinct");
    s.finish();
  }

  if (top.has("coupling")) {
    ObjectReader c(top.child("coupling"), "coupling");
    cfg.coupling.coupling_ev = detail::nonnegative(c, "coupling_ev", cfg.coupling.coupling_ev);
    cfg.coupling.cavity_fwhm_ev = detail::nonnegative(c, "cavity_fwhm_ev", cfg.coupling.cavity_fwhm_ev);
    cfg.coupling.exciton_fwhm_ev = detail::nonnegative(c, "exciton_fwhm_ev", cfg.coupling.exciton_fwhm_ev);
    c.finish();
  }

  if (top.has("scattering")) {
    ObjectReader s(top.child("scattering"), "scattering");
    auto& law = cfg.law;
    law.peak_efficiency = s.number("peak_efficiency", law.peak_efficiency);
    law.slope = s.number("slope", law.slope);
    law.offset_upper = s.number("offset_upper", law.offset_upper);
    law.offset_lower = s.number("offset_lower", law.offset_lower);
    law.width_ev = s.number("width_ev", law.width_ev);
    law.skew_upper = s.number("skew_upper", law.skew_upper);
    law.skew_lower = s.number("skew_lower", law.skew_lower);
    law.noise_floor = s.number("noise_floor", law.noise_floor);
    cfg.bare_film_efficiency = s.number("bare_film_efficiency", cfg.bare_film_efficiency);
    if (!(cfg.bare_film_efficiency >= 0.0 && cfg.bare_film_efficiency <= 1.0))
      s.fail("bare_film_efficiency must lie in [0, 1]");
    try {
      law.validate();
    } catch (const Error& e) {
      s.fail(e.what());
    }
    s.finish();
  }

  if (top.has("fit")) {
    ObjectReader f(top.child("fit"), "fit");
    const double iters = f.number("max_iterations", cfg.fit.max_iterations);
    if (!(iters >= 1.0) || iters != std::floor(iters)) f.fail("max_iterations must be a positive integer");
    cfg.fit.max_iterations = static_cast<int>(iters);
    cfg.fit.free_cavity_energies = f.boolean("free_cavity_energies", cfg.fit.free_cavity_energies);
    f.finish();
  }

  top.finish();
  cfg.source = doc;
  return cfg;
}

inline RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {}) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false, true);
  if (doc.is_discarded()) throw Error(ErrorCode::schema, "config is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

/// The configured cavity with its film thickness resolved.
inline Cavity resolved_cavity(const RunConfig& cfg) {
  Cavity c = cfg.cavity;
  if (cfg.resonance_ev) c.film_nm = find_cavity_thickness(c, *cfg.resonance_ev);
  return c;
}

/// The stack to simulate: the explicit one if given, else the cavity.
inline Stack simulation_stack(const RunConfig& cfg) {
  return cfg.stack ? *cfg.stack : resolved_cavity(cfg).stack();
}

/// One cavity per sweep point. Detunings are realised by tuning the film
/// thickness to exciton + detuning.
inline std::vector<Cavity> sweep_cavities(const RunConfig& cfg) {
  std::vector<Cavity> out;
  switch (cfg.sweep.kind) {
    case SweepKind::none:
      throw Error(ErrorCode::schema, "config has no sweep section");
    case SweepKind::concentrations: {
      const Cavity base = resolved_cavity(cfg);
      for (double c : cfg.sweep.values) out.push_back(base.with_concentration(c));
      break;
    }
    case SweepKind::detunings:
      for (double d : cfg.sweep.values)
        out.push_back(cfg.cavity.with_film(find_cavity_thickness(cfg.cavity, cfg.cavity.exciton_ev + d)));
      break;
    case SweepKind::thicknesses:
      for (double t : cfg.sweep.values) out.push_back(cfg.cavity.with_film(t));
      break;
  }
  return out;
}

}  // namespace polariton
