#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "polariton/pipeline.hpp"

namespace polariton::cli {

enum ExitCode : int { ok = 0, schema_error = 2, fit_failure = 3, io_error = 4 };

inline int exit_code_for(const Error& e) {
  switch (category_of(e.code())) {
    case ErrorCategory::fit: return fit_failure;
    case ErrorCategory::io: return io_error;
    case ErrorCategory::schema:
    case ErrorCategory::domain: return schema_error;
  }
  return schema_error;
}

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool quiet = false;
  std::string input;
  std::string fixture = "coupled";
  std::optional<double> coupling_ev;
  std::string dispersion_report;
};

inline RunConfig load_config(const Options& opt) {
  std::string text = R"({"version": 1})";
  if (!opt.config_path.empty()) text = io::read_text(opt.config_path);
  auto overrides = opt.overrides;
  if (opt.seed) overrides.push_back("seed=" + std::to_string(*opt.seed));
  return parse_config(text, overrides);
}

inline std::string require_input(const Options& opt) {
  if (opt.input.empty()) throw Error(ErrorCode::schema, "--input is required");
  if (!std::filesystem::is_regular_file(opt.input))
    throw Error(ErrorCode::io, "input '" + opt.input + "' does not exist");
  return io::read_text(opt.input);
}

inline double coupling_for_hopfield(const Options& opt, const RunConfig& cfg) {
  if (opt.coupling_ev) return *opt.coupling_ev;
  if (!opt.dispersion_report.empty()) {
    const auto doc = nlohmann::json::parse(io::read_text(opt.dispersion_report), nullptr, false);
    if (doc.is_discarded() || !doc.contains("coupling_ev") || !doc["coupling_ev"].is_number())
      throw Error(ErrorCode::schema, "'" + opt.dispersion_report + "' has no numeric coupling_ev");
    return doc["coupling_ev"].get<double>();
  }
  return cfg.coupling.coupling_ev;
}

/// Parses argv, runs one subcommand, writes its outputs under --out-dir and
/// returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Strongly coupled dye-microcavity spectra: simulation, synthesis and fitting", "polariton"};
  app.require_subcommand(1);
  Options opt;
  std::string seed_text;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Run configuration (JSON)");
    sub->add_option("--out-dir", opt.out_dir, "Directory for output files");
    sub->add_option("--seed", seed_text, "Override the configured seed");
    sub->add_option("--set", opt.overrides, "Override a config value, key=value with dotted keys");
    sub->add_flag("--quiet", opt.quiet, "Do not print the summary");
  };
  auto* simulate = app.add_subcommand("simulate", "Reflectance, transmittance and absorbance of the configured stack");
  auto* synth = app.add_subcommand("synth-scatter", "Synthesize a scattering spectrum and the four-channel balance");
  auto* fit_spec = app.add_subcommand("fit-spectrum", "Fit two skewed Gaussians to a scattering spectrum");
  auto* fit_disp = app.add_subcommand("fit-dispersion", "Fit the coupling strength to a detuning series");
  auto* hop = app.add_subcommand("hopfield", "Regress relative strengths on photon weight");
  auto* sweep = app.add_subcommand("sweep", "Run the configured thickness, detuning or concentration sweep");
  auto* report = app.add_subcommand("report", "Run the full reproduction pipeline");
  for (auto* sub : {simulate, synth, fit_spec, fit_disp, hop, sweep, report}) common(sub);
  synth->add_option("--fixture", opt.fixture, "coupled, bare-film or empty");
  for (auto* sub : {fit_spec, fit_disp, hop}) sub->add_option("--input", opt.input, "Input CSV")->required();
  hop->add_option("--coupling-ev", opt.coupling_ev, "Coupling strength V in eV");
  hop->add_option("--dispersion-report", opt.dispersion_report, "Read V from a fit-dispersion report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : schema_error;
  }

  try {
    if (!seed_text.empty()) {
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(seed_text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != seed_text.size() || seed_text.front() == '-')
        throw Error(ErrorCode::schema, "--seed must be a nonnegative integer");
      opt.seed = v;
    }
    const RunConfig cfg = load_config(opt);
    pipeline::Outputs result;
    if (*simulate) {
      result = pipeline::simulate(cfg);
    } else if (*synth) {
      result = pipeline::synth_scatter(cfg, pipeline::parse_fixture(opt.fixture));
    } else if (*fit_spec) {
      result = pipeline::fit_spectrum(cfg, require_input(opt), opt.input);
    } else if (*fit_disp) {
      result = pipeline::fit_dispersion(cfg, require_input(opt), opt.input);
    } else if (*hop) {
      const std::string text = require_input(opt);
      const double coupling = coupling_for_hopfield(opt, cfg);
      result = pipeline::hopfield(cfg, text, opt.input, coupling);
    } else if (*sweep) {
      result = pipeline::sweep(cfg);
    } else if (*report) {
      result = pipeline::report(cfg);
    }
    pipeline::commit(result, opt.out_dir);
    if (!opt.quiet) out << result.summary.dump(2) << "\n";
    return ok;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return io_error;
  }
}

}  // namespace polariton::cli
