#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "polariton/dispersion.hpp"
#include "polariton/error.hpp"
#include "polariton/spectrum.hpp"

namespace polariton::io {

struct Metadata {
  std::string sample_id;
  Channel channel = Channel::raw;
};

/// Counts as read from disk, before normalisation.
struct RawMeasurement {
  std::vector<double> energies;
  std::vector<double> counts;
  Metadata metadata;

  Spectrum as_spectrum(Channel channel = Channel::raw) const { return {energies, counts, channel}; }
};

inline constexpr std::string_view spectrum_header = "energy_ev,value";
inline constexpr std::string_view series_header = "detuning_ev,e_upper_ev,e_lower_ev,sigma_u,sigma_l";
inline constexpr std::string_view series_header_short = "detuning_ev,e_upper_ev,e_lower_ev";

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view field, std::size_t line_no, const std::string& source) {
  field = trim(field);
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
    throw Error(ErrorCode::parse, source + ": line " + std::to_string(line_no) + ": cannot parse number '" +
                                      std::string(field) + "'");
  return value;
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Data rows of a CSV with the given header; empty lines are skipped.
template <typename RowFn>
void for_each_row(std::istream& in, const std::string& source, std::vector<std::string_view> headers, RowFn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, source + ": missing header");
  ++line_no;
  const auto header = trim(line);
  const auto which = std::find(headers.begin(), headers.end(), header);
  if (which == headers.end())
    throw Error(ErrorCode::parse, source + ": line 1: unexpected header '" + std::string(header) + "'");
  const std::size_t columns = split_commas(*which).size();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != columns)
      throw Error(ErrorCode::parse, source + ": line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
    std::vector<double> values;
    for (auto f : fields) values.push_back(parse_number(f, line_no, source));
    fn(values, line_no);
  }
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  return out;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace detail

inline RawMeasurement parse_spectrum_csv(std::istream& in, const std::string& source = "<stream>") {
  RawMeasurement out;
  out.metadata.sample_id = source;
  detail::for_each_row(in, source, {spectrum_header}, [&](const std::vector<double>& v, std::size_t line_no) {
    if (!out.energies.empty() && !(v[0] > out.energies.back()))
      throw Error(ErrorCode::order, source + ": line " + std::to_string(line_no) + ": energy grid not increasing");
    if (v[1] < 0.0)
      throw Error(ErrorCode::parse, source + ": line " + std::to_string(line_no) + ": negative value");
    out.energies.push_back(v[0]);
    out.counts.push_back(v[1]);
  });
  return out;
}

inline RawMeasurement read_spectrum_csv(const std::filesystem::path& path) {
  auto in = detail::open_for_read(path);
  auto out = parse_spectrum_csv(in, path.string());
  out.metadata.sample_id = path.stem().string();
  return out;
}

inline std::string format_spectrum_csv(const Spectrum& spec) {
  std::string out(spectrum_header);
  out += '\n';
  for (std::size_t i = 0; i < spec.size(); ++i) {
    out += detail::format_number(spec.energies[i]);
    out += ',';
    out += detail::format_number(spec.values[i]);
    out += '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = detail::open_for_write(path);
  out << text;
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
  auto in = detail::open_for_read(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_spectrum_csv(const Spectrum& spec, const std::filesystem::path& path) {
  write_text(path, format_spectrum_csv(spec));
}

inline DetuningSeries parse_series_csv(std::istream& in, const std::string& source = "<stream>") {
  DetuningSeries out;
  detail::for_each_row(in, source, {series_header, series_header_short},
                       [&](const std::vector<double>& v, std::size_t) {
                         DetuningRecord r{v[0], v[1], v[2], std::nullopt, std::nullopt};
                         if (v.size() == 5) {
                           r.sigma_upper = v[3];
                           r.sigma_lower = v[4];
                         }
                         out.records.push_back(r);
                       });
  out.validate();
  return out;
}

inline DetuningSeries read_series_csv(const std::filesystem::path& path) {
  auto in = detail::open_for_read(path);
  return parse_series_csv(in, path.string());
}

/// Short header when no record carries strengths, full header otherwise.
inline std::string format_series_csv(const DetuningSeries& series) {
  const bool full = series.has_strengths();
  std::string out(full ? series_header : series_header_short);
  out += '\n';
  for (const auto& r : series.records) {
    out += detail::format_number(r.detuning_ev) + ',' + detail::format_number(r.upper_ev) + ',' +
           detail::format_number(r.lower_ev);
    if (full) out += ',' + detail::format_number(*r.sigma_upper) + ',' + detail::format_number(*r.sigma_lower);
    out += '\n';
  }
  return out;
}

inline void write_series_csv(const DetuningSeries& series, const std::filesystem::path& path) {
  write_text(path, format_series_csv(series));
}

struct NormalizedSpectrum {
  Spectrum spectrum;
  std::vector<bool> clipped;  ///< ratio fell outside [0, 1.2] before clipping
  std::size_t clipped_count() const { return static_cast<std::size_t>(std::count(clipped.begin(), clipped.end(), true)); }
};

/// sample / reference on the sample points inside the reference's range,
/// with the reference linearly interpolated.
inline NormalizedSpectrum normalize(const RawMeasurement& sample, const RawMeasurement& reference,
                                    Channel channel = Channel::raw) {
  const auto& rx = reference.energies;
  const auto& ry = reference.counts;
  if (rx.size() < 2 && !(rx.size() == 1 && sample.energies.size() == 1 && sample.energies[0] == rx[0]))
    throw Error(ErrorCode::bad_reference, "reference needs at least two points");
  const double rmax = ry.empty() ? 0.0 : *std::max_element(ry.begin(), ry.end());
  const double threshold = 1e-6 * rmax;
  NormalizedSpectrum out;
  out.spectrum.channel = channel;
  for (std::size_t i = 0; i < sample.energies.size(); ++i) {
    const double e = sample.energies[i];
    if (e < rx.front() || e > rx.back()) continue;
    const auto hi_it = std::lower_bound(rx.begin(), rx.end(), e);
    const auto hi = static_cast<std::size_t>(hi_it - rx.begin());
    double ref;
    if (rx[hi] == e) {
      ref = ry[hi];
    } else {
      const std::size_t lo = hi - 1;
      const double t = (e - rx[lo]) / (rx[hi] - rx[lo]);
      ref = ry[lo] + t * (ry[hi] - ry[lo]);
    }
    if (!(ref > threshold))
      throw Error(ErrorCode::bad_reference, "reference vanishes at " + detail::format_number(e) + " eV");
    const double ratio = sample.counts[i] / ref;
    const bool out_of_range = ratio < 0.0 || ratio > 1.2;
    out.spectrum.energies.push_back(e);
    out.spectrum.values.push_back(std::clamp(ratio, 0.0, 1.2));
    out.clipped.push_back(out_of_range);
  }
  if (out.spectrum.empty()) throw Error(ErrorCode::bad_reference, "sample and reference grids do not overlap");
  return out;
}

}  // namespace polariton::io
