#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gearwave/error.hpp"
#include "gearwave/exact_wavelet.hpp"
#include "gearwave/signal.hpp"

namespace gearwave {

inline constexpr std::size_t kDefaultBins = 16;

enum class GearCondition { healthy, chipped };

inline std::string_view to_string(GearCondition c) {
  return c == GearCondition::healthy ? "healthy" : "chipped";
}

inline std::optional<GearCondition> parse_condition(std::string_view text) {
  if (text == "healthy") return GearCondition::healthy;
  if (text == "chipped") return GearCondition::chipped;
  return std::nullopt;
}

struct ScaleRange {
  double lower = 1.0;
  double upper = 32.0;
};

struct FeatureVector {
  std::string frame_id;
  std::optional<GearCondition> label;
  std::vector<std::uint32_t> bin_counts;

  std::uint64_t total() const {
    return std::accumulate(bin_counts.begin(), bin_counts.end(), std::uint64_t{0});
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Lower edge of bin k: lower + k (upper - lower) / n_bins.
inline double bin_edge(std::size_t k, std::size_t n_bins, ScaleRange range) {
  return range.lower + static_cast<double>(k) * (range.upper - range.lower) / static_cast<double>(n_bins);
}

/// Index of the half-open bin [edge k, edge k+1) holding `scale`; the last bin
/// is closed above. Agrees with bin_edge() exactly on edges.
inline std::size_t bin_index(double scale, std::size_t n_bins, ScaleRange range) {
  if (!(scale >= range.lower && scale <= range.upper)) {
    throw Error("scale " + std::to_string(scale) + " outside histogram range [" +
                std::to_string(range.lower) + ", " + std::to_string(range.upper) + "]");
  }
  const double width = (range.upper - range.lower) / static_cast<double>(n_bins);
  auto k = static_cast<std::size_t>(std::floor((scale - range.lower) / width));
  k = std::min(k, n_bins - 1);
  while (k > 0 && scale < bin_edge(k, n_bins, range)) --k;
  while (k + 1 < n_bins && scale >= bin_edge(k + 1, n_bins, range)) ++k;
  return k;
}

inline FeatureVector scale_distribution(std::span<const double> scales,
                                        std::size_t n_bins = kDefaultBins, ScaleRange range = {}) {
  if (n_bins == 0) throw Error("histogram needs at least one bin");
  if (!(range.lower < range.upper)) throw Error("histogram range must have lower < upper");
  FeatureVector fv;
  fv.bin_counts.assign(n_bins, 0);
  for (double s : scales) ++fv.bin_counts[bin_index(s, n_bins, range)];
  return fv;
}

/// scan_frame followed by scale_distribution over the optimizer's bounds.
inline FeatureVector extract_features(const Frame& frame, const OptimizerConfig& config,
                                      std::string frame_id,
                                      std::optional<GearCondition> label = std::nullopt,
                                      unsigned threads = 1, std::size_t n_bins = kDefaultBins) {
  const auto estimates = scan_frame(frame.samples, config, threads);
  std::vector<double> scales;
  scales.reserve(estimates.size());
  for (const auto& e : estimates) scales.push_back(e.scale);
  auto fv = scale_distribution(scales, n_bins, {lower_bound_of(config), upper_bound_of(config)});
  fv.frame_id = std::move(frame_id);
  fv.label = label;
  return fv;
}

// Feature CSV: frame_id,label,bin_0..bin_{n-1}; label is empty when unknown.

inline void write_feature_csv(std::ostream& out, std::span<const FeatureVector> rows,
                              std::size_t n_bins = kDefaultBins) {
  out << "frame_id,label";
  for (std::size_t k = 0; k < n_bins; ++k) out << ",bin_" << k;
  out << '\n';
  for (const auto& row : rows) {
    if (row.bin_counts.size() != n_bins) throw Error("feature row '" + row.frame_id + "' has wrong bin count");
    if (row.frame_id.find_first_of(",\n\"") != std::string::npos)
      throw Error("frame id '" + row.frame_id + "' contains a CSV delimiter");
    out << row.frame_id << ',' << (row.label ? to_string(*row.label) : "");
    for (auto c : row.bin_counts) out << ',' << c;
    out << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline bool next_csv_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace detail

inline std::vector<FeatureVector> read_feature_csv(std::istream& in) {
  std::string line;
  if (!detail::next_csv_line(in, line)) throw ParseError("feature CSV is missing its header", 1);
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "frame_id" || header[1] != "label")
    throw ParseError("feature CSV header must start with frame_id,label,bin_0", 1);
  const std::size_t n_bins = header.size() - 2;
  for (std::size_t k = 0; k < n_bins; ++k) {
    if (header[k + 2] != "bin_" + std::to_string(k))
      throw ParseError("unexpected column '" + header[k + 2] + "'", 1);
  }

  std::vector<FeatureVector> rows;
  std::size_t line_no = 1;
  while (detail::next_csv_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    FeatureVector fv;
    fv.frame_id = fields[0];
    if (!fields[1].empty()) {
      fv.label = parse_condition(fields[1]);
      if (!fv.label) throw ParseError("unknown label '" + fields[1] + "'", line_no);
    }
    fv.bin_counts.reserve(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const auto& f = fields[k + 2];
      std::uint32_t v = 0;
      const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc{} || end != f.data() + f.size())
        throw ParseError("bad count '" + f + "' in column bin_" + std::to_string(k), line_no);
      fv.bin_counts.push_back(v);
    }
    rows.push_back(std::move(fv));
  }
  return rows;
}

}  // namespace gearwave
