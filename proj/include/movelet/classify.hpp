#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "movelet/core.hpp"

namespace movelet {

// ---------------------------------------------------------------------------
// Configuration and dictionary
// ---------------------------------------------------------------------------

struct MoveletConfig {
  double window_seconds = 1.0;
  double train_seconds = 4.0;
  Representation rep = Representation::TriAxial;
  double vote_horizon_seconds = 1.0;
  double hz = 10.0;

  /// f: samples per matching window.
  std::size_t window_samples() const {
    return movelet::window_samples(window_seconds, hz);
  }

  /// How many future movelets join each timepoint's vote (offsets 1..v).
  std::size_t vote_horizon_samples() const {
    const long long v = std::llround(vote_horizon_seconds * hz);
    return v > 0 ? static_cast<std::size_t>(v) : 0;
  }

  void validate() const {
    if (hz <= 0 || window_seconds <= 0 || train_seconds <= 0 ||
        vote_horizon_seconds <= 0)
      throw ValidationError("config fields must be positive");
    (void)window_samples();
  }
};

struct DictionaryEntry {
  std::string label;
  std::vector<Movelet> movelets;
};

/// Per-subject templates for one (sensor, representation) pair. Entry order
/// is the declared activity order and doubles as the deterministic
/// tie-breaking order everywhere.
struct Dictionary {
  SensorKind sensor;
  MoveletConfig config;
  std::vector<DictionaryEntry> entries;

  Representation rep() const { return config.rep; }

  std::vector<std::string> activity_order() const {
    std::vector<std::string> order;
    order.reserve(entries.size());
    for (const auto& e : entries) order.push_back(e.label);
    return order;
  }
};

/// Nearest dictionary match for the test movelet at start_index.
struct MatchResult {
  std::size_t start_index = 0;
  std::size_t entry_index = 0;
  std::string best_label;
  double best_distance = 0.0;
  std::optional<double> runner_up_distance;
};

/// Smoothed per-sample predictions plus the raw matches they came from.
struct PredictionTrack {
  double hz = 10.0;
  std::int64_t start_ms = 0;
  std::vector<std::optional<std::string>> labels;
  std::vector<MatchResult> matches;

  std::int64_t timestamp_at(std::size_t i) const {
    return start_ms + std::llround(1000.0 * static_cast<double>(i) / hz);
  }
};

// ---------------------------------------------------------------------------
// Dictionary construction
// ---------------------------------------------------------------------------

/// Builds one dictionary from already-cut training series, one per activity,
/// in declared order. Magnitude dictionaries transform the series internally;
/// callers always pass raw tri-axial data.
inline Dictionary build_dictionary(
    const std::vector<std::pair<std::string, UniformSeries>>& training,
    SensorKind sensor, const MoveletConfig& cfg) {
  cfg.validate();
  if (training.empty())
    throw ValidationError("dictionary needs at least one training activity");

  Dictionary dict{sensor, cfg, {}};
  const std::size_t f = cfg.window_samples();
  dict.entries.reserve(training.size());
  for (const auto& [label, series] : training) {
    for (const auto& e : dict.entries)
      if (e.label == label)
        throw ValidationError("duplicate training activity '" + label + "'");
    if (!(series.sensor == sensor))
      throw SensorMismatch("training series for '" + label + "' is " +
                           to_token(series.sensor) + ", dictionary is " +
                           to_token(sensor));
    const UniformSeries repd = apply_representation(series, cfg.rep);
    if (repd.size() < f)
      throw SeriesTooShort("training series for '" + label + "' has " +
                           std::to_string(repd.size()) +
                           " samples; the window needs " + std::to_string(f));
    dict.entries.push_back({label, extract_movelets(repd, cfg.window_seconds)});
  }
  return dict;
}

// ---------------------------------------------------------------------------
// Distance
// ---------------------------------------------------------------------------

/// Euclidean distance over the concatenation of all channels.
inline double movelet_distance(const Movelet& a, const Movelet& b) {
  if (a.rep != b.rep)
    throw RepMismatch("cannot compare movelets of different representations");
  if (a.length() != b.length() || a.values.size() != b.values.size())
    throw LengthMismatch("cannot compare movelets of different lengths");
  double sum = 0.0;
  for (std::size_t c = 0; c < a.values.size(); ++c) {
    const auto& av = a.values[c];
    const auto& bv = b.values[c];
    for (std::size_t j = 0; j < av.size(); ++j) {
      const double d = av[j] - bv[j];
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Nearest-neighbor classification
// ---------------------------------------------------------------------------

namespace detail {

/// Dictionary flattened to contiguous rows for the hot loop. Row m holds the
/// channel-concatenated window of global movelet m; ascending m is exactly
/// the (entry order, movelet index) tie-breaking order.
struct FlatDictionary {
  std::size_t dims = 0;
  std::vector<double> rows;
  std::vector<std::uint32_t> entry_of;

  explicit FlatDictionary(const Dictionary& dict) {
    const std::size_t f = dict.config.window_samples();
    dims = channel_count(dict.rep()) * f;
    std::size_t count = 0;
    for (const auto& e : dict.entries) count += e.movelets.size();
    rows.reserve(count * dims);
    entry_of.reserve(count);
    for (std::size_t k = 0; k < dict.entries.size(); ++k) {
      for (const Movelet& m : dict.entries[k].movelets) {
        for (const auto& ch : m.values) rows.insert(rows.end(), ch.begin(), ch.end());
        entry_of.push_back(static_cast<std::uint32_t>(k));
      }
    }
  }

  std::size_t size() const { return entry_of.size(); }
};

/// Squared distances of the window against rows [m0, m1), keeping the best
/// and runner-up under strict less-than (first-seen wins ties). Each row's
/// sum accumulates left to right, so results are bit-identical to the naive
/// per-pair loop; rows are processed four at a time only to break the FP
/// dependency chain.
inline void scan_rows(const double* window, const FlatDictionary& flat,
                      std::size_t& best_m, double& best_sq, double& second_sq) {
  const std::size_t dims = flat.dims;
  const double* rows = flat.rows.data();
  const std::size_t m_count = flat.size();
  best_m = 0;
  best_sq = std::numeric_limits<double>::infinity();
  second_sq = std::numeric_limits<double>::infinity();

  auto consider = [&](std::size_t m, double sq) {
    if (sq < best_sq) {
      second_sq = best_sq;
      best_sq = sq;
      best_m = m;
    } else if (sq < second_sq) {
      second_sq = sq;
    }
  };

  std::size_t m = 0;
  for (; m + 4 <= m_count; m += 4) {
    const double* r0 = rows + (m + 0) * dims;
    const double* r1 = rows + (m + 1) * dims;
    const double* r2 = rows + (m + 2) * dims;
    const double* r3 = rows + (m + 3) * dims;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double w = window[d];
      const double d0 = w - r0[d];
      const double d1 = w - r1[d];
      const double d2 = w - r2[d];
      const double d3 = w - r3[d];
      s0 += d0 * d0;
      s1 += d1 * d1;
      s2 += d2 * d2;
      s3 += d3 * d3;
    }
    consider(m + 0, s0);
    consider(m + 1, s1);
    consider(m + 2, s2);
    consider(m + 3, s3);
  }
  for (; m < m_count; ++m) {
    const double* r = rows + m * dims;
    double s = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = window[d] - r[d];
      s += diff * diff;
    }
    consider(m, s);
  }
}

inline void classify_range(const UniformSeries& test, const Dictionary& dict,
                           const FlatDictionary& flat, std::size_t f,
                           std::size_t i_begin, std::size_t i_end,
                           std::vector<MatchResult>& results) {
  const std::size_t channels = test.channels.size();
  std::vector<double> window(flat.dims);
  for (std::size_t i = i_begin; i < i_end; ++i) {
    double* w = window.data();
    for (std::size_t c = 0; c < channels; ++c) {
      const double* src = test.channels[c].data() + i;
      for (std::size_t j = 0; j < f; ++j) *w++ = src[j];
    }
    std::size_t best_m = 0;
    double best_sq = 0.0, second_sq = 0.0;
    scan_rows(window.data(), flat, best_m, best_sq, second_sq);

    MatchResult& r = results[i];
    r.start_index = i;
    r.entry_index = flat.entry_of[best_m];
    r.best_label = dict.entries[r.entry_index].label;
    r.best_distance = std::sqrt(best_sq);
    if (second_sq != std::numeric_limits<double>::infinity())
      r.runner_up_distance = std::sqrt(second_sq);
  }
}

}  // namespace detail

/// One MatchResult per test window: the globally nearest dictionary movelet,
/// ties broken by dictionary entry order then movelet index. `threads` splits
/// the windows across workers; results are identical to the sequential scan.
inline std::vector<MatchResult> classify_movelets(const UniformSeries& test,
                                                  const Dictionary& dict,
                                                  unsigned threads = 1) {
  if (!(test.sensor == dict.sensor))
    throw SensorMismatch("test series is " + to_token(test.sensor) +
                         ", dictionary is " + to_token(dict.sensor));
  const UniformSeries repd = apply_representation(test, dict.rep());
  const std::size_t f = dict.config.window_samples();
  if (repd.size() < f)
    throw SeriesTooShort("test series of " + std::to_string(repd.size()) +
                         " samples is shorter than the " + std::to_string(f) +
                         "-sample window");

  const detail::FlatDictionary flat(dict);
  if (flat.size() == 0) throw ValidationError("dictionary has no movelets");

  const std::size_t n_windows = repd.size() - f + 1;
  std::vector<MatchResult> results(n_windows);

  if (threads <= 1 || n_windows < 2 * threads) {
    detail::classify_range(repd, dict, flat, f, 0, n_windows, results);
    return results;
  }

  std::vector<std::thread> workers;
  const std::size_t chunk = (n_windows + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = std::min<std::size_t>(t * chunk, n_windows);
    const std::size_t hi = std::min<std::size_t>(lo + chunk, n_windows);
    if (lo == hi) break;
    workers.emplace_back([&, lo, hi] {
      detail::classify_range(repd, dict, flat, f, lo, hi, results);
    });
  }
  for (auto& w : workers) w.join();
  return results;
}

// ---------------------------------------------------------------------------
// Majority-vote smoothing
// ---------------------------------------------------------------------------

/// Votes for sample i come from the movelets starting at i through i+v
/// (v = vote horizon in samples, f at the defaults: up to f+1 votes). Near
/// the tail the window clamps to the last movelet, so every sample keeps at
/// least one vote. Ties: modal label, then smallest summed distance, then
/// dictionary entry order.
inline PredictionTrack smooth_predictions(std::vector<MatchResult> matches,
                                          std::size_t test_len,
                                          const MoveletConfig& cfg,
                                          const Dictionary& dict) {
  if (matches.empty()) throw ValidationError("no matches to smooth");
  const std::size_t f = cfg.window_samples();
  if (matches.size() + f - 1 != test_len)
    throw LengthMismatch("got " + std::to_string(matches.size()) +
                         " matches for a " + std::to_string(test_len) +
                         "-sample series with f=" + std::to_string(f));

  const std::size_t v = cfg.vote_horizon_samples();
  const std::size_t last = matches.size() - 1;
  const std::size_t n_entries = dict.entries.size();

  PredictionTrack track;
  track.hz = cfg.hz;
  track.labels.resize(test_len);

  std::vector<std::uint32_t> counts(n_entries);
  std::vector<double> sums(n_entries);
  for (std::size_t i = 0; i < test_len; ++i) {
    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.begin(), sums.end(), 0.0);
    const std::size_t lo = std::min(i, last);
    const std::size_t hi = std::min(i + v, last);
    for (std::size_t s = lo; s <= hi; ++s) {
      counts[matches[s].entry_index] += 1;
      sums[matches[s].entry_index] += matches[s].best_distance;
    }
    std::size_t best_k = 0;
    for (std::size_t k = 1; k < n_entries; ++k) {
      if (counts[k] > counts[best_k] ||
          (counts[k] == counts[best_k] && counts[k] > 0 &&
           sums[k] < sums[best_k]))
        best_k = k;
    }
    track.labels[i] = dict.entries[best_k].label;
  }
  track.matches = std::move(matches);
  return track;
}

/// Full pipeline for one series: match every window, then smooth.
inline PredictionTrack classify_series(const UniformSeries& test,
                                       const Dictionary& dict,
                                       unsigned threads = 1) {
  auto matches = classify_movelets(test, dict, threads);
  PredictionTrack track =
      smooth_predictions(std::move(matches), test.size(), dict.config, dict);
  track.start_ms = test.start_ms;
  return track;
}

}  // namespace movelet
