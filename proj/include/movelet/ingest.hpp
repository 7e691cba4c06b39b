#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "movelet/core.hpp"

namespace movelet {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Sensor rows as parsed, before resampling. Strictly increasing timestamps
/// after the parser sorts and collapses duplicates.
struct RawStream {
  SensorKind sensor;
  std::vector<Sample> rows;
};

/// Half-open activity interval [start_ms, end_ms).
struct LabelInterval {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string label;

  friend bool operator==(const LabelInterval&, const LabelInterval&) = default;
};

/// Ground-truth (or predicted) activity intervals, sorted and non-overlapping.
struct LabelTrack {
  std::vector<LabelInterval> intervals;

  /// Label of the interval containing t, or nullptr when t is unlabeled.
  const std::string* label_at(std::int64_t t_ms) const {
    auto it = std::upper_bound(
        intervals.begin(), intervals.end(), t_ms,
        [](std::int64_t t, const LabelInterval& iv) { return t < iv.start_ms; });
    if (it == intervals.begin()) return nullptr;
    --it;
    return t_ms < it->end_ms ? &it->label : nullptr;
  }

  friend bool operator==(const LabelTrack&, const LabelTrack&) = default;
};

/// A uniform series plus one activity label (or none) per sample.
struct LabeledSeries {
  UniformSeries series;
  std::vector<std::optional<std::string>> labels;
};

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return fields;
}

inline double parse_finite(std::string_view field, std::size_t line_no) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError("bad numeric field '" + std::string(field) + "'", line_no);
  if (!std::isfinite(value))
    throw ParseError("non-finite value '" + std::string(field) + "'", line_no);
  return value;
}

inline std::int64_t parse_ms(std::string_view field, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError("bad timestamp '" + std::string(field) + "'", line_no);
  return value;
}

/// Bare token: [A-Za-z][A-Za-z0-9_]*
inline bool valid_label(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front())))
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

/// Reads one line, dropping a trailing '\r' so CRLF input parses like LF.
inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sensor CSV
// ---------------------------------------------------------------------------

/// Parses the `t_ms,x,y,z` sensor format. Rows come out sorted by timestamp;
/// duplicate timestamps collapse to the last-seen row. Non-finite values and
/// malformed rows raise ParseError with the offending line number.
inline RawStream parse_sensor_csv(std::istream& in, SensorKind sensor) {
  std::string line;
  if (!detail::read_line(in, line))
    throw ParseError("empty input; expected header t_ms,x,y,z", 1);
  if (line != "t_ms,x,y,z")
    throw ParseError("bad header '" + line + "'; expected t_ms,x,y,z", 1);

  RawStream raw{sensor, {}};
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (fields.size() != 4)
      throw ParseError("expected 4 columns, got " +
                           std::to_string(fields.size()),
                       line_no);
    Sample s;
    s.t_ms = detail::parse_ms(fields[0], line_no);
    s.x = detail::parse_finite(fields[1], line_no);
    s.y = detail::parse_finite(fields[2], line_no);
    s.z = detail::parse_finite(fields[3], line_no);
    raw.rows.push_back(s);
  }

  std::stable_sort(raw.rows.begin(), raw.rows.end(),
                   [](const Sample& a, const Sample& b) { return a.t_ms < b.t_ms; });
  // Last-seen row wins among equal timestamps; stable sort keeps input order.
  std::vector<Sample> dedup;
  dedup.reserve(raw.rows.size());
  for (const Sample& s : raw.rows) {
    if (!dedup.empty() && dedup.back().t_ms == s.t_ms)
      dedup.back() = s;
    else
      dedup.push_back(s);
  }
  raw.rows = std::move(dedup);
  return raw;
}

inline RawStream parse_sensor_csv_file(const std::filesystem::path& path,
                                       SensorKind sensor) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sensor file: " + path.string());
  return parse_sensor_csv(in, sensor);
}

/// Writes a raw tri-axial series back out in the `t_ms,x,y,z` format with
/// round-trip-exact decimal values.
inline void write_sensor_csv(std::ostream& out, const UniformSeries& s) {
  if (s.channels.size() != 3)
    throw RepMismatch("sensor CSV holds tri-axial data only");
  out << "t_ms,x,y,z\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << s.timestamp_at(i) << ',' << movelet::detail::format_double(s.channels[0][i])
        << ',' << movelet::detail::format_double(s.channels[1][i]) << ','
        << movelet::detail::format_double(s.channels[2][i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Linear interpolation onto the grid anchored at the first raw timestamp,
/// period 1000/hz ms, ending at (never beyond) the last raw timestamp. Values
/// at grid points that hit raw timestamps pass through bit-exactly.
inline UniformSeries resample(const RawStream& raw, double hz,
                              std::int64_t max_gap_ms) {
  if (hz <= 0) throw ValidationError("sampling rate must be positive");
  if (raw.rows.size() < 2)
    throw TooFewRows("resampling needs at least 2 rows, got " +
                     std::to_string(raw.rows.size()));
  for (std::size_t i = 1; i < raw.rows.size(); ++i) {
    const std::int64_t gap = raw.rows[i].t_ms - raw.rows[i - 1].t_ms;
    if (gap > max_gap_ms) throw GapTooLarge(i, gap, max_gap_ms);
  }

  const std::int64_t t0 = raw.rows.front().t_ms;
  const std::int64_t t_last = raw.rows.back().t_ms;
  UniformSeries out{raw.sensor, hz, t0,
                    {std::vector<double>{}, std::vector<double>{},
                     std::vector<double>{}}};

  std::size_t j = 0;  // rows[j].t <= t < rows[j+1].t
  for (std::size_t i = 0;; ++i) {
    const std::int64_t t = out.timestamp_at(i);
    if (t > t_last) break;
    while (j + 2 < raw.rows.size() && raw.rows[j + 1].t_ms <= t) ++j;
    const Sample& a = raw.rows[j];
    const Sample& b = raw.rows[j + 1];
    if (t == a.t_ms) {
      out.channels[0].push_back(a.x);
      out.channels[1].push_back(a.y);
      out.channels[2].push_back(a.z);
    } else if (t == b.t_ms) {
      out.channels[0].push_back(b.x);
      out.channels[1].push_back(b.y);
      out.channels[2].push_back(b.z);
    } else {
      const double alpha = static_cast<double>(t - a.t_ms) /
                           static_cast<double>(b.t_ms - a.t_ms);
      out.channels[0].push_back(a.x + alpha * (b.x - a.x));
      out.channels[1].push_back(a.y + alpha * (b.y - a.y));
      out.channels[2].push_back(a.z + alpha * (b.z - a.z));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Annotations
// ---------------------------------------------------------------------------

/// Parses the `start_ms,end_ms,label` annotation format and validates the
/// interval invariants (sorted, non-overlapping, end > start).
inline LabelTrack parse_annotations(std::istream& in) {
  std::string line;
  if (!detail::read_line(in, line))
    throw ParseError("empty input; expected header start_ms,end_ms,label", 1);
  if (line != "start_ms,end_ms,label")
    throw ParseError("bad header '" + line + "'; expected start_ms,end_ms,label",
                     1);

  LabelTrack track;
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (fields.size() != 3)
      throw ParseError("expected 3 columns, got " +
                           std::to_string(fields.size()),
                       line_no);
    LabelInterval iv;
    iv.start_ms = detail::parse_ms(fields[0], line_no);
    iv.end_ms = detail::parse_ms(fields[1], line_no);
    if (!detail::valid_label(fields[2]))
      throw ParseError("bad label '" + std::string(fields[2]) + "'", line_no);
    iv.label = std::string(fields[2]);
    if (iv.end_ms <= iv.start_ms)
      throw ParseError("interval end " + std::to_string(iv.end_ms) +
                           " not after start " + std::to_string(iv.start_ms),
                       line_no);
    track.intervals.push_back(std::move(iv));
  }

  std::stable_sort(track.intervals.begin(), track.intervals.end(),
                   [](const LabelInterval& a, const LabelInterval& b) {
                     return a.start_ms < b.start_ms;
                   });
  for (std::size_t i = 1; i < track.intervals.size(); ++i) {
    const LabelInterval& prev = track.intervals[i - 1];
    const LabelInterval& cur = track.intervals[i];
    if (prev.end_ms > cur.start_ms) {
      std::ostringstream msg;
      msg << "overlapping intervals [" << prev.start_ms << "," << prev.end_ms
          << ") '" << prev.label << "' and [" << cur.start_ms << ","
          << cur.end_ms << ") '" << cur.label << "'";
      throw OverlapError(msg.str());
    }
  }
  return track;
}

inline LabelTrack parse_annotations_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open annotation file: " + path.string());
  return parse_annotations(in);
}

inline void write_annotations(std::ostream& out, const LabelTrack& track) {
  out << "start_ms,end_ms,label\n";
  for (const LabelInterval& iv : track.intervals)
    out << iv.start_ms << ',' << iv.end_ms << ',' << iv.label << '\n';
}

// ---------------------------------------------------------------------------
// Label alignment and training extraction
// ---------------------------------------------------------------------------

/// Assigns each sample the label of the interval containing its timestamp
/// under [start, end) semantics; samples in no interval stay unlabeled.
inline LabeledSeries align_labels(const UniformSeries& series,
                                  const LabelTrack& track) {
  LabeledSeries out{series, std::vector<std::optional<std::string>>(series.size())};
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (const std::string* label = track.label_at(series.timestamp_at(i)))
      out.labels[i] = *label;
  }
  return out;
}

/// Centered round(train_seconds * hz)-sample cut of the longest run of the
/// activity (earliest run on ties): the "middle" of the best training bout.
inline UniformSeries extract_training_segment(const LabeledSeries& ls,
                                              const std::string& activity,
                                              double train_seconds) {
  const std::size_t n = window_samples(train_seconds, ls.series.hz);

  std::size_t best_start = 0, best_len = 0;
  std::size_t run_start = 0, run_len = 0;
  for (std::size_t i = 0; i <= ls.labels.size(); ++i) {
    const bool match =
        i < ls.labels.size() && ls.labels[i] && *ls.labels[i] == activity;
    if (match) {
      if (run_len == 0) run_start = i;
      ++run_len;
    } else if (run_len > 0) {
      if (run_len > best_len) {
        best_len = run_len;
        best_start = run_start;
      }
      run_len = 0;
    }
  }

  if (best_len < n)
    throw InsufficientTraining(activity,
                               static_cast<double>(best_len) / ls.series.hz,
                               train_seconds);

  const std::size_t offset = (best_len - n) / 2;
  const std::size_t from = best_start + offset;
  UniformSeries out{ls.series.sensor, ls.series.hz,
                    ls.series.timestamp_at(from), {}};
  out.channels.reserve(ls.series.channels.size());
  for (const auto& ch : ls.series.channels)
    out.channels.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(from),
                              ch.begin() + static_cast<std::ptrdiff_t>(from + n));
  return out;
}

}  // namespace movelet
