#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "movelet/classify.hpp"
#include "movelet/core.hpp"
#include "movelet/ingest.hpp"

namespace movelet {

// ---------------------------------------------------------------------------
// Label sample sequences
// ---------------------------------------------------------------------------

/// Timestamped per-sample labels: the common currency evaluation works on.
/// Both predictions and ground truth reduce to this, and segment filtering
/// returns it restricted (a filtered sequence is no longer on a uniform grid).
struct LabelSamples {
  std::vector<std::int64_t> t_ms;
  std::vector<std::optional<std::string>> labels;

  std::size_t size() const { return labels.size(); }
};

inline LabelSamples to_label_samples(const LabeledSeries& ls) {
  LabelSamples out;
  out.t_ms.reserve(ls.labels.size());
  for (std::size_t i = 0; i < ls.labels.size(); ++i)
    out.t_ms.push_back(ls.series.timestamp_at(i));
  out.labels = ls.labels;
  return out;
}

inline LabelSamples to_label_samples(const PredictionTrack& track) {
  LabelSamples out;
  out.t_ms.reserve(track.labels.size());
  for (std::size_t i = 0; i < track.labels.size(); ++i)
    out.t_ms.push_back(track.timestamp_at(i));
  out.labels = track.labels;
  return out;
}

// ---------------------------------------------------------------------------
// Prediction CSV (`t_ms,predicted_label`; empty label = no prediction)
// ---------------------------------------------------------------------------

inline void write_predictions_csv(std::ostream& out, const LabelSamples& pred) {
  out << "t_ms,predicted_label\n";
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out << pred.t_ms[i] << ',';
    if (pred.labels[i]) out << *pred.labels[i];
    out << '\n';
  }
}

inline LabelSamples parse_predictions_csv(std::istream& in) {
  std::string line;
  if (!detail::read_line(in, line))
    throw ParseError("empty input; expected header t_ms,predicted_label", 1);
  if (line != "t_ms,predicted_label")
    throw ParseError("bad header '" + line + "'; expected t_ms,predicted_label",
                     1);
  LabelSamples out;
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (fields.size() != 2)
      throw ParseError("expected 2 columns, got " +
                           std::to_string(fields.size()),
                       line_no);
    out.t_ms.push_back(detail::parse_ms(fields[0], line_no));
    if (fields[1].empty()) {
      out.labels.emplace_back(std::nullopt);
    } else {
      if (!detail::valid_label(fields[1]))
        throw ParseError("bad label '" + std::string(fields[1]) + "'", line_no);
      out.labels.emplace_back(std::string(fields[1]));
    }
  }
  return out;
}

inline LabelSamples parse_predictions_csv_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open prediction file: " + path.string());
  return parse_predictions_csv(in);
}

// ---------------------------------------------------------------------------
// Segments
// ---------------------------------------------------------------------------

/// A named set of half-open [start_ms, end_ms) windows, e.g. "slowWalk".
struct SegmentSpec {
  std::string name;
  std::vector<std::pair<std::int64_t, std::int64_t>> intervals;
  std::map<std::string, std::string> metadata;

  bool contains(std::int64_t t) const {
    for (const auto& [start, end] : intervals)
      if (t >= start && t < end) return true;
    return false;
  }

  void validate() const {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (intervals[i].second <= intervals[i].first)
        throw ValidationError("segment '" + name + "' has an empty interval");
      if (i > 0 && intervals[i].first < intervals[i - 1].second)
        throw OverlapError("segment '" + name + "' has overlapping intervals");
    }
  }
};

/// Segment file: {"segments": [{"name", "intervals": [[s,e],...], "metadata"?}]}
inline std::vector<SegmentSpec> load_segments(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad segments JSON: ") + e.what());
  }
  std::vector<SegmentSpec> out;
  try {
    for (const auto& seg : doc.at("segments")) {
      SegmentSpec spec;
      spec.name = seg.at("name").get<std::string>();
      for (const auto& iv : seg.at("intervals"))
        spec.intervals.emplace_back(iv.at(0).get<std::int64_t>(),
                                    iv.at(1).get<std::int64_t>());
      if (seg.contains("metadata"))
        spec.metadata =
            seg.at("metadata").get<std::map<std::string, std::string>>();
      std::sort(spec.intervals.begin(), spec.intervals.end());
      spec.validate();
      out.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad segments document: ") + e.what());
  }
  return out;
}

inline std::vector<SegmentSpec> load_segments_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open segments file: " + path.string());
  return load_segments(in);
}

/// Keeps a sample iff it lies inside some include interval (all samples when
/// `include` is empty) and outside every exclude interval.
inline LabelSamples filter_by_segments(const LabelSamples& samples,
                                       const std::vector<SegmentSpec>& include,
                                       const std::vector<SegmentSpec>& exclude) {
  LabelSamples out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::int64_t t = samples.t_ms[i];
    bool keep = include.empty();
    for (const SegmentSpec& seg : include)
      if (seg.contains(t)) {
        keep = true;
        break;
      }
    if (!keep) continue;
    for (const SegmentSpec& seg : exclude)
      if (seg.contains(t)) {
        keep = false;
        break;
      }
    if (!keep) continue;
    out.t_ms.push_back(t);
    out.labels.push_back(samples.labels[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Confusion matrices
// ---------------------------------------------------------------------------

/// Column-normalized true-vs-predicted proportions. Rows are the trained
/// activities; columns are the trained activities followed by any extra
/// labels seen only in the truth (those never form rows). Each column with
/// support sums to 1.
struct ConfusionReport {
  std::vector<std::string> predicted_labels;
  std::vector<std::string> true_labels;
  std::vector<std::vector<double>> matrix;  // [predicted][true]
  std::vector<std::size_t> support;         // per true label
  std::size_t null_predictions = 0;         // truth known, prediction missing
};

inline ConfusionReport confusion(const LabelSamples& pred,
                                 const LabelSamples& truth,
                                 const std::vector<std::string>& trained) {
  if (pred.size() != truth.size())
    throw LengthMismatch("prediction has " + std::to_string(pred.size()) +
                         " samples, truth has " + std::to_string(truth.size()));

  ConfusionReport report;
  report.predicted_labels = trained;
  report.true_labels = trained;

  std::map<std::string, std::size_t> row_of, col_of;
  for (std::size_t r = 0; r < trained.size(); ++r) row_of[trained[r]] = r;
  for (std::size_t c = 0; c < trained.size(); ++c) col_of[trained[c]] = c;

  std::vector<std::vector<std::size_t>> counts(
      trained.size(), std::vector<std::size_t>(trained.size(), 0));

  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth.labels[i]) continue;
    const std::string& t = *truth.labels[i];
    auto cit = col_of.find(t);
    std::size_t col;
    if (cit == col_of.end()) {
      // First sighting of an untrained truth label: new column, never a row.
      col = report.true_labels.size();
      col_of[t] = col;
      report.true_labels.push_back(t);
      for (auto& row : counts) row.push_back(0);
    } else {
      col = cit->second;
    }
    if (!pred.labels[i]) {
      ++report.null_predictions;
      continue;
    }
    auto rit = row_of.find(*pred.labels[i]);
    if (rit == row_of.end())
      throw ValidationError("predicted label '" + *pred.labels[i] +
                            "' is not a trained activity");
    ++counts[rit->second][col];
  }

  report.support.assign(report.true_labels.size(), 0);
  for (std::size_t c = 0; c < report.true_labels.size(); ++c)
    for (std::size_t r = 0; r < trained.size(); ++r)
      report.support[c] += counts[r][c];

  report.matrix.assign(trained.size(),
                       std::vector<double>(report.true_labels.size(), 0.0));
  for (std::size_t r = 0; r < trained.size(); ++r)
    for (std::size_t c = 0; c < report.true_labels.size(); ++c)
      if (report.support[c] > 0)
        report.matrix[r][c] = static_cast<double>(counts[r][c]) /
                              static_cast<double>(report.support[c]);
  return report;
}

/// Mean of the matched-label proportions over trained activities that were
/// actually observed (support > 0). The single-number accuracy summary.
inline double diagonal_average(const ConfusionReport& report) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < report.predicted_labels.size(); ++k) {
    if (k < report.support.size() && report.support[k] > 0) {
      sum += report.matrix[k][k];
      ++n;
    }
  }
  if (n == 0)
    throw NoSupportedColumns("no trained activity has observed samples");
  return sum / static_cast<double>(n);
}

/// Expected accuracy of uniform random guessing over the trained activities.
inline double null_rate(std::size_t n_trained) {
  if (n_trained < 1)
    throw ValidationError("null rate needs at least one trained activity");
  return 1.0 / static_cast<double>(n_trained);
}

/// Distribution of predicted labels among the samples inside a segment;
/// proportions over the trained activities, summing to 1.
inline std::vector<double> prediction_distribution(
    const LabelSamples& pred, const SegmentSpec& segment,
    const std::vector<std::string>& trained) {
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < trained.size(); ++r) row_of[trained[r]] = r;

  std::vector<std::size_t> counts(trained.size(), 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!segment.contains(pred.t_ms[i]) || !pred.labels[i]) continue;
    auto it = row_of.find(*pred.labels[i]);
    if (it == row_of.end())
      throw ValidationError("predicted label '" + *pred.labels[i] +
                            "' is not a trained activity");
    ++counts[it->second];
    ++total;
  }
  if (total == 0)
    throw EmptySegment("segment '" + segment.name +
                       "' contains no predicted samples");

  std::vector<double> out(trained.size());
  for (std::size_t r = 0; r < trained.size(); ++r)
    out[r] = static_cast<double>(counts[r]) / static_cast<double>(total);
  return out;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Two-decimal rendering used by the human-facing tables ("0.14", "0.76").
inline std::string format_proportion(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", p);
  return buf;
}

/// Machine CSV: full-precision proportions, true labels as columns, plus a
/// trailing support row.
inline std::string render_confusion_csv(const ConfusionReport& report) {
  std::ostringstream out;
  out << "predicted";
  for (const auto& c : report.true_labels) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < report.predicted_labels.size(); ++r) {
    out << report.predicted_labels[r];
    for (std::size_t c = 0; c < report.true_labels.size(); ++c)
      out << ',' << detail::format_double(report.matrix[r][c]);
    out << '\n';
  }
  out << "support";
  for (std::size_t c = 0; c < report.true_labels.size(); ++c)
    out << ',' << report.support[c];
  out << '\n';
  return out.str();
}

/// Markdown table: true labels as columns, two-decimal entries, support row
/// at the bottom.
inline std::string render_confusion_markdown(const ConfusionReport& report) {
  std::ostringstream out;
  out << "| predicted |";
  for (const auto& c : report.true_labels) out << ' ' << c << " |";
  out << "\n|---|";
  for (std::size_t c = 0; c < report.true_labels.size(); ++c) out << "---|";
  out << '\n';
  for (std::size_t r = 0; r < report.predicted_labels.size(); ++r) {
    out << "| " << report.predicted_labels[r] << " |";
    for (std::size_t c = 0; c < report.true_labels.size(); ++c)
      out << ' ' << format_proportion(report.matrix[r][c]) << " |";
    out << '\n';
  }
  out << "| support |";
  for (std::size_t c = 0; c < report.true_labels.size(); ++c)
    out << ' ' << report.support[c] << " |";
  out << '\n';
  return out.str();
}

/// Plot-ready long format: one row per sample, empty field when unlabeled.
inline std::string render_long_csv(const LabelSamples& truth,
                                   const LabelSamples& pred) {
  if (pred.size() != truth.size())
    throw LengthMismatch("prediction has " + std::to_string(pred.size()) +
                         " samples, truth has " + std::to_string(truth.size()));
  std::ostringstream out;
  out << "t_ms,true_label,predicted_label\n";
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out << pred.t_ms[i] << ',';
    if (truth.labels[i]) out << *truth.labels[i];
    out << ',';
    if (pred.labels[i]) out << *pred.labels[i];
    out << '\n';
  }
  return out.str();
}

/// Per-segment prediction distributions, segments as columns.
inline std::string render_distributions_csv(
    const std::vector<std::string>& trained,
    const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
  std::ostringstream out;
  out << "predicted";
  for (const auto& [name, _] : columns) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < trained.size(); ++r) {
    out << trained[r];
    for (const auto& [_, dist] : columns) out << ',' << detail::format_double(dist[r]);
    out << '\n';
  }
  return out.str();
}

inline std::string render_distributions_markdown(
    const std::vector<std::string>& trained,
    const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
  std::ostringstream out;
  out << "| predicted |";
  for (const auto& [name, _] : columns) out << ' ' << name << " |";
  out << "\n|---|";
  for (std::size_t c = 0; c < columns.size(); ++c) out << "---|";
  out << '\n';
  for (std::size_t r = 0; r < trained.size(); ++r) {
    out << "| " << trained[r] << " |";
    for (const auto& [_, dist] : columns)
      out << ' ' << format_proportion(dist[r]) << " |";
    out << '\n';
  }
  return out.str();
}

}  // namespace movelet
