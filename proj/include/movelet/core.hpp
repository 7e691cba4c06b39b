#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace movelet {

namespace detail {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Errors
//
// Two families, matching the CLI exit-code contract: IoError/ParseError are
// environment faults (exit 1), ValidationError and its children are domain
// contract violations (exit 2).
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input bytes. `line` is 1-based and counts the header line; 0
/// means the location is unknown (e.g. a JSON document).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class SeriesTooShort : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SensorMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RepMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LengthMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooFewRows : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GapTooLarge : public ValidationError {
 public:
  GapTooLarge(std::size_t row, std::int64_t gap_ms, std::int64_t max_gap_ms)
      : ValidationError("gap of " + std::to_string(gap_ms) + " ms before row " +
                        std::to_string(row) + " exceeds max gap " +
                        std::to_string(max_gap_ms) + " ms"),
        row_(row),
        gap_ms_(gap_ms) {}
  std::size_t row() const noexcept { return row_; }
  std::int64_t gap_ms() const noexcept { return gap_ms_; }

 private:
  std::size_t row_;
  std::int64_t gap_ms_;
};

class OverlapError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientTraining : public ValidationError {
 public:
  InsufficientTraining(const std::string& activity, double have_seconds,
                       double need_seconds)
      : ValidationError(format(activity, have_seconds, need_seconds)),
        activity_(activity),
        have_seconds_(have_seconds),
        need_seconds_(need_seconds) {}
  const std::string& activity() const noexcept { return activity_; }
  double have_seconds() const noexcept { return have_seconds_; }
  double need_seconds() const noexcept { return need_seconds_; }

 private:
  static std::string format(const std::string& activity, double have,
                            double need) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "insufficient training data for '%s': have %.1f s, need %.1f s",
                  activity.c_str(), have, need);
    return buf;
  }
  std::string activity_;
  double have_seconds_;
  double need_seconds_;
};

class NoSupportedColumns : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptySegment : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownLabel : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// ---------------------------------------------------------------------------
// Sensor identity
// ---------------------------------------------------------------------------

enum class DevicePosition { FrontPocket, BackPocket };
enum class Modality { Accelerometer, Gyroscope };

/// One of the four phone/sensor combinations. Each dictionary is bound to
/// exactly one of these; streams from different kinds never mix.
struct SensorKind {
  DevicePosition position = DevicePosition::FrontPocket;
  Modality modality = Modality::Accelerometer;

  friend bool operator==(const SensorKind&, const SensorKind&) = default;
};

/// Canonical token used in CLI flags and file headers: front-acc, back-acc,
/// front-gyro, back-gyro.
inline std::string to_token(SensorKind kind) {
  std::string token =
      kind.position == DevicePosition::FrontPocket ? "front-" : "back-";
  token += kind.modality == Modality::Accelerometer ? "acc" : "gyro";
  return token;
}

inline SensorKind sensor_from_token(std::string_view token) {
  if (token == "front-acc")
    return {DevicePosition::FrontPocket, Modality::Accelerometer};
  if (token == "back-acc")
    return {DevicePosition::BackPocket, Modality::Accelerometer};
  if (token == "front-gyro")
    return {DevicePosition::FrontPocket, Modality::Gyroscope};
  if (token == "back-gyro")
    return {DevicePosition::BackPocket, Modality::Gyroscope};
  throw ValidationError("unknown sensor token '" + std::string(token) +
                        "' (expected front-acc|back-acc|front-gyro|back-gyro)");
}

// ---------------------------------------------------------------------------
// Samples and series
// ---------------------------------------------------------------------------

/// One raw reading: g per axis for accelerometers, rad/s for gyroscopes.
struct Sample {
  std::int64_t t_ms = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Euclidean norm of the three axis readings.
inline double magnitude(const Sample& s) {
  return std::sqrt(s.x * s.x + s.y * s.y + s.z * s.z);
}

enum class Representation { TriAxial, Magnitude };

inline constexpr std::size_t channel_count(Representation rep) {
  return rep == Representation::TriAxial ? 3u : 1u;
}

inline std::string to_token(Representation rep) {
  return rep == Representation::TriAxial ? "triaxial" : "magnitude";
}

inline Representation representation_from_token(std::string_view token) {
  if (token == "triaxial") return Representation::TriAxial;
  if (token == "magnitude") return Representation::Magnitude;
  throw ValidationError("unknown representation '" + std::string(token) +
                        "' (expected triaxial|magnitude)");
}

/// Samples on a uniform time grid. Three channels (x, y, z) for raw data,
/// one channel for magnitude. Sample i lives at start_ms + round(1000*i/hz).
/// Immutable by convention once filled in.
struct UniformSeries {
  SensorKind sensor;
  double hz = 10.0;
  std::int64_t start_ms = 0;
  std::vector<std::vector<double>> channels;

  std::size_t size() const {
    return channels.empty() ? 0 : channels.front().size();
  }

  std::int64_t timestamp_at(std::size_t i) const {
    return start_ms + std::llround(1000.0 * static_cast<double>(i) / hz);
  }

  Representation rep() const {
    if (channels.size() == 3) return Representation::TriAxial;
    if (channels.size() == 1) return Representation::Magnitude;
    throw RepMismatch("series has " + std::to_string(channels.size()) +
                      " channels; expected 1 or 3");
  }

  friend bool operator==(const UniformSeries&, const UniformSeries&) = default;
};

/// A fixed-length window copied out of a series; the unit of matching.
struct Movelet {
  std::size_t start_index = 0;
  Representation rep = Representation::TriAxial;
  std::vector<std::vector<double>> values;

  std::size_t length() const {
    return values.empty() ? 0 : values.front().size();
  }

  friend bool operator==(const Movelet&, const Movelet&) = default;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Number of samples in a window of the given duration, round(seconds * hz).
inline std::size_t window_samples(double window_seconds, double hz) {
  const long long f = std::llround(window_seconds * hz);
  if (f < 1)
    throw ValidationError("window of " + std::to_string(window_seconds) +
                          " s at " + std::to_string(hz) +
                          " Hz spans no samples");
  return static_cast<std::size_t>(f);
}

/// Per-sample Euclidean norm; same grid, sensor and length as the input.
inline UniformSeries to_magnitude_series(const UniformSeries& s) {
  if (s.channels.size() != 3)
    throw RepMismatch("magnitude transform needs a tri-axial series");
  const auto& x = s.channels[0];
  const auto& y = s.channels[1];
  const auto& z = s.channels[2];
  UniformSeries out{s.sensor, s.hz, s.start_ms,
                    {std::vector<double>(s.size())}};
  for (std::size_t i = 0; i < x.size(); ++i)
    out.channels[0][i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
  return out;
}

/// Returns the series in the requested representation; tri-axial input is
/// passed through untouched, magnitude input is only valid for Magnitude.
inline UniformSeries apply_representation(const UniformSeries& s,
                                          Representation rep) {
  if (rep == Representation::TriAxial) {
    if (s.channels.size() != 3)
      throw RepMismatch("tri-axial representation needs 3 channels");
    return s;
  }
  if (s.channels.size() == 1) return s;
  return to_magnitude_series(s);
}

/// All windows of round(window_seconds * hz) samples, sliding one sample at a
/// time: exactly N - f + 1 movelets with start_index 0..N-f. Windows are
/// bit-exact copies of the source samples.
inline std::vector<Movelet> extract_movelets(const UniformSeries& s,
                                             double window_seconds) {
  const std::size_t f = window_samples(window_seconds, s.hz);
  const Representation rep = s.rep();
  const std::size_t n = s.size();
  if (n < f)
    throw SeriesTooShort("series of " + std::to_string(n) +
                         " samples is shorter than the " + std::to_string(f) +
                         "-sample window");
  std::vector<Movelet> out;
  out.reserve(n - f + 1);
  for (std::size_t k = 0; k + f <= n; ++k) {
    Movelet m;
    m.start_index = k;
    m.rep = rep;
    m.values.reserve(s.channels.size());
    for (const auto& ch : s.channels)
      m.values.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(k),
                            ch.begin() + static_cast<std::ptrdiff_t>(k + f));
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace movelet
