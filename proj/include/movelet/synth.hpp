#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "movelet/core.hpp"
#include "movelet/ingest.hpp"

namespace movelet {

// ---------------------------------------------------------------------------
// Activity models
// ---------------------------------------------------------------------------

/// One sinusoid on one axis: amplitude * sin(2*pi*frequency*t + phase).
struct Oscillation {
  double amplitude = 0.0;
  double frequency_hz = 0.0;
  double phase_rad = 0.0;
};

/// Parametric signature of one activity for one sensor modality. Steady
/// profiles hold `base` constant; ramp profiles sweep linearly from `base`
/// to `base_end` across the step (transitions such as standToSit).
struct ActivityModel {
  enum class Profile { Steady, Ramp };

  std::string label;
  std::array<double, 3> base{0.0, 0.0, 0.0};
  std::array<double, 3> base_end{0.0, 0.0, 0.0};
  std::array<Oscillation, 3> oscillation{};
  std::array<double, 3> noise_sd{0.0, 0.0, 0.0};
  Profile profile = Profile::Steady;

  void validate() const {
    for (const Oscillation& o : oscillation)
      if (o.frequency_hz < 0)
        throw ValidationError("model '" + label + "' has a negative frequency");
    for (double sd : noise_sd)
      if (sd < 0)
        throw ValidationError("model '" + label + "' has a negative noise sd");
  }
};

// ---------------------------------------------------------------------------
// Pocket orientations
// ---------------------------------------------------------------------------

/// The four pocket placements: screen toward or away from the leg, upright
/// or upside down. Modeled as axis sign flips; each is its own inverse and
/// the four are closed under composition.
enum class Orientation { Canonical, ScreenIn, UpsideDown, ScreenInUpsideDown };

inline constexpr std::array<Orientation, 4> all_orientations() {
  return {Orientation::Canonical, Orientation::ScreenIn,
          Orientation::UpsideDown, Orientation::ScreenInUpsideDown};
}

inline constexpr std::array<double, 3> orientation_signs(Orientation o) {
  switch (o) {
    case Orientation::Canonical:
      return {1.0, 1.0, 1.0};
    case Orientation::ScreenIn:
      return {-1.0, 1.0, -1.0};
    case Orientation::UpsideDown:
      return {-1.0, -1.0, 1.0};
    case Orientation::ScreenInUpsideDown:
      return {1.0, -1.0, -1.0};
  }
  return {1.0, 1.0, 1.0};
}

inline std::string to_token(Orientation o) {
  switch (o) {
    case Orientation::Canonical:
      return "canonical";
    case Orientation::ScreenIn:
      return "screen-in";
    case Orientation::UpsideDown:
      return "upside-down";
    case Orientation::ScreenInUpsideDown:
      return "screen-in-upside-down";
  }
  return "canonical";
}

inline Orientation orientation_from_token(std::string_view token) {
  if (token == "canonical") return Orientation::Canonical;
  if (token == "screen-in") return Orientation::ScreenIn;
  if (token == "upside-down") return Orientation::UpsideDown;
  if (token == "screen-in-upside-down") return Orientation::ScreenInUpsideDown;
  throw ValidationError("unknown orientation '" + std::string(token) + "'");
}

/// Applies the orientation's sign matrix to every sample; grid unchanged.
inline UniformSeries reorient(const UniformSeries& s, Orientation o) {
  if (s.channels.size() != 3)
    throw RepMismatch("reorient needs a tri-axial series");
  const auto signs = orientation_signs(o);
  UniformSeries out = s;
  for (std::size_t a = 0; a < 3; ++a)
    if (signs[a] < 0)
      for (double& v : out.channels[a]) v = -v;
  return out;
}

// ---------------------------------------------------------------------------
// Protocol scripts
// ---------------------------------------------------------------------------

struct ProtocolStep {
  std::string label;
  double seconds = 0.0;
  Orientation orientation = Orientation::Canonical;
};

struct ProtocolScript {
  double hz = 10.0;
  std::uint64_t seed = 0;
  std::vector<ProtocolStep> steps;
};

// ---------------------------------------------------------------------------
// Reproducible noise
// ---------------------------------------------------------------------------

/// Standard normal draws from mt19937_64 via the Box-Muller transform.
/// Both pieces are pinned algorithms, so a given seed yields the same
/// sample stream on every platform this builds on.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  // High 53 bits mapped into (0, 1]; log() stays finite.
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1p-53;
  }

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace detail {

/// Appends n samples of the model to the channel buffers. t runs from the
/// step start; the orientation sign wraps signal and noise alike, so a step
/// generated under orientation o equals reorient(canonical step, o) bit for
/// bit.
inline void generate_step(const ActivityModel& model, std::size_t n, double hz,
                          Orientation orientation, GaussianSource& noise,
                          std::vector<std::vector<double>>& channels) {
  const auto signs = orientation_signs(orientation);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) / hz;
    const double progress =
        n > 1 ? static_cast<double>(j) / static_cast<double>(n - 1) : 1.0;
    for (std::size_t a = 0; a < 3; ++a) {
      double v = model.base[a];
      if (model.profile == ActivityModel::Profile::Ramp)
        v += (model.base_end[a] - model.base[a]) * progress;
      const Oscillation& osc = model.oscillation[a];
      if (osc.amplitude != 0.0)
        v += osc.amplitude *
             std::sin(2.0 * std::numbers::pi * osc.frequency_hz * t +
                      osc.phase_rad);
      v += model.noise_sd[a] * noise.next();
      channels[a].push_back(signs[a] * v);
    }
  }
}

inline std::uint64_t session_seed(std::uint64_t seed, SensorKind sensor) {
  const std::uint64_t idx =
      (sensor.position == DevicePosition::BackPocket ? 2u : 0u) +
      (sensor.modality == Modality::Gyroscope ? 1u : 0u);
  return seed * 4 + idx;
}

}  // namespace detail

/// One activity in isolation: series plus a track covering it end to end.
inline std::pair<UniformSeries, LabelTrack> generate_activity(
    const ActivityModel& model, double duration_s, double hz,
    std::uint64_t seed,
    SensorKind sensor = {DevicePosition::FrontPocket, Modality::Accelerometer}) {
  model.validate();
  if (hz <= 0) throw ValidationError("sampling rate must be positive");
  const long long n = std::llround(duration_s * hz);
  if (n < 1) throw ValidationError("duration spans no samples");

  UniformSeries series{sensor, hz, 0, {{}, {}, {}}};
  for (auto& ch : series.channels) ch.reserve(static_cast<std::size_t>(n));
  GaussianSource noise(seed);
  detail::generate_step(model, static_cast<std::size_t>(n), hz,
                        Orientation::Canonical, noise, series.channels);

  LabelTrack track;
  track.intervals.push_back(
      {0, std::llround(1000.0 * static_cast<double>(n) / hz), model.label});
  return {std::move(series), std::move(track)};
}

struct Session {
  UniformSeries series;
  LabelTrack track;
};

/// Runs a protocol script: per-step series stitched onto one continuous
/// grid, each step reoriented as scripted, with a label track that tiles the
/// session exactly. Deterministic in (script.seed, sensor).
inline Session generate_session(const ProtocolScript& script,
                                const std::map<std::string, ActivityModel>& models,
                                SensorKind sensor) {
  if (script.hz <= 0) throw ValidationError("sampling rate must be positive");
  if (script.steps.empty()) throw ValidationError("script has no steps");
  for (const ProtocolStep& step : script.steps) {
    if (step.seconds <= 0)
      throw ValidationError("step '" + step.label + "' has no duration");
    if (!models.contains(step.label))
      throw UnknownLabel("no activity model for label '" + step.label + "'");
    models.at(step.label).validate();
  }

  Session session;
  session.series = UniformSeries{sensor, script.hz, 0, {{}, {}, {}}};
  GaussianSource noise(detail::session_seed(script.seed, sensor));

  std::size_t offset = 0;
  for (const ProtocolStep& step : script.steps) {
    const long long n = std::llround(step.seconds * script.hz);
    if (n < 1)
      throw ValidationError("step '" + step.label + "' spans no samples");
    detail::generate_step(models.at(step.label), static_cast<std::size_t>(n),
                          script.hz, step.orientation, noise,
                          session.series.channels);
    const std::size_t next = offset + static_cast<std::size_t>(n);
    session.track.intervals.push_back(
        {std::llround(1000.0 * static_cast<double>(offset) / script.hz),
         std::llround(1000.0 * static_cast<double>(next) / script.hz),
         step.label});
    offset = next;
  }
  return session;
}

inline LabeledSeries to_labeled(const Session& session) {
  return align_labels(session.series, session.track);
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

/// Per-modality activity models, one map per sensor type.
struct ActivityModelSet {
  std::map<std::string, ActivityModel> accelerometer;
  std::map<std::string, ActivityModel> gyroscope;

  const std::map<std::string, ActivityModel>& for_modality(Modality m) const {
    return m == Modality::Accelerometer ? accelerometer : gyroscope;
  }
};

namespace detail {

inline std::array<double, 3> triple(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError("expected a 3-element array, got " + j.dump());
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline std::map<std::string, ActivityModel> parse_models(
    const nlohmann::json& doc) {
  std::map<std::string, ActivityModel> models;
  for (const auto& [label, body] : doc.items()) {
    ActivityModel m;
    m.label = label;
    if (body.contains("base")) m.base = triple(body.at("base"));
    if (body.contains("base_end")) m.base_end = triple(body.at("base_end"));
    if (body.contains("noise_sd")) m.noise_sd = triple(body.at("noise_sd"));
    if (body.contains("oscillation")) {
      const auto& osc = body.at("oscillation");
      if (!osc.is_array() || osc.size() != 3)
        throw ParseError("model '" + label +
                         "': oscillation needs one [amplitude, frequency_hz, "
                         "phase_rad] per axis");
      for (std::size_t a = 0; a < 3; ++a) {
        const auto t = triple(osc.at(a));
        m.oscillation[a] = {t[0], t[1], t[2]};
      }
    }
    if (body.contains("profile")) {
      const std::string p = body.at("profile").get<std::string>();
      if (p == "steady")
        m.profile = ActivityModel::Profile::Steady;
      else if (p == "ramp")
        m.profile = ActivityModel::Profile::Ramp;
      else
        throw ParseError("model '" + label + "': unknown profile '" + p + "'");
    }
    m.validate();
    models[label] = std::move(m);
  }
  return models;
}

}  // namespace detail

/// Model file: {"accelerometer": {label: model, ...}, "gyroscope": {...}}
inline ActivityModelSet load_activity_models(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model JSON: ") + e.what());
  }
  try {
    ActivityModelSet set;
    if (doc.contains("accelerometer"))
      set.accelerometer = detail::parse_models(doc.at("accelerometer"));
    if (doc.contains("gyroscope"))
      set.gyroscope = detail::parse_models(doc.at("gyroscope"));
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model document: ") + e.what());
  }
}

inline ActivityModelSet load_activity_models_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path.string());
  return load_activity_models(in);
}

/// Script file: {"hz": 10, "seed": 7, "steps": [{"label", "seconds",
/// "orientation"?}]}
inline ProtocolScript load_protocol_script(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad script JSON: ") + e.what());
  }
  try {
    ProtocolScript script;
    script.hz = doc.at("hz").get<double>();
    script.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& s : doc.at("steps")) {
      ProtocolStep step;
      step.label = s.at("label").get<std::string>();
      if (!detail::valid_label(step.label))
        throw ParseError("bad step label '" + step.label + "'");
      step.seconds = s.at("seconds").get<double>();
      if (s.contains("orientation"))
        step.orientation =
            orientation_from_token(s.at("orientation").get<std::string>());
      script.steps.push_back(std::move(step));
    }
    return script;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad script document: ") + e.what());
  }
}

inline ProtocolScript load_protocol_script_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open script file: " + path.string());
  return load_protocol_script(in);
}

}  // namespace movelet
