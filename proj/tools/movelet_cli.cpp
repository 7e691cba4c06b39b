// movelet: build dictionaries from labeled sensor recordings, classify new
// streams, score the predictions, and synthesize protocol sessions.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "movelet/classify.hpp"
#include "movelet/core.hpp"
#include "movelet/dictionary_io.hpp"
#include "movelet/evaluate.hpp"
#include "movelet/ingest.hpp"
#include "movelet/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;          // environment: unreadable paths, bad bytes
constexpr int kExitValidation = 2;  // domain: contract violations

// ---------------------------------------------------------------------------
// JSON config files for --config: a flat object of long-option values, with
// nested objects scoping values to a subcommand.
// ---------------------------------------------------------------------------

class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool,
                        std::string) const override {
    nlohmann::json out = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (!opt->results().empty())
        out[name] = opt->results().size() == 1 ? opt->results().front()
                                               : CLI::detail::join(opt->results());
      else if (default_also)
        out[name] = opt->get_default_str();
    }
    return out.dump(2) + '\n';
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    collect(doc, {}, items);
    return items;
  }

 private:
  static void collect(const nlohmann::json& node,
                      const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : node.items()) {
      if (value.is_object()) {
        auto scoped = parents;
        scoped.push_back(key);
        collect(value, scoped, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  static std::string scalar(const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  }
};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw movelet::IoError("cannot write file: " + path.string());
  out << text;
  if (!out) throw movelet::IoError("failed writing file: " + path.string());
}

std::vector<movelet::SegmentSpec> load_segments_if(const std::string& path) {
  if (path.empty()) return {};
  return movelet::load_segments_file(path);
}

/// Activity order for a training run: --activities when given, otherwise
/// first appearance in the annotation track.
std::vector<std::string> training_order(const std::string& activities_flag,
                                        const movelet::LabelTrack& track) {
  if (!activities_flag.empty()) return split_list(activities_flag);
  std::vector<std::string> order;
  for (const auto& iv : track.intervals)
    if (std::find(order.begin(), order.end(), iv.label) == order.end())
      order.push_back(iv.label);
  return order;
}

// ---------------------------------------------------------------------------
// Subcommand options
// ---------------------------------------------------------------------------

struct SynthOpts {
  std::string script, models, sensor, out_sensor, out_annotations;
  std::optional<std::uint64_t> seed;
  std::optional<double> hz;
};

struct BuildDictOpts {
  std::string sensor_csv, annotations, sensor, out;
  std::string rep = "triaxial";
  std::string activities;
  double window_seconds = 1.0;
  double train_seconds = 4.0;
  double vote_seconds = 1.0;
  double hz = 10.0;
  std::int64_t max_gap_ms = 2000;
};

struct ClassifyOpts {
  std::string dict, sensor_csv, sensor, out;
  unsigned threads = 1;
  std::int64_t max_gap_ms = 2000;
};

struct EvaluateOpts {
  std::string pred, annotations, dict, trained, out;
  std::string format = "md";
  std::string include_segments, exclude_segments, distributions;
};

struct BenchOpts {
  std::string dict, sensor_csv;
  unsigned repeat = 0;  // 0 = run until ~0.5 s elapsed
  unsigned threads = 1;
  std::int64_t max_gap_ms = 2000;
};

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

void run_synth(const SynthOpts& o) {
  movelet::ProtocolScript script = movelet::load_protocol_script_file(o.script);
  if (o.seed) script.seed = *o.seed;
  if (o.hz) script.hz = *o.hz;
  const movelet::SensorKind sensor = movelet::sensor_from_token(o.sensor);
  const movelet::ActivityModelSet models =
      movelet::load_activity_models_file(o.models);
  const movelet::Session session = movelet::generate_session(
      script, models.for_modality(sensor.modality), sensor);

  std::ostringstream sensor_csv;
  movelet::write_sensor_csv(sensor_csv, session.series);
  write_text_file(o.out_sensor, sensor_csv.str());

  std::ostringstream ann_csv;
  movelet::write_annotations(ann_csv, session.track);
  write_text_file(o.out_annotations, ann_csv.str());

  std::cout << "wrote " << session.series.size() << " samples to "
            << o.out_sensor << " and " << session.track.intervals.size()
            << " intervals to " << o.out_annotations << '\n';
}

void run_build_dict(const BuildDictOpts& o) {
  const movelet::SensorKind sensor = movelet::sensor_from_token(o.sensor);
  const movelet::RawStream raw =
      movelet::parse_sensor_csv_file(o.sensor_csv, sensor);
  const movelet::UniformSeries series =
      movelet::resample(raw, o.hz, o.max_gap_ms);
  const movelet::LabelTrack track =
      movelet::parse_annotations_file(o.annotations);
  const movelet::LabeledSeries labeled = movelet::align_labels(series, track);

  movelet::MoveletConfig cfg;
  cfg.window_seconds = o.window_seconds;
  cfg.train_seconds = o.train_seconds;
  cfg.vote_horizon_seconds = o.vote_seconds;
  cfg.hz = o.hz;
  cfg.rep = movelet::representation_from_token(o.rep);

  std::vector<std::pair<std::string, movelet::UniformSeries>> training;
  for (const std::string& activity : training_order(o.activities, track))
    training.emplace_back(activity, movelet::extract_training_segment(
                                        labeled, activity, o.train_seconds));

  const movelet::Dictionary dict =
      movelet::build_dictionary(training, sensor, cfg);
  movelet::save_dictionary_file(o.out, dict);

  std::size_t total = 0;
  for (const auto& e : dict.entries) {
    std::cout << e.label << ": " << e.movelets.size() << " movelets\n";
    total += e.movelets.size();
  }
  std::cout << "wrote " << dict.entries.size() << " activities, " << total
            << " movelets to " << o.out << '\n';
}

void run_classify(const ClassifyOpts& o) {
  const movelet::Dictionary dict = movelet::load_dictionary_file(o.dict);
  movelet::SensorKind sensor = dict.sensor;
  if (!o.sensor.empty()) {
    sensor = movelet::sensor_from_token(o.sensor);
    if (!(sensor == dict.sensor))
      throw movelet::SensorMismatch("test data is " + o.sensor +
                                    " but the dictionary is " +
                                    movelet::to_token(dict.sensor));
  }
  const movelet::RawStream raw =
      movelet::parse_sensor_csv_file(o.sensor_csv, sensor);
  const movelet::UniformSeries series =
      movelet::resample(raw, dict.config.hz, o.max_gap_ms);
  const movelet::PredictionTrack track =
      movelet::classify_series(series, dict, o.threads);

  std::ostringstream csv;
  movelet::write_predictions_csv(csv, movelet::to_label_samples(track));
  if (o.out.empty())
    std::cout << csv.str();
  else
    write_text_file(o.out, csv.str());
}

void run_evaluate(const EvaluateOpts& o) {
  std::vector<std::string> trained;
  if (!o.trained.empty())
    trained = split_list(o.trained);
  else if (!o.dict.empty())
    trained = movelet::load_dictionary_file(o.dict).activity_order();
  else
    throw movelet::ValidationError("pass --trained or --dict for the activity order");

  movelet::LabelSamples pred = movelet::parse_predictions_csv_file(o.pred);
  const movelet::LabelTrack track =
      movelet::parse_annotations_file(o.annotations);
  movelet::LabelSamples truth;
  truth.t_ms = pred.t_ms;
  for (const std::int64_t t : pred.t_ms) {
    const std::string* label = track.label_at(t);
    truth.labels.emplace_back(label ? std::optional<std::string>(*label)
                                    : std::nullopt);
  }

  const auto include = load_segments_if(o.include_segments);
  const auto exclude = load_segments_if(o.exclude_segments);
  pred = movelet::filter_by_segments(pred, include, exclude);
  truth = movelet::filter_by_segments(truth, include, exclude);

  const movelet::ConfusionReport report =
      movelet::confusion(pred, truth, trained);

  std::string body;
  if (o.format == "csv")
    body = movelet::render_confusion_csv(report);
  else if (o.format == "md")
    body = movelet::render_confusion_markdown(report);
  else if (o.format == "long")
    body = movelet::render_long_csv(truth, pred);
  else
    throw movelet::ValidationError("unknown format '" + o.format +
                                   "' (expected csv|md|long)");

  if (!o.distributions.empty()) {
    std::vector<std::pair<std::string, std::vector<double>>> columns;
    for (const movelet::SegmentSpec& seg :
         movelet::load_segments_file(o.distributions))
      columns.emplace_back(seg.name,
                           movelet::prediction_distribution(pred, seg, trained));
    body += '\n';
    body += o.format == "md"
                ? movelet::render_distributions_markdown(trained, columns)
                : movelet::render_distributions_csv(trained, columns);
  }

  if (o.out.empty())
    std::cout << body;
  else
    write_text_file(o.out, body);

  std::cerr << "diagonal average: "
            << movelet::format_proportion(movelet::diagonal_average(report))
            << '\n'
            << "null rate: "
            << movelet::format_proportion(movelet::null_rate(trained.size()))
            << " (" << trained.size() << " trained activities)\n";
  if (report.null_predictions > 0)
    std::cerr << "unpredicted samples: " << report.null_predictions << '\n';
}

void run_bench(const BenchOpts& o) {
  const movelet::Dictionary dict = movelet::load_dictionary_file(o.dict);
  const movelet::RawStream raw =
      movelet::parse_sensor_csv_file(o.sensor_csv, dict.sensor);
  const movelet::UniformSeries series =
      movelet::resample(raw, dict.config.hz, o.max_gap_ms);

  // Warm pass: validates inputs and pages everything in.
  const std::size_t per_run =
      movelet::classify_movelets(series, dict, o.threads).size();

  using clock = std::chrono::steady_clock;
  std::size_t movelets = 0;
  unsigned runs = 0;
  const clock::time_point start = clock::now();
  double elapsed = 0.0;
  do {
    movelets += movelet::classify_movelets(series, dict, o.threads).size();
    ++runs;
    elapsed = std::chrono::duration<double>(clock::now() - start).count();
  } while (o.repeat == 0 ? elapsed < 0.5 : runs < o.repeat);

  const double rate = static_cast<double>(movelets) / elapsed;
  std::cout << "movelets,seconds,movelets_per_second\n";
  char line[128];
  std::snprintf(line, sizeof line, "%zu,%.6f,%.1f\n", movelets, elapsed, rate);
  std::cout << line;
  std::cerr << "classified " << per_run << " windows per pass, " << runs
            << " passes\n";
}

int dispatch(const std::exception& e) {
  std::cerr << "error: " << e.what() << '\n';
  if (dynamic_cast<const movelet::ValidationError*>(&e)) return kExitValidation;
  return kExitIo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"movelet activity classification from phone IMU streams"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with default option values");

  SynthOpts synth;
  CLI::App* cmd_synth =
      app.add_subcommand("synth", "generate a scripted session as CSV files");
  cmd_synth->add_option("--script", synth.script, "protocol script JSON")
      ->required();
  cmd_synth->add_option("--models", synth.models, "activity model JSON")
      ->required();
  cmd_synth->add_option("--sensor", synth.sensor,
                        "front-acc|back-acc|front-gyro|back-gyro")
      ->required();
  cmd_synth->add_option("--out-sensor", synth.out_sensor, "sensor CSV path")
      ->required();
  cmd_synth
      ->add_option("--out-annotations", synth.out_annotations,
                   "annotation CSV path")
      ->required();
  cmd_synth->add_option("--seed", synth.seed, "override the script seed");
  cmd_synth->add_option("--hz", synth.hz, "override the script sampling rate");

  BuildDictOpts build;
  CLI::App* cmd_build = app.add_subcommand(
      "build-dict", "cut training segments and build a dictionary");
  cmd_build->add_option("--sensor-csv", build.sensor_csv, "training sensor CSV")
      ->required();
  cmd_build
      ->add_option("--annotations", build.annotations, "training annotations")
      ->required();
  cmd_build->add_option("--sensor", build.sensor,
                        "front-acc|back-acc|front-gyro|back-gyro")
      ->required();
  cmd_build->add_option("--out", build.out, "dictionary JSON path")->required();
  cmd_build->add_option("--rep", build.rep, "triaxial|magnitude");
  cmd_build->add_option("--activities", build.activities,
                        "comma list; default: annotation order");
  cmd_build->add_option("--window-seconds", build.window_seconds,
                        "movelet window length");
  cmd_build->add_option("--train-seconds", build.train_seconds,
                        "training cut per activity");
  cmd_build->add_option("--vote-seconds", build.vote_seconds, "vote horizon");
  cmd_build->add_option("--hz", build.hz, "grid rate for resampling");
  cmd_build->add_option("--max-gap-ms", build.max_gap_ms,
                        "largest raw gap to interpolate across");

  ClassifyOpts classify;
  CLI::App* cmd_classify =
      app.add_subcommand("classify", "label a test stream with a dictionary");
  cmd_classify->add_option("--dict", classify.dict, "dictionary JSON")
      ->required();
  cmd_classify->add_option("--sensor-csv", classify.sensor_csv, "test CSV")
      ->required();
  cmd_classify->add_option("--sensor", classify.sensor,
                           "declared sensor of the test CSV");
  cmd_classify->add_option("--out", classify.out,
                           "prediction CSV path (default stdout)");
  cmd_classify->add_option("--threads", classify.threads, "worker threads");
  cmd_classify->add_option("--max-gap-ms", classify.max_gap_ms,
                           "largest raw gap to interpolate across");

  EvaluateOpts evaluate;
  CLI::App* cmd_evaluate = app.add_subcommand(
      "evaluate", "confusion report for predictions against annotations");
  cmd_evaluate->add_option("--pred", evaluate.pred, "prediction CSV")
      ->required();
  cmd_evaluate
      ->add_option("--annotations", evaluate.annotations, "truth annotations")
      ->required();
  cmd_evaluate->add_option("--dict", evaluate.dict,
                           "dictionary JSON giving the activity order");
  cmd_evaluate->add_option("--trained", evaluate.trained,
                           "comma list of trained activities");
  cmd_evaluate->add_option("--format", evaluate.format, "csv|md|long");
  cmd_evaluate->add_option("--out", evaluate.out,
                           "report path (default stdout)");
  cmd_evaluate->add_option("--include-segments", evaluate.include_segments,
                           "segments JSON; keep only these windows");
  cmd_evaluate->add_option("--exclude-segments", evaluate.exclude_segments,
                           "segments JSON; drop these windows");
  cmd_evaluate->add_option("--distributions", evaluate.distributions,
                           "segments JSON; also print per-segment label "
                           "distributions");

  BenchOpts bench;
  CLI::App* cmd_bench =
      app.add_subcommand("bench", "classification throughput check");
  cmd_bench->add_option("--dict", bench.dict, "dictionary JSON")->required();
  cmd_bench->add_option("--sensor-csv", bench.sensor_csv, "test CSV")
      ->required();
  cmd_bench->add_option("--repeat", bench.repeat,
                        "fixed pass count (default: run for ~0.5 s)");
  cmd_bench->add_option("--threads", bench.threads, "worker threads");
  cmd_bench->add_option("--max-gap-ms", bench.max_gap_ms,
                        "largest raw gap to interpolate across");

  try {
    app.parse(argc, argv);
    if (cmd_synth->parsed()) run_synth(synth);
    if (cmd_build->parsed()) run_build_dict(build);
    if (cmd_classify->parsed()) run_classify(classify);
    if (cmd_evaluate->parsed()) run_evaluate(evaluate);
    if (cmd_bench->parsed()) run_bench(bench);
    return kExitOk;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    return dispatch(e);
  }
}
