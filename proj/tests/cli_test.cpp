#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "cli_runner.hpp"

namespace {

namespace fs = std::filesystem;

std::string cfg(const char* name) {
  return (cli::config_dir() / name).string();
}

/// Synthesizes the bundled training and test sessions into `dir` and builds
/// a front-accelerometer dictionary. Shared setup for the pipeline tests.
void synthesize_pipeline(const fs::path& dir) {
  auto r = cli::run("synth --script " + cfg("protocol_training.json") +
                        " --models " + cfg("models_default.json") +
                        " --sensor front-acc --out-sensor train.csv"
                        " --out-annotations train_ann.csv",
                    dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
  r = cli::run("synth --script " + cfg("protocol_test.json") + " --models " +
                   cfg("models_default.json") +
                   " --sensor front-acc --out-sensor test.csv"
                   " --out-annotations test_ann.csv",
               dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
  r = cli::run(
      "build-dict --sensor-csv train.csv --annotations train_ann.csv"
      " --sensor front-acc --rep triaxial --out dict.json",
      dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
}

}  // namespace

TEST(Cli, FullPipelineSucceeds) {
  const fs::path dir = cli::fresh_dir("cli_pipeline");
  synthesize_pipeline(dir);

  auto r = cli::run("classify --dict dict.json --sensor-csv test.csv"
                    " --out pred.csv",
                    dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
  ASSERT_TRUE(fs::exists(dir / "pred.csv"));

  r = cli::run(
      "evaluate --pred pred.csv --annotations test_ann.csv --dict dict.json"
      " --format md",
      dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
  EXPECT_NE(r.out.find("| predicted | stand | walk | stairUp | stairDown |"
                       " standToSit | sit | sitToStand |"),
            std::string::npos)
      << r.out;
  EXPECT_NE(r.err.find("diagonal average:"), std::string::npos);
  EXPECT_NE(r.err.find("null rate: 0.14 (7 trained activities)"),
            std::string::npos);
}

TEST(Cli, BuildDictCountsMovelets) {
  const fs::path dir = cli::fresh_dir("cli_counts");
  synthesize_pipeline(dir);
  const auto r = cli::run(
      "build-dict --sensor-csv train.csv --annotations train_ann.csv"
      " --sensor front-acc --out dict2.json",
      dir);
  ASSERT_EQ(0, r.exit_code);
  EXPECT_NE(r.out.find("stand: 31 movelets"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("7 activities, 217 movelets"), std::string::npos);
}

TEST(Cli, MissingActivityExitsTwoAndNamesIt) {
  const fs::path dir = cli::fresh_dir("cli_missing_activity");
  synthesize_pipeline(dir);
  // The annotations only cover the scripted labels; asking for an eighth
  // activity has no training run at all.
  const auto r = cli::run(
      "build-dict --sensor-csv train.csv --annotations train_ann.csv"
      " --sensor front-acc --out d.json"
      " --activities stand,walk,stairUp,stairDown,standToSit,sit,sitToStand,"
      "revolveDoor",
      dir);
  EXPECT_EQ(2, r.exit_code);
  EXPECT_NE(r.err.find("revolveDoor"), std::string::npos) << r.err;
}

TEST(Cli, TruncatedTrainingRunExitsTwo) {
  const fs::path dir = cli::fresh_dir("cli_short_run");
  synthesize_pipeline(dir);
  // Rewrite the annotations so the sit bout is only 2 s long: too short for
  // the default four-second training cut.
  cli::write_file(dir / "short_ann.csv",
                  "start_ms,end_ms,label\n"
                  "0,10000,stand\n10000,25000,walk\n25000,33000,stairUp\n"
                  "33000,41000,stairDown\n41000,45000,standToSit\n"
                  "45000,47000,sit\n51000,55000,sitToStand\n");
  const auto r = cli::run(
      "build-dict --sensor-csv train.csv --annotations short_ann.csv"
      " --sensor front-acc --out d.json",
      dir);
  EXPECT_EQ(2, r.exit_code);
  EXPECT_NE(r.err.find("sit"), std::string::npos);
  EXPECT_NE(r.err.find("2.0 s"), std::string::npos) << r.err;
}

TEST(Cli, UnreadablePathExitsOne) {
  const fs::path dir = cli::fresh_dir("cli_unreadable");
  const auto r = cli::run(
      "build-dict --sensor-csv does_not_exist.csv --annotations nope.csv"
      " --sensor front-acc --out d.json",
      dir);
  EXPECT_EQ(1, r.exit_code);
}

TEST(Cli, SensorMismatchExitsTwo) {
  const fs::path dir = cli::fresh_dir("cli_sensor_mismatch");
  synthesize_pipeline(dir);
  const auto r = cli::run(
      "classify --dict dict.json --sensor-csv test.csv --sensor back-acc",
      dir);
  EXPECT_EQ(2, r.exit_code);
  EXPECT_NE(r.err.find("back-acc"), std::string::npos);
}

TEST(Cli, SynthUnknownLabelExitsTwo) {
  const fs::path dir = cli::fresh_dir("cli_unknown_label");
  cli::write_file(dir / "script.json",
                  R"({"hz": 10, "seed": 1,
                      "steps": [{"label": "moonwalk", "seconds": 5}]})");
  const auto r = cli::run("synth --script script.json --models " +
                              cfg("models_default.json") +
                              " --sensor front-acc --out-sensor s.csv"
                              " --out-annotations a.csv",
                          dir);
  EXPECT_EQ(2, r.exit_code);
  EXPECT_NE(r.err.find("moonwalk"), std::string::npos);
}

TEST(Cli, SynthIsSeedDeterministic) {
  const fs::path dir = cli::fresh_dir("cli_synth_seed");
  const std::string args = "synth --script " + cfg("protocol_test.json") +
                           " --models " + cfg("models_default.json") +
                           " --sensor front-gyro";
  ASSERT_EQ(0, cli::run(args + " --out-sensor a.csv --out-annotations aa.csv",
                        dir)
                   .exit_code);
  ASSERT_EQ(0, cli::run(args + " --out-sensor b.csv --out-annotations bb.csv",
                        dir)
                   .exit_code);
  EXPECT_EQ(cli::slurp(dir / "a.csv"), cli::slurp(dir / "b.csv"));
  EXPECT_EQ(cli::slurp(dir / "aa.csv"), cli::slurp(dir / "bb.csv"));

  ASSERT_EQ(0, cli::run(args + " --seed 999 --out-sensor c.csv"
                               " --out-annotations cc.csv",
                        dir)
                   .exit_code);
  EXPECT_NE(cli::slurp(dir / "a.csv"), cli::slurp(dir / "c.csv"));
}

TEST(Cli, ClassifyExactWindowEmitsOneRowPerSample) {
  const fs::path dir = cli::fresh_dir("cli_exact_window");
  synthesize_pipeline(dir);
  // A ten-sample test stream: one movelet, one vote, ten rows.
  std::string csv = "t_ms,x,y,z\n";
  for (int i = 0; i < 10; ++i)
    csv += std::to_string(100 * i) + ",0,1,0\n";
  cli::write_file(dir / "tiny.csv", csv);
  const auto r =
      cli::run("classify --dict dict.json --sensor-csv tiny.csv", dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
  std::size_t rows = 0;
  for (const char c : r.out) rows += c == '\n';
  EXPECT_EQ(11u, rows);  // header + 10 samples
  EXPECT_NE(r.out.find("0,stand"), std::string::npos) << r.out;
}

TEST(Cli, EvaluateUntrainedTruthIsColumnOnly) {
  const fs::path dir = cli::fresh_dir("cli_untrained_column");
  cli::write_file(dir / "pred.csv",
                  "t_ms,predicted_label\n0,walk\n100,walk\n200,sit\n");
  cli::write_file(dir / "ann.csv",
                  "start_ms,end_ms,label\n0,200,walk\n200,300,revolveDoor\n");
  const auto r = cli::run(
      "evaluate --pred pred.csv --annotations ann.csv --trained walk,sit"
      " --format md",
      dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
  EXPECT_NE(r.out.find("| predicted | walk | sit | revolveDoor |"),
            std::string::npos)
      << r.out;
  // No row may start with the untrained label.
  EXPECT_EQ(r.out.find("\n| revolveDoor |"), std::string::npos) << r.out;
}

TEST(Cli, EvaluateLongFormat) {
  const fs::path dir = cli::fresh_dir("cli_long_format");
  cli::write_file(dir / "pred.csv", "t_ms,predicted_label\n0,walk\n100,walk\n");
  cli::write_file(dir / "ann.csv", "start_ms,end_ms,label\n0,100,walk\n");
  const auto r = cli::run(
      "evaluate --pred pred.csv --annotations ann.csv --trained walk"
      " --format long",
      dir);
  ASSERT_EQ(0, r.exit_code);
  EXPECT_EQ("t_ms,true_label,predicted_label\n0,walk,walk\n100,,walk\n", r.out);
}

TEST(Cli, EvaluateSegmentsAndDistributions) {
  const fs::path dir = cli::fresh_dir("cli_distributions");
  synthesize_pipeline(dir);
  ASSERT_EQ(0, cli::run("classify --dict dict.json --sensor-csv test.csv"
                        " --out pred.csv",
                        dir)
                   .exit_code);
  // The bundled test course walks during [6000,16000) and stands during
  // [0,6000).
  cli::write_file(dir / "segs.json", R"({"segments": [
      {"name": "firstWalk", "intervals": [[7000, 15000]]},
      {"name": "openingStand", "intervals": [[1000, 5000]]}]})");
  const auto r = cli::run(
      "evaluate --pred pred.csv --annotations test_ann.csv --dict dict.json"
      " --format csv --distributions segs.json",
      dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
  EXPECT_NE(r.out.find("predicted,firstWalk,openingStand"), std::string::npos)
      << r.out;
}

TEST(Cli, ConfigFileSuppliesDefaults) {
  const fs::path dir = cli::fresh_dir("cli_config_file");
  synthesize_pipeline(dir);
  cli::write_file(dir / "run.json",
                  R"({"build-dict": {"train-seconds": 3.0}})");
  const auto r = cli::run(
      "--config run.json build-dict --sensor-csv train.csv"
      " --annotations train_ann.csv --sensor front-acc --out d3.json",
      dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
  // 3 s of training at 10 Hz = 30 samples = 21 windows per activity.
  EXPECT_NE(r.out.find("stand: 21 movelets"), std::string::npos) << r.out;
}

TEST(Cli, BenchCompletesOnTinyInputs) {
  const fs::path dir = cli::fresh_dir("cli_bench");
  synthesize_pipeline(dir);
  std::string csv = "t_ms,x,y,z\n";
  for (int i = 0; i < 12; ++i) csv += std::to_string(100 * i) + ",0,1,0\n";
  cli::write_file(dir / "tiny.csv", csv);
  const auto r = cli::run(
      "bench --dict dict.json --sensor-csv tiny.csv --repeat 2", dir);
  ASSERT_EQ(0, r.exit_code) << r.err;
  ASSERT_NE(r.out.find("movelets,seconds,movelets_per_second"),
            std::string::npos);
  const std::size_t line = r.out.find('\n') + 1;
  const std::size_t c1 = r.out.find(',', line);
  const std::size_t c2 = r.out.find(',', c1 + 1);
  EXPECT_EQ(6, std::stoi(r.out.substr(line, c1 - line)));  // 2 passes x 3
  EXPECT_GE(std::stod(r.out.substr(c2 + 1)), 1.0);
}

TEST(Cli, BenchEmptyTestExitsTwo) {
  const fs::path dir = cli::fresh_dir("cli_bench_empty");
  synthesize_pipeline(dir);
  cli::write_file(dir / "empty.csv", "t_ms,x,y,z\n");
  const auto r =
      cli::run("bench --dict dict.json --sensor-csv empty.csv", dir);
  EXPECT_EQ(2, r.exit_code);
}

TEST(Cli, MagnitudeDictionaryClassifiesReorientedStreamIdentically) {
  const fs::path dir = cli::fresh_dir("cli_magnitude_flow");
  synthesize_pipeline(dir);
  ASSERT_EQ(0, cli::run("build-dict --sensor-csv train.csv"
                        " --annotations train_ann.csv --sensor front-acc"
                        " --rep magnitude --out dict_mag.json",
                        dir)
                   .exit_code);
  ASSERT_EQ(0, cli::run("classify --dict dict_mag.json --sensor-csv test.csv"
                        " --out pred_mag.csv",
                        dir)
                   .exit_code);
  ASSERT_TRUE(fs::exists(dir / "pred_mag.csv"));
}
