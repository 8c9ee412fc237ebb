#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "f4corr/experiment.hpp"

using namespace f4corr;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.backend = BackendKind::software;
  cfg.hyper.K = 2;
  cfg.hyper.epochs = 1;
  cfg.data.source = "synthetic";
  cfg.data.synthetic_count = 400;
  cfg.data.train_n = 100;
  cfg.data.test_n = 20;
  cfg.data.seeds = {1};
  cfg.output_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("defaults round-trip") {
    ExperimentConfig cfg = parse_experiment_config("{}");
    CHECK(cfg.hyper.learning_rate == 0.001);
    CHECK(cfg.data.train_n == 600);
    CHECK(cfg.data.seeds.size() == 5);
  }
  SUBCASE("unknown keys are rejected with the offending name") {
    CHECK_THROWS_WITH_AS(parse_experiment_config("{\"typo_key\": 1}"),
                         doctest::Contains("typo_key"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("{\"hyper\": {\"lr\": 0.1}}"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("{\"device\": {\"camera\": {\"gain\": 2}}}"),
                    ConfigError);
  }
  SUBCASE("device presets expand") {
    ExperimentConfig cfg =
        parse_experiment_config("{\"device\": {\"preset\": \"paper_like\"}}");
    CHECK(cfg.device.slm1.quantize);
    CHECK(cfg.device.camera.bit_depth == 8);
    ExperimentConfig t = parse_experiment_config("{\"device\": {\"preset\": \"transparent\"}}");
    CHECK_FALSE(t.device.slm1.quantize);
    CHECK(t.device.camera.noise_sigma == 0.0);
  }
  SUBCASE("invalid enum values are config errors") {
    CHECK_THROWS_AS(parse_experiment_config("{\"algo\": {\"algorithm\": \"sgd\"}}"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("{\"backend\": \"gpu\"}"), ConfigError);
  }
}

TEST_CASE("config hash") {
  SUBCASE("invariant under key reordering") {
    ExperimentConfig a =
        parse_experiment_config("{\"hyper\": {\"epochs\": 3, \"K\": 4}, \"backend\": \"software\"}");
    ExperimentConfig b =
        parse_experiment_config("{\"backend\": \"software\", \"hyper\": {\"K\": 4, \"epochs\": 3}}");
    CHECK(config_hash(a) == config_hash(b));
  }
  SUBCASE("any semantic change alters the hash") {
    ExperimentConfig a = parse_experiment_config("{}");
    ExperimentConfig b = parse_experiment_config("{\"hyper\": {\"epochs\": 31}}");
    CHECK(config_hash(a) != config_hash(b));
  }
}

TEST_CASE("kernel presets") {
  SUBCASE("edge_detect is the circularly embedded Laplacian") {
    SpatialField k = make_kernel_preset("edge_detect", 8);
    CHECK(k.at(0, 0) == -4.0);
    CHECK(k.at(0, 1) == 1.0);
    CHECK(k.at(1, 0) == 1.0);
    CHECK(k.at(0, 7) == 1.0);
    CHECK(k.at(7, 0) == 1.0);
    double sum = 0.0;
    for (double v : k.values()) sum += v;
    CHECK(sum == 0.0);
  }
  SUBCASE("gaussian preset is normalized") {
    SpatialField k = make_kernel_preset("gaussian", 8);
    double sum = 0.0;
    for (double v : k.values()) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("unknown preset rejected") {
    CHECK_THROWS_AS(make_kernel_preset("sobel", 8), ConfigError);
  }
}

TEST_CASE("flops table") {
  std::string csv = flops_table_csv({16, 32, 64, 128, 256}, 8, 10);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,K,C,algorithm,update_flops,forward_flops,passes,bp_excludes_downstream_terms");
  double prev_ratio = 0.0;
  std::string line;
  std::vector<double> bp_flops, pepita_flops;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells[3] == "bp") bp_flops.push_back(std::stod(cells[4]));
    if (cells[3] == "pepita") pepita_flops.push_back(std::stod(cells[4]));
  }
  REQUIRE(bp_flops.size() == 5);
  REQUIRE(pepita_flops.size() == 5);
  for (size_t i = 0; i < 5; ++i) {
    double ratio = bp_flops[i] / pepita_flops[i];
    CHECK(ratio > prev_ratio);
    prev_ratio = ratio;
  }
  // pepita column quadruples (within 5%) as n doubles
  for (size_t i = 1; i < 5; ++i) {
    CHECK(pepita_flops[i] / pepita_flops[i - 1] == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("throughput report") {
  LatencyModel m;
  m.exposure_ms = 0.0;
  std::string json = throughput_report_json(m);
  CHECK(json.find("\"images_per_second\": 40.0") != std::string::npos);
}

TEST_CASE("run_train determinism and outputs") {
  std::string dir = "test_out_train";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = tiny_config(dir);

  TrainOutcome first = run_train(cfg);
  std::string csv_path = dir + "/bp_seed1_metrics.csv";
  std::string csv_first = slurp(csv_path);
  TrainOutcome second = run_train(cfg);
  CHECK(slurp(csv_path) == csv_first);
  CHECK(first.summary.mean == second.summary.mean);

  CHECK(csv_first.rfind("epoch,algorithm,seed,", 0) == 0);
  CHECK(std::filesystem::exists(dir + "/bp_seed1_result.json"));
  CHECK(std::filesystem::exists(dir + "/bp_summary.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("epochs=0 yields an evaluation-only record") {
  std::string dir = "test_out_eval";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = tiny_config(dir);
  cfg.hyper.epochs = 0;
  TrainOutcome out = run_train(cfg);
  CHECK(out.per_seed.size() == 1);
  CHECK(out.per_seed[0].epochs.empty());
  CHECK(out.per_seed[0].test_accuracy >= 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("compare runs both algorithms on identical splits") {
  std::string dir = "test_out_compare";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = tiny_config(dir);
  CompareOutcome out = run_compare(cfg);
  CHECK(out.bp.per_seed.size() == 1);
  CHECK(out.pepita.per_seed.size() == 1);
  CHECK(out.accuracy_gap == doctest::Approx(out.bp.summary.mean - out.pepita.summary.mean));
  CHECK(std::filesystem::exists(dir + "/compare.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("ssim study on a transparent device scores near 1") {
  std::string dir = "test_out_ssim";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = tiny_config(dir);
  cfg.backend = BackendKind::device;
  cfg.device = transparent_device();
  SsimStudy study = run_ssim_study(cfg, "edge_detect", 20);
  CHECK(study.per_image.size() == 20);
  CHECK(study.mean > 0.99);
  CHECK(std::filesystem::exists(dir + "/ssim_edge_detect.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("noise sweep degrades the ssim study monotonically") {
  ExperimentConfig cfg = tiny_config("unused");
  cfg.device = transparent_device();
  double prev = 2.0;
  for (double sigma : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    cfg.device.camera.noise_sigma = sigma;
    SsimStudy study = run_ssim_study(cfg, "edge_detect", 10, /*write_files=*/false);
    CHECK(study.mean <= prev + 1e-9);
    prev = study.mean;
  }
}
