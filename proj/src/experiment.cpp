#include "f4corr/experiment.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace f4corr {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
  }
}

SlmConfig parse_slm(const json& j, const std::string& where, SlmConfig base) {
  reject_unknown_keys(j, {"bit_depth", "quantize", "range_min", "range_max"}, where);
  if (j.contains("bit_depth")) base.bit_depth = j["bit_depth"].get<int>();
  if (j.contains("quantize")) base.quantize = j["quantize"].get<bool>();
  if (j.contains("range_min")) base.range_min = j["range_min"].get<double>();
  if (j.contains("range_max")) base.range_max = j["range_max"].get<double>();
  return base;
}

CameraReadout parse_readout(const std::string& s) {
  if (s == "ideal_real") return CameraReadout::ideal_real;
  if (s == "magnitude") return CameraReadout::magnitude;
  if (s == "intensity") return CameraReadout::intensity;
  throw ConfigError("unknown camera readout \"" + s + "\"");
}

CameraConfig parse_camera(const json& j, CameraConfig base) {
  reject_unknown_keys(j, {"readout", "noise_sigma", "bit_depth", "exposure_ms", "saturation"},
                      "device.camera");
  if (j.contains("readout")) base.readout = parse_readout(j["readout"].get<std::string>());
  if (j.contains("noise_sigma")) base.noise_sigma = j["noise_sigma"].get<double>();
  if (j.contains("bit_depth")) base.bit_depth = j["bit_depth"].get<int>();
  if (j.contains("exposure_ms")) base.exposure_ms = j["exposure_ms"].get<double>();
  if (j.contains("saturation")) base.saturation = j["saturation"].get<double>();
  return base;
}

DeviceConfig parse_device(const json& j) {
  reject_unknown_keys(j,
                      {"preset", "slm1", "slm2", "camera", "misalign_dx", "misalign_dy",
                       "slm_setup_ms", "per_kernel_passes"},
                      "device");
  DeviceConfig base = transparent_device();
  if (j.contains("preset")) {
    std::string p = j["preset"].get<std::string>();
    if (p == "transparent") {
      base = transparent_device();
    } else if (p == "paper_like") {
      base = paper_like_device();
    } else {
      throw ConfigError("unknown device preset \"" + p + "\"");
    }
  }
  if (j.contains("slm1")) base.slm1 = parse_slm(j["slm1"], "device.slm1", base.slm1);
  if (j.contains("slm2")) base.slm2 = parse_slm(j["slm2"], "device.slm2", base.slm2);
  if (j.contains("camera")) base.camera = parse_camera(j["camera"], base.camera);
  if (j.contains("misalign_dx")) base.misalign_dx = j["misalign_dx"].get<double>();
  if (j.contains("misalign_dy")) base.misalign_dy = j["misalign_dy"].get<double>();
  if (j.contains("slm_setup_ms")) base.slm_setup_ms = j["slm_setup_ms"].get<double>();
  if (j.contains("per_kernel_passes")) base.per_kernel_passes = j["per_kernel_passes"].get<bool>();
  base.validate();
  return base;
}

Hyperparams parse_hyper(const json& j) {
  reject_unknown_keys(
      j, {"learning_rate", "K", "pool", "classes", "epochs", "batch_size"}, "hyper");
  Hyperparams hp;
  if (j.contains("learning_rate")) hp.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("K")) hp.K = j["K"].get<int>();
  if (j.contains("pool")) hp.pool = j["pool"].get<int>();
  if (j.contains("classes")) hp.classes = j["classes"].get<int>();
  if (j.contains("epochs")) hp.epochs = j["epochs"].get<int>();
  if (j.contains("batch_size")) hp.batch_size = j["batch_size"].get<int>();
  hp.validate();
  return hp;
}

AlgoConfig parse_algo(const json& j) {
  reject_unknown_keys(j, {"algorithm", "pepita_conv_rule", "f_scale", "modulation_sign"}, "algo");
  AlgoConfig a;
  if (j.contains("algorithm")) {
    std::string s = j["algorithm"].get<std::string>();
    if (s == "bp") {
      a.algorithm = Algorithm::bp;
    } else if (s == "pepita") {
      a.algorithm = Algorithm::pepita;
    } else if (s == "mempepita") {
      a.algorithm = Algorithm::mempepita;
    } else {
      throw ConfigError("unknown algorithm \"" + s + "\"");
    }
  }
  if (j.contains("pepita_conv_rule")) {
    std::string s = j["pepita_conv_rule"].get<std::string>();
    if (s == "pointwise") {
      a.pepita_conv_rule = PepitaConvRule::pointwise;
    } else if (s == "correlation") {
      a.pepita_conv_rule = PepitaConvRule::correlation;
    } else {
      throw ConfigError("unknown pepita_conv_rule \"" + s + "\"");
    }
  }
  if (j.contains("f_scale")) a.f_scale = j["f_scale"].get<double>();
  if (j.contains("modulation_sign")) {
    std::string s = j["modulation_sign"].get<std::string>();
    if (s == "minus") {
      a.modulation_sign = ModulationSign::minus;
    } else if (s == "plus") {
      a.modulation_sign = ModulationSign::plus;
    } else {
      throw ConfigError("unknown modulation_sign \"" + s + "\"");
    }
  }
  return a;
}

DataConfig parse_data(const json& j) {
  reject_unknown_keys(j,
                      {"source", "images", "labels", "train_n", "test_n", "synthetic_count",
                       "seeds"},
                      "data");
  DataConfig d;
  if (j.contains("source")) d.source = j["source"].get<std::string>();
  if (d.source != "mnist" && d.source != "synthetic") {
    throw ConfigError("data.source must be \"mnist\" or \"synthetic\"");
  }
  if (j.contains("images")) d.images_path = j["images"].get<std::string>();
  if (j.contains("labels")) d.labels_path = j["labels"].get<std::string>();
  if (j.contains("train_n")) d.train_n = j["train_n"].get<int>();
  if (j.contains("test_n")) d.test_n = j["test_n"].get<int>();
  if (j.contains("synthetic_count")) d.synthetic_count = j["synthetic_count"].get<int>();
  if (j.contains("seeds")) d.seeds = j["seeds"].get<std::vector<uint64_t>>();
  if (d.seeds.empty()) throw ConfigError("data.seeds must be non-empty");
  return d;
}

json device_to_json(const DeviceConfig& d) {
  auto slm = [](const SlmConfig& s) {
    return json{{"bit_depth", s.bit_depth},
                {"quantize", s.quantize},
                {"range_min", s.range_min},
                {"range_max", s.range_max}};
  };
  const char* readout = d.camera.readout == CameraReadout::ideal_real ? "ideal_real"
                        : d.camera.readout == CameraReadout::magnitude ? "magnitude"
                                                                       : "intensity";
  return json{{"slm1", slm(d.slm1)},
              {"slm2", slm(d.slm2)},
              {"camera",
               {{"readout", readout},
                {"noise_sigma", d.camera.noise_sigma},
                {"bit_depth", d.camera.bit_depth},
                {"exposure_ms", d.camera.exposure_ms},
                {"saturation", d.camera.saturation}}},
              {"misalign_dx", d.misalign_dx},
              {"misalign_dy", d.misalign_dy},
              {"slm_setup_ms", d.slm_setup_ms},
              {"per_kernel_passes", d.per_kernel_passes}};
}

json config_to_json(const ExperimentConfig& cfg) {
  const char* algo = cfg.algo.algorithm == Algorithm::bp        ? "bp"
                     : cfg.algo.algorithm == Algorithm::pepita ? "pepita"
                                                               : "mempepita";
  const char* backend = cfg.backend == BackendKind::device     ? "device"
                        : cfg.backend == BackendKind::software ? "software"
                                                               : "oracle";
  return json{
      {"device", device_to_json(cfg.device)},
      {"hyper",
       {{"learning_rate", cfg.hyper.learning_rate},
        {"K", cfg.hyper.K},
        {"pool", cfg.hyper.pool},
        {"classes", cfg.hyper.classes},
        {"epochs", cfg.hyper.epochs},
        {"batch_size", cfg.hyper.batch_size}}},
      {"algo",
       {{"algorithm", algo},
        {"pepita_conv_rule",
         cfg.algo.pepita_conv_rule == PepitaConvRule::pointwise ? "pointwise" : "correlation"},
        {"f_scale", cfg.algo.f_scale},
        {"modulation_sign", cfg.algo.modulation_sign == ModulationSign::minus ? "minus" : "plus"}}},
      {"data",
       {{"source", cfg.data.source},
        {"images", cfg.data.images_path},
        {"labels", cfg.data.labels_path},
        {"train_n", cfg.data.train_n},
        {"test_n", cfg.data.test_n},
        {"synthetic_count", cfg.data.synthetic_count},
        {"seeds", cfg.data.seeds}}},
      {"backend", backend},
      {"model_n", cfg.model_n},
      {"output_dir", cfg.output_dir}};
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_atomic(const std::string& path, const std::string& body) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp);
    out << body;
  }
  std::filesystem::rename(tmp, path);
}

const char* algo_name(Algorithm a) {
  switch (a) {
    case Algorithm::bp: return "bp";
    case Algorithm::pepita: return "pepita";
    case Algorithm::mempepita: return "mempepita";
  }
  return "?";
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j = json::parse(json_text);
  reject_unknown_keys(j, {"device", "hyper", "algo", "data", "backend", "output_dir", "model_n"},
                      "top level");
  ExperimentConfig cfg;
  if (j.contains("device")) cfg.device = parse_device(j["device"]);
  if (j.contains("hyper")) cfg.hyper = parse_hyper(j["hyper"]);
  if (j.contains("algo")) cfg.algo = parse_algo(j["algo"]);
  if (j.contains("data")) cfg.data = parse_data(j["data"]);
  if (j.contains("backend")) {
    std::string s = j["backend"].get<std::string>();
    if (s == "device") {
      cfg.backend = BackendKind::device;
    } else if (s == "software") {
      cfg.backend = BackendKind::software;
    } else if (s == "oracle") {
      cfg.backend = BackendKind::oracle;
    } else {
      throw ConfigError("unknown backend \"" + s + "\"");
    }
  }
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("model_n")) cfg.model_n = j["model_n"].get<int>();
  if (cfg.model_n < 2 || cfg.model_n % 2 != 0) throw ConfigError("model_n must be even, >= 2");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_experiment_config(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  // nlohmann::json serializes objects with sorted keys, so the dump is
  // canonical and the hash is invariant under input key reordering.
  std::string dump = config_to_json(cfg).dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::vector<LabeledImage> load_corpus(const DataConfig& data) {
  if (data.source == "mnist") {
    if (data.images_path.empty() || data.labels_path.empty()) {
      throw ConfigError("mnist source requires data.images and data.labels paths");
    }
    return load_idx_pair(data.images_path, data.labels_path);
  }
  return synthetic_corpus(data.synthetic_count, /*seed=*/424242);
}

ConvBackend build_backend(const ExperimentConfig& cfg, std::shared_ptr<RngStream> device_rng) {
  switch (cfg.backend) {
    case BackendKind::software: return make_software_backend();
    case BackendKind::oracle: return make_oracle_backend();
    case BackendKind::device: return make_device_backend(cfg.device, std::move(device_rng));
  }
  throw ConfigError("bad backend");
}

std::string epoch_metrics_csv(const std::string& algorithm, const SeedResult& result) {
  std::ostringstream os;
  os << "epoch,algorithm,seed,train_loss,train_acc,update_flops,passes\n";
  for (size_t i = 0; i < result.epochs.size(); ++i) {
    os << i + 1 << ',' << algorithm << ',' << result.seed << ','
       << fmt_double(result.epochs[i].mean_loss) << ','
       << fmt_double(result.epochs[i].train_accuracy) << ',' << result.ledger.update_flops << ','
       << result.ledger.passes << '\n';
  }
  return os.str();
}

TrainOutcome run_train(const ExperimentConfig& cfg, bool write_files) {
  std::vector<LabeledImage> corpus = load_corpus(cfg.data);
  TrainOutcome outcome;
  std::vector<double> finals;

  for (uint64_t seed : cfg.data.seeds) {
    auto t0 = std::chrono::steady_clock::now();
    DatasetSplit split = subsample(corpus, cfg.data.train_n, cfg.data.test_n, seed);

    RngStream init_rng(seed, 1);
    ModelParams params = init_params(cfg.model_n, cfg.hyper.K, cfg.hyper.classes, init_rng);
    AdamState adam = AdamState::zeros_like(params);
    RngStream proj_rng(seed, 2);
    ProjectionF F = init_projection(cfg.model_n, cfg.hyper.classes, cfg.algo.f_scale, proj_rng);
    RngStream epoch_rng(seed, 4);

    SeedResult result;
    result.seed = seed;
    ConvBackend train_backend = build_backend(cfg, std::make_shared<RngStream>(seed, 3));
    for (int epoch = 0; epoch < cfg.hyper.epochs; ++epoch) {
      result.epochs.push_back(train_epoch(params, adam, split.train, cfg.algo, train_backend,
                                          cfg.hyper, F, epoch_rng, result.ledger));
    }
    ConvBackend eval_backend = build_backend(cfg, std::make_shared<RngStream>(seed, 5));
    result.test_accuracy = evaluate(params, split.test, eval_backend, cfg.hyper);
    result.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    finals.push_back(result.test_accuracy);
    if (write_files) {
      std::string base = cfg.output_dir + "/" + algo_name(cfg.algo.algorithm) + "_seed" +
                         std::to_string(seed);
      write_atomic(base + "_metrics.csv", epoch_metrics_csv(algo_name(cfg.algo.algorithm), result));
      json record = {{"config_hash", config_hash(cfg)},
                     {"algorithm", algo_name(cfg.algo.algorithm)},
                     {"seed", seed},
                     {"test_accuracy", result.test_accuracy},
                     {"wall_clock_s", result.wall_clock_s},
                     {"ledger",
                      {{"forward_flops", result.ledger.forward_flops},
                       {"update_flops", result.ledger.update_flops},
                       {"fft_flops", result.ledger.fft_flops},
                       {"pointwise_flops", result.ledger.pointwise_flops},
                       {"passes", result.ledger.passes},
                       {"peak_activation_memory", result.ledger.peak_activation_memory}}}};
      json epochs = json::array();
      for (const auto& m : result.epochs) {
        epochs.push_back({{"train_loss", m.mean_loss}, {"train_acc", m.train_accuracy}});
      }
      record["epochs"] = epochs;
      write_atomic(base + "_result.json", record.dump(2) + "\n");
    }
    outcome.per_seed.push_back(std::move(result));
  }

  outcome.summary = aggregate_runs(finals);
  if (write_files) {
    write_atomic(cfg.output_dir + "/" + std::string(algo_name(cfg.algo.algorithm)) +
                     "_summary.json",
                 train_outcome_json(cfg, outcome));
  }
  return outcome;
}

std::string train_outcome_json(const ExperimentConfig& cfg, const TrainOutcome& outcome) {
  json j = {{"config_hash", config_hash(cfg)},
            {"algorithm", algo_name(cfg.algo.algorithm)},
            {"mean_test_accuracy", outcome.summary.mean},
            {"std_test_accuracy", outcome.summary.std_dev},
            {"per_seed", outcome.summary.values}};
  return j.dump(2) + "\n";
}

CompareOutcome run_compare(const ExperimentConfig& cfg, bool write_files) {
  CompareOutcome out;
  ExperimentConfig bp_cfg = cfg;
  bp_cfg.algo.algorithm = Algorithm::bp;
  out.bp = run_train(bp_cfg, write_files);
  ExperimentConfig pepita_cfg = cfg;
  pepita_cfg.algo.algorithm = Algorithm::pepita;
  out.pepita = run_train(pepita_cfg, write_files);
  out.accuracy_gap = out.bp.summary.mean - out.pepita.summary.mean;
  if (write_files) {
    json j = {{"config_hash", config_hash(cfg)},
              {"bp_mean", out.bp.summary.mean},
              {"bp_std", out.bp.summary.std_dev},
              {"pepita_mean", out.pepita.summary.mean},
              {"pepita_std", out.pepita.summary.std_dev},
              {"accuracy_gap", out.accuracy_gap}};
    write_atomic(cfg.output_dir + "/compare.json", j.dump(2) + "\n");
  }
  return out;
}

SpatialField make_kernel_preset(const std::string& name, int n, uint64_t seed) {
  SpatialField k(n);
  auto embed = [&k, n](int di, int dj, double v) {
    k.at((di % n + n) % n, (dj % n + n) % n) = v;
  };
  if (name == "edge_detect") {
    embed(0, 0, -4.0);
    embed(-1, 0, 1.0);
    embed(1, 0, 1.0);
    embed(0, -1, 1.0);
    embed(0, 1, 1.0);
  } else if (name == "gaussian") {
    const double w[3] = {0.25, 0.5, 0.25};
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) embed(di, dj, w[di + 1] * w[dj + 1]);
    }
  } else if (name == "random") {
    RngStream rng(seed, 0x7u);
    for (double& v : k.values()) v = rng.uniform(-0.5, 0.5);
  } else {
    throw ConfigError("unknown kernel preset \"" + name + "\"");
  }
  return k;
}

SsimStudy run_ssim_study(const ExperimentConfig& cfg, const std::string& kernel_name,
                         int image_count, bool write_files) {
  if (image_count < 1) throw ConfigError("ssim study needs at least one image");
  std::vector<LabeledImage> corpus = load_corpus(cfg.data);
  uint64_t seed = cfg.data.seeds.front();
  DatasetSplit split = subsample(corpus, cfg.data.train_n, cfg.data.test_n, seed);
  const auto& pool = split.test.size() >= static_cast<size_t>(image_count) ? split.test
                                                                           : split.train;
  if (pool.size() < static_cast<size_t>(image_count)) {
    throw ConfigError("not enough images for the ssim study");
  }

  SpatialField kernel = make_kernel_preset(kernel_name, cfg.model_n, seed);
  RngStream device_rng(seed, 0x21u);
  SsimConfig scfg;
  SsimStudy study;
  study.kernel = kernel_name;
  for (int i = 0; i < image_count; ++i) {
    SpatialField reference = software_fft_convolve(pool[i].pixels, kernel);
    SpatialField device_out = optical_convolve(pool[i].pixels, kernel, cfg.device, device_rng);
    study.per_image.push_back(ssim(device_out, reference, scfg));
    study.mean += study.per_image.back();
  }
  study.mean /= image_count;

  if (write_files) {
    write_atomic(cfg.output_dir + "/ssim_" + kernel_name + ".json", ssim_study_json(study));
  }
  return study;
}

std::string ssim_study_json(const SsimStudy& study) {
  json j = {{"kernel", study.kernel}, {"mean_ssim", study.mean}, {"per_image", study.per_image}};
  return j.dump(2) + "\n";
}

std::string flops_table_csv(const std::vector<int>& sizes, int K, int C) {
  std::ostringstream os;
  os << "n,K,C,algorithm,update_flops,forward_flops,passes,bp_excludes_downstream_terms\n";
  for (int n : sizes) {
    for (Algorithm a : {Algorithm::bp, Algorithm::pepita}) {
      AlgoConfig cfg;
      cfg.algorithm = a;
      FlopLedger ledger = count_flops(cfg, n, K, C);
      os << n << ',' << K << ',' << C << ',' << algo_name(a) << ',' << ledger.update_flops << ','
         << ledger.forward_flops << ',' << ledger.passes << ','
         << (a == Algorithm::bp ? "true" : "") << '\n';
    }
  }
  return os.str();
}

std::string throughput_report_json(const LatencyModel& model) {
  json j = {{"slm_setup_ms", model.slm_setup_ms},
            {"exposure_ms", model.exposure_ms},
            {"os_overhead_ms", model.os_overhead_ms},
            {"kernels_per_image", model.kernels_per_image},
            {"images_per_second", throughput(model)}};
  return j.dump(2) + "\n";
}

}  // namespace f4corr
