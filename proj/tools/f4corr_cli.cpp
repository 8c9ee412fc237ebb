#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "f4corr/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

f4corr::ExperimentConfig load_config(const std::string& path,
                                     const std::vector<uint64_t>& seed_override,
                                     const std::string& backend_override,
                                     const std::string& out_override) {
  f4corr::ExperimentConfig cfg = path.empty() ? f4corr::ExperimentConfig{}
                                              : f4corr::load_experiment_config(path);
  if (!seed_override.empty()) cfg.data.seeds = seed_override;
  if (!backend_override.empty()) {
    if (backend_override == "device") {
      cfg.backend = f4corr::BackendKind::device;
    } else if (backend_override == "software") {
      cfg.backend = f4corr::BackendKind::software;
    } else if (backend_override == "oracle") {
      cfg.backend = f4corr::BackendKind::oracle;
    } else {
      throw f4corr::ConfigError("unknown backend \"" + backend_override + "\"");
    }
  }
  if (!out_override.empty()) cfg.output_dir = out_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"4f optical correlator simulator and hardware-in-the-loop trainer"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, backend, out_dir;
  std::vector<uint64_t> seeds;
  app.add_option("--config", config_path, "Experiment config file (JSON)");
  app.add_option("--seed", seeds, "Seed(s); overrides the config seed list");
  app.add_option("--backend", backend, "device | software | oracle");
  app.add_option("--out", out_dir, "Output directory");

  auto* train = app.add_subcommand("train", "Train with the configured algorithm over all seeds");
  auto* compare = app.add_subcommand("compare", "Run bp and pepita on identical seeds and splits");
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the configured test split");
  std::string checkpoint_path;
  eval->add_option("--checkpoint", checkpoint_path, "Model checkpoint path")->required();

  auto* ssim_study = app.add_subcommand("ssim-study", "Device-vs-software convolution fidelity");
  std::string kernel_name = "edge_detect";
  int ssim_images = 100;
  ssim_study->add_option("--kernel", kernel_name, "edge_detect | gaussian | random");
  ssim_study->add_option("--images", ssim_images, "Number of test images");

  auto* flops = app.add_subcommand("flops", "Analytic update-rule flop table");
  std::vector<int> flop_sizes = {16, 32, 64, 128, 256};
  int flop_k = 8, flop_c = 10;
  flops->add_option("--n", flop_sizes, "Grid sizes");
  flops->add_option("--kernels", flop_k, "Kernel count K");
  flops->add_option("--classes", flop_c, "Class count C");

  auto* tp = app.add_subcommand("throughput", "Device throughput model");
  f4corr::LatencyModel latency;
  tp->add_option("--setup-ms", latency.slm_setup_ms, "SLM setup time");
  tp->add_option("--exposure-ms", latency.exposure_ms, "Camera exposure");
  tp->add_option("--overhead-ms", latency.os_overhead_ms, "OS overhead");
  tp->add_option("--kernels-per-image", latency.kernels_per_image, "Sequential kernel passes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (flops->parsed()) {
      std::cout << f4corr::flops_table_csv(flop_sizes, flop_k, flop_c);
      return 0;
    }
    if (tp->parsed()) {
      std::cout << f4corr::throughput_report_json(latency);
      return 0;
    }

    f4corr::ExperimentConfig cfg = load_config(config_path, seeds, backend, out_dir);
    if (train->parsed()) {
      f4corr::TrainOutcome outcome = f4corr::run_train(cfg);
      std::cout << f4corr::train_outcome_json(cfg, outcome);
    } else if (compare->parsed()) {
      f4corr::CompareOutcome outcome = f4corr::run_compare(cfg);
      std::printf("bp:     %.4f +- %.4f\n", outcome.bp.summary.mean, outcome.bp.summary.std_dev);
      std::printf("pepita: %.4f +- %.4f\n", outcome.pepita.summary.mean,
                  outcome.pepita.summary.std_dev);
      std::printf("gap:    %.4f\n", outcome.accuracy_gap);
    } else if (ssim_study->parsed()) {
      f4corr::SsimStudy study = f4corr::run_ssim_study(cfg, kernel_name, ssim_images);
      std::cout << f4corr::ssim_study_json(study);
    } else if (eval->parsed()) {
      f4corr::ModelParams params = f4corr::load_checkpoint(checkpoint_path);
      auto corpus = f4corr::load_corpus(cfg.data);
      auto split = f4corr::subsample(corpus, cfg.data.train_n, cfg.data.test_n,
                                     cfg.data.seeds.front());
      auto backend_fn = f4corr::build_backend(
          cfg, std::make_shared<f4corr::RngStream>(cfg.data.seeds.front(), 5));
      double acc = f4corr::evaluate(params, split.test, backend_fn, cfg.hyper);
      std::printf("test_accuracy: %.4f\n", acc);
    }
  } catch (const f4corr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const f4corr::IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const f4corr::FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const f4corr::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
