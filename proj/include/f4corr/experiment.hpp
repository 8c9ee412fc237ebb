#pragma once

#include <string>
#include <vector>

#include "f4corr/analysis.hpp"
#include "f4corr/dataset.hpp"
#include "f4corr/model.hpp"
#include "f4corr/trainers.hpp"

namespace f4corr {

enum class BackendKind { device, software, oracle };

struct DataConfig {
  std::string source = "synthetic";  // "mnist" or "synthetic"
  std::string images_path;
  std::string labels_path;
  int train_n = 600;
  int test_n = 100;
  int synthetic_count = 7000;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
};

struct ExperimentConfig {
  DeviceConfig device;
  Hyperparams hyper;
  AlgoConfig algo;
  DataConfig data;
  BackendKind backend = BackendKind::device;
  std::string output_dir = "out";
  int model_n = 28;
};

/// Parse and validate the experiment config file (JSON). Unknown keys
/// are rejected with a diagnostic naming the offending key.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// FNV-1a hash of the canonical (key-sorted) serialized config.
std::string config_hash(const ExperimentConfig& cfg);

struct SeedResult {
  uint64_t seed = 0;
  std::vector<EpochMetrics> epochs;
  double test_accuracy = 0.0;
  FlopLedger ledger;
  double wall_clock_s = 0.0;
};

struct TrainOutcome {
  std::vector<SeedResult> per_seed;
  RunSummary summary;  // final test accuracies
};

/// Full corpus per the data config (IDX files or synthetic fallback).
std::vector<LabeledImage> load_corpus(const DataConfig& data);

ConvBackend build_backend(const ExperimentConfig& cfg, std::shared_ptr<RngStream> device_rng);

/// Train over all configured seeds. When write_files is set, emits one
/// per-epoch CSV and one JSON record per seed plus an aggregate summary
/// into output_dir.
TrainOutcome run_train(const ExperimentConfig& cfg, bool write_files = true);

struct CompareOutcome {
  TrainOutcome bp;
  TrainOutcome pepita;
  double accuracy_gap = 0.0;  // bp mean - pepita mean
};

CompareOutcome run_compare(const ExperimentConfig& cfg, bool write_files = true);

/// Named convolution kernels for the fidelity study. edge_detect is the
/// 3x3 Laplacian circularly embedded at the origin of an n x n grid.
SpatialField make_kernel_preset(const std::string& name, int n, uint64_t seed = 0);

struct SsimStudy {
  std::vector<double> per_image;
  double mean = 0.0;
  std::string kernel;
};

SsimStudy run_ssim_study(const ExperimentConfig& cfg, const std::string& kernel_name,
                         int image_count, bool write_files = true);

/// CSV table of analytic update-rule flop counts per (algorithm, n).
std::string flops_table_csv(const std::vector<int>& sizes, int K, int C);

std::string throughput_report_json(const LatencyModel& model);

std::string ssim_study_json(const SsimStudy& study);
std::string train_outcome_json(const ExperimentConfig& cfg, const TrainOutcome& outcome);

/// Per-epoch metrics CSV body (schema-stable, locale-independent).
std::string epoch_metrics_csv(const std::string& algorithm, const SeedResult& result);

}  // namespace f4corr
