#pragma once

// End-to-end orchestration shared by the CLI and the acceptance suite.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oslsp/bags.hpp"
#include "oslsp/config.hpp"
#include "oslsp/dataset.hpp"
#include "oslsp/metrics.hpp"
#include "oslsp/model.hpp"
#include "oslsp/train.hpp"

namespace oslsp {

/// Receives a model snapshot under a stable name such as "stage1_epoch5" or "stage2".
using SnapshotSink = std::function<void(const std::string& name, const ModelParams& model)>;

struct ExperimentResult {
  ModelParams model;
  /// Same initial weights as `model`, backbone left untrained, head trained identically.
  std::optional<ModelParams> baseline;
  TrainLog log;
  TrainLog baseline_log;
  std::size_t bag_count = 0;
};

/// Builds bags, then runs stage 1 and stage 2 (or joint training), and the
/// frozen-random-backbone baseline when enabled.
ExperimentResult run_training(const Dataset& data, const ProportionTable& table, const ExperimentConfig& config,
                              const SnapshotSink& sink = {});

MetricsReport evaluate_model(const ModelParams& model, const Dataset& data,
                             std::span<const std::size_t> class_order = {});

struct HistogramInspection {
  std::vector<double> bin_centers;
  std::vector<double> predicted;
  std::vector<double> target;
  double kl = 0.0;
};

/// Predicted vs ground-truth similarity histograms for two bags under `model`'s backbone.
HistogramInspection inspect_histograms(const ModelParams& model, const Bag& a, const Bag& b,
                                       const SimPropOptions& options);

/// `stage,step,loss` rows.
void write_train_log_csv(std::ostream& out, const TrainLog& log);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace oslsp
