#pragma once

// Implementations of the `oslsp` subcommands. Each returns normally on success and
// throws oslsp::Error (or a subclass) on failure; the CLI maps exceptions to exit codes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "oslsp/config.hpp"

namespace oslsp::cli {

/// Overrides taken from command-line flags; unset fields leave the config untouched.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> bins;
  std::optional<double> sigma;
};

/// Loads `config_path` (defaults when empty) and applies overrides.
ExperimentConfig resolve_config(const std::filesystem::path& config_path, const Overrides& overrides);

struct GenDataArgs {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  Overrides overrides;
};

/// Writes dataset.csv, test.csv (held-out draw from the same manifold) and proportions.csv.
void gen_data(const GenDataArgs& args, std::ostream& report);

struct TrainArgs {
  std::filesystem::path config;
  std::filesystem::path data;
  /// Defaults to proportions.csv next to the dataset.
  std::filesystem::path proportions;
  std::filesystem::path out_dir;
  Overrides overrides;
  bool deterministic = false;
};

/// Writes manifest.json (before training, completed afterwards), config.txt, train_log.csv,
/// stage1.ckpt, stage2.ckpt, model.ckpt and, when enabled, baseline.ckpt and baseline_log.csv.
void train(const TrainArgs& args, std::ostream& report);

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::string class_order;
  std::filesystem::path out_dir;
};

/// Writes metrics.txt, metrics.csv, metrics.json and confusion.csv.
void eval(const EvalArgs& args, std::ostream& report);

struct InspectArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::filesystem::path proportions;
  std::filesystem::path config;
  /// `dateA[:index],dateB[:index]`.
  std::string bags = "day0:0,day0:1";
  std::filesystem::path out_dir;
  Overrides overrides;
};

/// Writes histogram.csv (bin_center,p_hat,p) and summary.txt (kl = ...).
void inspect_hist(const InspectArgs& args, std::ostream& report);

}  // namespace oslsp::cli
