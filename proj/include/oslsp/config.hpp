#pragma once

// Plain-text `key = value` experiment configuration. Blank lines and lines starting
// with '#' are ignored; unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "oslsp/model.hpp"
#include "oslsp/synth.hpp"
#include "oslsp/train.hpp"

namespace oslsp {

struct ExperimentConfig {
  std::uint64_t seed = 1;

  // Data generation.
  ManifoldConfig manifold{};
  std::size_t per_date_count = 2000;
  /// Size of the held-out evaluation draw per date.
  std::size_t test_per_date_count = 500;
  /// Optional proportion-table file used instead of the built-in 5-class schedule.
  std::string schedule_file;

  Architecture arch{};
  TrainConfig train{};
  /// Also train a head over the untrained backbone for comparison.
  bool train_baseline = true;

  /// Comma-separated 1-based class ranks used for the ordinal RMSE; empty means 1..K.
  std::string class_order;

  /// Propagates `seed`, class count and input dimension into the nested configs.
  void sync();
  void validate() const;
  /// Canonical key/value listing in a fixed order, round-trippable through parse_config.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
};

/// Applies `key = value` lines on top of defaults. Throws ConfigError with the line number.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
void write_config(std::ostream& out, const ExperimentConfig& config);

/// The schedule named by schedule_file, or the default 5-class schedule.
ProportionSchedule resolve_schedule(const ExperimentConfig& config, const std::filesystem::path& base_dir = {});

}  // namespace oslsp
