#pragma once

// Instance-level classification metrics, including an ordinal RMSE over class ranks.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace oslsp {

struct MetricsReport {
  double accuracy = 0.0;  // percent
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double rmse = 0.0;
  std::size_t evaluated = 0;
  /// confusion[true][pred]
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<double> per_class_precision;
  std::vector<double> per_class_recall;
  std::vector<double> per_class_f1;
  /// class_order[r] is the 0-based class at rank r.
  std::vector<std::size_t> class_order;
};

/// Identity order 0..K-1.
std::vector<std::size_t> default_class_order(std::size_t num_classes);

/// Parses a comma-separated 1-based permutation such as "2,1,5,4,3".
std::vector<std::size_t> parse_class_order(const std::string& text, std::size_t num_classes);

/// Labels are 0-based; truth entries equal to -1 are skipped. Macro scores average
/// per-class values, counting a zero denominator as 0. Throws when nothing is left to evaluate.
MetricsReport evaluate(std::span<const int> predicted, std::span<const int> truth, std::size_t num_classes,
                       std::span<const std::size_t> class_order = {});

/// Columns: accuracy,recall,precision,f1,rmse.
void write_metrics_csv(std::ostream& out, const MetricsReport& report);
void write_metrics_table(std::ostream& out, const MetricsReport& report);
void write_metrics_json(std::ostream& out, const MetricsReport& report);
/// Header `true\pred,1,...,K`, one row per true class.
void write_confusion_csv(std::ostream& out, const MetricsReport& report);

}  // namespace oslsp
