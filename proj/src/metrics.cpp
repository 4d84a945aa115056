#include "oslsp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "oslsp/dataset.hpp"
#include "oslsp/error.hpp"

namespace oslsp {

std::vector<std::size_t> default_class_order(std::size_t num_classes) {
  std::vector<std::size_t> order(num_classes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

std::vector<std::size_t> parse_class_order(const std::string& text, std::size_t num_classes) {
  std::vector<std::size_t> order;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      throw ConfigError("class order entry '" + item + "' is not an integer");
    }
    if (pos != item.size() && item.find_first_not_of(" \t", pos) != std::string::npos) {
      throw ConfigError("class order entry '" + item + "' is not an integer");
    }
    if (v < 1 || v > static_cast<long long>(num_classes)) {
      throw ConfigError("class order entry " + std::to_string(v) + " outside 1.." + std::to_string(num_classes));
    }
    order.push_back(static_cast<std::size_t>(v - 1));
  }
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != default_class_order(num_classes)) {
    throw ConfigError("class order '" + text + "' is not a permutation of 1.." + std::to_string(num_classes));
  }
  return order;
}

MetricsReport evaluate(std::span<const int> predicted, std::span<const int> truth, std::size_t num_classes,
                       std::span<const std::size_t> class_order) {
  if (predicted.size() != truth.size()) throw Error("evaluate: prediction and truth lengths differ");
  if (num_classes == 0) throw Error("evaluate: zero classes");

  MetricsReport r;
  r.class_order = class_order.empty() ? default_class_order(num_classes)
                                      : std::vector<std::size_t>(class_order.begin(), class_order.end());
  {
    std::vector<std::size_t> sorted = r.class_order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != default_class_order(num_classes)) throw Error("evaluate: class_order is not a permutation");
  }
  std::vector<std::size_t> rank(num_classes);
  for (std::size_t i = 0; i < num_classes; ++i) rank[r.class_order[i]] = i;

  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  double squared = 0.0;
  const auto k_int = static_cast<int>(num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == kUnknownClass) continue;
    if (truth[i] < 0 || truth[i] >= k_int || predicted[i] < 0 || predicted[i] >= k_int) {
      throw Error("evaluate: label out of range at position " + std::to_string(i));
    }
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    ++r.confusion[t][p];
    const double diff = static_cast<double>(rank[p]) - static_cast<double>(rank[t]);
    squared += diff * diff;
    ++r.evaluated;
  }
  if (r.evaluated == 0) throw Error("no evaluable instances");

  std::size_t correct = 0;
  for (std::size_t k = 0; k < num_classes; ++k) correct += r.confusion[k][k];
  r.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(r.evaluated);
  r.rmse = std::sqrt(squared / static_cast<double>(r.evaluated));

  r.per_class_precision.resize(num_classes);
  r.per_class_recall.resize(num_classes);
  r.per_class_f1.resize(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    std::size_t predicted_k = 0, actual_k = 0;
    for (std::size_t j = 0; j < num_classes; ++j) {
      predicted_k += r.confusion[j][k];
      actual_k += r.confusion[k][j];
    }
    const double tp = static_cast<double>(r.confusion[k][k]);
    const double prec = predicted_k == 0 ? 0.0 : tp / static_cast<double>(predicted_k);
    const double rec = actual_k == 0 ? 0.0 : tp / static_cast<double>(actual_k);
    r.per_class_precision[k] = prec;
    r.per_class_recall[k] = rec;
    r.per_class_f1[k] = prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
  }
  const double kd = static_cast<double>(num_classes);
  r.precision = std::accumulate(r.per_class_precision.begin(), r.per_class_precision.end(), 0.0) / kd;
  r.recall = std::accumulate(r.per_class_recall.begin(), r.per_class_recall.end(), 0.0) / kd;
  r.f1 = std::accumulate(r.per_class_f1.begin(), r.per_class_f1.end(), 0.0) / kd;
  return r;
}

void write_metrics_csv(std::ostream& out, const MetricsReport& r) {
  out << "accuracy,recall,precision,f1,rmse\n";
  out << format_double(r.accuracy) << ',' << format_double(r.recall) << ',' << format_double(r.precision) << ','
      << format_double(r.f1) << ',' << format_double(r.rmse) << '\n';
}

void write_metrics_table(std::ostream& out, const MetricsReport& r) {
  out << std::fixed;
  out << "| Accuracy [%] | Recall | Precision | F1-score | RMSE  |\n";
  out << "|--------------|--------|-----------|----------|-------|\n";
  out << "| " << std::setw(12) << std::setprecision(3) << r.accuracy << " | " << std::setw(6) << r.recall << " | "
      << std::setw(9) << r.precision << " | " << std::setw(8) << r.f1 << " | " << std::setw(5) << r.rmse << " |\n";
  out << "evaluated instances: " << r.evaluated << '\n';
  out << std::defaultfloat;
}

void write_metrics_json(std::ostream& out, const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["recall"] = r.recall;
  j["precision"] = r.precision;
  j["f1"] = r.f1;
  j["rmse"] = r.rmse;
  j["evaluated"] = r.evaluated;
  std::vector<std::size_t> order_1based;
  for (std::size_t c : r.class_order) order_1based.push_back(c + 1);
  j["class_order"] = order_1based;
  j["per_class_precision"] = r.per_class_precision;
  j["per_class_recall"] = r.per_class_recall;
  j["per_class_f1"] = r.per_class_f1;
  j["confusion"] = r.confusion;
  out << j.dump(2) << '\n';
}

void write_confusion_csv(std::ostream& out, const MetricsReport& r) {
  out << "true\\pred";
  for (std::size_t k = 0; k < r.confusion.size(); ++k) out << ',' << k + 1;
  out << '\n';
  for (std::size_t t = 0; t < r.confusion.size(); ++t) {
    out << t + 1;
    for (std::size_t c : r.confusion[t]) out << ',' << c;
    out << '\n';
  }
}

}  // namespace oslsp
