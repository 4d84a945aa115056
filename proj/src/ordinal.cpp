#include "oslsp/ordinal.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "oslsp/error.hpp"

namespace oslsp {

ProportionVector::ProportionVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error("proportion vector is empty");
  double total = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error("proportion entry " + std::to_string(v) + " outside [0,1]");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kTolerance) {
    throw Error("proportion vector sums to " + std::to_string(total) + ", expected 1");
  }
}

ProportionVector ProportionVector::one_hot(std::size_t k, std::size_t num_classes) {
  if (k >= num_classes) throw Error("one_hot: class index out of range");
  std::vector<double> v(num_classes, 0.0);
  v[k] = 1.0;
  return ProportionVector(std::move(v));
}

double class_similarity(std::size_t k, std::size_t k2, std::size_t num_classes) {
  if (num_classes < 2) throw Error("class_similarity: need at least 2 classes");
  if (k >= num_classes || k2 >= num_classes) {
    throw Error("class_similarity: class index out of range for K=" + std::to_string(num_classes));
  }
  const double dist = k > k2 ? static_cast<double>(k - k2) : static_cast<double>(k2 - k);
  return 1.0 - dist / static_cast<double>(num_classes - 1);
}

ClassSimilarityMatrix::ClassSimilarityMatrix(std::size_t num_classes) : k_(num_classes) {
  values_.resize(k_ * k_);
  for (std::size_t a = 0; a < k_; ++a)
    for (std::size_t b = 0; b < k_; ++b) values_[a * k_ + b] = class_similarity(a, b, k_);
}

GroundTruthSimPDF::GroundTruthSimPDF(std::size_t num_classes, std::vector<double> masses)
    : k_(num_classes), masses_(std::move(masses)) {
  if (k_ < 2) throw Error("GroundTruthSimPDF: need at least 2 classes");
  if (masses_.size() != k_) throw Error("GroundTruthSimPDF: expected one mass per class distance");
}

double GroundTruthSimPDF::similarity(std::size_t atom) const {
  return 1.0 - static_cast<double>(atom) / static_cast<double>(k_ - 1);
}

double GroundTruthSimPDF::total_mass() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

GroundTruthSimPDF ground_truth_pdf(const ProportionVector& p, const ProportionVector& q) {
  if (p.size() != q.size()) {
    throw Error("ground_truth_pdf: proportion vectors have lengths " + std::to_string(p.size()) + " and " +
                std::to_string(q.size()));
  }
  const std::size_t num_classes = p.size();
  if (num_classes < 2) throw Error("ground_truth_pdf: need at least 2 classes");
  std::vector<double> masses(num_classes, 0.0);
  for (std::size_t k = 0; k < num_classes; ++k) {
    masses[0] += p[k] * q[k];
    for (std::size_t k2 = k + 1; k2 < num_classes; ++k2) masses[k2 - k] += p[k] * q[k2] + p[k2] * q[k];
  }
  return GroundTruthSimPDF(num_classes, std::move(masses));
}

}  // namespace oslsp
