#pragma once

// Ordinal class similarity and the ground-truth similarity distribution implied
// by two bags' class proportions.
//
// Class indices are 0-based here (0 .. K-1). Files and the CLI use 1-based labels.

#include <cstddef>
#include <span>
#include <vector>

namespace oslsp {

/// Class-proportion vector: entries in [0,1] summing to 1 (within 1e-9).
class ProportionVector {
 public:
  static constexpr double kTolerance = 1e-9;

  ProportionVector() = default;
  /// Validates and stores `values`. Throws oslsp::Error if not on the simplex.
  explicit ProportionVector(std::vector<double> values);

  static ProportionVector one_hot(std::size_t k, std::size_t num_classes);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const ProportionVector&, const ProportionVector&) = default;

 private:
  std::vector<double> values_;
};

/// 1 - |k' - k| / (K - 1). Requires K >= 2 and both indices < K.
double class_similarity(std::size_t k, std::size_t k2, std::size_t num_classes);

class ClassSimilarityMatrix {
 public:
  explicit ClassSimilarityMatrix(std::size_t num_classes);

  std::size_t num_classes() const noexcept { return k_; }
  double operator()(std::size_t k, std::size_t k2) const { return values_[k * k_ + k2]; }

 private:
  std::size_t k_;
  std::vector<double> values_;
};

/// Probability masses on the K support points s_m = 1 - m/(K-1), m = |k - k'|.
/// Atom m = 0 is similarity 1, atom K-1 is similarity 0.
class GroundTruthSimPDF {
 public:
  GroundTruthSimPDF(std::size_t num_classes, std::vector<double> masses);

  std::size_t num_atoms() const noexcept { return masses_.size(); }
  double similarity(std::size_t atom) const;
  double mass(std::size_t atom) const { return masses_[atom]; }
  std::span<const double> masses() const noexcept { return masses_; }
  double total_mass() const;

 private:
  std::size_t k_;
  std::vector<double> masses_;
};

/// Mass of the class pair {k, k'} is p_k p'_k if k = k', else p_k p'_k' + p_k' p'_k;
/// pairs with equal similarity are summed into one atom.
GroundTruthSimPDF ground_truth_pdf(const ProportionVector& p, const ProportionVector& q);

}  // namespace oslsp
