#pragma once

// Similarity histograms over [0, 1]: the exact counting histogram and its
// differentiable Gaussian-expansion counterpart.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "oslsp/diffcore.hpp"

namespace oslsp {

/// b equal-width bins tiling [0, 1]: bin i covers [i*width, (i+1)*width), the last bin is closed.
class BinLayout {
 public:
  static constexpr double kMin = 0.0;
  static constexpr double kMax = 1.0;

  explicit BinLayout(std::size_t bins);

  std::size_t bins() const noexcept { return bins_; }
  double width() const noexcept { return width_; }
  double lower(std::size_t i) const { return kMin + static_cast<double>(i) * width_; }
  double upper(std::size_t i) const { return kMin + static_cast<double>(i + 1) * width_; }
  double center(std::size_t i) const { return kMin + (static_cast<double>(i) + 0.5) * width_; }
  /// Index of the bin containing s in [0, 1]; throws for s outside the range.
  std::size_t bin_of(double s) const;

 private:
  std::size_t bins_;
  double width_;
};

struct SimilarityHistogram {
  BinLayout layout;
  std::vector<double> values;
  bool normalized = false;

  double total() const;
  SimilarityHistogram normalized_copy() const;
};

/// How a single sample's Gaussian is turned into per-bin mass.
enum class KernelMode {
  /// Exact integral of the Gaussian over each bin (difference of normal CDFs).
  kIntegrated,
  /// Gaussian density at the bin center times the bin width.
  kMidpoint,
};

struct GaussianExpansion {
  double sigma = 0.1;
  KernelMode mode = KernelMode::kIntegrated;

  /// Throws oslsp::Error unless sigma > 0.
  void validate() const;
  /// Unnormalized mass that a unit sample at s places in bin i.
  double weight(const BinLayout& layout, std::size_t i, double s) const;
  /// d weight / d s.
  double weight_derivative(const BinLayout& layout, std::size_t i, double s) const;
};

/// 0.5 * (cos(x, y) + 1). Throws for zero-norm inputs or dimension mismatch.
double scaled_cosine_similarity(std::span<const double> x, std::span<const double> y);

/// Counts per bin (unnormalized, sums to sims.size()). Throws for values outside [0, 1].
SimilarityHistogram indicator_histogram(std::span<const double> sims, std::size_t bins);

/// Differentiable Gaussian-expansion histogram of a 1 x n row of similarities,
/// renormalized to total mass 1. Returns a 1 x bins row.
diff::Var gaussian_histogram(diff::Var sims, const BinLayout& layout, const GaussianExpansion& expansion);

/// Non-differentiable convenience wrapper around the tape version.
SimilarityHistogram gaussian_histogram(std::span<const double> sims, std::size_t bins,
                                       const GaussianExpansion& expansion);

/// Scaled cosine similarity between rows a[pairs[j].first] and b[pairs[j].second]; returns 1 x pairs.size().
diff::Var scaled_cosine_pairs(diff::Var a, diff::Var b, std::span<const std::pair<std::size_t, std::size_t>> pairs);

/// Writes `bin_center,value` rows with a header line.
void write_histogram_csv(std::ostream& out, const SimilarityHistogram& hist);

/// Total variation distance between two histograms of equal bin count (both normalized first).
double total_variation(const SimilarityHistogram& a, const SimilarityHistogram& b);

}  // namespace oslsp
