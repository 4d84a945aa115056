#pragma once

// KL-divergence losses: the similarity-proportion loss between two bags and the
// bag-level class-proportion loss, plus bag-level aggregation of predictions.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "oslsp/diffcore.hpp"
#include "oslsp/ordinal.hpp"
#include "oslsp/simhist.hpp"

namespace oslsp {

/// Floor applied to distribution entries inside logarithms.
inline constexpr double kLogFloor = 1e-8;

enum class PairingMode {
  /// x_n against y_perm(n): N similarities.
  kAligned,
  /// every x_n against every y_m: N^2 similarities.
  kFullCross,
};

enum class GroundTruthBinning {
  /// Each atom spread with the same Gaussian kernel as the prediction.
  kSmoothed,
  /// Each atom's mass assigned to the bin containing its similarity.
  kHard,
};

struct SimPropOptions {
  std::size_t bins = 20;
  GaussianExpansion expansion{};
  PairingMode pairing = PairingMode::kAligned;
  GroundTruthBinning ground_truth = GroundTruthBinning::kSmoothed;
};

/// Maps ground-truth atoms onto bins. Every bin is floored at kLogFloor and the
/// result renormalized to sum 1.
SimilarityHistogram discretize_ground_truth(const GroundTruthSimPDF& pdf, std::size_t bins,
                                            const GaussianExpansion& expansion,
                                            GroundTruthBinning mode = GroundTruthBinning::kSmoothed);

/// Instance pairs compared between two bags of size n. In aligned mode `permutation`
/// (size n) maps x_j to y_permutation[j]; an empty permutation means identity.
std::vector<std::pair<std::size_t, std::size_t>> make_pairs(std::size_t n, PairingMode mode,
                                                            std::span<const std::size_t> permutation = {});

/// KL(pred || target) = sum pred_i log(pred_i / target_i) with both arguments floored in the log.
diff::Var kl_predicted_to_target(diff::Var predicted, std::span<const double> target);

/// Similarity-proportion loss KL(P_hat || P) for two bags of features (each N x D).
diff::Var sim_prop_loss(diff::Var features_a, diff::Var features_b, const ProportionVector& pa,
                        const ProportionVector& pb, const SimPropOptions& options,
                        std::span<const std::size_t> permutation = {});

/// Column mean of an N x K matrix of per-instance class confidences.
diff::Var aggregate_predictions(diff::Var confidences);

/// KL(p || p_hat) = sum p_k log(p_k / p_hat_k), with 0 log 0 = 0 and p_hat floored.
diff::Var prop_loss(const ProportionVector& p, diff::Var predicted);

/// Plain-value forms used by tests and diagnostics.
double kl_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace oslsp
