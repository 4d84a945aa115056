#include "oslsp/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oslsp/error.hpp"

namespace oslsp {

SimilarityHistogram discretize_ground_truth(const GroundTruthSimPDF& pdf, std::size_t bins,
                                            const GaussianExpansion& expansion, GroundTruthBinning mode) {
  const BinLayout layout(bins);
  SimilarityHistogram h{layout, std::vector<double>(bins, 0.0), true};
  if (mode == GroundTruthBinning::kHard) {
    for (std::size_t m = 0; m < pdf.num_atoms(); ++m) h.values[layout.bin_of(pdf.similarity(m))] += pdf.mass(m);
  } else {
    expansion.validate();
    // Same normalization as the predicted histogram: edge truncation is not
    // compensated per atom, so a sample set matching the atoms reproduces P exactly.
    for (std::size_t m = 0; m < pdf.num_atoms(); ++m) {
      const double s = pdf.similarity(m);
      for (std::size_t i = 0; i < bins; ++i) h.values[i] += pdf.mass(m) * expansion.weight(layout, i, s);
    }
  }
  for (double& v : h.values) v = std::max(v, kLogFloor);
  const double total = h.total();
  for (double& v : h.values) v /= total;
  return h;
}

std::vector<std::pair<std::size_t, std::size_t>> make_pairs(std::size_t n, PairingMode mode,
                                                            std::span<const std::size_t> permutation) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (mode == PairingMode::kFullCross) {
    pairs.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) pairs.emplace_back(i, j);
    return pairs;
  }
  if (!permutation.empty() && permutation.size() != n) throw Error("make_pairs: permutation size mismatch");
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, permutation.empty() ? i : permutation[i]);
  return pairs;
}

diff::Var kl_predicted_to_target(diff::Var predicted, std::span<const double> target) {
  const diff::Matrix& p = predicted.value();
  if (p.size() != target.size()) throw Error("kl_predicted_to_target: length mismatch");
  std::vector<double> log_target(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) log_target[i] = std::log(std::max(target[i], kLogFloor));
  double value = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.data[i] > 0.0) value += p.data[i] * (std::log(std::max(p.data[i], kLogFloor)) - log_target[i]);
  }
  const std::size_t ip = predicted.id();
  return predicted.tape().record(
      "kl_predicted_to_target", diff::Matrix::scalar(value), {predicted},
      [ip, log_target = std::move(log_target)](diff::Tape& t, std::size_t self) {
        // d/dp [p log(max(p, eps)) - p log q] = log(max(p, eps)) + [p > eps] - log q
        const double g = t.grad(self).data[0];
        const diff::Matrix& pv = t.value(ip);
        diff::Matrix& gp = t.grad(ip);
        for (std::size_t i = 0; i < pv.size(); ++i) {
          const double pi = pv.data[i];
          const double d = std::log(std::max(pi, kLogFloor)) + (pi > kLogFloor ? 1.0 : 0.0) - log_target[i];
          gp.data[i] += g * d;
        }
      });
}

diff::Var sim_prop_loss(diff::Var features_a, diff::Var features_b, const ProportionVector& pa,
                        const ProportionVector& pb, const SimPropOptions& options,
                        std::span<const std::size_t> permutation) {
  if (features_a.rows() != features_b.rows()) {
    throw Error("sim_prop_loss: bag sizes differ (" + std::to_string(features_a.rows()) + " vs " +
                std::to_string(features_b.rows()) + ")");
  }
  const auto pairs = make_pairs(features_a.rows(), options.pairing, permutation);
  const BinLayout layout(options.bins);
  diff::Var sims = scaled_cosine_pairs(features_a, features_b, pairs);
  diff::Var predicted = gaussian_histogram(sims, layout, options.expansion);
  const SimilarityHistogram target =
      discretize_ground_truth(ground_truth_pdf(pa, pb), options.bins, options.expansion, options.ground_truth);
  return kl_predicted_to_target(predicted, target.values);
}

diff::Var aggregate_predictions(diff::Var confidences) {
  if (confidences.rows() == 0) throw Error("aggregate_predictions: empty bag");
  return diff::mean_rows(confidences);
}

diff::Var prop_loss(const ProportionVector& p, diff::Var predicted) {
  const diff::Matrix& q = predicted.value();
  if (q.size() != p.size()) {
    throw Error("prop_loss: length mismatch (" + std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
  }
  double value = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) value += p[k] * (std::log(p[k]) - std::log(std::max(q.data[k], kLogFloor)));
  }
  const std::size_t iq = predicted.id();
  std::vector<double> target(p.values().begin(), p.values().end());
  return predicted.tape().record("prop_loss", diff::Matrix::scalar(value), {predicted},
                                 [iq, target = std::move(target)](diff::Tape& t, std::size_t self) {
                                   const double g = t.grad(self).data[0];
                                   const diff::Matrix& qv = t.value(iq);
                                   diff::Matrix& gq = t.grad(iq);
                                   for (std::size_t k = 0; k < target.size(); ++k) {
                                     if (target[k] > 0.0 && qv.data[k] > kLogFloor) gq.data[k] -= g * target[k] / qv.data[k];
                                   }
                                 });
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("kl_divergence: length mismatch");
  double value = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) value += p[i] * (std::log(std::max(p[i], kLogFloor)) - std::log(std::max(q[i], kLogFloor)));
  }
  return value;
}

}  // namespace oslsp
