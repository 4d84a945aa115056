#include "oslsp/simhist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "oslsp/error.hpp"

namespace oslsp {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Phi(b) - Phi(a) for a <= b, evaluated on the tail that avoids cancellation.
double normal_interval(double a, double b) {
  if (a >= 0.0) return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
  return 1.0 - 0.5 * std::erfc(-a * kInvSqrt2) - 0.5 * std::erfc(b * kInvSqrt2);
}

}  // namespace

BinLayout::BinLayout(std::size_t bins) : bins_(bins), width_(0.0) {
  if (bins == 0) throw Error("histogram needs at least one bin");
  width_ = (kMax - kMin) / static_cast<double>(bins);
}

std::size_t BinLayout::bin_of(double s) const {
  if (!(s >= kMin && s <= kMax)) throw Error("similarity " + std::to_string(s) + " outside [0,1]");
  const auto i = static_cast<std::size_t>(std::floor((s - kMin) / width_));
  return i >= bins_ ? bins_ - 1 : i;
}

double SimilarityHistogram::total() const {
  double t = 0.0;
  for (double v : values) t += v;
  return t;
}

SimilarityHistogram SimilarityHistogram::normalized_copy() const {
  const double t = total();
  if (!(t > 0.0)) throw Error("cannot normalize a histogram with zero mass");
  SimilarityHistogram out{layout, values, true};
  for (double& v : out.values) v /= t;
  return out;
}

void GaussianExpansion::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error("Gaussian expansion sigma must be positive");
}

double GaussianExpansion::weight(const BinLayout& layout, std::size_t i, double s) const {
  if (mode == KernelMode::kMidpoint) {
    return normal_pdf((s - layout.center(i)) / sigma) / sigma * layout.width();
  }
  return normal_interval((layout.lower(i) - s) / sigma, (layout.upper(i) - s) / sigma);
}

double GaussianExpansion::weight_derivative(const BinLayout& layout, std::size_t i, double s) const {
  if (mode == KernelMode::kMidpoint) {
    const double d = layout.center(i) - s;
    return weight(layout, i, s) * d / (sigma * sigma);
  }
  return (normal_pdf((layout.lower(i) - s) / sigma) - normal_pdf((layout.upper(i) - s) / sigma)) / sigma;
}

double scaled_cosine_similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("scaled_cosine_similarity: dimension mismatch");
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) throw Error("scaled_cosine_similarity: zero-norm vector");
  const double c = std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
  return 0.5 * (c + 1.0);
}

SimilarityHistogram indicator_histogram(std::span<const double> sims, std::size_t bins) {
  SimilarityHistogram h{BinLayout(bins), std::vector<double>(bins, 0.0), false};
  for (double s : sims) h.values[h.layout.bin_of(s)] += 1.0;
  return h;
}

diff::Var gaussian_histogram(diff::Var sims, const BinLayout& layout, const GaussianExpansion& expansion) {
  expansion.validate();
  const diff::Matrix& s = sims.value();
  if (s.rows != 1 || s.cols == 0) throw Error("gaussian_histogram: expects a non-empty 1 x n row of similarities");
  const std::size_t bins = layout.bins();

  diff::Matrix raw(1, bins);
  for (double sn : s.data)
    for (std::size_t i = 0; i < bins; ++i) raw.data[i] += expansion.weight(layout, i, sn);
  double total = 0.0;
  for (double v : raw.data) total += v;
  if (!(total > 0.0)) throw NonFiniteError("gaussian_histogram", "histogram has zero total mass");
  diff::Matrix out(1, bins);
  for (std::size_t i = 0; i < bins; ++i) out.data[i] = raw.data[i] / total;

  const std::size_t is = sims.id();
  return sims.tape().record("gaussian_histogram", std::move(out), {sims},
                            [is, layout, expansion, total](diff::Tape& t, std::size_t self) {
                              const diff::Matrix& g = t.grad(self);
                              const diff::Matrix& p = t.value(self);
                              double dot = 0.0;
                              for (std::size_t i = 0; i < p.cols; ++i) dot += g.data[i] * p.data[i];
                              std::vector<double> graw(p.cols);
                              for (std::size_t i = 0; i < p.cols; ++i) graw[i] = (g.data[i] - dot) / total;
                              const diff::Matrix& sv = t.value(is);
                              diff::Matrix& gs = t.grad(is);
                              for (std::size_t n = 0; n < sv.cols; ++n) {
                                double acc = 0.0;
                                for (std::size_t i = 0; i < p.cols; ++i)
                                  acc += graw[i] * expansion.weight_derivative(layout, i, sv.data[n]);
                                gs.data[n] += acc;
                              }
                            });
}

SimilarityHistogram gaussian_histogram(std::span<const double> sims, std::size_t bins,
                                       const GaussianExpansion& expansion) {
  diff::Tape tape;
  const BinLayout layout(bins);
  auto h = gaussian_histogram(tape.constant(diff::Matrix::row({sims.begin(), sims.end()})), layout, expansion);
  return SimilarityHistogram{layout, h.value().data, true};
}

diff::Var scaled_cosine_pairs(diff::Var a, diff::Var b, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  const diff::Matrix& av = a.value();
  const diff::Matrix& bv = b.value();
  if (av.cols != bv.cols) throw Error("scaled_cosine_pairs: feature dimension mismatch");
  if (pairs.empty()) throw Error("scaled_cosine_pairs: no pairs");
  const std::size_t dim = av.cols;

  std::vector<double> norm_a(av.rows), norm_b(bv.rows);
  for (std::size_t r = 0; r < av.rows; ++r) {
    double s = 0.0;
    for (double v : av.row_span(r)) s += v * v;
    norm_a[r] = std::sqrt(s);
  }
  for (std::size_t r = 0; r < bv.rows; ++r) {
    double s = 0.0;
    for (double v : bv.row_span(r)) s += v * v;
    norm_b[r] = std::sqrt(s);
  }

  std::vector<std::pair<std::size_t, std::size_t>> owned(pairs.begin(), pairs.end());
  std::vector<double> cosines(owned.size());
  diff::Matrix out(1, owned.size());
  for (std::size_t j = 0; j < owned.size(); ++j) {
    const auto [ra, rb] = owned[j];
    if (ra >= av.rows || rb >= bv.rows) throw Error("scaled_cosine_pairs: pair index out of range");
    if (norm_a[ra] == 0.0 || norm_b[rb] == 0.0) throw Error("scaled_cosine_pairs: zero-norm feature vector");
    double dot = 0.0;
    for (std::size_t d = 0; d < dim; ++d) dot += av(ra, d) * bv(rb, d);
    cosines[j] = dot / (norm_a[ra] * norm_b[rb]);
    out.data[j] = 0.5 * (cosines[j] + 1.0);
  }

  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(
      "scaled_cosine_pairs", std::move(out), {a, b},
      [ia, ib, dim, owned = std::move(owned), cosines = std::move(cosines), norm_a = std::move(norm_a),
       norm_b = std::move(norm_b)](diff::Tape& t, std::size_t self) {
        // d cos / d x = y / (|x||y|) - cos * x / |x|^2
        const diff::Matrix& g = t.grad(self);
        const diff::Matrix& av = t.value(ia);
        const diff::Matrix& bv = t.value(ib);
        const bool need_a = t.requires_grad(ia), need_b = t.requires_grad(ib);
        for (std::size_t j = 0; j < owned.size(); ++j) {
          const double gc = 0.5 * g.data[j];
          if (gc == 0.0) continue;
          const auto [ra, rb] = owned[j];
          const double na = norm_a[ra], nb = norm_b[rb], c = cosines[j];
          if (need_a) {
            diff::Matrix& ga = t.grad(ia);
            for (std::size_t d = 0; d < dim; ++d) ga(ra, d) += gc * (bv(rb, d) / (na * nb) - c * av(ra, d) / (na * na));
          }
          if (need_b) {
            diff::Matrix& gb = t.grad(ib);
            for (std::size_t d = 0; d < dim; ++d) gb(rb, d) += gc * (av(ra, d) / (na * nb) - c * bv(rb, d) / (nb * nb));
          }
        }
      });
}

void write_histogram_csv(std::ostream& out, const SimilarityHistogram& hist) {
  out << "bin_center,value\n";
  out.precision(17);
  for (std::size_t i = 0; i < hist.values.size(); ++i) out << hist.layout.center(i) << ',' << hist.values[i] << '\n';
}

double total_variation(const SimilarityHistogram& a, const SimilarityHistogram& b) {
  if (a.values.size() != b.values.size()) throw Error("total_variation: bin count mismatch");
  const auto na = a.normalized_copy();
  const auto nb = b.normalized_copy();
  double tv = 0.0;
  for (std::size_t i = 0; i < na.values.size(); ++i) tv += std::abs(na.values[i] - nb.values[i]);
  return 0.5 * tv;
}

}  // namespace oslsp
