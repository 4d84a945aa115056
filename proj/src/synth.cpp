#include "oslsp/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "oslsp/error.hpp"
#include "oslsp/random.hpp"

namespace oslsp {

namespace {

constexpr std::size_t kLatentDim = 3;
constexpr std::size_t kArcSamples = 4096;

std::array<double, kLatentDim> latent_curve(const ManifoldConfig& c, double t) {
  const double angle = c.arc_angle * (t - 0.5);
  return {c.radius * std::cos(angle), c.radius * std::sin(angle),
          c.radius * c.wiggle * std::sin(2.0 * std::numbers::pi * t)};
}

// Curve parameter t whose arc-length fraction is u.
double parameter_at(const ManifoldConfig& c, double u) {
  std::vector<double> cum(kArcSamples + 1, 0.0);
  auto prev = latent_curve(c, 0.0);
  for (std::size_t i = 1; i <= kArcSamples; ++i) {
    const auto cur = latent_curve(c, static_cast<double>(i) / kArcSamples);
    double d2 = 0.0;
    for (std::size_t k = 0; k < kLatentDim; ++k) d2 += (cur[k] - prev[k]) * (cur[k] - prev[k]);
    cum[i] = cum[i - 1] + std::sqrt(d2);
    prev = cur;
  }
  const double target = std::clamp(u, 0.0, 1.0) * cum.back();
  const auto it = std::lower_bound(cum.begin(), cum.end(), target);
  if (it == cum.begin()) return 0.0;
  if (it == cum.end()) return 1.0;
  const auto i = static_cast<std::size_t>(it - cum.begin());
  const double frac = (target - cum[i - 1]) / (cum[i] - cum[i - 1]);
  return (static_cast<double>(i - 1) + frac) / kArcSamples;
}

}  // namespace

ProportionSchedule default_schedule(std::size_t num_classes) {
  if (num_classes != 5) {
    throw ConfigError("the default schedule is 5-class; supply a schedule file for K=" + std::to_string(num_classes));
  }
  return ProportionSchedule({"day0", "day3", "day5", "day7", "day14"},
                            {
                                ProportionVector({1.0, 0.0, 0.0, 0.0, 0.0}),
                                ProportionVector({0.25, 0.55, 0.15, 0.05, 0.0}),
                                ProportionVector({0.05, 0.2, 0.45, 0.25, 0.05}),
                                ProportionVector({0.05, 0.05, 0.2, 0.5, 0.2}),
                                ProportionVector({0.15, 0.0, 0.05, 0.2, 0.6}),
                            });
}

void validate_schedule(const ProportionSchedule& schedule) {
  if (schedule.size() == 0) throw ConfigError("schedule has no dates");
  const auto& first = schedule.rows().front();
  if (first != ProportionVector::one_hot(0, first.size())) {
    throw ConfigError("schedule's first date '" + schedule.dates().front() + "' must be one-hot on class 1");
  }
}

void ManifoldConfig::validate() const {
  if (input_dim < kLatentDim) throw ConfigError("input_dim must be at least 3");
  if (num_classes < 2) throw ConfigError("need at least 2 classes");
  if (!(radius > 0.0)) throw ConfigError("radius must be positive");
  if (!(arc_angle > 0.0 && arc_angle < 2.0 * std::numbers::pi)) throw ConfigError("arc_angle must be in (0, 2pi)");
  if (!(noise_scale >= 0.0)) throw ConfigError("noise_scale must be non-negative");
  if (!(hard_jitter >= 0.0)) throw ConfigError("hard_jitter must be non-negative");
}

std::vector<double> Manifold::point(double u) const {
  const auto z = latent_curve(config, parameter_at(config, u));
  std::vector<double> x(config.input_dim, 0.0);
  for (std::size_t d = 0; d < config.input_dim; ++d)
    for (std::size_t k = 0; k < kLatentDim; ++k) x[d] += basis(d, k) * z[k];
  return x;
}

Manifold build_manifold(const ManifoldConfig& config) {
  config.validate();
  Manifold m{config, diff::Matrix(config.num_classes, config.input_dim), diff::Matrix(config.input_dim, kLatentDim)};

  // Gram-Schmidt on Gaussian columns.
  Rng rng(derive_seed(config.seed, "synth.embedding"));
  for (std::size_t k = 0; k < kLatentDim; ++k) {
    std::vector<double> v(config.input_dim);
    for (double& x : v) x = standard_normal(rng);
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < config.input_dim; ++d) dot += v[d] * m.basis(d, j);
      for (std::size_t d = 0; d < config.input_dim; ++d) v[d] -= dot * m.basis(d, j);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t d = 0; d < config.input_dim; ++d) m.basis(d, k) = v[d] / norm;
  }

  for (std::size_t c = 0; c < config.num_classes; ++c) {
    const auto p = m.point(static_cast<double>(c) / static_cast<double>(config.num_classes - 1));
    std::copy(p.begin(), p.end(), m.centers.row_span(c).begin());
  }
  return m;
}

Dataset generate(const ProportionSchedule& schedule, const ManifoldConfig& config, std::size_t per_date_count,
                 std::uint64_t seed) {
  if (per_date_count == 0) throw ConfigError("per_date_count must be positive");
  if (schedule.num_classes() != config.num_classes) {
    throw ConfigError("schedule has " + std::to_string(schedule.num_classes()) + " classes, manifold has " +
                      std::to_string(config.num_classes));
  }
  validate_schedule(schedule);
  const Manifold manifold = build_manifold(config);
  const double spacing = 1.0 / static_cast<double>(config.num_classes - 1);

  Dataset data;
  data.input_dim = config.input_dim;
  data.num_classes = config.num_classes;
  data.instances.reserve(schedule.size() * per_date_count);
  for (std::size_t d = 0; d < schedule.size(); ++d) {
    const std::string& date = schedule.dates()[d];
    const auto p = schedule.rows()[d].values();
    Rng rng(derive_seed(seed, "synth.date." + date));
    for (std::size_t n = 0; n < per_date_count; ++n) {
      const double u = uniform01(rng);
      std::size_t cls = 0;
      double acc = p[0];
      while (u >= acc && cls + 1 < p.size()) acc += p[++cls];
      // Guard against rounding landing on a zero-mass tail class.
      while (p[cls] == 0.0 && cls > 0) --cls;

      std::vector<double> x;
      if (config.hard_mode) {
        const double pos = static_cast<double>(cls) * spacing + config.hard_jitter * spacing * standard_normal(rng);
        x = manifold.point(pos);
      } else {
        const auto c = manifold.centers.row_span(cls);
        x.assign(c.begin(), c.end());
      }
      for (double& v : x) v += config.noise_scale * standard_normal(rng);
      data.instances.push_back(Instance{date, static_cast<int>(cls), std::move(x)});
    }
  }
  return data;
}

}  // namespace oslsp
