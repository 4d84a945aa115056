#pragma once

// Synthetic ordinal-class data: K class centers at equal arc length along a
// smooth curve embedded in R^D_in, date-indexed class proportions, isotropic noise.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "oslsp/dataset.hpp"

namespace oslsp {

/// A ProportionTable used as a generation schedule. The first date must be one-hot on class 0.
using ProportionSchedule = ProportionTable;

/// Five-date, five-class default (day0, day3, day5, day7, day14). Only the day0 row
/// (all mass on the first class) is grounded in observation; the other rows are
/// hand-set so that class 2 peaks at day3, classes 3 then 4 rise over day5-day7, and
/// class 5 dominates day14. Throws for num_classes != 5.
ProportionSchedule default_schedule(std::size_t num_classes = 5);

/// Throws unless the first row is one-hot on class 0.
void validate_schedule(const ProportionSchedule& schedule);

struct ManifoldConfig {
  std::size_t input_dim = 32;
  std::size_t num_classes = 5;
  double radius = 1.0;
  /// Angle swept by the curve's main arc, in radians.
  double arc_angle = 2.5;
  /// Amplitude of the out-of-plane wiggle, relative to radius.
  double wiggle = 0.3;
  /// Per-coordinate standard deviation of the isotropic noise.
  double noise_scale = 0.3;
  /// Hard mode jitters each instance's curve position by this many class spacings (std dev).
  bool hard_mode = false;
  double hard_jitter = 0.35;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Manifold {
  ManifoldConfig config;
  /// num_classes x input_dim.
  diff::Matrix centers;
  /// input_dim x 3 orthonormal embedding of the curve's latent coordinates.
  diff::Matrix basis;

  /// Point on the embedded curve at arc-length fraction u in [0, 1].
  std::vector<double> point(double u) const;
};

Manifold build_manifold(const ManifoldConfig& config);

/// Draws per_date_count instances per schedule date: class from the date's
/// proportions, input = class center + noise. Every instance carries its true class.
Dataset generate(const ProportionSchedule& schedule, const ManifoldConfig& manifold, std::size_t per_date_count,
                 std::uint64_t seed);

}  // namespace oslsp
