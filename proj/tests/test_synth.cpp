#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "oslsp/error.hpp"
#include "oslsp/simhist.hpp"
#include "oslsp/synth.hpp"
#include "support.hpp"

using namespace oslsp;

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("default schedule") {
    const auto s = default_schedule();
    REQUIRE(s.size() == 5);
    CHECK(s.dates().front() == "day0");
    CHECK(s.rows().front() == ProportionVector::one_hot(0, 5));
    const auto day3 = s.at("day3").values();
    CHECK(std::max_element(day3.begin(), day3.end()) - day3.begin() == 1);
    for (const auto& row : s.rows()) {
      CHECK(std::abs(std::accumulate(row.values().begin(), row.values().end(), 0.0) - 1.0) < 1e-9);
    }
    CHECK_THROWS_AS(default_schedule(3), ConfigError);
  }

  TEST_CASE("schedule must start one-hot on the first class") {
    const ProportionSchedule bad(std::vector<std::string>{"d0"}, std::vector<ProportionVector>{ProportionVector({0.5, 0.5})});
    CHECK_THROWS_AS(validate_schedule(bad), ConfigError);
  }

  TEST_CASE("class centers follow ordinal geometry") {
    const Manifold m = build_manifold(ManifoldConfig{});
    const std::size_t k = m.centers.rows;
    for (std::size_t a = 0; a + 1 < k; ++a) {
      CHECK(distance(m.centers.row_span(a), m.centers.row_span(a + 1)) <
            distance(m.centers.row_span(0), m.centers.row_span(k - 1)));
    }
    // Mean raw similarity decreases with rank distance.
    double previous = 2.0;
    for (std::size_t gap = 1; gap < k; ++gap) {
      double total = 0.0;
      for (std::size_t a = 0; a + gap < k; ++a) {
        total += scaled_cosine_similarity(m.centers.row_span(a), m.centers.row_span(a + gap));
      }
      const double mean = total / static_cast<double>(k - gap);
      CHECK(mean < previous);
      previous = mean;
    }
  }

  TEST_CASE("zero noise places instances on their class center") {
    ManifoldConfig cfg;
    cfg.noise_scale = 0.0;
    const Manifold m = build_manifold(cfg);
    const Dataset d = generate(default_schedule(), cfg, 50, 4);
    for (const Instance& inst : d.instances) {
      const auto c = m.centers.row_span(static_cast<std::size_t>(inst.true_class));
      CHECK(std::equal(inst.input.begin(), inst.input.end(), c.begin()));
    }
  }

  TEST_CASE("empirical proportions follow the schedule") {
    const auto schedule = default_schedule();
    const Dataset d = generate(schedule, ManifoldConfig{}, 10000, 19);
    std::map<std::string, std::vector<double>> counts;
    for (const Instance& inst : d.instances) {
      auto& c = counts[inst.date];
      c.resize(5, 0.0);
      c[static_cast<std::size_t>(inst.true_class)] += 1.0;
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const auto& c = counts[schedule.dates()[i]];
      for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(c[k] / 10000.0 - schedule.rows()[i][k]) < 0.02);
    }
  }

  TEST_CASE("generation is seeded") {
    const Dataset a = generate(default_schedule(), ManifoldConfig{}, 20, 8);
    const Dataset b = generate(default_schedule(), ManifoldConfig{}, 20, 8);
    const Dataset c = generate(default_schedule(), ManifoldConfig{}, 20, 9);
    REQUIRE(a.instances.size() == 100);
    bool differs = false;
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
      CHECK(a.instances[i].input == b.instances[i].input);
      CHECK(a.instances[i].true_class == b.instances[i].true_class);
      differs = differs || a.instances[i].input != c.instances[i].input;
    }
    CHECK(differs);
  }

  TEST_CASE("hard mode overlaps classes more than the default") {
    ManifoldConfig easy;
    easy.noise_scale = 0.0;
    ManifoldConfig hard = easy;
    hard.hard_mode = true;
    const Dataset a = generate(default_schedule(), easy, 40, 2);
    const Dataset b = generate(default_schedule(), hard, 40, 2);
    const Manifold m = build_manifold(easy);
    std::size_t off_center = 0;
    for (const Instance& inst : b.instances) {
      if (distance(inst.input, m.centers.row_span(static_cast<std::size_t>(inst.true_class))) > 1e-9) ++off_center;
    }
    CHECK(off_center > b.instances.size() / 2);
    CHECK(a.instances.size() == b.instances.size());
  }

  TEST_CASE("invalid manifold settings are rejected") {
    ManifoldConfig cfg;
    cfg.noise_scale = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    ManifoldConfig small;
    small.input_dim = 2;
    CHECK_THROWS_AS(small.validate(), ConfigError);
  }
}
