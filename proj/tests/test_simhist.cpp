#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oslsp/error.hpp"
#include "oslsp/simhist.hpp"
#include "support.hpp"

using namespace oslsp;
using namespace oslsp::diff;

namespace {

std::vector<double> uniform_sims(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& s : v) s = uniform01(rng);
  return v;
}

}  // namespace

TEST_SUITE("simhist") {
  TEST_CASE("scaled cosine similarity") {
    const std::vector<double> x = {1.0, 2.0, -0.5};
    const std::vector<double> neg = {-1.0, -2.0, 0.5};
    const std::vector<double> a = {1.0, 0.0}, b = {0.0, 3.0};
    CHECK(scaled_cosine_similarity(x, x) == doctest::Approx(1.0));
    CHECK(scaled_cosine_similarity(x, neg) == doctest::Approx(0.0));
    CHECK(scaled_cosine_similarity(a, b) == doctest::Approx(0.5));
    const std::vector<double> zero = {0.0, 0.0};
    CHECK_THROWS_AS(scaled_cosine_similarity(zero, a), Error);
  }

  TEST_CASE("bin layout") {
    const BinLayout layout(10);
    CHECK(layout.width() == doctest::Approx(0.1));
    CHECK(layout.bin_of(0.0) == 0);
    CHECK(layout.bin_of(0.55) == 5);
    CHECK(layout.bin_of(1.0) == 9);
    CHECK(layout.center(0) == doctest::Approx(0.05));
    CHECK_THROWS_AS(layout.bin_of(1.01), Error);
    CHECK_THROWS_AS(BinLayout(0), Error);
  }

  TEST_CASE("indicator histogram examples") {
    const std::vector<double> one = {0.55};
    const auto h = indicator_histogram(one, 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(h.values[i] == (i == 5 ? 1.0 : 0.0));
    const std::vector<double> top = {1.0};
    CHECK(indicator_histogram(top, 10).values[9] == 1.0);
  }

  TEST_CASE("indicator histogram of uniform sims passes chi-square") {
    const auto sims = uniform_sims(1000, 99);
    const auto h = indicator_histogram(sims, 10);
    double chi2 = 0.0;
    for (double c : h.values) chi2 += (c - 100.0) * (c - 100.0) / 100.0;
    // 9 degrees of freedom, 99.9th percentile.
    CHECK(chi2 < 27.88);
    CHECK(std::accumulate(h.values.begin(), h.values.end(), 0.0) == 1000.0);
  }

  TEST_CASE("gaussian histogram is symmetric around the sample's bin") {
    for (KernelMode mode : {KernelMode::kIntegrated, KernelMode::kMidpoint}) {
      const BinLayout layout(10);
      const std::vector<double> s = {layout.center(4)};
      // Bin 4 center is 0.45; compare 4-d with 4+d for d within range.
      const std::vector<double> centered = {0.5};
      const auto h = gaussian_histogram(centered, 10, GaussianExpansion{0.1, mode});
      CHECK(std::accumulate(h.values.begin(), h.values.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      for (std::size_t d = 0; d < 5; ++d) CHECK(h.values[4 - d] == doctest::Approx(h.values[5 + d]).epsilon(1e-12));
      const auto peak = gaussian_histogram(s, 10, GaussianExpansion{0.1, mode});
      for (std::size_t i = 0; i < 10; ++i) {
        if (i != 4) CHECK(peak.values[i] < peak.values[4]);
      }
      for (std::size_t d = 1; d < 5; ++d) CHECK(peak.values[4 - d] == doctest::Approx(peak.values[4 + d]).epsilon(1e-12));
    }
  }

  TEST_CASE("gaussian histogram converges to the indicator histogram") {
    Rng rng(17);
    std::vector<double> sims;
    const BinLayout layout(20);
    while (sims.size() < 500) {
      const double s = uniform01(rng);
      const double offset = s / layout.width() - std::floor(s / layout.width());
      if (offset > 0.1 && offset < 0.9) sims.push_back(s);
    }
    const auto oracle = indicator_histogram(sims, 20).normalized_copy();
    double previous = 2.0;
    for (double sigma : {0.1, 0.05, 0.01, 0.005}) {
      const double tv = total_variation(gaussian_histogram(sims, 20, GaussianExpansion{sigma}), oracle);
      CHECK(tv < previous);
      previous = tv;
    }
    CHECK(previous < 0.05);
  }

  TEST_CASE("shifting sims by one bin width shifts the mass pattern") {
    Rng rng(23);
    std::vector<double> sims(200), shifted(200);
    for (std::size_t i = 0; i < sims.size(); ++i) {
      sims[i] = 0.3 + 0.2 * uniform01(rng);
      shifted[i] = sims[i] + 0.05;
    }
    const auto a = gaussian_histogram(sims, 20, GaussianExpansion{0.03});
    const auto b = gaussian_histogram(shifted, 20, GaussianExpansion{0.03});
    for (std::size_t i = 0; i + 1 < 20; ++i) CHECK(b.values[i + 1] == doctest::Approx(a.values[i]).epsilon(1e-6));
  }

  TEST_CASE("histogram bin gradient wrt a feature coordinate passes grad_check") {
    Rng rng(31);
    Parameter fa("fa", testing::random_matrix(3, 4, rng));
    Parameter fb("fb", testing::random_matrix(3, 4, rng));
    Parameter* params[] = {&fa, &fb};
    const std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 1}, {1, 2}, {2, 0}, {0, 0}};
    const BinLayout layout(10);
    for (KernelMode mode : {KernelMode::kIntegrated, KernelMode::kMidpoint}) {
      for (std::size_t bin : {2u, 5u, 8u}) {
        const double err = grad_check(
            [&](Tape& t) {
              Var h = gaussian_histogram(scaled_cosine_pairs(t.param(fa), t.param(fb), pairs), layout,
                                         GaussianExpansion{0.1, mode});
              Matrix pick(1, layout.bins());
              pick.data[bin] = 1.0;
              return sum(mul(h, t.constant(pick)));
            },
            params);
        CHECK(err < 1e-4);
      }
    }
  }

  TEST_CASE("non-positive sigma is rejected") {
    const std::vector<double> s = {0.5};
    CHECK_THROWS_AS(gaussian_histogram(s, 10, GaussianExpansion{0.0}), Error);
  }
}
