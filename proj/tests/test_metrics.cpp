#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oslsp/error.hpp"
#include "oslsp/metrics.hpp"

using namespace oslsp;

TEST_SUITE("metrics") {
  TEST_CASE("perfect predictions") {
    const std::vector<int> y = {0, 1, 2, 2, 1};
    const auto r = evaluate(y, y, 3);
    CHECK(r.accuracy == 100.0);
    CHECK(r.rmse == 0.0);
    CHECK(r.f1 == doctest::Approx(1.0));
  }

  TEST_CASE("off by one rank gives unit rmse") {
    const std::vector<int> truth = {0, 1, 2, 3, 4, 3};
    const std::vector<int> pred = {1, 2, 3, 4, 3, 2};
    CHECK(evaluate(pred, truth, 5).rmse == 1.0);
  }

  TEST_CASE("crafted ten-instance reference") {
    // Confusion (rows truth, cols predicted), K=3:
    //   [3 1 0]
    //   [1 2 1]
    //   [0 1 1]
    const std::vector<int> truth = {0, 0, 0, 0, 1, 1, 1, 1, 2, 2};
    const std::vector<int> pred = {0, 0, 0, 1, 0, 1, 1, 2, 1, 2};
    const auto r = evaluate(pred, truth, 3);
    CHECK(r.evaluated == 10);
    CHECK(r.confusion == std::vector<std::vector<std::size_t>>{{3, 1, 0}, {1, 2, 1}, {0, 1, 1}});
    CHECK(r.accuracy == doctest::Approx(60.0));
    const double p[] = {3.0 / 4.0, 2.0 / 4.0, 1.0 / 2.0};
    const double rc[] = {3.0 / 4.0, 2.0 / 4.0, 1.0 / 2.0};
    double f1 = 0.0;
    for (int k = 0; k < 3; ++k) {
      CHECK(r.per_class_precision[k] == doctest::Approx(p[k]));
      CHECK(r.per_class_recall[k] == doctest::Approx(rc[k]));
      f1 += 2 * p[k] * rc[k] / (p[k] + rc[k]) / 3.0;
    }
    CHECK(r.precision == doctest::Approx((0.75 + 0.5 + 0.5) / 3.0));
    CHECK(r.recall == doctest::Approx((0.75 + 0.5 + 0.5) / 3.0));
    CHECK(r.f1 == doctest::Approx(f1));
    // Four predictions off by one rank.
    CHECK(r.rmse == doctest::Approx(std::sqrt(4.0 / 10.0)).epsilon(1e-12));
  }

  TEST_CASE("zero denominators contribute zero") {
    const std::vector<int> truth = {0, 0, 1};
    const std::vector<int> pred = {0, 0, 0};
    const auto r = evaluate(pred, truth, 3);
    CHECK(r.per_class_precision[1] == 0.0);
    CHECK(r.per_class_recall[2] == 0.0);
    CHECK(r.precision == doctest::Approx((2.0 / 3.0) / 3.0));
  }

  TEST_CASE("unknown truth labels are skipped") {
    const std::vector<int> truth = {0, -1, 1};
    const std::vector<int> pred = {0, 1, 1};
    const auto r = evaluate(pred, truth, 2);
    CHECK(r.evaluated == 2);
    CHECK(r.accuracy == 100.0);
    const std::vector<int> unknown = {-1, -1};
    const std::vector<int> two = {0, 1};
    CHECK_THROWS_WITH_AS(evaluate(two, unknown, 2), doctest::Contains("no evaluable instances"), Error);
  }

  TEST_CASE("class order remaps ranks for rmse only") {
    const std::vector<int> truth = {0, 1, 2};
    const std::vector<int> pred = {1, 2, 0};
    const auto natural = evaluate(pred, truth, 3);
    const auto reordered = evaluate(pred, truth, 3, parse_class_order("2,3,1", 3));
    CHECK(natural.accuracy == reordered.accuracy);
    CHECK(natural.f1 == reordered.f1);
    CHECK(natural.rmse == doctest::Approx(std::sqrt(6.0 / 3.0)));
    // Classes listed by rank: truth ranks {2,0,1}, predicted ranks {0,1,2}.
    CHECK(reordered.rmse == doctest::Approx(std::sqrt(6.0 / 3.0)));
    const auto skew = evaluate(std::vector<int>{1, 1}, std::vector<int>{0, 2}, 3, parse_class_order("1,3,2", 3));
    CHECK(skew.rmse == doctest::Approx(std::sqrt((4.0 + 1.0) / 2.0)));
    CHECK_THROWS_AS(parse_class_order("1,1,2", 3), Error);
    CHECK_THROWS_AS(parse_class_order("1,2", 3), Error);
  }

  TEST_CASE("rmse is invariant under rank-preserving relabeling") {
    const std::vector<int> truth = {0, 1, 2, 2, 1, 0};
    const std::vector<int> pred = {2, 1, 0, 1, 1, 1};
    const auto base = evaluate(pred, truth, 3);
    // Swap labels 0 and 2 while swapping their ranks.
    std::vector<int> t2, p2;
    for (int v : truth) t2.push_back(2 - v);
    for (int v : pred) p2.push_back(2 - v);
    CHECK(evaluate(p2, t2, 3, parse_class_order("3,2,1", 3)).rmse == doctest::Approx(base.rmse));
  }

  TEST_CASE("macro metrics ignore class frequency when per-class rates are fixed") {
    const std::vector<int> truth = {0, 0, 1, 1};
    const std::vector<int> pred = {0, 1, 1, 0};
    std::vector<int> t2, p2;
    for (int rep = 0; rep < 3; ++rep) {
      t2.insert(t2.end(), truth.begin(), truth.end());
      p2.insert(p2.end(), pred.begin(), pred.end());
    }
    const auto a = evaluate(pred, truth, 2);
    const auto b = evaluate(p2, t2, 2);
    CHECK(a.f1 == doctest::Approx(b.f1));
    CHECK(a.precision == doctest::Approx(b.precision));
  }

  TEST_CASE("csv header is fixed") {
    const std::vector<int> y = {0, 1};
    std::ostringstream out;
    write_metrics_csv(out, evaluate(y, y, 2));
    CHECK(out.str().rfind("accuracy,recall,precision,f1,rmse\n", 0) == 0);
  }
}
