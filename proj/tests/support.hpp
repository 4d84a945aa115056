#pragma once

#include <vector>

#include "oslsp/diffcore.hpp"
#include "oslsp/ordinal.hpp"
#include "oslsp/random.hpp"

namespace testing {

inline oslsp::diff::Matrix random_matrix(std::size_t rows, std::size_t cols, oslsp::Rng& rng, double scale = 1.0) {
  oslsp::diff::Matrix m(rows, cols);
  for (double& v : m.data) v = scale * (2.0 * oslsp::uniform01(rng) - 1.0);
  return m;
}

inline std::vector<double> random_simplex(std::size_t k, oslsp::Rng& rng) {
  std::vector<double> v(k);
  double total = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - oslsp::uniform01(rng));
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

inline oslsp::ProportionVector random_proportion(std::size_t k, oslsp::Rng& rng) {
  return oslsp::ProportionVector(random_simplex(k, rng));
}

}  // namespace testing
