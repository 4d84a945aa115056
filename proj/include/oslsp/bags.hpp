#pragma once

// Bag construction from date-labelled instances and random bag-pair sampling.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "oslsp/dataset.hpp"
#include "oslsp/diffcore.hpp"
#include "oslsp/ordinal.hpp"
#include "oslsp/random.hpp"

namespace oslsp {

struct Bag {
  std::string date;
  std::vector<std::size_t> members;  // indices into the source dataset
  diff::Matrix inputs;               // members.size() x input_dim
  ProportionVector proportion;

  std::size_t size() const noexcept { return members.size(); }
};

/// Shuffles each date's instances (seeded) and chunks them into floor(count / N) bags of
/// exactly N members; leftovers are dropped. Bags are emitted in proportion-table date order.
/// Throws if a date present in the table has fewer than N instances, or if the dataset has a
/// date missing from the table.
std::vector<Bag> build_bags(const Dataset& data, const ProportionTable& table, std::size_t bag_size,
                            std::uint64_t seed);

struct BagPair {
  std::size_t first = 0;   // index into the bag list
  std::size_t second = 0;  // distinct from first
  std::vector<std::size_t> permutation;  // pairs member j of `first` with member permutation[j] of `second`
};

/// Draws two distinct bags uniformly (any date combination) with a fresh pairing permutation.
class BagPairSampler {
 public:
  BagPairSampler(std::size_t num_bags, std::size_t bag_size, std::uint64_t seed);

  BagPair next();

 private:
  std::size_t num_bags_;
  std::size_t bag_size_;
  Rng rng_;
};

}  // namespace oslsp
