#include "oslsp/bags.hpp"

#include <numeric>

#include "oslsp/error.hpp"

namespace oslsp {

std::vector<Bag> build_bags(const Dataset& data, const ProportionTable& table, std::size_t bag_size,
                            std::uint64_t seed) {
  if (bag_size == 0) throw ConfigError("bag size must be positive");
  if (table.num_classes() != data.num_classes) {
    throw Error("proportion table has " + std::to_string(table.num_classes()) + " classes, dataset has " +
                std::to_string(data.num_classes));
  }
  std::vector<std::vector<std::size_t>> by_date(table.size());
  for (std::size_t i = 0; i < data.instances.size(); ++i) {
    const auto d = table.find(data.instances[i].date);
    if (!d) throw Error("date '" + data.instances[i].date + "' has no entry in the proportion table");
    by_date[*d].push_back(i);
  }

  std::vector<Bag> bags;
  for (std::size_t d = 0; d < table.size(); ++d) {
    auto& members = by_date[d];
    const std::string& date = table.dates()[d];
    if (members.size() < bag_size) {
      throw Error("date '" + date + "' has " + std::to_string(members.size()) + " instances, fewer than bag size " +
                  std::to_string(bag_size));
    }
    Rng rng(derive_seed(seed, "bags." + date));
    shuffle(members.begin(), members.end(), rng);
    for (std::size_t start = 0; start + bag_size <= members.size(); start += bag_size) {
      std::vector<std::size_t> chunk(members.begin() + static_cast<std::ptrdiff_t>(start),
                                     members.begin() + static_cast<std::ptrdiff_t>(start + bag_size));
      diff::Matrix inputs = data.inputs(chunk);
      bags.push_back(Bag{date, std::move(chunk), std::move(inputs), table.rows()[d]});
    }
  }
  return bags;
}

BagPairSampler::BagPairSampler(std::size_t num_bags, std::size_t bag_size, std::uint64_t seed)
    : num_bags_(num_bags), bag_size_(bag_size), rng_(seed) {
  if (num_bags < 2) throw Error("need at least 2 bags to sample a pair, have " + std::to_string(num_bags));
}

BagPair BagPairSampler::next() {
  BagPair pair;
  pair.first = uniform_index(rng_, num_bags_);
  pair.second = uniform_index(rng_, num_bags_ - 1);
  if (pair.second >= pair.first) ++pair.second;
  pair.permutation.resize(bag_size_);
  std::iota(pair.permutation.begin(), pair.permutation.end(), std::size_t{0});
  shuffle(pair.permutation.begin(), pair.permutation.end(), rng_);
  return pair;
}

}  // namespace oslsp
