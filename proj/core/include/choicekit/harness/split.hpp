#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "choicekit/harness/dataset.hpp"

namespace choicekit::harness {

// Deterministic partition of a dataset's task ids. Reproducible from
// (dataset ids, fractions, seed) alone; each id list is sorted.
struct Split {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  double val_fraction = 0.1;

  bool in_train(const std::string& id) const;
  bool in_val(const std::string& id) const;
  bool in_test(const std::string& id) const;
};

// Carves test then val:
//   1. sort all task ids lexicographically (input order never matters),
//   2. Fisher-Yates shuffle them with Rng(seed), high index down to 1,
//      j = uniform_below(rng, i + 1),
//   3. test = first round(n * test_fraction) shuffled ids,
//   4. val  = next round(remaining * val_fraction) ids, train = the rest.
// Fractions must lie in (0, 1); datasets below 10 tasks or fractions leaving
// an empty partition are Errc::too_small.
Split split_dataset(const Dataset& ds, double test_fraction = 0.1, double val_fraction = 0.1,
                    std::uint64_t seed = 0);

}  // namespace choicekit::harness
