#include "choicekit/harness/split.hpp"

#include <algorithm>
#include <cmath>

#include "choicekit/errors.hpp"
#include "choicekit/rng.hpp"

namespace choicekit::harness {

namespace {

bool contains(const std::vector<std::string>& sorted_ids, const std::string& id) {
  return std::binary_search(sorted_ids.begin(), sorted_ids.end(), id);
}

}  // namespace

bool Split::in_train(const std::string& id) const { return contains(train_ids, id); }
bool Split::in_val(const std::string& id) const { return contains(val_ids, id); }
bool Split::in_test(const std::string& id) const { return contains(test_ids, id); }

Split split_dataset(const Dataset& ds, double test_fraction, double val_fraction,
                    std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0) ||
      !(val_fraction > 0.0 && val_fraction < 1.0))
    throw Error(Errc::invalid_hyperparameter, "split fractions must lie in (0, 1)");
  const std::size_t n = ds.tasks.size();
  if (n < 10)
    throw Error(Errc::too_small,
                "dataset has " + std::to_string(n) + " tasks; splitting needs at least 10");

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& task : ds.tasks) ids.push_back(task.task_id);
  std::sort(ids.begin(), ids.end());

  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i + 1));
    std::swap(ids[i], ids[j]);
  }

  auto test_n = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  auto val_n = static_cast<std::size_t>(
      std::llround(static_cast<double>(n - test_n) * val_fraction));
  if (test_n == 0 || val_n == 0 || test_n + val_n >= n)
    throw Error(Errc::too_small, "fractions leave an empty partition on " + std::to_string(n) +
                                     " tasks");

  Split split;
  split.seed = seed;
  split.test_fraction = test_fraction;
  split.val_fraction = val_fraction;
  split.test_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(test_n));
  split.val_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(test_n),
                       ids.begin() + static_cast<std::ptrdiff_t>(test_n + val_n));
  split.train_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(test_n + val_n), ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  std::sort(split.val_ids.begin(), split.val_ids.end());
  std::sort(split.train_ids.begin(), split.train_ids.end());
  return split;
}

}  // namespace choicekit::harness
