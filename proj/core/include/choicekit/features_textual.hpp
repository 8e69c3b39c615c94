#pragma once

#include <array>
#include <cstdint>

#include "choicekit/features.hpp"
#include "choicekit/llm/cache.hpp"
#include "choicekit/llm/rate_limiter.hpp"

namespace choicekit::features {

struct TextualFeatureOptions {
  int calls_per_feature = 3;
  std::string model_id = "mock-feature";
  double temperature = 0.0;
  std::uint64_t seed = 0;
  int parallelism = 4;
  llm::CompletionCache* cache = nullptr;
  llm::RateLimiter* limiter = nullptr;
  llm::RetryPolicy retry;
};

struct TextualFeatureResult {
  FeatureVector vector;
  // Calls per feature that stayed unparsable after one re-ask and were
  // scored as neutral 0.
  std::array<int, 7> imputed_calls{};
  int total_imputed() const {
    int n = 0;
    for (int c : imputed_calls) n += c;
    return n;
  }
};

// Asks the provider calls_per_feature times per feature and averages the
// parsed {+1, -1, 0} judgments, so each component lands in [-1, 1]. An
// unparsable reply is re-asked once with a format reminder; a second failure
// scores 0 and is counted in imputed_calls. Calls run concurrently up to
// options.parallelism, paced by the limiter when given; results are
// aggregated in (feature, call) order regardless of scheduling.
TextualFeatureResult textual_feature_vector(const ChoiceTask& task, llm::Provider& provider,
                                            const TextualFeatureOptions& options = {});

}  // namespace choicekit::features
