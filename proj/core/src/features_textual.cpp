#include "choicekit/features_textual.hpp"

#include "choicekit/llm/parsers.hpp"
#include "choicekit/llm/prompts.hpp"
#include "choicekit/rng.hpp"

namespace choicekit::features {

TextualFeatureResult textual_feature_vector(const ChoiceTask& task, llm::Provider& provider,
                                            const TextualFeatureOptions& options) {
  if (options.calls_per_feature < 1)
    throw Error(Errc::invalid_hyperparameter, "calls_per_feature must be >= 1");

  constexpr auto names = FeatureVector::names();
  const std::size_t total = names.size() * static_cast<std::size_t>(options.calls_per_feature);
  std::vector<int> scores(total, 0);
  std::vector<bool> imputed(total, false);

  llm::parallel_for_index(total, options.parallelism, [&](std::size_t i) {
    std::size_t feature = i / static_cast<std::size_t>(options.calls_per_feature);
    std::size_t call = i % static_cast<std::size_t>(options.calls_per_feature);

    llm::CompletionRequest request;
    request.model_id = options.model_id;
    request.user_text = llm::render_feature_prompt(names[feature], task);
    request.temperature = options.temperature;
    request.seed = mix_seed(mix_seed(options.seed, fnv1a64(task.task_id)),
                            fnv1a64(names[feature]), call);

    if (options.limiter) options.limiter->acquire();
    std::string raw = llm::maybe_cached_complete(request, provider, options.cache, options.retry);
    try {
      scores[i] = llm::parse_feature_response(raw);
      return;
    } catch (const ParseError&) {
    }

    llm::CompletionRequest retry_request = request;
    retry_request.user_text +=
        "\n\nReminder: answer with exactly 'Option A', 'Option B', or state that it is too hard "
        "to tell.";
    retry_request.seed = mix_seed(*request.seed, 1);
    if (options.limiter) options.limiter->acquire();
    std::string raw2 =
        llm::maybe_cached_complete(retry_request, provider, options.cache, options.retry);
    try {
      scores[i] = llm::parse_feature_response(raw2);
    } catch (const ParseError&) {
      scores[i] = 0;
      imputed[i] = true;
    }
  });

  TextualFeatureResult result;
  std::array<double, 7> means{};
  for (std::size_t f = 0; f < names.size(); ++f) {
    double sum = 0.0;
    for (int c = 0; c < options.calls_per_feature; ++c) {
      std::size_t i = f * static_cast<std::size_t>(options.calls_per_feature) +
                      static_cast<std::size_t>(c);
      sum += scores[i];
      if (imputed[i]) ++result.imputed_calls[f];
    }
    means[f] = sum / static_cast<double>(options.calls_per_feature);
  }
  result.vector.unbiased = means[0];
  result.vector.sign = means[1];
  result.vector.uniform = means[2];
  result.vector.better_on_avg = means[3];
  result.vector.dominance = means[4];
  result.vector.worst_case = means[5];
  result.vector.risk = means[6];
  return result;
}

}  // namespace choicekit::features
