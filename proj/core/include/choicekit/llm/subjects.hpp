#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "choicekit/llm/cache.hpp"
#include "choicekit/llm/parsers.hpp"
#include "choicekit/llm/rate_limiter.hpp"

namespace choicekit::llm {

struct SessionOptions {
  std::string model_id = "mock-subject";
  double temperature = 1.0;
  int batch_size = 50;
  CompletionCache* cache = nullptr;
  RateLimiter* limiter = nullptr;
  RetryPolicy retry;
};

// One simulated subject answering one batch of problems. The batch must
// contain exactly options.batch_size tasks (Errc::length_mismatch). The
// prompt carries the persona when given. If the response does not resolve
// every task, the provider is re-asked once with a format reminder; ids still
// unresolved afterwards come back as imputed p = 0.5. Responses are returned
// in task order, one per task, always.
std::vector<SubjectResponse> run_subject_session(Provider& provider, Condition condition,
                                                 const std::optional<Personality>& persona,
                                                 const std::vector<ChoiceTask>& tasks,
                                                 std::uint64_t seed,
                                                 const SessionOptions& options = {});

// Mean p_choose_a per task id. Errc::empty_group when a task has no
// responses.
std::map<std::string, double> aggregate_subject_predictions(
    const std::vector<SubjectResponse>& responses);

struct SubjectsConfig {
  std::vector<Condition> conditions{Condition::binary, Condition::confidence,
                                    Condition::percentage};
  // Personas to run alongside the no-persona baseline. The baseline is
  // always included, named by kBaselinePersonalityName.
  std::vector<Personality> personalities;
  int agents_per_task = 31;
  std::uint64_t seed = 0;
  int parallelism = 4;
  SessionOptions session;
};

struct SubjectsRun {
  struct Row {
    Condition condition;
    std::string personality;  // persona name or "baseline"
    int agent = 0;
    SubjectResponse response;
  };
  std::vector<Row> responses;  // deterministic order: condition, persona, agent, task
  // condition name -> persona name -> task id -> aggregated prediction
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> aggregated;
};

// Runs agents_per_task sessions for every (condition, persona) cell over the
// task list, chunked into batches of session.batch_size (final chunk may be
// shorter). Session seeds derive from (seed, condition, persona, agent,
// chunk), so results do not depend on parallelism.
SubjectsRun run_subjects_experiment(Provider& provider, const std::vector<ChoiceTask>& tasks,
                                    const SubjectsConfig& config);

}  // namespace choicekit::llm
