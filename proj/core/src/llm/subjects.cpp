#include "choicekit/llm/subjects.hpp"

#include <algorithm>

#include "choicekit/rng.hpp"

namespace choicekit::llm {

std::vector<SubjectResponse> run_subject_session(Provider& provider, Condition condition,
                                                 const std::optional<Personality>& persona,
                                                 const std::vector<ChoiceTask>& tasks,
                                                 std::uint64_t seed,
                                                 const SessionOptions& options) {
  if (static_cast<int>(tasks.size()) != options.batch_size)
    throw Error(Errc::length_mismatch,
                "session got " + std::to_string(tasks.size()) + " tasks, configured batch is " +
                    std::to_string(options.batch_size));

  std::vector<std::string> expected_ids;
  expected_ids.reserve(tasks.size());
  for (const auto& t : tasks) expected_ids.push_back(t.task_id);

  CompletionRequest request;
  request.model_id = options.model_id;
  request.user_text = render_subject_prompt(condition, persona, tasks);
  request.temperature = options.temperature;
  request.seed = seed;

  if (options.limiter) options.limiter->acquire();
  std::string raw = maybe_cached_complete(request, provider, options.cache, options.retry);
  SubjectParseOutcome outcome = parse_subject_response_lenient(condition, raw, expected_ids);

  if (!outcome.complete()) {
    CompletionRequest retry_request = request;
    retry_request.user_text +=
        "\n\nReminder: respond only in the exact format " + subject_format_line(condition) +
        " covering every problem.";
    retry_request.seed = mix_seed(seed, 1);
    if (options.limiter) options.limiter->acquire();
    std::string raw2;
    try {
      raw2 = maybe_cached_complete(retry_request, provider, options.cache, options.retry);
    } catch (const Error& e) {
      if (e.code() != Errc::provider_failure) throw;
      raw2.clear();  // a dead retry still falls through to imputation
    }
    SubjectParseOutcome second = parse_subject_response_lenient(condition, raw2, expected_ids);
    std::map<std::string, SubjectResponse> merged;
    for (const auto& r : outcome.parsed) merged.emplace(r.task_id, r);
    for (const auto& r : second.parsed) merged.emplace(r.task_id, r);
    outcome.parsed.clear();
    outcome.missing_ids.clear();
    for (const auto& id : expected_ids) {
      auto it = merged.find(id);
      if (it == merged.end())
        outcome.missing_ids.push_back(id);
      else
        outcome.parsed.push_back(it->second);
    }
  }

  std::map<std::string, SubjectResponse> by_id;
  for (const auto& r : outcome.parsed) by_id.emplace(r.task_id, r);

  std::vector<SubjectResponse> result;
  result.reserve(tasks.size());
  for (const auto& t : tasks) {
    auto it = by_id.find(t.task_id);
    if (it != by_id.end()) {
      result.push_back(it->second);
    } else {
      SubjectResponse r;
      r.task_id = t.task_id;
      r.condition = condition;
      r.p_choose_a = 0.5;
      r.imputed = true;
      result.push_back(std::move(r));
    }
  }
  return result;
}

std::map<std::string, double> aggregate_subject_predictions(
    const std::vector<SubjectResponse>& responses) {
  if (responses.empty()) throw Error(Errc::empty_group, "no responses to aggregate");
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto& r : responses) {
    auto& [sum, count] = sums[r.task_id];
    sum += r.p_choose_a;
    ++count;
  }
  std::map<std::string, double> means;
  for (const auto& [id, sc] : sums) {
    if (sc.second == 0) throw Error(Errc::empty_group, "task " + id + " has no responses");
    means[id] = sc.first / static_cast<double>(sc.second);
  }
  return means;
}

SubjectsRun run_subjects_experiment(Provider& provider, const std::vector<ChoiceTask>& tasks,
                                    const SubjectsConfig& config) {
  if (tasks.empty()) throw Error(Errc::empty_group, "no tasks");
  if (config.agents_per_task < 1)
    throw Error(Errc::invalid_hyperparameter, "agents_per_task must be >= 1");

  std::vector<std::optional<Personality>> personas;
  personas.push_back(std::nullopt);
  for (const auto& p : config.personalities) personas.push_back(p);

  std::vector<std::vector<ChoiceTask>> chunks;
  for (std::size_t pos = 0; pos < tasks.size(); pos += static_cast<std::size_t>(config.session.batch_size))
    chunks.emplace_back(tasks.begin() + static_cast<std::ptrdiff_t>(pos),
                        tasks.begin() + static_cast<std::ptrdiff_t>(std::min(
                                            pos + static_cast<std::size_t>(config.session.batch_size),
                                            tasks.size())));

  struct Cell {
    std::size_t condition_index, persona_index, chunk_index;
    int agent;
  };
  std::vector<Cell> cells;
  for (std::size_t ci = 0; ci < config.conditions.size(); ++ci)
    for (std::size_t pi = 0; pi < personas.size(); ++pi)
      for (int agent = 0; agent < config.agents_per_task; ++agent)
        for (std::size_t ki = 0; ki < chunks.size(); ++ki)
          cells.push_back({ci, pi, ki, agent});

  std::vector<std::vector<SubjectResponse>> session_results(cells.size());
  parallel_for_index(cells.size(), config.parallelism, [&](std::size_t i) {
    const Cell& cell = cells[i];
    Condition condition = config.conditions[cell.condition_index];
    const auto& persona = personas[cell.persona_index];
    std::string persona_name = persona ? persona->name : kBaselinePersonalityName;
    std::uint64_t seed =
        mix_seed(mix_seed(config.seed, fnv1a64(condition_name(condition)), fnv1a64(persona_name)),
                 static_cast<std::uint64_t>(cell.agent), cell.chunk_index);
    SessionOptions session = config.session;
    session.batch_size = static_cast<int>(chunks[cell.chunk_index].size());
    session_results[i] =
        run_subject_session(provider, condition, persona, chunks[cell.chunk_index], seed, session);
  });

  SubjectsRun run;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& cell = cells[i];
    const auto& persona = personas[cell.persona_index];
    std::string persona_name = persona ? persona->name : kBaselinePersonalityName;
    for (const auto& response : session_results[i])
      run.responses.push_back({config.conditions[cell.condition_index], persona_name,
                               cell.agent, response});
  }

  std::map<std::pair<std::string, std::string>, std::vector<SubjectResponse>> groups;
  for (const auto& row : run.responses)
    groups[{condition_name(row.condition), row.personality}].push_back(row.response);
  for (const auto& [key, responses] : groups)
    run.aggregated[key.first][key.second] = aggregate_subject_predictions(responses);
  return run;
}

}  // namespace choicekit::llm
