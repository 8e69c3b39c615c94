#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "choicekit/task.hpp"

namespace choicekit::llm {

enum class Condition { binary, confidence, percentage };

const char* condition_name(Condition c);
Condition condition_from_name(const std::string& name);  // Errc::config_invalid

// A simulated-subject persona. The description is the behavior sentence
// injected into the "Behave like a ..." instruction line.
struct Personality {
  std::string name;
  std::string element;
  std::string description;
};

// The ten built-in personas, shipped as data in data/personalities.json and
// compiled in here as the fallback so the library works without the file.
const std::vector<Personality>& builtin_personalities();

// Loads a persona catalog from JSON ({"personalities": [{name, element,
// description}, ...]}). Names must be unique and must not collide with the
// reserved no-persona label "baseline".
std::vector<Personality> load_personalities(const std::filesystem::path& path);

inline constexpr const char* kBaselinePersonalityName = "baseline";

// Prompt for supervised fine-tuning on labeled tasks. Byte-stable; always
// begins with the estimation sentence. Errc::missing_text without texts.
std::string render_finetune_prompt(const ChoiceTask& task);

// Prompt asking one simulated subject to answer a batch of problems under
// the given condition. The persona line is present exactly when a persona is
// given. Byte-stable for fixed inputs.
std::string render_subject_prompt(Condition condition, const std::optional<Personality>& persona,
                                  const std::vector<ChoiceTask>& tasks);

// The per-condition response grammar line, also used when re-asking.
std::string subject_format_line(Condition condition);

// Prompt asking for one pairwise feature judgment; feature_name is one of
// FeatureVector::names(). Errc::invalid_hyperparameter for unknown names,
// Errc::missing_text without texts.
std::string render_feature_prompt(const std::string& feature_name, const ChoiceTask& task);

}  // namespace choicekit::llm
