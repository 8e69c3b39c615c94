#include "choicekit/llm/prompts.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "choicekit/errors.hpp"

namespace choicekit::llm {

using nlohmann::json;

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::binary: return "binary";
    case Condition::confidence: return "confidence";
    case Condition::percentage: return "percentage";
  }
  return "binary";
}

Condition condition_from_name(const std::string& name) {
  if (name == "binary") return Condition::binary;
  if (name == "confidence") return Condition::confidence;
  if (name == "percentage") return Condition::percentage;
  throw Error(Errc::config_invalid, "unknown condition '" + name + "'");
}

const std::vector<Personality>& builtin_personalities() {
  static const std::vector<Personality> catalog{
      {"The Calculator", "High Sensitivity to Expected Returns",
       "Bases decisions on meticulous calculation of expected outcomes."},
      {"The Pessimist", "Pessimism",
       "Makes conservative choices to avoid losses, influenced by a negative outlook."},
      {"The Equalizer", "Bias Toward Equal Weighting",
       "Values simplicity and fairness, treats all information equally."},
      {"The Guardian", "Sensitivity to Payoff Sign",
       "Sensitive to gains vs. losses, impacting risk assessment."},
      {"The Regret Averter", "Effort to Minimize Immediate Regret",
       "Focuses on avoiding decisions that might cause regret."},
      {"The Adaptive", "Impact of Feedback on Sensitivity to Probability",
       "Changes decision-making strategy based on feedback and probability updates."},
      {"The Analyst", "Various BEAST Elements",
       "Uses a methodical approach, reviews data, considers multiple perspectives."},
      {"The Realist", "Pragmatic Assessment",
       "Makes decisions based on pragmatic assessment of available options."},
      {"The Optimist", "Expecting Favorable Outcomes",
       "Sees potential for positive outcomes, more likely to take risks."},
      {"The Minimalist", "Simplicity in Decisions",
       "Prefers simplicity, choosing the simplest option available."},
  };
  return catalog;
}

std::vector<Personality> load_personalities(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::file_unreadable, "cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, path.string() + ": " + e.what());
  }
  if (!doc.contains("personalities") || !doc["personalities"].is_array())
    throw Error(Errc::schema_violation, path.string() + ": missing personalities array");
  std::vector<Personality> catalog;
  std::set<std::string> seen;
  for (const auto& entry : doc["personalities"]) {
    Personality p;
    try {
      p.name = entry.at("name").get<std::string>();
      p.element = entry.value("element", std::string{});
      p.description = entry.at("description").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(Errc::schema_violation, path.string() + ": " + e.what());
    }
    if (p.name == kBaselinePersonalityName)
      throw Error(Errc::schema_violation,
                  path.string() + ": persona name 'baseline' is reserved");
    if (!seen.insert(p.name).second)
      throw Error(Errc::schema_violation, path.string() + ": duplicate persona '" + p.name + "'");
    catalog.push_back(std::move(p));
  }
  if (catalog.empty()) throw Error(Errc::schema_violation, path.string() + ": empty catalog");
  return catalog;
}

namespace {

void require_texts(const ChoiceTask& task) {
  if (!task.has_text())
    throw Error(Errc::missing_text, "task " + task.task_id + " has no option texts");
}

void append_problems(std::string& out, const std::vector<ChoiceTask>& tasks) {
  out += "\nProblems:\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    require_texts(tasks[i]);
    if (i) out += "\n";
    out += "Problem " + tasks[i].task_id + ":\n";
    out += "Option A: " + *tasks[i].option_a_text + "\n";
    out += "Option B: " + *tasks[i].option_b_text + "\n";
  }
}

}  // namespace

std::string render_finetune_prompt(const ChoiceTask& task) {
  require_texts(task);
  std::string out = "Estimate the percentage of the population choosing Option A over Option B:\n";
  out += "Option A: " + *task.option_a_text + "\n";
  out += "Option B: " + *task.option_b_text;
  return out;
}

std::string subject_format_line(Condition condition) {
  switch (condition) {
    case Condition::binary:
      return "(Problem ID, Choice) | (Problem ID, Choice) | ...";
    case Condition::confidence:
      return "(Problem ID, Choice, Confidence) | ...";
    case Condition::percentage:
      return "(Problem ID, Preference) | (Problem ID, Preference) | ...";
  }
  return {};
}

std::string render_subject_prompt(Condition condition, const std::optional<Personality>& persona,
                                  const std::vector<ChoiceTask>& tasks) {
  std::string out = "Instruction:\n";
  if (persona) out += "Behave like a " + persona->description + "\n\n";
  switch (condition) {
    case Condition::binary:
      out +=
          "Given the following options, please make a choice for each problem and return only "
          "your choices in the format specified.\n";
      break;
    case Condition::confidence:
      out +=
          "Given the following options, please make a choice for each problem and decide what is "
          "your confidence (between 0 to 100) in your choice. Return only your choices and "
          "confidence in the format specified.\n";
      break;
    case Condition::percentage:
      out +=
          "Given the following options, please indicate your preference for each problem as a "
          "percentage, where 0% represents a complete preference for Option B and 100% "
          "represents a complete preference for Option A. Return your choices in the format "
          "specified.\n";
      break;
  }
  out += "\nFormat:\n" + subject_format_line(condition) + "\n";
  append_problems(out, tasks);
  return out;
}

namespace {

struct FeaturePrompt {
  const char* name;
  const char* body;  // text between the option lines and the closing sentence
};

constexpr const char* kClosing =
    "Take your time, analyze, think it thoroughly, and then only provide a final answer without "
    "explanations.";

constexpr FeaturePrompt kFeaturePrompts[] = {
    {"unbiased",
     "Let's say I simulate these options several times. In each round, I draw one outcome from "
     "each option and check which option provided the better (higher) payoff, if any. Can you "
     "assess which option yields more rounds with a strictly better payoff? If it is too hard to "
     "tell, say so."},
    {"sign",
     "Let's say I simulate these options several times. In each round, I draw one outcome from "
     "each option and record the outputs. Then, I sign-transform all of these outcomes and "
     "check, in each round, which option provided the better payoff-sign (ignoring the payoff "
     "size), if any. Can you assess which option yields more rounds with a strictly better "
     "payoff sign? If it is too hard to tell, say so."},
    {"uniform",
     "Let's say I simulate these options several times. In each round, I first transform all "
     "payoffs in each option to be equally likely and then draw one outcome. That is, I "
     "transform each option's payoff distribution so that actual probabilities are ignored, and "
     "all its payoffs have the same probability to be drawn before I make draws from these "
     "transformed distributions. Then, I record the outputs and check, in each round, which "
     "option provided the better payoff, if any. Can you assess which option yields more rounds "
     "with a strictly better payoff under this transformation? If it is too hard to tell, say "
     "so."},
    {"better_on_avg",
     "Let's say I simulate these options several times. In each round, I draw one outcome from "
     "each option and record the outputs. Then, for each option, I sum the payoffs each option "
     "yielded across all rounds. Can you assess which option yields a higher sum of payoffs, if "
     "any? If it is too hard to tell, say so."},
    {"dominance",
     "Let's say I simulate these options several times. In each round, I draw one outcome from "
     "each option and check which option provided the better (higher) payoff, if any. Can you "
     "assess *if* one option yields a payoff that is at least as good as the other option payoff "
     "across *all* rounds? If this is not the case, please clearly state that by answering "
     "'No'. If it is too hard to tell, say so."},
    {"worst_case",
     "Let's say I simulate these each of these options once, and each option yields its worst "
     "(lowest) payoff. Can you assess which option, if any, yields a better payoff in this "
     "scenario? If it is too hard to tell, say so."},
    {"risk",
     "Can you assess which option, if any, is riskier (i.e., has higher variance)? If it is too "
     "hard to tell, say so."},
};

}  // namespace

std::string render_feature_prompt(const std::string& feature_name, const ChoiceTask& task) {
  require_texts(task);
  for (const auto& fp : kFeaturePrompts) {
    if (feature_name == fp.name) {
      std::string out = "Given two options:\n";
      out += "Option A: " + *task.option_a_text + "\n";
      out += "Option B: " + *task.option_b_text + "\n";
      out += fp.body;
      out += "\n";
      out += kClosing;
      return out;
    }
  }
  throw Error(Errc::invalid_hyperparameter, "unknown feature '" + feature_name + "'");
}

}  // namespace choicekit::llm
