#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "choicekit/lottery.hpp"

namespace choicekit {

// One binary choice problem. Options may be described as free text, as
// structured lotteries, or both; a modality is always present for both
// options or for neither.
struct ChoiceTask {
  std::string task_id;
  std::optional<std::string> option_a_text;
  std::optional<std::string> option_b_text;
  std::optional<Lottery> option_a_lottery;
  std::optional<Lottery> option_b_lottery;
  // Observed proportion choosing option A, when the task is labeled.
  std::optional<double> observed_rate_a;
  std::optional<std::int64_t> n_participants;

  bool has_text() const { return option_a_text.has_value() && option_b_text.has_value(); }
  bool has_lotteries() const {
    return option_a_lottery.has_value() && option_b_lottery.has_value();
  }

  // Throws Errc::schema_violation on a half-present modality, no modality at
  // all, a rate outside [0, 1], or a negative participant count.
  void validate() const;
};

}  // namespace choicekit
