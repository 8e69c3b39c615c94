#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace choicekit {

enum class Errc {
  // lottery and task construction
  empty_support,
  non_positive_probability,
  probability_sum_out_of_tolerance,
  non_finite_payoff,
  // provider bridge
  provider_failure,
  provider_transient,
  auth_missing,
  cache_corrupt,
  missing_text,
  unparsable_response,
  empty_group,
  // learning
  dimension_mismatch,
  degenerate_data,
  singular_system,
  invalid_hyperparameter,
  length_mismatch,
  no_viable_model,
  // datasets and evaluation
  schema_violation,
  duplicate_task_id,
  file_unreadable,
  file_unwritable,
  too_small,
  range_violation,
  missing_predictions,
  missing_label,
  // cli
  config_invalid,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// Raised when a model response cannot be mapped back onto the expected task
// ids. Carries the offending fragment and whichever ids never resolved so the
// caller can re-ask or impute instead of dropping data.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string fragment,
             std::vector<std::string> missing_ids);
  const std::string& fragment() const { return fragment_; }
  const std::vector<std::string>& missing_ids() const { return missing_ids_; }

 private:
  std::string fragment_;
  std::vector<std::string> missing_ids_;
};

}  // namespace choicekit
