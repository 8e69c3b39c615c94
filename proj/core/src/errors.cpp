#include "choicekit/errors.hpp"

namespace choicekit {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::empty_support: return "empty_support";
    case Errc::non_positive_probability: return "non_positive_probability";
    case Errc::probability_sum_out_of_tolerance: return "probability_sum_out_of_tolerance";
    case Errc::non_finite_payoff: return "non_finite_payoff";
    case Errc::provider_failure: return "provider_failure";
    case Errc::provider_transient: return "provider_transient";
    case Errc::auth_missing: return "auth_missing";
    case Errc::cache_corrupt: return "cache_corrupt";
    case Errc::missing_text: return "missing_text";
    case Errc::unparsable_response: return "unparsable_response";
    case Errc::empty_group: return "empty_group";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::degenerate_data: return "degenerate_data";
    case Errc::singular_system: return "singular_system";
    case Errc::invalid_hyperparameter: return "invalid_hyperparameter";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::no_viable_model: return "no_viable_model";
    case Errc::schema_violation: return "schema_violation";
    case Errc::duplicate_task_id: return "duplicate_task_id";
    case Errc::file_unreadable: return "file_unreadable";
    case Errc::file_unwritable: return "file_unwritable";
    case Errc::too_small: return "too_small";
    case Errc::range_violation: return "range_violation";
    case Errc::missing_predictions: return "missing_predictions";
    case Errc::missing_label: return "missing_label";
    case Errc::config_invalid: return "config_invalid";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

ParseError::ParseError(const std::string& message, std::string fragment,
                       std::vector<std::string> missing_ids)
    : Error(Errc::unparsable_response, message),
      fragment_(std::move(fragment)),
      missing_ids_(std::move(missing_ids)) {}

}  // namespace choicekit
