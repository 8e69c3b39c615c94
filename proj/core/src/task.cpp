#include "choicekit/task.hpp"

#include <cmath>

#include "choicekit/errors.hpp"

namespace choicekit {

void ChoiceTask::validate() const {
  if (task_id.empty()) throw Error(Errc::schema_violation, "task with empty id");
  if (option_a_text.has_value() != option_b_text.has_value())
    throw Error(Errc::schema_violation, "task " + task_id + " has text for only one option");
  if (option_a_lottery.has_value() != option_b_lottery.has_value())
    throw Error(Errc::schema_violation, "task " + task_id + " has a lottery for only one option");
  if (!has_text() && !has_lotteries())
    throw Error(Errc::schema_violation, "task " + task_id + " describes neither option");
  if (observed_rate_a) {
    double r = *observed_rate_a;
    if (!std::isfinite(r) || r < 0.0 || r > 1.0)
      throw Error(Errc::schema_violation,
                  "task " + task_id + " rate_a outside [0, 1]: " + std::to_string(r));
  }
  if (n_participants && *n_participants < 0)
    throw Error(Errc::schema_violation, "task " + task_id + " negative participant count");
}

}  // namespace choicekit
