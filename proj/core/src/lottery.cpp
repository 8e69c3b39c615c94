#include "choicekit/lottery.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "choicekit/errors.hpp"

namespace choicekit {

double Lottery::expected_value() const {
  double ev = 0.0;
  for (const auto& o : outcomes_) ev += o.payoff * o.probability;
  return ev;
}

double Lottery::variance() const {
  double ev = expected_value();
  double var = 0.0;
  for (const auto& o : outcomes_) {
    double d = o.payoff - ev;
    var += o.probability * d * d;
  }
  return var;
}

double Lottery::sample(Rng& rng) const {
  double u = uniform_double(rng);
  double acc = 0.0;
  for (const auto& o : outcomes_) {
    acc += o.probability;
    if (u < acc) return o.payoff;
  }
  return outcomes_.back().payoff;
}

double Lottery::sample_uniform(Rng& rng) const {
  return outcomes_[uniform_below(rng, outcomes_.size())].payoff;
}

double Lottery::mean_abs_support() const {
  double s = 0.0;
  for (const auto& o : outcomes_) s += std::abs(o.payoff);
  return s / static_cast<double>(outcomes_.size());
}

Lottery make_lottery(std::vector<Outcome> outcomes) {
  if (outcomes.empty()) throw Error(Errc::empty_support, "lottery needs at least one outcome");
  for (const auto& o : outcomes) {
    if (!std::isfinite(o.payoff))
      throw Error(Errc::non_finite_payoff, "payoff " + std::to_string(o.payoff));
    if (!(o.probability > 0.0))
      throw Error(Errc::non_positive_probability,
                  "probability " + std::to_string(o.probability) + " for payoff " +
                      std::to_string(o.payoff));
  }
  double sum = 0.0;
  for (const auto& o : outcomes) sum += o.probability;
  if (!std::isfinite(sum) || std::abs(sum - 1.0) > Lottery::kRenormTolerance)
    throw Error(Errc::probability_sum_out_of_tolerance,
                "probabilities sum to " + std::to_string(sum));

  std::sort(outcomes.begin(), outcomes.end(),
            [](const Outcome& a, const Outcome& b) { return a.payoff < b.payoff; });
  std::vector<Outcome> merged;
  merged.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (!merged.empty() && merged.back().payoff == o.payoff)
      merged.back().probability += o.probability;
    else
      merged.push_back(o);
  }
  for (auto& o : merged) o.probability /= sum;

  Lottery l;
  l.outcomes_ = std::move(merged);
  return l;
}

}  // namespace choicekit
