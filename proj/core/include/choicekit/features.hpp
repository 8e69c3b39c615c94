#pragma once

#include <array>
#include <cstdint>

#include "choicekit/lottery.hpp"
#include "choicekit/task.hpp"

namespace choicekit::features {

// Pairwise comparison features for a binary choice (a vs b). Every feature is
// oriented toward option a, lives in [-1, 1], and is exactly antisymmetric:
// f(a, b) == -f(b, a). Declaration order here is the serialization order.
struct FeatureVector {
  double unbiased = 0.0;
  double sign = 0.0;
  double uniform = 0.0;
  double better_on_avg = 0.0;
  double dominance = 0.0;
  double worst_case = 0.0;
  double risk = 0.0;

  static constexpr std::array<const char*, 7> names() {
    return {"unbiased", "sign", "uniform", "better_on_avg", "dominance", "worst_case", "risk"};
  }
  std::array<double, 7> values() const {
    return {unbiased, sign, uniform, better_on_avg, dominance, worst_case, risk};
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// P(X > Y) - P(Y > X) for independent draws, computed exactly over the
// support product.
double unbiased_advantage(const Lottery& a, const Lottery& b);

// Same comparison applied to the payoff signs.
double sign_advantage(const Lottery& a, const Lottery& b);

// Same comparison with both supports uniformized (equal outcome
// probabilities).
double uniform_advantage(const Lottery& a, const Lottery& b);

// sign(EV(a) - EV(b)); exact EV equality maps to 0.
double better_on_avg(const Lottery& a, const Lottery& b);

// +1 iff a statewise-dominates b (min_payoff(a) >= max_payoff(b)) and the
// two are not the same constant; -1 for the mirror case; else 0.
double dominance(const Lottery& a, const Lottery& b);

// sign(min_payoff(a) - min_payoff(b)).
double worst_case(const Lottery& a, const Lottery& b);

// sign(variance(a) - variance(b)).
double risk_comparison(const Lottery& a, const Lottery& b);

FeatureVector numeric_feature_vector(const Lottery& a, const Lottery& b);
FeatureVector numeric_feature_vector(const ChoiceTask& task);  // Errc::missing_text-style guard on lotteries

}  // namespace choicekit::features
