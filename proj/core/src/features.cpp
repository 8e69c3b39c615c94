#include "choicekit/features.hpp"

#include <algorithm>

#include "choicekit/errors.hpp"

namespace choicekit::features {

namespace {

double sgn(double v) { return (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Lexicographic comparison of the canonical outcome sequences. The pairwise
// sums below always run with the smaller lottery as `a`, so swapping the
// arguments flips only the sign of a bit-identical sum; without the fixed
// operand order, floating-point addition order would break exact
// antisymmetry.
int compare_lotteries(const Lottery& a, const Lottery& b) {
  const auto& oa = a.outcomes();
  const auto& ob = b.outcomes();
  if (oa.size() != ob.size()) return oa.size() < ob.size() ? -1 : 1;
  for (std::size_t i = 0; i < oa.size(); ++i) {
    if (oa[i].payoff != ob[i].payoff) return oa[i].payoff < ob[i].payoff ? -1 : 1;
    if (oa[i].probability != ob[i].probability)
      return oa[i].probability < ob[i].probability ? -1 : 1;
  }
  return 0;
}

// The probability products sum to 1 only up to round-off, so a lopsided
// pair can land just past +-1; the clamp is symmetric and keeps the exact
// sign flip.
template <typename PairwiseSum>
double antisymmetric(const Lottery& a, const Lottery& b, PairwiseSum sum) {
  int order = compare_lotteries(a, b);
  if (order == 0) return 0.0;
  double v = std::clamp(order < 0 ? sum(a, b) : -sum(b, a), -1.0, 1.0);
  return v == 0.0 ? 0.0 : v;  // normalize -0.0
}

double unbiased_sum(const Lottery& a, const Lottery& b) {
  double adv = 0.0;
  for (const auto& oa : a.outcomes())
    for (const auto& ob : b.outcomes()) {
      if (oa.payoff > ob.payoff)
        adv += oa.probability * ob.probability;
      else if (oa.payoff < ob.payoff)
        adv -= oa.probability * ob.probability;
    }
  return adv;
}

double sign_sum(const Lottery& a, const Lottery& b) {
  double adv = 0.0;
  for (const auto& oa : a.outcomes())
    for (const auto& ob : b.outcomes()) {
      double sa = sgn(oa.payoff), sb = sgn(ob.payoff);
      if (sa > sb)
        adv += oa.probability * ob.probability;
      else if (sa < sb)
        adv -= oa.probability * ob.probability;
    }
  return adv;
}

double uniform_sum(const Lottery& a, const Lottery& b) {
  double pa = 1.0 / static_cast<double>(a.support_size());
  double pb = 1.0 / static_cast<double>(b.support_size());
  double adv = 0.0;
  for (const auto& oa : a.outcomes())
    for (const auto& ob : b.outcomes()) {
      if (oa.payoff > ob.payoff)
        adv += pa * pb;
      else if (oa.payoff < ob.payoff)
        adv -= pa * pb;
    }
  return adv;
}

}  // namespace

double unbiased_advantage(const Lottery& a, const Lottery& b) {
  return antisymmetric(a, b, unbiased_sum);
}

double sign_advantage(const Lottery& a, const Lottery& b) {
  return antisymmetric(a, b, sign_sum);
}

double uniform_advantage(const Lottery& a, const Lottery& b) {
  return antisymmetric(a, b, uniform_sum);
}

double better_on_avg(const Lottery& a, const Lottery& b) {
  return sgn(a.expected_value() - b.expected_value());
}

double dominance(const Lottery& a, const Lottery& b) {
  if (a.is_degenerate() && b.is_degenerate() && a.min_payoff() == b.min_payoff()) return 0.0;
  if (a.min_payoff() >= b.max_payoff()) return 1.0;
  if (b.min_payoff() >= a.max_payoff()) return -1.0;
  return 0.0;
}

double worst_case(const Lottery& a, const Lottery& b) {
  return sgn(a.min_payoff() - b.min_payoff());
}

double risk_comparison(const Lottery& a, const Lottery& b) {
  return sgn(a.variance() - b.variance());
}

FeatureVector numeric_feature_vector(const Lottery& a, const Lottery& b) {
  FeatureVector f;
  f.unbiased = unbiased_advantage(a, b);
  f.sign = sign_advantage(a, b);
  f.uniform = uniform_advantage(a, b);
  f.better_on_avg = better_on_avg(a, b);
  f.dominance = dominance(a, b);
  f.worst_case = worst_case(a, b);
  f.risk = risk_comparison(a, b);
  return f;
}

FeatureVector numeric_feature_vector(const ChoiceTask& task) {
  if (!task.has_lotteries())
    throw Error(Errc::schema_violation,
                "task " + task.task_id + " has no lotteries; numeric features need both");
  return numeric_feature_vector(*task.option_a_lottery, *task.option_b_lottery);
}

}  // namespace choicekit::features
