#include "choicekit/beast.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "choicekit/errors.hpp"

namespace choicekit::beast {

void BeastParams::validate() const {
  if (n_agents < 1) throw Error(Errc::invalid_hyperparameter, "n_agents must be >= 1");
  if (kappa_max < 1) throw Error(Errc::invalid_hyperparameter, "kappa_max must be >= 1");
  if (!(ev_error_sigma >= 0.0))
    throw Error(Errc::invalid_hyperparameter, "ev_error_sigma must be >= 0");
  double sum = 0.0;
  for (double w : tool_weights) {
    if (!(w >= 0.0)) throw Error(Errc::invalid_hyperparameter, "tool weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(Errc::invalid_hyperparameter, "tool weights must sum to 1");
  if (!(sample_weight_min >= 0.0 && sample_weight_max <= 1.0 &&
        sample_weight_min <= sample_weight_max))
    throw Error(Errc::invalid_hyperparameter, "sample weight range must sit inside [0, 1]");
}

void SyntheticSpace::validate() const {
  if (!(payoff_min < payoff_max))
    throw Error(Errc::invalid_hyperparameter, "payoff range is empty");
  if (max_support_size < 1)
    throw Error(Errc::invalid_hyperparameter, "max_support_size must be >= 1");
  if (!(probability_resolution > 0.0 && probability_resolution <= 1.0))
    throw Error(Errc::invalid_hyperparameter, "probability_resolution must be in (0, 1]");
  if (!(sure_thing_rate >= 0.0 && sure_thing_rate <= 1.0))
    throw Error(Errc::invalid_hyperparameter, "sure_thing_rate must be in [0, 1]");
  int steps = static_cast<int>(std::llround(1.0 / probability_resolution));
  if (max_support_size > steps)
    throw Error(Errc::invalid_hyperparameter,
                "probability grid too coarse for max_support_size");
}

namespace {

Tool draw_tool(const BeastParams& params, Rng& rng) {
  double u = uniform_double(rng);
  double acc = 0.0;
  for (int t = 0; t < 3; ++t) {
    acc += params.tool_weights[static_cast<std::size_t>(t)];
    if (u < acc) return static_cast<Tool>(t);
  }
  return Tool::sign;
}

double mental_sample(const Lottery& x, const BeastParams& params, Rng& rng) {
  switch (draw_tool(params, rng)) {
    case Tool::unbiased:
      return x.sample(rng);
    case Tool::uniform:
      return x.sample_uniform(rng);
    case Tool::pessimism:
      return x.min_payoff();
    case Tool::sign: {
      double d = x.sample(rng);
      double s = (d > 0.0) ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      return s * x.mean_abs_support();
    }
  }
  return x.min_payoff();
}

double estimate_value(const Lottery& x, double w, int kappa, const BeastParams& params,
                      Rng& rng) {
  double ev_part = x.expected_value() + normal(rng, 0.0, params.ev_error_sigma);
  double sum = 0.0;
  for (int k = 0; k < kappa; ++k) sum += mental_sample(x, params, rng);
  return (1.0 - w) * ev_part + w * sum / static_cast<double>(kappa);
}

}  // namespace

double beast_choice_rate(const Lottery& a, const Lottery& b, const BeastParams& params,
                         std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  int chose_a = 0;
  for (int agent = 0; agent < params.n_agents; ++agent) {
    double w = uniform_range(rng, params.sample_weight_min, params.sample_weight_max);
    int kappa = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(params.kappa_max)));
    double va = estimate_value(a, w, kappa, params, rng);
    double vb = estimate_value(b, w, kappa, params, rng);
    if (va > vb)
      ++chose_a;
    else if (va == vb && uniform_double(rng) < 0.5)
      ++chose_a;
  }
  return static_cast<double>(chose_a) / static_cast<double>(params.n_agents);
}

namespace {

double draw_payoff(const SyntheticSpace& space, Rng& rng) {
  return uniform_range(rng, space.payoff_min, space.payoff_max);
}

// k positive probabilities on the resolution grid summing to exactly 1/res
// grid steps: k-1 distinct cut points over the unit interval, differenced.
std::vector<double> draw_probabilities(const SyntheticSpace& space, int k, Rng& rng) {
  int steps = static_cast<int>(std::llround(1.0 / space.probability_resolution));
  std::vector<int> cuts;
  cuts.reserve(static_cast<std::size_t>(k) + 1);
  cuts.push_back(0);
  while (static_cast<int>(cuts.size()) < k) {
    int c = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(steps - 1)));
    bool dup = false;
    for (std::size_t i = 1; i < cuts.size(); ++i) dup = dup || cuts[i] == c;
    if (!dup) cuts.push_back(c);
  }
  cuts.push_back(steps);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    probs.push_back(static_cast<double>(cuts[static_cast<std::size_t>(i) + 1] -
                                        cuts[static_cast<std::size_t>(i)]) *
                    space.probability_resolution);
  return probs;
}

Lottery draw_lottery(const SyntheticSpace& space, int min_support, Rng& rng) {
  int lo = std::min(min_support, space.max_support_size);
  int k = lo + static_cast<int>(uniform_below(
                   rng, static_cast<std::uint64_t>(space.max_support_size - lo + 1)));
  std::vector<double> probs = draw_probabilities(space, k, rng);
  std::vector<Outcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) outcomes.push_back({draw_payoff(space, rng), probs[static_cast<std::size_t>(i)]});
  return make_lottery(std::move(outcomes));
}

}  // namespace

ChoiceTask generate_synthetic_task(const SyntheticSpace& space, Rng& rng) {
  space.validate();
  ChoiceTask task;
  // Outside the sure-thing branch option A is a proper gamble, so
  // sure_thing_rate really is the rate of degenerate A options.
  bool sure = uniform_double(rng) < space.sure_thing_rate;
  if (sure)
    task.option_a_lottery = make_lottery({Outcome{draw_payoff(space, rng), 1.0}});
  else
    task.option_a_lottery = draw_lottery(space, 2, rng);
  task.option_b_lottery = draw_lottery(space, 1, rng);
  return task;
}

std::vector<ChoiceTask> generate_synthetic_dataset(int n, const SyntheticSpace& space,
                                                   const BeastParams& params,
                                                   std::uint64_t seed) {
  if (n < 1) throw Error(Errc::invalid_hyperparameter, "dataset size must be >= 1");
  space.validate();
  params.validate();
  std::vector<ChoiceTask> tasks;
  tasks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng task_rng(mix_seed(seed, static_cast<std::uint64_t>(i), 0));
    ChoiceTask task = generate_synthetic_task(space, task_rng);
    char id[24];
    std::snprintf(id, sizeof id, "syn-%06d", i);
    task.task_id = id;
    task.observed_rate_a =
        beast_choice_rate(*task.option_a_lottery, *task.option_b_lottery, params,
                          mix_seed(seed, static_cast<std::uint64_t>(i), 1));
    task.n_participants = params.n_agents;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

}  // namespace choicekit::beast
