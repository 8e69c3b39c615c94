#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "choicekit/task.hpp"

namespace choicekit::beast {

// Sampling-tool mixture for the mental samples, in this order.
enum class Tool { unbiased, uniform, pessimism, sign };

struct BeastParams {
  int n_agents = 4000;
  int kappa_max = 3;
  double ev_error_sigma = 0.35;
  // Weights over {unbiased, uniform, pessimism, sign}; non-negative, sum 1.
  std::array<double, 4> tool_weights{0.4, 0.25, 0.15, 0.2};
  double sample_weight_min = 0.3;
  double sample_weight_max = 1.0;

  void validate() const;  // Errc::invalid_hyperparameter
};

// Simulates n_agents independent agents and returns the proportion choosing
// option A. Per agent: draw the sampling weight w uniformly from
// [sample_weight_min, sample_weight_max) and kappa uniformly from
// {1..kappa_max}; each option X is valued as
//   (1 - w) * (EV(X) + eps) + w * mean of kappa mental samples,
// eps ~ Normal(0, ev_error_sigma) drawn independently per option. Each mental
// sample first draws its tool from tool_weights, then applies it to X:
//   unbiased   draw from X
//   uniform    draw from X with equal outcome probabilities
//   pessimism  min payoff of X
//   sign       draw from X, mapped to sign(payoff) times the unweighted mean
//              absolute payoff of X's support
// The agent picks A iff value(A) > value(B); exact ties fall to a fair coin.
//
// The per-agent draw order is fixed (w, kappa, then option A's eps and
// samples, then option B's, then the tie coin when needed), so a seed gives
// bit-identical rates across runs and platforms.
double beast_choice_rate(const Lottery& a, const Lottery& b, const BeastParams& params,
                         std::uint64_t seed);

struct SyntheticSpace {
  double payoff_min = -10.0;
  double payoff_max = 30.0;
  int max_support_size = 3;
  // Probabilities land on multiples of this resolution.
  double probability_resolution = 0.01;
  // Chance that option A is a sure thing (degenerate lottery).
  double sure_thing_rate = 0.4;

  void validate() const;  // Errc::invalid_hyperparameter
};

// One unlabeled numeric task drawn from the space. The caller assigns the id.
ChoiceTask generate_synthetic_task(const SyntheticSpace& space, Rng& rng);

// n tasks with ids "syn-000000".. and rates labeled by beast_choice_rate.
// Task i's generator and label seeds derive from (seed, i) alone, so the
// result is independent of how the work would be scheduled.
std::vector<ChoiceTask> generate_synthetic_dataset(int n, const SyntheticSpace& space,
                                                   const BeastParams& params,
                                                   std::uint64_t seed);

}  // namespace choicekit::beast
