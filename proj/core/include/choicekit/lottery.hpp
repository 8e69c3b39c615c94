#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "choicekit/rng.hpp"

namespace choicekit {

struct Outcome {
  double payoff = 0.0;
  double probability = 0.0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

// A discrete payoff distribution. Canonical form: support sorted by payoff
// ascending, duplicate payoffs merged (probabilities summed, exact payoff
// equality, no epsilon), probabilities summing to 1 within 1e-9.
//
// Construction renormalizes a probability sum within 1e-6 of 1 and rejects
// anything further off, so silent scaling of malformed inputs cannot happen.
class Lottery {
 public:
  static constexpr double kRenormTolerance = 1e-6;
  static constexpr double kSumTolerance = 1e-9;

  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  std::size_t support_size() const { return outcomes_.size(); }
  bool is_degenerate() const { return outcomes_.size() == 1; }

  double expected_value() const;
  // Population variance, Σ p·(x − EV)². Zero iff the lottery is degenerate.
  double variance() const;
  double min_payoff() const { return outcomes_.front().payoff; }
  double max_payoff() const { return outcomes_.back().payoff; }

  // One draw from the distribution. Consumes exactly one engine value.
  double sample(Rng& rng) const;
  // One draw treating every support point as equally likely.
  double sample_uniform(Rng& rng) const;
  // Unweighted mean of |payoff| over the support points.
  double mean_abs_support() const;

  friend bool operator==(const Lottery&, const Lottery&) = default;

 private:
  friend Lottery make_lottery(std::vector<Outcome> outcomes);

  std::vector<Outcome> outcomes_;
};

Lottery make_lottery(std::vector<Outcome> outcomes);

}  // namespace choicekit
