#include "choicekit/beast.hpp"

#include <cmath>

#include <doctest.h>

#include "choicekit/features.hpp"
#include "test_support.hpp"

using namespace choicekit;
using choicekit::test::error_code_of;

namespace {

Lottery sure(double v) { return make_lottery({{v, 1.0}}); }

}  // namespace

TEST_CASE("params validation") {
  beast::BeastParams p;
  p.validate();

  p.n_agents = 0;
  CHECK(error_code_of([&] { p.validate(); }) == Errc::invalid_hyperparameter);
  p = {};
  p.kappa_max = 0;
  CHECK(error_code_of([&] { p.validate(); }) == Errc::invalid_hyperparameter);
  p = {};
  p.ev_error_sigma = -0.1;
  CHECK(error_code_of([&] { p.validate(); }) == Errc::invalid_hyperparameter);
  p = {};
  p.tool_weights = {0.5, 0.5, 0.5, 0.5};
  CHECK(error_code_of([&] { p.validate(); }) == Errc::invalid_hyperparameter);
  p = {};
  p.sample_weight_min = 0.9;
  p.sample_weight_max = 0.1;
  CHECK(error_code_of([&] { p.validate(); }) == Errc::invalid_hyperparameter);
}

TEST_CASE("space validation") {
  beast::SyntheticSpace s;
  s.validate();
  s.payoff_min = 5.0;
  s.payoff_max = 5.0;
  CHECK(error_code_of([&] { s.validate(); }) == Errc::invalid_hyperparameter);
  s = {};
  s.max_support_size = 0;
  CHECK(error_code_of([&] { s.validate(); }) == Errc::invalid_hyperparameter);
  s = {};
  s.probability_resolution = 0.0;
  CHECK(error_code_of([&] { s.validate(); }) == Errc::invalid_hyperparameter);
  s = {};
  s.sure_thing_rate = 1.5;
  CHECK(error_code_of([&] { s.validate(); }) == Errc::invalid_hyperparameter);
}

TEST_CASE("same seed, same rate, bit for bit") {
  beast::BeastParams p;
  p.n_agents = 1000;
  Lottery a = make_lottery({{10.0, 0.4}, {-2.0, 0.6}});
  Lottery b = sure(2.0);
  double r1 = beast::beast_choice_rate(a, b, p, 17);
  double r2 = beast::beast_choice_rate(a, b, p, 17);
  CHECK(r1 == r2);
  CHECK(r1 >= 0.0);
  CHECK(r1 <= 1.0);
  CHECK(beast::beast_choice_rate(a, b, p, 18) != r1);
}

TEST_CASE("identical options split near fifty-fifty") {
  beast::BeastParams p;
  Lottery x = make_lottery({{5.0, 0.23}, {2.0, 0.77}});
  double rate = beast::beast_choice_rate(x, x, p, 0);
  CHECK(std::abs(rate - 0.5) <= 0.03);
}

TEST_CASE("the introduction pair leans toward the dominant option") {
  beast::BeastParams p;
  Lottery a = sure(1.0);
  Lottery b = make_lottery({{5.0, 0.23}, {2.0, 0.77}});
  CHECK(beast::beast_choice_rate(a, b, p, 0) < 0.5);
}

TEST_CASE("a statewise-dominant option wins most agents") {
  beast::BeastParams p;
  p.n_agents = 2000;
  Lottery a = make_lottery({{8.0, 0.5}, {12.0, 0.5}});
  Lottery b = make_lottery({{1.0, 0.5}, {3.0, 0.5}});
  REQUIRE(features::dominance(a, b) == 1.0);
  CHECK(beast::beast_choice_rate(a, b, p, 3) > 0.5);
}

TEST_CASE("synthetic tasks stay inside the space") {
  beast::SyntheticSpace space;
  Rng rng(1);
  int degenerate = 0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    ChoiceTask t = beast::generate_synthetic_task(space, rng);
    REQUIRE(t.has_lotteries());
    for (const Lottery* lot : {&*t.option_a_lottery, &*t.option_b_lottery}) {
      REQUIRE(lot->support_size() >= 1);
      REQUIRE(lot->support_size() <= static_cast<std::size_t>(space.max_support_size));
      REQUIRE(lot->min_payoff() >= space.payoff_min);
      REQUIRE(lot->max_payoff() <= space.payoff_max);
      double sum = 0.0;
      for (const auto& o : lot->outcomes()) sum += o.probability;
      REQUIRE(std::abs(sum - 1.0) <= Lottery::kSumTolerance);
    }
    degenerate += t.option_a_lottery->is_degenerate();
  }
  // sure_thing_rate 0.4 should land well inside (0.3, 0.5) over 2000 tasks
  CHECK(degenerate > n * 3 / 10);
  CHECK(degenerate < n / 2);
}

TEST_CASE("generate_synthetic_dataset labels and numbers its tasks") {
  beast::SyntheticSpace space;
  beast::BeastParams p;
  p.n_agents = 200;
  auto tasks = beast::generate_synthetic_dataset(20, space, p, 9);
  REQUIRE(tasks.size() == 20);
  CHECK(tasks[0].task_id == "syn-000000");
  CHECK(tasks[19].task_id == "syn-000019");
  for (const auto& t : tasks) {
    REQUIRE(t.observed_rate_a.has_value());
    CHECK(*t.observed_rate_a >= 0.0);
    CHECK(*t.observed_rate_a <= 1.0);
    CHECK(*t.n_participants == p.n_agents);
  }
  auto again = beast::generate_synthetic_dataset(20, space, p, 9);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    CHECK(*tasks[i].observed_rate_a == *again[i].observed_rate_a);
    CHECK(*tasks[i].option_a_lottery == *again[i].option_a_lottery);
    CHECK(*tasks[i].option_b_lottery == *again[i].option_b_lottery);
  }
}
