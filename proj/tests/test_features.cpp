#include "choicekit/features.hpp"

#include <cmath>

#include <doctest.h>

#include "choicekit/beast.hpp"
#include "test_support.hpp"

using namespace choicekit;
using choicekit::test::error_code_of;

namespace {

Lottery sure(double v) { return make_lottery({{v, 1.0}}); }

// The introduction's opening pair: A = 1 for sure, B = 5 w.p. 0.23 else 2.
Lottery intro_a() { return sure(1.0); }
Lottery intro_b() { return make_lottery({{5.0, 0.23}, {2.0, 0.77}}); }

double sgn(double v) { return v > 0 ? 1.0 : v < 0 ? -1.0 : 0.0; }

}  // namespace

TEST_CASE("unbiased_advantage enumerates the joint support") {
  CHECK(features::unbiased_advantage(intro_a(), intro_b()) == -1.0);
  CHECK(features::unbiased_advantage(intro_b(), intro_b()) == 0.0);
  Lottery a = make_lottery({{10.0, 0.1}, {0.0, 0.9}});
  CHECK(features::unbiased_advantage(a, sure(1.0)) == doctest::Approx(-0.8).epsilon(1e-12));
}

TEST_CASE("sign_advantage compares payoff signs only") {
  CHECK(features::sign_advantage(intro_a(), intro_b()) == 0.0);
  Lottery mixed = make_lottery({{5.0, 0.5}, {-5.0, 0.5}});
  CHECK(features::sign_advantage(mixed, sure(1.0)) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(features::sign_advantage(sure(1.0), sure(-1.0)) == 1.0);
}

TEST_CASE("uniform_advantage levels the supports first") {
  Lottery a = make_lottery({{10.0, 0.1}, {0.0, 0.9}});
  CHECK(features::uniform_advantage(a, sure(1.0)) == 0.0);
  CHECK(features::uniform_advantage(sure(2.0), sure(1.0)) == 1.0);
  CHECK(features::uniform_advantage(intro_b(), intro_b()) == 0.0);
}

TEST_CASE("sign-valued features match hand arithmetic") {
  CHECK(features::better_on_avg(intro_a(), intro_b()) == -1.0);
  CHECK(features::better_on_avg(intro_b(), intro_b()) == 0.0);
  CHECK(features::better_on_avg(sure(3.0), make_lottery({{0.0, 0.5}, {4.0, 0.5}})) == 1.0);

  CHECK(features::dominance(intro_a(), intro_b()) == -1.0);
  CHECK(features::dominance(sure(2.0), sure(2.0)) == 0.0);
  CHECK(features::dominance(make_lottery({{1.0, 0.5}, {10.0, 0.5}}), sure(2.0)) == 0.0);

  CHECK(features::worst_case(intro_a(), intro_b()) == -1.0);
  CHECK(features::worst_case(sure(1.0), sure(1.0)) == 0.0);
  CHECK(features::worst_case(make_lottery({{0.0, 0.9}, {100.0, 0.1}}), sure(-1.0)) == 1.0);

  CHECK(features::risk_comparison(intro_a(), intro_b()) == -1.0);
  CHECK(features::risk_comparison(make_lottery({{-10.0, 0.5}, {10.0, 0.5}}), sure(1.0)) == 1.0);
  CHECK(features::risk_comparison(intro_b(), intro_b()) == 0.0);
}

TEST_CASE("the introduction pair's full vector") {
  features::FeatureVector v = features::numeric_feature_vector(intro_a(), intro_b());
  CHECK(v.unbiased == -1.0);
  CHECK(v.sign == 0.0);
  CHECK(v.uniform == -1.0);
  CHECK(v.better_on_avg == -1.0);
  CHECK(v.dominance == -1.0);
  CHECK(v.worst_case == -1.0);
  CHECK(v.risk == -1.0);
}

TEST_CASE("identical options give the zero vector") {
  features::FeatureVector v = features::numeric_feature_vector(intro_b(), intro_b());
  for (double x : v.values()) CHECK(x == 0.0);
}

TEST_CASE("antisymmetry holds exactly on random pairs") {
  beast::SyntheticSpace space;
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    ChoiceTask t1 = beast::generate_synthetic_task(space, rng);
    ChoiceTask t2 = beast::generate_synthetic_task(space, rng);
    const Lottery& a = *t1.option_a_lottery;
    const Lottery& b = *t2.option_b_lottery;
    auto fwd = features::numeric_feature_vector(a, b).values();
    auto rev = features::numeric_feature_vector(b, a).values();
    for (std::size_t k = 0; k < fwd.size(); ++k) {
      REQUIRE(fwd[k] == -rev[k]);
      REQUIRE(fwd[k] >= -1.0);
      REQUIRE(fwd[k] <= 1.0);
    }
  }
}

TEST_CASE("dominance implies non-negative unbiased and worst_case") {
  beast::SyntheticSpace space;
  Rng rng(77);
  int dominated_seen = 0;
  for (int i = 0; i < 3000 && dominated_seen < 50; ++i) {
    ChoiceTask t = beast::generate_synthetic_task(space, rng);
    const Lottery& a = *t.option_a_lottery;
    const Lottery& b = *t.option_b_lottery;
    if (features::dominance(a, b) == 1.0) {
      ++dominated_seen;
      CHECK(features::unbiased_advantage(a, b) >= 0.0);
      CHECK(features::worst_case(a, b) >= 0.0);
    }
  }
  CHECK(dominated_seen > 0);
}

TEST_CASE("exact advantages agree with Monte Carlo") {
  beast::SyntheticSpace space;
  Rng gen(31337);
  const int draws = 20000;
  for (int i = 0; i < 100; ++i) {
    ChoiceTask t1 = beast::generate_synthetic_task(space, gen);
    ChoiceTask t2 = beast::generate_synthetic_task(space, gen);
    const Lottery& a = *t1.option_a_lottery;
    const Lottery& b = *t2.option_b_lottery;

    Rng mc(mix_seed(4242, static_cast<std::uint64_t>(i)));
    double unbiased = 0.0, sign = 0.0, uniform = 0.0;
    for (int d = 0; d < draws; ++d) {
      double x = a.sample(mc), y = b.sample(mc);
      unbiased += sgn(x - y);
      sign += sgn(sgn(x) - sgn(y));
      uniform += sgn(a.sample_uniform(mc) - b.sample_uniform(mc));
    }
    CHECK(std::abs(features::unbiased_advantage(a, b) - unbiased / draws) <= 0.025);
    CHECK(std::abs(features::sign_advantage(a, b) - sign / draws) <= 0.025);
    CHECK(std::abs(features::uniform_advantage(a, b) - uniform / draws) <= 0.025);
  }
}

TEST_CASE("the task overload requires lotteries") {
  ChoiceTask task;
  task.task_id = "t";
  task.option_a_text = "x";
  task.option_b_text = "y";
  CHECK_THROWS_AS((void)features::numeric_feature_vector(task), Error);
}
