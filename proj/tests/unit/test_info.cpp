#include "doctest.h"
#include "fscbound/info.hpp"

using namespace fscbound;

namespace {
ChannelSpec one_state_bsc(double eps) {
  return new_fsc(1, 2, 2, {1.0}, {1 - eps, eps, eps, 1 - eps},
                 no_constraint());
}
}  // namespace

TEST_CASE("empty output window has probability one") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.001, 0.5);
  CHECK(tail_output_prob(ch, {}, 0, {}) == 1.0);
}

TEST_CASE("noiseless channel tail matches the inputs exactly") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.0, 0.0);
  std::vector<int> x{1}, y_match{1}, y_miss{0};
  CHECK(tail_output_prob(ch, x, 0, y_match) == doctest::Approx(1.0));
  CHECK(tail_output_prob(ch, x, 0, y_miss) == doctest::Approx(0.0));
}

TEST_CASE("empty window posterior is a unit mass at the boundary state") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.001, 0.5);
  auto post = window_state_posterior(ch, 1, {}, {});
  CHECK(post[0] == 0.0);
  CHECK(post[1] == 1.0);
}

TEST_CASE("state-revealing outputs pin the window posterior") {
  // y equals the previous state regardless of input: observing y_t reveals
  // s_{t-1} exactly.
  ChannelSpec ch = new_fsc(2, 2, 2, {0.7, 0.3, 0.3, 0.7},
                           {1.0, 0.0, 0.0, 1.0,
                            1.0, 0.0, 0.0, 1.0},
                           no_constraint());
  std::vector<int> xw{0, 0}, yw{-1, 1};  // y_{t-1} = 1 reveals s_{t-2}... and
  // the chain then mixes one step to s_{t-1}
  auto post = window_state_posterior(ch, 0, xw, yw);
  // s_{t-2} = 1 (revealed); s_{t-1} ~ P[1] = (0.3, 0.7)
  CHECK(post[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(post[1] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("single-step truncated term equals the channel row") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.001, 0.5);
  std::vector<int> xw{1};  // v = 0: window holds only x_t
  auto q = truncated_term_prob(ch, 1, xw, {});
  CHECK(q[0] == doctest::Approx(ch.p_output(1, 1, 0)));
  CHECK(q[1] == doctest::Approx(ch.p_output(1, 1, 1)));
}

TEST_CASE("stage reward closed forms on one-state channels") {
  ChannelSpec clean = one_state_bsc(0.0);
  ContextSpace space(clean, 0, 0);
  AlphaVector a = alpha_init(clean, space);
  PolicyRows rows = uniform_policy(space);
  CHECK(stage_reward(clean, space, a, rows, 0, 0) ==
        doctest::Approx(1.0).epsilon(1e-12));

  ChannelSpec bsc = one_state_bsc(0.1);
  ContextSpace space2(bsc, 0, 0);
  CHECK(stage_reward(bsc, space2, alpha_init(bsc, space2),
                     uniform_policy(space2), 0, 0) ==
        doctest::Approx(0.531004).epsilon(1e-5));
}

TEST_CASE("output independent of everything gives zero reward") {
  ChannelSpec noise = new_fsc(2, 2, 2, {0.6, 0.4, 0.2, 0.8},
                              {0.5, 0.5, 0.5, 0.5,
                               0.5, 0.5, 0.5, 0.5},
                              no_constraint());
  ContextSpace space(noise, 1, 1);
  const double phi = stage_reward(noise, space, alpha_init(noise, space),
                                  uniform_policy(space), 1, 1);
  CHECK(phi == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("window joint is a probability table consistent with the reward") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.001, 0.5, rll_1_inf());
  ContextSpace space(ch, 1, 1);
  AlphaVector a = alpha_init(ch, space);
  PolicyRows rows = uniform_policy(space);
  WindowJoint wj = window_joint(ch, space, a, rows, 1, 1);
  double total = 0.0;
  for (double p : wj.p) {
    CHECK(p >= 0.0);
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stage_reward(ch, space, a, rows, 1, 1) >= 0.0);
}

TEST_CASE("mismatched feedback delay is rejected") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.001, 0.5);
  ContextSpace space(ch, 1, 1);
  CHECK_THROWS_AS(stage_reward(ch, space, alpha_init(ch, space),
                               uniform_policy(space), 0, 1),
                  DelayMismatch);
}
