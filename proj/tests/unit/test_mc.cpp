#include "doctest.h"
#include "fscbound/mc.hpp"

using namespace fscbound;

namespace {
ChannelSpec one_state_bsc(double eps) {
  return new_fsc(1, 2, 2, {1.0}, {1 - eps, eps, eps, 1 - eps},
                 no_constraint());
}

FixedSource iud_source(const ChannelSpec& ch, int m, int u) {
  ContextSpace space(ch, m, u);
  return FixedSource(ch, m, u, uniform_policy(space));
}

// Optimal no-consecutive-ones input law on the noiseless channel: after a
// zero, send a one with the golden-ratio probability.
FixedSource golden_source(const ChannelSpec& ch) {
  ContextSpace space(ch, 1, 1);
  const double r = (3.0 - std::sqrt(5.0)) / 2.0;
  PolicyRows rows = uniform_policy(space);
  std::vector<int> x0{0};
  for (int s = 0; s < 2; ++s) {
    std::vector<int> sw{s};
    long ctx = space.encode(x0, sw);
    rows.p[ctx * 2 + 0] = 1.0 - r;
    rows.p[ctx * 2 + 1] = r;
  }
  return FixedSource(ch, 1, 1, rows);
}
}  // namespace

TEST_CASE("memoryless channel with uniform inputs hits the known rate") {
  ChannelSpec bsc = one_state_bsc(0.1);
  FixedSource src = iud_source(bsc, 0, 0);
  RateEstimate est = directed_info_rate(bsc, src, 0, 0, 200000, 1000, 11);
  CHECK(est.std_error < 0.005);
  CHECK(std::fabs(est.mean - 0.531004) < 3 * est.std_error + 1e-6);
}

TEST_CASE("pure-noise channel carries no information") {
  ChannelSpec noise = new_fsc(1, 2, 2, {1.0}, {0.5, 0.5, 0.5, 0.5},
                              no_constraint());
  FixedSource src = iud_source(noise, 0, 0);
  RateEstimate est = directed_info_rate(noise, src, 0, 0, 20000, 500, 3);
  CHECK(est.mean == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("constrained noiseless channel at the golden-ratio input law") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.0, 0.0, rll_1_inf());
  FixedSource src = golden_source(ch);
  RateEstimate est = directed_info_rate(ch, src, 1, 1, 300000, 1000, 5);
  const double truth = 0.694242;  // log2 of the golden ratio
  CHECK(est.std_error < 0.003);
  CHECK(std::fabs(est.mean - truth) < 3 * est.std_error + 1e-6);
}

TEST_CASE("the seed makes the estimate reproducible bit for bit") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.001, 0.5, rll_1_inf());
  FixedSource a = iud_source(ch, 1, 1);
  FixedSource b = iud_source(ch, 1, 1);
  RateEstimate ea = directed_info_rate(ch, a, 1, 1, 30000, 500, 99);
  RateEstimate eb = directed_info_rate(ch, b, 1, 1, 30000, 500, 99);
  CHECK(ea.mean == eb.mean);
  CHECK(ea.std_error == eb.std_error);
  FixedSource c = iud_source(ch, 1, 1);
  RateEstimate ec = directed_info_rate(ch, c, 1, 1, 30000, 500, 100);
  CHECK(ea.mean != ec.mean);
}

TEST_CASE("one-step exact value equals the single-letter information") {
  ChannelSpec bsc = one_state_bsc(0.1);
  FixedSource src = iud_source(bsc, 0, 0);
  CHECK(exact_directed_info(bsc, src, 0, 0, 1) ==
        doctest::Approx(0.531004).epsilon(1e-5));

  ChannelSpec noise = new_fsc(1, 2, 2, {1.0}, {0.5, 0.5, 0.5, 0.5},
                              no_constraint());
  FixedSource nsrc = iud_source(noise, 0, 0);
  CHECK(exact_directed_info(noise, nsrc, 0, 0, 4) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("exact enumeration rejects an oversized horizon") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.001, 0.5);
  FixedSource src = iud_source(ch, 1, 1);
  CHECK_THROWS_AS(exact_directed_info(ch, src, 1, 1, 12, 1000),
                  EnumerationTooLarge);
  CHECK_THROWS_AS(exact_directed_info_paths(ch, src, 1, 12, 1000),
                  EnumerationTooLarge);
}

TEST_CASE("finite-horizon trials agree with the exact per-step average") {
  ChannelSpec ch = gilbert_elliott(0.4, 0.2, 0.05, 0.3);
  FixedSource mc_src = iud_source(ch, 1, 1);
  FixedSource ex_src = iud_source(ch, 1, 1);
  const int horizon = 6;
  RateEstimate est = finite_horizon_info(ch, mc_src, 1, horizon, 4000, 21);
  const double exact = exact_directed_info(ch, ex_src, 1, 1, horizon) / horizon;
  CHECK(std::fabs(est.mean - exact) < 3 * est.std_error + 1e-6);
}

TEST_CASE("memoryless lower bound recovers the capacity-achieving law") {
  ChannelSpec bsc = one_state_bsc(0.1);
  LowerBoundResult lb = markov_lower_bound(bsc, 0, 0.1, 100000, 1000, 7);
  CHECK(std::fabs(lb.estimate.mean - 0.531004) <
        3 * lb.estimate.std_error + 1e-3);
  CHECK(lb.rows[0] == doctest::Approx(0.5));
}

TEST_CASE("first-order lower bound on the constrained noiseless channel") {
  ChannelSpec ch = gilbert_elliott(0.3, 0.3, 0.0, 0.0, rll_1_inf());
  LowerBoundResult lb = markov_lower_bound(ch, 1, 0.05, 100000, 1000, 13);
  const double truth = 0.694242;
  // The 0.05-step grid brackets the golden-ratio law closely.
  CHECK(lb.estimate.mean > truth - 0.01);
  CHECK(lb.estimate.mean < truth + 3 * lb.estimate.std_error + 1e-6);
  // After a one, the constraint forces a zero.
  CHECK(lb.rows[1 * 2 + 0] == doctest::Approx(1.0));
}
