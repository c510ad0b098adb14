#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fscbound/dp.hpp"

using namespace fscbound;

namespace {
ChannelSpec one_state_bsc(double eps) {
  return new_fsc(1, 2, 2, {1.0}, {1 - eps, eps, eps, 1 - eps},
                 no_constraint());
}
ChannelSpec ge_rll() {
  return gilbert_elliott(0.3, 0.3, 0.001, 0.5, rll_1_inf());
}
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("per-coordinate rounding with largest-remainder correction") {
  std::vector<double> a{0.12, 0.25, 0.375, 0.255};
  auto c = quantize_counts(a, 10);
  CHECK(c == std::vector<int>{1, 2, 4, 3});

  std::vector<double> half{0.5, 0.5};
  // Halves round down, so the deficit goes to the lowest coordinate.
  CHECK(quantize_counts(half, 5) == std::vector<int>{3, 2});
}

TEST_CASE("quantization is idempotent and preserves the simplex") {
  ChannelSpec ch = ge_rll();
  ContextSpace space(ch, 1, 1);
  AlphaVector a{0.13, 0.22, 0.31, 0.34};
  AlphaVector q = quantize(a, space, 0.1);
  double total = 0.0;
  for (double v : q) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quantize(q, space, 0.1) == q);
}

TEST_CASE("grid sizes match the composition counts") {
  ChannelSpec one = one_state_bsc(0.1);
  ContextSpace tiny(one, 1, 0);  // 2 admissible contexts
  CHECK(SimplexGrid(tiny, 0.5).num_points() == 3);

  ChannelSpec ge = gilbert_elliott(0.3, 0.3, 0.001, 0.5);
  ContextSpace space(ge, 1, 1);  // 4 admissible contexts
  CHECK(SimplexGrid(space, 0.1).num_points() == 286);

  ChannelSpec rll = ge_rll();
  ContextSpace space_rll(rll, 1, 1);
  CHECK(SimplexGrid(space_rll, 0.05).num_points() == 1771);
}

TEST_CASE("tiny budget rejects a large grid") {
  ChannelSpec ge = gilbert_elliott(0.3, 0.3, 0.001, 0.5);
  ContextSpace space(ge, 1, 1);
  CHECK_THROWS_AS(SimplexGrid(space, 0.05, 100), GridTooLarge);
}

TEST_CASE("grid rank and counts are inverse bijections") {
  ChannelSpec ge = gilbert_elliott(0.3, 0.3, 0.001, 0.5);
  ContextSpace space(ge, 1, 1);
  SimplexGrid grid(space, 0.25);
  std::vector<int> counts;
  for (long p = 0; p < grid.num_points(); ++p) {
    grid.counts_of(p, counts);
    int total = 0;
    for (int c : counts) total += c;
    CHECK(total == grid.resolution());
    CHECK(grid.index_of(counts) == p);
    AlphaVector a = grid.alpha_of(p);
    CHECK(quantize_to_index(a, grid) == p);
  }
}

TEST_CASE("candidate policy enumeration counts and forced rows") {
  ChannelSpec one = one_state_bsc(0.1);
  ContextSpace tiny(one, 1, 0);
  // Two contexts share the free-input structure; eta = 0.5 gives 3 rows each.
  CHECK(enumerate_policies(tiny, 0.5).size() == 9);

  ChannelSpec rll = ge_rll();
  ContextSpace space(rll, 1, 1);
  auto cands = enumerate_policies(space, 0.1);
  CHECK(cands.size() == 121);  // two free contexts, 11 distributions each
  for (const auto& rows : cands) {
    // Contexts whose input window ends in 1 admit only x = 0.
    std::vector<int> x1{1}, g{0}, b{1};
    for (long ctx : {space.encode(x1, g), space.encode(x1, b)}) {
      CHECK(rows.prob(ctx, 0, 2) == 1.0);
      CHECK(rows.prob(ctx, 1, 2) == 0.0);
    }
  }
  CHECK_THROWS_AS(enumerate_policies(space, 0.01, 50), PolicySpaceTooLarge);
}

TEST_CASE("single backup from zero picks the best stage reward") {
  ChannelSpec bsc = one_state_bsc(0.1);
  ContextSpace space(bsc, 0, 0);
  SimplexGrid grid(space, 0.5);
  REQUIRE(grid.num_points() == 1);
  auto cands = enumerate_policies(space, 0.02);
  std::vector<double> j0(grid.num_points(), 0.0);
  auto [best, arg] = bellman_backup(bsc, space, grid, j0, 0, cands, 0);
  CHECK(best == doctest::Approx(0.531004).epsilon(1e-5));
  // The winner is the uniform row (the capacity-achieving input law).
  CHECK(cands[arg].prob(0, 0, 2) == doctest::Approx(0.5));

  double by_hand = -1.0;
  AlphaVector a = grid.alpha_of(0);
  for (const auto& rows : cands)
    by_hand = std::max(by_hand, stage_reward(bsc, space, a, rows, 0, 0));
  CHECK(best == doctest::Approx(by_hand).epsilon(1e-12));
}

TEST_CASE("ties resolve to the lowest candidate index") {
  // Pure-noise channel: every candidate scores zero.
  ChannelSpec noise = new_fsc(1, 2, 2, {1.0}, {0.5, 0.5, 0.5, 0.5},
                              no_constraint());
  ContextSpace space(noise, 0, 0);
  SimplexGrid grid(space, 0.5);
  auto cands = enumerate_policies(space, 0.5);
  std::vector<double> j0(grid.num_points(), 0.0);
  auto [best, arg] = bellman_backup(noise, space, grid, j0, 0, cands, 0);
  CHECK(best == doctest::Approx(0.0));
  CHECK(arg == 0);
}

TEST_CASE("memoryless channel value iteration converges in one sweep") {
  ChannelSpec bsc = one_state_bsc(0.1);
  DpResult res = value_iteration(bsc, 0, 0, 0, 0.5, 0.02, 5);
  CHECK(res.num_grid_points == 1);
  CHECK(res.sigma == doctest::Approx(0.531004).epsilon(1e-5));
  CHECK(res.span == doctest::Approx(0.0));
}

TEST_CASE("value iteration sweeps are monotone and the policy is stationary") {
  ChannelSpec rll = ge_rll();
  DpOptions opt;
  DpResult res = value_iteration(rll, 1, 1, 1, 0.2, 0.1, 8, opt);
  REQUIRE(res.value.values.size() == res.prev_values.size());
  for (std::size_t p = 0; p < res.value.values.size(); ++p)
    CHECK(res.value.values[p] >= res.prev_values[p] - 1e-12);

  auto backed = policy_backup(rll, ContextSpace(rll, 1, 1),
                              SimplexGrid(ContextSpace(rll, 1, 1), 0.2),
                              res.value.values, res.policy);
  for (std::size_t p = 0; p < backed.size(); ++p)
    CHECK(std::fabs(backed[p] - res.value.values[p] - res.sigma) <=
          res.span + 1e-9);
}

TEST_CASE("worker count does not change the result") {
  ChannelSpec rll = ge_rll();
  DpOptions one, four;
  one.num_threads = 1;
  four.num_threads = 4;
  DpResult a = value_iteration(rll, 1, 1, 1, 0.25, 0.25, 4, one);
  DpResult b = value_iteration(rll, 1, 1, 1, 0.25, 0.25, 4, four);
  CHECK(a.value.values == b.value.values);
  CHECK(a.sigma == b.sigma);
  REQUIRE(a.policy.rows.size() == b.policy.rows.size());
  for (std::size_t p = 0; p < a.policy.rows.size(); ++p)
    CHECK(a.policy.rows[p].p == b.policy.rows[p].p);
}

TEST_CASE("policy files round-trip and catch a channel mismatch") {
  ChannelSpec rll = ge_rll();
  DpResult res = value_iteration(rll, 1, 1, 1, 0.25, 0.25, 3);
  const std::string path = "dp_roundtrip_test.policy";
  save_policy(path, rll, res.policy);
  PolicyTable loaded = load_policy(path, rll);
  CHECK(loaded.u == res.policy.u);
  CHECK(loaded.delta == res.policy.delta);
  REQUIRE(loaded.rows.size() == res.policy.rows.size());
  for (std::size_t p = 0; p < loaded.rows.size(); ++p)
    CHECK(loaded.rows[p].p == res.policy.rows[p].p);

  const std::string again = "dp_roundtrip_test2.policy";
  save_policy(again, rll, loaded);
  CHECK(slurp(path) == slurp(again));

  ChannelSpec other = gilbert_elliott(0.3, 0.3, 0.001, 0.4, rll_1_inf());
  CHECK_THROWS_AS(load_policy(path, other), DigestMismatch);
  std::remove(path.c_str());
  std::remove(again.c_str());
}
