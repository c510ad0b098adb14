#include "doctest.h"
#include "fscbound/context.hpp"

using namespace fscbound;

namespace {
ChannelSpec ge() { return gilbert_elliott(0.3, 0.3, 0.001, 0.5); }
ChannelSpec ge_rll() {
  return gilbert_elliott(0.3, 0.3, 0.001, 0.5, rll_1_inf());
}
}  // namespace

TEST_CASE("window encoding for m=1, u=1") {
  ChannelSpec ch = ge();
  ContextSpace space(ch, 1, 1);
  CHECK(space.size() == 4);
  std::vector<int> x1{1}, b{1}, x0{0}, g{0};
  CHECK(space.encode(x1, b) == 3);
  CHECK(space.encode(x0, g) == 0);
  std::vector<int> xw, sw;
  space.decode(2, xw, sw);
  CHECK(xw == std::vector<int>{1});
  CHECK(sw == std::vector<int>{0});
  CHECK_THROWS_AS(space.decode(space.size(), xw, sw), IndexOutOfRange);
}

TEST_CASE("shift semantics") {
  ChannelSpec ch = ge();
  ContextSpace space(ch, 1, 1);
  std::vector<int> x0{0}, g{0};
  const long start = space.encode(x0, g);
  const long moved = space.shift(start, 1, 1);
  std::vector<int> xw, sw;
  space.decode(moved, xw, sw);
  CHECK(xw == std::vector<int>{1});
  CHECK(sw == std::vector<int>{1});

  ContextSpace space2(ch, 2, 2);
  std::vector<int> x01{0, 1};
  const long start2 = space2.encode(x01, g);
  const long moved2 = space2.shift(start2, 0, 1);
  space2.decode(moved2, xw, sw);
  CHECK(xw == std::vector<int>{1, 0});
  CHECK(sw == std::vector<int>{1});
}

TEST_CASE("constraint marks forbidden windows inadmissible") {
  ChannelSpec ch = ge_rll();
  ContextSpace space(ch, 2, 2);
  std::vector<int> x01{0, 1}, g{0};
  const long start = space.encode(x01, g);
  CHECK(space.admissible(start));
  const long bad = space.shift(start, 1, 0);  // x-window becomes (1,1)
  CHECK_FALSE(space.admissible(bad));
  CHECK(space.admissible_rank(bad) == -1);
  // RLL on a window of length 2: (1,1) excluded for each of 2 states
  CHECK(space.size() == 8);
  CHECK(space.admissible_count() == 6);
}

TEST_CASE("allowed inputs respect the constraint") {
  ChannelSpec ch = ge_rll();
  ContextSpace space(ch, 1, 1);
  std::vector<int> x1{1}, x0{0}, g{0};
  CHECK(space.allowed_inputs(space.encode(x1, g)) == std::vector<int>{0});
  CHECK(space.allowed_inputs(space.encode(x0, g)) == std::vector<int>{0, 1});
}

TEST_CASE("admissible rank enumeration is a bijection") {
  ChannelSpec ch = ge_rll();
  ContextSpace space(ch, 2, 1);
  long seen = 0;
  for (long ctx = 0; ctx < space.size(); ++ctx) {
    if (!space.admissible(ctx)) continue;
    const long r = space.admissible_rank(ctx);
    CHECK(space.admissible_index(r) == ctx);
    ++seen;
  }
  CHECK(seen == space.admissible_count());
}

TEST_CASE("degenerate window m=0") {
  ChannelSpec ch = ge();
  ContextSpace space(ch, 0, 0);
  CHECK(space.size() == 2);  // bare state window of length 1
  ChannelSpec one = new_fsc(1, 2, 2, {1.0}, {0.5, 0.5, 0.5, 0.5},
                            no_constraint());
  ContextSpace trivial(one, 0, 0);
  CHECK(trivial.size() == 1);
}
