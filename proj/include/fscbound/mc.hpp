#pragma once

#include "fscbound/dp.hpp"

namespace fscbound {

// An input process with a context shape (m, u): at every step it exposes one
// conditional input distribution per context, possibly as a function of the
// current belief. Instances keep per-chain scratch and are not shared across
// threads.
class Source {
 public:
  virtual ~Source() = default;
  virtual const ContextSpace& space() const = 0;
  virtual const PolicyRows& rows_at(const AlphaVector& alpha) = 0;
};

// Belief-independent rows (stationary contextual source).
class FixedSource : public Source {
 public:
  FixedSource(const ChannelSpec& channel, int m, int u, PolicyRows rows);
  const ContextSpace& space() const override { return space_; }
  const PolicyRows& rows_at(const AlphaVector&) override { return rows_; }

 private:
  ContextSpace space_;
  PolicyRows rows_;
};

// Rows that depend only on the last `order` inputs, broadcast over the state
// part of the context. history_rows is flat [hist * |X| + x] with the most
// recent input least significant in hist; order <= m.
PolicyRows broadcast_history_rows(const ContextSpace& space,
                                  std::span<const double> history_rows,
                                  int order);

// Replays an optimized policy table: looks up the quantized belief on the
// table's grid at every step.
class PolicySource : public Source {
 public:
  PolicySource(const ChannelSpec& channel, PolicyTable table);
  const ContextSpace& space() const override { return space_; }
  const PolicyRows& rows_at(const AlphaVector& alpha) override;
  const PolicyTable& table() const { return table_; }

 private:
  ContextSpace space_;
  SimplexGrid grid_;
  PolicyTable table_;
};

struct RateEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
  long burn_in = 0;
  std::uint64_t seed = 0;
};

// Single-trajectory estimate of the truncated directed-information rate in
// bits per step: per-step terms
//   log2 Pr(y_t | window) - log2 Pr(y_t | y^{t-1})
// with the numerator from truncated_term_prob over the clipped (v+1)-window
// and the denominator from an exact receiver filter. std_error comes from
// batch means over the post-burn-in samples.
RateEstimate directed_info_rate(const ChannelSpec& channel, Source& source,
                                int u, int v, long num_samples, long burn_in,
                                std::uint64_t seed, int batches = 100);

// Independent finite-horizon trials of the same per-step terms, averaged per
// trial; mean and std_error are across trials.
RateEstimate finite_horizon_info(const ChannelSpec& channel, Source& source,
                                 int v, int horizon, long trials,
                                 std::uint64_t seed);

// Exact sum over t = 1..horizon of I(window_t; Y_t | Y^{t-1}) in bits, where
// window_t = (x_{max(1,t-v)..t}, s_{max(0,t-v-1)}). Computed by a forward
// recursion over output sequences; feasible whenever |Y|^horizon times the
// enlarged context space fits the budget.
double exact_directed_info(const ChannelSpec& channel, Source& source, int u,
                           int v, int horizon, long budget = 100000000);

struct ExactInfo {
  double full_bits = 0.0;      // conditioning on (x^t, s_0^{max(0,t-v-1)})
  double windowed_bits = 0.0;  // conditioning on the clipped (v+1)-window
};

// Brute-force enumeration over complete trajectories (inputs, outputs and
// states); returns both conditioning variants so their agreement can be
// checked term by term.
ExactInfo exact_directed_info_paths(const ChannelSpec& channel, Source& source,
                                    int v, int horizon,
                                    long budget = 100000000);

struct LowerBoundResult {
  RateEstimate estimate;
  int order = 0;
  std::vector<double> rows;  // flat [hist * |X| + x] for the best candidate
};

// Feedforward achievable rate: grid search over order-r stationary Markov
// input processes (step eta_lb on each conditional row), each evaluated by a
// single-trajectory estimate of I(X -> Y) with a common seed.
LowerBoundResult markov_lower_bound(const ChannelSpec& channel, int order,
                                    double eta_lb, long num_samples,
                                    long burn_in, std::uint64_t seed,
                                    long budget = 1000000, int batches = 100);

// Single-candidate version of the lower-bound estimator.
RateEstimate feedforward_info_rate(const ChannelSpec& channel, int order,
                                   std::span<const double> history_rows,
                                   long num_samples, long burn_in,
                                   std::uint64_t seed, int batches = 100);

}  // namespace fscbound
