#pragma once

#include "fscbound/belief.hpp"

namespace fscbound {

// Joint probability table over (A, s_bnd, y-window) at a fixed belief and
// policy, where A = (x_{t-v..t}, s_{t-v-1}), s_bnd = s_{t-u} and the output
// window covers y_{t-u..t}. Flat layout:
//   p[(a * |S| + s_bnd) * |Y|^{u+1} + ycode]
// with a = xcode * |S| + s_oldest (most recent symbols least significant)
// and ycode likewise ending in y_t.
struct WindowJoint {
  long a_size = 0;
  int num_states = 0;
  int num_outputs = 0;
  int u = 0;
  std::vector<double> p;
};

// Pr(y-window | x-window, s_boundary) for aligned length-u windows covering
// times t-u+1..t; the intermediate state path is summed out.
double tail_output_prob(const ChannelSpec& channel,
                        std::span<const int> x_window, int s_boundary,
                        std::span<const int> y_window);

// Pr(s_{t-1} | s_{t-v-1} = s_oldest, x_{t-v..t-1}, y_{t-v..t-1}). Entries of
// y_window may be -1 to mark unobserved outputs (the chain factor still
// applies). Windows may be shorter than v when clipped at the horizon start.
std::vector<double> window_state_posterior(const ChannelSpec& channel,
                                           int s_oldest,
                                           std::span<const int> x_window,
                                           std::span<const int> y_window);

// Pr(y_t | x_{t-v..t}, s_{t-v-1}, y-window): channel-law mixture of output
// rows under the window state posterior. x_window includes the current input
// as its last entry.
std::vector<double> truncated_term_prob(const ChannelSpec& channel,
                                        int s_oldest,
                                        std::span<const int> x_window_incl_t,
                                        std::span<const int> y_window);

// Precomputed machinery for the stage reward
//   Phi = I(X_{t-v..t}, S_{t-v-1}; Y_t | Y_{t-u..t-1}, alpha)
// of one (channel, context space, v) triple. Methods are const and take
// caller-owned scratch, so one evaluator serves many threads.
class StageEvaluator {
 public:
  StageEvaluator(const ChannelSpec& channel, const ContextSpace& space, int v);

  long a_size() const { return a_size_; }
  long joint_size() const { return joint_size_; }
  int v() const { return v_; }

  void fill_joint(const AlphaVector& alpha, const PolicyRows& rows,
                  std::vector<double>& joint) const;
  double reward(const AlphaVector& alpha, const PolicyRows& rows,
                std::vector<double>& scratch) const;

 private:
  // Accumulates into a caller-zeroed buffer of joint_size() entries.
  void fill_joint_raw(const AlphaVector& alpha, const PolicyRows& rows,
                      double* joint) const;
  const ChannelSpec* channel_;
  const ContextSpace* space_;
  int v_, u_, num_inputs_, num_outputs_, num_states_;
  long a_size_, y_pow_, y_tail_pow_, joint_size_;
  std::vector<long> a_index_;        // [ctx * |X| + x] -> a
  std::vector<double> tail_;         // [((ctx*|X|+x)*|S|+s_bnd) * |Y|^u + ysuf]
  struct Boundary {
    int s_bnd, y_first;
    double w;  // W[x_{t-u}][s_last][y_first] * P[s_last][s_bnd]
  };
  std::vector<std::vector<Boundary>> boundary_;  // [ctx * |X| + x]
};

WindowJoint window_joint(const ChannelSpec& channel, const ContextSpace& space,
                         const AlphaVector& alpha, const PolicyRows& rows,
                         int u, int v);

double stage_reward(const ChannelSpec& channel, const ContextSpace& space,
                    const AlphaVector& alpha, const PolicyRows& rows, int u,
                    int v);

}  // namespace fscbound
