#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fscbound/common.hpp"

namespace fscbound {

// Hard admissibility mask over (input history window, candidate input).
// memory == 0 means unconstrained.
struct InputConstraint {
  int memory = 0;
  std::string name = "none";
  // history has length `memory`, most recent input last.
  std::function<bool(std::span<const int>, int)> allowed_fn;

  bool allowed(std::span<const int> history, int next) const {
    if (memory == 0) return true;
    return allowed_fn(history, next);
  }
};

InputConstraint no_constraint();
InputConstraint rll_1_inf();
// Registry lookup by name ("none", "rll_1_inf").
InputConstraint constraint_by_name(const std::string& name);

// Non-controllable finite-state channel:
//   Pr(y_t, s_t | x_t, s_{t-1}) = W[x][s_prev][y] * P[s_prev][s].
// Immutable after construction; safe to share across threads.
class ChannelSpec {
 public:
  ChannelSpec(int num_states, int num_inputs, int num_outputs,
              std::vector<double> state_transition,  // row-major [s_prev][s]
              std::vector<double> output_kernel,     // row-major [x][s_prev][y]
              InputConstraint constraint);

  int num_states() const { return num_states_; }
  int num_inputs() const { return num_inputs_; }
  int num_outputs() const { return num_outputs_; }
  const InputConstraint& constraint() const { return constraint_; }

  double p_state(int s_prev, int s) const {
    return P_[static_cast<std::size_t>(s_prev) * num_states_ + s];
  }
  double p_output(int x, int s_prev, int y) const {
    return W_[(static_cast<std::size_t>(x) * num_states_ + s_prev) * num_outputs_ + y];
  }
  // Pr(y, s | x, s_prev) as the product of the two kernels.
  double joint(int x, int s_prev, int y, int s) const {
    return p_output(x, s_prev, y) * p_state(s_prev, s);
  }

  // Unique stationary distribution of the state chain.
  const std::vector<double>& stationary_state_dist() const { return stationary_; }

  // Samples (y, s) given (s_prev, x).
  std::pair<int, int> step(int s_prev, int x, Rng& rng) const;

  // Hash of the canonical decimal serialization of both matrices plus the
  // constraint name; embedded in policy files to catch mismatched channels.
  const std::string& digest() const { return digest_; }

 private:
  int num_states_, num_inputs_, num_outputs_;
  std::vector<double> P_;
  std::vector<double> W_;
  InputConstraint constraint_;
  std::vector<double> stationary_;
  std::string digest_;
};

ChannelSpec new_fsc(int num_states, int num_inputs, int num_outputs,
                    std::vector<double> state_transition,
                    std::vector<double> output_kernel,
                    InputConstraint constraint);

// Two-state Gilbert-Elliott channel; state 0 = "good" (BSC eps_g),
// state 1 = "bad" (BSC eps_b). Unconstrained unless a constraint is given.
ChannelSpec gilbert_elliott(double p_b_given_g, double p_g_given_b,
                            double eps_g, double eps_b,
                            InputConstraint constraint = no_constraint());

// Pr(y, s | x, s_prev) as a flat [y][s] table.
std::vector<double> joint_kernel(const ChannelSpec& channel, int x, int s_prev);

// Loads a channel definition from the flat key=value text format.
ChannelSpec load_channel_file(const std::string& path);
ChannelSpec parse_channel_text(const std::string& text);

}  // namespace fscbound
