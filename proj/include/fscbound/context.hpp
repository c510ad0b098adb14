#pragma once

#include <vector>

#include "fscbound/channel.hpp"

namespace fscbound {

// Flat indexing of composite contexts (input window of length m, state
// window of length w = m - u + 1). At time t the context is
// (x_{t-m+1..t}, s_{t-m..t-u}). Ordering is frozen: input-window-major then
// state-window, most recent symbol least significant within each window.
class ContextSpace {
 public:
  ContextSpace(const ChannelSpec& channel, int m, int u);

  int num_inputs() const { return num_inputs_; }
  int num_states() const { return num_states_; }
  int input_window_len() const { return m_; }
  int state_window_len() const { return w_; }
  int delay() const { return u_; }
  long size() const { return M_; }
  long admissible_count() const { return num_admissible_; }

  long encode(std::span<const int> x_window, std::span<const int> s_window) const;
  void decode(long index, std::vector<int>& x_window,
              std::vector<int>& s_window) const;

  // Advances both windows by one step: drops the oldest symbols and appends
  // (new_x, new_s). Connects the context at t-1 to the context at t.
  long shift(long index, int new_x, int new_s) const;

  // False when the input window violates the channel's input constraint;
  // such contexts never carry belief mass but keep their slot so that M and
  // the quantizer stay fixed.
  bool admissible(long index) const { return admissible_[index] != 0; }

  // Inputs the constraint admits after this context's input window.
  const std::vector<int>& allowed_inputs(long index) const {
    return allowed_inputs_[index];
  }
  // Position of this index in the admissible-only enumeration, or -1.
  long admissible_rank(long index) const { return admissible_rank_[index]; }
  // Inverse of admissible_rank.
  long admissible_index(long rank) const { return admissible_index_[rank]; }

 private:
  int num_inputs_, num_states_, m_, u_, w_;
  long M_;
  long num_admissible_;
  std::vector<char> admissible_;
  std::vector<std::vector<int>> allowed_inputs_;
  std::vector<long> admissible_rank_;
  std::vector<long> admissible_index_;
  const ChannelSpec* channel_;
};

}  // namespace fscbound
