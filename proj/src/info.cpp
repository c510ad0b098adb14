#include "fscbound/info.hpp"

namespace fscbound {

double tail_output_prob(const ChannelSpec& channel,
                        std::span<const int> x_window, int s_boundary,
                        std::span<const int> y_window) {
  if (x_window.size() != y_window.size())
    throw WindowLengthMismatch("tail_output_prob");
  if (s_boundary < 0 || s_boundary >= channel.num_states())
    throw LetterOutOfRange("tail_output_prob state");
  const int S = channel.num_states();
  std::vector<double> f(S, 0.0), g(S);
  f[s_boundary] = 1.0;
  for (std::size_t i = 0; i < x_window.size(); ++i) {
    const int x = x_window[i], y = y_window[i];
    if (x < 0 || x >= channel.num_inputs() || y < 0 || y >= channel.num_outputs())
      throw LetterOutOfRange("tail_output_prob letter");
    std::fill(g.begin(), g.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      if (f[s] == 0.0) continue;
      const double e = f[s] * channel.p_output(x, s, y);
      if (e == 0.0) continue;
      for (int s2 = 0; s2 < S; ++s2) g[s2] += e * channel.p_state(s, s2);
    }
    f.swap(g);
  }
  double total = 0.0;
  for (double p : f) total += p;
  return total;
}

std::vector<double> window_state_posterior(const ChannelSpec& channel,
                                           int s_oldest,
                                           std::span<const int> x_window,
                                           std::span<const int> y_window) {
  if (x_window.size() != y_window.size())
    throw WindowLengthMismatch("window_state_posterior");
  if (s_oldest < 0 || s_oldest >= channel.num_states())
    throw LetterOutOfRange("window_state_posterior state");
  const int S = channel.num_states();
  std::vector<double> f(S, 0.0), g(S);
  f[s_oldest] = 1.0;
  for (std::size_t i = 0; i < x_window.size(); ++i) {
    const int x = x_window[i], y = y_window[i];
    if (x < 0 || x >= channel.num_inputs() || y < -1 || y >= channel.num_outputs())
      throw LetterOutOfRange("window_state_posterior letter");
    std::fill(g.begin(), g.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      if (f[s] == 0.0) continue;
      const double e = f[s] * (y < 0 ? 1.0 : channel.p_output(x, s, y));
      if (e == 0.0) continue;
      for (int s2 = 0; s2 < S; ++s2) g[s2] += e * channel.p_state(s, s2);
    }
    f.swap(g);
  }
  double total = 0.0;
  for (double p : f) total += p;
  if (total < 1e-300)
    throw ImpossibleObservation("window has zero probability");
  for (double& p : f) p /= total;
  return f;
}

std::vector<double> truncated_term_prob(const ChannelSpec& channel,
                                        int s_oldest,
                                        std::span<const int> x_window_incl_t,
                                        std::span<const int> y_window) {
  if (x_window_incl_t.size() != y_window.size() + 1)
    throw WindowLengthMismatch("truncated_term_prob");
  auto post = window_state_posterior(
      channel, s_oldest, x_window_incl_t.first(y_window.size()), y_window);
  const int x_t = x_window_incl_t.back();
  if (x_t < 0 || x_t >= channel.num_inputs())
    throw LetterOutOfRange("truncated_term_prob input");
  std::vector<double> py(channel.num_outputs(), 0.0);
  for (int s = 0; s < channel.num_states(); ++s)
    for (int y = 0; y < channel.num_outputs(); ++y)
      py[y] += post[s] * channel.p_output(x_t, s, y);
  return py;
}

StageEvaluator::StageEvaluator(const ChannelSpec& channel,
                               const ContextSpace& space, int v)
    : channel_(&channel),
      space_(&space),
      v_(v),
      u_(space.delay()),
      num_inputs_(channel.num_inputs()),
      num_outputs_(channel.num_outputs()),
      num_states_(channel.num_states()) {
  const int m = space.input_window_len();
  if (v_ < u_ || v_ > m) throw ParameterOutOfRange("need u <= v <= m");

  long x_pow = 1;
  for (int i = 0; i <= v_; ++i) x_pow *= num_inputs_;
  a_size_ = x_pow * num_states_;
  y_pow_ = 1;
  for (int i = 0; i <= u_; ++i) y_pow_ *= num_outputs_;
  y_tail_pow_ = y_pow_ / num_outputs_;  // |Y|^u
  joint_size_ = a_size_ * num_states_ * y_pow_;

  const std::size_t pairs = static_cast<std::size_t>(space.size()) * num_inputs_;
  a_index_.assign(pairs, 0);
  boundary_.resize(pairs);
  tail_.assign(pairs * num_states_ * y_tail_pow_, 0.0);

  std::vector<int> xw, sw, xt(u_), yt(u_);
  for (long ctx = 0; ctx < space.size(); ++ctx) {
    space.decode(ctx, xw, sw);
    const int s_last = sw.back();      // s_{t-u-1}
    const int s_oldest = sw[m - v_];   // s_{t-v-1}
    for (int x = 0; x < num_inputs_; ++x) {
      const std::size_t pair = static_cast<std::size_t>(ctx) * num_inputs_ + x;
      // A index: x_{t-v..t} with x_t least significant, then s_{t-v-1}.
      long xcode = 0;
      for (int i = m - v_; i < m; ++i) xcode = xcode * num_inputs_ + xw[i];
      xcode = xcode * num_inputs_ + x;
      a_index_[pair] = xcode * num_states_ + s_oldest;

      const int x_delay = (u_ == 0) ? x : xw[m - u_];
      auto& bnd = boundary_[pair];
      for (int s_bnd = 0; s_bnd < num_states_; ++s_bnd) {
        for (int y = 0; y < num_outputs_; ++y) {
          const double w = channel.p_output(x_delay, s_last, y) *
                           channel.p_state(s_last, s_bnd);
          if (w > 0.0) bnd.push_back({s_bnd, y, w});
        }
        // Pr(y_{t-u+1..t} | x_{t-u+1..t}, s_{t-u} = s_bnd) for every suffix.
        for (int i = 0; i < u_ - 1; ++i) xt[i] = xw[m - u_ + 1 + i];
        if (u_ > 0) xt[u_ - 1] = x;
        double* out =
            tail_.data() + (pair * num_states_ + s_bnd) * y_tail_pow_;
        for (long ysuf = 0; ysuf < y_tail_pow_; ++ysuf) {
          long rem = ysuf;
          for (int i = u_ - 1; i >= 0; --i) {
            yt[i] = static_cast<int>(rem % num_outputs_);
            rem /= num_outputs_;
          }
          out[ysuf] = tail_output_prob(channel, xt, s_bnd, yt);
        }
      }
    }
  }
}

void StageEvaluator::fill_joint(const AlphaVector& alpha,
                                const PolicyRows& rows,
                                std::vector<double>& joint) const {
  joint.assign(joint_size_, 0.0);
  fill_joint_raw(alpha, rows, joint.data());
}

void StageEvaluator::fill_joint_raw(const AlphaVector& alpha,
                                    const PolicyRows& rows,
                                    double* joint) const {
  for (long ctx = 0; ctx < space_->size(); ++ctx) {
    const double a = alpha[ctx];
    if (a == 0.0) continue;
    for (int x = 0; x < num_inputs_; ++x) {
      const double ap = a * rows.prob(ctx, x, num_inputs_);
      if (ap == 0.0) continue;
      const std::size_t pair = static_cast<std::size_t>(ctx) * num_inputs_ + x;
      const long base =
          (a_index_[pair] * num_states_) * y_pow_;  // + s_bnd * y_pow_
      for (const Boundary& b : boundary_[pair]) {
        const double w = ap * b.w;
        const double* tail =
            tail_.data() + (pair * num_states_ + b.s_bnd) * y_tail_pow_;
        double* out = joint + base +
                      static_cast<long>(b.s_bnd) * y_pow_ +
                      static_cast<long>(b.y_first) * y_tail_pow_;
        for (long ysuf = 0; ysuf < y_tail_pow_; ++ysuf)
          out[ysuf] += w * tail[ysuf];
      }
    }
  }
}

double StageEvaluator::reward(const AlphaVector& alpha, const PolicyRows& rows,
                              std::vector<double>& scratch) const {
  // Scratch layout: [joint | q | pcb]; sized once, reused across calls.
  const long q_size = a_size_ * y_pow_;
  const std::size_t need =
      static_cast<std::size_t>(joint_size_ + q_size + y_pow_);
  if (scratch.size() != need) scratch.resize(need);
  std::fill(scratch.begin(), scratch.end(), 0.0);
  double* joint = scratch.data();
  double* q = joint + joint_size_;
  double* pcb = q + q_size;
  fill_joint_raw(alpha, rows, joint);
  // Marginalize the boundary state: q[a][ycode].
  for (long a = 0; a < a_size_; ++a) {
    const double* src = joint + a * num_states_ * y_pow_;
    double* dst = q + a * y_pow_;
    for (int s = 0; s < num_states_; ++s)
      for (long yc = 0; yc < y_pow_; ++yc) dst[yc] += src[s * y_pow_ + yc];
  }
  // Phi = H(A,C) + H(C,B) - H(A,C,B) - H(C), C = y_{t-u..t-1}, B = y_t.
  double h_acb = 0.0, h_ac = 0.0;
  for (long a = 0; a < a_size_; ++a) {
    const double* row = q + a * y_pow_;
    for (long c = 0; c < y_tail_pow_; ++c) {
      double pac = 0.0;
      for (int b = 0; b < num_outputs_; ++b) {
        const double p = row[c * num_outputs_ + b];
        pac += p;
        pcb[c * num_outputs_ + b] += p;
        h_acb -= xlog2(p);
      }
      h_ac -= xlog2(pac);
    }
  }
  double h_cb = 0.0, h_c = 0.0;
  for (long c = 0; c < y_tail_pow_; ++c) {
    double pc = 0.0;
    for (int b = 0; b < num_outputs_; ++b) {
      pc += pcb[c * num_outputs_ + b];
      h_cb -= xlog2(pcb[c * num_outputs_ + b]);
    }
    h_c -= xlog2(pc);
  }
  const double phi = h_ac + h_cb - h_acb - h_c;
  return phi > 0.0 ? phi : 0.0;
}

WindowJoint window_joint(const ChannelSpec& channel, const ContextSpace& space,
                         const AlphaVector& alpha, const PolicyRows& rows,
                         int u, int v) {
  if (u != space.delay()) throw DelayMismatch("window_joint");
  StageEvaluator eval(channel, space, v);
  WindowJoint wj;
  wj.a_size = eval.a_size();
  wj.num_states = channel.num_states();
  wj.num_outputs = channel.num_outputs();
  wj.u = u;
  eval.fill_joint(alpha, rows, wj.p);
  return wj;
}

double stage_reward(const ChannelSpec& channel, const ContextSpace& space,
                    const AlphaVector& alpha, const PolicyRows& rows, int u,
                    int v) {
  if (u != space.delay()) throw DelayMismatch("stage_reward");
  StageEvaluator eval(channel, space, v);
  std::vector<double> scratch;
  return eval.reward(alpha, rows, scratch);
}

}  // namespace fscbound
