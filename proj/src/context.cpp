#include "fscbound/context.hpp"

namespace fscbound {

ContextSpace::ContextSpace(const ChannelSpec& channel, int m, int u)
    : num_inputs_(channel.num_inputs()),
      num_states_(channel.num_states()),
      m_(m),
      u_(u),
      w_(m - u + 1),
      channel_(&channel) {
  if (m < 0 || u < 0 || u > m)
    throw ParameterOutOfRange("need 0 <= u <= m");
  if (channel.constraint().memory > m_)
    throw ParameterOutOfRange("input window shorter than constraint memory");

  long x_count = 1;
  for (int i = 0; i < m_; ++i) x_count *= num_inputs_;
  long s_count = 1;
  for (int i = 0; i < w_; ++i) s_count *= num_states_;
  M_ = x_count * s_count;

  admissible_.assign(M_, 1);
  allowed_inputs_.resize(M_);
  admissible_rank_.assign(M_, -1);

  const int c = channel.constraint().memory;
  std::vector<int> xw(m_), sw(w_);
  for (long idx = 0; idx < M_; ++idx) {
    decode(idx, xw, sw);
    bool ok = true;
    for (int i = c; i < m_ && ok; ++i)
      ok = channel.constraint().allowed(
          std::span<const int>(xw.data() + i - c, static_cast<std::size_t>(c)),
          xw[i]);
    admissible_[idx] = ok ? 1 : 0;
    auto& allowed = allowed_inputs_[idx];
    for (int x = 0; x < num_inputs_; ++x) {
      if (c == 0 ||
          channel.constraint().allowed(
              std::span<const int>(xw.data() + m_ - c, static_cast<std::size_t>(c)), x))
        allowed.push_back(x);
    }
    if (ok) {
      admissible_rank_[idx] = static_cast<long>(admissible_index_.size());
      admissible_index_.push_back(idx);
    }
  }
  num_admissible_ = static_cast<long>(admissible_index_.size());
  if (num_admissible_ == 0) throw DeadEndConstraint("no admissible context");
}

long ContextSpace::encode(std::span<const int> x_window,
                          std::span<const int> s_window) const {
  if (static_cast<int>(x_window.size()) != m_ ||
      static_cast<int>(s_window.size()) != w_)
    throw WindowLengthMismatch("encode");
  long xcode = 0;
  for (int i = 0; i < m_; ++i) {
    if (x_window[i] < 0 || x_window[i] >= num_inputs_)
      throw LetterOutOfRange("encode input letter");
    xcode = xcode * num_inputs_ + x_window[i];
  }
  long scode = 0;
  for (int i = 0; i < w_; ++i) {
    if (s_window[i] < 0 || s_window[i] >= num_states_)
      throw LetterOutOfRange("encode state letter");
    scode = scode * num_states_ + s_window[i];
  }
  long s_count = 1;
  for (int i = 0; i < w_; ++i) s_count *= num_states_;
  return xcode * s_count + scode;
}

void ContextSpace::decode(long index, std::vector<int>& x_window,
                          std::vector<int>& s_window) const {
  if (index < 0 || index >= M_) throw IndexOutOfRange("decode");
  x_window.resize(m_);
  s_window.resize(w_);
  long s_count = 1;
  for (int i = 0; i < w_; ++i) s_count *= num_states_;
  long xcode = index / s_count;
  long scode = index % s_count;
  for (int i = w_ - 1; i >= 0; --i) {
    s_window[i] = static_cast<int>(scode % num_states_);
    scode /= num_states_;
  }
  for (int i = m_ - 1; i >= 0; --i) {
    x_window[i] = static_cast<int>(xcode % num_inputs_);
    xcode /= num_inputs_;
  }
}

long ContextSpace::shift(long index, int new_x, int new_s) const {
  if (index < 0 || index >= M_) throw IndexOutOfRange("shift");
  if (new_x < 0 || new_x >= num_inputs_ || new_s < 0 || new_s >= num_states_)
    throw LetterOutOfRange("shift");
  long s_count = 1;
  for (int i = 0; i < w_; ++i) s_count *= num_states_;
  long xcode = index / s_count;
  long scode = index % s_count;
  long x_count = 1;
  for (int i = 0; i < m_; ++i) x_count *= num_inputs_;
  if (m_ > 0) xcode = (xcode * num_inputs_ + new_x) % x_count;
  scode = (scode * num_states_ + new_s) % s_count;
  return xcode * s_count + scode;
}

}  // namespace fscbound
