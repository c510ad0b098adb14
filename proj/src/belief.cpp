#include "fscbound/belief.hpp"

namespace fscbound {

PolicyRows uniform_policy(const ContextSpace& space) {
  PolicyRows rows;
  rows.p.assign(static_cast<std::size_t>(space.size()) * space.num_inputs(), 0.0);
  for (long ctx = 0; ctx < space.size(); ++ctx) {
    const auto& allowed = space.allowed_inputs(ctx);
    for (int x : allowed)
      rows.p[static_cast<std::size_t>(ctx) * space.num_inputs() + x] =
          1.0 / allowed.size();
  }
  return rows;
}

BeliefTransition::BeliefTransition(const ChannelSpec& channel,
                                   const ContextSpace& space)
    : space_(&space),
      num_inputs_(channel.num_inputs()),
      num_outputs_(channel.num_outputs()) {
  const int m = space.input_window_len();
  const int u = space.delay();
  arcs_.resize(static_cast<std::size_t>(space.size()) * num_inputs_);
  std::vector<int> xw, sw;
  for (long ctx = 0; ctx < space.size(); ++ctx) {
    space.decode(ctx, xw, sw);
    const int s_last = sw.back();  // s_{t-u-1}
    for (int x = 0; x < num_inputs_; ++x) {
      // Input applied at the delay boundary: x_{t-u} is the new input when
      // u = 0, otherwise it sits at position m-u of the stored window.
      const int x_delay = (u == 0) ? x : xw[m - u];
      auto& arcs = arcs_[static_cast<std::size_t>(ctx) * num_inputs_ + x];
      for (int s_new = 0; s_new < channel.num_states(); ++s_new) {
        const double ps = channel.p_state(s_last, s_new);
        if (ps == 0.0) continue;
        const long succ = space.shift(ctx, x, s_new);
        for (int y = 0; y < num_outputs_; ++y) {
          const double w = channel.p_output(x_delay, s_last, y) * ps;
          if (w > 0.0) arcs.push_back({succ, y, w});
        }
      }
    }
  }
}

void BeliefTransition::weights(const AlphaVector& alpha, const PolicyRows& rows,
                               std::vector<double>& T) const {
  T.assign(static_cast<std::size_t>(space_->size()) * num_outputs_, 0.0);
  for (long ctx = 0; ctx < space_->size(); ++ctx) {
    const double a = alpha[ctx];
    if (a == 0.0) continue;
    for (int x = 0; x < num_inputs_; ++x) {
      const double ap = a * rows.prob(ctx, x, num_inputs_);
      if (ap == 0.0) continue;
      for (const Arc& arc : arcs_[static_cast<std::size_t>(ctx) * num_inputs_ + x])
        T[static_cast<std::size_t>(arc.succ) * num_outputs_ + arc.y] += ap * arc.w;
    }
  }
}

AlphaVector BeliefTransition::update(const AlphaVector& alpha,
                                     const PolicyRows& rows,
                                     int y_observed) const {
  if (y_observed < 0 || y_observed >= num_outputs_)
    throw IndexOutOfRange("alpha_update observation");
  std::vector<double> T;
  weights(alpha, rows, T);
  AlphaVector next(space_->size(), 0.0);
  double total = 0.0;
  for (long l = 0; l < space_->size(); ++l) {
    next[l] = T[static_cast<std::size_t>(l) * num_outputs_ + y_observed];
    total += next[l];
  }
  if (total < 1e-300)
    throw ImpossibleObservation("observed output has zero model probability");
  for (double& v : next) v /= total;
  return next;
}

AlphaVector BeliefTransition::predict(const AlphaVector& alpha,
                                      const PolicyRows& rows) const {
  std::vector<double> T;
  weights(alpha, rows, T);
  AlphaVector next(space_->size(), 0.0);
  double total = 0.0;
  for (long l = 0; l < space_->size(); ++l) {
    double p = 0.0;
    for (int y = 0; y < num_outputs_; ++y)
      p += T[static_cast<std::size_t>(l) * num_outputs_ + y];
    next[l] = p;
    total += p;
  }
  for (double& v : next) v /= total;
  return next;
}

std::vector<double> BeliefTransition::disturbance(const AlphaVector& alpha,
                                                  const PolicyRows& rows) const {
  std::vector<double> T;
  weights(alpha, rows, T);
  std::vector<double> py(num_outputs_, 0.0);
  for (long l = 0; l < space_->size(); ++l)
    for (int y = 0; y < num_outputs_; ++y)
      py[y] += T[static_cast<std::size_t>(l) * num_outputs_ + y];
  return py;
}

AlphaVector alpha_init(const ChannelSpec& channel, const ContextSpace& space) {
  AlphaVector alpha(space.size(), 0.0);
  // Count admissible input windows (state part plays no role in admissibility).
  std::vector<int> xw, sw;
  long adm_x_windows = 0;
  {
    long x_count = 1;
    for (int i = 0; i < space.input_window_len(); ++i)
      x_count *= space.num_inputs();
    long s_count = space.size() / x_count;
    for (long xc = 0; xc < x_count; ++xc)
      if (space.admissible(xc * s_count)) ++adm_x_windows;
  }
  const auto& pi = channel.stationary_state_dist();
  double total = 0.0;
  for (long ctx = 0; ctx < space.size(); ++ctx) {
    if (!space.admissible(ctx)) continue;
    space.decode(ctx, xw, sw);
    double p = 1.0 / adm_x_windows;
    p *= pi[sw[0]];
    for (std::size_t i = 1; i < sw.size(); ++i)
      p *= channel.p_state(sw[i - 1], sw[i]);
    alpha[ctx] = p;
    total += p;
  }
  for (double& v : alpha) v /= total;
  return alpha;
}

std::vector<double> transition_weights(const ChannelSpec& channel,
                                       const ContextSpace& space,
                                       const AlphaVector& alpha,
                                       const PolicyRows& rows) {
  std::vector<double> T;
  BeliefTransition(channel, space).weights(alpha, rows, T);
  return T;
}

AlphaVector alpha_update(const ChannelSpec& channel, const ContextSpace& space,
                         const AlphaVector& alpha, const PolicyRows& rows,
                         int y_observed) {
  return BeliefTransition(channel, space).update(alpha, rows, y_observed);
}

std::vector<double> disturbance_dist(const ChannelSpec& channel,
                                     const ContextSpace& space,
                                     const AlphaVector& alpha,
                                     const PolicyRows& rows) {
  return BeliefTransition(channel, space).disturbance(alpha, rows);
}

}  // namespace fscbound
