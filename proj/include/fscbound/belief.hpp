#pragma once

#include "fscbound/context.hpp"

namespace fscbound {

// A-posteriori belief over contexts; point on the M-simplex. Entries at
// inadmissible contexts are exactly 0.
using AlphaVector = std::vector<double>;

// One conditional input distribution per context, all evaluated at a fixed
// belief: p[ctx * |X| + x] = Pr(x_t = x | context ctx). Constraint-forbidden
// inputs carry probability exactly 0.
struct PolicyRows {
  std::vector<double> p;

  double prob(long ctx, int x, int num_inputs) const {
    return p[static_cast<std::size_t>(ctx) * num_inputs + x];
  }
};

// Uniform policy over the admissible inputs of each context.
PolicyRows uniform_policy(const ContextSpace& space);

// Precomputed BCJR forward-step structure for one (channel, space) pair.
// The per-step weight of moving from context l to its shifted successor
// while emitting disturbance y is alpha(l) * Pr(x|l) * W * P.
class BeliefTransition {
 public:
  BeliefTransition(const ChannelSpec& channel, const ContextSpace& space);

  const ContextSpace& space() const { return *space_; }
  int num_outputs() const { return num_outputs_; }

  // Joint table T[l' * |Y| + y]; total mass 1.
  void weights(const AlphaVector& alpha, const PolicyRows& rows,
               std::vector<double>& T) const;

  // One filter update given the observed disturbance; renormalized.
  AlphaVector update(const AlphaVector& alpha, const PolicyRows& rows,
                     int y_observed) const;

  // One step without an observation (the disturbance is marginalized out);
  // used for the first u steps, before any disturbance has been revealed.
  AlphaVector predict(const AlphaVector& alpha, const PolicyRows& rows) const;

  // Pr(y) marginal of the joint table.
  std::vector<double> disturbance(const AlphaVector& alpha,
                                  const PolicyRows& rows) const;

 private:
  struct Arc {
    long succ;
    int y;
    double w;
  };
  const ContextSpace* space_;
  int num_inputs_, num_outputs_;
  std::vector<std::vector<Arc>> arcs_;  // indexed by ctx * |X| + x
};

// Stationary-chain initial belief: uniform over admissible input windows
// times the stationary state-window law.
AlphaVector alpha_init(const ChannelSpec& channel, const ContextSpace& space);

// Convenience wrappers matching the one-shot call style.
std::vector<double> transition_weights(const ChannelSpec& channel,
                                       const ContextSpace& space,
                                       const AlphaVector& alpha,
                                       const PolicyRows& rows);
AlphaVector alpha_update(const ChannelSpec& channel, const ContextSpace& space,
                         const AlphaVector& alpha, const PolicyRows& rows,
                         int y_observed);
std::vector<double> disturbance_dist(const ChannelSpec& channel,
                                     const ContextSpace& space,
                                     const AlphaVector& alpha,
                                     const PolicyRows& rows);

}  // namespace fscbound
