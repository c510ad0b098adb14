#pragma once

#include "fscbound/info.hpp"

namespace fscbound {

// Uniform delta-grid on the belief simplex restricted to admissible
// coordinates: every point is a vector of nonnegative integer counts (units
// of delta) over the admissible contexts, summing to 1/delta. Points are
// enumerated in lexicographic order of the count vector and indexed by
// combinatorial rank, so no lookup table is needed.
class SimplexGrid {
 public:
  SimplexGrid(const ContextSpace& space, double delta, long budget = 10000000);

  const ContextSpace& space() const { return *space_; }
  double delta() const { return delta_; }
  int resolution() const { return resolution_; }  // 1/delta
  long num_points() const { return num_points_; }
  int dims() const { return dims_; }  // number of admissible contexts

  // Counts over admissible coordinates, admissible-rank order.
  void counts_of(long point, std::vector<int>& counts) const;
  long index_of(std::span<const int> counts) const;

  // Full belief vector (length M, zeros at inadmissible contexts).
  AlphaVector alpha_of(long point) const;

 private:
  const ContextSpace* space_;
  double delta_;
  int resolution_, dims_;
  long num_points_;
  // ncomp_[n * (dims+1) + k] = #compositions of n into k parts.
  std::vector<long> ncomp_;
  long ncomp(int n, int k) const { return ncomp_[static_cast<long>(n) * (dims_ + 1) + k]; }
};

// Nearest grid point: per-coordinate rounding to multiples of delta with
// halves rounded down, then a largest-remainder correction so the counts sum
// to 1/delta (remainder ties broken toward the lowest coordinate index).
std::vector<int> quantize_counts(std::span<const double> values, int resolution);
AlphaVector quantize(const AlphaVector& alpha, const ContextSpace& space,
                     double delta);
long quantize_to_index(const AlphaVector& alpha, const SimplexGrid& grid);

// All candidate policies: Cartesian product over free contexts (admissible,
// more than one allowed input) of the eta-step distributions over allowed
// inputs. Forced contexts get their single input; inadmissible contexts get
// a uniform row over allowed inputs (never reachable). Order is frozen:
// lower context index varies slower, per-context distributions in
// lexicographic count order.
std::vector<PolicyRows> enumerate_policies(const ContextSpace& space,
                                           double eta,
                                           long budget = 1000000);

struct ValueFunction {
  int sweeps = 0;               // number of backups applied
  std::vector<double> values;   // [grid point]
};

struct PolicyTable {
  std::string channel_digest;
  int u = 0, v = 0, m = 0;
  double delta = 0.0, eta = 0.0;
  int n_iter = 0;
  std::vector<PolicyRows> rows;  // [grid point]
};

struct DpOptions {
  int num_threads = 1;
  long grid_budget = 10000000;
  long policy_budget = 1000000;
  // Max bytes for the per-(point, candidate) stage cache; recompute per
  // sweep when the cache would not fit.
  std::size_t cache_budget = 1500000000;
};

struct DpResult {
  ValueFunction value;            // J_n
  std::vector<double> prev_values;  // J_{n-1}
  PolicyTable policy;
  double sigma = 0.0;  // midpoint of [min, max] of J_n - J_{n-1}
  double span = 0.0;   // max - min of the same differences
  long num_grid_points = 0;
  long num_candidates = 0;
};

// One Bellman backup at a single grid point: returns the best value and the
// index of the best candidate (ties to the lowest index).
std::pair<double, long> bellman_backup(const ChannelSpec& channel,
                                       const ContextSpace& space,
                                       const SimplexGrid& grid,
                                       const std::vector<double>& j_prev,
                                       long point,
                                       const std::vector<PolicyRows>& candidates,
                                       int v);

// Value of a fixed per-point policy under one backup from j_prev; used to
// check stationarity of an extracted policy.
std::vector<double> policy_backup(const ChannelSpec& channel,
                                  const ContextSpace& space,
                                  const SimplexGrid& grid,
                                  const std::vector<double>& j_prev,
                                  const PolicyTable& table,
                                  int num_threads = 1);

// Quantized value iteration from J_0 = 0 for n sweeps; extracts the final
// greedy policy and the convergence statistics.
DpResult value_iteration(const ChannelSpec& channel, int u, int v, int m,
                         double delta, double eta, int n,
                         const DpOptions& options = {});

void save_policy(const std::string& path, const ChannelSpec& channel,
                 const PolicyTable& table);
PolicyTable load_policy(const std::string& path, const ChannelSpec& channel);

}  // namespace fscbound
