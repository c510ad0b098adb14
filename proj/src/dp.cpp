#include "fscbound/dp.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fscbound {

namespace {

constexpr long kCountSat = 1L << 62;

int checked_resolution(double step, const char* what) {
  if (!(step > 0.0) || step > 1.0) throw ParameterOutOfRange(what);
  const double inv = 1.0 / step;
  const long res = std::lround(inv);
  if (res < 1 || std::fabs(inv - static_cast<double>(res)) > 1e-9)
    throw ParameterOutOfRange(std::string(what) + " must divide 1 evenly");
  return static_cast<int>(res);
}

}  // namespace

SimplexGrid::SimplexGrid(const ContextSpace& space, double delta, long budget)
    : space_(&space), delta_(delta) {
  resolution_ = checked_resolution(delta, "delta");
  dims_ = static_cast<int>(space.admissible_count());
  ncomp_.assign(static_cast<std::size_t>(resolution_ + 1) * (dims_ + 1), 0);
  for (int k = 0; k <= dims_; ++k) ncomp_[k] = 1;  // n = 0 row
  for (int n = 1; n <= resolution_; ++n) {
    ncomp_[static_cast<long>(n) * (dims_ + 1)] = 0;  // k = 0
    for (int k = 1; k <= dims_; ++k) {
      const long a = ncomp(n - 1, k), b = ncomp(n, k - 1);
      ncomp_[static_cast<long>(n) * (dims_ + 1) + k] =
          (a >= kCountSat - b) ? kCountSat : a + b;
    }
  }
  num_points_ = ncomp(resolution_, dims_);
  if (num_points_ > budget)
    throw GridTooLarge("grid would have " + std::to_string(num_points_) +
                       " points, budget " + std::to_string(budget));
}

void SimplexGrid::counts_of(long point, std::vector<int>& counts) const {
  if (point < 0 || point >= num_points_) throw IndexOutOfRange("grid point");
  counts.assign(dims_, 0);
  int rem = resolution_;
  for (int j = 0; j < dims_ - 1; ++j) {
    int c = 0;
    while (true) {
      const long block = ncomp(rem - c, dims_ - j - 1);
      if (point < block) break;
      point -= block;
      ++c;
    }
    counts[j] = c;
    rem -= c;
  }
  if (dims_ > 0) counts[dims_ - 1] = rem;
}

long SimplexGrid::index_of(std::span<const int> counts) const {
  if (static_cast<int>(counts.size()) != dims_)
    throw WindowLengthMismatch("grid counts");
  long rank = 0;
  int rem = resolution_;
  for (int j = 0; j < dims_; ++j) {
    const int c = counts[j];
    if (c < 0 || c > rem) throw ParameterOutOfRange("grid counts");
    for (int t = 0; t < c; ++t) rank += ncomp(rem - t, dims_ - j - 1);
    rem -= c;
  }
  if (rem != 0) throw ParameterOutOfRange("grid counts sum");
  return rank;
}

AlphaVector SimplexGrid::alpha_of(long point) const {
  std::vector<int> counts;
  counts_of(point, counts);
  AlphaVector alpha(space_->size(), 0.0);
  for (int j = 0; j < dims_; ++j)
    alpha[space_->admissible_index(j)] =
        static_cast<double>(counts[j]) / resolution_;
  return alpha;
}

std::vector<int> quantize_counts(std::span<const double> values,
                                 int resolution) {
  const int k = static_cast<int>(values.size());
  std::vector<int> counts(k, 0);
  std::vector<double> frac(k, 0.0);
  long sum = 0;
  for (int j = 0; j < k; ++j) {
    const double r = values[j] * resolution;
    double base = std::floor(r + 1e-12);
    double f = r - base;
    // Exact halves round down.
    if (f > 0.5 + 1e-9) base += 1.0, f -= 1.0;
    counts[j] = static_cast<int>(base);
    frac[j] = f;
    sum += counts[j];
  }
  long diff = resolution - sum;
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  if (diff > 0) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });
    for (int j = 0; diff > 0 && j < k; ++j) {
      ++counts[order[j]];
      --diff;
    }
  } else if (diff < 0) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] < frac[b]; });
    for (int j = 0; diff < 0 && j < k; ++j) {
      if (counts[order[j]] > 0) {
        --counts[order[j]];
        ++diff;
      }
    }
  }
  if (diff != 0) throw ParameterOutOfRange("quantize correction failed");
  return counts;
}

namespace {

std::vector<int> gather_admissible(const AlphaVector& alpha,
                                   const ContextSpace& space, int resolution) {
  std::vector<double> vals(space.admissible_count());
  double off_mass = 0.0;
  for (long ctx = 0; ctx < space.size(); ++ctx) {
    const long r = space.admissible_rank(ctx);
    if (r >= 0)
      vals[r] = alpha[ctx];
    else
      off_mass += std::fabs(alpha[ctx]);
  }
  if (off_mass > 1e-9)
    throw ParameterOutOfRange("belief mass on inadmissible contexts");
  return quantize_counts(vals, resolution);
}

}  // namespace

AlphaVector quantize(const AlphaVector& alpha, const ContextSpace& space,
                     double delta) {
  const int res = checked_resolution(delta, "delta");
  auto counts = gather_admissible(alpha, space, res);
  AlphaVector out(space.size(), 0.0);
  for (long r = 0; r < space.admissible_count(); ++r)
    out[space.admissible_index(r)] = static_cast<double>(counts[r]) / res;
  return out;
}

long quantize_to_index(const AlphaVector& alpha, const SimplexGrid& grid) {
  auto counts = gather_admissible(alpha, grid.space(), grid.resolution());
  return grid.index_of(counts);
}

std::vector<PolicyRows> enumerate_policies(const ContextSpace& space,
                                           double eta, long budget) {
  const int res = checked_resolution(eta, "eta");
  const int X = space.num_inputs();
  const long M = space.size();

  // Per-context distribution lists over the allowed inputs.
  std::vector<std::vector<std::vector<double>>> lists(M);
  for (long ctx = 0; ctx < M; ++ctx) {
    const auto& allowed = space.allowed_inputs(ctx);
    auto& list = lists[ctx];
    if (!space.admissible(ctx) || allowed.size() <= 1) {
      std::vector<double> row(X, 0.0);
      for (int x : allowed) row[x] = 1.0 / allowed.size();
      list.push_back(std::move(row));
      continue;
    }
    // Compositions of 1/eta into |allowed| parts, lexicographic.
    const int parts = static_cast<int>(allowed.size());
    std::vector<int> c(parts, 0);
    c[parts - 1] = res;
    while (true) {
      std::vector<double> row(X, 0.0);
      for (int j = 0; j < parts; ++j)
        row[allowed[j]] = static_cast<double>(c[j]) / res;
      list.push_back(std::move(row));
      // Next composition: increment leftmost-possible position.
      int j = parts - 2;
      while (j >= 0) {
        int tail = 0;
        for (int i = j + 1; i < parts; ++i) tail += c[i];
        if (tail > 0) break;
        --j;
      }
      if (j < 0) break;
      ++c[j];
      int tail = 0;
      for (int i = j + 1; i < parts; ++i) {
        tail += c[i];
        c[i] = 0;
      }
      c[parts - 1] = tail - 1;
    }
  }

  long total = 1;
  for (long ctx = 0; ctx < M; ++ctx) {
    const long n = static_cast<long>(lists[ctx].size());
    if (n > 1 && total > budget / n)
      throw PolicySpaceTooLarge("candidate count exceeds budget " +
                                std::to_string(budget));
    total *= n;
  }
  if (total > budget)
    throw PolicySpaceTooLarge("candidate count exceeds budget " +
                              std::to_string(budget));

  std::vector<PolicyRows> out;
  out.reserve(total);
  std::vector<std::size_t> idx(M, 0);
  while (true) {
    PolicyRows rows;
    rows.p.reserve(static_cast<std::size_t>(M) * X);
    for (long ctx = 0; ctx < M; ++ctx) {
      const auto& row = lists[ctx][idx[ctx]];
      rows.p.insert(rows.p.end(), row.begin(), row.end());
    }
    out.push_back(std::move(rows));
    // Odometer: last context fastest, context 0 slowest.
    long ctx = M - 1;
    while (ctx >= 0) {
      if (++idx[ctx] < lists[ctx].size()) break;
      idx[ctx] = 0;
      --ctx;
    }
    if (ctx < 0) break;
  }
  return out;
}

namespace {

// Per-worker evaluation of one (grid point, candidate) pair.
struct StageWork {
  const ChannelSpec* channel;
  const ContextSpace* space;
  const SimplexGrid* grid;
  const StageEvaluator* eval;
  const BeliefTransition* bt;
  int num_outputs;

  std::vector<double> scratch;   // reward workspace
  std::vector<double> weights;   // T[l * |Y| + y]
  std::vector<double> col;       // successor belief over admissible coords
  std::vector<double> py;
  std::vector<long> succ;

  StageWork(const ChannelSpec& c, const ContextSpace& sp,
            const SimplexGrid& g, const StageEvaluator& ev,
            const BeliefTransition& b)
      : channel(&c),
        space(&sp),
        grid(&g),
        eval(&ev),
        bt(&b),
        num_outputs(c.num_outputs()) {
    col.resize(sp.admissible_count());
    py.resize(num_outputs);
    succ.resize(num_outputs);
  }

  // Fills py / succ (succ = -1 when Pr(y) = 0) and returns the stage reward.
  double evaluate(const AlphaVector& alpha, const PolicyRows& rows) {
    const double phi = eval->reward(alpha, rows, scratch);
    bt->weights(alpha, rows, weights);
    for (int y = 0; y < num_outputs; ++y) {
      double total = 0.0;
      for (long r = 0; r < space->admissible_count(); ++r) {
        const double w =
            weights[static_cast<std::size_t>(space->admissible_index(r)) *
                        num_outputs +
                    y];
        col[r] = w;
        total += w;
      }
      py[y] = total;
      if (total <= 0.0) {
        succ[y] = -1;
        continue;
      }
      for (long r = 0; r < space->admissible_count(); ++r) col[r] /= total;
      succ[y] = grid->index_of(quantize_counts(col, grid->resolution()));
    }
    return phi;
  }
};

}  // namespace

std::pair<double, long> bellman_backup(const ChannelSpec& channel,
                                       const ContextSpace& space,
                                       const SimplexGrid& grid,
                                       const std::vector<double>& j_prev,
                                       long point,
                                       const std::vector<PolicyRows>& candidates,
                                       int v) {
  StageEvaluator eval(channel, space, v);
  BeliefTransition bt(channel, space);
  StageWork work(channel, space, grid, eval, bt);
  const AlphaVector alpha = grid.alpha_of(point);
  double best = -1.0;
  long best_idx = -1;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double value = work.evaluate(alpha, candidates[c]);
    for (int y = 0; y < work.num_outputs; ++y)
      if (work.succ[y] >= 0) value += work.py[y] * j_prev[work.succ[y]];
    if (value > best) {
      best = value;
      best_idx = static_cast<long>(c);
    }
  }
  return {best, best_idx};
}

std::vector<double> policy_backup(const ChannelSpec& channel,
                                  const ContextSpace& space,
                                  const SimplexGrid& grid,
                                  const std::vector<double>& j_prev,
                                  const PolicyTable& table, int num_threads) {
  StageEvaluator eval(channel, space, table.v);
  BeliefTransition bt(channel, space);
  std::vector<double> out(grid.num_points(), 0.0);
  parallel_for(static_cast<std::size_t>(grid.num_points()), num_threads,
               [&](std::size_t point) {
                 StageWork work(channel, space, grid, eval, bt);
                 const AlphaVector alpha = grid.alpha_of(point);
                 double value = work.evaluate(alpha, table.rows[point]);
                 for (int y = 0; y < work.num_outputs; ++y)
                   if (work.succ[y] >= 0)
                     value += work.py[y] * j_prev[work.succ[y]];
                 out[point] = value;
               });
  return out;
}

DpResult value_iteration(const ChannelSpec& channel, int u, int v, int m,
                         double delta, double eta, int n,
                         const DpOptions& options) {
  if (n < 1) throw ParameterOutOfRange("need at least one sweep");
  ContextSpace space(channel, m, u);
  SimplexGrid grid(space, delta, options.grid_budget);
  auto candidates = enumerate_policies(space, eta, options.policy_budget);
  StageEvaluator eval(channel, space, v);
  BeliefTransition bt(channel, space);

  const long G = grid.num_points();
  const long C = static_cast<long>(candidates.size());
  const int Y = channel.num_outputs();
  const std::size_t combos = static_cast<std::size_t>(G) * C;
  const std::size_t cache_bytes =
      combos * (sizeof(float) + static_cast<std::size_t>(Y) *
                                    (sizeof(float) + sizeof(std::uint32_t)));
  const bool use_cache = cache_bytes <= options.cache_budget;

  std::vector<float> phi_cache;
  std::vector<float> py_cache;
  std::vector<std::uint32_t> succ_cache;
  constexpr std::uint32_t kNoSucc = 0xffffffffu;
  if (use_cache) {
    phi_cache.resize(combos);
    py_cache.resize(combos * Y);
    succ_cache.resize(combos * Y);
    parallel_for(static_cast<std::size_t>(G), options.num_threads,
                 [&](std::size_t point) {
                   StageWork work(channel, space, grid, eval, bt);
                   const AlphaVector alpha = grid.alpha_of(point);
                   for (long c = 0; c < C; ++c) {
                     const std::size_t k = point * C + c;
                     phi_cache[k] =
                         static_cast<float>(work.evaluate(alpha, candidates[c]));
                     for (int y = 0; y < Y; ++y) {
                       py_cache[k * Y + y] = static_cast<float>(work.py[y]);
                       succ_cache[k * Y + y] =
                           work.succ[y] < 0
                               ? kNoSucc
                               : static_cast<std::uint32_t>(work.succ[y]);
                     }
                   }
                 });
  }

  std::vector<double> j_prev(G, 0.0), j_cur(G, 0.0);
  std::vector<long> best_idx(G, 0);
  for (int sweep = 1; sweep <= n; ++sweep) {
    j_prev.swap(j_cur);
    parallel_for(static_cast<std::size_t>(G), options.num_threads,
                 [&](std::size_t point) {
                   double best = -1.0;
                   long best_c = -1;
                   if (use_cache) {
                     for (long c = 0; c < C; ++c) {
                       const std::size_t k = point * C + c;
                       double value = phi_cache[k];
                       for (int y = 0; y < Y; ++y) {
                         const std::uint32_t s = succ_cache[k * Y + y];
                         if (s != kNoSucc)
                           value += static_cast<double>(py_cache[k * Y + y]) *
                                    j_prev[s];
                       }
                       if (value > best) {
                         best = value;
                         best_c = c;
                       }
                     }
                   } else {
                     StageWork work(channel, space, grid, eval, bt);
                     const AlphaVector alpha = grid.alpha_of(point);
                     for (long c = 0; c < C; ++c) {
                       double value = work.evaluate(alpha, candidates[c]);
                       for (int y = 0; y < Y; ++y)
                         if (work.succ[y] >= 0)
                           value += work.py[y] * j_prev[work.succ[y]];
                       if (value > best) {
                         best = value;
                         best_c = c;
                       }
                     }
                   }
                   j_cur[point] = best;
                   best_idx[point] = best_c;
                 });
  }

  DpResult result;
  result.num_grid_points = G;
  result.num_candidates = C;
  double lo = j_cur[0] - j_prev[0], hi = lo;
  for (long g = 1; g < G; ++g) {
    const double d = j_cur[g] - j_prev[g];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  result.sigma = 0.5 * (lo + hi);
  result.span = hi - lo;
  result.value.sweeps = n;
  result.value.values = j_cur;
  result.prev_values = j_prev;
  result.policy.channel_digest = channel.digest();
  result.policy.u = u;
  result.policy.v = v;
  result.policy.m = m;
  result.policy.delta = delta;
  result.policy.eta = eta;
  result.policy.n_iter = n;
  result.policy.rows.reserve(G);
  for (long g = 0; g < G; ++g)
    result.policy.rows.push_back(candidates[best_idx[g]]);
  return result;
}

void save_policy(const std::string& path, const ChannelSpec& channel,
                 const PolicyTable& table) {
  ContextSpace space(channel, table.m, table.u);
  SimplexGrid grid(space, table.delta);
  if (static_cast<long>(table.rows.size()) != grid.num_points())
    throw ParameterOutOfRange("policy table size does not match grid");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  char buf[64];
  auto dec = [&buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  out << "fscbound-policy-v1\n";
  out << "channel_digest=" << table.channel_digest << "\n";
  out << "u=" << table.u << "\nv=" << table.v << "\nm=" << table.m << "\n";
  out << "delta=" << dec(table.delta) << "\neta=" << dec(table.eta) << "\n";
  out << "n_iter=" << table.n_iter << "\n";
  out << "contexts=" << space.size() << "\n";
  out << "admissible=" << space.admissible_count() << "\n";
  out << "num_inputs=" << space.num_inputs() << "\n";
  out << "points=" << grid.num_points() << "\n";
  out << "[points]\n";
  std::vector<int> counts;
  const int X = space.num_inputs();
  for (long g = 0; g < grid.num_points(); ++g) {
    grid.counts_of(g, counts);
    for (int j = 0; j < grid.dims(); ++j) {
      if (j) out << ' ';
      out << counts[j];
    }
    out << " :";
    for (long r = 0; r < space.admissible_count(); ++r) {
      const long ctx = space.admissible_index(r);
      if (r) out << " |";
      for (int x = 0; x < X; ++x)
        out << ' ' << dec(table.rows[g].prob(ctx, x, X));
    }
    out << "\n";
  }
  if (!out) throw Error("write failed for " + path);
}

PolicyTable load_policy(const std::string& path, const ChannelSpec& channel) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "fscbound-policy-v1")
    throw Error("not a policy file: " + path);
  PolicyTable table;
  long contexts = -1, admissible = -1, points = -1;
  int num_inputs = -1;
  while (std::getline(in, line)) {
    if (line == "[points]") break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("bad policy header line: " + line);
    const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "channel_digest") table.channel_digest = val;
    else if (key == "u") table.u = std::stoi(val);
    else if (key == "v") table.v = std::stoi(val);
    else if (key == "m") table.m = std::stoi(val);
    else if (key == "delta") table.delta = std::stod(val);
    else if (key == "eta") table.eta = std::stod(val);
    else if (key == "n_iter") table.n_iter = std::stoi(val);
    else if (key == "contexts") contexts = std::stol(val);
    else if (key == "admissible") admissible = std::stol(val);
    else if (key == "num_inputs") num_inputs = std::stoi(val);
    else if (key == "points") points = std::stol(val);
    else throw Error("unknown policy header key: " + key);
  }
  if (table.channel_digest != channel.digest())
    throw DigestMismatch("policy was optimized for a different channel");
  ContextSpace space(channel, table.m, table.u);
  SimplexGrid grid(space, table.delta);
  if (contexts != space.size() || admissible != space.admissible_count() ||
      num_inputs != space.num_inputs() || points != grid.num_points())
    throw Error("policy header inconsistent with channel geometry");
  const int X = space.num_inputs();
  table.rows.resize(points);
  std::vector<int> counts(grid.dims());
  for (long g = 0; g < points; ++g) {
    if (!std::getline(in, line)) throw Error("truncated policy file");
    std::istringstream ss(line);
    for (int j = 0; j < grid.dims(); ++j)
      if (!(ss >> counts[j])) throw Error("bad grid coordinates");
    if (grid.index_of(counts) != g)
      throw Error("policy records out of order");
    std::string sep;
    PolicyRows rows;
    rows.p.assign(static_cast<std::size_t>(space.size()) * X, 0.0);
    // Unlisted (inadmissible) contexts keep a uniform row over allowed inputs.
    for (long ctx = 0; ctx < space.size(); ++ctx) {
      if (space.admissible(ctx)) continue;
      const auto& allowed = space.allowed_inputs(ctx);
      for (int x : allowed)
        rows.p[static_cast<std::size_t>(ctx) * X + x] = 1.0 / allowed.size();
    }
    if (!(ss >> sep) || sep != ":") throw Error("bad policy record");
    for (long r = 0; r < space.admissible_count(); ++r) {
      if (r) {
        if (!(ss >> sep) || sep != "|") throw Error("bad policy record");
      }
      const long ctx = space.admissible_index(r);
      for (int x = 0; x < X; ++x)
        if (!(ss >> rows.p[static_cast<std::size_t>(ctx) * X + x]))
          throw Error("bad policy record");
    }
    table.rows[g] = std::move(rows);
  }
  return table;
}

}  // namespace fscbound
