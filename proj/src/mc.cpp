#include "fscbound/mc.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace fscbound {

namespace {

// Both spaces read at the same nominal time; ext must have delay 0 and a
// window at least as long as src's. Maps every ext context to the src
// context obtained by dropping the older symbols.
std::vector<long> truncation_map(const ContextSpace& ext,
                                 const ContextSpace& src) {
  const int m_e = ext.input_window_len();
  const int m_s = src.input_window_len();
  const int u = src.delay();
  if (ext.delay() != 0 || m_e < m_s)
    throw ParameterOutOfRange("truncation_map spaces");
  std::vector<long> map(ext.size());
  std::vector<int> xw, sw;
  for (long ctx = 0; ctx < ext.size(); ++ctx) {
    ext.decode(ctx, xw, sw);
    map[ctx] = src.encode(
        std::span<const int>(xw.data() + (m_e - m_s), static_cast<std::size_t>(m_s)),
        std::span<const int>(sw.data() + (m_e - m_s),
                             static_cast<std::size_t>(m_s - u + 1)));
  }
  return map;
}

void lift_rows(const std::vector<long>& map, const PolicyRows& src_rows, int X,
               PolicyRows& out) {
  out.p.resize(map.size() * X);
  for (std::size_t ctx = 0; ctx < map.size(); ++ctx)
    for (int x = 0; x < X; ++x)
      out.p[ctx * X + x] = src_rows.prob(map[ctx], x, X);
}

int sample_index(std::span<const double> p, Rng& rng) {
  const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last = static_cast<int>(i);
    acc += p[i];
    if (r < acc) return last;
  }
  return last;
}

RateEstimate batch_stats(const std::vector<double>& terms, int batches) {
  RateEstimate est;
  const long n = static_cast<long>(terms.size());
  if (n == 0) return est;
  const int B = static_cast<int>(std::min<long>(batches, n));
  const long L = n / B;
  const long used = static_cast<long>(B) * L;
  double total = 0.0;
  std::vector<double> means(B, 0.0);
  for (long i = 0; i < used; ++i) {
    total += terms[i];
    means[i / L] += terms[i];
  }
  est.mean = total / used;
  est.samples = used;
  if (B > 1) {
    double var = 0.0;
    for (int b = 0; b < B; ++b) {
      const double d = means[b] / L - est.mean;
      var += d * d;
    }
    var /= (B - 1);
    est.std_error = std::sqrt(var / B);
  }
  return est;
}

// Shared single-trajectory machinery: simulates the channel under a source,
// runs the transmitter belief filter and an exact receiver filter over the
// extended context (full-length state window), and emits one
//   log2 Pr(y_t | truncated window) - log2 Pr(y_t | y^{t-1})
// term per step.
struct ChainRunner {
  const ChannelSpec& ch;
  Source& src;
  int v;
  const ContextSpace& ss;
  int u, m_s, X, Y;
  ContextSpace ext;
  BeliefTransition bt_src, bt_ext;
  std::vector<long> trunc;
  AlphaVector gamma0, alpha0;

  ChainRunner(const ChannelSpec& c, Source& s, int v_in)
      : ch(c),
        src(s),
        v(v_in),
        ss(s.space()),
        u(ss.delay()),
        m_s(ss.input_window_len()),
        X(c.num_inputs()),
        Y(c.num_outputs()),
        ext(c, m_s, 0),
        bt_src(c, ss),
        bt_ext(c, ext),
        trunc(truncation_map(ext, ss)),
        gamma0(alpha_init(c, ext)),
        alpha0(alpha_init(c, ss)) {
    if (v < u) throw ParameterOutOfRange("need v >= delay u");
  }

  template <class Emit>
  void run(long steps, Rng& rng, Emit&& emit) {
    // Histories indexed by absolute time: x_t at xs[t + m_s - 1] (t from
    // 1 - m_s), s_t at sstates[t + m_s] (t from -m_s), y_t at ys[t - 1].
    std::vector<int> xs, ys, sstates, xw, sw;
    xs.reserve(steps + m_s);
    ys.reserve(steps);
    sstates.reserve(steps + m_s + 1);
    const long ctx0 = sample_index(gamma0, rng);
    ext.decode(ctx0, xw, sw);
    xs = xw;
    sstates = sw;
    AlphaVector alpha = alpha0, gamma = gamma0;
    PolicyRows rows_e;
    std::vector<double> T;
    for (long t = 1; t <= steps; ++t) {
      const PolicyRows& rows = src.rows_at(alpha);
      const long ctx_prev = ss.encode(
          std::span<const int>(xs.data() + (t - 1), static_cast<std::size_t>(m_s)),
          std::span<const int>(sstates.data() + (t - 1),
                               static_cast<std::size_t>(m_s - u + 1)));
      const int x = sample_index(
          std::span<const double>(rows.p.data() +
                                      static_cast<std::size_t>(ctx_prev) * X,
                                  static_cast<std::size_t>(X)),
          rng);
      const auto [y, s] = ch.step(sstates[t - 1 + m_s], x, rng);
      xs.push_back(x);
      sstates.push_back(s);
      ys.push_back(y);

      const long lo = std::max<long>(0, t - v - 1);
      const int s_old = sstates[lo + m_s];
      const double p_num =
          truncated_term_prob(
              ch, s_old,
              std::span<const int>(xs.data() + lo + m_s,
                                   static_cast<std::size_t>(t - lo)),
              std::span<const int>(ys.data() + lo,
                                   static_cast<std::size_t>(t - 1 - lo)))[y];

      lift_rows(trunc, rows, X, rows_e);
      bt_ext.weights(gamma, rows_e, T);
      double p_den = 0.0;
      for (long l = 0; l < ext.size(); ++l)
        p_den += T[static_cast<std::size_t>(l) * Y + y];
      if (p_den <= 0.0 || p_num <= 0.0)
        throw ImpossibleObservation("simulated output has zero model probability");
      for (long l = 0; l < ext.size(); ++l)
        gamma[l] = T[static_cast<std::size_t>(l) * Y + y] / p_den;

      alpha = (t - u >= 1) ? bt_src.update(alpha, rows, ys[t - u - 1])
                            : bt_src.predict(alpha, rows);
      emit(std::log2(p_num) - std::log2(p_den));
    }
  }
};

}  // namespace

FixedSource::FixedSource(const ChannelSpec& channel, int m, int u,
                         PolicyRows rows)
    : space_(channel, m, u), rows_(std::move(rows)) {
  if (rows_.p.size() !=
      static_cast<std::size_t>(space_.size()) * space_.num_inputs())
    throw WindowLengthMismatch("source rows");
}

PolicyRows broadcast_history_rows(const ContextSpace& space,
                                  std::span<const double> history_rows,
                                  int order) {
  const int X = space.num_inputs();
  const int m = space.input_window_len();
  if (order < 0 || order > m) throw ParameterOutOfRange("history order");
  long hist_count = 1;
  for (int i = 0; i < order; ++i) hist_count *= X;
  if (history_rows.size() != static_cast<std::size_t>(hist_count) * X)
    throw WindowLengthMismatch("history rows");
  PolicyRows rows;
  rows.p.assign(static_cast<std::size_t>(space.size()) * X, 0.0);
  std::vector<int> xw, sw;
  for (long ctx = 0; ctx < space.size(); ++ctx) {
    space.decode(ctx, xw, sw);
    long hist = 0;
    for (int i = m - order; i < m; ++i) hist = hist * X + xw[i];
    for (int x = 0; x < X; ++x)
      rows.p[static_cast<std::size_t>(ctx) * X + x] =
          history_rows[static_cast<std::size_t>(hist) * X + x];
  }
  return rows;
}

PolicySource::PolicySource(const ChannelSpec& channel, PolicyTable table)
    : space_(channel, table.m, table.u),
      grid_(space_, table.delta),
      table_(std::move(table)) {
  if (channel.digest() != table_.channel_digest)
    throw DigestMismatch("policy table built for a different channel");
  if (static_cast<long>(table_.rows.size()) != grid_.num_points())
    throw ParameterOutOfRange("policy table size does not match grid");
}

const PolicyRows& PolicySource::rows_at(const AlphaVector& alpha) {
  return table_.rows[quantize_to_index(alpha, grid_)];
}

RateEstimate directed_info_rate(const ChannelSpec& channel, Source& source,
                                int u, int v, long num_samples, long burn_in,
                                std::uint64_t seed, int batches) {
  if (u != source.space().delay())
    throw DelayMismatch("u does not match the source context shape");
  if (num_samples < 1 || burn_in < 0 || batches < 1)
    throw ParameterOutOfRange("sample counts");
  ChainRunner runner(channel, source, v);
  Rng rng(seed);
  std::vector<double> terms;
  terms.reserve(num_samples);
  long t = 0;
  runner.run(burn_in + num_samples, rng, [&](double term) {
    if (++t > burn_in) terms.push_back(term);
  });
  RateEstimate est = batch_stats(terms, batches);
  est.burn_in = burn_in;
  est.seed = seed;
  return est;
}

RateEstimate finite_horizon_info(const ChannelSpec& channel, Source& source,
                                 int v, int horizon, long trials,
                                 std::uint64_t seed) {
  if (horizon < 1 || trials < 1) throw ParameterOutOfRange("trial counts");
  ChainRunner runner(channel, source, v);
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(trials);
  for (long k = 0; k < trials; ++k) {
    double sum = 0.0;
    runner.run(horizon, rng, [&](double term) { sum += term; });
    values.push_back(sum / horizon);
  }
  RateEstimate est;
  est.samples = trials;
  est.seed = seed;
  for (double x : values) est.mean += x;
  est.mean /= trials;
  if (trials > 1) {
    double var = 0.0;
    for (double x : values) var += (x - est.mean) * (x - est.mean);
    var /= (trials - 1);
    est.std_error = std::sqrt(var / trials);
  }
  return est;
}

namespace {

// Output-sequence recursion for the exact windowed directed information.
struct SequenceEnum {
  const ChannelSpec& ch;
  Source& src;
  int v, N, u, X, Y;
  ContextSpace E;
  BeliefTransition bt_e, bt_s;
  std::vector<long> trunc;
  // a_of[t][ctx] = window index at depth t; a_size[t] its range. Depths
  // beyond v share the unclipped entry at index v + 1.
  std::vector<std::vector<long>> a_of;
  std::vector<long> a_size;
  std::vector<int> ypath;
  std::vector<double> info;  // per-step I(window_t; Y_t | Y^{t-1})

  SequenceEnum(const ChannelSpec& c, Source& s, int v_in, int n_in)
      : ch(c),
        src(s),
        v(v_in),
        N(n_in),
        u(s.space().delay()),
        X(c.num_inputs()),
        Y(c.num_outputs()),
        E(c, std::max(s.space().input_window_len(), v_in + 1), 0),
        bt_e(c, E),
        bt_s(c, s.space()),
        trunc(truncation_map(E, s.space())),
        info(n_in + 1, 0.0) {
    const int m_e = E.input_window_len();
    const int depths = std::min(v, N) + (N > v ? 2 : 1);
    a_of.resize(depths);
    a_size.assign(depths, 0);
    std::vector<int> xw, sw;
    for (int d = 1; d < depths; ++d) {
      const int t = d;  // depth v+1 entry serves all t > v
      const int lo_x = std::max(1, t - v);
      const int lo_s = std::max(0, t - v - 1);
      a_of[d].resize(E.size());
      long sz = ch.num_states();
      for (int i = lo_x; i <= t; ++i) sz *= X;
      a_size[d] = sz;
      for (long ctx = 0; ctx < E.size(); ++ctx) {
        E.decode(ctx, xw, sw);
        long a = 0;
        for (int tau = lo_x; tau <= t; ++tau) a = a * X + xw[tau - t + m_e - 1];
        a = a * ch.num_states() + sw[lo_s - t + m_e];
        a_of[d][ctx] = a;
      }
    }
  }

  int depth_slot(int t) const {
    return t <= v ? t : (std::min(v, N) + 1);
  }

  void go(const std::vector<double>& f, const AlphaVector& alpha, int t) {
    if (t > N) return;
    const PolicyRows rows = src.rows_at(alpha);
    PolicyRows rows_e;
    lift_rows(trunc, rows, X, rows_e);
    std::vector<double> T;
    bt_e.weights(f, rows_e, T);
    const int slot = depth_slot(t);
    const auto& amap = a_of[slot];
    const long asz = a_size[slot];
    std::vector<double> vec(static_cast<std::size_t>(asz) * Y, 0.0);
    std::vector<double> pa(asz, 0.0);
    double tot_prev = 0.0;
    for (double p : f) tot_prev += p;
    for (long l = 0; l < E.size(); ++l) {
      const long a = amap[l];
      for (int y = 0; y < Y; ++y) {
        const double p = T[static_cast<std::size_t>(l) * Y + y];
        vec[static_cast<std::size_t>(y) * asz + a] += p;
        pa[a] += p;
      }
    }
    std::vector<double> f_child(E.size());
    for (int y = 0; y < Y; ++y) {
      double tot_y = 0.0;
      for (long a = 0; a < asz; ++a) tot_y += vec[static_cast<std::size_t>(y) * asz + a];
      if (tot_y <= 0.0) continue;
      for (long a = 0; a < asz; ++a) {
        const double p = vec[static_cast<std::size_t>(y) * asz + a];
        if (p > 0.0)
          info[t] += p * std::log2(p * tot_prev / (pa[a] * tot_y));
      }
      for (long l = 0; l < E.size(); ++l)
        f_child[l] = T[static_cast<std::size_t>(l) * Y + y];
      ypath.push_back(y);
      const AlphaVector alpha_child =
          (t - u >= 1) ? bt_s.update(alpha, rows, ypath[t - u - 1])
                       : bt_s.predict(alpha, rows);
      go(f_child, alpha_child, t + 1);
      ypath.pop_back();
    }
  }
};

}  // namespace

double exact_directed_info(const ChannelSpec& channel, Source& source, int u,
                           int v, int horizon, long budget) {
  if (u != source.space().delay())
    throw DelayMismatch("u does not match the source context shape");
  if (v < u) throw ParameterOutOfRange("need v >= delay u");
  if (horizon < 1 || horizon > 12)
    throw ParameterOutOfRange("horizon must be between 1 and 12");
  SequenceEnum en(channel, source, v, horizon);
  double work = static_cast<double>(en.E.size()) * channel.num_inputs() *
                channel.num_states();
  double leaves = 1.0;
  for (int t = 0; t < horizon; ++t) leaves *= channel.num_outputs();
  if (work * leaves > static_cast<double>(budget))
    throw EnumerationTooLarge("output-sequence recursion exceeds budget");
  en.go(alpha_init(channel, en.E), alpha_init(channel, source.space()), 1);
  double total = 0.0;
  for (int t = 1; t <= horizon; ++t) total += en.info[t];
  return total;
}

namespace {

double neg_plogp_sum(const std::unordered_map<std::uint64_t, double>& m) {
  double h = 0.0;
  for (const auto& [k, p] : m) h -= xlog2(p);
  return h;
}

struct PathEnum {
  const ChannelSpec& ch;
  Source& src;
  int v, N, u, m_s, X, Y, S;
  ContextSpace ext;
  BeliefTransition bt_s;
  AlphaVector gamma0, alpha0;
  std::vector<int> xs, sstates, ypath;  // xs from time 1-m_s, s from -m_s
  std::vector<std::uint64_t> ypow;
  // Per depth: joints with y^t and with y^{t-1}, for both conditioning forms,
  // plus the output-prefix marginals.
  std::vector<std::unordered_map<std::uint64_t, double>> mf, mfp, mt, mtp, my;

  PathEnum(const ChannelSpec& c, Source& s, int v_in, int n_in)
      : ch(c),
        src(s),
        v(v_in),
        N(n_in),
        u(s.space().delay()),
        m_s(s.space().input_window_len()),
        X(c.num_inputs()),
        Y(c.num_outputs()),
        S(c.num_states()),
        ext(c, m_s, 0),
        bt_s(c, s.space()),
        gamma0(alpha_init(c, ext)),
        alpha0(alpha_init(c, s.space())),
        mf(n_in + 1),
        mfp(n_in + 1),
        mt(n_in + 1),
        mtp(n_in + 1),
        my(n_in + 1) {
    ypow.resize(N + 1);
    ypow[0] = 1;
    for (int t = 1; t <= N; ++t) ypow[t] = ypow[t - 1] * Y;
    my[0][0] = 1.0;
  }

  void record(int t, double p, std::uint64_t xcode, std::uint64_t ycode) {
    const std::uint64_t ycode_prev = ycode / Y;
    const int len_s = std::max(1, t - v);  // states s_0..s_{max(0,t-v-1)}
    std::uint64_t scode = 0, spow = 1;
    for (int i = 0; i < len_s; ++i) {
      scode = scode * S + sstates[i + m_s];
      spow *= S;
    }
    const std::uint64_t fbase = xcode * spow + scode;
    mf[t][fbase * ypow[t] + ycode] += p;
    mfp[t][fbase * ypow[t - 1] + ycode_prev] += p;
    const int lo_x = std::max(1, t - v);
    std::uint64_t txcode = 0;
    for (int tau = lo_x; tau <= t; ++tau)
      txcode = txcode * X + xs[tau + m_s - 1];
    const std::uint64_t tbase =
        (txcode * S + sstates[std::max(0, t - v - 1) + m_s]);
    mt[t][tbase * ypow[t] + ycode] += p;
    mtp[t][tbase * ypow[t - 1] + ycode_prev] += p;
    my[t][ycode] += p;
  }

  void go(int t, double prob, const AlphaVector& alpha, std::uint64_t xcode,
          std::uint64_t ycode) {
    if (t > N) return;
    const PolicyRows rows = src.rows_at(alpha);
    const long ctx_prev = src.space().encode(
        std::span<const int>(xs.data() + (t - 1), static_cast<std::size_t>(m_s)),
        std::span<const int>(sstates.data() + (t - 1),
                             static_cast<std::size_t>(m_s - u + 1)));
    const int s_prev = sstates[t - 1 + m_s];
    for (int x = 0; x < X; ++x) {
      const double px = rows.prob(ctx_prev, x, X);
      if (px <= 0.0) continue;
      for (int y = 0; y < Y; ++y) {
        const double wy = ch.p_output(x, s_prev, y);
        if (wy <= 0.0) continue;
        for (int s = 0; s < S; ++s) {
          const double p = prob * px * wy * ch.p_state(s_prev, s);
          if (p <= 0.0) continue;
          xs.push_back(x);
          sstates.push_back(s);
          ypath.push_back(y);
          const std::uint64_t xc = xcode * X + x;
          const std::uint64_t yc = ycode * Y + y;
          record(t, p, xc, yc);
          const AlphaVector alpha_next =
              (t - u >= 1) ? bt_s.update(alpha, rows, ypath[t - u - 1])
                           : bt_s.predict(alpha, rows);
          go(t + 1, p, alpha_next, xc, yc);
          xs.pop_back();
          sstates.pop_back();
          ypath.pop_back();
        }
      }
    }
  }
};

}  // namespace

ExactInfo exact_directed_info_paths(const ChannelSpec& channel, Source& source,
                                    int v, int horizon, long budget) {
  if (v < source.space().delay()) throw ParameterOutOfRange("need v >= delay u");
  if (horizon < 1 || horizon > 12)
    throw ParameterOutOfRange("horizon must be between 1 and 12");
  PathEnum en(channel, source, v, horizon);
  double leaves = static_cast<double>(en.ext.size());
  for (int t = 0; t < horizon; ++t)
    leaves *= static_cast<double>(en.X) * en.Y * en.S;
  if (leaves > static_cast<double>(budget))
    throw EnumerationTooLarge("trajectory enumeration exceeds budget");
  // Key magnitude guard for the flat packing.
  const double max_key = std::pow(en.X, horizon) *
                         std::pow(en.S, std::max(1, horizon - v)) *
                         std::pow(en.Y, horizon);
  if (max_key > 9e18)
    throw EnumerationTooLarge("alphabets too large for packed keys");

  std::vector<int> xw, sw;
  for (long ctx0 = 0; ctx0 < en.ext.size(); ++ctx0) {
    const double p0 = en.gamma0[ctx0];
    if (p0 <= 0.0) continue;
    en.ext.decode(ctx0, xw, sw);
    en.xs = xw;
    en.sstates = sw;
    en.go(1, p0, en.alpha0, 0, 0);
  }
  ExactInfo out;
  for (int t = 1; t <= horizon; ++t) {
    out.full_bits += neg_plogp_sum(en.mfp[t]) + neg_plogp_sum(en.my[t]) -
                     neg_plogp_sum(en.mf[t]) - neg_plogp_sum(en.my[t - 1]);
    out.windowed_bits += neg_plogp_sum(en.mtp[t]) + neg_plogp_sum(en.my[t]) -
                         neg_plogp_sum(en.mt[t]) - neg_plogp_sum(en.my[t - 1]);
  }
  return out;
}

namespace {

long shift_history(long hist, int x, long hist_count, int X) {
  return hist_count <= 1 ? 0 : (hist * X + x) % hist_count;
}

void decode_history(long hist, int order, int X, std::vector<int>& out) {
  out.assign(order, 0);
  for (int i = order - 1; i >= 0; --i) {
    out[i] = static_cast<int>(hist % X);
    hist /= X;
  }
}

}  // namespace

RateEstimate feedforward_info_rate(const ChannelSpec& channel, int order,
                                   std::span<const double> history_rows,
                                   long num_samples, long burn_in,
                                   std::uint64_t seed, int batches) {
  const int X = channel.num_inputs();
  const int Y = channel.num_outputs();
  const int S = channel.num_states();
  const int c = channel.constraint().memory;
  if (order < c || order < 0)
    throw ParameterOutOfRange("order must cover the constraint memory");
  long hist_count = 1;
  for (int i = 0; i < order; ++i) hist_count *= X;
  if (history_rows.size() != static_cast<std::size_t>(hist_count) * X)
    throw WindowLengthMismatch("history rows");

  // Internally constraint-valid histories and allowed next inputs.
  std::vector<char> valid(hist_count, 1);
  std::vector<int> hw;
  long num_valid = 0;
  for (long h = 0; h < hist_count; ++h) {
    decode_history(h, order, X, hw);
    bool ok = true;
    for (int i = c; i < order && ok; ++i)
      ok = channel.constraint().allowed(
          std::span<const int>(hw.data() + i - c, static_cast<std::size_t>(c)),
          hw[i]);
    for (int x = 0; x < X && ok; ++x) {
      if (history_rows[static_cast<std::size_t>(h) * X + x] > 0.0 && c > 0 &&
          !channel.constraint().allowed(
              std::span<const int>(hw.data() + order - c,
                                   static_cast<std::size_t>(c)),
              x))
        throw ParameterOutOfRange("history rows put mass on a forbidden input");
    }
    valid[h] = ok ? 1 : 0;
    if (ok) ++num_valid;
  }
  if (num_valid == 0) throw DeadEndConstraint("no valid history");

  Rng rng(seed);
  // Initial history uniform over valid ones, initial state stationary.
  long hist;
  {
    std::vector<double> ph(hist_count, 0.0);
    for (long h = 0; h < hist_count; ++h)
      if (valid[h]) ph[h] = 1.0 / num_valid;
    hist = sample_index(ph, rng);
  }
  const auto& pi = channel.stationary_state_dist();
  int s_cur = sample_index(pi, rng);

  std::vector<double> rho(pi.begin(), pi.end());          // Pr(s | x^t, y^t)
  std::vector<double> kappa(static_cast<std::size_t>(hist_count) * S, 0.0);
  for (long h = 0; h < hist_count; ++h)
    if (valid[h])
      for (int s = 0; s < S; ++s)
        kappa[static_cast<std::size_t>(h) * S + s] = pi[s] / num_valid;

  std::vector<double> rho_next(S), kappa_next(kappa.size());
  std::vector<double> terms;
  terms.reserve(num_samples);
  const long steps = burn_in + num_samples;
  for (long t = 1; t <= steps; ++t) {
    const int x = sample_index(
        std::span<const double>(history_rows.data() +
                                    static_cast<std::size_t>(hist) * X,
                                static_cast<std::size_t>(X)),
        rng);
    const auto [y, s_new] = channel.step(s_cur, x, rng);

    double num = 0.0;
    std::fill(rho_next.begin(), rho_next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      const double e = rho[s] * channel.p_output(x, s, y);
      num += e;
      if (e > 0.0)
        for (int s2 = 0; s2 < S; ++s2)
          rho_next[s2] += e * channel.p_state(s, s2);
    }
    double den = 0.0;
    std::fill(kappa_next.begin(), kappa_next.end(), 0.0);
    for (long h = 0; h < hist_count; ++h) {
      for (int s = 0; s < S; ++s) {
        const double kp = kappa[static_cast<std::size_t>(h) * S + s];
        if (kp <= 0.0) continue;
        for (int x2 = 0; x2 < X; ++x2) {
          const double e = kp *
                           history_rows[static_cast<std::size_t>(h) * X + x2] *
                           channel.p_output(x2, s, y);
          if (e <= 0.0) continue;
          den += e;
          const long h2 = shift_history(h, x2, hist_count, X);
          for (int s2 = 0; s2 < S; ++s2)
            kappa_next[static_cast<std::size_t>(h2) * S + s2] +=
                e * channel.p_state(s, s2);
        }
      }
    }
    if (num <= 0.0 || den <= 0.0)
      throw ImpossibleObservation("zero-probability output in filter");
    for (int s = 0; s < S; ++s) rho[s] = rho_next[s] / num;
    for (std::size_t i = 0; i < kappa.size(); ++i)
      kappa[i] = kappa_next[i] / den;
    hist = shift_history(hist, x, hist_count, X);
    s_cur = s_new;
    if (t > burn_in) terms.push_back(std::log2(num) - std::log2(den));
  }
  (void)Y;
  RateEstimate est = batch_stats(terms, batches);
  est.burn_in = burn_in;
  est.seed = seed;
  return est;
}

LowerBoundResult markov_lower_bound(const ChannelSpec& channel, int order,
                                    double eta_lb, long num_samples,
                                    long burn_in, std::uint64_t seed,
                                    long budget, int batches) {
  const int X = channel.num_inputs();
  const int c = channel.constraint().memory;
  if (order < c) throw ParameterOutOfRange("order must cover the constraint memory");
  const long res = std::lround(1.0 / eta_lb);
  if (res < 1 || std::fabs(1.0 / eta_lb - static_cast<double>(res)) > 1e-9)
    throw ParameterOutOfRange("eta_lb must divide 1 evenly");
  long hist_count = 1;
  for (int i = 0; i < order; ++i) hist_count *= X;

  // Per-history candidate rows.
  std::vector<std::vector<std::vector<double>>> lists(hist_count);
  std::vector<int> hw;
  for (long h = 0; h < hist_count; ++h) {
    decode_history(h, order, X, hw);
    bool internal_ok = true;
    for (int i = c; i < order && internal_ok; ++i)
      internal_ok = channel.constraint().allowed(
          std::span<const int>(hw.data() + i - c, static_cast<std::size_t>(c)),
          hw[i]);
    std::vector<int> allowed;
    for (int x = 0; x < X; ++x)
      if (c == 0 || channel.constraint().allowed(
                        std::span<const int>(hw.data() + order - c,
                                             static_cast<std::size_t>(c)),
                        x))
        allowed.push_back(x);
    auto& list = lists[h];
    if (!internal_ok || allowed.size() <= 1) {
      std::vector<double> row(X, 0.0);
      for (int x : allowed) row[x] = 1.0 / allowed.size();
      list.push_back(std::move(row));
      continue;
    }
    const int parts = static_cast<int>(allowed.size());
    std::vector<int> comp(parts, 0);
    comp[parts - 1] = static_cast<int>(res);
    while (true) {
      std::vector<double> row(X, 0.0);
      for (int j = 0; j < parts; ++j)
        row[allowed[j]] = static_cast<double>(comp[j]) / res;
      list.push_back(std::move(row));
      int j = parts - 2;
      while (j >= 0) {
        int tail = 0;
        for (int i = j + 1; i < parts; ++i) tail += comp[i];
        if (tail > 0) break;
        --j;
      }
      if (j < 0) break;
      ++comp[j];
      int tail = 0;
      for (int i = j + 1; i < parts; ++i) {
        tail += comp[i];
        comp[i] = 0;
      }
      comp[parts - 1] = tail - 1;
    }
  }
  long total = 1;
  for (long h = 0; h < hist_count; ++h) {
    const long n = static_cast<long>(lists[h].size());
    if (n > 1 && total > budget / n)
      throw PolicySpaceTooLarge("lower-bound candidate count exceeds budget");
    total *= n;
  }

  LowerBoundResult best;
  best.order = order;
  best.estimate.mean = -1e300;
  std::vector<std::size_t> idx(hist_count, 0);
  std::vector<double> rows(static_cast<std::size_t>(hist_count) * X);
  while (true) {
    for (long h = 0; h < hist_count; ++h)
      for (int x = 0; x < X; ++x)
        rows[static_cast<std::size_t>(h) * X + x] = lists[h][idx[h]][x];
    const RateEstimate est = feedforward_info_rate(
        channel, order, rows, num_samples, burn_in, seed, batches);
    if (est.mean > best.estimate.mean) {
      best.estimate = est;
      best.rows = rows;
    }
    long h = hist_count - 1;
    while (h >= 0) {
      if (++idx[h] < lists[h].size()) break;
      idx[h] = 0;
      --h;
    }
    if (h < 0) break;
  }
  return best;
}

}  // namespace fscbound
