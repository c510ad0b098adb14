#include "fscbound/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace fscbound {

namespace {

std::string fmt_num(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string fmt_tag(double x) {
  std::string s = fmt_num(x);
  for (char& c : s)
    if (c == '.' || c == '-') c = 'p';
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& field, const std::string& val) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(val, &pos);
    if (pos != val.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(field + ": cannot parse number '" + val + "'");
  }
}

long parse_long(const std::string& field, const std::string& val) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(val, &pos);
    if (pos != val.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(field + ": cannot parse integer '" + val + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

void check_resolution_field(const std::string& field, double step) {
  if (!(step > 0.0) || step > 1.0)
    throw ConfigError(field + ": must be in (0, 1]");
  const double inv = 1.0 / step;
  if (std::fabs(inv - std::round(inv)) > 1e-9)
    throw ConfigError(field + ": 1/" + field + " must be an integer");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string field = section + "." + key;

    if (section == "channel") {
      if (key == "model") cfg.model = val;
      else if (key == "p_b_given_g") cfg.p_b_given_g = parse_double(field, val);
      else if (key == "p_g_given_b") cfg.p_g_given_b = parse_double(field, val);
      else if (key == "eps_g") cfg.eps_g = parse_double(field, val);
      else if (key == "eps_b") cfg.eps_b = parse_double(field, val);
      else if (key == "eps") cfg.eps = parse_double(field, val);
      else if (key == "constraint") cfg.constraint = val;
      else if (key == "file") cfg.channel_file = val;
      else throw ConfigError(field + ": unknown key");
    } else if (section == "bounds") {
      if (key == "triples") {
        for (const std::string& entry : split(val, ';')) {
          const auto parts = split(entry, ',');
          if (parts.size() != 3 && parts.size() != 6)
            throw ConfigError("bounds.triples: entry '" + entry +
                              "' needs u,v,m or u,v,m,delta,eta,n");
          BoundSpec b;
          b.u = static_cast<int>(parse_long("bounds.triples", parts[0]));
          b.v = static_cast<int>(parse_long("bounds.triples", parts[1]));
          b.m = static_cast<int>(parse_long("bounds.triples", parts[2]));
          if (parts.size() == 6) {
            b.delta = parse_double("bounds.triples", parts[3]);
            b.eta = parse_double("bounds.triples", parts[4]);
            b.n = static_cast<int>(parse_long("bounds.triples", parts[5]));
          }
          cfg.bounds.push_back(b);
        }
      } else {
        throw ConfigError(field + ": unknown key");
      }
    } else if (section == "dp") {
      if (key == "delta") cfg.delta = parse_double(field, val);
      else if (key == "eta") cfg.eta = parse_double(field, val);
      else if (key == "n") cfg.n = static_cast<int>(parse_long(field, val));
      else if (key == "budget_grid") cfg.budget_grid = parse_long(field, val);
      else if (key == "budget_policy") cfg.budget_policy = parse_long(field, val);
      else if (key == "cache_bytes")
        cfg.cache_bytes = static_cast<std::size_t>(parse_long(field, val));
      else if (key == "deltas") {
        cfg.deltas.clear();
        for (const std::string& d : split(val, ','))
          cfg.deltas.push_back(parse_double(field, d));
      } else throw ConfigError(field + ": unknown key");
    } else if (section == "mc") {
      if (key == "samples") cfg.mc_samples = parse_long(field, val);
      else if (key == "burn_in") cfg.mc_burn_in = parse_long(field, val);
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(parse_long(field, val));
      else throw ConfigError(field + ": unknown key");
    } else if (section == "sweep") {
      if (key == "parameter") cfg.sweep_parameter = val;
      else if (key == "values") {
        cfg.sweep_values.clear();
        for (const std::string& d : split(val, ','))
          cfg.sweep_values.push_back(parse_double(field, d));
      } else if (key == "lower_bound_order")
        cfg.lb_order = static_cast<int>(parse_long(field, val));
      else if (key == "lower_bound_step") cfg.lb_step = parse_double(field, val);
      else if (key == "lower_bound_samples") cfg.lb_samples = parse_long(field, val);
      else throw ConfigError(field + ": unknown key");
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = val;
      else if (key == "prefix") cfg.prefix = val;
      else throw ConfigError(field + ": unknown key");
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" +
                        section + "]");
    }
  }

  for (const BoundSpec& b : cfg.bounds) {
    if (b.u > b.v) throw ConfigError("bounds.triples: u exceeds v");
    if (b.v > b.m) throw ConfigError("bounds.triples: v exceeds m");
    if (b.u < 0) throw ConfigError("bounds.triples: u must be nonnegative");
  }
  if (cfg.model != "gilbert_elliott" && cfg.model != "bsc" &&
      cfg.model != "file")
    throw ConfigError("channel.model: unknown model '" + cfg.model + "'");
  if (cfg.sweep_parameter == "eps_b")
    for (double v : cfg.sweep_values)
      if (v < 0.0 || v > 1.0)
        throw ConfigError("sweep.values: eps_b outside [0, 1]");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[channel]\n";
  out << "model = " << c.model << "\n";
  out << "p_b_given_g = " << fmt_num(c.p_b_given_g) << "\n";
  out << "p_g_given_b = " << fmt_num(c.p_g_given_b) << "\n";
  out << "eps_g = " << fmt_num(c.eps_g) << "\n";
  out << "eps_b = " << fmt_num(c.eps_b) << "\n";
  out << "eps = " << fmt_num(c.eps) << "\n";
  out << "constraint = " << c.constraint << "\n";
  if (!c.channel_file.empty()) out << "file = " << c.channel_file << "\n";
  if (!c.bounds.empty()) {
    out << "\n[bounds]\ntriples = ";
    for (std::size_t i = 0; i < c.bounds.size(); ++i) {
      const BoundSpec& b = c.bounds[i];
      if (i) out << "; ";
      out << b.u << "," << b.v << "," << b.m;
      if (b.delta != 0.0 || b.eta != 0.0 || b.n != 0)
        out << "," << fmt_num(b.delta) << "," << fmt_num(b.eta) << "," << b.n;
    }
    out << "\n";
  }
  out << "\n[dp]\n";
  if (c.delta != 0.0) out << "delta = " << fmt_num(c.delta) << "\n";
  if (c.eta != 0.0) out << "eta = " << fmt_num(c.eta) << "\n";
  if (c.n != 0) out << "n = " << c.n << "\n";
  out << "budget_grid = " << c.budget_grid << "\n";
  out << "budget_policy = " << c.budget_policy << "\n";
  out << "cache_bytes = " << c.cache_bytes << "\n";
  if (!c.deltas.empty()) {
    out << "deltas = ";
    for (std::size_t i = 0; i < c.deltas.size(); ++i)
      out << (i ? "," : "") << fmt_num(c.deltas[i]);
    out << "\n";
  }
  out << "\n[mc]\n";
  out << "samples = " << c.mc_samples << "\n";
  out << "burn_in = " << c.mc_burn_in << "\n";
  out << "seed = " << c.seed << "\n";
  if (!c.sweep_parameter.empty() || !c.sweep_values.empty()) {
    out << "\n[sweep]\n";
    if (!c.sweep_parameter.empty())
      out << "parameter = " << c.sweep_parameter << "\n";
    if (!c.sweep_values.empty()) {
      out << "values = ";
      for (std::size_t i = 0; i < c.sweep_values.size(); ++i)
        out << (i ? "," : "") << fmt_num(c.sweep_values[i]);
      out << "\n";
    }
    out << "lower_bound_order = " << c.lb_order << "\n";
    out << "lower_bound_step = " << fmt_num(c.lb_step) << "\n";
    out << "lower_bound_samples = " << c.lb_samples << "\n";
  }
  out << "\n[output]\n";
  out << "dir = " << c.out_dir << "\n";
  out << "prefix = " << c.prefix << "\n";
  return out.str();
}

ChannelSpec build_channel(const ExperimentConfig& cfg, double eps_b_override) {
  const double eps_b =
      std::isnan(eps_b_override) ? cfg.eps_b : eps_b_override;
  if (cfg.model == "gilbert_elliott")
    return gilbert_elliott(cfg.p_b_given_g, cfg.p_g_given_b, cfg.eps_g, eps_b,
                           constraint_by_name(cfg.constraint));
  if (cfg.model == "bsc") {
    const double e = cfg.eps;
    return new_fsc(1, 2, 2, {1.0},
                   {1.0 - e, e, e, 1.0 - e},
                   constraint_by_name(cfg.constraint));
  }
  if (cfg.model == "file") {
    if (cfg.channel_file.empty())
      throw ConfigError("channel.file: required for model 'file'");
    return load_channel_file(cfg.channel_file);
  }
  throw ConfigError("channel.model: unknown model '" + cfg.model + "'");
}

std::string csv_header() {
  return "model,eps_b,u,v,m,delta,eta,n_iter,N_mc,seed,rate_bits,std_err,"
         "sigma_dp,sigma_span,wall_ms";
}

std::string csv_line(const CsvRow& r) {
  std::ostringstream out;
  out << r.model << ',' << fmt_num(r.eps_b) << ',' << r.u << ',' << r.v << ','
      << r.m << ',' << fmt_num(r.delta) << ',' << fmt_num(r.eta) << ','
      << r.n_iter << ',' << r.n_mc << ',' << r.seed << ','
      << fmt_num(r.rate_bits) << ',' << fmt_num(r.std_err) << ','
      << fmt_num(r.sigma_dp) << ',' << fmt_num(r.sigma_span) << ','
      << r.wall_ms;
  return out.str();
}

double check_truncation_identity(const ChannelSpec& channel, Source& source,
                                 int v, int horizon) {
  const ExactInfo info =
      exact_directed_info_paths(channel, source, v, horizon);
  return std::fabs(info.full_bits - info.windowed_bits);
}

namespace {

// Exhaustive trajectory walk shared by the identity oracles; deliberately
// independent of BeliefTransition beyond the source's own belief filter
// (fixed-row sources never consult it).
template <class Visit>
void walk_trajectories(const ChannelSpec& ch, const ContextSpace& sspace,
                       const PolicyRows& rows, int horizon, Visit&& visit) {
  const int m_s = sspace.input_window_len();
  const int u = sspace.delay();
  const int X = ch.num_inputs(), Y = ch.num_outputs(), S = ch.num_states();
  ContextSpace ext(ch, m_s, 0);
  const AlphaVector init = alpha_init(ch, ext);
  std::vector<int> xs, ss, ys, xw, sw;
  // xs holds times 1-m_s.., ss holds times -m_s..; ys holds times 1..
  auto dfs = [&](auto&& self, int t, double p) -> void {
    if (t > horizon) return;
    const long ctx_prev = sspace.encode(
        std::span<const int>(xs.data() + (t - 1), static_cast<std::size_t>(m_s)),
        std::span<const int>(ss.data() + (t - 1),
                             static_cast<std::size_t>(m_s - u + 1)));
    const int s_prev = ss[t - 1 + m_s];
    for (int x = 0; x < X; ++x) {
      const double px = rows.prob(ctx_prev, x, X);
      if (px <= 0.0) continue;
      for (int y = 0; y < Y; ++y)
        for (int s = 0; s < S; ++s) {
          const double pj = p * px * ch.joint(x, s_prev, y, s);
          if (pj <= 0.0) continue;
          xs.push_back(x);
          ss.push_back(s);
          ys.push_back(y);
          visit(t, pj, xs, ss, ys);
          self(self, t + 1, pj);
          xs.pop_back();
          ss.pop_back();
          ys.pop_back();
        }
    }
  };
  for (long ctx0 = 0; ctx0 < ext.size(); ++ctx0) {
    if (init[ctx0] <= 0.0) continue;
    ext.decode(ctx0, xw, sw);
    xs = xw;
    ss = sw;
    ys.clear();
    dfs(dfs, 1, init[ctx0]);
  }
}

}  // namespace

double check_factorization(const ChannelSpec& channel, Source& source,
                           int horizon) {
  const ContextSpace& sspace = source.space();
  const int u = sspace.delay();
  const int m_s = sspace.input_window_len();
  const int X = channel.num_inputs(), Y = channel.num_outputs(),
            S = channel.num_states();
  const PolicyRows rows = source.rows_at(alpha_init(channel, sspace));
  // joint[t][(x^{t+u}, s_0^t, y^t)] and cond[t][(x^{t+u}, s_0^{t-1}, y^{t-1})],
  // accumulated at walk depth t+u. Keys also let us read off the step symbols.
  std::vector<std::unordered_map<std::uint64_t, double>> joint(horizon + 1),
      cond(horizon + 1);
  walk_trajectories(
      channel, sspace, rows, horizon,
      [&](int d, double p, const std::vector<int>& xs,
          const std::vector<int>& ss, const std::vector<int>& ys) {
        const int t = d - u;
        if (t < 1) return;
        std::uint64_t xc = 0;
        for (int tau = 1; tau <= d; ++tau) xc = xc * X + xs[tau + m_s - 1];
        std::uint64_t sc = 0, sc_prev = 0;
        for (int tau = 0; tau <= t; ++tau) {
          sc = sc * S + ss[tau + m_s];
          if (tau <= t - 1) sc_prev = sc_prev * S + ss[tau + m_s];
        }
        std::uint64_t yc = 0, yc_prev = 0;
        for (int tau = 1; tau <= t; ++tau) {
          yc = yc * Y + ys[tau - 1];
          if (tau <= t - 1) yc_prev = yc_prev * Y + ys[tau - 1];
        }
        std::uint64_t spow = 1, ypow = 1;
        for (int i = 0; i <= t; ++i) spow *= S;
        for (int i = 0; i < t; ++i) ypow *= Y;
        joint[t][(xc * spow + sc) * ypow + yc] += p;
        cond[t][(xc * (spow / S) + sc_prev) * (ypow / Y) + yc_prev] += p;
      });
  double max_dev = 0.0;
  for (int t = 1; t <= horizon - u; ++t) {
    for (const auto& [key, p] : joint[t]) {
      if (p <= 0.0) continue;
      std::uint64_t spow = 1, ypow = 1;
      for (int i = 0; i <= t; ++i) spow *= S;
      for (int i = 0; i < t; ++i) ypow *= Y;
      const std::uint64_t yc = key % ypow;
      const std::uint64_t rest = key / ypow;
      const std::uint64_t sc = rest % spow;
      const std::uint64_t xc = rest / spow;
      const int y_t = static_cast<int>(yc % Y);
      const int s_t = static_cast<int>(sc % S);
      const int s_prev = static_cast<int>((sc / S) % S);
      std::uint64_t xshift = 1;
      for (int i = 0; i < u; ++i) xshift *= X;
      const int x_t = static_cast<int>((xc / xshift) % X);
      const std::uint64_t parent =
          (xc * (spow / S) + sc / S) * (ypow / Y) + yc / Y;
      const double denom = cond[t].at(parent);
      const double dev =
          std::fabs(p / denom - channel.joint(x_t, s_prev, y_t, s_t));
      max_dev = std::max(max_dev, dev);
    }
  }
  return max_dev;
}

double check_filter_posterior(const ChannelSpec& channel, int m, int u,
                              const PolicyRows& rows, int num_obs) {
  return check_filter_posterior(channel, channel, m, u, rows, num_obs);
}

double check_filter_posterior(const ChannelSpec& oracle_channel,
                              const ChannelSpec& filter_channel, int m, int u,
                              const PolicyRows& rows, int num_obs) {
  ContextSpace sspace(oracle_channel, m, u);
  const int Y = oracle_channel.num_outputs();
  const int horizon = num_obs + u;  // filter at time t has consumed y^{t-u}
  // joint over (observed prefix y^{num_obs}, context at time horizon)
  std::unordered_map<std::uint64_t, double> post;
  walk_trajectories(
      oracle_channel, sspace, rows, horizon,
      [&](int t, double p, const std::vector<int>& xs,
          const std::vector<int>& ss, const std::vector<int>& ys) {
        if (t != horizon) return;
        const long ctx = sspace.encode(
            std::span<const int>(xs.data() + t, static_cast<std::size_t>(m)),
            std::span<const int>(ss.data() + t,
                                 static_cast<std::size_t>(m - u + 1)));
        std::uint64_t yc = 0;
        for (int tau = 1; tau <= num_obs; ++tau) yc = yc * Y + ys[tau - 1];
        post[yc * static_cast<std::uint64_t>(sspace.size()) + ctx] += p;
      });

  ContextSpace fspace(filter_channel, m, u);
  BeliefTransition bt(filter_channel, fspace);
  const AlphaVector a0 = alpha_init(filter_channel, fspace);
  double max_dev = 0.0;
  std::uint64_t num_seqs = 1;
  for (int i = 0; i < num_obs; ++i) num_seqs *= Y;
  std::vector<int> obs(num_obs);
  for (std::uint64_t seq = 0; seq < num_seqs; ++seq) {
    std::uint64_t rem = seq;
    for (int i = num_obs - 1; i >= 0; --i) {
      obs[i] = static_cast<int>(rem % Y);
      rem /= Y;
    }
    std::uint64_t yc = 0;
    for (int i = 0; i < num_obs; ++i) yc = yc * Y + obs[i];
    // Brute-force posterior for this observation sequence.
    std::vector<double> exact(sspace.size(), 0.0);
    double total = 0.0;
    for (long ctx = 0; ctx < sspace.size(); ++ctx) {
      auto it = post.find(yc * static_cast<std::uint64_t>(sspace.size()) + ctx);
      if (it != post.end()) {
        exact[ctx] = it->second;
        total += it->second;
      }
    }
    if (total <= 0.0) continue;  // sequence impossible under the source
    for (double& e : exact) e /= total;
    AlphaVector alpha = a0;
    for (int t = 1; t <= horizon; ++t)
      alpha = (t - u >= 1) ? bt.update(alpha, rows, obs[t - u - 1])
                           : bt.predict(alpha, rows);
    for (long ctx = 0; ctx < sspace.size(); ++ctx)
      max_dev = std::max(max_dev, std::fabs(alpha[ctx] - exact[ctx]));
  }
  return max_dev;
}

ChannelSpec random_channel(int num_states, int num_inputs, int num_outputs,
                           Rng& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::vector<double> P(static_cast<std::size_t>(num_states) * num_states);
  for (int s = 0; s < num_states; ++s) {
    double total = 0.0;
    for (int s2 = 0; s2 < num_states; ++s2) {
      P[static_cast<std::size_t>(s) * num_states + s2] = unif(rng);
      total += P[static_cast<std::size_t>(s) * num_states + s2];
    }
    for (int s2 = 0; s2 < num_states; ++s2)
      P[static_cast<std::size_t>(s) * num_states + s2] /= total;
  }
  std::vector<double> W(static_cast<std::size_t>(num_inputs) * num_states *
                        num_outputs);
  for (int x = 0; x < num_inputs; ++x)
    for (int s = 0; s < num_states; ++s) {
      double total = 0.0;
      for (int y = 0; y < num_outputs; ++y) {
        const std::size_t i =
            (static_cast<std::size_t>(x) * num_states + s) * num_outputs + y;
        W[i] = unif(rng);
        total += W[i];
      }
      for (int y = 0; y < num_outputs; ++y)
        W[(static_cast<std::size_t>(x) * num_states + s) * num_outputs + y] /=
            total;
    }
  return new_fsc(num_states, num_inputs, num_outputs, std::move(P),
                 std::move(W), no_constraint());
}

PolicyRows random_rows(const ContextSpace& space, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  const int X = space.num_inputs();
  PolicyRows rows;
  rows.p.assign(static_cast<std::size_t>(space.size()) * X, 0.0);
  for (long ctx = 0; ctx < space.size(); ++ctx) {
    const auto& allowed = space.allowed_inputs(ctx);
    double total = 0.0;
    for (int x : allowed) {
      rows.p[static_cast<std::size_t>(ctx) * X + x] = unif(rng);
      total += rows.p[static_cast<std::size_t>(ctx) * X + x];
    }
    for (int x : allowed) rows.p[static_cast<std::size_t>(ctx) * X + x] /= total;
  }
  return rows;
}

bool OracleReport::all_pass() const {
  for (const auto& item : items)
    if (!item.pass) return false;
  return !items.empty();
}

OracleReport run_oracle_checks(std::uint64_t master_seed, bool corrupt_kernel) {
  OracleReport report;
  Rng rng(master_seed);
  constexpr int kInstances = 5;

  double dev_trunc = 0.0, dev_cross = 0.0, dev_fact = 0.0, dev_filter = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    ChannelSpec ch = random_channel(2, 2, 2, rng);
    ContextSpace space(ch, 1, 1);
    PolicyRows rows = random_rows(space, rng);
    FixedSource src(ch, 1, 1, rows);
    dev_trunc = std::max(dev_trunc, check_truncation_identity(ch, src, 1, 6));
    const ExactInfo paths = exact_directed_info_paths(ch, src, 1, 6);
    const double seq = exact_directed_info(ch, src, 1, 1, 6);
    dev_cross = std::max(dev_cross, std::fabs(paths.windowed_bits - seq));
    dev_fact = std::max(dev_fact, check_factorization(ch, src, 6));

    ChannelSpec filter_ch = ch;
    if (corrupt_kernel) {
      // Negative control: run the filter on a detuned output kernel.
      std::vector<double> W;
      for (int x = 0; x < ch.num_inputs(); ++x)
        for (int s = 0; s < ch.num_states(); ++s)
          for (int y = 0; y < ch.num_outputs(); ++y)
            W.push_back(ch.p_output(x, s, y));
      std::vector<double> P;
      for (int s = 0; s < ch.num_states(); ++s)
        for (int s2 = 0; s2 < ch.num_states(); ++s2)
          P.push_back(ch.p_state(s, s2));
      const double shift = 0.2 * W[0];
      W[0] -= shift;
      W[1] += shift;
      filter_ch = new_fsc(ch.num_states(), ch.num_inputs(), ch.num_outputs(),
                          std::move(P), std::move(W), no_constraint());
    }
    dev_filter = std::max(
        dev_filter, check_filter_posterior(ch, filter_ch, 1, 1, rows, 6));
  }
  report.items.push_back({"truncation_identity", dev_trunc, 1e-12,
                          dev_trunc < 1e-12});
  report.items.push_back({"enumeration_cross_check", dev_cross, 1e-10,
                          dev_cross < 1e-10});
  report.items.push_back({"factorization", dev_fact, 1e-12, dev_fact < 1e-12});
  report.items.push_back({"filter_posterior", dev_filter, 1e-10,
                          dev_filter < 1e-10});
  return report;
}

namespace {

long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

BoundSpec resolve_bound(const ExperimentConfig& cfg, BoundSpec b) {
  if (b.delta == 0.0) b.delta = cfg.delta;
  if (b.eta == 0.0) b.eta = cfg.eta;
  if (b.n == 0) b.n = cfg.n;
  if (b.delta == 0.0) throw ConfigError("dp.delta: missing");
  if (b.eta == 0.0) throw ConfigError("dp.eta: missing");
  if (b.n == 0) throw ConfigError("dp.n: missing");
  check_resolution_field("dp.delta", b.delta);
  check_resolution_field("dp.eta", b.eta);
  return b;
}

DpOptions dp_options(const ExperimentConfig& cfg) {
  DpOptions opt;
  opt.num_threads = cfg.threads;
  opt.grid_budget = cfg.budget_grid;
  opt.policy_budget = cfg.budget_policy;
  opt.cache_budget = cfg.cache_bytes;
  return opt;
}

std::ofstream open_csv(const ExperimentConfig& cfg, const std::string& tag) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = cfg.out_dir + "/" + cfg.prefix + "_" + tag + ".csv";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << csv_header() << "\n";
  return out;
}

double model_eps_b(const ExperimentConfig& cfg, double override_value) {
  if (cfg.model != "gilbert_elliott")
    return std::numeric_limits<double>::quiet_NaN();
  return std::isnan(override_value) ? cfg.eps_b : override_value;
}

CsvRow optimize_one(const ExperimentConfig& cfg, const ChannelSpec& channel,
                    const BoundSpec& b, double eps_b, std::ostream& log) {
  const long t0 = now_ms();
  const DpResult res = value_iteration(channel, b.u, b.v, b.m, b.delta, b.eta,
                                       b.n, dp_options(cfg));
  std::filesystem::create_directories(cfg.out_dir);
  save_policy(policy_file_name(cfg, b, eps_b), channel, res.policy);
  CsvRow row;
  row.model = cfg.model;
  row.eps_b = eps_b;
  row.u = b.u;
  row.v = b.v;
  row.m = b.m;
  row.delta = b.delta;
  row.eta = b.eta;
  row.n_iter = b.n;
  row.seed = cfg.seed;
  row.sigma_dp = res.sigma;
  row.sigma_span = res.span;
  row.wall_ms = now_ms() - t0;
  log << "optimize u=" << b.u << " v=" << b.v << " m=" << b.m
      << " delta=" << b.delta << " eta=" << b.eta << ": sigma=" << res.sigma
      << " span=" << res.span << " (" << res.num_grid_points << " points x "
      << res.num_candidates << " candidates, " << row.wall_ms << " ms)\n";
  return row;
}

CsvRow evaluate_one(const ExperimentConfig& cfg, const ChannelSpec& channel,
                    const PolicyTable& table, double eps_b, std::ostream& log) {
  const long t0 = now_ms();
  PolicySource source(channel, table);
  const RateEstimate est =
      directed_info_rate(channel, source, table.u, table.v, cfg.mc_samples,
                         cfg.mc_burn_in, cfg.seed);
  CsvRow row;
  row.model = cfg.model;
  row.eps_b = eps_b;
  row.u = table.u;
  row.v = table.v;
  row.m = table.m;
  row.delta = table.delta;
  row.eta = table.eta;
  row.n_iter = table.n_iter;
  row.n_mc = est.samples;
  row.seed = cfg.seed;
  row.rate_bits = est.mean;
  row.std_err = est.std_error;
  row.wall_ms = now_ms() - t0;
  log << "evaluate u=" << table.u << " v=" << table.v << " m=" << table.m
      << ": rate=" << est.mean << " +/- " << est.std_error << " ("
      << row.wall_ms << " ms)\n";
  return row;
}

}  // namespace

std::string policy_file_name(const ExperimentConfig& cfg, const BoundSpec& b,
                             double eps_b) {
  std::string name = cfg.out_dir + "/" + cfg.prefix + "_u" +
                     std::to_string(b.u) + "v" + std::to_string(b.v) + "m" +
                     std::to_string(b.m) + "_d" + fmt_tag(b.delta) + "_e" +
                     fmt_tag(b.eta);
  if (!std::isnan(eps_b)) name += "_b" + fmt_tag(eps_b);
  return name + ".policy";
}

void cmd_optimize(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.bounds.empty()) throw ConfigError("bounds.triples: missing");
  const ChannelSpec channel = build_channel(cfg);
  std::ofstream csv = open_csv(cfg, "optimize");
  for (const BoundSpec& raw : cfg.bounds) {
    const BoundSpec b = resolve_bound(cfg, raw);
    csv << csv_line(optimize_one(cfg, channel, b,
                                 model_eps_b(cfg, cfg.eps_b), log))
        << "\n";
  }
}

void cmd_evaluate(const ExperimentConfig& cfg, const std::string& policy_file,
                  std::ostream& log) {
  const ChannelSpec channel = build_channel(cfg);
  const PolicyTable table = load_policy(policy_file, channel);
  std::ofstream csv = open_csv(cfg, "evaluate");
  csv << csv_line(evaluate_one(cfg, channel, table,
                               model_eps_b(cfg, cfg.eps_b), log))
      << "\n";
}

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.sweep_parameter != "eps_b")
    throw ConfigError("sweep.parameter: only 'eps_b' is supported");
  if (cfg.sweep_values.empty()) throw ConfigError("sweep.values: missing");
  if (cfg.bounds.empty()) throw ConfigError("bounds.triples: missing");
  if (cfg.model != "gilbert_elliott")
    throw ConfigError("channel.model: sweep requires gilbert_elliott");
  std::ofstream csv = open_csv(cfg, "sweep");
  for (const double eps_b : cfg.sweep_values) {
    const ChannelSpec channel = build_channel(cfg, eps_b);
    double min_upper = std::numeric_limits<double>::infinity();
    double min_upper_se = 0.0;
    for (const BoundSpec& raw : cfg.bounds) {
      const BoundSpec b = resolve_bound(cfg, raw);
      const CsvRow opt_row = optimize_one(cfg, channel, b, eps_b, log);
      const PolicyTable table =
          load_policy(policy_file_name(cfg, b, eps_b), channel);
      CsvRow row = evaluate_one(cfg, channel, table, eps_b, log);
      row.sigma_dp = opt_row.sigma_dp;
      row.sigma_span = opt_row.sigma_span;
      row.wall_ms += opt_row.wall_ms;
      csv << csv_line(row) << "\n";
      if (row.rate_bits < min_upper) {
        min_upper = row.rate_bits;
        min_upper_se = row.std_err;
      }
    }
    const long t0 = now_ms();
    const LowerBoundResult lb =
        markov_lower_bound(channel, cfg.lb_order, cfg.lb_step, cfg.lb_samples,
                           cfg.mc_burn_in, cfg.seed);
    CsvRow row;
    row.model = cfg.model;
    row.eps_b = eps_b;
    row.u = -1;
    row.v = -1;
    row.m = cfg.lb_order;
    row.eta = cfg.lb_step;
    row.n_mc = lb.estimate.samples;
    row.seed = cfg.seed;
    row.rate_bits = lb.estimate.mean;
    row.std_err = lb.estimate.std_error;
    row.wall_ms = now_ms() - t0;
    csv << csv_line(row) << "\n";
    log << "lower bound (order " << cfg.lb_order << "): " << lb.estimate.mean
        << " +/- " << lb.estimate.std_error << "\n";
    if (lb.estimate.mean >
        min_upper + 3.0 * (min_upper_se + lb.estimate.std_error))
      log << "WARNING: lower bound exceeds the smallest upper bound at eps_b="
          << eps_b << "\n";
  }
}

void cmd_quantizer_study(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.deltas.empty()) throw ConfigError("dp.deltas: missing");
  if (cfg.model != "gilbert_elliott")
    throw ConfigError("channel.model: quantizer study requires gilbert_elliott");
  std::vector<double> eps_values = cfg.sweep_values;
  if (eps_values.empty()) eps_values = {0.1, 0.3, 0.5};
  std::ofstream csv = open_csv(cfg, "quantizer");
  for (const double eps_b : eps_values) {
    const ChannelSpec channel = build_channel(cfg, eps_b);
    for (const double delta : cfg.deltas) {
      BoundSpec b;
      b.u = b.v = b.m = 1;
      b.delta = delta;
      b.eta = cfg.eta;
      b.n = cfg.n;
      b = resolve_bound(cfg, b);
      const CsvRow opt_row = optimize_one(cfg, channel, b, eps_b, log);
      const PolicyTable table =
          load_policy(policy_file_name(cfg, b, eps_b), channel);
      CsvRow row = evaluate_one(cfg, channel, table, eps_b, log);
      row.sigma_dp = opt_row.sigma_dp;
      row.sigma_span = opt_row.sigma_span;
      row.wall_ms += opt_row.wall_ms;
      csv << csv_line(row) << "\n";
    }
  }
}

int cmd_oracle_check(const ExperimentConfig& cfg, bool corrupt_kernel,
                     std::ostream& log) {
  const OracleReport report = run_oracle_checks(cfg.seed, corrupt_kernel);
  log << "identity checks (master seed " << cfg.seed << "):\n";
  for (const auto& item : report.items)
    log << "  " << item.name << ": max deviation " << item.max_dev
        << " (tolerance " << item.tol << ") "
        << (item.pass ? "pass" : "FAIL") << "\n";
  return report.all_pass() ? 0 : 3;
}

void cmd_info(const ExperimentConfig& cfg, std::ostream& log) {
  const ChannelSpec channel = build_channel(cfg);
  log << "model: " << cfg.model << "\n";
  log << "digest: " << channel.digest() << "\n";
  log << "states: " << channel.num_states()
      << ", inputs: " << channel.num_inputs()
      << ", outputs: " << channel.num_outputs() << "\n";
  log << "constraint: " << channel.constraint().name << "\n";
  const auto& pi = channel.stationary_state_dist();
  log << "stationary state law:";
  for (double p : pi) log << " " << fmt_num(p);
  log << "\n";
  for (const BoundSpec& raw : cfg.bounds) {
    const BoundSpec b = resolve_bound(cfg, raw);
    ContextSpace space(channel, b.m, b.u);
    SimplexGrid grid(space, b.delta, cfg.budget_grid);
    const auto candidates =
        enumerate_policies(space, b.eta, cfg.budget_policy);
    log << "bound u=" << b.u << " v=" << b.v << " m=" << b.m << ": contexts "
        << space.size() << " (" << space.admissible_count()
        << " admissible), grid points " << grid.num_points()
        << ", policy candidates " << candidates.size() << "\n";
  }
}

}  // namespace fscbound
