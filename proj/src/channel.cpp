#include "fscbound/channel.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fscbound {

namespace {

constexpr double kRowTol = 1e-12;

void check_stochastic_rows(const std::vector<double>& table, int rows, int cols,
                           const char* what) {
  for (int r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      double p = table[static_cast<std::size_t>(r) * cols + c];
      if (p < 0.0 || p > 1.0)
        throw NonStochasticRow(std::string(what) + " entry outside [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowTol)
      throw NonStochasticRow(std::string(what) + " row " + std::to_string(r) +
                             " sums to " + std::to_string(sum));
  }
}

// Single communicating class, by reachability on positive entries.
void check_irreducible(const std::vector<double>& P, int S) {
  for (int start = 0; start < S; ++start) {
    std::vector<char> seen(S, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      for (int t = 0; t < S; ++t) {
        if (!seen[t] && P[static_cast<std::size_t>(s) * S + t] > 0.0) {
          seen[t] = 1;
          stack.push_back(t);
        }
      }
    }
    if (std::count(seen.begin(), seen.end(), 1) != S)
      throw Reducible("state " + std::to_string(start) +
                      " does not reach all states");
  }
}

std::vector<double> compute_stationary(const std::vector<double>& P, int S) {
  std::vector<double> pi(S, 1.0 / S), next(S);
  for (int iter = 0; iter < 200000; ++iter) {
    for (int t = 0; t < S; ++t) {
      double acc = 0.0;
      for (int s = 0; s < S; ++s) acc += pi[s] * P[static_cast<std::size_t>(s) * S + t];
      next[t] = acc;
    }
    double residual = 0.0;
    for (int t = 0; t < S; ++t) residual += std::abs(next[t] - pi[t]);
    pi.swap(next);
    if (residual < 1e-13) break;
  }
  double sum = 0.0;
  for (double p : pi) sum += p;
  for (double& p : pi) p /= sum;
  return pi;
}

std::string canonical_serialization(int S, int X, int Y,
                                    const std::vector<double>& P,
                                    const std::vector<double>& W,
                                    const std::string& constraint_name) {
  std::string out = std::to_string(S) + "," + std::to_string(X) + "," +
                    std::to_string(Y) + ";";
  char buf[32];
  for (double p : P) {
    std::snprintf(buf, sizeof buf, "%.17g,", p);
    out += buf;
  }
  out += ";";
  for (double w : W) {
    std::snprintf(buf, sizeof buf, "%.17g,", w);
    out += buf;
  }
  out += ";" + constraint_name;
  return out;
}

}  // namespace

InputConstraint no_constraint() { return InputConstraint{}; }

InputConstraint rll_1_inf() {
  InputConstraint c;
  c.memory = 1;
  c.name = "rll_1_inf";
  c.allowed_fn = [](std::span<const int> history, int next) {
    return !(history.back() == 1 && next == 1);
  };
  return c;
}

InputConstraint constraint_by_name(const std::string& name) {
  if (name == "none") return no_constraint();
  if (name == "rll_1_inf") return rll_1_inf();
  throw ConfigError("unknown constraint name '" + name + "'");
}

ChannelSpec::ChannelSpec(int num_states, int num_inputs, int num_outputs,
                         std::vector<double> state_transition,
                         std::vector<double> output_kernel,
                         InputConstraint constraint)
    : num_states_(num_states),
      num_inputs_(num_inputs),
      num_outputs_(num_outputs),
      P_(std::move(state_transition)),
      W_(std::move(output_kernel)),
      constraint_(std::move(constraint)) {
  if (num_states_ < 1 || num_inputs_ < 1 || num_outputs_ < 1)
    throw ParameterOutOfRange("alphabet sizes must be positive");
  if (P_.size() != static_cast<std::size_t>(num_states_) * num_states_)
    throw WindowLengthMismatch("state_transition has wrong size");
  if (W_.size() !=
      static_cast<std::size_t>(num_inputs_) * num_states_ * num_outputs_)
    throw WindowLengthMismatch("output_kernel has wrong size");

  check_stochastic_rows(P_, num_states_, num_states_, "state_transition");
  check_stochastic_rows(W_, num_inputs_ * num_states_, num_outputs_,
                        "output_kernel");
  check_irreducible(P_, num_states_);

  if (constraint_.memory > 0) {
    // Every admissible history must leave at least one admissible input.
    const int c = constraint_.memory;
    std::vector<int> history(c, 0);
    const long total = static_cast<long>(std::pow(num_inputs_, c));
    for (long h = 0; h < total; ++h) {
      long rem = h;
      for (int i = c - 1; i >= 0; --i) {
        history[i] = static_cast<int>(rem % num_inputs_);
        rem /= num_inputs_;
      }
      bool any = false;
      for (int x = 0; x < num_inputs_ && !any; ++x)
        any = constraint_.allowed(history, x);
      if (!any) throw DeadEndConstraint("history admits no input");
    }
  }

  stationary_ = compute_stationary(P_, num_states_);
  std::uint64_t h = fnv1a64(canonical_serialization(
      num_states_, num_inputs_, num_outputs_, P_, W_, constraint_.name));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  digest_ = buf;
}

std::pair<int, int> ChannelSpec::step(int s_prev, int x, Rng& rng) const {
  if (s_prev < 0 || s_prev >= num_states_ || x < 0 || x >= num_inputs_)
    throw IndexOutOfRange("step");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double uy = unif(rng);
  int y = num_outputs_ - 1;
  double acc = 0.0;
  for (int cand = 0; cand < num_outputs_; ++cand) {
    acc += p_output(x, s_prev, cand);
    if (uy < acc) {
      y = cand;
      break;
    }
  }
  double us = unif(rng);
  int s = num_states_ - 1;
  acc = 0.0;
  for (int cand = 0; cand < num_states_; ++cand) {
    acc += p_state(s_prev, cand);
    if (us < acc) {
      s = cand;
      break;
    }
  }
  return {y, s};
}

ChannelSpec new_fsc(int num_states, int num_inputs, int num_outputs,
                    std::vector<double> state_transition,
                    std::vector<double> output_kernel,
                    InputConstraint constraint) {
  return ChannelSpec(num_states, num_inputs, num_outputs,
                     std::move(state_transition), std::move(output_kernel),
                     std::move(constraint));
}

ChannelSpec gilbert_elliott(double p_b_given_g, double p_g_given_b,
                            double eps_g, double eps_b,
                            InputConstraint constraint) {
  for (double p : {p_b_given_g, p_g_given_b, eps_g, eps_b})
    if (p < 0.0 || p > 1.0)
      throw ParameterOutOfRange("gilbert_elliott parameters must be in [0,1]");
  std::vector<double> P = {1.0 - p_b_given_g, p_b_given_g,
                           p_g_given_b, 1.0 - p_g_given_b};
  // W[x][s][y]; state 0 = good (BSC eps_g), state 1 = bad (BSC eps_b).
  std::vector<double> W = {
      1.0 - eps_g, eps_g,  // x=0, s=g
      1.0 - eps_b, eps_b,  // x=0, s=b
      eps_g, 1.0 - eps_g,  // x=1, s=g
      eps_b, 1.0 - eps_b,  // x=1, s=b
  };
  return ChannelSpec(2, 2, 2, std::move(P), std::move(W), std::move(constraint));
}

std::vector<double> joint_kernel(const ChannelSpec& channel, int x, int s_prev) {
  if (x < 0 || x >= channel.num_inputs() || s_prev < 0 ||
      s_prev >= channel.num_states())
    throw IndexOutOfRange("joint_kernel");
  std::vector<double> out(
      static_cast<std::size_t>(channel.num_outputs()) * channel.num_states());
  for (int y = 0; y < channel.num_outputs(); ++y)
    for (int s = 0; s < channel.num_states(); ++s)
      out[static_cast<std::size_t>(y) * channel.num_states() + s] =
          channel.joint(x, s_prev, y, s);
  return out;
}

ChannelSpec parse_channel_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int S = -1, X = -1, Y = -1;
  std::vector<double> P, W;
  std::string constraint_name = "none";
  auto parse_values = [](const std::string& s) {
    std::vector<double> v;
    std::istringstream vs(s);
    double d;
    while (vs >> d) v.push_back(d);
    return v;
  };
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
    if (key == "num_states") S = std::stoi(value);
    else if (key == "num_inputs") X = std::stoi(value);
    else if (key == "num_outputs") Y = std::stoi(value);
    else if (key == "state_transition") P = parse_values(value);
    else if (key == "output_kernel") W = parse_values(value);
    else if (key == "constraint") {
      std::istringstream vs(value);
      vs >> constraint_name;
    } else
      throw ConfigError("unknown channel field '" + key + "'");
  }
  if (S < 0 || X < 0 || Y < 0)
    throw ConfigError("channel file missing alphabet sizes");
  return ChannelSpec(S, X, Y, std::move(P), std::move(W),
                     constraint_by_name(constraint_name));
}

ChannelSpec load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open channel file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_channel_text(buf.str());
}

}  // namespace fscbound
