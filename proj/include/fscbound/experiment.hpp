#pragma once

#include <iosfwd>
#include <limits>

#include "fscbound/mc.hpp"

namespace fscbound {

// One (u, v, m) bound with its own discretization settings.
struct BoundSpec {
  int u = 0, v = 0, m = 0;
  double delta = 0.0, eta = 0.0;  // 0 = inherit the [dp] defaults
  int n = 0;
};

struct ExperimentConfig {
  // [channel]
  std::string model = "gilbert_elliott";  // gilbert_elliott | bsc | file
  double p_b_given_g = 0.3, p_g_given_b = 0.3;
  double eps_g = 0.001, eps_b = 0.5;
  double eps = 0.1;  // bsc crossover
  std::string constraint = "none";
  std::string channel_file;

  // [bounds]
  std::vector<BoundSpec> bounds;

  // [dp]
  double delta = 0.0, eta = 0.0;
  int n = 0;
  long budget_grid = 10000000;
  long budget_policy = 1000000;
  std::size_t cache_bytes = 1200000000;
  std::vector<double> deltas;  // quantizer study

  // [mc]
  long mc_samples = 1000000;
  long mc_burn_in = 1000;
  std::uint64_t seed = 1;

  // [sweep]
  std::string sweep_parameter;
  std::vector<double> sweep_values;
  int lb_order = 1;
  double lb_step = 0.05;
  long lb_samples = 200000;

  // [output]
  std::string out_dir = ".";
  std::string prefix = "fscbound";

  // runtime (CLI flags, not persisted)
  int threads = 1;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

// Builds the configured channel; eps_b_override replaces the configured eps_b
// when not NaN (used by sweeps).
ChannelSpec build_channel(const ExperimentConfig& config,
                          double eps_b_override =
                              std::numeric_limits<double>::quiet_NaN());

// Frozen CSV schema.
struct CsvRow {
  std::string model;
  double eps_b = std::numeric_limits<double>::quiet_NaN();
  int u = 0, v = 0, m = 0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  int n_iter = 0;
  long n_mc = 0;
  std::uint64_t seed = 0;
  double rate_bits = std::numeric_limits<double>::quiet_NaN();
  double std_err = std::numeric_limits<double>::quiet_NaN();
  double sigma_dp = std::numeric_limits<double>::quiet_NaN();
  double sigma_span = std::numeric_limits<double>::quiet_NaN();
  long wall_ms = 0;
};
std::string csv_header();
std::string csv_line(const CsvRow& row);

// Enumeration-based identity checks (independent of the sequential filters).
// Each returns the maximum absolute deviation found.

// Agreement of the two conditioning forms (full history vs clipped window)
// of the per-horizon directed information, via exhaustive trajectory
// enumeration.
double check_truncation_identity(const ChannelSpec& channel, Source& source,
                                 int v, int horizon);

// Factorization Pr(y_t, s_t | x^{t+u}, s_0^{t-1}, y^{t-1}) =
// Pr(y_t, s_t | x_t, s_{t-1}) over all positive-probability events, for
// sources with matching feedback delay u.
double check_factorization(const ChannelSpec& channel, Source& source,
                           int horizon);

// Sequential belief updates against the brute-force context posterior, over
// every observation history of the given length.
double check_filter_posterior(const ChannelSpec& channel, int m, int u,
                              const PolicyRows& rows, int num_obs);
// Variant with separate channels for the exhaustive reference and the filter
// under test; used as a negative control with a detuned filter kernel.
double check_filter_posterior(const ChannelSpec& oracle_channel,
                              const ChannelSpec& filter_channel, int m, int u,
                              const PolicyRows& rows, int num_obs);

// Random instances for the checks above.
ChannelSpec random_channel(int num_states, int num_inputs, int num_outputs,
                           Rng& rng);
PolicyRows random_rows(const ContextSpace& space, Rng& rng);

struct OracleReport {
  struct Item {
    std::string name;
    double max_dev = 0.0;
    double tol = 0.0;
    bool pass = false;
  };
  std::vector<Item> items;
  bool all_pass() const;
};
// corrupt_kernel deliberately mismatches one side (negative control).
OracleReport run_oracle_checks(std::uint64_t master_seed,
                               bool corrupt_kernel = false);

// Subcommand drivers; they throw on errors (the CLI maps exceptions to exit
// codes) and report progress on `log`.
void cmd_optimize(const ExperimentConfig& config, std::ostream& log);
void cmd_evaluate(const ExperimentConfig& config,
                  const std::string& policy_file, std::ostream& log);
void cmd_sweep(const ExperimentConfig& config, std::ostream& log);
void cmd_quantizer_study(const ExperimentConfig& config, std::ostream& log);
int cmd_oracle_check(const ExperimentConfig& config, bool corrupt_kernel,
                     std::ostream& log);  // 0 pass, 3 fail
void cmd_info(const ExperimentConfig& config, std::ostream& log);

// Helper shared by optimize/sweep/quantizer-study: file name for a bound's
// policy table.
std::string policy_file_name(const ExperimentConfig& config,
                             const BoundSpec& bound, double eps_b);

}  // namespace fscbound
