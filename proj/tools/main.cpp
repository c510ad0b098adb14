#include <iostream>

#include "CLI11.hpp"
#include "fscbound/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  long seed = -1;
  int threads = 0;
  long budget_grid = 0;
  long budget_policy = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config, "Config file (INI)");
  if (config_required) opt->required();
  cmd->add_option("--out", flags.out, "Output directory (overrides config)");
  cmd->add_option("--seed", flags.seed, "Random seed (overrides config)");
  cmd->add_option("--threads", flags.threads, "Worker threads for the solver");
  cmd->add_option("--budget-grid", flags.budget_grid,
                  "Max belief-grid points before aborting");
  cmd->add_option("--budget-policy", flags.budget_policy,
                  "Max policy candidates before aborting");
}

fscbound::ExperimentConfig make_config(const CommonFlags& flags) {
  fscbound::ExperimentConfig cfg;
  if (!flags.config.empty()) cfg = fscbound::load_config(flags.config);
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.threads > 0) cfg.threads = flags.threads;
  if (flags.budget_grid > 0) cfg.budget_grid = flags.budget_grid;
  if (flags.budget_policy > 0) cfg.budget_policy = flags.budget_policy;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Upper and lower bounds on finite-state channel capacity"};
  app.require_subcommand(1);

  CommonFlags f_opt, f_eval, f_sweep, f_quant, f_oracle, f_info;
  std::string policy_file;
  bool corrupt = false;

  auto* c_opt = app.add_subcommand(
      "optimize", "Run quantized value iteration for each configured bound");
  add_common_flags(c_opt, f_opt, true);

  auto* c_eval = app.add_subcommand(
      "evaluate", "Estimate the rate of a saved policy by simulation");
  add_common_flags(c_eval, f_eval, true);
  c_eval->add_option("policy", policy_file, "Policy file to evaluate")
      ->required();

  auto* c_sweep = app.add_subcommand(
      "sweep", "Optimize and evaluate every bound across a parameter sweep");
  add_common_flags(c_sweep, f_sweep, true);

  auto* c_quant = app.add_subcommand(
      "quantizer-study",
      "Compare bound values across belief-quantizer step sizes");
  add_common_flags(c_quant, f_quant, true);

  auto* c_oracle = app.add_subcommand(
      "oracle-check", "Cross-check the filters against exhaustive enumeration");
  add_common_flags(c_oracle, f_oracle, false);
  c_oracle->add_flag("--corrupt", corrupt,
                     "Detune the filter kernel (the checks must then fail)");

  auto* c_info = app.add_subcommand(
      "info", "Print channel and state-space statistics for a config");
  add_common_flags(c_info, f_info, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_opt->parsed()) {
      fscbound::cmd_optimize(make_config(f_opt), std::cout);
    } else if (c_eval->parsed()) {
      fscbound::cmd_evaluate(make_config(f_eval), policy_file, std::cout);
    } else if (c_sweep->parsed()) {
      fscbound::cmd_sweep(make_config(f_sweep), std::cout);
    } else if (c_quant->parsed()) {
      fscbound::cmd_quantizer_study(make_config(f_quant), std::cout);
    } else if (c_oracle->parsed()) {
      return fscbound::cmd_oracle_check(make_config(f_oracle), corrupt,
                                        std::cout);
    } else if (c_info->parsed()) {
      fscbound::cmd_info(make_config(f_info), std::cout);
    }
  } catch (const fscbound::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fscbound::GridTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fscbound::PolicySpaceTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fscbound::EnumerationTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fscbound::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
