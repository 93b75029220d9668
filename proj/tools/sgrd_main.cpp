// Command-line pipeline driver: sound dataset generation, triplet
// collection, embedding training, RL training, evaluation and post-shift
// fine-tuning. Every failure exits nonzero with one machine-parsable line:
//   error:<category>: <message>
// Categories and exit codes: usage=2 config=3 io=4 format=5 numeric=6.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sgrd/error.hpp"
#include "sgrd/harness.hpp"

namespace {

int exit_code(sgrd::ErrorCategory c) {
  switch (c) {
    case sgrd::ErrorCategory::usage: return 2;
    case sgrd::ErrorCategory::config: return 3;
    case sgrd::ErrorCategory::io: return 4;
    case sgrd::ErrorCategory::format: return 5;
    case sgrd::ErrorCategory::numeric: return 6;
  }
  return 1;
}

struct CommonOpts {
  std::string config_path;
  std::optional<std::string> env;
  std::optional<std::string> mode;
  std::optional<std::string> out;
  std::optional<long long> seed;
  std::optional<int> budget;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file");
  cmd->add_option("--env", opts.env, "environment kind: gridnav | armreach");
  cmd->add_option("--mode", opts.mode, "reward mode: intrinsic | image-only | sparse");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--seed", opts.seed, "override the seed this stage consumes");
  cmd->add_option("--budget", opts.budget, "fine-tuning triplet budget");
}

enum class Stage { make_sounds, collect, train_var, train_rl, eval, finetune };

sgrd::RunConfig resolve(const CommonOpts& opts, Stage stage) {
  sgrd::RunConfig config = opts.config_path.empty()
                               ? sgrd::RunConfig{}
                               : sgrd::RunConfig::from_file(opts.config_path);
  if (opts.env) config.env = sgrd::env_kind_from_string(*opts.env);
  if (opts.mode) config.mode = sgrd::train_mode_from_string(*opts.mode);
  if (opts.out) config.out = *opts.out;
  if (opts.seed) {
    auto s = static_cast<std::uint64_t>(*opts.seed);
    switch (stage) {
      case Stage::make_sounds:
      case Stage::collect: config.data_seed = s; break;
      case Stage::train_var: config.var_seed = s; break;
      default: config.rl_seed = s; break;
    }
  }
  if (opts.budget) config.budgets = {*opts.budget};
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sound-commanded agent pipeline (visual-audio embedding + intrinsic-reward RL)"};
  app.require_subcommand(1);

  CommonOpts opts;
  CLI::App* make_sounds = app.add_subcommand("make-sounds", "generate the tonal command dataset");
  CLI::App* collect = app.add_subcommand("collect", "collect visual-audio triplets");
  CLI::App* train_var = app.add_subcommand("train-var", "train the joint embedding on triplets");
  CLI::App* train_rl = app.add_subcommand("train-rl", "train the policy with VAR rewards");
  CLI::App* eval = app.add_subcommand("eval", "evaluate the policy on unheard sounds");
  CLI::App* finetune = app.add_subcommand("finetune", "domain-shift fine-tuning study");
  for (CLI::App* cmd : {make_sounds, collect, train_var, train_rl, eval, finetune}) {
    add_common(cmd, opts);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error:usage: " << e.what() << "\n";
    return exit_code(sgrd::ErrorCategory::usage);
  }

  try {
    if (make_sounds->parsed()) {
      sgrd::cmd_make_sounds(resolve(opts, Stage::make_sounds));
    } else if (collect->parsed()) {
      sgrd::cmd_collect(resolve(opts, Stage::collect));
    } else if (train_var->parsed()) {
      sgrd::cmd_train_var(resolve(opts, Stage::train_var));
    } else if (train_rl->parsed()) {
      sgrd::cmd_train_rl(resolve(opts, Stage::train_rl));
    } else if (eval->parsed()) {
      sgrd::RunReport report = sgrd::cmd_eval(resolve(opts, Stage::eval));
      std::cout << report.to_text();
    } else if (finetune->parsed()) {
      auto reports = sgrd::cmd_finetune(resolve(opts, Stage::finetune));
      for (const auto& r : reports) {
        std::cout << "budget=" << r.budget << " pre=" << r.result.pre_shift_success
                  << " shifted=" << r.result.post_shift_success
                  << " recovered=" << r.result.recovered_success << "\n";
      }
    }
  } catch (const sgrd::Error& e) {
    std::cerr << "error:" << sgrd::to_string(e.category()) << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error:internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
