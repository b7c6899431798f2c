#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tpg/errors.hpp"
#include "tpg/harness.hpp"
#include "tpg/run_config.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string checkpoint_path;
  std::string out_dir;
  std::string variant;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int epochs = -1;
  int episodes = -1;
};

tpg::RunConfig resolve_config(const CliOverrides& cli) {
  tpg::RunConfig config;
  if (!cli.config_path.empty()) config = tpg::load_run_config_file(cli.config_path);
  if (!cli.out_dir.empty()) config.output_dir = cli.out_dir;
  if (cli.seed_set) config.trainer.master_seed = cli.seed;
  if (!cli.variant.empty()) config.trainer.variant = tpg::variant_from_string(cli.variant);
  if (cli.epochs >= 0) config.trainer.epochs = cli.epochs;
  if (cli.episodes > 0) config.eval_episodes = cli.episodes;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-oriented question game: pretraining, policy-gradient training, evaluation"};
  app.require_subcommand(1);

  CliOverrides cli;
  tpg::AuditOptions audit;
  bool audit_seed_set = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cli.config_path, "JSON run configuration file");
    sub->add_option("--out", cli.out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", cli.seed, "master seed (overrides the config)")
        ->each([&](const std::string&) { cli.seed_set = true; });
  };

  CLI::App* pretrain = app.add_subcommand("pretrain", "clone the scripted expert into both agents");
  add_common(pretrain);

  CLI::App* train = app.add_subcommand("train", "run policy-gradient epochs from a checkpoint");
  add_common(train);
  train->add_option("--checkpoint", cli.checkpoint_path,
                    "checkpoint to start from (default: <out>/pretrain.ckpt)");
  train->add_option("--variant", cli.variant,
                    "reinforce | single_tpg | parallel_tpg | dynamic_tpg");
  train->add_option("--epochs", cli.epochs, "total epochs the run should reach");

  CLI::App* evaluate = app.add_subcommand("evaluate", "greedy evaluation of a checkpoint");
  add_common(evaluate);
  evaluate->add_option("--checkpoint", cli.checkpoint_path,
                       "checkpoint to evaluate (default: <out>/train.ckpt)");
  evaluate->add_option("--episodes", cli.episodes, "number of evaluation games");

  CLI::App* audit_cmd = app.add_subcommand("audit", "self-checks: gradients, estimator, sampler");
  audit_cmd->add_option("--seed", audit.seed, "audit seed")
      ->each([&](const std::string&) { audit_seed_set = true; });
  audit_cmd->add_option("--gradient-draws", audit.gradient_draws,
                        "random draws per gradient check");
  audit_cmd->add_option("--bandit-samples", audit.bandit_samples,
                        "episodes per bandit experiment");
  audit_cmd->add_option("--sampling-draws", audit.sampling_draws,
                        "draws per temperature in the frequency check");
  audit_cmd->add_flag("--corrupt-gradient", audit.corrupt_gradient,
                      "inject a gradient fault so the corresponding check must fail");
  audit_cmd->add_option("--config", cli.config_path, "JSON run configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (audit_cmd->parsed()) {
      if (!cli.config_path.empty() && !audit_seed_set) {
        audit.seed = tpg::load_run_config_file(cli.config_path).trainer.master_seed;
      }
      const int failures = tpg::cmd_audit(audit, std::cout);
      return failures == 0 ? 0 : 1;
    }

    const tpg::RunConfig config = resolve_config(cli);
    const tpg::RunPaths paths{config.output_dir};

    if (pretrain->parsed()) {
      const tpg::PretrainResult r = tpg::cmd_pretrain(config);
      std::printf("pretrained on %d expert dialogues, %zu steps, qgen nll %.4f -> %.4f\n",
                  r.pool_size, r.steps.size(), r.initial_qgen_nll(), r.final_qgen_nll());
      std::printf("checkpoint: %s\n", paths.pretrain_checkpoint().c_str());
      return 0;
    }
    if (train->parsed()) {
      const std::string start =
          cli.checkpoint_path.empty() ? paths.pretrain_checkpoint() : cli.checkpoint_path;
      std::cout << tpg::kMetricsHeader << '\n';
      const tpg::TrainResult r = tpg::cmd_train(config, start, &std::cout);
      std::printf("trained through epoch %d (%zu this run)\n", r.epochs_completed,
                  r.metrics.size());
      std::printf("checkpoint: %s\n", paths.train_checkpoint().c_str());
      return 0;
    }
    if (evaluate->parsed()) {
      const std::string start =
          cli.checkpoint_path.empty() ? paths.train_checkpoint() : cli.checkpoint_path;
      const tpg::EvalResult r = tpg::cmd_evaluate(config, start);
      std::printf("episodes %d success_rate %.4f mean_dialogue_len %.4f\n", r.episodes,
                  r.success_rate, r.mean_dialogue_len);
      return 0;
    }
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const tpg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const tpg::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
