#include "tpg/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <vector>

#include "tpg/agents.hpp"
#include "tpg/game.hpp"
#include "tpg/grad_check.hpp"
#include "tpg/param_store.hpp"
#include "tpg/rng.hpp"
#include "tpg/tape.hpp"
#include "tpg/tempered.hpp"
#include "tpg/vocab.hpp"

namespace tpg {

namespace {

std::string format(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

// Small agent pair reused by the gradient suites; tiny dims keep the
// finite-difference probing cheap without changing any code path.
struct TinySetup {
  Vocab vocab = Vocab::build(3);
  ModelConfig model{6, 8};
  WorldConfig world_config{4, 3};
};

}  // namespace

AuditCheck audit_gradient_feedforward(const AuditOptions& options) {
  SeededRng rng(derive_seed(options.seed, "grad_ff"));
  double worst = 0.0;
  for (int draw = 0; draw < options.gradient_draws; ++draw) {
    ParamStore store;
    const BlockId w1 = store.add("w1", 8, 6);
    const BlockId b1 = store.add_vector("b1", 8);
    const BlockId w2 = store.add("w2", 4, 8);
    const BlockId b2 = store.add_vector("b2", 4);
    store.init_uniform(rng, 0.5);
    std::vector<double> x(6);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const int target = rng.uniform_int(4);

    const auto eval = [&]() {
      Tape tape;
      const NodeId h = tape.tanh_of(tape.affine(store, w1, b1, tape.input(x)));
      const NodeId pmf = tape.softmax_of(tape.affine(store, w2, b2, h));
      return tape.scalar(tape.log_select(pmf, target));
    };

    store.zero_grads();
    {
      Tape tape;
      const NodeId h = tape.tanh_of(tape.affine(store, w1, b1, tape.input(x)));
      const NodeId pmf = tape.softmax_of(tape.affine(store, w2, b2, h));
      tape.backward(store, tape.log_select(pmf, target), 1.0);
    }
    if (options.corrupt_gradient) store.block(w1).grad[0] += 0.5;
    worst = std::max(worst, finite_diff_check(store, eval, 1e-5, rng, 6));
  }
  return {"gradient_fidelity_feedforward", worst <= 1e-4,
          format("worst relative error %.3e (tolerance %.0e)", worst, 1e-4)};
}

AuditCheck audit_gradient_recurrent(const AuditOptions& options) {
  const TinySetup setup;
  SeededRng rng(derive_seed(options.seed, "grad_rnn"));
  double worst = 0.0;
  for (int draw = 0; draw < options.gradient_draws; ++draw) {
    SeededRng init(rng.next_u64());
    QGenPolicy policy(setup.vocab, setup.model, init);
    const GameWorld world = new_game(setup.world_config, rng.next_u64());
    const std::vector<int> question = {setup.vocab.id("is"), setup.vocab.id("it"),
                                       setup.vocab.category_token(0),
                                       setup.vocab.end_question()};
    // ln pmf of the third decoded word: the gradient reaches every parameter
    // through both recurrences, the shared embedding, and the summary.
    const int decoded[3] = {setup.vocab.id("it"), setup.vocab.category_token(1),
                            setup.vocab.end_question()};

    const auto unroll = [&](Tape& tape) {
      const NodeId ws = policy.world_summary(tape, world);
      NodeId enc = policy.initial_encoder_state(tape, ws);
      for (int t : question) enc = policy.encoder_consume(tape, enc, t, ws);
      enc = policy.encoder_consume(tape, enc, setup.vocab.yes(), ws);
      NodeId dec = enc;
      int prev = setup.vocab.start();
      NodeId last = -1;
      for (int t : decoded) {
        const QGenPolicy::DecodeOut out = policy.decode_step(tape, dec, prev);
        last = tape.log_select(out.pmf, t);
        dec = out.state;
        prev = t;
      }
      return last;
    };
    const auto eval = [&]() {
      Tape tape;
      return tape.scalar(unroll(tape));
    };

    policy.params().zero_grads();
    {
      Tape tape;
      tape.backward(policy.params(), unroll(tape), 1.0);
    }
    worst = std::max(worst, finite_diff_check(policy.params(), eval, 1e-3, rng, 6));
  }
  return {"gradient_fidelity_recurrent", worst <= 1e-3,
          format("worst relative error %.3e (tolerance %.0e)", worst, 1e-3)};
}

AuditCheck audit_gradient_attention(const AuditOptions& options) {
  const TinySetup setup;
  SeededRng rng(derive_seed(options.seed, "grad_attn"));
  double worst = 0.0;
  for (int draw = 0; draw < options.gradient_draws; ++draw) {
    SeededRng init(rng.next_u64());
    GuesserNet net(setup.vocab, setup.model, init);
    const GameWorld world = new_game(setup.world_config, rng.next_u64());
    std::vector<DialogueTurn> turns;
    turns.push_back({{setup.vocab.id("is"), setup.vocab.id("it"), setup.vocab.category_token(0),
                      setup.vocab.end_question()},
                     Answer::No});
    turns.push_back({{setup.vocab.id("is"), setup.vocab.id("it"), setup.vocab.column_token(2),
                      setup.vocab.end_question()},
                     Answer::Yes});

    const auto eval = [&]() {
      Tape tape;
      const NodeId pmf = net.forward(tape, world, turns);
      return tape.scalar(tape.log_select(pmf, world.target));
    };

    net.params().zero_grads();
    {
      Tape tape;
      const NodeId pmf = net.forward(tape, world, turns);
      tape.backward(net.params(), tape.log_select(pmf, world.target), 1.0);
    }
    worst = std::max(worst, finite_diff_check(net.params(), eval, 1e-3, rng, 6));
  }
  return {"gradient_fidelity_attention", worst <= 1e-3,
          format("worst relative error %.3e (tolerance %.0e)", worst, 1e-3)};
}

namespace {

constexpr int kArms = 5;
constexpr double kArmReward[kArms] = {0.9, 0.1, 0.3, 0.5, 0.7};

enum class BaselineKind { Zero, Running, Fixed };

struct BanditResult {
  double analytic[kArms];
  double mean[kArms];
  double se[kArms];
  double total_variance = 0.0;
};

// Gradient estimates flow through the same tape machinery the trainer uses:
// softmax policy node, log_select at the sampled arm, reverse sweep scaled by
// (r - b).
BanditResult run_bandit(BaselineKind kind, std::uint64_t seed, int samples) {
  ParamStore store;
  const BlockId theta = store.add("theta", 1, kArms);
  SeededRng init(derive_seed(seed, "bandit_init"));
  store.init_uniform(init, 0.6);

  BanditResult result{};
  std::vector<double> pmf;
  {
    Tape tape;
    const NodeId p = tape.softmax_of(tape.param_row(store, theta, 0));
    const std::span<const double> v = tape.value(p);
    pmf.assign(v.begin(), v.end());
  }
  double expected_reward = 0.0;
  for (int k = 0; k < kArms; ++k) expected_reward += pmf[static_cast<size_t>(k)] * kArmReward[k];
  for (int k = 0; k < kArms; ++k) {
    result.analytic[k] = pmf[static_cast<size_t>(k)] * (kArmReward[k] - expected_reward);
  }

  SeededRng rng(derive_seed(seed, "bandit_draws", static_cast<std::uint64_t>(kind)));
  double sum[kArms] = {};
  double sumsq[kArms] = {};
  double reward_so_far = 0.0;
  Tape tape;
  for (int i = 0; i < samples; ++i) {
    tape.reset();
    const NodeId p = tape.softmax_of(tape.param_row(store, theta, 0));
    const int arm = sample_index(tape.value(p), rng.uniform01());
    double b = 0.0;
    if (kind == BaselineKind::Fixed) b = 0.5;
    if (kind == BaselineKind::Running && i > 0) b = reward_so_far / i;
    store.zero_grads();
    tape.backward(store, tape.log_select(p, arm), kArmReward[arm] - b);
    const ParamBlock& blk = store.block(theta);
    for (int k = 0; k < kArms; ++k) {
      const double g = blk.grad[static_cast<size_t>(k)];
      sum[k] += g;
      sumsq[k] += g * g;
    }
    reward_so_far += kArmReward[arm];
  }
  for (int k = 0; k < kArms; ++k) {
    const double mean = sum[k] / samples;
    const double var = std::max(0.0, sumsq[k] / samples - mean * mean);
    result.mean[k] = mean;
    result.se[k] = std::sqrt(var / samples);
    result.total_variance += var;
  }
  return result;
}

AuditCheck bandit_mean_check(const char* name, BaselineKind kind, const AuditOptions& options) {
  const BanditResult r = run_bandit(kind, options.seed, options.bandit_samples);
  double worst_z = 0.0;
  for (int k = 0; k < kArms; ++k) {
    const double z = std::abs(r.mean[k] - r.analytic[k]) / std::max(r.se[k], 1e-12);
    worst_z = std::max(worst_z, z);
  }
  return {name, worst_z <= 3.0, format("worst |z| %.2f (limit %.1f)", worst_z, 3.0)};
}

}  // namespace

AuditCheck audit_bandit_no_baseline(const AuditOptions& options) {
  return bandit_mean_check("bandit_unbiased_no_baseline", BaselineKind::Zero, options);
}

AuditCheck audit_bandit_running_baseline(const AuditOptions& options) {
  return bandit_mean_check("bandit_unbiased_running_baseline", BaselineKind::Running, options);
}

AuditCheck audit_bandit_fixed_baseline(const AuditOptions& options) {
  return bandit_mean_check("bandit_unbiased_fixed_baseline", BaselineKind::Fixed, options);
}

AuditCheck audit_bandit_variance_reduction(const AuditOptions& options) {
  const BanditResult zero = run_bandit(BaselineKind::Zero, options.seed, options.bandit_samples);
  const BanditResult running =
      run_bandit(BaselineKind::Running, options.seed, options.bandit_samples);
  const BanditResult fixed = run_bandit(BaselineKind::Fixed, options.seed, options.bandit_samples);
  const bool ok = running.total_variance < zero.total_variance &&
                  fixed.total_variance < zero.total_variance;
  return {"bandit_variance_reduction", ok,
          format("variance without baseline %.4e, with running baseline %.4e", zero.total_variance,
                 running.total_variance)};
}

AuditCheck audit_sampling_frequency(const AuditOptions& options) {
  SeededRng rng(derive_seed(options.seed, "sampling_freq"));
  const int n = 6;
  std::vector<double> logits(n);
  for (double& v : logits) v = rng.uniform(-1.5, 1.5);
  const std::vector<double> pmf = forward_softmax(logits);

  double worst_z = 0.0;
  for (double tau : {0.5, 1.0, 1.5, 2.0}) {
    const std::vector<double> tempered = temper(pmf, tau);
    std::vector<long long> counts(static_cast<size_t>(n), 0);
    for (int i = 0; i < options.sampling_draws; ++i) {
      counts[static_cast<size_t>(sample_categorical(tempered, rng))] += 1;
    }
    for (int k = 0; k < n; ++k) {
      const double p = tempered[static_cast<size_t>(k)];
      const double freq = static_cast<double>(counts[static_cast<size_t>(k)]) /
                          static_cast<double>(options.sampling_draws);
      const double sigma =
          std::sqrt(std::max(p * (1.0 - p) / options.sampling_draws, 1e-18));
      worst_z = std::max(worst_z, std::abs(freq - p) / sigma);
    }
  }
  return {"sampling_frequency", worst_z <= 4.0,
          format("worst |z| %.2f (limit %.1f)", worst_z, 4.0)};
}

std::vector<AuditCheck> run_audit(const AuditOptions& options) {
  return {
      audit_gradient_feedforward(options), audit_gradient_recurrent(options),
      audit_gradient_attention(options),   audit_bandit_no_baseline(options),
      audit_bandit_running_baseline(options), audit_bandit_fixed_baseline(options),
      audit_bandit_variance_reduction(options), audit_sampling_frequency(options),
  };
}

}  // namespace tpg
