#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tpg {

struct AuditCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct AuditOptions {
  std::uint64_t seed = 1;
  int gradient_draws = 100;      // random parameter/input draws per gradient suite
  int bandit_samples = 200000;   // episodes per estimator experiment
  int sampling_draws = 100000;   // draws per temperature in the frequency check
  // Fault injection for exercising the failure path: adds a bogus constant to
  // one analytic gradient entry before the comparison.
  bool corrupt_gradient = false;
};

// Gradient checks against central differences: a feedforward chain at 1e-4,
// a multi-step decoder unroll and the attention guesser at 1e-3.
AuditCheck audit_gradient_feedforward(const AuditOptions& options);
AuditCheck audit_gradient_recurrent(const AuditOptions& options);
AuditCheck audit_gradient_attention(const AuditOptions& options);

// 5-armed bandit with deterministic per-arm rewards and a linear-softmax
// policy, where the true policy gradient has a closed form. The empirical
// mean of (r - b) * dln pi(a)/dw must sit within 3 standard errors of the
// truth, and subtracting a baseline must strictly shrink the summed
// per-component variance.
AuditCheck audit_bandit_no_baseline(const AuditOptions& options);
AuditCheck audit_bandit_running_baseline(const AuditOptions& options);
AuditCheck audit_bandit_fixed_baseline(const AuditOptions& options);
AuditCheck audit_bandit_variance_reduction(const AuditOptions& options);

// Empirical frequencies of tempered sampling against the tempered pmf.
AuditCheck audit_sampling_frequency(const AuditOptions& options);

std::vector<AuditCheck> run_audit(const AuditOptions& options);

}  // namespace tpg
