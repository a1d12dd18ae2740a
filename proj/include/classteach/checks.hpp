#pragma once

#include <vector>

#include "classteach/model.hpp"

namespace classteach {

// Per-step inequality audits over a trace. Each audit walks the recorded
// error sequence (initial error, then one entry per iteration) and compares
// against the bound reconstructed from the step diagnostics.
struct CheckSummary {
  long steps = 0;
  long violations = 0;
  double max_excess = 0.0;  // worst bound overshoot observed

  bool ok() const { return violations == 0; }
  void merge(const CheckSummary& o) {
    steps += o.steps;
    violations += o.violations;
    max_excess = std::max(max_excess, o.max_excess);
  }
};

// err2' <= (1 - alpha_min / rank) * err2 + slack.
CheckSummary check_ct_contraction(const Trace& tr, double slack = 1e-9);

// Single-learner trace: err2'/err2 equals 1 - alpha to within rel_tol.
CheckSummary check_exact_it_decay(const Trace& tr, double rel_tol = 1e-9);

// err2' <= (1 - a/k) err2 + 2 (a/k + alpha_avg) d_w delta_max + slack.
CheckSummary check_noisy_state_contraction(const Trace& tr, double d_w,
                                           double delta_max, double slack = 1e-9);

// err2' <= (1 - a/k) err2 + (1 - 1/k) lambda1_delta + slack.
CheckSummary check_noisy_scatter_contraction(const Trace& tr, double slack = 1e-9);

// err2' <= (1 - alignment * alpha) err2 + slack (single learner pool).
CheckSummary check_pool_single_contraction(const Trace& tr, double slack = 1e-9);

// err2' <= (1 - alignment * alpha_min / rank) err2 + slack (classroom pool).
CheckSummary check_pool_class_contraction(const Trace& tr, double slack = 1e-9);

// Every recorded magnitude satisfies gamma <= d_x and 2 - eta * gamma^2 >= 0.
CheckSummary check_gamma_validity(const Trace& tr, const std::vector<double>& etas,
                                  double d_x);

// Every recorded label reproduces <target, x> bit for bit.
CheckSummary check_labels_consistent(const Trace& tr, const Hypothesis& target);

// Average error never increases.
CheckSummary check_monotone_error(const Trace& tr);

}  // namespace classteach
