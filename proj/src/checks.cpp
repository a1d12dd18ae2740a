#include "classteach/checks.hpp"

#include <cmath>

namespace classteach {

namespace {

double diag(const TraceRecord& rec, const char* key) {
  const auto it = rec.diagnostics.find(key);
  if (it == rec.diagnostics.end())
    throw InvalidInput(std::string("trace record lacks diagnostic '") + key + "'");
  return it->second;
}

template <typename BoundFn>
CheckSummary walk(const Trace& tr, BoundFn&& bound) {
  CheckSummary s;
  double prev = tr.initial_avg_sq_error;
  for (const auto& rec : tr.records) {
    const double limit = bound(rec, prev);
    const double excess = rec.avg_sq_error - limit;
    s.steps += 1;
    if (excess > 0.0) {
      s.violations += 1;
      s.max_excess = std::max(s.max_excess, excess);
    }
    prev = rec.avg_sq_error;
  }
  return s;
}

}  // namespace

CheckSummary check_ct_contraction(const Trace& tr, double slack) {
  return walk(tr, [slack](const TraceRecord& rec, double prev) {
    const double rate = diag(rec, "alpha_min") / diag(rec, "rank");
    return (1.0 - rate) * prev + slack;
  });
}

CheckSummary check_exact_it_decay(const Trace& tr, double rel_tol) {
  CheckSummary s;
  double prev = tr.initial_avg_sq_error;
  for (const auto& rec : tr.records) {
    s.steps += 1;
    if (prev > 0.0) {
      const double ratio = rec.avg_sq_error / prev;
      const double expected = 1.0 - diag(rec, "alpha");
      const double excess = std::abs(ratio - expected) - rel_tol;
      if (excess > 0.0) {
        s.violations += 1;
        s.max_excess = std::max(s.max_excess, excess);
      }
    }
    prev = rec.avg_sq_error;
  }
  return s;
}

CheckSummary check_noisy_state_contraction(const Trace& tr, double d_w,
                                           double delta_max, double slack) {
  return walk(tr, [=](const TraceRecord& rec, double prev) {
    const double rate = diag(rec, "alpha_min") / diag(rec, "rank");
    const double drift = 2.0 * (rate + diag(rec, "alpha_avg")) * d_w * delta_max;
    return (1.0 - rate) * prev + drift + slack;
  });
}

CheckSummary check_noisy_scatter_contraction(const Trace& tr, double slack) {
  return walk(tr, [slack](const TraceRecord& rec, double prev) {
    const double k = diag(rec, "rank");
    const double rate = diag(rec, "alpha_min") / k;
    return (1.0 - rate) * prev + (1.0 - 1.0 / k) * diag(rec, "lambda1_delta") + slack;
  });
}

CheckSummary check_pool_single_contraction(const Trace& tr, double slack) {
  return walk(tr, [slack](const TraceRecord& rec, double prev) {
    return (1.0 - diag(rec, "alignment") * diag(rec, "alpha")) * prev + slack;
  });
}

CheckSummary check_pool_class_contraction(const Trace& tr, double slack) {
  return walk(tr, [slack](const TraceRecord& rec, double prev) {
    const double rate =
        diag(rec, "alignment") * diag(rec, "alpha_min") / diag(rec, "rank");
    return (1.0 - rate) * prev + slack;
  });
}

CheckSummary check_gamma_validity(const Trace& tr, const std::vector<double>& etas,
                                  double d_x) {
  CheckSummary s;
  for (const auto& rec : tr.records) {
    s.steps += 1;
    bool bad = rec.gamma > d_x;
    double worst = rec.gamma - d_x;
    for (double eta : etas) {
      const double margin = 2.0 - eta * rec.gamma * rec.gamma;
      if (margin < 0.0) {
        bad = true;
        worst = std::max(worst, -margin);
      }
    }
    if (bad) {
      s.violations += 1;
      s.max_excess = std::max(s.max_excess, worst);
    }
  }
  return s;
}

CheckSummary check_labels_consistent(const Trace& tr, const Hypothesis& target) {
  CheckSummary s;
  for (const auto& rec : tr.records) {
    s.steps += 1;
    const double expected = target.dot(rec.example.x);
    if (!(expected == rec.example.y)) {
      s.violations += 1;
      s.max_excess = std::max(s.max_excess, std::abs(expected - rec.example.y));
    }
  }
  return s;
}

CheckSummary check_monotone_error(const Trace& tr) {
  CheckSummary s;
  double prev = tr.initial_avg_sq_error;
  for (const auto& rec : tr.records) {
    s.steps += 1;
    if (rec.avg_sq_error > prev) {
      s.violations += 1;
      s.max_excess = std::max(s.max_excess, rec.avg_sq_error - prev);
    }
    prev = rec.avg_sq_error;
  }
  return s;
}

}  // namespace classteach
