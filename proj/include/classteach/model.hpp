#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "classteach/errors.hpp"

namespace classteach {

// A hypothesis is a point in R^d; learners and the target live in the ball
// of radius d_w around the origin.
using Hypothesis = Eigen::VectorXd;

enum class LearnerKind { Deterministic, StochasticRate, Sgld };

struct Learner {
  double eta = 0.1;          // base learning rate, > 0
  Hypothesis state;          // current hypothesis w_j
  LearnerKind kind = LearnerKind::Deterministic;
  double sigma = 0.0;        // rate std-dev for StochasticRate
  double inv_beta = 0.0;     // temperature for Sgld
};

struct Classroom {
  std::vector<Learner> learners;
  double d_w = 1.0;  // hypothesis ball radius
  double d_x = 1.0;  // feature ball radius

  int size() const { return static_cast<int>(learners.size()); }
  Eigen::Index dim() const { return learners.empty() ? 0 : learners.front().state.size(); }

  double eta_max() const {
    double m = 0.0;
    for (const auto& l : learners) m = std::max(m, l.eta);
    return m;
  }
  double eta_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& l : learners) m = std::min(m, l.eta);
    return m;
  }

  void validate() const {
    if (learners.empty()) throw InvalidInput("classroom must hold at least one learner");
    if (!(d_w > 0.0) || !(d_x > 0.0)) throw InvalidInput("d_w and d_x must be positive");
    const Eigen::Index d = learners.front().state.size();
    for (const auto& l : learners) {
      if (!(l.eta > 0.0)) throw InvalidInput("learning rates must be positive");
      if (l.sigma < 0.0 || l.inv_beta < 0.0)
        throw InvalidInput("noise magnitudes must be nonnegative");
      if (l.state.size() != d) throw InvalidInput("learners disagree on dimension");
      if (!l.state.allFinite()) throw InvalidInput("learner state is not finite");
    }
  }
};

struct LabeledExample {
  Eigen::VectorXd x;
  double y = 0.0;
};

enum class RunStatus { ConvergedAvg, ConvergedAll, Budget };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ConvergedAvg: return "converged_avg";
    case RunStatus::ConvergedAll: return "converged_all";
    case RunStatus::Budget: return "budget";
  }
  return "unknown";
}

// One teaching iteration. avg_sq_error / per_learner_sq_error are the errors
// *after* the example was applied; the error before iteration 0 lives in
// Trace::initial_*.
struct TraceRecord {
  long t = 0;
  double avg_sq_error = 0.0;
  Eigen::VectorXd per_learner_sq_error;
  double gamma = 0.0;
  LabeledExample example;
  std::map<std::string, double> diagnostics;
};

struct Trace {
  double initial_avg_sq_error = 0.0;
  Eigen::VectorXd initial_per_learner_sq_error;
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::Budget;
  std::map<std::string, double> summary;  // run-level diagnostics

  long iterations() const { return static_cast<long>(records.size()); }
};

enum class ConvergenceMode { Avg, All };

// --- core operations -------------------------------------------------------

// Euclidean projection onto the ball of the given radius (exact radial
// rescale). The rescale loop re-checks the norm so the result is a true
// fixpoint: projecting twice returns the identical vector.
template <typename Derived>
Eigen::VectorXd project_ball(const Eigen::MatrixBase<Derived>& v, double radius) {
  if (!(radius > 0.0)) throw InvalidInput("project_ball: radius must be positive");
  Eigen::VectorXd out = v;
  if (!out.allFinite()) throw InvalidInput("project_ball: non-finite input");
  const double r2 = radius * radius;
  for (int pass = 0; pass < 128; ++pass) {
    const double n2 = out.squaredNorm();
    if (n2 <= r2) return out;
    double scale = radius / std::sqrt(n2);
    // The factor can round up to 1.0 when the norm sits within an ulp of the
    // radius; keep it strictly below 1 so every pass makes progress.
    if (scale >= 1.0) scale = std::nextafter(1.0, 0.0);
    out *= scale;
  }
  return out;
}

// Gradient of the squared loss l(<w,x>, y) = 0.5 (<w,x> - y)^2 in w.
template <typename DerivedW, typename DerivedX>
Eigen::VectorXd squared_loss_gradient(const Eigen::MatrixBase<DerivedW>& w,
                                      const Eigen::MatrixBase<DerivedX>& x,
                                      double y) {
  if (w.size() != x.size())
    throw InvalidInput("squared_loss_gradient: dimension mismatch");
  return (w.dot(x) - y) * x;
}

inline Eigen::VectorXd squared_loss_gradient(const Hypothesis& w,
                                             const LabeledExample& ex) {
  return squared_loss_gradient(w, ex.x, ex.y);
}

// One projected gradient step for a deterministic learner.
inline Learner learner_update(const Learner& l, const LabeledExample& ex, double d_w) {
  if (l.state.size() != ex.x.size())
    throw InvalidInput("learner_update: dimension mismatch");
  Learner out = l;
  const Eigen::VectorXd grad = (l.state.dot(ex.x) - ex.y) * ex.x;
  out.state = project_ball(l.state - l.eta * grad, d_w);
  return out;
}

inline Eigen::VectorXd per_learner_sq_errors(const Classroom& c, const Hypothesis& target) {
  Eigen::VectorXd e(c.size());
  for (int j = 0; j < c.size(); ++j)
    e[j] = (c.learners[j].state - target).squaredNorm();
  return e;
}

inline double avg_squared_error(const Classroom& c, const Hypothesis& target) {
  if (c.dim() != target.size())
    throw InvalidInput("avg_squared_error: dimension mismatch");
  return per_learner_sq_errors(c, target).mean();
}

// Convergence test on squared distances; comparisons are inclusive.
inline bool converged(const Classroom& c, const Hypothesis& target, double eps,
                      ConvergenceMode mode) {
  const Eigen::VectorXd e = per_learner_sq_errors(c, target);
  if (mode == ConvergenceMode::Avg) return e.mean() <= eps;
  return (e.array() <= eps).all();
}

}  // namespace classteach
