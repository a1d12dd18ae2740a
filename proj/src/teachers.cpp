#include "classteach/teachers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace classteach {

namespace {

constexpr double kRankTau = 1e-8;

void require_target(const Classroom& c, const Hypothesis& target) {
  c.validate();
  if (target.size() != c.dim())
    throw InvalidInput("target dimension does not match the classroom");
  if (!target.allFinite()) throw InvalidInput("target is not finite");
  if (target.norm() > c.d_w * (1.0 + 1e-12))
    throw InvalidInput("target lies outside the hypothesis ball");
}

double pick_gamma(const Classroom& c, const Hypothesis& target, GammaPolicy policy) {
  return policy == GammaPolicy::Static ? gamma_static(c) : gamma_dynamic(c, target);
}

Eigen::MatrixXd residual_matrix(const Classroom& c, const Hypothesis& target) {
  Eigen::MatrixXd r(c.dim(), c.size());
  for (int j = 0; j < c.size(); ++j) r.col(j) = c.learners[j].state - target;
  return r;
}

Eigen::VectorXd alphas_for(const Classroom& c, double gamma) {
  Eigen::VectorXd a(c.size());
  for (int j = 0; j < c.size(); ++j) a[j] = alpha(c.learners[j].eta, gamma);
  return a;
}

int active_terms(const Eigen::MatrixXd& residuals, const Eigen::VectorXd& coeffs) {
  int n = 0;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] > 0.0 && residuals.col(i).squaredNorm() > 0.0) ++n;
  return n;
}

void record_iteration(Trace& tr, long t, const Classroom& c, const Hypothesis& target,
                      const StepOutcome& step) {
  TraceRecord rec;
  rec.t = t;
  rec.per_learner_sq_error = per_learner_sq_errors(c, target);
  rec.avg_sq_error = rec.per_learner_sq_error.mean();
  rec.gamma = step.gamma;
  rec.example = step.example;
  rec.diagnostics = step.diagnostics;
  if (!std::isfinite(rec.avg_sq_error) || !rec.example.x.allFinite() ||
      !std::isfinite(rec.example.y))
    throw InvalidInput("non-finite value produced during teaching");
  tr.records.push_back(std::move(rec));
}

void init_trace(Trace& tr, const Classroom& c, const Hypothesis& target) {
  tr.initial_per_learner_sq_error = per_learner_sq_errors(c, target);
  tr.initial_avg_sq_error = tr.initial_per_learner_sq_error.mean();
}

RunStatus converged_status(ConvergenceMode mode) {
  return mode == ConvergenceMode::Avg ? RunStatus::ConvergedAvg
                                      : RunStatus::ConvergedAll;
}

// Direction + diagnostics for a weighted-residual scatter given as factors.
// Uses the closed rank-one form / Gram path / dense power iteration and fills
// lambda1, rank, alpha_min, alpha_avg.
StepOutcome spectral_direction(const Eigen::MatrixXd& residuals,
                               const Eigen::VectorXd& alphas, double gamma,
                               const Hypothesis& target, Rng& rng) {
  const int n = static_cast<int>(residuals.cols());
  const Eigen::Index d = residuals.rows();
  const Eigen::VectorXd coeffs = alphas / static_cast<double>(n);

  EigenPair top;
  double rank;
  if (active_terms(residuals, coeffs) < d) {
    top = top_eigenpair_factors(residuals, coeffs, rng);
    rank = static_cast<double>(numeric_rank_factors(residuals, coeffs, kRankTau));
  } else {
    const ScatterMatrix w = build_scatter_residuals(residuals, alphas);
    top = top_eigenpair(w, rng);
    rank = static_cast<double>(numeric_rank(w, kRankTau));
  }

  StepOutcome out;
  out.gamma = gamma;
  out.example.x = gamma * top.vector;
  out.example.y = target.dot(out.example.x);
  out.diagnostics["lambda1"] = top.lambda;
  out.diagnostics["rank"] = rank;
  out.diagnostics["alpha_min"] = alphas.minCoeff();
  out.diagnostics["alpha_avg"] = alphas.mean();
  out.diagnostics["power_converged"] = top.converged ? 1.0 : 0.0;
  out.diagnostics["power_iterations"] = static_cast<double>(top.iterations);
  for (int j = 0; j < n; ++j)
    out.diagnostics["alpha_" + std::to_string(j)] = alphas[j];
  return out;
}

}  // namespace

double alpha(double eta, double gamma) {
  const double s = eta * gamma * gamma;
  return s * (2.0 - s);
}

double bar_alpha(double gamma, double eta_bar, double sigma, long t) {
  if (t < 2)
    throw InsufficientHistory("bar_alpha: needs at least one observed rate (t >= 2)");
  const double g2 = gamma * gamma;
  const double frac = static_cast<double>(t - 2) / static_cast<double>(t - 1);
  return 2.0 * g2 * eta_bar - g2 * g2 * (frac * sigma * sigma + eta_bar * eta_bar);
}

double gamma_static(const Classroom& c) {
  return std::min(1.0 / std::sqrt(c.eta_max()), c.d_x);
}

double gamma_dynamic_residuals(const std::vector<double>& etas,
                               const Eigen::MatrixXd& residuals, double d_x) {
  double eta_max = 0.0, eta_min = std::numeric_limits<double>::infinity();
  for (double e : etas) {
    eta_max = std::max(eta_max, e);
    eta_min = std::min(eta_min, e);
  }
  if (eta_max > 2.0 * eta_min)
    throw PartitionRequired("dynamic step size unsafe: eta_max > 2 * eta_min");

  double num = 0.0, den = 0.0;
  for (size_t j = 0; j < etas.size(); ++j) {
    const double e2 = residuals.col(static_cast<Eigen::Index>(j)).squaredNorm();
    num += etas[j] * e2;
    den += etas[j] * etas[j] * e2;
  }
  if (den <= 0.0)
    throw DegenerateClassroom("dynamic step size undefined: all residuals vanish");

  double g = std::min(std::sqrt(num / den), d_x);
  // Rounding at the eta_max = 2 eta_min edge must not break the step-size
  // guard; back off by ulps until 2 - eta_max * g^2 >= 0 holds exactly.
  while (2.0 - eta_max * g * g < 0.0) g = std::nextafter(g, 0.0);
  return g;
}

double gamma_dynamic(const Classroom& c, const Hypothesis& target) {
  std::vector<double> etas(static_cast<size_t>(c.size()));
  for (int j = 0; j < c.size(); ++j) etas[static_cast<size_t>(j)] = c.learners[j].eta;
  return gamma_dynamic_residuals(etas, residual_matrix(c, target), c.d_x);
}

ScatterMatrix build_scatter_residuals(const Eigen::MatrixXd& residuals,
                                      const Eigen::VectorXd& alphas) {
  if (alphas.size() != residuals.cols())
    throw InvalidInput("build_scatter: one weight per residual required");
  const double n = static_cast<double>(residuals.cols());
  ScatterMatrix w = zero_scatter(residuals.rows());
  for (Eigen::Index j = 0; j < residuals.cols(); ++j)
    w = accumulate_rank_one(w, alphas[j] / n, residuals.col(j));
  return w;
}

ScatterMatrix build_scatter(const Classroom& c, const Hypothesis& target,
                            double gamma, const Eigen::VectorXd& alphas) {
  (void)gamma;  // weights already carry the magnitude
  if (target.size() != c.dim()) throw InvalidInput("build_scatter: dimension mismatch");
  return build_scatter_residuals(residual_matrix(c, target), alphas);
}

StepOutcome ct_step_with_gamma(Classroom& c, const Hypothesis& target, double gamma,
                               Rng& rng) {
  const Eigen::MatrixXd residuals = residual_matrix(c, target);
  const Eigen::VectorXd alphas = alphas_for(c, gamma);
  StepOutcome out = spectral_direction(residuals, alphas, gamma, target, rng);
  for (auto& l : c.learners) l = learner_update(l, out.example, c.d_w);
  return out;
}

StepOutcome ct_step(Classroom& c, const Hypothesis& target, const TeachConfig& cfg,
                    Rng& rng) {
  return ct_step_with_gamma(c, target, pick_gamma(c, target, cfg.gamma_policy), rng);
}

Trace ct_teach(Classroom c, const Hypothesis& target, const TeachConfig& cfg) {
  require_target(c, target);
  Rng rng(cfg.seed);
  Trace tr;
  init_trace(tr, c, target);
  long t = 0;
  for (;;) {
    if (converged(c, target, cfg.eps, cfg.mode)) {
      tr.status = converged_status(cfg.mode);
      return tr;
    }
    if (t >= cfg.max_iters) {
      tr.status = RunStatus::Budget;
      return tr;
    }
    const StepOutcome step = ct_step(c, target, cfg, rng);
    record_iteration(tr, t, c, target, step);
    ++t;
  }
}

LabeledExample it_synthesize(const Learner& l, const Hypothesis& target, double gamma) {
  if (l.state.size() != target.size())
    throw InvalidInput("it_synthesize: dimension mismatch");
  const Eigen::VectorXd r = l.state - target;
  if (r.squaredNorm() <= 0.0)
    throw DegenerateLearner("it_synthesize: learner already at the target");
  LabeledExample ex;
  const Eigen::VectorXd direction = r / r.norm();
  ex.x = gamma * direction;
  ex.y = target.dot(ex.x);
  return ex;
}

std::vector<Trace> it_teach(const Classroom& c, const Hypothesis& target,
                            const TeachConfig& cfg) {
  require_target(c, target);
  std::vector<Trace> traces;
  traces.reserve(static_cast<size_t>(c.size()));
  for (int j = 0; j < c.size(); ++j) {
    Classroom solo;
    solo.learners = {c.learners[j]};
    solo.d_w = c.d_w;
    solo.d_x = c.d_x;
    Trace tr;
    init_trace(tr, solo, target);
    long t = 0;
    for (;;) {
      if (converged(solo, target, cfg.eps, cfg.mode)) {
        tr.status = converged_status(cfg.mode);
        break;
      }
      if (t >= cfg.max_iters) {
        tr.status = RunStatus::Budget;
        break;
      }
      const double gamma = pick_gamma(solo, target, cfg.gamma_policy);
      const LabeledExample ex = it_synthesize(solo.learners[0], target, gamma);
      solo.learners[0] = learner_update(solo.learners[0], ex, solo.d_w);
      StepOutcome step;
      step.gamma = gamma;
      step.example = ex;
      step.diagnostics["alpha"] = alpha(solo.learners[0].eta, gamma);
      record_iteration(tr, t, solo, target, step);
      ++t;
    }
    traces.push_back(std::move(tr));
  }
  return traces;
}

std::vector<Hypothesis> observe_noisy_states(const Classroom& c, double delta_max,
                                             Rng& rng) {
  if (delta_max < 0.0) throw InvalidInput("observe_noisy_states: delta_max < 0");
  std::vector<Hypothesis> out;
  out.reserve(static_cast<size_t>(c.size()));
  for (const auto& l : c.learners) out.push_back(l.state);
  if (delta_max == 0.0) return out;
  for (auto& w : out) {
    const Eigen::VectorXd u = rng.unit_vector(w.size());
    const double r = delta_max * rng.uniform();
    w += r * u;
  }
  return out;
}

StepOutcome noisy_state_step(Classroom& c, const Hypothesis& target, double gamma,
                             double delta_max, Rng& rng, GammaPolicy policy) {
  const std::vector<Hypothesis> observed = observe_noisy_states(c, delta_max, rng);
  Eigen::MatrixXd residuals(c.dim(), c.size());
  for (int j = 0; j < c.size(); ++j)
    residuals.col(j) = observed[static_cast<size_t>(j)] - target;

  // With the dynamic policy the teacher can only weigh what it observes.
  if (policy == GammaPolicy::Dynamic) {
    std::vector<double> etas(static_cast<size_t>(c.size()));
    for (int j = 0; j < c.size(); ++j) etas[static_cast<size_t>(j)] = c.learners[j].eta;
    gamma = gamma_dynamic_residuals(etas, residuals, c.d_x);
  }

  const Eigen::VectorXd alphas = alphas_for(c, gamma);
  StepOutcome out = spectral_direction(residuals, alphas, gamma, target, rng);
  for (auto& l : c.learners) l = learner_update(l, out.example, c.d_w);
  return out;
}

Trace ct_teach_noisy_state(Classroom c, const Hypothesis& target,
                           const TeachConfig& cfg, double delta_max) {
  require_target(c, target);
  if (delta_max < 0.0) throw InvalidInput("ct_teach_noisy_state: delta_max < 0");
  Rng rng(cfg.seed);
  Trace tr;
  init_trace(tr, c, target);
  long t = 0;
  for (;;) {
    if (converged(c, target, cfg.eps, cfg.mode)) {
      tr.status = converged_status(cfg.mode);
      return tr;
    }
    if (t >= cfg.max_iters) {
      tr.status = RunStatus::Budget;
      return tr;
    }
    const double gamma =
        cfg.gamma_policy == GammaPolicy::Static ? gamma_static(c) : 0.0;
    const StepOutcome step =
        noisy_state_step(c, target, gamma, delta_max, rng, cfg.gamma_policy);
    record_iteration(tr, t, c, target, step);
    ++t;
  }
}

PsdPerturbation sample_psd_perturbation(Eigen::Index d, double lambda_max, Rng& rng) {
  if (lambda_max < 0.0) throw InvalidInput("sample_psd_perturbation: lambda_max < 0");
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index col = 0; col < d; ++col) g.col(col) = rng.normal_vector(d);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  PsdPerturbation out;
  out.matrix = zero_scatter(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double u = lambda_max * rng.uniform();
    out.matrix = accumulate_rank_one(out.matrix, u, q.col(i));
    out.lambda1 = std::max(out.lambda1, u);
  }
  return out;
}

StepOutcome noisy_scatter_step(Classroom& c, const Hypothesis& target, double gamma,
                               double lambda_max, Rng& rng) {
  const Eigen::MatrixXd residuals = residual_matrix(c, target);
  const Eigen::VectorXd alphas = alphas_for(c, gamma);
  ScatterMatrix w = build_scatter_residuals(residuals, alphas);
  double lambda1_delta = 0.0;
  if (lambda_max > 0.0) {
    const PsdPerturbation delta = sample_psd_perturbation(c.dim(), lambda_max, rng);
    lambda1_delta = delta.lambda1;
    w += delta.matrix;
  }

  const EigenPair top = top_eigenpair(w, rng);
  StepOutcome out;
  out.gamma = gamma;
  out.example.x = gamma * top.vector;
  out.example.y = target.dot(out.example.x);
  out.diagnostics["lambda1"] = top.lambda;
  out.diagnostics["rank"] = static_cast<double>(numeric_rank(w, kRankTau));
  out.diagnostics["alpha_min"] = alphas.minCoeff();
  out.diagnostics["alpha_avg"] = alphas.mean();
  out.diagnostics["lambda1_delta"] = lambda1_delta;
  out.diagnostics["power_converged"] = top.converged ? 1.0 : 0.0;
  out.diagnostics["power_iterations"] = static_cast<double>(top.iterations);
  for (auto& l : c.learners) l = learner_update(l, out.example, c.d_w);
  return out;
}

Trace ct_teach_noisy_scatter(Classroom c, const Hypothesis& target,
                             const TeachConfig& cfg, double lambda_max) {
  require_target(c, target);
  if (lambda_max < 0.0) throw InvalidInput("ct_teach_noisy_scatter: lambda_max < 0");
  Rng rng(cfg.seed);
  Trace tr;
  init_trace(tr, c, target);
  long t = 0;
  for (;;) {
    if (converged(c, target, cfg.eps, cfg.mode)) {
      tr.status = converged_status(cfg.mode);
      return tr;
    }
    if (t >= cfg.max_iters) {
      tr.status = RunStatus::Budget;
      return tr;
    }
    const double gamma = pick_gamma(c, target, cfg.gamma_policy);
    const StepOutcome step = noisy_scatter_step(c, target, gamma, lambda_max, rng);
    record_iteration(tr, t, c, target, step);
    ++t;
  }
}

std::pair<Learner, double> stochastic_rate_update(const Learner& l,
                                                  const LabeledExample& ex,
                                                  double d_w, Rng& rng) {
  if (l.kind != LearnerKind::StochasticRate)
    throw InvalidInput("stochastic_rate_update: learner kind mismatch");
  if (l.state.size() != ex.x.size())
    throw InvalidInput("stochastic_rate_update: dimension mismatch");
  double realized = l.eta;
  if (l.sigma > 0.0) realized = l.eta + l.sigma * rng.normal();
  Learner out = l;
  const Eigen::VectorXd grad = (l.state.dot(ex.x) - ex.y) * ex.x;
  out.state = project_ball(l.state - realized * grad, d_w);
  return {out, realized};
}

double stochastic_rate_gamma_cap(const Classroom& c, double sigma) {
  double cap2 = std::numeric_limits<double>::infinity();
  for (const auto& l : c.learners)
    cap2 = std::min(cap2, 2.0 * l.eta / (sigma * sigma + l.eta * l.eta));
  return std::sqrt(cap2);
}

StepOutcome stochastic_rate_step(Classroom& c, const Hypothesis& target,
                                 double gamma, RateHistory& history, double sigma,
                                 Rng& rng) {
  const Eigen::MatrixXd residuals = residual_matrix(c, target);
  const int n = c.size();

  Eigen::VectorXd bar(n);
  Eigen::VectorXd true_alpha(n);
  const double g2 = gamma * gamma;
  for (int j = 0; j < n; ++j) {
    const double eta = c.learners[j].eta;
    true_alpha[j] = 2.0 * g2 * eta - g2 * g2 * (sigma * sigma + eta * eta);
    bar[j] = history.count == 0
                 ? alpha(eta, gamma)  // means known a priori, no variance term yet
                 : bar_alpha(gamma, history.mean(j), sigma, history.count + 1);
  }

  const ScatterMatrix w = build_scatter_residuals(residuals, bar);
  const EigenPair top = top_eigenpair(w, rng);

  StepOutcome out;
  out.gamma = gamma;
  out.example.x = gamma * top.vector;
  out.example.y = target.dot(out.example.x);
  out.diagnostics["lambda1"] = top.lambda;
  out.diagnostics["rank"] = static_cast<double>(numeric_rank(w, kRankTau));
  out.diagnostics["alpha_min"] = true_alpha.minCoeff();
  out.diagnostics["alpha_avg"] = true_alpha.mean();
  out.diagnostics["bar_alpha_min"] = bar.minCoeff();
  out.diagnostics["beta_min"] = (true_alpha.array() / bar.array()).minCoeff();
  out.diagnostics["power_converged"] = top.converged ? 1.0 : 0.0;
  out.diagnostics["power_iterations"] = static_cast<double>(top.iterations);

  for (int j = 0; j < n; ++j) {
    auto [updated, realized] = stochastic_rate_update(c.learners[j], out.example, c.d_w, rng);
    c.learners[j] = updated;
    history.sums[j] += realized;
  }
  history.count += 1;
  return out;
}

Trace ct_teach_stochastic_rate(Classroom c, const Hypothesis& target,
                               const TeachConfig& cfg, double sigma) {
  require_target(c, target);
  if (sigma < 0.0) throw InvalidInput("ct_teach_stochastic_rate: sigma < 0");
  for (auto& l : c.learners) {
    if (l.kind != LearnerKind::StochasticRate)
      throw InvalidInput("ct_teach_stochastic_rate: learners must be StochasticRate");
    l.sigma = sigma;
  }
  Rng rng(cfg.seed);
  Trace tr;
  init_trace(tr, c, target);
  RateHistory history(c.size());
  const double cap = stochastic_rate_gamma_cap(c, sigma);
  long t = 0;
  for (;;) {
    if (converged(c, target, cfg.eps, cfg.mode)) {
      tr.status = converged_status(cfg.mode);
      return tr;
    }
    if (t >= cfg.max_iters) {
      tr.status = RunStatus::Budget;
      return tr;
    }
    const double gamma = std::min(pick_gamma(c, target, cfg.gamma_policy), cap);
    const StepOutcome step = stochastic_rate_step(c, target, gamma, history, sigma, rng);
    record_iteration(tr, t, c, target, step);
    ++t;
  }
}

Learner sgld_update(const Learner& l, const LabeledExample& ex, double d_w, Rng& rng) {
  if (l.kind != LearnerKind::Sgld)
    throw InvalidInput("sgld_update: learner kind mismatch");
  if (l.state.size() != ex.x.size())
    throw InvalidInput("sgld_update: dimension mismatch");
  Learner out = l;
  const Eigen::VectorXd grad = (l.state.dot(ex.x) - ex.y) * ex.x;
  if (l.inv_beta > 0.0) {
    const Eigen::VectorXd xi = rng.normal_vector(l.state.size());
    out.state =
        project_ball(l.state - l.eta * grad + std::sqrt(2.0 * l.eta * l.inv_beta) * xi, d_w);
  } else {
    out.state = project_ball(l.state - l.eta * grad, d_w);
  }
  return out;
}

StepOutcome sgld_step(Classroom& c, const Hypothesis& target, double gamma,
                      double inv_beta, Rng& rng) {
  const Eigen::MatrixXd residuals = residual_matrix(c, target);
  const Eigen::VectorXd alphas = alphas_for(c, gamma);
  StepOutcome out = spectral_direction(residuals, alphas, gamma, target, rng);
  for (auto& l : c.learners) {
    l.inv_beta = inv_beta;
    l = sgld_update(l, out.example, c.d_w, rng);
  }
  return out;
}

Trace ct_teach_sgld(Classroom c, const Hypothesis& target, const TeachConfig& cfg,
                    double inv_beta) {
  require_target(c, target);
  if (inv_beta < 0.0) throw InvalidInput("ct_teach_sgld: inv_beta < 0");
  for (auto& l : c.learners) {
    if (l.kind != LearnerKind::Sgld)
      throw InvalidInput("ct_teach_sgld: learners must be Sgld");
    l.inv_beta = inv_beta;
  }
  Rng rng(cfg.seed);
  Trace tr;
  init_trace(tr, c, target);
  long t = 0;
  for (;;) {
    if (converged(c, target, cfg.eps, cfg.mode)) {
      tr.status = converged_status(cfg.mode);
      return tr;
    }
    if (t >= cfg.max_iters) {
      tr.status = RunStatus::Budget;
      return tr;
    }
    const double gamma = pick_gamma(c, target, cfg.gamma_policy);
    const StepOutcome step = sgld_step(c, target, gamma, inv_beta, rng);
    record_iteration(tr, t, c, target, step);
    ++t;
  }
}

double noisy_state_delta_bound(const Classroom& c, double gamma, double eps) {
  const Eigen::VectorXd a = alphas_for(c, gamma);
  const double amin = a.minCoeff();
  const double aavg = a.mean();
  if (amin <= 0.0) throw InvalidInput("noisy_state_delta_bound: nonpositive weight");
  const double k = static_cast<double>(std::min<long>(c.dim(), c.size()));
  return eps / (4.0 * (k * aavg / amin + 1.0) * c.d_w);
}

double noisy_scatter_lambda_bound(const Classroom& c, double gamma, double eps) {
  const Eigen::VectorXd a = alphas_for(c, gamma);
  const double amin = a.minCoeff();
  if (amin <= 0.0) throw InvalidInput("noisy_scatter_lambda_bound: nonpositive weight");
  const double k = static_cast<double>(c.dim());  // perturbed scatter is full rank
  if (k <= 1.0) return std::numeric_limits<double>::infinity();
  return amin * eps / (2.0 * (k - 1.0));
}

double sgld_inv_beta_bound(const Classroom& c, double gamma, double eps) {
  const Eigen::VectorXd a = alphas_for(c, gamma);
  const double amin = a.minCoeff();
  if (amin <= 0.0) throw InvalidInput("sgld_inv_beta_bound: nonpositive weight");
  double eta_avg = 0.0;
  for (const auto& l : c.learners) eta_avg += l.eta;
  eta_avg /= static_cast<double>(c.size());
  const double k = static_cast<double>(std::min<long>(c.dim(), c.size()));
  const double d = static_cast<double>(c.dim());
  return amin * eps / (4.0 * eta_avg * k * d);
}

}  // namespace classteach
