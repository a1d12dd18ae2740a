#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "classteach/model.hpp"
#include "classteach/rng.hpp"
#include "classteach/spectral.hpp"

namespace classteach {

enum class GammaPolicy { Static, Dynamic };

struct TeachConfig {
  double eps = 0.1;
  ConvergenceMode mode = ConvergenceMode::Avg;
  GammaPolicy gamma_policy = GammaPolicy::Static;
  long max_iters = 100000;
  std::uint64_t seed = 0;
};

enum class NoiseKind { None, NoisyState, NoisyScatter, StochasticRate, Sgld };

// magnitude holds delta_max / lambda_max / sigma / inv_beta per kind.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double magnitude = 0.0;
};

// Per-learner per-step contraction weight: eta * gamma^2 * (2 - eta * gamma^2).
double alpha(double eta, double gamma);

// History-estimated weight for rate-noise teaching. t counts teaching rounds
// starting at 1, so a history of length t-1 >= 1 exists; throws
// InsufficientHistory for t < 2.
double bar_alpha(double gamma, double eta_bar, double sigma, long t);

// Shared-magnitude choices. Static works for any classroom; dynamic requires
// eta_max <= 2 * eta_min (PartitionRequired otherwise) and at least one
// learner away from the target (DegenerateClassroom otherwise).
double gamma_static(const Classroom& c);
double gamma_dynamic(const Classroom& c, const Hypothesis& target);
double gamma_dynamic_residuals(const std::vector<double>& etas,
                               const Eigen::MatrixXd& residuals, double d_x);

// (1/N) * sum_j alphas[j] * w_hat_j w_hat_j^T with residuals w_j - target.
ScatterMatrix build_scatter(const Classroom& c, const Hypothesis& target,
                            double gamma, const Eigen::VectorXd& alphas);
ScatterMatrix build_scatter_residuals(const Eigen::MatrixXd& residuals,
                                      const Eigen::VectorXd& alphas);

// Diagnostics keys shared by the step functions (all map to doubles):
//   lambda1, rank, alpha_min, alpha_avg      every synthesis step
//   alpha_<j>                                per-learner contraction weights
//   power_converged, power_iterations        dense eigen path only
//   lambda1_delta                            scatter-noise steps
//   bar_alpha_min, beta_min                  rate-noise steps
struct StepOutcome {
  LabeledExample example;
  double gamma = 0.0;
  std::map<std::string, double> diagnostics;
};

// One round of classroom teaching: spectral direction from the weighted
// residual scatter, shared example, projected updates for every learner.
StepOutcome ct_step(Classroom& c, const Hypothesis& target,
                    const TeachConfig& cfg, Rng& rng);
StepOutcome ct_step_with_gamma(Classroom& c, const Hypothesis& target,
                               double gamma, Rng& rng);

Trace ct_teach(Classroom c, const Hypothesis& target, const TeachConfig& cfg);

// Personalized example along the learner's own residual direction.
LabeledExample it_synthesize(const Learner& l, const Hypothesis& target, double gamma);

// Teaches each learner independently to its own eps.
std::vector<Trace> it_teach(const Classroom& c, const Hypothesis& target,
                            const TeachConfig& cfg);

// Observed states w_j + delta_j, ||delta_j|| <= delta_max (radius uniform in
// [0, delta_max), direction uniform on the sphere). delta_max == 0 copies the
// states without consuming the generator.
std::vector<Hypothesis> observe_noisy_states(const Classroom& c, double delta_max,
                                             Rng& rng);

StepOutcome noisy_state_step(Classroom& c, const Hypothesis& target, double gamma,
                             double delta_max, Rng& rng,
                             GammaPolicy policy = GammaPolicy::Static);
Trace ct_teach_noisy_state(Classroom c, const Hypothesis& target,
                           const TeachConfig& cfg, double delta_max);

// Random symmetric PSD perturbation Q diag(u) Q^T with u uniform in
// [0, lambda_max); Q from the QR factorization of a Gaussian matrix.
// lambda1 is the largest sampled spectrum entry, max(u).
struct PsdPerturbation {
  ScatterMatrix matrix;
  double lambda1 = 0.0;
};
PsdPerturbation sample_psd_perturbation(Eigen::Index d, double lambda_max, Rng& rng);

StepOutcome noisy_scatter_step(Classroom& c, const Hypothesis& target, double gamma,
                               double lambda_max, Rng& rng);
Trace ct_teach_noisy_scatter(Classroom c, const Hypothesis& target,
                             const TeachConfig& cfg, double lambda_max);

// Projected step with a rate drawn from N(eta_j, sigma) (not truncated).
// Returns the updated learner and the realized rate. sigma == 0 draws nothing.
std::pair<Learner, double> stochastic_rate_update(const Learner& l,
                                                  const LabeledExample& ex,
                                                  double d_w, Rng& rng);

// Running history of realized rates, shared across the classroom.
struct RateHistory {
  Eigen::VectorXd sums;  // per-learner sums of realized rates
  long count = 0;        // rounds recorded

  explicit RateHistory(int n) : sums(Eigen::VectorXd::Zero(n)) {}
  double mean(int j) const { return sums[j] / static_cast<double>(count); }
};

// Largest magnitude satisfying the rate-noise step-size guard
// gamma^2 <= 2 eta_j / (sigma^2 + eta_j^2) for every learner.
double stochastic_rate_gamma_cap(const Classroom& c, double sigma);

StepOutcome stochastic_rate_step(Classroom& c, const Hypothesis& target,
                                 double gamma, RateHistory& history, double sigma,
                                 Rng& rng);
Trace ct_teach_stochastic_rate(Classroom c, const Hypothesis& target,
                               const TeachConfig& cfg, double sigma);

// Langevin step: w - eta * grad + sqrt(2 eta / beta) * xi, then projection.
// inv_beta == 0 draws nothing and equals learner_update.
Learner sgld_update(const Learner& l, const LabeledExample& ex, double d_w, Rng& rng);

StepOutcome sgld_step(Classroom& c, const Hypothesis& target, double gamma,
                      double inv_beta, Rng& rng);
Trace ct_teach_sgld(Classroom c, const Hypothesis& target, const TeachConfig& cfg,
                    double inv_beta);

// Admissible noise magnitudes under which the robust teachers still carry a
// convergence guarantee to the given accuracy (worst-case rank assumed).
double noisy_state_delta_bound(const Classroom& c, double gamma, double eps);
double noisy_scatter_lambda_bound(const Classroom& c, double gamma, double eps);
double sgld_inv_beta_bound(const Classroom& c, double gamma, double eps);

}  // namespace classteach
