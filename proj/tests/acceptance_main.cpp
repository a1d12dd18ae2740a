// Acceptance suite: end-to-end guarantees of the teaching library, one
// criterion per function, one pass/fail line each. Run all criteria with no
// arguments or a single one with --only <k>.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <classteach/checks.hpp>
#include <classteach/harness.hpp>

using namespace classteach;

namespace {

struct Criterion {
  int id;
  const char* summary;
  std::function<bool(std::string&)> fn;
};

Classroom random_room(int n, Eigen::Index d, double eta_lo, double eta_hi, Rng& rng,
                      double d_w = 4.0, double d_x = 2.0) {
  Classroom c;
  c.d_w = d_w;
  c.d_x = d_x;
  for (int j = 0; j < n; ++j) {
    Learner l;
    l.eta = eta_lo == eta_hi ? eta_lo : rng.uniform(eta_lo, eta_hi);
    l.state = rng.ball_vector(d, d_w);
    c.learners.push_back(l);
  }
  return c;
}

std::vector<double> etas_of(const Classroom& c) {
  std::vector<double> e;
  for (const auto& l : c.learners) e.push_back(l.eta);
  return e;
}

double final_error(const Trace& tr) {
  return tr.records.empty() ? tr.initial_avg_sq_error : tr.records.back().avg_sq_error;
}

// 1. Noise-free classroom teaching obeys the per-step spectral contraction on
//    50 random classrooms under both magnitude policies.
bool criterion_contraction(std::string& detail) {
  Rng seeder(101);
  long steps = 0;
  for (int s = 0; s < 50; ++s) {
    const int n = 1 + static_cast<int>(seeder.uniform_int(50));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seeder.uniform_int(10));
    const bool narrow = s % 2 == 0;
    const double lo = 0.05 + 0.1 * seeder.uniform();
    Classroom c = random_room(n, d, lo, narrow ? 1.9 * lo : 5.0 * lo, seeder);
    const Hypothesis target = seeder.ball_vector(d, 1.0);

    TeachConfig cfg;
    cfg.eps = 0.05;
    cfg.max_iters = 5000;
    cfg.seed = seeder.next();
    cfg.gamma_policy = narrow ? GammaPolicy::Dynamic : GammaPolicy::Static;

    const Trace tr = ct_teach(c, target, cfg);
    const CheckSummary sum = check_ct_contraction(tr, 1e-9);
    steps += sum.steps;
    if (!sum.ok() || tr.status == RunStatus::Budget) {
      detail = "seed " + std::to_string(s) + ": " + std::to_string(sum.violations) +
               " violations, worst excess " + format_double(sum.max_excess);
      return false;
    }
    const CheckSummary gam = check_gamma_validity(tr, etas_of(c), c.d_x);
    if (!gam.ok()) {
      detail = "seed " + std::to_string(s) + ": magnitude guard violated";
      return false;
    }
  }
  detail = std::to_string(steps) + " steps across 50 runs within 1e-9";
  return true;
}

// 2. Individual teaching decays squared error by exactly (1 - alpha) per step
//    when the projection never engages.
bool criterion_it_exact(std::string& detail) {
  Rng seeder(102);
  long steps = 0;
  for (int s = 0; s < 20; ++s) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seeder.uniform_int(8));
    Classroom c = random_room(4, d, 0.05, 0.3, seeder, 100.0, 2.0);
    const Hypothesis target = seeder.ball_vector(d, 1.0);
    TeachConfig cfg;
    cfg.eps = 1e-8;
    cfg.seed = seeder.next();
    for (const auto& tr : it_teach(c, target, cfg)) {
      const CheckSummary sum = check_exact_it_decay(tr, 1e-9);
      steps += sum.steps;
      if (!sum.ok()) {
        detail = "seed " + std::to_string(s) + ": worst deviation " +
                 format_double(sum.max_excess);
        return false;
      }
    }
  }
  detail = std::to_string(steps) + " steps across 20 seeds match 1 - alpha";
  return true;
}

// 3. Production-scale strategy ordering: shared examples minimize teacher
//    work, personalized examples minimize student work, partitioning lands
//    between, in at least 18 of 20 seeds each.
bool criterion_ordering(std::string& detail) {
  int t_order = 0, s_order = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(3000 + static_cast<std::uint64_t>(s));
    Classroom c = random_room(300, 25, 0.05, 0.25, rng);
    const Hypothesis target = rng.ball_vector(25, 1.0);
    TeachConfig cfg;
    cfg.eps = 0.1;
    cfg.max_iters = 100000;
    cfg.seed = rng.next();
    const auto outcomes = run_strategies(
        c, target, cfg, {Strategy::CT, Strategy::CTwPOpt, Strategy::IT});
    for (const auto& o : outcomes) {
      if (o.status == RunStatus::Budget) {
        detail = std::string(to_string(o.strategy)) + " exhausted the budget at seed " +
                 std::to_string(s);
        return false;
      }
    }
    const auto& ct = outcomes[0];
    const auto& opt = outcomes[1];
    const auto& it = outcomes[2];
    if (ct.teacher_cost < opt.teacher_cost && opt.teacher_cost < it.teacher_cost)
      ++t_order;
    if (it.student_cost() < opt.student_cost() && opt.student_cost() < ct.student_cost())
      ++s_order;
  }
  detail = "teacher order " + std::to_string(t_order) + "/20, student order " +
           std::to_string(s_order) + "/20";
  return t_order >= 18 && s_order >= 18;
}

// 4. With the contraction weight held fixed and N >= d, rounds to accuracy
//    grow at most linearly in the dimension (log-log slope <= 1.2).
bool criterion_scaling(std::string& detail) {
  const std::vector<int> dims = {5, 10, 20, 40};
  std::vector<double> mean_iters;
  for (int d : dims) {
    double total = 0.0;
    for (int s = 0; s < 10; ++s) {
      Rng rng(4000 + static_cast<std::uint64_t>(100 * d + s));
      Classroom c = random_room(50, d, 0.1, 0.1, rng);
      const Hypothesis target = rng.ball_vector(d, 1.0);
      TeachConfig cfg;
      cfg.eps = 0.1;
      cfg.max_iters = 100000;
      cfg.seed = rng.next();
      const Trace tr = ct_teach(c, target, cfg);
      if (tr.status == RunStatus::Budget) {
        detail = "budget exhausted at d=" + std::to_string(d);
        return false;
      }
      total += static_cast<double>(tr.iterations());
    }
    mean_iters.push_back(total / 10.0);
  }
  // Least-squares slope of log(iterations) against log(d).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(dims.size());
  for (size_t i = 0; i < dims.size(); ++i) {
    const double x = std::log(static_cast<double>(dims[i]));
    const double y = std::log(mean_iters[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  std::ostringstream os;
  os << "iterations";
  for (size_t i = 0; i < dims.size(); ++i)
    os << " d=" << dims[i] << ":" << mean_iters[i];
  os << ", slope " << format_double(slope);
  detail = os.str();
  return slope <= 1.2;
}

// 5. State-noise robustness at the admissible radius: 20/20 convergence, the
//    noisy per-step bound everywhere, and mean rounds nondecreasing in the
//    noise level.
bool criterion_noisy_state(std::string& detail) {
  const int seeds = 20;
  int converged_runs = 0;
  double mean_iters[3] = {0.0, 0.0, 0.0};
  for (int s = 0; s < seeds; ++s) {
    Rng rng(5000 + static_cast<std::uint64_t>(s));
    Classroom c = random_room(50, 10, 0.05, 0.25, rng);
    const Hypothesis target = rng.ball_vector(10, 1.0);
    TeachConfig cfg;
    cfg.eps = 0.1;
    cfg.max_iters = 100000;
    cfg.seed = rng.next();
    const double bound = noisy_state_delta_bound(c, gamma_static(c), cfg.eps);

    const double levels[3] = {0.0, bound / 2.0, bound};
    for (int k = 0; k < 3; ++k) {
      const Trace tr = ct_teach_noisy_state(c, target, cfg, levels[k]);
      mean_iters[k] += static_cast<double>(tr.iterations()) / seeds;
      if (k == 2) {
        if (tr.status == RunStatus::ConvergedAvg) ++converged_runs;
        const CheckSummary sum = check_noisy_state_contraction(tr, c.d_w, bound, 1e-9);
        if (!sum.ok()) {
          detail = "per-step bound violated at seed " + std::to_string(s) +
                   ", worst excess " + format_double(sum.max_excess);
          return false;
        }
      }
    }
  }
  std::ostringstream os;
  os << converged_runs << "/20 converged at the bound; mean iterations "
     << format_double(mean_iters[0]) << " -> " << format_double(mean_iters[1]) << " -> "
     << format_double(mean_iters[2]);
  detail = os.str();
  return converged_runs == seeds && mean_iters[0] <= mean_iters[1] &&
         mean_iters[1] <= mean_iters[2];
}

// 6. Scatter-noise robustness at the admissible spectral cap.
bool criterion_noisy_scatter(std::string& detail) {
  const int seeds = 20;
  int converged_runs = 0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(6000 + static_cast<std::uint64_t>(s));
    Classroom c = random_room(50, 10, 0.05, 0.25, rng);
    const Hypothesis target = rng.ball_vector(10, 1.0);
    TeachConfig cfg;
    cfg.eps = 0.1;
    cfg.max_iters = 100000;
    cfg.seed = rng.next();
    const double cap = noisy_scatter_lambda_bound(c, gamma_static(c), cfg.eps);

    const Trace tr = ct_teach_noisy_scatter(c, target, cfg, cap);
    if (tr.status == RunStatus::ConvergedAvg) ++converged_runs;
    const CheckSummary sum = check_noisy_scatter_contraction(tr, 1e-9);
    if (!sum.ok()) {
      detail = "per-step bound violated at seed " + std::to_string(s) +
               ", worst excess " + format_double(sum.max_excess);
      return false;
    }
  }
  detail = std::to_string(converged_runs) + "/20 converged at the spectral cap";
  return converged_runs == seeds;
}

// 7. Rate-noise and Langevin classrooms converge in the mean, and one-step
//    empirical means respect the expected contraction within 3 standard
//    errors over 200 replicates.
bool criterion_expectation(std::string& detail) {
  // Mean convergence across seeds.
  double rate_mean = 0.0, sgld_mean = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(7000 + static_cast<std::uint64_t>(s));
    Classroom c = random_room(50, 5, 0.05, 0.25, rng);
    const Hypothesis target = rng.ball_vector(5, 1.0);
    TeachConfig cfg;
    cfg.eps = 0.1;
    cfg.max_iters = 20000;
    cfg.seed = rng.next();

    Classroom rate_room = c;
    for (auto& l : rate_room.learners) l.kind = LearnerKind::StochasticRate;
    rate_mean += final_error(ct_teach_stochastic_rate(rate_room, target, cfg, 0.02)) / seeds;

    Classroom sgld_room = c;
    for (auto& l : sgld_room.learners) l.kind = LearnerKind::Sgld;
    const double cap = sgld_inv_beta_bound(c, gamma_static(c), cfg.eps);
    sgld_mean += final_error(ct_teach_sgld(sgld_room, target, cfg, cap)) / seeds;
  }
  if (rate_mean > 0.1 || sgld_mean > 0.1) {
    detail = "mean final errors " + format_double(rate_mean) + " / " +
             format_double(sgld_mean) + " exceed 0.1";
    return false;
  }

  // One-step empirical-mean contraction, rate noise.
  const int reps = 200;
  {
    Rng rng(7777);
    Classroom base = random_room(50, 5, 0.05, 0.25, rng);
    for (auto& l : base.learners) l.kind = LearnerKind::StochasticRate;
    const Hypothesis target = rng.ball_vector(5, 1.0);
    const double sigma = 0.02;
    const double gamma =
        std::min(gamma_static(base), stochastic_rate_gamma_cap(base, sigma));
    for (auto& l : base.learners) l.sigma = sigma;

    // Warm up three rounds so the history-driven weights engage.
    RateHistory history(base.size());
    Rng warm(7778);
    for (int t = 0; t < 3; ++t) stochastic_rate_step(base, target, gamma, history, sigma, warm);

    const double before = avg_squared_error(base, target);
    double sum = 0.0, sumsq = 0.0, bound_rate = 0.0;
    for (int r = 0; r < reps; ++r) {
      Classroom copy = base;
      RateHistory hist_copy = history;
      Rng step_rng(8000 + static_cast<std::uint64_t>(r));
      const StepOutcome step =
          stochastic_rate_step(copy, target, gamma, hist_copy, sigma, step_rng);
      const double after = avg_squared_error(copy, target);
      sum += after;
      sumsq += after * after;
      bound_rate = (1.0 - step.diagnostics.at("beta_min") *
                              step.diagnostics.at("bar_alpha_min") /
                              step.diagnostics.at("rank")) *
                   before;
    }
    const double mean = sum / reps;
    const double se = std::sqrt(std::max(0.0, sumsq / reps - mean * mean) / reps);
    if (mean > bound_rate + 3.0 * se) {
      detail = "rate-noise one-step mean " + format_double(mean) + " above bound " +
               format_double(bound_rate) + " + 3se";
      return false;
    }
  }

  // One-step empirical-mean contraction, Langevin noise.
  {
    Rng rng(7878);
    Classroom base = random_room(50, 5, 0.05, 0.25, rng);
    for (auto& l : base.learners) l.kind = LearnerKind::Sgld;
    const Hypothesis target = rng.ball_vector(5, 1.0);
    const double gamma = gamma_static(base);
    const double inv_beta = sgld_inv_beta_bound(base, gamma, 0.1);
    double eta_avg = 0.0;
    for (const auto& l : base.learners) eta_avg += l.eta / base.size();

    const double before = avg_squared_error(base, target);
    double sum = 0.0, sumsq = 0.0, bound_sgld = 0.0;
    for (int r = 0; r < reps; ++r) {
      Classroom copy = base;
      Rng step_rng(9000 + static_cast<std::uint64_t>(r));
      const StepOutcome step = sgld_step(copy, target, gamma, inv_beta, step_rng);
      const double after = avg_squared_error(copy, target);
      sum += after;
      sumsq += after * after;
      bound_sgld = (1.0 - step.diagnostics.at("alpha_min") / step.diagnostics.at("rank")) *
                       before +
                   2.0 * inv_beta * 5.0 * eta_avg;
    }
    const double mean = sum / reps;
    const double se = std::sqrt(std::max(0.0, sumsq / reps - mean * mean) / reps);
    if (mean > bound_sgld + 3.0 * se) {
      detail = "langevin one-step mean " + format_double(mean) + " above bound " +
               format_double(bound_sgld) + " + 3se";
      return false;
    }
  }

  detail = "mean final errors " + format_double(rate_mean) + " / " +
           format_double(sgld_mean) + "; one-step means within 3se";
  return true;
}

// 8. Pool teaching: measured-alignment contraction on a random pool, and a
//    pool holding the ideal direction reproduces synthesis teaching.
bool criterion_pool(std::string& detail) {
  Rng rng(108);
  Classroom c = random_room(20, 5, 0.05, 0.25, rng);
  const Hypothesis target = rng.ball_vector(5, 1.0);
  Eigen::MatrixXd cols(5, 200);
  for (int i = 0; i < 200; ++i) cols.col(i) = rng.unit_vector(5);
  const DirectionPool pool = make_pool(cols, 2.0);

  TeachConfig cfg;
  cfg.eps = 0.05;
  cfg.max_iters = 20000;
  cfg.seed = 424242;
  const Trace tr = pool_teach_class(c, target, pool, cfg);
  if (tr.status != RunStatus::ConvergedAvg) {
    detail = "random pool run did not converge";
    return false;
  }
  const CheckSummary sum = check_pool_class_contraction(tr, 1e-9);
  if (!sum.ok()) {
    detail = "alignment bound violated, worst excess " + format_double(sum.max_excess);
    return false;
  }

  // Ideal-direction pool versus synthesis, step by step.
  Classroom synth = c, pooled = c;
  Rng rng_synth(515), rng_ref(515), rng_noise(516);
  const double gamma = gamma_static(c);
  double worst_gap = 0.0;
  for (int step = 0; step < 60; ++step) {
    if (converged(synth, target, 1e-10, ConvergenceMode::Avg)) break;
    ct_step_with_gamma(synth, target, gamma, rng_synth);

    Eigen::VectorXd alphas(pooled.size());
    for (int j = 0; j < pooled.size(); ++j)
      alphas[j] = alpha(pooled.learners[j].eta, gamma);
    const ScatterMatrix w = build_scatter(pooled, target, gamma, alphas);
    const EigenPair top = top_eigenpair(w, rng_ref);
    Eigen::MatrixXd mix(5, 8);
    mix.col(0) = top.vector;
    for (int i = 1; i < 8; ++i) mix.col(i) = rng_noise.unit_vector(5);
    auto [idx, dir] = pool_select_class(make_pool(mix, c.d_x), w);
    if (idx != 0) {
      detail = "pool missed the ideal direction at step " + std::to_string(step);
      return false;
    }
    LabeledExample ex;
    ex.x = gamma * dir;
    ex.y = target.dot(ex.x);
    for (auto& l : pooled.learners) l = learner_update(l, ex, pooled.d_w);

    worst_gap = std::max(worst_gap, std::abs(avg_squared_error(pooled, target) -
                                             avg_squared_error(synth, target)));
  }
  std::ostringstream os;
  os << tr.iterations() << " pool rounds within the alignment bound; synthesis gap "
     << format_double(worst_gap);
  detail = os.str();
  return worst_gap <= 1e-12;
}

// 9. Power iteration against the rotation oracle, and the factored path
//    against the dense path, on 500 random spectra.
bool criterion_spectral(std::string& detail) {
  Rng rng(109);
  double worst_oracle = 0.0, worst_factor = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.uniform_int(8));
    ScatterMatrix m = zero_scatter(d);
    const int terms = 1 + static_cast<int>(rng.uniform_int(8));
    Eigen::MatrixXd cols(d, terms);
    Eigen::VectorXd coeffs(terms);
    for (int i = 0; i < terms; ++i) {
      cols.col(i) = rng.normal_vector(d);
      coeffs[i] = 0.05 + rng.uniform();
      m = accumulate_rank_one(m, coeffs[i], cols.col(i));
    }
    const EigenPair power = top_eigenpair(m, rng);
    const EigenDecomposition oracle = eigen_oracle(m);
    worst_oracle = std::max(worst_oracle, std::abs(power.lambda - oracle.values[0]) /
                                              std::max(1.0, oracle.values[0]));
    Rng factor_rng(40000 + static_cast<std::uint64_t>(trial));
    const EigenPair factored = top_eigenpair_factors(cols, coeffs, factor_rng);
    worst_factor = std::max(worst_factor, std::abs(factored.lambda - power.lambda) /
                                              std::max(1.0, power.lambda));
  }
  detail = "worst oracle gap " + format_double(worst_oracle) + ", worst path gap " +
           format_double(worst_factor);
  return worst_oracle <= 1e-8 && worst_factor <= 1e-8;
}

// 10. Cost-regime table over rate diversity and the trade-off factor.
bool criterion_regimes(std::string& detail) {
  const std::vector<double> diversities = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  const std::vector<double> lambdas = {0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 1e6};
  const std::vector<Strategy> all = {Strategy::CT, Strategy::CTwPOpt, Strategy::CTwPRand,
                                     Strategy::IT};

  bool ct_at_origin = false, interior_opt = false;
  int it_at_top = 0;
  for (size_t di = 0; di < diversities.size(); ++di) {
    Rng rng(10000 + static_cast<std::uint64_t>(di));
    Classroom c = random_room(120, 10, 0.1, 0.1 + diversities[di], rng);
    const Hypothesis target = rng.ball_vector(10, 1.0);
    TeachConfig cfg;
    cfg.eps = 0.1;
    cfg.max_iters = 100000;
    cfg.seed = rng.next();
    const auto table = lambda_sweep(c, target, all, lambdas, cfg);
    if (di == 0 && table.front().best == Strategy::CT) ct_at_origin = true;
    if (table.back().best == Strategy::IT) ++it_at_top;
    for (size_t li = 1; li + 1 < table.size(); ++li)
      if (table[li].best == Strategy::CTwPOpt) interior_opt = true;
  }
  std::ostringstream os;
  os << "ct at (0 diversity, 0) " << (ct_at_origin ? "yes" : "no") << ", it at top lambda "
     << it_at_top << "/" << diversities.size() << ", interior partition win "
     << (interior_opt ? "yes" : "no");
  detail = os.str();
  return ct_at_origin && it_at_top == static_cast<int>(diversities.size()) && interior_opt;
}

// 11. Reruns of every serialized pipeline are byte-identical, including
//     sweeps under maximal concurrency.
bool criterion_determinism(std::string& detail) {
  ExperimentSpec spec;
  spec.d = 6;
  spec.n = 20;
  spec.eta.kind = EtaSpec::Kind::UniformRange;
  spec.eta.lo = 0.05;
  spec.eta.hi = 0.25;
  spec.d_w = 4.0;
  spec.d_x = 2.0;
  spec.eps = 0.1;
  spec.max_iters = 20000;
  spec.seed = 90210;

  auto trace_bytes = [](const ExperimentSpec& s) {
    const RunResult res = run(s);
    std::ostringstream os;
    for (const auto& tr : res.traces) write_trace_csv(tr, os, true);
    return os.str();
  };

  if (trace_bytes(spec) != trace_bytes(spec)) {
    detail = "plain trace rerun differs";
    return false;
  }
  ExperimentSpec noisy = spec;
  noisy.noise = {NoiseKind::NoisyState, 1e-4};
  if (trace_bytes(noisy) != trace_bytes(noisy)) {
    detail = "noisy trace rerun differs";
    return false;
  }
  ExperimentSpec sgld = spec;
  sgld.noise = {NoiseKind::Sgld, 1e-4};
  if (trace_bytes(sgld) != trace_bytes(sgld)) {
    detail = "langevin trace rerun differs";
    return false;
  }
  ExperimentSpec parts = spec;
  parts.algorithm = Algorithm::CTwPOpt;
  if (trace_bytes(parts) != trace_bytes(parts)) {
    detail = "partitioned trace rerun differs";
    return false;
  }

  auto sweep_bytes = [&](int workers) {
    const SweepTable t =
        sweep(spec, SweepAxis::EtaDiversity, {0.0, 0.1, 0.2, 0.3}, 5, workers);
    std::ostringstream os;
    write_sweep_csv(t, os);
    return os.str();
  };
  const std::string serial = sweep_bytes(1);
  if (serial != sweep_bytes(8) || serial != sweep_bytes(8)) {
    detail = "sweep bytes depend on worker count or rerun";
    return false;
  }

  // Pool teaching, twice.
  auto pool_bytes = [&]() {
    Rng rng(77);
    Classroom c = random_room(10, 4, 0.05, 0.25, rng);
    const Hypothesis target = rng.ball_vector(4, 1.0);
    Eigen::MatrixXd cols(4, 50);
    for (int i = 0; i < 50; ++i) cols.col(i) = rng.unit_vector(4);
    TeachConfig cfg;
    cfg.eps = 0.05;
    cfg.max_iters = 20000;
    cfg.seed = 31337;
    const Trace tr = pool_teach_class(c, target, make_pool(cols, 2.0), cfg);
    std::ostringstream os;
    write_trace_csv(tr, os, true);
    return os.str();
  };
  if (pool_bytes() != pool_bytes()) {
    detail = "pool trace rerun differs";
    return false;
  }

  detail = "trace, sweep (1 vs 8 workers) and pool outputs byte-stable";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
  }

  const std::vector<Criterion> criteria = {
      {1, "noise-free per-step contraction", criterion_contraction},
      {2, "exact individual-teaching decay", criterion_it_exact},
      {3, "teacher/student cost ordering at production scale", criterion_ordering},
      {4, "at-most-linear growth of rounds in the dimension", criterion_scaling},
      {5, "state-noise robustness at the admissible radius", criterion_noisy_state},
      {6, "scatter-noise robustness at the admissible spectral cap", criterion_noisy_scatter},
      {7, "rate-noise and langevin convergence in expectation", criterion_expectation},
      {8, "pool teaching within the alignment bound", criterion_pool},
      {9, "power iteration versus oracle and factored paths", criterion_spectral},
      {10, "cost-regime table across diversity and trade-off", criterion_regimes},
      {11, "byte-identical reruns under concurrency", criterion_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s (%.2fs) -- %s\n", ok ? "PASS" : "FAIL", c.id,
                c.summary, secs, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
