#include "classteach/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace classteach {

void Partition::validate(int n) const {
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidInput("partition holds an empty group");
    for (int idx : g) {
      if (idx < 0 || idx >= n) throw InvalidInput("partition index out of range");
      if (seen[static_cast<size_t>(idx)]) throw InvalidInput("partition groups overlap");
      seen[static_cast<size_t>(idx)] = 1;
    }
  }
  for (char s : seen)
    if (!s) throw InvalidInput("partition does not cover every learner");
}

Partition partition_whole(int n) {
  if (n < 1) throw InvalidInput("partition_whole: n must be positive");
  Partition p;
  p.label = PartitionLabel::Whole;
  p.groups.emplace_back(static_cast<size_t>(n));
  std::iota(p.groups[0].begin(), p.groups[0].end(), 0);
  return p;
}

Partition partition_per_learner(int n) {
  if (n < 1) throw InvalidInput("partition_per_learner: n must be positive");
  Partition p;
  p.label = PartitionLabel::PerLearner;
  for (int j = 0; j < n; ++j) p.groups.push_back({j});
  return p;
}

Partition partition_by_eta(const std::vector<double>& etas) {
  if (etas.empty()) throw InvalidInput("partition_by_eta: no learners");
  double eta_min = std::numeric_limits<double>::infinity();
  double eta_max = 0.0;
  for (double e : etas) {
    if (!(e > 0.0)) throw InvalidInput("partition_by_eta: rates must be positive");
    eta_min = std::min(eta_min, e);
    eta_max = std::max(eta_max, e);
  }

  // m = floor(log2(eta_max / eta_min)) computed by exact doublings.
  int m = 0;
  double thr = eta_min;
  while (2.0 * thr <= eta_max) {
    thr *= 2.0;
    ++m;
  }

  std::vector<std::vector<int>> buckets(static_cast<size_t>(m) + 1);
  for (size_t j = 0; j < etas.size(); ++j) {
    int idx = 0;
    double upper = 2.0 * eta_min;
    while (idx < m && etas[j] >= upper) {
      upper *= 2.0;
      ++idx;
    }
    buckets[static_cast<size_t>(idx)].push_back(static_cast<int>(j));
  }

  Partition p;
  p.label = PartitionLabel::ByEta;
  for (auto& b : buckets)
    if (!b.empty()) p.groups.push_back(std::move(b));
  return p;
}

Partition partition_by_w0(const Classroom& c, int k, Rng& rng) {
  const int n = c.size();
  if (k < 1 || k > n) throw InvalidInput("partition_by_w0: k must lie in [1, N]");

  std::vector<Eigen::VectorXd> centers;
  centers.reserve(static_cast<size_t>(k));
  centers.push_back(c.learners[rng.uniform_int(static_cast<std::uint64_t>(n))].state);
  while (static_cast<int>(centers.size()) < k) {
    int far = 0;
    double far_d = -1.0;
    for (int j = 0; j < n; ++j) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& ctr : centers)
        nearest = std::min(nearest, (c.learners[j].state - ctr).squaredNorm());
      if (nearest > far_d) {
        far_d = nearest;
        far = j;
      }
    }
    centers.push_back(c.learners[far].state);
  }

  std::vector<int> assign(static_cast<size_t>(n), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int j = 0; j < n; ++j) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int g = 0; g < k; ++g) {
        const double d2 = (c.learners[j].state - centers[static_cast<size_t>(g)]).squaredNorm();
        if (d2 < best_d) {
          best_d = d2;
          best = g;
        }
      }
      if (assign[static_cast<size_t>(j)] != best) {
        assign[static_cast<size_t>(j)] = best;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<int> counts(static_cast<size_t>(k), 0);
    std::vector<Eigen::VectorXd> sums(static_cast<size_t>(k),
                                      Eigen::VectorXd::Zero(c.dim()));
    for (int j = 0; j < n; ++j) {
      counts[static_cast<size_t>(assign[static_cast<size_t>(j)])] += 1;
      sums[static_cast<size_t>(assign[static_cast<size_t>(j)])] += c.learners[j].state;
    }
    for (int g = 0; g < k; ++g) {
      if (counts[static_cast<size_t>(g)] > 0) {
        centers[static_cast<size_t>(g)] =
            sums[static_cast<size_t>(g)] / static_cast<double>(counts[static_cast<size_t>(g)]);
      } else {
        // Reseed an empty cluster to the point farthest from its own center.
        int far = 0;
        double far_d = -1.0;
        for (int j = 0; j < n; ++j) {
          const double d2 =
              (c.learners[j].state -
               centers[static_cast<size_t>(assign[static_cast<size_t>(j)])]).squaredNorm();
          if (d2 > far_d) {
            far_d = d2;
            far = j;
          }
        }
        centers[static_cast<size_t>(g)] = c.learners[far].state;
      }
    }
  }

  std::vector<std::vector<int>> buckets(static_cast<size_t>(k));
  for (int j = 0; j < n; ++j)
    buckets[static_cast<size_t>(assign[static_cast<size_t>(j)])].push_back(j);

  Partition p;
  p.label = PartitionLabel::ByW0;
  for (auto& b : buckets)
    if (!b.empty()) p.groups.push_back(std::move(b));
  return p;
}

Partition partition_random(int n, int k, Rng& rng) {
  if (k < 1 || k > n) throw InvalidInput("partition_random: k must lie in [1, N]");
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<std::vector<int>> buckets(static_cast<size_t>(k));
    for (int j = 0; j < n; ++j)
      buckets[rng.uniform_int(static_cast<std::uint64_t>(k))].push_back(j);
    const bool any_empty =
        std::any_of(buckets.begin(), buckets.end(), [](const auto& b) { return b.empty(); });
    if (any_empty) continue;  // redraw until every group is populated
    Partition p;
    p.label = PartitionLabel::Random;
    p.groups = std::move(buckets);
    return p;
  }
  // Rejection is hopeless when k approaches n: deal a random permutation
  // round-robin instead, which still spreads learners uniformly.
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_int(i)]);
  Partition p;
  p.label = PartitionLabel::Random;
  p.groups.resize(static_cast<size_t>(k));
  for (int j = 0; j < n; ++j)
    p.groups[static_cast<size_t>(j % k)].push_back(order[static_cast<size_t>(j)]);
  for (auto& g : p.groups) std::sort(g.begin(), g.end());
  return p;
}

PartitionTeachResult teach_partitions(const Classroom& c, const Hypothesis& target,
                                      const Partition& p, const TeachConfig& cfg) {
  c.validate();
  p.validate(c.size());

  PartitionTeachResult out;
  out.n = c.size();
  bool all_converged = true;
  for (size_t g = 0; g < p.groups.size(); ++g) {
    Classroom sub;
    sub.d_w = c.d_w;
    sub.d_x = c.d_x;
    for (int idx : p.groups[g]) sub.learners.push_back(c.learners[idx]);
    TeachConfig sub_cfg = cfg;
    sub_cfg.seed = mix_seed(cfg.seed, g);
    Trace tr = ct_teach(sub, target, sub_cfg);
    const long iters = tr.iterations();
    out.teacher_cost += iters;
    out.student_iterations += iters * static_cast<long>(p.groups[g].size());
    if (tr.status == RunStatus::Budget) all_converged = false;
    out.group_traces.push_back(std::move(tr));
  }
  out.status = all_converged ? (cfg.mode == ConvergenceMode::Avg ? RunStatus::ConvergedAvg
                                                                 : RunStatus::ConvergedAll)
                             : RunStatus::Budget;
  return out;
}

double cost(long teacher_cost, double student_cost, double lambda) {
  if (teacher_cost < 0 || student_cost < 0.0 || lambda < 0.0)
    throw InvalidInput("cost: arguments must be nonnegative");
  return static_cast<double>(teacher_cost) + lambda * student_cost;
}

CostReport make_cost_report(long teacher_cost, double student_cost, double lambda) {
  CostReport r;
  r.teacher_cost = teacher_cost;
  r.student_cost = student_cost;
  r.lambda = lambda;
  r.total = cost(teacher_cost, student_cost, lambda);
  return r;
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::CT: return "ct";
    case Strategy::CTwPOpt: return "ctwp-opt";
    case Strategy::CTwPRand: return "ctwp-rand";
    case Strategy::IT: return "it";
  }
  return "unknown";
}

std::vector<StrategyOutcome> run_strategies(const Classroom& c, const Hypothesis& target,
                                            const TeachConfig& cfg,
                                            const std::vector<Strategy>& strategies,
                                            const Partition* opt_partition) {
  c.validate();
  std::vector<StrategyOutcome> out;

  auto eta_partition = [&]() {
    if (opt_partition) return *opt_partition;
    std::vector<double> etas(static_cast<size_t>(c.size()));
    for (int j = 0; j < c.size(); ++j) etas[static_cast<size_t>(j)] = c.learners[j].eta;
    return partition_by_eta(etas);
  };

  for (Strategy s : strategies) {
    StrategyOutcome o;
    o.strategy = s;
    o.n = c.size();
    switch (s) {
      case Strategy::CT: {
        const Trace tr = ct_teach(c, target, cfg);
        o.teacher_cost = tr.iterations();
        o.student_iterations = tr.iterations() * static_cast<long>(c.size());
        o.status = tr.status;
        break;
      }
      case Strategy::CTwPOpt: {
        const auto res = teach_partitions(c, target, eta_partition(), cfg);
        o.teacher_cost = res.teacher_cost;
        o.student_iterations = res.student_iterations;
        o.status = res.status;
        break;
      }
      case Strategy::CTwPRand: {
        const int k = eta_partition().group_count();
        Rng prng(mix_seed(cfg.seed, 0x52414e44));  // dedicated stream for grouping
        const Partition p = partition_random(c.size(), k, prng);
        const auto res = teach_partitions(c, target, p, cfg);
        o.teacher_cost = res.teacher_cost;
        o.student_iterations = res.student_iterations;
        o.status = res.status;
        break;
      }
      case Strategy::IT: {
        const auto traces = it_teach(c, target, cfg);
        bool all_ok = true;
        for (const auto& tr : traces) {
          o.teacher_cost += tr.iterations();
          o.student_iterations += tr.iterations();
          if (tr.status == RunStatus::Budget) all_ok = false;
        }
        o.status = all_ok ? (cfg.mode == ConvergenceMode::Avg ? RunStatus::ConvergedAvg
                                                              : RunStatus::ConvergedAll)
                          : RunStatus::Budget;
        break;
      }
    }
    out.push_back(o);
  }
  return out;
}

std::vector<LambdaChoice> lambda_sweep(const Classroom& c, const Hypothesis& target,
                                       const std::vector<Strategy>& strategies,
                                       const std::vector<double>& lambdas,
                                       const TeachConfig& cfg,
                                       const Partition* opt_partition) {
  if (lambdas.empty()) throw InvalidInput("lambda_sweep: empty grid");
  std::vector<Strategy> ordered = strategies;
  std::sort(ordered.begin(), ordered.end());  // tie-break order CT < Opt < Rand < IT
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  const auto outcomes = run_strategies(c, target, cfg, ordered, opt_partition);
  std::vector<LambdaChoice> table;
  table.reserve(lambdas.size());
  for (double lam : lambdas) {
    LambdaChoice choice;
    choice.lambda = lam;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : outcomes) {
      const double total = cost(o.teacher_cost, o.student_cost(), lam);
      if (total < best) {
        best = total;
        choice.best = o.strategy;
        choice.best_cost = total;
      }
    }
    table.push_back(choice);
  }
  return table;
}

}  // namespace classteach
