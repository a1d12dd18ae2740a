#pragma once

#include <vector>

#include "classteach/model.hpp"
#include "classteach/rng.hpp"
#include "classteach/teachers.hpp"

namespace classteach {

enum class PartitionLabel { ByEta, ByW0, Random, Whole, PerLearner };

struct Partition {
  std::vector<std::vector<int>> groups;  // disjoint, covering, non-empty
  PartitionLabel label = PartitionLabel::Whole;

  int group_count() const { return static_cast<int>(groups.size()); }
  void validate(int n) const;
};

Partition partition_whole(int n);
Partition partition_per_learner(int n);

// Dyadic learning-rate intervals [c, 2c) starting at eta_min; every group
// then satisfies max eta < 2 * min eta, which is exactly what the dynamic
// step size needs. Empty intervals are dropped.
Partition partition_by_eta(const std::vector<double>& etas);

// k-means on the initial states: greedy spread-out seeding from the supplied
// generator, Lloyd iterations to an assignment fixpoint (at most 100), empty
// clusters reseeded to the farthest point.
Partition partition_by_w0(const Classroom& c, int k, Rng& rng);

// Uniform assignment of learners to k groups.
Partition partition_random(int n, int k, Rng& rng);

struct PartitionTeachResult {
  std::vector<Trace> group_traces;   // in group order
  long teacher_cost = 0;             // sum over groups of iteration counts
  long student_iterations = 0;       // sum over learners of their group's count
  int n = 0;
  RunStatus status = RunStatus::Budget;

  double student_cost() const {
    return static_cast<double>(student_iterations) / static_cast<double>(n);
  }
};

// Teaches each group as an independent classroom. Group g runs with seed
// mix_seed(cfg.seed, g); group 0 therefore replays the unpartitioned run when
// the partition is the whole class.
PartitionTeachResult teach_partitions(const Classroom& c, const Hypothesis& target,
                                      const Partition& p, const TeachConfig& cfg);

// Teacher/student workload trade-off.
double cost(long teacher_cost, double student_cost, double lambda);

struct CostReport {
  long teacher_cost = 0;
  double student_cost = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};
CostReport make_cost_report(long teacher_cost, double student_cost, double lambda);

enum class Strategy { CT, CTwPOpt, CTwPRand, IT };
const char* to_string(Strategy s);

struct StrategyOutcome {
  Strategy strategy = Strategy::CT;
  long teacher_cost = 0;
  long student_iterations = 0;
  int n = 0;
  RunStatus status = RunStatus::Budget;

  double student_cost() const {
    return static_cast<double>(student_iterations) / static_cast<double>(n);
  }
};

// Runs each requested strategy once on the classroom. CTwP-Opt uses the
// supplied partition when given, otherwise the dyadic learning-rate one;
// CTwP-Rand matches its group count.
std::vector<StrategyOutcome> run_strategies(const Classroom& c, const Hypothesis& target,
                                            const TeachConfig& cfg,
                                            const std::vector<Strategy>& strategies,
                                            const Partition* opt_partition = nullptr);

struct LambdaChoice {
  double lambda = 0.0;
  Strategy best = Strategy::CT;
  double best_cost = 0.0;
};

// Cost-minimizing strategy per lambda; runs are shared across the grid and
// ties resolve in the order CT < CTwP-Opt < CTwP-Rand < IT.
std::vector<LambdaChoice> lambda_sweep(const Classroom& c, const Hypothesis& target,
                                       const std::vector<Strategy>& strategies,
                                       const std::vector<double>& lambdas,
                                       const TeachConfig& cfg,
                                       const Partition* opt_partition = nullptr);

}  // namespace classteach
