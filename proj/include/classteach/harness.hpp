#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "classteach/model.hpp"
#include "classteach/partition.hpp"
#include "classteach/pool.hpp"
#include "classteach/teachers.hpp"

namespace classteach {

struct EtaSpec {
  enum class Kind { Fixed, UniformRange, Clustered };
  Kind kind = Kind::Fixed;
  double value = 0.1;               // Fixed
  double lo = 0.1, hi = 0.1;        // UniformRange
  std::vector<double> values;       // Clustered: contiguous near-equal blocks

  // Compares only the fields the active kind uses.
  bool operator==(const EtaSpec& o) const;
};

struct W0Spec {
  enum class Kind { UniformBall, GaussianClusters };
  Kind kind = Kind::UniformBall;
  int num_clusters = 1;
  double center_norm = 0.5;         // axis centers sit at center_norm * e_i
  double sigma = 0.1;
  std::vector<Eigen::VectorXd> centers;  // optional explicit centers
  std::vector<int> sizes;                // optional; near-equal split otherwise

  bool operator==(const W0Spec& o) const;
};

struct TargetSpec {
  enum class Kind { RandomOnSphere, Explicit };
  Kind kind = Kind::RandomOnSphere;
  double radius = 1.0;
  Eigen::VectorXd vec;

  bool operator==(const TargetSpec& o) const;
};

enum class Algorithm { CT, IT, CTwPOpt, CTwPRand };
enum class PartitionBy { Eta, W0 };

struct ExperimentSpec {
  int d = 2;
  int n = 1;
  EtaSpec eta;
  W0Spec w0;
  TargetSpec target;
  double d_w = 1.0, d_x = 1.0, eps = 0.1;
  Algorithm algorithm = Algorithm::CT;
  NoiseSpec noise;
  GammaPolicy gamma_policy = GammaPolicy::Static;
  ConvergenceMode mode = ConvergenceMode::Avg;
  long max_iters = 100000;
  std::uint64_t seed = 0;
  PartitionBy partition_by = PartitionBy::Eta;
  int partition_k = 0;  // 0: derive (eta intervals, or w0 cluster count)
  double lambda = 0.0;  // cost trade-off used in sweep reporting

  void validate() const;
  bool operator==(const ExperimentSpec& o) const;
};

// Samples a classroom and target. Draw order: learning rates (one uniform
// each for ranges), initial states, then the target direction.
std::pair<Classroom, Hypothesis> materialize(const ExperimentSpec& spec, Rng& rng);

struct RunResult {
  std::uint64_t spec_hash = 0;
  std::vector<Trace> traces;    // 1 for CT, per group for CTwP, per learner for IT
  long teacher_cost = 0;
  long student_iterations = 0;  // sum over learners of rounds experienced
  int n = 1;
  long iterations = 0;          // longest single trace (wall-clock rounds)
  RunStatus status = RunStatus::Budget;
  double wall_seconds = 0.0;

  double student_cost() const {
    return static_cast<double>(student_iterations) / static_cast<double>(n);
  }
};

RunResult run(const ExperimentSpec& spec);

enum class SweepAxis { DeltaMax, Sigma, InvBeta, Lambda, EtaDiversity, W0Diversity };
const char* to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepRow {
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  long iterations = 0;
  long teacher_cost = 0;
  double student_cost = 0.0;
  double cost = 0.0;
};

struct SweepTable {
  SweepAxis axis = SweepAxis::Lambda;
  std::vector<double> grid;
  int seeds_per_cell = 1;
  std::vector<SweepRow> rows;  // grid-major, then replicate
};

struct SweepAggregate {
  double axis_value = 0.0;
  double mean_iterations = 0.0, std_iterations = 0.0;
  double mean_teacher = 0.0, mean_student = 0.0;
  double mean_cost = 0.0, std_cost = 0.0;
};
std::vector<SweepAggregate> aggregate(const SweepTable& table);

// Cross product of grid values and replicates; cell i runs a copy of the base
// spec with seed mix_seed(base.seed, i). Cells execute on up to `workers`
// threads; results land by cell index, so output bytes do not depend on the
// schedule.
SweepTable sweep(const ExperimentSpec& base, SweepAxis axis,
                 const std::vector<double>& grid, int seeds_per_cell, int workers = 1);

ExperimentSpec spec_for_cell(const ExperimentSpec& base, SweepAxis axis, double value);

// --- serialization ---------------------------------------------------------

// Columns: t,avg_sq_error,gamma,lambda1,rank,alignment then err_0..err_{N-1}
// when per_learner is set; alignment (or any missing diagnostic) prints as an
// empty cell. Floats carry 17 significant digits and re-parse exactly.
void write_trace_csv(const Trace& trace, std::ostream& os, bool per_learner = false);
void write_trace_csv(const Trace& trace, const std::string& path, bool per_learner = false);

// Columns: axis_value,seed,iterations,T,S,cost.
void write_sweep_csv(const SweepTable& table, std::ostream& os);
void write_sweep_csv(const SweepTable& table, const std::string& path);

void write_spec(const ExperimentSpec& spec, std::ostream& os);
std::string spec_to_string(const ExperimentSpec& spec);
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec read_spec(const std::string& path);

// Dotted-path override applied after parsing, e.g. "noise.delta_max=0.01".
void apply_override(ExperimentSpec& spec, const std::string& key,
                    const std::string& value);

std::uint64_t spec_hash(const ExperimentSpec& spec);

std::string format_double(double v);  // %.17g, the round-trip format

}  // namespace classteach
