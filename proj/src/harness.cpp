#include "classteach/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace classteach {

bool EtaSpec::operator==(const EtaSpec& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Fixed: return value == o.value;
    case Kind::UniformRange: return lo == o.lo && hi == o.hi;
    case Kind::Clustered: return values == o.values;
  }
  return false;
}

bool W0Spec::operator==(const W0Spec& o) const {
  if (kind != o.kind) return false;
  if (kind == Kind::UniformBall) return true;
  if (num_clusters != o.num_clusters || center_norm != o.center_norm ||
      sigma != o.sigma || sizes != o.sizes || centers.size() != o.centers.size())
    return false;
  for (size_t i = 0; i < centers.size(); ++i)
    if (centers[i] != o.centers[i]) return false;
  return true;
}

bool TargetSpec::operator==(const TargetSpec& o) const {
  if (kind != o.kind) return false;
  return kind == Kind::RandomOnSphere ? radius == o.radius : vec == o.vec;
}

bool ExperimentSpec::operator==(const ExperimentSpec& o) const {
  return d == o.d && n == o.n && eta == o.eta && w0 == o.w0 && target == o.target &&
         d_w == o.d_w && d_x == o.d_x && eps == o.eps && algorithm == o.algorithm &&
         noise.kind == o.noise.kind && noise.magnitude == o.noise.magnitude &&
         gamma_policy == o.gamma_policy && mode == o.mode && max_iters == o.max_iters &&
         seed == o.seed && partition_by == o.partition_by &&
         partition_k == o.partition_k && lambda == o.lambda;
}

void ExperimentSpec::validate() const {
  if (d < 1) throw InvalidInput("spec: d must be >= 1");
  if (n < 1) throw InvalidInput("spec: n must be >= 1");
  if (!(eps > 0.0)) throw InvalidInput("spec: eps must be positive");
  if (!(d_w > 0.0) || !(d_x > 0.0)) throw InvalidInput("spec: d_w and d_x must be positive");
  if (max_iters < 1) throw InvalidInput("spec: max_iters must be >= 1");
  if (noise.magnitude < 0.0) throw InvalidInput("spec: noise magnitude must be >= 0");
  switch (eta.kind) {
    case EtaSpec::Kind::Fixed:
      if (!(eta.value > 0.0)) throw InvalidInput("spec: eta value must be positive");
      break;
    case EtaSpec::Kind::UniformRange:
      if (!(eta.lo > 0.0) || eta.hi < eta.lo)
        throw InvalidInput("spec: eta range must satisfy 0 < lo <= hi");
      break;
    case EtaSpec::Kind::Clustered:
      if (eta.values.empty()) throw InvalidInput("spec: clustered eta needs values");
      for (double v : eta.values)
        if (!(v > 0.0)) throw InvalidInput("spec: eta values must be positive");
      break;
  }
  if (w0.kind == W0Spec::Kind::GaussianClusters) {
    if (w0.num_clusters < 1 && w0.centers.empty())
      throw InvalidInput("spec: gaussian clusters need num_clusters or centers");
    if (w0.sigma < 0.0) throw InvalidInput("spec: w0 sigma must be >= 0");
    if (!w0.sizes.empty()) {
      long total = 0;
      for (int s : w0.sizes) {
        if (s < 0) throw InvalidInput("spec: cluster sizes must be >= 0");
        total += s;
      }
      if (total != n) throw InvalidInput("spec: cluster sizes must sum to n");
    }
  }
  if (target.kind == TargetSpec::Kind::RandomOnSphere) {
    if (!(target.radius >= 0.0) || target.radius > d_w)
      throw InvalidInput("spec: target radius must lie in [0, d_w]");
  } else {
    if (target.vec.size() != d) throw InvalidInput("spec: explicit target has wrong dimension");
    if (target.vec.norm() > d_w * (1.0 + 1e-12))
      throw InvalidInput("spec: explicit target outside the hypothesis ball");
  }
  if (noise.kind != NoiseKind::None && algorithm != Algorithm::CT)
    throw InvalidInput("spec: noisy teaching is defined for the ct algorithm only");
  if (partition_k < 0 || partition_k > n)
    throw InvalidInput("spec: partition_k must lie in [0, n]");
}

std::pair<Classroom, Hypothesis> materialize(const ExperimentSpec& spec, Rng& rng) {
  spec.validate();
  Classroom c;
  c.d_w = spec.d_w;
  c.d_x = spec.d_x;
  c.learners.resize(static_cast<size_t>(spec.n));

  for (int j = 0; j < spec.n; ++j) {
    double eta = 0.0;
    switch (spec.eta.kind) {
      case EtaSpec::Kind::Fixed:
        eta = spec.eta.value;
        break;
      case EtaSpec::Kind::UniformRange:
        eta = spec.eta.lo == spec.eta.hi ? spec.eta.lo
                                         : rng.uniform(spec.eta.lo, spec.eta.hi);
        break;
      case EtaSpec::Kind::Clustered: {
        const size_t m = spec.eta.values.size();
        const size_t block = (static_cast<size_t>(j) * m) / static_cast<size_t>(spec.n);
        eta = spec.eta.values[std::min(block, m - 1)];
        break;
      }
    }
    c.learners[static_cast<size_t>(j)].eta = eta;
  }

  if (spec.w0.kind == W0Spec::Kind::UniformBall) {
    for (auto& l : c.learners) l.state = rng.ball_vector(spec.d, spec.d_w);
  } else {
    std::vector<Eigen::VectorXd> centers = spec.w0.centers;
    if (centers.empty()) {
      for (int i = 0; i < spec.w0.num_clusters; ++i) {
        Eigen::VectorXd ctr = Eigen::VectorXd::Zero(spec.d);
        ctr[i % spec.d] = spec.w0.center_norm * spec.d_w;
        centers.push_back(ctr);
      }
    }
    for (const auto& ctr : centers)
      if (ctr.size() != spec.d) throw InvalidInput("spec: cluster center has wrong dimension");
    const int k = static_cast<int>(centers.size());
    std::vector<int> sizes = spec.w0.sizes;
    if (sizes.empty()) {
      sizes.assign(static_cast<size_t>(k), spec.n / k);
      for (int i = 0; i < spec.n % k; ++i) sizes[static_cast<size_t>(i)] += 1;
    }
    if (static_cast<int>(sizes.size()) != k)
      throw InvalidInput("spec: one size per cluster center required");
    int j = 0;
    for (int g = 0; g < k; ++g) {
      for (int s = 0; s < sizes[static_cast<size_t>(g)]; ++s, ++j) {
        const Eigen::VectorXd w =
            centers[static_cast<size_t>(g)] + spec.w0.sigma * rng.normal_vector(spec.d);
        c.learners[static_cast<size_t>(j)].state = project_ball(w, spec.d_w);
      }
    }
  }

  for (auto& l : c.learners) {
    if (spec.noise.kind == NoiseKind::StochasticRate) {
      l.kind = LearnerKind::StochasticRate;
      l.sigma = spec.noise.magnitude;
    } else if (spec.noise.kind == NoiseKind::Sgld) {
      l.kind = LearnerKind::Sgld;
      l.inv_beta = spec.noise.magnitude;
    }
  }

  Hypothesis target;
  if (spec.target.kind == TargetSpec::Kind::RandomOnSphere) {
    target = spec.target.radius * rng.unit_vector(spec.d);
  } else {
    target = spec.target.vec;
  }
  c.validate();
  return {c, target};
}

RunResult run(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();

  Rng mat_rng(mix_seed(spec.seed, 1));
  auto [classroom, target] = materialize(spec, mat_rng);

  TeachConfig cfg;
  cfg.eps = spec.eps;
  cfg.mode = spec.mode;
  cfg.gamma_policy = spec.gamma_policy;
  cfg.max_iters = spec.max_iters;
  cfg.seed = mix_seed(spec.seed, 2);

  RunResult res;
  res.spec_hash = spec_hash(spec);
  res.n = spec.n;

  switch (spec.algorithm) {
    case Algorithm::CT: {
      Trace tr;
      switch (spec.noise.kind) {
        case NoiseKind::None:
          tr = ct_teach(classroom, target, cfg);
          break;
        case NoiseKind::NoisyState:
          tr = ct_teach_noisy_state(classroom, target, cfg, spec.noise.magnitude);
          break;
        case NoiseKind::NoisyScatter:
          tr = ct_teach_noisy_scatter(classroom, target, cfg, spec.noise.magnitude);
          break;
        case NoiseKind::StochasticRate:
          tr = ct_teach_stochastic_rate(classroom, target, cfg, spec.noise.magnitude);
          break;
        case NoiseKind::Sgld:
          tr = ct_teach_sgld(classroom, target, cfg, spec.noise.magnitude);
          break;
      }
      res.teacher_cost = tr.iterations();
      res.student_iterations = tr.iterations() * static_cast<long>(spec.n);
      res.iterations = tr.iterations();
      res.status = tr.status;
      res.traces.push_back(std::move(tr));
      break;
    }
    case Algorithm::IT: {
      auto traces = it_teach(classroom, target, cfg);
      bool all_ok = true;
      for (const auto& tr : traces) {
        res.teacher_cost += tr.iterations();
        res.student_iterations += tr.iterations();
        res.iterations = std::max(res.iterations, tr.iterations());
        if (tr.status == RunStatus::Budget) all_ok = false;
      }
      res.status = all_ok ? (spec.mode == ConvergenceMode::Avg ? RunStatus::ConvergedAvg
                                                               : RunStatus::ConvergedAll)
                          : RunStatus::Budget;
      res.traces = std::move(traces);
      break;
    }
    case Algorithm::CTwPOpt:
    case Algorithm::CTwPRand: {
      Partition part;
      if (spec.partition_by == PartitionBy::Eta) {
        std::vector<double> etas(static_cast<size_t>(spec.n));
        for (int j = 0; j < spec.n; ++j) etas[static_cast<size_t>(j)] = classroom.learners[j].eta;
        part = partition_by_eta(etas);
      } else {
        int k = spec.partition_k;
        if (k == 0)
          k = spec.w0.centers.empty() ? spec.w0.num_clusters
                                      : static_cast<int>(spec.w0.centers.size());
        Rng prng(mix_seed(spec.seed, 3));
        part = partition_by_w0(classroom, k, prng);
      }
      if (spec.algorithm == Algorithm::CTwPRand) {
        // Random grouping with the same group count as the informed partition.
        Rng prng(mix_seed(spec.seed, 4));
        part = partition_random(spec.n, part.group_count(), prng);
      }
      const auto pr = teach_partitions(classroom, target, part, cfg);
      res.teacher_cost = pr.teacher_cost;
      res.student_iterations = pr.student_iterations;
      for (const auto& tr : pr.group_traces)
        res.iterations = std::max(res.iterations, tr.iterations());
      res.status = pr.status;
      res.traces = pr.group_traces;
      break;
    }
  }

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::DeltaMax: return "delta_max";
    case SweepAxis::Sigma: return "sigma";
    case SweepAxis::InvBeta: return "inv_beta";
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::EtaDiversity: return "eta_diversity";
    case SweepAxis::W0Diversity: return "w0_diversity";
  }
  return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "delta_max") return SweepAxis::DeltaMax;
  if (s == "sigma") return SweepAxis::Sigma;
  if (s == "inv_beta") return SweepAxis::InvBeta;
  if (s == "lambda") return SweepAxis::Lambda;
  if (s == "eta_diversity") return SweepAxis::EtaDiversity;
  if (s == "w0_diversity") return SweepAxis::W0Diversity;
  throw InvalidInput("unknown sweep axis: " + s);
}

ExperimentSpec spec_for_cell(const ExperimentSpec& base, SweepAxis axis, double value) {
  ExperimentSpec spec = base;
  switch (axis) {
    case SweepAxis::DeltaMax:
      spec.noise = {NoiseKind::NoisyState, value};
      break;
    case SweepAxis::Sigma:
      spec.noise = {NoiseKind::StochasticRate, value};
      break;
    case SweepAxis::InvBeta:
      spec.noise = {NoiseKind::Sgld, value};
      break;
    case SweepAxis::Lambda:
      spec.lambda = value;
      break;
    case SweepAxis::EtaDiversity: {
      double anchor = 0.1;
      if (base.eta.kind == EtaSpec::Kind::Fixed) anchor = base.eta.value;
      if (base.eta.kind == EtaSpec::Kind::UniformRange) anchor = base.eta.lo;
      spec.eta.kind = EtaSpec::Kind::UniformRange;
      spec.eta.lo = anchor;
      spec.eta.hi = anchor + value;
      break;
    }
    case SweepAxis::W0Diversity: {
      const int k = static_cast<int>(value);
      if (k < 1 || static_cast<double>(k) != value)
        throw InvalidInput("w0_diversity grid values must be positive integers");
      spec.w0.kind = W0Spec::Kind::GaussianClusters;
      spec.w0.num_clusters = k;
      spec.w0.centers.clear();
      spec.w0.sizes.clear();
      spec.partition_by = PartitionBy::W0;
      if (spec.partition_k == 0) spec.partition_k = k;
      break;
    }
  }
  return spec;
}

SweepTable sweep(const ExperimentSpec& base, SweepAxis axis,
                 const std::vector<double>& grid, int seeds_per_cell, int workers) {
  if (grid.empty()) throw InvalidInput("sweep: empty grid");
  if (seeds_per_cell < 1) throw InvalidInput("sweep: seeds_per_cell must be >= 1");

  SweepTable table;
  table.axis = axis;
  table.grid = grid;
  table.seeds_per_cell = seeds_per_cell;

  const size_t cells = grid.size() * static_cast<size_t>(seeds_per_cell);
  table.rows.resize(cells);

  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= cells) return;
      const size_t vi = i / static_cast<size_t>(seeds_per_cell);
      ExperimentSpec spec = spec_for_cell(base, axis, grid[vi]);
      spec.seed = mix_seed(base.seed, i);
      const RunResult res = run(spec);
      SweepRow row;
      row.axis_value = grid[vi];
      row.seed = spec.seed;
      row.iterations = res.iterations;
      row.teacher_cost = res.teacher_cost;
      row.student_cost = res.student_cost();
      row.cost = cost(res.teacher_cost, res.student_cost(), spec.lambda);
      table.rows[i] = row;
    }
  };

  const int nthreads = std::max(1, std::min<int>(workers, static_cast<int>(cells)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return table;
}

std::vector<SweepAggregate> aggregate(const SweepTable& table) {
  std::vector<SweepAggregate> out;
  const int reps = table.seeds_per_cell;
  for (size_t vi = 0; vi < table.grid.size(); ++vi) {
    SweepAggregate agg;
    agg.axis_value = table.grid[vi];
    double si = 0, si2 = 0, sc = 0, sc2 = 0, st = 0, ss = 0;
    for (int r = 0; r < reps; ++r) {
      const SweepRow& row = table.rows[vi * static_cast<size_t>(reps) + static_cast<size_t>(r)];
      si += static_cast<double>(row.iterations);
      si2 += static_cast<double>(row.iterations) * static_cast<double>(row.iterations);
      sc += row.cost;
      sc2 += row.cost * row.cost;
      st += static_cast<double>(row.teacher_cost);
      ss += row.student_cost;
    }
    const double n = static_cast<double>(reps);
    agg.mean_iterations = si / n;
    agg.std_iterations = std::sqrt(std::max(0.0, si2 / n - agg.mean_iterations * agg.mean_iterations));
    agg.mean_cost = sc / n;
    agg.std_cost = std::sqrt(std::max(0.0, sc2 / n - agg.mean_cost * agg.mean_cost));
    agg.mean_teacher = st / n;
    agg.mean_student = ss / n;
    out.push_back(agg);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string diag_cell(const TraceRecord& rec, const char* key) {
  const auto it = rec.diagnostics.find(key);
  return it == rec.diagnostics.end() ? std::string() : format_double(it->second);
}

}  // namespace

void write_trace_csv(const Trace& trace, std::ostream& os, bool per_learner) {
  os << "t,avg_sq_error,gamma,lambda1,rank,alignment";
  if (per_learner) {
    const Eigen::Index n = trace.initial_per_learner_sq_error.size();
    for (Eigen::Index j = 0; j < n; ++j) os << ",err_" << j;
  }
  os << "\n";
  for (const auto& rec : trace.records) {
    os << rec.t << ',' << format_double(rec.avg_sq_error) << ','
       << format_double(rec.gamma) << ',' << diag_cell(rec, "lambda1") << ','
       << diag_cell(rec, "rank") << ',' << diag_cell(rec, "alignment");
    if (per_learner)
      for (Eigen::Index j = 0; j < rec.per_learner_sq_error.size(); ++j)
        os << ',' << format_double(rec.per_learner_sq_error[j]);
    os << "\n";
  }
}

void write_trace_csv(const Trace& trace, const std::string& path, bool per_learner) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open output file: " + path);
  write_trace_csv(trace, out, per_learner);
}

void write_sweep_csv(const SweepTable& table, std::ostream& os) {
  os << "axis_value,seed,iterations,T,S,cost\n";
  for (const auto& row : table.rows) {
    os << format_double(row.axis_value) << ',' << row.seed << ',' << row.iterations
       << ',' << row.teacher_cost << ',' << format_double(row.student_cost) << ','
       << format_double(row.cost) << "\n";
  }
}

void write_sweep_csv(const SweepTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open output file: " + path);
  write_sweep_csv(table, out);
}

std::uint64_t spec_hash(const ExperimentSpec& spec) {
  const std::string text = spec_to_string(spec);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace classteach
