#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <classteach/checks.hpp>
#include <classteach/harness.hpp>

using namespace classteach;

namespace {

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw InvalidInput("bad grid value '" + cell + "'");
    }
  }
  if (out.empty()) throw InvalidInput("empty grid");
  return out;
}

ExperimentSpec load_spec(const std::string& path, const std::vector<std::string>& sets,
                         bool seed_given, std::uint64_t seed) {
  ExperimentSpec spec = read_spec(path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("--set expects key=value, got '" + kv + "'");
    apply_override(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (seed_given) spec.seed = seed;
  spec.validate();
  return spec;
}

// trace.csv -> trace.g3.csv
std::string with_suffix(const std::string& path, const std::string& tag) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || dot == 0) return path + "." + tag;
  return path.substr(0, dot) + "." + tag + path.substr(dot);
}

int default_workers() {
  if (const char* env = std::getenv("CLASSROOM_TEACH_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

int cmd_teach(const std::string& spec_path, const std::string& out_path,
              const std::vector<std::string>& sets, bool seed_given, std::uint64_t seed,
              bool per_learner) {
  const ExperimentSpec spec = load_spec(spec_path, sets, seed_given, seed);
  const RunResult res = run(spec);

  std::cout << "status: " << to_string(res.status) << "\n"
            << "iterations: " << res.iterations << "\n"
            << "teacher_cost: " << res.teacher_cost << "\n"
            << "student_cost: " << format_double(res.student_cost()) << "\n";

  if (!out_path.empty()) {
    if (res.traces.size() == 1) {
      write_trace_csv(res.traces[0], out_path, per_learner);
    } else {
      const char* tag = spec.algorithm == Algorithm::IT ? "l" : "g";
      for (size_t i = 0; i < res.traces.size(); ++i)
        write_trace_csv(res.traces[i], with_suffix(out_path, tag + std::to_string(i)),
                        per_learner);
    }
  }
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& axis_name,
              const std::string& grid_csv, int seeds_per_cell, int workers,
              const std::string& out_path, const std::vector<std::string>& sets,
              bool seed_given, std::uint64_t seed) {
  const ExperimentSpec spec = load_spec(spec_path, sets, seed_given, seed);
  const SweepAxis axis = sweep_axis_from_string(axis_name);
  const SweepTable table = sweep(spec, axis, parse_grid(grid_csv), seeds_per_cell, workers);

  for (const auto& agg : aggregate(table)) {
    std::cout << to_string(axis) << "=" << format_double(agg.axis_value)
              << " mean_iterations=" << format_double(agg.mean_iterations)
              << " std_iterations=" << format_double(agg.std_iterations)
              << " mean_cost=" << format_double(agg.mean_cost) << "\n";
  }
  if (!out_path.empty()) write_sweep_csv(table, out_path);
  return 0;
}

int cmd_pool_teach(const std::string& spec_path, const std::string& pool_path,
                   const std::string& out_path, const std::vector<std::string>& sets,
                   bool seed_given, std::uint64_t seed, bool per_learner) {
  const ExperimentSpec spec = load_spec(spec_path, sets, seed_given, seed);
  Rng mat_rng(mix_seed(spec.seed, 1));
  auto [classroom, target] = materialize(spec, mat_rng);
  const DirectionPool pool = load_pool_csv(pool_path, spec.d_x);

  TeachConfig cfg;
  cfg.eps = spec.eps;
  cfg.mode = spec.mode;
  cfg.gamma_policy = spec.gamma_policy;
  cfg.max_iters = spec.max_iters;
  cfg.seed = mix_seed(spec.seed, 2);

  const Trace tr = pool_teach_class(classroom, target, pool, cfg);
  std::cout << "status: " << to_string(tr.status) << "\n"
            << "iterations: " << tr.iterations() << "\n";
  if (!tr.records.empty())
    std::cout << "alignment_min: " << format_double(tr.summary.at("alignment_min")) << "\n";
  if (!out_path.empty()) write_trace_csv(tr, out_path, per_learner);
  return 0;
}

int cmd_partition(const std::string& spec_path, const std::string& lambda_csv,
                  const std::string& out_path, const std::vector<std::string>& sets,
                  bool seed_given, std::uint64_t seed) {
  const ExperimentSpec spec = load_spec(spec_path, sets, seed_given, seed);
  Rng mat_rng(mix_seed(spec.seed, 1));
  auto [classroom, target] = materialize(spec, mat_rng);

  Partition part;
  if (spec.partition_by == PartitionBy::Eta) {
    std::vector<double> etas;
    for (const auto& l : classroom.learners) etas.push_back(l.eta);
    part = partition_by_eta(etas);
  } else {
    int k = spec.partition_k;
    if (k == 0)
      k = spec.w0.centers.empty() ? spec.w0.num_clusters
                                  : static_cast<int>(spec.w0.centers.size());
    Rng prng(mix_seed(spec.seed, 3));
    part = partition_by_w0(classroom, k, prng);
  }

  std::cout << "groups: " << part.group_count() << "\n";
  for (int g = 0; g < part.group_count(); ++g) {
    double lo = 1e300, hi = 0.0;
    for (int idx : part.groups[static_cast<size_t>(g)]) {
      lo = std::min(lo, classroom.learners[idx].eta);
      hi = std::max(hi, classroom.learners[idx].eta);
    }
    std::cout << "  group " << g << ": size " << part.groups[static_cast<size_t>(g)].size()
              << " eta [" << format_double(lo) << ", " << format_double(hi) << "]\n";
  }

  TeachConfig cfg;
  cfg.eps = spec.eps;
  cfg.mode = spec.mode;
  cfg.gamma_policy = spec.gamma_policy;
  cfg.max_iters = spec.max_iters;
  cfg.seed = mix_seed(spec.seed, 2);

  const std::vector<Strategy> all = {Strategy::CT, Strategy::CTwPOpt, Strategy::CTwPRand,
                                     Strategy::IT};
  const auto outcomes = run_strategies(classroom, target, cfg, all, &part);
  const std::vector<double> lambdas = parse_grid(lambda_csv);

  std::ostringstream csv;
  csv << "lambda,strategy,T,S,cost,best\n";
  for (double lam : lambdas) {
    Strategy best = Strategy::CT;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& o : outcomes) {
      const double total = cost(o.teacher_cost, o.student_cost(), lam);
      if (total < best_cost) {
        best_cost = total;
        best = o.strategy;
      }
    }
    std::cout << "lambda=" << format_double(lam) << ":";
    for (const auto& o : outcomes) {
      const double total = cost(o.teacher_cost, o.student_cost(), lam);
      std::cout << " " << to_string(o.strategy) << "=" << format_double(total);
      csv << format_double(lam) << ',' << to_string(o.strategy) << ',' << o.teacher_cost
          << ',' << format_double(o.student_cost()) << ',' << format_double(total) << ','
          << (o.strategy == best ? 1 : 0) << "\n";
    }
    std::cout << " best=" << to_string(best) << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw InvalidInput("cannot open output file: " + out_path);
    out << csv.str();
  }
  return 0;
}

// Randomized audit of the per-step guarantees on small classrooms.
int cmd_verify(int seeds) {
  Rng seeder(20240601);
  long checked = 0, failed = 0;
  for (int s = 0; s < seeds; ++s) {
    const int n = 1 + static_cast<int>(seeder.uniform_int(20));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seeder.uniform_int(8));
    const bool narrow = seeder.uniform() < 0.5;
    const double lo = 0.05 + 0.1 * seeder.uniform();

    Classroom c;
    c.d_w = 4.0;
    c.d_x = 2.0;
    for (int j = 0; j < n; ++j) {
      Learner l;
      l.eta = seeder.uniform(lo, narrow ? 1.9 * lo : 5.0 * lo);
      l.state = seeder.ball_vector(d, c.d_w);
      c.learners.push_back(l);
    }
    const Hypothesis target = seeder.ball_vector(d, 1.0);

    TeachConfig cfg;
    cfg.eps = 0.05;
    cfg.max_iters = 5000;
    cfg.seed = seeder.next();
    cfg.gamma_policy = narrow ? GammaPolicy::Dynamic : GammaPolicy::Static;

    std::vector<double> etas;
    for (const auto& l : c.learners) etas.push_back(l.eta);

    const Trace tr = ct_teach(c, target, cfg);
    CheckSummary all;
    all.merge(check_ct_contraction(tr));
    all.merge(check_gamma_validity(tr, etas, c.d_x));
    all.merge(check_labels_consistent(tr, target));
    all.merge(check_monotone_error(tr));
    for (const auto& solo : it_teach(c, target, cfg)) all.merge(check_exact_it_decay(solo));

    checked += all.steps;
    failed += all.violations;
    if (!all.ok())
      std::cerr << "seed " << s << ": " << all.violations
                << " violations, worst excess " << format_double(all.max_excess) << "\n";
  }
  std::cout << "verify: " << seeds << " classrooms, " << checked << " per-step checks, "
            << failed << " violations\n";
  return failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"classroom teaching simulator for gradient-descent learners"};
  app.require_subcommand(1);

  std::string spec_path, out_path, pool_path, axis, grid, lambdas = "0";
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool per_learner = false;
  int seeds_per_cell = 1;
  int workers = default_workers();
  int verify_seeds = 50;
  bool seed_given = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", spec_path, "experiment spec file")->required();
    sub->add_option("--out", out_path, "output CSV path");
    sub->add_option("--set", sets, "override, key=value (repeatable)");
    sub->add_option("--seed", seed, "seed override")
        ->each([&](const std::string&) { seed_given = true; });
  };

  auto* teach = app.add_subcommand("teach", "run one spec and write its trace");
  add_common(teach);
  teach->add_flag("--per-learner", per_learner, "add per-learner error columns");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a grid along one axis");
  add_common(sweep_cmd);
  sweep_cmd
      ->add_option("--axis", axis,
                   "delta_max | sigma | inv_beta | lambda | eta_diversity | w0_diversity")
      ->required();
  sweep_cmd->add_option("--grid", grid, "comma-separated axis values")->required();
  sweep_cmd->add_option("--seeds-per-cell", seeds_per_cell, "replicates per value");
  sweep_cmd->add_option("--workers", workers, "max concurrent cells");

  auto* pool_cmd = app.add_subcommand("pool-teach", "teach from a direction pool");
  add_common(pool_cmd);
  pool_cmd->add_option("--pool", pool_path, "pool CSV, one direction per row")->required();
  pool_cmd->add_flag("--per-learner", per_learner, "add per-learner error columns");

  auto* part_cmd = app.add_subcommand("partition", "report groups and cost trade-offs");
  add_common(part_cmd);
  part_cmd->add_option("--lambdas", lambdas, "comma-separated trade-off factors");

  auto* verify_cmd = app.add_subcommand("verify", "audit per-step guarantees");
  verify_cmd->add_option("--seeds", verify_seeds, "number of random classrooms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (teach->parsed())
      return cmd_teach(spec_path, out_path, sets, seed_given, seed, per_learner);
    if (sweep_cmd->parsed())
      return cmd_sweep(spec_path, axis, grid, seeds_per_cell, workers, out_path, sets,
                       seed_given, seed);
    if (pool_cmd->parsed())
      return cmd_pool_teach(spec_path, pool_path, out_path, sets, seed_given, seed,
                            per_learner);
    if (part_cmd->parsed())
      return cmd_partition(spec_path, lambdas, out_path, sets, seed_given, seed);
    if (verify_cmd->parsed()) return cmd_verify(verify_seeds);
  } catch (const SpecParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
