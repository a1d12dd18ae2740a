#include <fstream>
#include <sstream>

#include "classteach/harness.hpp"

namespace classteach {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

double parse_double(const std::string& v, int line) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw SpecParseError("bad number '" + v + "'", line);
  }
}

long parse_long(const std::string& v, int line) {
  try {
    size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw SpecParseError("bad integer '" + v + "'", line);
  }
}

std::uint64_t parse_u64(const std::string& v, int line) {
  try {
    size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw SpecParseError("bad seed '" + v + "'", line);
  }
}

std::vector<double> parse_double_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(parse_double(trim(cell), line));
  if (out.empty()) throw SpecParseError("empty list", line);
  return out;
}

Algorithm parse_algorithm(const std::string& v, int line) {
  if (v == "ct") return Algorithm::CT;
  if (v == "it") return Algorithm::IT;
  if (v == "ctwp-opt") return Algorithm::CTwPOpt;
  if (v == "ctwp-rand") return Algorithm::CTwPRand;
  throw SpecParseError("unknown algorithm '" + v + "'", line);
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::CT: return "ct";
    case Algorithm::IT: return "it";
    case Algorithm::CTwPOpt: return "ctwp-opt";
    case Algorithm::CTwPRand: return "ctwp-rand";
  }
  return "ct";
}

NoiseKind parse_noise_kind(const std::string& v, int line) {
  if (v == "none") return NoiseKind::None;
  if (v == "noisy_state") return NoiseKind::NoisyState;
  if (v == "noisy_scatter") return NoiseKind::NoisyScatter;
  if (v == "stochastic_rate") return NoiseKind::StochasticRate;
  if (v == "sgld") return NoiseKind::Sgld;
  throw SpecParseError("unknown noise kind '" + v + "'", line);
}

const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::NoisyState: return "noisy_state";
    case NoiseKind::NoisyScatter: return "noisy_scatter";
    case NoiseKind::StochasticRate: return "stochastic_rate";
    case NoiseKind::Sgld: return "sgld";
  }
  return "none";
}

const char* noise_magnitude_key(NoiseKind k) {
  switch (k) {
    case NoiseKind::NoisyState: return "delta_max";
    case NoiseKind::NoisyScatter: return "lambda_max";
    case NoiseKind::StochasticRate: return "sigma";
    case NoiseKind::Sgld: return "inv_beta";
    case NoiseKind::None: break;
  }
  return "magnitude";
}

// Section-aware key handler shared by the parser and apply_override; `line`
// is 0 for overrides (errors then surface as InvalidInput).
void set_key(ExperimentSpec& spec, const std::string& section, const std::string& key,
             const std::string& value, int line) {
  auto fail = [&](const std::string& msg) -> void {
    if (line > 0) throw SpecParseError(msg, line);
    throw InvalidInput("override error: " + msg);
  };

  if (section.empty()) {
    if (key == "spec_version") {
      if (value != "1") fail("unsupported spec_version '" + value + "'");
    } else if (key == "d") {
      spec.d = static_cast<int>(parse_long(value, line));
    } else if (key == "n") {
      spec.n = static_cast<int>(parse_long(value, line));
    } else if (key == "d_w") {
      spec.d_w = parse_double(value, line);
    } else if (key == "d_x") {
      spec.d_x = parse_double(value, line);
    } else if (key == "eps") {
      spec.eps = parse_double(value, line);
    } else if (key == "algorithm") {
      spec.algorithm = parse_algorithm(value, line);
    } else if (key == "gamma_policy") {
      if (value == "static") spec.gamma_policy = GammaPolicy::Static;
      else if (value == "dynamic") spec.gamma_policy = GammaPolicy::Dynamic;
      else fail("unknown gamma_policy '" + value + "'");
    } else if (key == "mode") {
      if (value == "avg") spec.mode = ConvergenceMode::Avg;
      else if (value == "all") spec.mode = ConvergenceMode::All;
      else fail("unknown mode '" + value + "'");
    } else if (key == "max_iters") {
      spec.max_iters = parse_long(value, line);
    } else if (key == "seed") {
      spec.seed = parse_u64(value, line);
    } else if (key == "lambda") {
      spec.lambda = parse_double(value, line);
    } else if (key == "partition_by") {
      if (value == "eta") spec.partition_by = PartitionBy::Eta;
      else if (value == "w0") spec.partition_by = PartitionBy::W0;
      else fail("unknown partition_by '" + value + "'");
    } else if (key == "partition_k") {
      spec.partition_k = static_cast<int>(parse_long(value, line));
    } else {
      fail("unknown key '" + key + "'");
    }
    return;
  }

  if (section == "eta") {
    if (key == "kind") {
      if (value == "fixed") spec.eta.kind = EtaSpec::Kind::Fixed;
      else if (value == "uniform_range") spec.eta.kind = EtaSpec::Kind::UniformRange;
      else if (value == "clustered") spec.eta.kind = EtaSpec::Kind::Clustered;
      else fail("unknown eta kind '" + value + "'");
    } else if (key == "value") {
      spec.eta.value = parse_double(value, line);
    } else if (key == "lo") {
      spec.eta.lo = parse_double(value, line);
    } else if (key == "hi") {
      spec.eta.hi = parse_double(value, line);
    } else if (key == "values") {
      spec.eta.values = parse_double_list(value, line);
    } else {
      fail("unknown [eta] key '" + key + "'");
    }
    return;
  }

  if (section == "w0") {
    if (key == "kind") {
      if (value == "uniform_ball") spec.w0.kind = W0Spec::Kind::UniformBall;
      else if (value == "gaussian_clusters") spec.w0.kind = W0Spec::Kind::GaussianClusters;
      else fail("unknown w0 kind '" + value + "'");
    } else if (key == "num_clusters") {
      spec.w0.num_clusters = static_cast<int>(parse_long(value, line));
    } else if (key == "center_norm") {
      spec.w0.center_norm = parse_double(value, line);
    } else if (key == "sigma") {
      spec.w0.sigma = parse_double(value, line);
    } else if (key == "sizes") {
      spec.w0.sizes.clear();
      for (double v : parse_double_list(value, line))
        spec.w0.sizes.push_back(static_cast<int>(v));
    } else if (key == "center") {
      const auto vals = parse_double_list(value, line);
      Eigen::VectorXd ctr(static_cast<Eigen::Index>(vals.size()));
      for (size_t i = 0; i < vals.size(); ++i) ctr[static_cast<Eigen::Index>(i)] = vals[i];
      spec.w0.centers.push_back(ctr);
    } else {
      fail("unknown [w0] key '" + key + "'");
    }
    return;
  }

  if (section == "target") {
    if (key == "kind") {
      if (value == "random_on_sphere") spec.target.kind = TargetSpec::Kind::RandomOnSphere;
      else if (value == "explicit") spec.target.kind = TargetSpec::Kind::Explicit;
      else fail("unknown target kind '" + value + "'");
    } else if (key == "radius") {
      spec.target.radius = parse_double(value, line);
    } else if (key == "vec") {
      const auto vals = parse_double_list(value, line);
      spec.target.vec.resize(static_cast<Eigen::Index>(vals.size()));
      for (size_t i = 0; i < vals.size(); ++i)
        spec.target.vec[static_cast<Eigen::Index>(i)] = vals[i];
    } else {
      fail("unknown [target] key '" + key + "'");
    }
    return;
  }

  if (section == "noise") {
    if (key == "kind") {
      spec.noise.kind = parse_noise_kind(value, line);
    } else if (key == "magnitude") {
      spec.noise.magnitude = parse_double(value, line);
    } else if (key == "delta_max") {
      spec.noise.kind = NoiseKind::NoisyState;
      spec.noise.magnitude = parse_double(value, line);
    } else if (key == "lambda_max") {
      spec.noise.kind = NoiseKind::NoisyScatter;
      spec.noise.magnitude = parse_double(value, line);
    } else if (key == "sigma") {
      spec.noise.kind = NoiseKind::StochasticRate;
      spec.noise.magnitude = parse_double(value, line);
    } else if (key == "inv_beta") {
      spec.noise.kind = NoiseKind::Sgld;
      spec.noise.magnitude = parse_double(value, line);
    } else {
      fail("unknown [noise] key '" + key + "'");
    }
    return;
  }

  fail("unknown section '" + section + "'");
}

}  // namespace

ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec spec;
  std::string section;
  std::string line;
  int line_no = 0;
  bool saw_version = false;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(strip_comment(line));
    if (text.empty()) continue;

    if (text.front() == '[') {
      if (text.back() != ']') throw SpecParseError("unterminated section header", line_no);
      section = trim(text.substr(1, text.size() - 2));
      if (section.empty()) throw SpecParseError("empty section name", line_no);
      continue;
    }

    const auto colon = text.find(':');
    if (colon == std::string::npos)
      throw SpecParseError("expected 'key: value'", line_no);
    const std::string key = trim(text.substr(0, colon));
    const std::string value = trim(text.substr(colon + 1));
    if (key.empty()) throw SpecParseError("empty key", line_no);
    if (value.empty()) throw SpecParseError("empty value for key '" + key + "'", line_no);

    if (!saw_version) {
      if (section.empty() && key == "spec_version") {
        set_key(spec, section, key, value, line_no);
        saw_version = true;
        continue;
      }
      throw SpecParseError("spec must start with 'spec_version: 1'", line_no);
    }
    set_key(spec, section, key, value, line_no);
  }
  if (!saw_version) throw SpecParseError("missing 'spec_version: 1'", std::max(line_no, 1));
  return spec;
}

ExperimentSpec read_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open spec file: " + path);
  return parse_spec(in);
}

void write_spec(const ExperimentSpec& spec, std::ostream& os) {
  os << "spec_version: 1\n";
  os << "d: " << spec.d << "\n";
  os << "n: " << spec.n << "\n";
  os << "d_w: " << format_double(spec.d_w) << "\n";
  os << "d_x: " << format_double(spec.d_x) << "\n";
  os << "eps: " << format_double(spec.eps) << "\n";
  os << "algorithm: " << algorithm_name(spec.algorithm) << "\n";
  os << "gamma_policy: " << (spec.gamma_policy == GammaPolicy::Static ? "static" : "dynamic")
     << "\n";
  os << "mode: " << (spec.mode == ConvergenceMode::Avg ? "avg" : "all") << "\n";
  os << "max_iters: " << spec.max_iters << "\n";
  os << "seed: " << spec.seed << "\n";
  os << "lambda: " << format_double(spec.lambda) << "\n";
  os << "partition_by: " << (spec.partition_by == PartitionBy::Eta ? "eta" : "w0") << "\n";
  os << "partition_k: " << spec.partition_k << "\n";

  os << "\n[eta]\n";
  switch (spec.eta.kind) {
    case EtaSpec::Kind::Fixed:
      os << "kind: fixed\nvalue: " << format_double(spec.eta.value) << "\n";
      break;
    case EtaSpec::Kind::UniformRange:
      os << "kind: uniform_range\nlo: " << format_double(spec.eta.lo)
         << "\nhi: " << format_double(spec.eta.hi) << "\n";
      break;
    case EtaSpec::Kind::Clustered: {
      os << "kind: clustered\nvalues: ";
      for (size_t i = 0; i < spec.eta.values.size(); ++i)
        os << (i ? ", " : "") << format_double(spec.eta.values[i]);
      os << "\n";
      break;
    }
  }

  os << "\n[w0]\n";
  if (spec.w0.kind == W0Spec::Kind::UniformBall) {
    os << "kind: uniform_ball\n";
  } else {
    os << "kind: gaussian_clusters\n";
    os << "num_clusters: " << spec.w0.num_clusters << "\n";
    os << "center_norm: " << format_double(spec.w0.center_norm) << "\n";
    os << "sigma: " << format_double(spec.w0.sigma) << "\n";
    if (!spec.w0.sizes.empty()) {
      os << "sizes: ";
      for (size_t i = 0; i < spec.w0.sizes.size(); ++i)
        os << (i ? ", " : "") << spec.w0.sizes[i];
      os << "\n";
    }
    for (const auto& ctr : spec.w0.centers) {
      os << "center: ";
      for (Eigen::Index i = 0; i < ctr.size(); ++i)
        os << (i ? ", " : "") << format_double(ctr[i]);
      os << "\n";
    }
  }

  os << "\n[target]\n";
  if (spec.target.kind == TargetSpec::Kind::RandomOnSphere) {
    os << "kind: random_on_sphere\nradius: " << format_double(spec.target.radius) << "\n";
  } else {
    os << "kind: explicit\nvec: ";
    for (Eigen::Index i = 0; i < spec.target.vec.size(); ++i)
      os << (i ? ", " : "") << format_double(spec.target.vec[i]);
    os << "\n";
  }

  os << "\n[noise]\n";
  os << "kind: " << noise_kind_name(spec.noise.kind) << "\n";
  if (spec.noise.kind != NoiseKind::None)
    os << noise_magnitude_key(spec.noise.kind) << ": "
       << format_double(spec.noise.magnitude) << "\n";
}

std::string spec_to_string(const ExperimentSpec& spec) {
  std::ostringstream os;
  write_spec(spec, os);
  return os.str();
}

void apply_override(ExperimentSpec& spec, const std::string& key,
                    const std::string& value) {
  const auto dot = key.find('.');
  const std::string section = dot == std::string::npos ? std::string() : key.substr(0, dot);
  const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
  try {
    set_key(spec, section, leaf, value, 0);
  } catch (const SpecParseError& e) {
    throw InvalidInput("override error for '" + key + "': " + e.what());
  }
}

}  // namespace classteach
