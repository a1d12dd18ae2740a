#include "classteach/pool.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace classteach {

namespace {

constexpr double kRankTau = 1e-8;
constexpr double kStallFactor = 1e-14;

bool looks_numeric(const std::string& cell) {
  for (char ch : cell) {
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' ||
        ch == '.' || ch == 'e' || ch == 'E')
      continue;
    return false;
  }
  return !cell.empty();
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

}  // namespace

DirectionPool make_pool(const Eigen::MatrixXd& columns, double radius) {
  if (columns.cols() < 1) throw InvalidInput("pool must hold at least one direction");
  if (!(radius > 0.0)) throw InvalidInput("pool radius must be positive");
  DirectionPool p;
  p.radius = radius;
  p.directions.resize(columns.rows(), columns.cols());
  for (Eigen::Index i = 0; i < columns.cols(); ++i) {
    const double n = columns.col(i).norm();
    if (!(n >= 1e-12))
      throw InvalidInput("pool direction " + std::to_string(i) + " is near zero");
    p.directions.col(i) = columns.col(i) / n;
  }
  return p;
}

DirectionPool load_pool_csv(const std::string& path, double radius) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open pool file: " + path);
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  int line_no = 0;
  Eigen::Index d = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_row(line);
    if (line_no == 1 && !cells.empty() && !looks_numeric(cells.front())) continue;  // header
    Eigen::VectorXd v(static_cast<Eigen::Index>(cells.size()));
    for (size_t i = 0; i < cells.size(); ++i) {
      try {
        size_t used = 0;
        v[static_cast<Eigen::Index>(i)] = std::stod(cells[i], &used);
        if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
      } catch (const std::exception&) {
        throw InvalidInput("pool file " + path + " line " + std::to_string(line_no) +
                           ": bad number '" + cells[i] + "'");
      }
    }
    if (d < 0) d = v.size();
    if (v.size() != d)
      throw InvalidInput("pool file " + path + " line " + std::to_string(line_no) +
                         ": inconsistent column count");
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw InvalidInput("pool file " + path + " holds no directions");
  Eigen::MatrixXd cols(d, static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = rows[i];
  return make_pool(cols, radius);
}

std::pair<int, Eigen::VectorXd> pool_select_single(const DirectionPool& p,
                                                   const Eigen::VectorXd& residual) {
  if (residual.size() != p.dim()) throw InvalidInput("pool_select_single: dimension mismatch");
  if (residual.squaredNorm() <= 0.0)
    throw DegenerateLearner("pool_select_single: zero residual");
  int best = 0;
  double best_score = -1.0;
  for (int i = 0; i < p.size(); ++i) {
    const double score = std::abs(residual.dot(p.directions.col(i)));
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return {best, p.directions.col(best)};
}

std::pair<int, Eigen::VectorXd> pool_select_class(const DirectionPool& p,
                                                  const ScatterMatrix& w) {
  if (w.rows() != p.dim()) throw InvalidInput("pool_select_class: dimension mismatch");
  if (w.trace() <= 1e-14 * static_cast<double>(w.rows()))
    throw DegenerateMatrix("pool_select_class: scatter is numerically zero");
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.size(); ++i) {
    const double score = p.directions.col(i).dot(w * p.directions.col(i));
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return {best, p.directions.col(best)};
}

double pool_alignment(const Eigen::VectorXd& selected, const Eigen::VectorXd& reference) {
  if (selected.size() != reference.size())
    throw InvalidInput("pool_alignment: dimension mismatch");
  const double ip = selected.dot(reference);
  return ip * ip;
}

Trace pool_teach_single(const Learner& l, const Hypothesis& target,
                        const DirectionPool& p, const TeachConfig& cfg, double d_w) {
  if (l.state.size() != target.size() || p.dim() != target.size())
    throw InvalidInput("pool_teach_single: dimension mismatch");
  Classroom solo;
  solo.learners = {l};
  solo.d_w = d_w;
  solo.d_x = p.radius;
  solo.validate();

  Trace tr;
  tr.initial_per_learner_sq_error = per_learner_sq_errors(solo, target);
  tr.initial_avg_sq_error = tr.initial_per_learner_sq_error.mean();
  const double gamma = std::min(1.0 / std::sqrt(l.eta), p.radius);
  double alignment_min = std::numeric_limits<double>::infinity();

  long t = 0;
  for (;;) {
    if (converged(solo, target, cfg.eps, cfg.mode)) {
      tr.status = cfg.mode == ConvergenceMode::Avg ? RunStatus::ConvergedAvg
                                                   : RunStatus::ConvergedAll;
      break;
    }
    if (t >= cfg.max_iters) {
      tr.status = RunStatus::Budget;
      break;
    }
    const Eigen::VectorXd residual = solo.learners[0].state - target;
    const double err2 = residual.squaredNorm();
    auto [idx, direction] = pool_select_single(p, residual);
    const double score = std::abs(residual.dot(direction));
    const Eigen::VectorXd reference = residual / residual.norm();
    const double align = pool_alignment(direction, reference);
    alignment_min = std::min(alignment_min, align);

    LabeledExample ex;
    ex.x = gamma * direction;
    ex.y = target.dot(ex.x);
    solo.learners[0] = learner_update(solo.learners[0], ex, d_w);

    TraceRecord rec;
    rec.t = t;
    rec.per_learner_sq_error = per_learner_sq_errors(solo, target);
    rec.avg_sq_error = rec.per_learner_sq_error.mean();
    rec.gamma = gamma;
    rec.example = ex;
    const double a = alpha(solo.learners[0].eta, gamma);
    rec.diagnostics["selected"] = static_cast<double>(idx);
    rec.diagnostics["score"] = score;
    rec.diagnostics["alignment"] = align;
    rec.diagnostics["alpha"] = a;
    rec.diagnostics["predicted_rate"] = align * a;
    rec.diagnostics["stalled"] = score < kStallFactor * err2 ? 1.0 : 0.0;
    tr.records.push_back(std::move(rec));
    ++t;
  }
  if (!tr.records.empty()) tr.summary["alignment_min"] = alignment_min;
  return tr;
}

Trace pool_teach_class(const Classroom& c, const Hypothesis& target,
                       const DirectionPool& p, const TeachConfig& cfg) {
  c.validate();
  if (p.dim() != c.dim() || target.size() != c.dim())
    throw InvalidInput("pool_teach_class: dimension mismatch");

  Classroom room = c;
  Rng rng(cfg.seed);
  Trace tr;
  tr.initial_per_learner_sq_error = per_learner_sq_errors(room, target);
  tr.initial_avg_sq_error = tr.initial_per_learner_sq_error.mean();
  const double gamma = std::min(1.0 / std::sqrt(room.eta_max()), p.radius);
  double alignment_min = std::numeric_limits<double>::infinity();

  long t = 0;
  for (;;) {
    if (converged(room, target, cfg.eps, cfg.mode)) {
      tr.status = cfg.mode == ConvergenceMode::Avg ? RunStatus::ConvergedAvg
                                                   : RunStatus::ConvergedAll;
      break;
    }
    if (t >= cfg.max_iters) {
      tr.status = RunStatus::Budget;
      break;
    }

    Eigen::VectorXd alphas(room.size());
    for (int j = 0; j < room.size(); ++j) alphas[j] = alpha(room.learners[j].eta, gamma);
    const ScatterMatrix w = build_scatter(room, target, gamma, alphas);
    const double avg_err2 = avg_squared_error(room, target);

    auto [idx, direction] = pool_select_class(p, w);
    const double score = direction.dot(w * direction);
    const EigenPair top = top_eigenpair(w, rng);  // alignment reference
    const double align = pool_alignment(direction, top.vector);
    alignment_min = std::min(alignment_min, align);

    LabeledExample ex;
    ex.x = gamma * direction;
    ex.y = target.dot(ex.x);
    for (auto& l : room.learners) l = learner_update(l, ex, room.d_w);

    TraceRecord rec;
    rec.t = t;
    rec.per_learner_sq_error = per_learner_sq_errors(room, target);
    rec.avg_sq_error = rec.per_learner_sq_error.mean();
    rec.gamma = gamma;
    rec.example = ex;
    const double rank = static_cast<double>(numeric_rank(w, kRankTau));
    rec.diagnostics["selected"] = static_cast<double>(idx);
    rec.diagnostics["score"] = score;
    rec.diagnostics["alignment"] = align;
    rec.diagnostics["lambda1"] = top.lambda;
    rec.diagnostics["rank"] = rank;
    rec.diagnostics["alpha_min"] = alphas.minCoeff();
    rec.diagnostics["alpha_avg"] = alphas.mean();
    rec.diagnostics["predicted_rate"] = align * alphas.minCoeff() / rank;
    rec.diagnostics["stalled"] = score < kStallFactor * avg_err2 ? 1.0 : 0.0;
    tr.records.push_back(std::move(rec));
    ++t;
  }
  if (!tr.records.empty()) tr.summary["alignment_min"] = alignment_min;
  return tr;
}

}  // namespace classteach
