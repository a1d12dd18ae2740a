#pragma once

#include <string>
#include <utility>

#include <Eigen/Dense>

#include "classteach/model.hpp"
#include "classteach/teachers.hpp"

namespace classteach {

// Finite set of unit directions the teacher may rescale freely up to radius.
struct DirectionPool {
  Eigen::MatrixXd directions;  // d x m, unit columns
  double radius = 1.0;

  int size() const { return static_cast<int>(directions.cols()); }
  Eigen::Index dim() const { return directions.rows(); }
};

// Normalizes the given columns into a pool; rows with norm < 1e-12 are
// rejected as invalid input.
DirectionPool make_pool(const Eigen::MatrixXd& columns, double radius);

// CSV with one direction per row, d decimal columns, optional header line.
DirectionPool load_pool_csv(const std::string& path, double radius);

// argmax_i |<residual, x_i>| (sign is free because the rescale may be
// negative); ties go to the lowest index.
std::pair<int, Eigen::VectorXd> pool_select_single(const DirectionPool& p,
                                                   const Eigen::VectorXd& residual);

// argmax_i x_i^T W x_i; ties go to the lowest index.
std::pair<int, Eigen::VectorXd> pool_select_class(const DirectionPool& p,
                                                  const ScatterMatrix& w);

// Squared cosine between the selected direction and the ideal synthesis
// direction; the factor that scales the pool-teaching contraction rate.
double pool_alignment(const Eigen::VectorXd& selected, const Eigen::VectorXd& reference);

// Teaching loops restricted to the pool. gamma is the static choice
// min(1 / sqrt(eta_max), radius). Steps whose best selection score falls
// below 1e-14 * current squared error are flagged "stalled" in diagnostics;
// the run then continues until the budget. Trace summary carries
// "alignment_min", the worst per-step alignment of the run.
Trace pool_teach_single(const Learner& l, const Hypothesis& target,
                        const DirectionPool& p, const TeachConfig& cfg, double d_w);
Trace pool_teach_class(const Classroom& c, const Hypothesis& target,
                       const DirectionPool& p, const TeachConfig& cfg);

}  // namespace classteach
