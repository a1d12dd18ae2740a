#pragma once

#include <Eigen/Dense>

#include "classteach/errors.hpp"
#include "classteach/rng.hpp"

namespace classteach {

// Symmetric PSD scatter of weighted rank-one residual terms. Stored dense;
// every constructor below fills both triangles from the same product so the
// matrix is symmetric to the bit.
using ScatterMatrix = Eigen::MatrixXd;

ScatterMatrix zero_scatter(Eigen::Index d);

// m + coeff * v v^T.
ScatterMatrix accumulate_rank_one(const ScatterMatrix& m, double coeff,
                                  const Eigen::VectorXd& v);

// Flips v so that its first component with |.| > 1e-9 is positive. Makes
// eigenvector routines deterministic functions of their inputs.
void canonicalize_sign(Eigen::VectorXd& v);

struct EigenPair {
  double lambda = 0.0;
  Eigen::VectorXd vector;
  bool converged = true;  // false when the iteration cap was hit
  int iterations = 0;
};

// Leading eigenpair by power iteration from a random unit start. Stops when
// successive iterates differ by <= tol or after max_iters steps; a capped run
// returns the current iterate with converged=false (near-maximizers are all
// the teaching step needs). Throws DegenerateMatrix when the matrix is
// numerically zero (trace <= 1e-14 * d).
EigenPair top_eigenpair(const ScatterMatrix& m, Rng& rng, double tol = 1e-12,
                        int max_iters = 10000);

// Leading eigenpair of sum_i coeffs[i] * v_i v_i^T given the factors
// (columns of `vectors`). Requires coeffs >= 0. A single active term uses the
// closed rank-one form; fewer active terms than dimensions go through the
// small Gram matrix; otherwise the dense matrix is assembled and handed to
// power iteration. All paths agree to ~1e-8 and share the sign convention.
EigenPair top_eigenpair_factors(const Eigen::MatrixXd& vectors,
                                const Eigen::VectorXd& coeffs, Rng& rng);

struct EigenDecomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns, matching order
};

// Full spectrum by cyclic Jacobi rotations. Test-scale oracle: d <= 16.
EigenDecomposition eigen_oracle(const ScatterMatrix& m);

// Count of eigenvalues > tau * lambda_1 (0 for the numerically zero matrix).
int numeric_rank(const ScatterMatrix& m, double tau = 1e-8);

// Same count from the rank-one factors; uses the Gram spectrum, exact when
// the number of active terms is below the ambient dimension.
int numeric_rank_factors(const Eigen::MatrixXd& vectors,
                         const Eigen::VectorXd& coeffs, double tau = 1e-8);

}  // namespace classteach
