#include "classteach/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace classteach {

namespace {

// Cyclic Jacobi diagonalization of a symmetric matrix. Used by the full
// spectrum oracle and by the rank diagnostic; no dimension limit here.
EigenDecomposition jacobi_symmetric(ScatterMatrix a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-14 * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
    Eigen::VectorXd col = v.col(order[static_cast<size_t>(k)]);
    canonicalize_sign(col);
    out.vectors.col(k) = col;
  }
  return out;
}

// Trace alone settles the PSD case (entries are bounded by the trace there);
// the entry check keeps trace-free indefinite inputs out of the degenerate
// branch.
bool numerically_zero(const ScatterMatrix& m) {
  return m.trace() <= 1e-14 * static_cast<double>(m.rows()) &&
         m.cwiseAbs().maxCoeff() <= 1e-14;
}

}  // namespace

ScatterMatrix zero_scatter(Eigen::Index d) { return ScatterMatrix::Zero(d, d); }

ScatterMatrix accumulate_rank_one(const ScatterMatrix& m, double coeff,
                                  const Eigen::VectorXd& v) {
  if (m.rows() != v.size() || m.cols() != v.size())
    throw InvalidInput("accumulate_rank_one: dimension mismatch");
  ScatterMatrix out = m;
  const Eigen::Index d = v.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double term = coeff * (v[i] * v[j]);
      out(i, j) += term;
      if (j != i) out(j, i) = out(i, j);  // mirror the identical value
    }
  }
  return out;
}

void canonicalize_sign(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-9) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

EigenPair top_eigenpair(const ScatterMatrix& m, Rng& rng, double tol, int max_iters) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw InvalidInput("top_eigenpair: matrix must be square and nonempty");
  if (numerically_zero(m)) throw DegenerateMatrix("top_eigenpair: matrix is numerically zero");

  const Eigen::Index d = m.rows();
  EigenPair out;
  Eigen::VectorXd v = rng.unit_vector(d);
  Eigen::VectorXd two_back;
  bool have_two_back = false;
  int iters = 0;
  bool converged = false;
  while (iters < max_iters) {
    Eigen::VectorXd w = m * v;
    const double n = w.norm();
    if (n <= 1e-300) {
      // Start vector fell in the kernel; restart from a fresh direction.
      v = rng.unit_vector(d);
      have_two_back = false;
      ++iters;
      continue;
    }
    w /= n;
    ++iters;
    if ((w - v).norm() <= tol) {
      v = w;
      converged = true;
      break;
    }
    if (have_two_back && (w - two_back).norm() <= tol) {
      // Two-phase cycle: a negative eigenvalue ties the leading one in
      // magnitude. The two phases sum to the algebraic-top component.
      Eigen::VectorXd u = w + v;
      const double un = u.norm();
      if (un > 1e-8) {
        v = u / un;
      } else {
        v = rng.unit_vector(d);
      }
      have_two_back = false;
      continue;
    }
    two_back = v;
    have_two_back = true;
    v = w;
  }
  out.vector = v;
  out.lambda = v.dot(m * v);
  out.converged = converged;
  out.iterations = iters;
  canonicalize_sign(out.vector);
  return out;
}

EigenPair top_eigenpair_factors(const Eigen::MatrixXd& vectors,
                                const Eigen::VectorXd& coeffs, Rng& rng) {
  const Eigen::Index d = vectors.rows();
  const Eigen::Index n = vectors.cols();
  if (coeffs.size() != n)
    throw InvalidInput("top_eigenpair_factors: one coefficient per column required");

  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (coeffs[i] < 0.0)
      throw InvalidInput("top_eigenpair_factors: coefficients must be nonnegative");
    if (coeffs[i] > 0.0 && vectors.col(i).squaredNorm() > 0.0) active.push_back(i);
  }
  if (active.empty())
    throw DegenerateMatrix("top_eigenpair_factors: all terms vanish");

  if (active.size() == 1) {
    // Rank-one closed form: lambda = c ||v||^2, e = v / ||v||.
    const Eigen::Index i = active.front();
    EigenPair out;
    const Eigen::VectorXd v = vectors.col(i);
    out.lambda = coeffs[i] * v.squaredNorm();
    out.vector = v / v.norm();
    canonicalize_sign(out.vector);
    return out;
  }

  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  if (na < d) {
    // Gram trick: the nonzero spectrum of sum c_i v_i v_i^T equals that of
    // M = C^(1/2) V^T V C^(1/2); lift the top Gram eigenvector back with
    // e = V C^(1/2) u (then normalize).
    Eigen::MatrixXd scaled(d, na);
    for (Eigen::Index k = 0; k < na; ++k)
      scaled.col(k) = std::sqrt(coeffs[active[static_cast<size_t>(k)]]) *
                      vectors.col(active[static_cast<size_t>(k)]);
    Eigen::MatrixXd gram(na, na);
    for (Eigen::Index i = 0; i < na; ++i)
      for (Eigen::Index j = i; j < na; ++j) {
        gram(i, j) = scaled.col(i).dot(scaled.col(j));
        gram(j, i) = gram(i, j);
      }
    const EigenDecomposition dec = jacobi_symmetric(gram);
    EigenPair out;
    out.lambda = dec.values[0];
    Eigen::VectorXd lifted = scaled * dec.vectors.col(0);
    const double nl = lifted.norm();
    if (nl <= 1e-300)
      throw DegenerateMatrix("top_eigenpair_factors: degenerate Gram lift");
    out.vector = lifted / nl;
    canonicalize_sign(out.vector);
    return out;
  }

  ScatterMatrix w = zero_scatter(d);
  for (Eigen::Index i : active) w = accumulate_rank_one(w, coeffs[i], vectors.col(i));
  return top_eigenpair(w, rng);
}

EigenDecomposition eigen_oracle(const ScatterMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("eigen_oracle: matrix must be square");
  if (m.rows() > 16) throw InvalidInput("eigen_oracle: test-scale oracle, d <= 16");
  return jacobi_symmetric(m);
}

int numeric_rank(const ScatterMatrix& m, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("numeric_rank: tau must lie in (0,1)");
  if (numerically_zero(m)) return 0;
  const EigenDecomposition dec = jacobi_symmetric(m);
  const double lambda1 = dec.values[0];
  if (lambda1 <= 0.0) return 0;
  int count = 0;
  for (Eigen::Index i = 0; i < dec.values.size(); ++i)
    if (dec.values[i] > tau * lambda1) ++count;
  return count;
}

int numeric_rank_factors(const Eigen::MatrixXd& vectors,
                         const Eigen::VectorXd& coeffs, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("numeric_rank: tau must lie in (0,1)");
  const Eigen::Index n = vectors.cols();
  if (coeffs.size() != n)
    throw InvalidInput("numeric_rank_factors: one coefficient per column required");

  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < n; ++i)
    if (coeffs[i] > 0.0 && vectors.col(i).squaredNorm() > 0.0) active.push_back(i);
  if (active.empty()) return 0;

  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd gram(na, na);
  for (Eigen::Index i = 0; i < na; ++i) {
    const Eigen::VectorXd vi =
        std::sqrt(coeffs[active[static_cast<size_t>(i)]]) * vectors.col(active[static_cast<size_t>(i)]);
    for (Eigen::Index j = i; j < na; ++j) {
      const Eigen::VectorXd vj =
          std::sqrt(coeffs[active[static_cast<size_t>(j)]]) * vectors.col(active[static_cast<size_t>(j)]);
      gram(i, j) = vi.dot(vj);
      gram(j, i) = gram(i, j);
    }
  }
  if (gram.trace() <= 1e-14 * static_cast<double>(na)) return 0;
  const EigenDecomposition dec = jacobi_symmetric(gram);
  const double lambda1 = dec.values[0];
  if (lambda1 <= 0.0) return 0;
  int count = 0;
  for (Eigen::Index i = 0; i < dec.values.size(); ++i)
    if (dec.values[i] > tau * lambda1) ++count;
  return count;
}

}  // namespace classteach
