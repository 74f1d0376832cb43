#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "blockcanon/errors.hpp"
#include "blockcanon/partition.hpp"

// Deliberately plain O(n^3) dense reference implementations used as ground
// truth by the property tests and as the slow side of the benchmarks:
// partial-pivot LU, cyclic Jacobi eigensolver, scaled Taylor exponential,
// eigendecomposition logarithm, dense Gaussian -2l, and an explicitly
// materialized rotation Q. Nothing here exploits block structure, and nothing
// in the fast path may call into this header; it is not part of the public
// API surface.

namespace blockcanon::oracle {

// ---------------------------------------------------------------------------
// LU with partial pivoting.

struct DenseLU {
  Eigen::MatrixXd lu;      // L below the diagonal (unit), U on and above
  std::vector<int> pivot;  // row swapped with k at step k
  int perm_sign = 1;
  bool singular = false;
};

inline DenseLU lu_factor(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("lu_factor: matrix must be square");
  const int n = static_cast<int>(m.rows());
  DenseLU f{std::move(m), std::vector<int>(n), 1, false};
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(f.lu(k, k));
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(f.lu(i, k)) > best) {
        best = std::abs(f.lu(i, k));
        piv = i;
      }
    }
    f.pivot[k] = piv;
    if (piv != k) {
      f.lu.row(k).swap(f.lu.row(piv));
      f.perm_sign = -f.perm_sign;
    }
    const double d = f.lu(k, k);
    if (d == 0.0) {
      f.singular = true;
      continue;
    }
    for (int i = k + 1; i < n; ++i) f.lu(i, k) /= d;
    for (int j = k + 1; j < n; ++j) {
      const double u = f.lu(k, j);
      if (u == 0.0) continue;
      for (int i = k + 1; i < n; ++i) f.lu(i, j) -= f.lu(i, k) * u;
    }
  }
  return f;
}

inline Eigen::VectorXd lu_solve(const DenseLU& f, Eigen::VectorXd b) {
  const int n = static_cast<int>(f.lu.rows());
  if (f.singular) throw SingularMatrix("lu_solve: matrix is singular");
  for (int k = 0; k < n; ++k)
    if (f.pivot[k] != k) std::swap(b(k), b(f.pivot[k]));
  // unit lower solve, column sweeps
  for (int j = 0; j < n; ++j) {
    const double bj = b(j);
    if (bj == 0.0) continue;
    for (int i = j + 1; i < n; ++i) b(i) -= f.lu(i, j) * bj;
  }
  // upper solve, column sweeps
  for (int j = n - 1; j >= 0; --j) {
    b(j) /= f.lu(j, j);
    const double bj = b(j);
    for (int i = 0; i < j; ++i) b(i) -= f.lu(i, j) * bj;
  }
  return b;
}

inline double dense_det(const Eigen::MatrixXd& m) {
  const DenseLU f = lu_factor(m);
  if (f.singular) return 0.0;
  double det = f.perm_sign;
  for (int k = 0; k < f.lu.rows(); ++k) det *= f.lu(k, k);
  return det;
}

inline Eigen::MatrixXd dense_inv(const Eigen::MatrixXd& m) {
  const DenseLU f = lu_factor(m);
  if (f.singular) throw SingularMatrix("dense_inv: matrix is singular");
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd inv(n, n);
  for (int c = 0; c < n; ++c) inv.col(c) = lu_solve(f, Eigen::VectorXd::Unit(n, c));
  return inv;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition by cyclic Jacobi sweeps.

struct SymEig {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, same order
};

inline SymEig dense_eig_sym(Eigen::MatrixXd m, double tol = 1e-14) {
  if (m.rows() != m.cols()) throw DimensionMismatch("dense_eig_sym: matrix must be square");
  const int n = static_cast<int>(m.rows());
  m = 0.5 * (m + Eigen::MatrixXd(m.transpose()));
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(m(p, q)));
    if (off <= tol * scale) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(m(p, q)) <= 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < n; ++i) {
          const double mip = m(i, p), miq = m(i, q);
          m(i, p) = c * mip - s * miq;
          m(i, q) = s * mip + c * miq;
        }
        for (int i = 0; i < n; ++i) {
          const double mpi = m(p, i), mqi = m(q, i);
          m(p, i) = c * mpi - s * mqi;
          m(q, i) = s * mpi + c * mqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  SymEig e{m.diagonal(), std::move(v)};
  // sort ascending, carrying the vectors along
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return e.values(a) < e.values(b); });
  Eigen::VectorXd values(n);
  Eigen::MatrixXd vectors(n, n);
  for (int i = 0; i < n; ++i) {
    values(i) = e.values(order[i]);
    vectors.col(i) = e.vectors.col(order[i]);
  }
  return SymEig{std::move(values), std::move(vectors)};
}

// ---------------------------------------------------------------------------
// Matrix exponential / logarithm.

// Scaling-and-squaring with a Taylor series on the scaled matrix. Accurate to
// roundoff for the moderate norms the tests use; no Pade sophistication on
// purpose.
inline Eigen::MatrixXd dense_exp(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("dense_exp: matrix must be square");
  const int n = static_cast<int>(m.rows());
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.5) ++squarings;
  const Eigen::MatrixXd scaled = m / std::pow(2.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 80; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-300 ||
        term.cwiseAbs().maxCoeff() <= 1e-18 * sum.cwiseAbs().maxCoeff())
      break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// Principal logarithm of a symmetric positive definite matrix via Jacobi
// eigendecomposition.
inline Eigen::MatrixXd dense_log_spd(const Eigen::MatrixXd& m) {
  const SymEig e = dense_eig_sym(m);
  if (e.values.minCoeff() <= 0.0)
    throw NotRealLoggable("dense_log_spd: matrix is not positive definite");
  return e.vectors * e.values.array().log().matrix().asDiagonal() * e.vectors.transpose();
}

// ---------------------------------------------------------------------------
// Dense Gaussian -2 log-likelihood (average per observation), rows of x are
// observations.
inline double dense_neg2_loglik(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& x) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != x.cols())
    throw DimensionMismatch("dense_neg2_loglik: dimension mismatch");
  const int n = static_cast<int>(sigma.rows());
  const DenseLU f = lu_factor(sigma);
  if (f.singular) throw SingularMatrix("dense_neg2_loglik: covariance is singular");
  double log_det = 0.0;
  int sign = f.perm_sign;
  for (int k = 0; k < n; ++k) {
    sign = f.lu(k, k) < 0 ? -sign : sign;
    log_det += std::log(std::abs(f.lu(k, k)));
  }
  if (sign <= 0) throw SingularMatrix("dense_neg2_loglik: covariance has non-positive determinant");
  double quad = 0.0;
  for (Eigen::Index s = 0; s < x.rows(); ++s) {
    const Eigen::VectorXd xs = x.row(s);
    quad += xs.dot(lu_solve(f, xs));
  }
  return n * std::log(2.0 * std::numbers::pi) + log_det + quad / static_cast<double>(x.rows());
}

// ---------------------------------------------------------------------------
// Materialized rotation.

// The n x n rotation determined by the partition: first K columns are the
// normalized block-mean vectors, then each block's Helmert contrasts.
inline Eigen::MatrixXd materialize_q(const BlockPartition& part) {
  const int n = part.dim();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < part.block_count(); ++k) {
    const int off = part.offset(k), m = part.size(k);
    for (int i = 0; i < m; ++i) q(off + i, k) = 1.0 / std::sqrt(static_cast<double>(m));
    for (int j = 1; j < m; ++j) {
      const int col = part.contrast_offset(k) + j - 1;
      const double denom = std::sqrt(static_cast<double>(j) * (j + 1));
      for (int i = 0; i < j; ++i) q(off + i, col) = 1.0 / denom;
      q(off + j, col) = -j / denom;
    }
  }
  return q;
}

// Same block-mean columns but a different (seeded, Gram-Schmidt) orthonormal
// complement per block. Any such complement is a valid rotation; tests use
// this to check that invariant quantities do not depend on the choice.
inline Eigen::MatrixXd materialize_q_random_complement(const BlockPartition& part,
                                                       std::uint64_t seed) {
  const int n = part.dim();
  std::mt19937_64 engine(seed);
  auto uniform = [&] { return static_cast<double>(engine() >> 11) * 0x1.0p-53 - 0.5; };
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < part.block_count(); ++k) {
    const int off = part.offset(k), m = part.size(k);
    Eigen::MatrixXd basis(m, m);
    basis.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
    for (int j = 1; j < m; ++j) {
      Eigen::VectorXd v(m);
      for (;;) {
        for (int i = 0; i < m; ++i) v(i) = uniform();
        for (int p = 0; p < j; ++p) v -= basis.col(p).dot(v) * basis.col(p);
        if (v.norm() > 1e-6) break;  // nearly dependent draw, retry
      }
      basis.col(j) = v / v.norm();
    }
    q.block(off, k, m, 1) = basis.col(0);
    if (m > 1) q.block(off, part.contrast_offset(k), m, m - 1) = basis.rightCols(m - 1);
  }
  return q;
}

}  // namespace blockcanon::oracle
