#pragma once

#include <Eigen/Core>
#include <cstdio>
#include <string>
#include <utility>

#include "blockcanon/errors.hpp"
#include "blockcanon/partition.hpp"

namespace blockcanon {

namespace detail {

inline std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace detail

// Compressed storage of an n x n block matrix: the diagonal value d_k of each
// diagonal block plus the K x K grid of block constants b_ij. Block (i,i)
// expands to d_i on its diagonal and b_ii off it; block (i,j), i != j, is the
// constant b_ij. Symmetry of `block` is not assumed.
//
// For a size-1 block the within-block constant b_kk never appears in the
// expansion; it is canonically stored as zero.
struct BlockMatrix {
  BlockPartition partition;
  Eigen::VectorXd diag;    // d_k, length K
  Eigen::MatrixXd block;   // b_ij, K x K

  BlockMatrix(BlockPartition part, Eigen::VectorXd d, Eigen::MatrixXd b)
      : partition(std::move(part)), diag(std::move(d)), block(std::move(b)) {
    const int nblocks = partition.block_count();
    if (diag.size() != nblocks)
      throw DimensionMismatch("BlockMatrix: diag has " + std::to_string(diag.size()) +
                              " entries, partition has " + std::to_string(nblocks) + " blocks");
    if (block.rows() != nblocks || block.cols() != nblocks)
      throw DimensionMismatch("BlockMatrix: block grid must be K x K");
    for (int k = 0; k < nblocks; ++k)
      if (partition.size(k) == 1) block(k, k) = 0.0;
  }
};

// Expands the compressed form into the dense n x n matrix of the block rule.
inline Eigen::MatrixXd expand(const BlockMatrix& bm) {
  const auto& part = bm.partition;
  Eigen::MatrixXd m(part.dim(), part.dim());
  for (int i = 0; i < part.block_count(); ++i) {
    for (int j = 0; j < part.block_count(); ++j) {
      auto blk = m.block(part.offset(i), part.offset(j), part.size(i), part.size(j));
      blk.setConstant(bm.block(i, j));
      if (i == j) blk.diagonal().setConstant(bm.diag(i));
    }
  }
  return m;
}

namespace detail {

// Fitted constant for a run of entries: if every entry is bit-identical the
// common value is returned as-is, otherwise the arithmetic mean. Keeps exact
// block matrices round-tripping through compress at tol = 0.
template <typename Getter>
double fitted_constant(int count, Getter&& get) {
  if (count == 0) return 0.0;
  const double first = get(0);
  bool all_equal = true;
  double sum = 0.0;
  for (int t = 0; t < count; ++t) {
    const double v = get(t);
    sum += v;
    if (v != first) all_equal = false;
  }
  return all_equal ? first : sum / count;
}

}  // namespace detail

// Fits a BlockMatrix to a dense matrix by averaging entries within each block
// cell class, then verifies that no entry deviates from its fitted constant
// by more than tol (max-abs). Throws StructureViolation otherwise.
inline BlockMatrix compress(const Eigen::MatrixXd& m, const BlockPartition& part,
                            double tol = 1e-12) {
  if (m.rows() != part.dim() || m.cols() != part.dim())
    throw DimensionMismatch("compress: matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", partition dimension is " +
                            std::to_string(part.dim()));
  const int nblocks = part.block_count();
  Eigen::VectorXd d(nblocks);
  Eigen::MatrixXd b(nblocks, nblocks);
  for (int i = 0; i < nblocks; ++i) {
    const int oi = part.offset(i), ni = part.size(i);
    d(i) = detail::fitted_constant(ni, [&](int t) { return m(oi + t, oi + t); });
    for (int j = 0; j < nblocks; ++j) {
      const int oj = part.offset(j), nj = part.size(j);
      if (i == j) {
        b(i, i) = detail::fitted_constant(ni * (ni - 1), [&](int t) {
          int r = t / (ni - 1), c = t % (ni - 1);
          if (c >= r) ++c;  // skip the diagonal
          return m(oi + r, oi + c);
        });
      } else {
        b(i, j) = detail::fitted_constant(ni * nj,
                                          [&](int t) { return m(oi + t / nj, oj + t % nj); });
      }
    }
  }
  BlockMatrix bm(part, std::move(d), std::move(b));
  const Eigen::MatrixXd fitted = expand(bm);
  double worst = 0.0;
  Eigen::Index wr = 0, wc = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double dev = std::abs(m(r, c) - fitted(r, c));
      if (dev > worst) {
        worst = dev;
        wr = r;
        wc = c;
      }
    }
  if (worst > tol)
    throw StructureViolation("compress: entry (" + std::to_string(wr) + "," + std::to_string(wc) +
                             ") deviates from its block constant by " + detail::short_num(worst) +
                             " (tol " + detail::short_num(tol) + ")");
  return bm;
}

}  // namespace blockcanon
