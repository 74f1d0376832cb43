#pragma once

#include <Eigen/Core>
#include <cmath>

#include "blockcanon/errors.hpp"
#include "blockcanon/partition.hpp"

namespace blockcanon {

// Matrix-free application of the partition rotation Q and its transpose.
//
// Q is fixed by the partition alone: its first K columns are the normalized
// block-mean vectors (1/sqrt(n_k) inside block k, zero elsewhere); the
// remaining columns are Helmert contrasts within each block, where contrast j
// of a block has entries 1/sqrt(j(j+1)) on the first j positions,
// -j/sqrt(j(j+1)) on position j+1 and zero below. Both products run in
// O(n m) for an n x m operand via prefix/suffix sums; Q itself is never
// materialized here (the dense oracle does that for tests).
//
// Summations run in a fixed order within each block, so results are
// bit-reproducible for identical inputs.
//
// Any orthonormal complement of the block-mean vectors would be an equally
// valid rotation; only complement-invariant quantities are contractual (the
// scaled block means, the core block of a rotated matrix, and the contrast
// energies y_k'y_k). The individual contrast values are an implementation
// detail of the Helmert choice.

// Computes Q' x. Rows 0..K-1 of the result are the block sums scaled by
// 1/sqrt(n_k); the remaining rows are the within-block contrasts.
inline Eigen::MatrixXd rotate(const Eigen::MatrixXd& x, const BlockPartition& part) {
  if (x.rows() != part.dim())
    throw DimensionMismatch("rotate: operand has " + std::to_string(x.rows()) +
                            " rows, partition dimension is " + std::to_string(part.dim()));
  const int nblocks = part.block_count();
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (int k = 0; k < nblocks; ++k) {
      const int off = part.offset(k);
      const int m = part.size(k);
      const int crow = part.contrast_offset(k);
      double prefix = 0.0;
      for (int j = 1; j < m; ++j) {
        prefix += x(off + j - 1, c);
        const double denom = std::sqrt(static_cast<double>(j) * (j + 1));
        y(crow + j - 1, c) = (prefix - j * x(off + j, c)) / denom;
      }
      prefix += x(off + m - 1, c);
      y(k, c) = prefix / std::sqrt(static_cast<double>(m));
    }
  }
  return y;
}

// Computes Q y, the adjoint of rotate: rotate_back(rotate(x)) == x up to
// roundoff (orthonormality of Q).
inline Eigen::MatrixXd rotate_back(const Eigen::MatrixXd& y, const BlockPartition& part) {
  if (y.rows() != part.dim())
    throw DimensionMismatch("rotate_back: operand has " + std::to_string(y.rows()) +
                            " rows, partition dimension is " + std::to_string(part.dim()));
  const int nblocks = part.block_count();
  Eigen::MatrixXd x(y.rows(), y.cols());
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    for (int k = 0; k < nblocks; ++k) {
      const int off = part.offset(k);
      const int m = part.size(k);
      const int crow = part.contrast_offset(k);
      const double mean_part = y(k, c) / std::sqrt(static_cast<double>(m));
      // Entry i of the block collects the mean column, the positive tail of
      // the contrasts with j >= i, and the single negative entry of contrast
      // i-1. Walk i downwards keeping the tail sum.
      double suffix = 0.0;
      for (int i = m; i >= 1; --i) {
        double v = mean_part + suffix;
        if (i >= 2) {
          const double denom = std::sqrt(static_cast<double>(i - 1) * i);
          v -= (i - 1) * y(crow + i - 2, c) / denom;
          suffix += y(crow + i - 2, c) / denom;
        }
        x(off + i - 1, c) = v;
      }
    }
  }
  return x;
}

inline Eigen::VectorXd rotate(const Eigen::VectorXd& x, const BlockPartition& part) {
  return rotate(Eigen::MatrixXd(x), part).col(0);
}

inline Eigen::VectorXd rotate_back(const Eigen::VectorXd& y, const BlockPartition& part) {
  return rotate_back(Eigen::MatrixXd(y), part).col(0);
}

}  // namespace blockcanon
