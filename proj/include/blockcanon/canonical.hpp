#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <utility>

#include "blockcanon/block_matrix.hpp"
#include "blockcanon/errors.hpp"
#include "blockcanon/partition.hpp"
#include "blockcanon/rotation.hpp"

namespace blockcanon {

// Canonical form of a block matrix B = Q D Q' with
// D = diag(core, within_1 I_{n_1-1}, ..., within_K I_{n_K-1}):
// a K x K core matrix sharing K of B's eigenvalues, plus one within-block
// eigenvalue per block carrying multiplicity n_k - 1.
//
// For a size-1 block the within eigenvalue has multiplicity zero; by
// convention its slot mirrors core(k,k) so that the canonicalize /
// decanonicalize pair is an exact inverse on every field.
struct CanonicalForm {
  BlockPartition partition;
  Eigen::MatrixXd core;     // a_ij
  Eigen::VectorXd within;   // lambda_k = d_k - b_kk

  CanonicalForm(BlockPartition part, Eigen::MatrixXd a, Eigen::VectorXd lam)
      : partition(std::move(part)), core(std::move(a)), within(std::move(lam)) {
    const int nblocks = partition.block_count();
    if (core.rows() != nblocks || core.cols() != nblocks)
      throw DimensionMismatch("CanonicalForm: core must be K x K");
    if (within.size() != nblocks)
      throw DimensionMismatch("CanonicalForm: within must have K entries");
  }
};

// a_ij = b_ij sqrt(n_i n_j) for i != j, a_ii = d_i + (n_i - 1) b_ii,
// lambda_i = d_i - b_ii. O(K^2).
inline CanonicalForm canonicalize(const BlockMatrix& bm) {
  const auto& part = bm.partition;
  const int nblocks = part.block_count();
  Eigen::MatrixXd a(nblocks, nblocks);
  Eigen::VectorXd lam(nblocks);
  for (int i = 0; i < nblocks; ++i) {
    const double ni = part.size(i);
    a(i, i) = bm.diag(i) + (ni - 1.0) * bm.block(i, i);
    lam(i) = bm.diag(i) - bm.block(i, i);
    for (int j = 0; j < nblocks; ++j) {
      if (j == i) continue;
      a(i, j) = bm.block(i, j) * std::sqrt(ni * part.size(j));
    }
  }
  return CanonicalForm(part, std::move(a), std::move(lam));
}

// Inverse of canonicalize: b_ij = a_ij / sqrt(n_i n_j), b_ii = (a_ii -
// lambda_i) / n_i, d_i = lambda_i + b_ii. For n_i = 1 the within slot is
// ignored and d_i = a_ii.
inline BlockMatrix decanonicalize(const CanonicalForm& cf) {
  const auto& part = cf.partition;
  const int nblocks = part.block_count();
  Eigen::VectorXd d(nblocks);
  Eigen::MatrixXd b(nblocks, nblocks);
  for (int i = 0; i < nblocks; ++i) {
    const double ni = part.size(i);
    if (part.size(i) == 1) {
      b(i, i) = 0.0;
      d(i) = cf.core(i, i);
    } else {
      b(i, i) = (cf.core(i, i) - cf.within(i)) / ni;
      d(i) = cf.within(i) + b(i, i);
    }
    for (int j = 0; j < nblocks; ++j) {
      if (j == i) continue;
      b(i, j) = cf.core(i, j) / std::sqrt(ni * part.size(j));
    }
  }
  return BlockMatrix(part, std::move(d), std::move(b));
}

// Dense n x n matrix represented by a canonical form.
inline Eigen::MatrixXd expand(const CanonicalForm& cf) { return expand(decanonicalize(cf)); }

inline CanonicalForm identity_form(const BlockPartition& part) {
  const int nblocks = part.block_count();
  return CanonicalForm(part, Eigen::MatrixXd::Identity(nblocks, nblocks),
                       Eigen::VectorXd::Ones(nblocks));
}

// A rectangular block matrix zero-padded to a square one, per the
// construction that appends zero blocks until both partitions have
// K = max(K_rows, K_cols) blocks. The shorter partition must be a prefix of
// the longer one (the shared blocks keep their sizes). `square` is a plain
// BlockMatrix, so the whole canonical toolkit applies; `dense()` slices the
// expansion back to the original shape, i.e. B = Q D Qtilde' with Qtilde the
// first columns of Q.
struct PaddedBlockMatrix {
  BlockMatrix square;
  int row_blocks;  // original K_rows
  int col_blocks;  // original K_cols
  int rows;        // original dense row count
  int cols;        // original dense column count

  Eigen::MatrixXd dense() const { return expand(square).topLeftCorner(rows, cols); }
};

// `blocks` is the K_rows x K_cols grid of block constants; `diag` holds the
// diagonal values of the first min(K_rows, K_cols) blocks, the only square
// diagonal blocks the rectangular matrix has.
inline PaddedBlockMatrix pad_rectangular(const Eigen::MatrixXd& blocks,
                                         const Eigen::VectorXd& diag,
                                         const BlockPartition& row_part,
                                         const BlockPartition& col_part) {
  const int kr = row_part.block_count();
  const int kc = col_part.block_count();
  const int kmin = std::min(kr, kc);
  const int kmax = std::max(kr, kc);
  if (blocks.rows() != kr || blocks.cols() != kc)
    throw DimensionMismatch("pad_rectangular: block grid must be K_rows x K_cols");
  if (diag.size() != kmin)
    throw DimensionMismatch("pad_rectangular: need one diagonal value per shared block");
  for (int k = 0; k < kmin; ++k)
    if (row_part.size(k) != col_part.size(k))
      throw InvalidPartition("pad_rectangular: shared blocks must have identical sizes (block " +
                             std::to_string(k) + ")");

  const BlockPartition& full = kr >= kc ? row_part : col_part;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(kmax);
  d.head(kmin) = diag;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(kmax, kmax);
  b.topLeftCorner(kr, kc) = blocks;
  return PaddedBlockMatrix{BlockMatrix(full, std::move(d), std::move(b)),
                           kr, kc, row_part.dim(), col_part.dim()};
}

}  // namespace blockcanon
