#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "blockcanon/canonical.hpp"
#include "blockcanon/matrix_functions.hpp"

namespace blockcanon {

// Block correlation matrix: unit diagonal, within-block correlation rho_kk,
// between-block correlation rho_ij. Stored as the symmetric K x K grid of
// coefficients. rho(k,k) is meaningless for a size-1 block (no within pairs)
// and is stored as zero.
struct BlockCorrelation {
  BlockPartition partition;
  Eigen::MatrixXd rho;  // K x K, symmetric

  BlockCorrelation(BlockPartition part, Eigen::MatrixXd r)
      : partition(std::move(part)), rho(std::move(r)) {
    const int nblocks = partition.block_count();
    if (rho.rows() != nblocks || rho.cols() != nblocks)
      throw DimensionMismatch("BlockCorrelation: rho must be K x K");
    const double asym = (rho - rho.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12)
      throw DimensionMismatch("BlockCorrelation: rho must be symmetric (asymmetry " +
                              detail::short_num(asym) + ")");
    rho = 0.5 * (rho + Eigen::MatrixXd(rho.transpose()));
    for (int i = 0; i < nblocks; ++i) {
      if (partition.size(i) == 1) rho(i, i) = 0.0;
      for (int j = 0; j < nblocks; ++j) {
        // tolerate roundoff from estimation, reject real violations
        if (std::abs(rho(i, j)) > 1.0 + 1e-12)
          throw StructureViolation("BlockCorrelation: |rho| > 1 at (" + std::to_string(i) + "," +
                                   std::to_string(j) + ")");
        rho(i, j) = std::clamp(rho(i, j), -1.0, 1.0);
      }
    }
  }

  BlockMatrix to_block_matrix() const {
    return BlockMatrix(partition, Eigen::VectorXd::Ones(partition.block_count()), rho);
  }

  // core(i,j) = rho_ij sqrt(n_i n_j), core(i,i) = 1 + (n_i - 1) rho_ii,
  // within_i = 1 - rho_ii.
  CanonicalForm canonical() const { return canonicalize(to_block_matrix()); }
};

enum class CorrelationValidity { Valid, SemidefiniteBoundary, Invalid };

inline const char* to_string(CorrelationValidity v) {
  switch (v) {
    case CorrelationValidity::Valid:
      return "valid";
    case CorrelationValidity::SemidefiniteBoundary:
      return "semidefinite_boundary";
    case CorrelationValidity::Invalid:
      return "invalid";
  }
  return "?";
}

struct CorrelationValidityReport {
  CorrelationValidity status = CorrelationValidity::Invalid;
  double min_core_eig = 0.0;  // smallest eigenvalue of the core matrix
  // smallest 1 - rho_kk over blocks with n_k >= 2; +inf when every block has size 1
  double min_within_eig = std::numeric_limits<double>::infinity();
  int offending_block = -1;  // block attaining min_within_eig when it is at the boundary
};

// Positive-definiteness characterization: C is a non-singular correlation
// matrix iff its core matrix is positive definite and |rho_kk| < 1. The
// |rho_kk| > 1 side cannot occur (structural bound), and rho_kk <= -1 forces
// a non-positive core diagonal, so checking min eig(core) and 1 - rho_kk
// covers every case. Boundary = within tol of either zero.
inline CorrelationValidityReport is_valid_correlation(const BlockCorrelation& corr,
                                                      double rel_tol = kPdRelTol) {
  const CanonicalForm cf = corr.canonical();
  CorrelationValidityReport report;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cf.core, Eigen::EigenvaluesOnly);
  report.min_core_eig = eig.eigenvalues().minCoeff();
  const double tol = rel_tol * detail::scale_of(cf.core);
  bool boundary = std::abs(report.min_core_eig) <= tol;
  for (int k = 0; k < corr.partition.block_count(); ++k) {
    if (corr.partition.size(k) == 1) continue;
    if (cf.within(k) < report.min_within_eig) {
      report.min_within_eig = cf.within(k);
      if (cf.within(k) <= tol) report.offending_block = k;
    }
  }
  if (report.offending_block >= 0 || (std::isfinite(report.min_within_eig) &&
                                      report.min_within_eig <= tol))
    boundary = true;
  if (report.min_core_eig < -tol)
    report.status = CorrelationValidity::Invalid;
  else if (boundary)
    report.status = CorrelationValidity::SemidefiniteBoundary;
  else
    report.status = CorrelationValidity::Valid;
  return report;
}

// The log parametrization of a valid block correlation matrix: the unique
// elements of log C, i.e. the K x K matrix
//   G = D_n^{-1} [log(core) - diag(log(1 - rho_kk))] D_n^{-1},
// with D_n = diag(sqrt(n_k)). Off the diagonal G_ij is the constant filling
// block (i,j) of log C; G_kk is the off-diagonal constant of diagonal block
// k. gamma packs G's lower triangle (including the diagonal) row by row.
struct CorrelationParam {
  BlockPartition partition;
  Eigen::VectorXd gamma;  // length K(K+1)/2, rows (i,j), j <= i
};

// The full unique-element matrix G; to_param packs it.
inline Eigen::MatrixXd param_unique_elements(const BlockCorrelation& corr) {
  const CanonicalForm log_form = mlog(corr.canonical());
  const int nblocks = corr.partition.block_count();
  Eigen::MatrixXd g(nblocks, nblocks);
  for (int i = 0; i < nblocks; ++i) {
    const double ni = corr.partition.size(i);
    g(i, i) = (log_form.core(i, i) - std::log1p(-corr.rho(i, i))) / ni;
    for (int j = 0; j < i; ++j) {
      const double v = log_form.core(i, j) / std::sqrt(ni * corr.partition.size(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

inline CorrelationParam to_param(const BlockCorrelation& corr) {
  const Eigen::MatrixXd g = param_unique_elements(corr);
  const int nblocks = corr.partition.block_count();
  Eigen::VectorXd gamma(nblocks * (nblocks + 1) / 2);
  int t = 0;
  for (int i = 0; i < nblocks; ++i)
    for (int j = 0; j <= i; ++j) gamma(t++) = g(i, j);
  return CorrelationParam{corr.partition, std::move(gamma)};
}

}  // namespace blockcanon
