#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "blockcanon/canonical.hpp"
#include "blockcanon/correlation.hpp"
#include "blockcanon/errors.hpp"
#include "blockcanon/matrix_functions.hpp"
#include "blockcanon/rotation.hpp"

namespace blockcanon {

// Gaussian quasi-likelihood machinery in rotated coordinates. With Y = Q'X
// split into the K block-mean coordinates y0 and the per-block contrasts y_k,
// the -2 log-likelihood of one mean-zero observation is
//
//   n log 2pi + log det(core) + y0' core^{-1} y0
//     + sum_k [ (n_k - 1) log lambda_k + y_k'y_k / lambda_k ],
//
// so everything needed for evaluation and estimation is K x K work plus
// scalars. Data are treated as mean-zero throughout; demeaning, if wanted, is
// a caller-side preprocessing step outside this likelihood.

// Sufficient statistics of a rotated sample.
struct RotatedSample {
  BlockPartition partition;
  long n_obs = 0;
  // s0 = (1/N) sum_s y0_s y0_s', K x K. Equals the core-matrix MLE.
  Eigen::MatrixXd s0;
  // q_k = (1/N) sum_s y_ks' y_ks / (n_k - 1), the mean square per contrast
  // degree of freedom; zero for size-1 blocks. Equals the within-eigenvalue
  // MLE lambda_hat_k.
  Eigen::VectorXd q;
  // Full rotated panel (n x N), kept only on request for score evaluation.
  Eigen::MatrixXd rotated;
};

// Rotates an N x n panel (rows = observations) and accumulates s0 and q in
// observation order. O(n N).
inline RotatedSample rotate_sample(const Eigen::MatrixXd& x, const BlockPartition& part,
                                   bool keep_rotated = false) {
  if (x.cols() != part.dim())
    throw DimensionMismatch("rotate_sample: panel has " + std::to_string(x.cols()) +
                            " columns, partition dimension is " + std::to_string(part.dim()));
  if (x.rows() < 1) throw DimensionMismatch("rotate_sample: need at least one observation");
  const int nblocks = part.block_count();
  const long n_obs = x.rows();
  Eigen::MatrixXd y = rotate(Eigen::MatrixXd(x.transpose()), part);
  RotatedSample sample{part, n_obs, Eigen::MatrixXd(), Eigen::VectorXd::Zero(nblocks),
                       Eigen::MatrixXd()};
  sample.s0 = y.topRows(nblocks) * y.topRows(nblocks).transpose() / static_cast<double>(n_obs);
  sample.s0 = 0.5 * (sample.s0 + Eigen::MatrixXd(sample.s0.transpose()));
  for (int k = 0; k < nblocks; ++k) {
    const int m = part.size(k);
    if (m == 1) continue;
    sample.q(k) = y.middleRows(part.contrast_offset(k), m - 1).squaredNorm() /
                  (static_cast<double>(n_obs) * (m - 1));
  }
  if (keep_rotated) sample.rotated = std::move(y);
  return sample;
}

// Block covariance matrix in variance/covariance parameters: var(k) is the
// common variance of block k (d_k), covar(k,k) the within-block covariance
// (zero slot for size-1 blocks), covar(i,j) the between-block covariance.
struct BlockCovariance {
  BlockPartition partition;
  Eigen::VectorXd var;     // sigma_k^2, length K
  Eigen::MatrixXd covar;   // sigma_ij, K x K symmetric

  BlockCovariance(BlockPartition part, Eigen::VectorXd v, Eigen::MatrixXd c)
      : partition(std::move(part)), var(std::move(v)), covar(std::move(c)) {
    const int nblocks = partition.block_count();
    if (var.size() != nblocks || covar.rows() != nblocks || covar.cols() != nblocks)
      throw DimensionMismatch("BlockCovariance: need K variances and a K x K covariance grid");
    const double asym = (covar - covar.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * detail::scale_of(covar))
      throw DimensionMismatch("BlockCovariance: covar must be symmetric");
    covar = 0.5 * (covar + Eigen::MatrixXd(covar.transpose()));
    for (int k = 0; k < nblocks; ++k)
      if (partition.size(k) == 1) covar(k, k) = 0.0;
  }

  BlockMatrix to_block_matrix() const { return BlockMatrix(partition, var, covar); }
  CanonicalForm canonical() const { return canonicalize(to_block_matrix()); }
};

namespace detail {

// Cholesky of the symmetric core; throws SingularMatrix when it is not
// positive definite (which also covers non-invertibility).
inline Eigen::LLT<Eigen::MatrixXd> core_cholesky(const CanonicalForm& cf) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (cf.core + cf.core.transpose()));
  if (llt.info() != Eigen::Success)
    throw SingularMatrix("core matrix is not positive definite");
  return llt;
}

}  // namespace detail

// Average -2 log-likelihood per observation for a block covariance given in
// canonical form (core assumed symmetric; tiny asymmetry is symmetrized
// away). Equals the dense Gaussian -2l with the expanded matrix.
inline double neg2_loglik(const CanonicalForm& cf, const RotatedSample& sample) {
  if (cf.partition != sample.partition)
    throw DimensionMismatch("neg2_loglik: partition mismatch");
  const auto llt = detail::core_cholesky(cf);
  double log_det_core = 0.0;
  for (int k = 0; k < cf.core.rows(); ++k)
    log_det_core += 2.0 * std::log(llt.matrixLLT()(k, k));
  double value = cf.partition.dim() * std::log(2.0 * std::numbers::pi) + log_det_core +
                 llt.solve(sample.s0).trace();
  for (int k = 0; k < cf.partition.block_count(); ++k) {
    const int m = cf.partition.size(k);
    if (m == 1) continue;
    const double lam = cf.within(k);
    if (lam <= 0.0)
      throw SingularMatrix("neg2_loglik: within-block eigenvalue of block " + std::to_string(k) +
                           " is not positive");
    value += (m - 1) * (std::log(lam) + sample.q(k) / lam);
  }
  return value;
}

inline double neg2_loglik(const BlockCovariance& cov, const RotatedSample& sample) {
  return neg2_loglik(cov.canonical(), sample);
}

struct BlockCovarianceMle {
  BlockCovariance cov;
  CanonicalForm form;  // (core_hat, lambda_hat) = (s0, q)
  // True when s0 is not numerically positive definite (e.g. N < K), so
  // downstream inversion of the estimate would fail. Estimation itself
  // remains well-defined; this is a flag, not an error.
  bool degenerate = false;
};

// Closed-form Gaussian MLE of a block covariance matrix: core_hat = s0,
// lambda_hat_k = q_k; parameters recovered through decanonicalize. For
// size-1 blocks sigma_k^2 = s0(k,k) and the within covariance is undefined
// (stored zero slot).
inline BlockCovarianceMle mle_block_covariance(const RotatedSample& sample) {
  Eigen::VectorXd lambda_hat = sample.q;
  CanonicalForm form(sample.partition, sample.s0, std::move(lambda_hat));
  detail::fix_singleton_slots(form);
  BlockMatrix bm = decanonicalize(form);
  BlockCovariance cov(sample.partition, std::move(bm.diag), std::move(bm.block));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(form.core, Eigen::EigenvaluesOnly);
  const bool degenerate =
      sample.n_obs < sample.partition.block_count() ||
      eig.eigenvalues().minCoeff() <= kPdRelTol * detail::scale_of(form.core);
  return BlockCovarianceMle{std::move(cov), std::move(form), degenerate};
}

struct BlockCorrelationMle {
  Eigen::VectorXd sigma2;  // per-column variance MLE (1/N convention), length n
  Eigen::MatrixXd core;    // A_tilde = (1/N) sum ytilde0 ytilde0', K x K
  BlockCorrelation corr;   // rho_hat
  // Diagonal-implied within eigenvalues (n_k - a_kk)/(n_k - 1): the MLE under
  // the unit-diagonal constraint. 1 for size-1 blocks by convention.
  Eigen::VectorXd lambda;
  // Contrast-based within eigenvalues (mean contrast energy per degree of
  // freedom of the standardized data); a diagnostic, not used in rho_hat.
  Eigen::VectorXd lambda_contrast;
  CorrelationValidityReport validity;
  // Set when some lambda_k <= 0 (a_kk >= n_k can happen in finite samples) or
  // the implied correlation matrix is not positive definite. The estimate is
  // returned as-is; no projection is applied.
  bool invalid_estimate = false;
};

// Closed-form correlation MLE: per-column variances (no demeaning),
// standardize, rotate, read the estimates off the core moment matrix:
// rho_ij = a_ij / sqrt(n_i n_j) (i != j), rho_ii = (a_ii - 1)/(n_i - 1),
// lambda_k = (n_k - a_kk)/(n_k - 1). The within eigenvalues come from the
// core's diagonal, not from the contrasts.
inline BlockCorrelationMle mle_block_correlation(const Eigen::MatrixXd& x,
                                                 const BlockPartition& part) {
  if (x.cols() != part.dim())
    throw DimensionMismatch("mle_block_correlation: panel has " + std::to_string(x.cols()) +
                            " columns, partition dimension is " + std::to_string(part.dim()));
  const long n_obs = x.rows();
  const int n = part.dim();
  const int nblocks = part.block_count();
  Eigen::VectorXd sigma2(n);
  for (int i = 0; i < n; ++i) {
    sigma2(i) = x.col(i).squaredNorm() / static_cast<double>(n_obs);
    if (sigma2(i) <= 0.0)
      throw ZeroVariance("mle_block_correlation: column " + std::to_string(i) +
                             " has zero sample second moment",
                         i);
  }
  const Eigen::MatrixXd standardized =
      x * sigma2.array().sqrt().inverse().matrix().asDiagonal();
  const RotatedSample sample = rotate_sample(standardized, part);

  Eigen::MatrixXd rho(nblocks, nblocks);
  Eigen::VectorXd lambda(nblocks);
  for (int i = 0; i < nblocks; ++i) {
    const int ni = part.size(i);
    if (ni == 1) {
      rho(i, i) = 0.0;
      lambda(i) = 1.0;
    } else {
      rho(i, i) = (sample.s0(i, i) - 1.0) / (ni - 1);
      lambda(i) = (ni - sample.s0(i, i)) / (ni - 1);
    }
    for (int j = 0; j < i; ++j) {
      const double v = sample.s0(i, j) / std::sqrt(static_cast<double>(ni) * part.size(j));
      rho(i, j) = v;
      rho(j, i) = v;
    }
  }
  BlockCorrelation corr(part, std::move(rho));
  CorrelationValidityReport validity = is_valid_correlation(corr);
  bool invalid = validity.status != CorrelationValidity::Valid;
  for (int k = 0; k < nblocks; ++k)
    if (part.size(k) >= 2 && lambda(k) <= 0.0) invalid = true;
  return BlockCorrelationMle{std::move(sigma2), sample.s0,       std::move(corr),
                             std::move(lambda), sample.q,        validity,
                             invalid};
}

// Analytic score (gradient of -2l) at one rotated observation. With
// M = core^{-1} - core^{-1} y0 y0' core^{-1} and
// g_k = (n_k - 1)/lambda_k - y_k'y_k / lambda_k^2:
//   d(-2l)/d sigma_k^2  = M_kk + g_k
//   d(-2l)/d sigma_kk   = (n_k - 1) M_kk - g_k
//   d(-2l)/d sigma_ij   = 2 sqrt(n_i n_j) M_ij   (i != j)
//   d(-2l)/d lambda_k   = g_k
// so core_grad(k,k) + ... obeys within + var = n_k M_kk exactly.
struct ScoreVector {
  Eigen::MatrixXd core_grad;     // M, K x K
  Eigen::VectorXd var_grad;      // d/d sigma_k^2
  Eigen::VectorXd within_grad;   // d/d sigma_kk; zero for size-1 blocks
  Eigen::MatrixXd between_grad;  // d/d sigma_ij, symmetric, zero diagonal
  Eigen::VectorXd lambda_grad;   // d/d lambda_k in the (core, lambda) parametrization
};

inline ScoreVector score(const CanonicalForm& cf, const Eigen::VectorXd& rotated_obs) {
  const auto& part = cf.partition;
  if (rotated_obs.size() != part.dim())
    throw DimensionMismatch("score: rotated observation has wrong dimension");
  const int nblocks = part.block_count();
  const auto llt = detail::core_cholesky(cf);
  const Eigen::MatrixXd core_inv = llt.solve(Eigen::MatrixXd::Identity(nblocks, nblocks));
  const Eigen::VectorXd w = core_inv * rotated_obs.head(nblocks);
  ScoreVector s;
  s.core_grad = core_inv - w * w.transpose();
  s.var_grad.resize(nblocks);
  s.within_grad = Eigen::VectorXd::Zero(nblocks);
  s.lambda_grad = Eigen::VectorXd::Zero(nblocks);
  s.between_grad = Eigen::MatrixXd::Zero(nblocks, nblocks);
  for (int k = 0; k < nblocks; ++k) {
    const int m = part.size(k);
    double g = 0.0;
    if (m >= 2) {
      const double lam = cf.within(k);
      if (lam <= 0.0)
        throw SingularMatrix("score: within-block eigenvalue of block " + std::to_string(k) +
                             " is not positive");
      const double ss = rotated_obs.segment(part.contrast_offset(k), m - 1).squaredNorm();
      g = (m - 1) / lam - ss / (lam * lam);
    }
    s.var_grad(k) = s.core_grad(k, k) + g;
    if (m >= 2) s.within_grad(k) = (m - 1) * s.core_grad(k, k) - g;
    s.lambda_grad(k) = g;
    for (int j = 0; j < k; ++j) {
      const double v =
          2.0 * std::sqrt(static_cast<double>(m) * part.size(j)) * s.core_grad(k, j);
      s.between_grad(k, j) = v;
      s.between_grad(j, k) = v;
    }
  }
  return s;
}

inline ScoreVector score(const BlockCovariance& cov, const Eigen::VectorXd& rotated_obs) {
  return score(cov.canonical(), rotated_obs);
}

}  // namespace blockcanon
