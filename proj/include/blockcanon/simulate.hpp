#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "blockcanon/canonical.hpp"
#include "blockcanon/errors.hpp"
#include "blockcanon/mle.hpp"
#include "blockcanon/rotation.hpp"

namespace blockcanon {

// Deterministic standard-normal generator: mt19937_64 + Box-Muller. The
// std::normal_distribution algorithm is implementation-defined, so fixtures
// and the CLI use this instead; identical seeds give identical panels on any
// platform.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform01() {  // [0, 1), 53-bit
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Draws N observations from N(0, B) where B = Q D Q' is the block covariance
// given in canonical form (core SPD, within eigenvalues >= 0). Sampling works
// in rotated coordinates: y0 = chol(core) z0, y_k = sqrt(lambda_k) z_k, then
// one rotate_back per panel. O(n N) after the K x K Cholesky. Returns rows =
// observations.
inline Eigen::MatrixXd sample_block_gaussian(const CanonicalForm& cf, long n_obs,
                                             std::uint64_t seed) {
  const auto& part = cf.partition;
  const int nblocks = part.block_count();
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (cf.core + cf.core.transpose()));
  if (llt.info() != Eigen::Success)
    throw SingularMatrix("sample_block_gaussian: core matrix is not positive definite");
  for (int k = 0; k < nblocks; ++k)
    if (part.size(k) >= 2 && cf.within(k) < 0.0)
      throw SingularMatrix("sample_block_gaussian: negative within-block eigenvalue (block " +
                           std::to_string(k) + ")");

  GaussianSampler gauss(seed);
  Eigen::MatrixXd y(part.dim(), n_obs);
  for (Eigen::Index c = 0; c < y.cols(); ++c)  // column-major fill, fixed order
    for (Eigen::Index r = 0; r < y.rows(); ++r) y(r, c) = gauss();
  y.topRows(nblocks) = llt.matrixL() * y.topRows(nblocks);
  for (int k = 0; k < nblocks; ++k) {
    const int m = part.size(k);
    if (m == 1) continue;
    y.middleRows(part.contrast_offset(k), m - 1) *= std::sqrt(cf.within(k));
  }
  return rotate_back(y, part).transpose();
}

// Same draw for a correlation matrix plus per-asset standard deviations.
inline Eigen::MatrixXd sample_block_gaussian(const BlockCorrelation& corr,
                                             const Eigen::VectorXd& stddev, long n_obs,
                                             std::uint64_t seed) {
  if (stddev.size() != corr.partition.dim())
    throw DimensionMismatch("sample_block_gaussian: need one stddev per variable");
  Eigen::MatrixXd x = sample_block_gaussian(corr.canonical(), n_obs, seed);
  x = x * stddev.asDiagonal();
  return x;
}

}  // namespace blockcanon
