#include <catch2/catch.hpp>

#include "blockcanon/blockcanon.hpp"
#include "blockcanon/oracle/dense.hpp"
#include "support/generators.hpp"

using namespace blockcanon;
using testgen::max_abs_diff;

TEST_CASE("validity classification", "[correlation]") {
  SECTION("boundary at the forced zero eigenvalue") {
    const BlockCorrelation corr(BlockPartition{4},
                                Eigen::MatrixXd::Constant(1, 1, -1.0 / 3.0));
    const auto report = is_valid_correlation(corr);
    REQUIRE(report.status == CorrelationValidity::SemidefiniteBoundary);
    REQUIRE(std::abs(report.min_core_eig) <= 1e-12);
  }
  SECTION("small coefficients can still be indefinite") {
    Eigen::MatrixXd rho(3, 3);
    rho << 0.1, 0.9, 0.9, 0.9, 0.1, 0.9, 0.9, 0.9, 0.1;
    const BlockCorrelation corr(BlockPartition{2, 2, 2}, rho);
    const auto report = is_valid_correlation(corr);
    REQUIRE(report.status == CorrelationValidity::Invalid);
    REQUIRE(report.min_core_eig < 0.0);
    // the dense eigenvalues confirm it
    const auto eig = oracle::dense_eig_sym(expand(corr.to_block_matrix()));
    REQUIRE(eig.values.minCoeff() < -1e-10);
  }
  SECTION("zero correlation is valid") {
    const BlockCorrelation corr(BlockPartition{2, 3}, Eigen::MatrixXd::Zero(2, 2));
    REQUIRE(is_valid_correlation(corr).status == CorrelationValidity::Valid);
  }
  SECTION("within correlation of one is a boundary with the block named") {
    Eigen::MatrixXd rho(2, 2);
    rho << 1.0, 0.0, 0.0, 0.2;
    const BlockCorrelation corr(BlockPartition{2, 3}, rho);
    const auto report = is_valid_correlation(corr);
    REQUIRE(report.status == CorrelationValidity::SemidefiniteBoundary);
    REQUIRE(report.offending_block == 0);
    REQUIRE(report.min_within_eig == Approx(0.0).margin(1e-15));
  }
  SECTION("|rho| above one is rejected structurally") {
    REQUIRE_THROWS_AS(
        BlockCorrelation(BlockPartition{2}, Eigen::MatrixXd::Constant(1, 1, 1.5)),
        StructureViolation);
  }
}

TEST_CASE("classifier agrees with the dense eigenvalue sign", "[correlation]") {
  std::mt19937_64 g(3001);
  int checked = 0;
  for (int rep = 0; rep < 120; ++rep) {
    const auto part = testgen::random_partition(g, 4, 8);
    const int nblocks = part.block_count();
    Eigen::MatrixXd rho(nblocks, nblocks);
    for (int i = 0; i < nblocks; ++i) {
      rho(i, i) = testgen::uniform(g, -0.999, 0.999);
      for (int j = 0; j < i; ++j) {
        rho(i, j) = testgen::uniform(g, -0.999, 0.999);
        rho(j, i) = rho(i, j);
      }
    }
    const BlockCorrelation corr(part, rho);
    const auto report = is_valid_correlation(corr);
    const auto eig = oracle::dense_eig_sym(expand(corr.to_block_matrix()));
    const double min_eig = eig.values.minCoeff();
    if (std::abs(min_eig) <= 1e-10 ||
        report.status == CorrelationValidity::SemidefiniteBoundary)
      continue;  // boundary band, excluded
    ++checked;
    if (min_eig > 0)
      REQUIRE(report.status == CorrelationValidity::Valid);
    else
      REQUIRE(report.status == CorrelationValidity::Invalid);
  }
  REQUIRE(checked >= 60);  // the sweep must actually exercise both sides
}

TEST_CASE("log parametrization", "[correlation]") {
  SECTION("identity maps to zero") {
    const BlockCorrelation corr(BlockPartition{3, 2}, Eigen::MatrixXd::Zero(2, 2));
    const CorrelationParam p = to_param(corr);
    REQUIRE(p.gamma.cwiseAbs().maxCoeff() <= 1e-15);
  }
  SECTION("equicorrelation closed form") {
    const double rho = 0.5;
    const BlockCorrelation corr(BlockPartition{3}, Eigen::MatrixXd::Constant(1, 1, rho));
    const CorrelationParam p = to_param(corr);
    REQUIRE(p.gamma.size() == 1);
    REQUIRE(p.gamma(0) == Approx((std::log(1 + 2 * rho) - std::log(1 - rho)) / 3.0));
  }
  SECTION("matches the dense logarithm entries") {
    std::mt19937_64 g(3002);
    for (int rep = 0; rep < 6; ++rep) {
      const auto part = testgen::random_partition(g, 3, 5, 2);
      const auto corr = testgen::random_valid_correlation(g, part);
      const Eigen::MatrixXd g_mat = param_unique_elements(corr);
      const Eigen::MatrixXd dense_log = oracle::dense_log_spd(expand(corr.to_block_matrix()));
      for (int i = 0; i < part.block_count(); ++i) {
        const int oi = part.offset(i);
        // within-block off-diagonal entries of log C
        REQUIRE(dense_log(oi, oi + 1) == Approx(g_mat(i, i)).margin(1e-10));
        for (int j = 0; j < i; ++j)
          REQUIRE(dense_log(oi, part.offset(j)) == Approx(g_mat(i, j)).margin(1e-10));
      }
    }
  }
  SECTION("consistency contract against mlog") {
    std::mt19937_64 g(3003);
    const auto part = testgen::random_partition(g, 4, 5, 2);
    const auto corr = testgen::random_valid_correlation(g, part);
    const Eigen::MatrixXd g_mat = param_unique_elements(corr);
    const Eigen::MatrixXd log_dense = expand(mlog(corr.canonical()));
    for (int i = 0; i < part.block_count(); ++i) {
      const int oi = part.offset(i), ni = part.size(i);
      for (int r = 0; r < ni; ++r)
        for (int c = 0; c < ni; ++c)
          if (r != c) REQUIRE(log_dense(oi + r, oi + c) == Approx(g_mat(i, i)).margin(1e-10));
      for (int j = 0; j < i; ++j) {
        const int oj = part.offset(j), nj = part.size(j);
        for (int r = 0; r < ni; ++r)
          for (int c = 0; c < nj; ++c)
            REQUIRE(log_dense(oi + r, oj + c) == Approx(g_mat(i, j)).margin(1e-10));
      }
    }
  }
  SECTION("gamma packs the lower triangle row by row") {
    std::mt19937_64 g(3004);
    const auto corr = testgen::random_valid_correlation(g, BlockPartition{2, 3, 2});
    const Eigen::MatrixXd g_mat = param_unique_elements(corr);
    const CorrelationParam p = to_param(corr);
    REQUIRE(p.gamma.size() == 6);
    int t = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j) REQUIRE(p.gamma(t++) == g_mat(i, j));
  }
  SECTION("invalid input propagates NotRealLoggable") {
    Eigen::MatrixXd rho(2, 2);
    rho << 0.1, 0.9, 0.9, 0.1;
    REQUIRE_THROWS_AS(to_param(BlockCorrelation(BlockPartition{2, 2}, rho)), NotRealLoggable);
  }
}
