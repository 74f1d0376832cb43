#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "blockcanon/correlation.hpp"
#include "blockcanon/mle.hpp"

namespace blockcanon {

// Summary statistics of the implied n x n correlation matrix. By default
// each block coefficient is weighted by the number of off-diagonal cells it
// fills (n_i(n_i - 1) within block i, n_i n_j for each ordered pair i != j),
// so the mean is the mean pairwise correlation across all asset pairs. The
// unweighted variant treats the K(K+1)/2 coefficients as equal observations.
struct CorrelationSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
  double min = std::numeric_limits<double>::quiet_NaN();
  double q10 = std::numeric_limits<double>::quiet_NaN();
  double q50 = std::numeric_limits<double>::quiet_NaN();
  double q90 = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

struct WeightedCell {
  double value;
  double weight;
};

// Quantile with linear interpolation over the expanded weighted sample: the
// cells stand for W integer-weight observations, and the quantile sits at
// virtual index q(W - 1) with interpolation between neighbors.
inline double weighted_quantile(const std::vector<WeightedCell>& sorted, double total,
                                double prob) {
  const double h = prob * (total - 1.0);
  const double lo_idx = std::floor(h);
  const double frac = h - lo_idx;
  double cum = 0.0;
  double lo = sorted.back().value, hi = sorted.back().value;
  bool have_lo = false;
  for (const auto& cell : sorted) {
    cum += cell.weight;
    if (!have_lo && cum > lo_idx) {
      lo = cell.value;
      have_lo = true;
    }
    if (cum > lo_idx + 1.0 || (frac == 0.0 && have_lo)) {
      hi = have_lo && cum > lo_idx + 1.0 ? cell.value : lo;
      break;
    }
  }
  if (frac == 0.0) return lo;
  return lo + frac * (hi - lo);
}

}  // namespace detail

inline CorrelationSummary summarize_correlations(const BlockCorrelation& corr,
                                                 bool weighted = true) {
  const auto& part = corr.partition;
  const int nblocks = part.block_count();
  std::vector<detail::WeightedCell> cells;
  cells.reserve(nblocks * (nblocks + 1) / 2);
  for (int i = 0; i < nblocks; ++i) {
    const double ni = part.size(i);
    if (part.size(i) >= 2)
      cells.push_back({corr.rho(i, i), weighted ? ni * (ni - 1.0) : 1.0});
    for (int j = 0; j < i; ++j)
      cells.push_back({corr.rho(i, j), weighted ? 2.0 * ni * part.size(j) : 1.0});
  }
  CorrelationSummary s;
  if (cells.empty()) return s;  // n == 1 or all blocks singleton with K == 1
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.value < b.value; });
  double total = 0.0, mean = 0.0;
  for (const auto& c : cells) {
    total += c.weight;
    mean += c.weight * c.value;
  }
  mean /= total;
  double var = 0.0;
  for (const auto& c : cells) var += c.weight * (c.value - mean) * (c.value - mean);
  s.mean = mean;
  s.stddev = std::sqrt(var / total);
  s.min = cells.front().value;
  s.max = cells.back().value;
  s.q10 = detail::weighted_quantile(cells, total, 0.10);
  s.q50 = detail::weighted_quantile(cells, total, 0.50);
  s.q90 = detail::weighted_quantile(cells, total, 0.90);
  return s;
}

// One row of the model-selection table for a candidate block structure.
struct ModelReport {
  std::string name;
  int level = 0;
  int block_count = 0;
  long param_count = 0;        // p = n variances + K(K+1)/2 correlations
  double neg2ll_per_cell = 0;  // -2l / (nN)
  double bic_per_cell = 0;     // (-2l + p log(nN)) / (nN)
  double aic_per_cell = 0;     // (-2l + 2p) / (nN)
  CorrelationSummary summary;
  bool invalid_estimate = false;
};

// Evaluates one candidate structure on a (sorted) panel: correlation MLE,
// total -2l = N * (sum_j log sigma_j^2 + block-likelihood of the
// standardized data), then the information criteria with p = n + K(K+1)/2.
inline ModelReport evaluate_model(const Eigen::MatrixXd& x_sorted, const BlockPartition& part,
                                  bool weighted_summary = true) {
  const long n_obs = x_sorted.rows();
  const int n = static_cast<int>(x_sorted.cols());
  const int nblocks = part.block_count();
  const BlockCorrelationMle fit = mle_block_correlation(x_sorted, part);

  const Eigen::MatrixXd standardized =
      x_sorted * fit.sigma2.array().sqrt().inverse().matrix().asDiagonal();
  const RotatedSample sample = rotate_sample(standardized, part);
  CanonicalForm corr_form = fit.corr.canonical();

  ModelReport report;
  report.block_count = nblocks;
  report.param_count = n + static_cast<long>(nblocks) * (nblocks + 1) / 2;
  const double cells = static_cast<double>(n) * static_cast<double>(n_obs);
  try {
    const double block_term = neg2_loglik(corr_form, sample);
    const double log_var_term = fit.sigma2.array().log().sum();
    const double neg2ll_total = static_cast<double>(n_obs) * (log_var_term + block_term);
    report.neg2ll_per_cell = neg2ll_total / cells;
    report.bic_per_cell = (neg2ll_total + report.param_count * std::log(cells)) / cells;
    report.aic_per_cell = (neg2ll_total + 2.0 * report.param_count) / cells;
  } catch (const SingularMatrix&) {
    // the estimate sits outside the positive-definite region; -2l is undefined
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.neg2ll_per_cell = nan;
    report.bic_per_cell = nan;
    report.aic_per_cell = nan;
  }
  report.summary = summarize_correlations(fit.corr, weighted_summary);
  report.invalid_estimate = fit.invalid_estimate;
  return report;
}

}  // namespace blockcanon
