// Command-line surface: estimation and model selection on returns panels,
// block-matrix transforms, correlation validation, benchmarks, and synthetic
// panel generation.
//
// Exit codes: 0 ok/valid, 1 boundary, 2 input error, 3 degenerate data,
// 4 structure/positive-definiteness violation, 5 singular, 6 no real log.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "blockcanon/blockcanon.hpp"
#include "blockcanon/oracle/dense.hpp"

namespace {

using namespace blockcanon;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitBoundary = 1;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitStructure = 4;
constexpr int kExitSingular = 5;
constexpr int kExitNotLoggable = 6;

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json validity_json(const CorrelationValidityReport& report) {
  json j;
  j["status"] = to_string(report.status);
  j["min_core_eig"] = report.min_core_eig;
  if (std::isfinite(report.min_within_eig)) j["min_within_eig"] = report.min_within_eig;
  j["offending_block"] = report.offending_block;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << text;
}

Eigen::MatrixXd demean_columns(Eigen::MatrixXd x) {
  const Eigen::RowVectorXd means = x.colwise().mean();
  x.rowwise() -= means;
  return x;
}

// Streams the implied n x n correlation matrix without materializing it.
void write_heatmap_csv(const std::string& path, const BlockCorrelation& corr) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  const auto& part = corr.partition;
  std::vector<int> block_of(part.dim());
  for (int k = 0; k < part.block_count(); ++k)
    for (int i = 0; i < part.size(k); ++i) block_of[part.offset(k) + i] = k;
  for (int r = 0; r < part.dim(); ++r) {
    for (int c = 0; c < part.dim(); ++c) {
      if (c > 0) out << ',';
      const double v = r == c ? 1.0 : corr.rho(block_of[r], block_of[c]);
      out << io::detail::format_double(v);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
  std::string panel_path, groups_path, out_path, heatmap_path;
  int level = 1;
  bool demean = false;
};

int cmd_estimate(const EstimateArgs& args) {
  const ReturnsPanel panel = io::read_returns_csv(args.panel_path);
  const GroupMap groups = io::read_groupmap_csv(args.groups_path);
  const LevelPartition lp = partition_at_level(panel, groups, args.level);
  Eigen::MatrixXd x = reorder_columns(panel.x, lp.order);
  if (args.demean) x = demean_columns(std::move(x));
  const BlockCorrelationMle fit = mle_block_correlation(x, lp.partition);

  json j;
  j["n"] = lp.partition.dim();
  j["K"] = lp.partition.block_count();
  j["N"] = panel.x.rows();
  j["level"] = args.level;
  j["demeaned"] = args.demean;
  j["sizes"] = lp.partition.sizes();
  j["block_labels"] = lp.block_labels;
  j["assets"] = lp.sorted_ids;
  j["permutation"] = lp.order;
  j["sigma2"] = to_json(fit.sigma2);
  j["A"] = to_json(fit.core);
  j["rho"] = to_json(fit.corr.rho);
  j["lambda"] = to_json(fit.lambda);
  j["lambda_contrast"] = to_json(fit.lambda_contrast);
  j["validity"] = validity_json(fit.validity);
  j["invalid_estimate"] = fit.invalid_estimate;
  write_text(args.out_path, j.dump(2) + "\n");

  if (!args.heatmap_path.empty()) write_heatmap_csv(args.heatmap_path, fit.corr);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// select

struct SelectArgs {
  std::string panel_path, groups_path, out_path;
  std::vector<int> levels;
  std::string format = "csv";
  bool demean = false;
  bool unweighted = false;
  bool with_aic = false;
};

std::string format_stat(double v) {
  return std::isnan(v) ? "nan" : io::detail::format_double(v);
}

int cmd_select(const SelectArgs& args) {
  if (args.levels.size() < 2)
    throw InputError("select: need at least two levels to compare");
  const ReturnsPanel panel = io::read_returns_csv(args.panel_path);
  const GroupMap groups = io::read_groupmap_csv(args.groups_path);

  std::vector<ModelReport> reports;
  for (const int level : args.levels) {
    const LevelPartition lp = partition_at_level(panel, groups, level);
    Eigen::MatrixXd x = reorder_columns(panel.x, lp.order);
    if (args.demean) x = demean_columns(std::move(x));
    ModelReport report = evaluate_model(x, lp.partition, !args.unweighted);
    report.level = level;
    report.name = level == 0 ? "equicorrelation" : "level-" + std::to_string(level);
    reports.push_back(std::move(report));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const double a = reports[i].bic_per_cell, b = reports[best].bic_per_cell;
    if (!std::isnan(a) && (std::isnan(b) || a < b)) best = i;
  }

  if (args.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      json row;
      row["name"] = r.name;
      row["level"] = r.level;
      row["K"] = r.block_count;
      row["unique_correlations"] =
          static_cast<long>(r.block_count) * (r.block_count + 1) / 2;
      row["params"] = r.param_count;
      row["neg2ll_per_cell"] = r.neg2ll_per_cell;
      row["bic_per_cell"] = r.bic_per_cell;
      row["aic_per_cell"] = r.aic_per_cell;
      row["mean"] = r.summary.mean;
      row["std"] = r.summary.stddev;
      row["min"] = r.summary.min;
      row["q10"] = r.summary.q10;
      row["q50"] = r.summary.q50;
      row["q90"] = r.summary.q90;
      row["max"] = r.summary.max;
      row["invalid_estimate"] = r.invalid_estimate;
      row["selected_by_bic"] = i == best;
      rows.push_back(std::move(row));
    }
    write_text(args.out_path, rows.dump(2) + "\n");
  } else {
    std::string text = "Block structure,Mean,Std.,Min,Q10%,Q50%,Q90%,Max,"
                       "-2\xE2\x84\x93/(nN),BIC/(nN),K,K(K+1)/2";
    if (args.with_aic) text += ",AIC/(nN)";
    text += '\n';
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      text += r.name + (i == best ? "*" : "");
      text += ',' + format_stat(r.summary.mean) + ',' + format_stat(r.summary.stddev);
      text += ',' + format_stat(r.summary.min) + ',' + format_stat(r.summary.q10);
      text += ',' + format_stat(r.summary.q50) + ',' + format_stat(r.summary.q90);
      text += ',' + format_stat(r.summary.max);
      text += ',' + format_stat(r.neg2ll_per_cell) + ',' + format_stat(r.bic_per_cell);
      text += ',' + std::to_string(r.block_count);
      text += ',' + std::to_string(static_cast<long>(r.block_count) *
                                   (r.block_count + 1) / 2);
      if (args.with_aic) text += ',' + format_stat(r.aic_per_cell);
      text += '\n';
    }
    write_text(args.out_path, text);
  }
  std::cerr << "BIC selects " << reports[best].name << " (K = "
            << reports[best].block_count << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// transform

struct TransformArgs {
  std::string in_path, out_path, op, in_format;
  std::vector<int> sizes;
  double tol = 1e-8;
};

std::string detect_format(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "json") return "json";
  if (ext == "bcan" || ext == "bin") return "bcan";
  return "csv";
}

int cmd_transform(const TransformArgs& args) {
  const std::string format =
      args.in_format.empty() ? detect_format(args.in_path) : args.in_format;

  BlockMatrix bm = [&] {
    if (format == "json") return io::read_block_json(args.in_path);
    const Eigen::MatrixXd dense = format == "bcan" ? io::read_binary_matrix(args.in_path)
                                                   : io::read_csv_matrix(args.in_path);
    if (args.sizes.empty()) {
      if (dense.rows() != dense.cols())
        throw InputError("transform: dense input must be square");
      // no partition given: treat the whole matrix as one block
      return compress(dense, BlockPartition({static_cast<int>(dense.rows())}), args.tol);
    }
    return compress(dense, BlockPartition(args.sizes), args.tol);
  }();

  const CanonicalForm cf = canonicalize(bm);

  if (args.op == "det") {
    const LogDet ld = log_determinant(cf);
    const std::string text = "sign " + std::to_string(ld.sign) + "\nlog_abs " +
                             io::detail::format_double(ld.log_abs) + "\nvalue " +
                             io::detail::format_double(ld.value()) + "\n";
    write_text(args.out_path, text);
    return kExitOk;
  }

  const CanonicalForm result = [&] {
    if (args.op == "inv") return inverse(cf);
    if (args.op == "log") return mlog(cf);
    if (args.op == "exp") return mexp(cf);
    if (args.op.rfind("pow:", 0) == 0) {
      long q = 0;
      try {
        q = std::stol(args.op.substr(4));
      } catch (const std::exception&) {
        throw InputError("transform: cannot parse power in '" + args.op + "'");
      }
      return power(cf, q);
    }
    throw InputError("transform: unknown op '" + args.op + "'");
  }();

  const BlockMatrix out_bm = decanonicalize(result);
  if (format == "json") {
    write_text(args.out_path, io::to_json(out_bm).dump(2) + "\n");
  } else if (args.out_path.empty()) {
    const Eigen::MatrixXd dense = expand(out_bm);
    std::string text;
    for (Eigen::Index r = 0; r < dense.rows(); ++r) {
      for (Eigen::Index c = 0; c < dense.cols(); ++c) {
        if (c > 0) text += ',';
        text += io::detail::format_double(dense(r, c));
      }
      text += '\n';
    }
    std::cout << text;
  } else if (format == "bcan") {
    io::write_binary_matrix(args.out_path, expand(out_bm));
  } else {
    io::write_csv_matrix(args.out_path, expand(out_bm));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& in_path) {
  const BlockMatrix bm = io::read_block_json(in_path);
  for (int k = 0; k < bm.partition.block_count(); ++k)
    if (std::abs(bm.diag(k) - 1.0) > 1e-12)
      throw InputError("validate: diagonal value of block " + std::to_string(k) +
                       " is not 1; not a correlation matrix");
  const BlockCorrelation corr(bm.partition, bm.block);
  const auto report = is_valid_correlation(corr);
  std::cout << "status " << to_string(report.status) << "\n"
            << "min_core_eig " << io::detail::format_double(report.min_core_eig) << "\n";
  if (std::isfinite(report.min_within_eig))
    std::cout << "min_within_eig " << io::detail::format_double(report.min_within_eig)
              << "\n";
  if (report.offending_block >= 0)
    std::cout << "offending_block " << report.offending_block << "\n";
  switch (report.status) {
    case CorrelationValidity::Valid:
      return kExitOk;
    case CorrelationValidity::SemidefiniteBoundary:
      return kExitBoundary;
    case CorrelationValidity::Invalid:
      return kExitStructure;
  }
  return kExitStructure;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  int n = 256;
  int blocks = 4;
  int reps = 5;
  std::uint64_t seed = 1;
  std::string out_path;
  std::vector<std::string> ops = {"det", "inv", "loglik"};
};

double median_ms(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t m = samples.size() / 2;
  return samples.size() % 2 == 1 ? samples[m] : 0.5 * (samples[m - 1] + samples[m]);
}

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
  std::vector<double> samples;
  samples.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return median_ms(std::move(samples));
}

BlockPartition even_partition(int n, int blocks) {
  std::vector<int> sizes(blocks, n / blocks);
  for (int k = 0; k < n % blocks; ++k) ++sizes[k];
  return BlockPartition(std::move(sizes));
}

int cmd_bench(const BenchArgs& args) {
  if (args.n < args.blocks || args.blocks < 1)
    throw InputError("bench: need n >= K >= 1");
  const BlockPartition part = even_partition(args.n, args.blocks);
  std::mt19937_64 engine(args.seed);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine() >> 11) * 0x1.0p-53);
  };
  Eigen::MatrixXd rho(args.blocks, args.blocks);
  const double base = 0.15;
  for (int i = 0; i < args.blocks; ++i) {
    rho(i, i) = uniform(base + 0.1, 0.6);
    for (int j = 0; j < i; ++j) {
      rho(i, j) = base;
      rho(j, i) = base;
    }
  }
  const BlockCorrelation corr(part, rho);
  const CanonicalForm cf = corr.canonical();
  const Eigen::MatrixXd dense = expand(corr.to_block_matrix());

  std::string text = "op,n,K,reps,canonical_ms,dense_ms,ratio\n";
  volatile double sink = 0.0;  // keeps the timed results alive
  for (const std::string& op : args.ops) {
    double canonical_ms = 0.0, dense_ms = 0.0;
    if (op == "det") {
      canonical_ms = time_ms([&] { sink = log_determinant(cf).log_abs; }, args.reps);
      dense_ms = time_ms([&] { sink = oracle::dense_det(dense); }, args.reps);
    } else if (op == "inv") {
      canonical_ms = time_ms([&] { sink = inverse(cf).core(0, 0); }, args.reps);
      dense_ms = time_ms([&] { sink = oracle::dense_inv(dense)(0, 0); }, args.reps);
    } else if (op == "loglik") {
      const long n_obs = 32;
      const Eigen::MatrixXd x = sample_block_gaussian(cf, n_obs, args.seed + 1);
      canonical_ms =
          time_ms([&] { sink = neg2_loglik(cf, rotate_sample(x, part)); }, args.reps);
      dense_ms = time_ms([&] { sink = oracle::dense_neg2_loglik(dense, x); }, args.reps);
    } else {
      throw InputError("bench: unknown op '" + op + "'");
    }
    text += op + ',' + std::to_string(args.n) + ',' + std::to_string(args.blocks) + ',' +
            std::to_string(args.reps) + ',' + io::detail::format_double(canonical_ms) +
            ',' + io::detail::format_double(dense_ms) + ',' +
            io::detail::format_double(dense_ms / std::max(canonical_ms, 1e-9)) + '\n';
  }
  (void)sink;
  write_text(args.out_path, text);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  int n = 0;
  int blocks = 0;
  std::vector<int> sizes;
  long n_obs = 250;
  std::uint64_t seed = 1;
  int subdivide = 1;
  bool shuffle = false;
  std::string panel_path, groups_path, params_path;
  std::vector<double> within{0.3, 0.6};
  std::vector<double> between{0.1, 0.2};
  std::vector<double> vol{0.5, 2.0};
};

int cmd_simulate(const SimulateArgs& args) {
  const BlockPartition part = [&] {
    if (!args.sizes.empty()) return BlockPartition(args.sizes);
    if (args.n < 1 || args.blocks < 1 || args.n < args.blocks)
      throw InputError("simulate: give --sizes or --n and --blocks with n >= K");
    return even_partition(args.n, args.blocks);
  }();
  if (args.within.size() != 2 || args.between.size() != 2 || args.vol.size() != 2)
    throw InputError("simulate: ranges must be lo,hi pairs");
  const int n = part.dim();
  const int nblocks = part.block_count();

  std::mt19937_64 engine(args.seed);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine() >> 11) * 0x1.0p-53);
  };

  // Validity by construction: the between-block part is a common nonnegative
  // level c plus a perturbation small enough that the diagonal surplus
  // (within_lo - c) dominates its Gershgorin row sums, so the block-level
  // coefficient matrix stays positive definite at any K.
  const double between_lo = std::max(0.0, args.between[0]);
  const double between_hi = std::max(between_lo, args.between[1]);
  const double within_lo = std::max(args.within[0], between_hi + 0.05);
  const double within_hi = std::max(within_lo + 0.01, args.within[1]);
  const double spread = std::min(between_hi - between_lo,
                                 0.9 * (within_lo - between_lo) / std::max(1, nblocks - 1));
  Eigen::MatrixXd rho(nblocks, nblocks);
  for (int i = 0; i < nblocks; ++i) {
    rho(i, i) = uniform(within_lo, within_hi);
    for (int j = 0; j < i; ++j) {
      rho(i, j) = between_lo + uniform(0.0, spread);
      rho(j, i) = rho(i, j);
    }
  }
  const BlockCorrelation corr(part, rho);
  if (is_valid_correlation(corr).status != CorrelationValidity::Valid)
    throw Error("simulate: generated correlation is not valid; widen the gaps");

  Eigen::VectorXd stddev(n);
  for (int i = 0; i < n; ++i) stddev(i) = uniform(args.vol[0], args.vol[1]);
  const Eigen::MatrixXd x = sample_block_gaussian(corr, stddev, args.n_obs, args.seed + 7);

  // labels: one root, one middle label per block, `subdivide` leaves inside
  std::vector<std::string> labels(n);
  char buf[64];
  for (int k = 0; k < nblocks; ++k) {
    const int m = part.size(k);
    const int parts = std::min(args.subdivide, m);
    for (int i = 0; i < m; ++i) {
      const int sub = parts <= 1 ? 0 : std::min(i / ((m + parts - 1) / parts), parts - 1);
      std::snprintf(buf, sizeof buf, "ALL.B%02d.S%02d", k, sub);
      labels[part.offset(k) + i] = buf;
    }
  }

  ReturnsPanel panel;
  panel.asset_ids.resize(n);
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "A%04d", i);
    panel.asset_ids[i] = buf;
  }
  panel.dates.resize(args.n_obs);
  for (long t = 0; t < args.n_obs; ++t) {
    std::snprintf(buf, sizeof buf, "d%05ld", t);
    panel.dates[t] = buf;
  }
  panel.x = x;

  GroupMap groups;
  for (int i = 0; i < n; ++i) groups.labels[panel.asset_ids[i]] = labels[i];

  if (args.shuffle) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[static_cast<int>(engine() % static_cast<std::uint64_t>(i + 1))]);
    ReturnsPanel shuffled;
    shuffled.dates = panel.dates;
    shuffled.asset_ids.resize(n);
    shuffled.x.resize(panel.x.rows(), n);
    for (int i = 0; i < n; ++i) {
      shuffled.asset_ids[i] = panel.asset_ids[perm[i]];
      shuffled.x.col(i) = panel.x.col(perm[i]);
    }
    panel = std::move(shuffled);
  }

  io::write_returns_csv(args.panel_path, panel);
  if (!args.groups_path.empty()) io::write_groupmap_csv(args.groups_path, groups);
  if (!args.params_path.empty()) {
    json j;
    j["sizes"] = part.sizes();
    j["rho"] = to_json(corr.rho);
    j["stddev"] = to_json(stddev);
    j["seed"] = args.seed;
    j["N"] = args.n_obs;
    j["subdivide"] = args.subdivide;
    write_text(args.params_path, j.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block correlation/covariance estimation via the canonical form"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "estimate a block correlation matrix");
  estimate->add_option("--panel", est.panel_path, "returns CSV")->required();
  estimate->add_option("--groups", est.groups_path, "group map CSV")->required();
  estimate->add_option("--level", est.level, "hierarchy level (0 = one group)");
  estimate->add_option("--out", est.out_path, "output JSON path (default stdout)");
  estimate->add_option("--emit-heatmap", est.heatmap_path,
                       "write the implied n x n correlation matrix as CSV");
  estimate->add_flag("--demean", est.demean, "subtract column means first");

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "compare nested block structures");
  select->add_option("--panel", sel.panel_path, "returns CSV")->required();
  select->add_option("--groups", sel.groups_path, "group map CSV")->required();
  select->add_option("--levels", sel.levels, "levels to compare")
      ->required()
      ->delimiter(',');
  select->add_option("--format", sel.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  select->add_option("--out", sel.out_path, "output path (default stdout)");
  select->add_flag("--demean", sel.demean, "subtract column means first");
  select->add_flag("--unweighted", sel.unweighted,
                   "summary statistics over coefficients, not cells");
  select->add_flag("--with-aic", sel.with_aic, "append an AIC/(nN) column");

  TransformArgs tr;
  auto* transform = app.add_subcommand("transform", "apply a matrix function");
  transform->add_option("--in", tr.in_path, "input matrix (csv, bcan, json)")->required();
  transform->add_option("--op", tr.op, "inv, log, exp, det, pow:q")->required();
  transform->add_option("--out", tr.out_path, "output path (default stdout)");
  transform->add_option("--sizes", tr.sizes, "block sizes for dense input")->delimiter(',');
  transform->add_option("--tol", tr.tol, "compress tolerance for dense input");
  transform->add_option("--in-format", tr.in_format, "override format detection")
      ->check(CLI::IsMember({"csv", "bcan", "json"}));

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a block correlation matrix");
  validate->add_option("--in", validate_path, "block matrix JSON")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "canonical vs dense timings");
  bench_cmd->add_option("--n", bench.n, "matrix dimension");
  bench_cmd->add_option("--blocks", bench.blocks, "block count K");
  bench_cmd->add_option("--reps", bench.reps, "repetitions per op");
  bench_cmd->add_option("--seed", bench.seed, "instance seed");
  bench_cmd->add_option("--ops", bench.ops, "subset of det,inv,loglik")->delimiter(',');
  bench_cmd->add_option("--out", bench.out_path, "output CSV (default stdout)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic panel");
  simulate->add_option("--n", sim.n, "variable count (with --blocks)");
  simulate->add_option("--blocks", sim.blocks, "block count (with --n)");
  simulate->add_option("--sizes", sim.sizes, "explicit block sizes")->delimiter(',');
  simulate->add_option("--obs", sim.n_obs, "observation count");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--subdivide", sim.subdivide,
                       "leaf labels per block (for nested-level tests)");
  simulate->add_flag("--shuffle", sim.shuffle, "shuffle panel column order");
  simulate->add_option("--panel", sim.panel_path, "output returns CSV")->required();
  simulate->add_option("--groups", sim.groups_path, "output group map CSV");
  simulate->add_option("--params", sim.params_path, "output true-parameter JSON");
  simulate->add_option("--rho-within", sim.within, "within-correlation range lo,hi")
      ->delimiter(',');
  simulate->add_option("--rho-between", sim.between, "between-correlation range lo,hi")
      ->delimiter(',');
  simulate->add_option("--vol", sim.vol, "stddev range lo,hi")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*estimate) return cmd_estimate(est);
    if (*select) return cmd_select(sel);
    if (*transform) return cmd_transform(tr);
    if (*validate) return cmd_validate(validate_path);
    if (*bench_cmd) return cmd_bench(bench);
    if (*simulate) return cmd_simulate(sim);
  } catch (const ZeroVariance& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const StructureViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStructure;
  } catch (const SingularMatrix& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const NotRealLoggable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotLoggable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
