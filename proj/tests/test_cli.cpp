#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "blockcanon/blockcanon.hpp"
#include "support/generators.hpp"

// End-to-end tests that exercise the built binary the way a user would.

using namespace blockcanon;
using nlohmann::json;

namespace {

const std::string kCli = BLOCKCANON_CLI_PATH;
const std::string kFixtures = BLOCKCANON_FIXTURE_DIR;

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("blockcanon_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

TEST_CASE("transform subcommand", "[cli]") {
  TempDir tmp;
  SECTION("determinant of the equicorrelation fixture") {
    REQUIRE(run("transform --in " + kFixtures + "/equicorr3.csv --sizes 3 --op det --out " +
                tmp.file("det.txt")) == 0);
    const std::string out = slurp(tmp.file("det.txt"));
    REQUIRE(out.find("sign 1") != std::string::npos);
    REQUIRE(out.find("value 0.5") != std::string::npos);
  }
  SECTION("log of the identity is the zero matrix") {
    io::write_csv_matrix(tmp.file("eye.csv"), Eigen::MatrixXd::Identity(4, 4));
    REQUIRE(run("transform --in " + tmp.file("eye.csv") + " --sizes 2,2 --op log --out " +
                tmp.file("log.csv")) == 0);
    const Eigen::MatrixXd result = io::read_csv_matrix(tmp.file("log.csv"));
    REQUIRE(result.cwiseAbs().maxCoeff() <= 1e-14);
  }
  SECTION("double inverse returns the original") {
    REQUIRE(run("transform --in " + kFixtures + "/valid_corr.json --op inv --out " +
                tmp.file("inv.json")) == 0);
    REQUIRE(run("transform --in " + tmp.file("inv.json") + " --op inv --out " +
                tmp.file("inv2.json")) == 0);
    const BlockMatrix original = io::read_block_json(kFixtures + "/valid_corr.json");
    const BlockMatrix back = io::read_block_json(tmp.file("inv2.json"));
    REQUIRE(testgen::max_abs_diff(back.block, original.block) <= 1e-9);
    REQUIRE((back.diag - original.diag).cwiseAbs().maxCoeff() <= 1e-9);
  }
  SECTION("integer powers work through pow:q") {
    REQUIRE(run("transform --in " + kFixtures + "/valid_corr.json --op pow:2 --out " +
                tmp.file("sq.json")) == 0);
    const BlockMatrix sq = io::read_block_json(tmp.file("sq.json"));
    const Eigen::MatrixXd dense =
        expand(io::read_block_json(kFixtures + "/valid_corr.json"));
    REQUIRE(testgen::max_abs_diff(expand(sq), dense * dense) <= 1e-10);
  }
  SECTION("binary format round trip") {
    BlockMatrix bm(BlockPartition{2, 2}, Eigen::VectorXd::Ones(2),
                   Eigen::MatrixXd::Constant(2, 2, 0.3));
    io::write_binary_matrix(tmp.file("m.bcan"), expand(bm));
    REQUIRE(run("transform --in " + tmp.file("m.bcan") + " --sizes 2,2 --op exp --out " +
                tmp.file("e.bcan")) == 0);
    const Eigen::MatrixXd result = io::read_binary_matrix(tmp.file("e.bcan"));
    REQUIRE(testgen::max_abs_diff(result, expand(mexp(canonicalize(bm)))) <= 1e-12);
  }
  SECTION("structure violations exit 4") {
    io::write_csv_matrix(tmp.file("bad.csv"), Eigen::MatrixXd::Random(4, 4));
    REQUIRE(run("transform --in " + tmp.file("bad.csv") + " --sizes 2,2 --op det --tol 1e-10") ==
            4);
  }
  SECTION("singular input exits 5") {
    // within eigenvalue 1 - 1 = 0
    std::ofstream out(tmp.file("sing.json"));
    out << R"({"sizes": [3], "d": [1.0], "b": [[1.0]]})";
    out.close();
    REQUIRE(run("transform --in " + tmp.file("sing.json") + " --op inv") == 5);
  }
  SECTION("log of an indefinite matrix exits 6") {
    REQUIRE(run("transform --in " + kFixtures + "/indefinite_corr.json --op log") == 6);
  }
  SECTION("missing file exits 2") {
    REQUIRE(run("transform --in /nonexistent.csv --sizes 2 --op det") == 2);
  }
}

TEST_CASE("validate subcommand", "[cli]") {
  REQUIRE(run("validate --in " + kFixtures + "/valid_corr.json") == 0);
  REQUIRE(run("validate --in " + kFixtures + "/boundary_corr.json") == 1);
  REQUIRE(run("validate --in " + kFixtures + "/indefinite_corr.json") == 4);
  // unit diagonal is required for a correlation matrix
  REQUIRE(run("validate --in " + kFixtures + "/notcorr.json") == 2);
}

TEST_CASE("estimate subcommand", "[cli]") {
  TempDir tmp;
  const std::string fixture_args =
      " --panel " + kFixtures + "/panel_small.csv --groups " + kFixtures + "/groups_small.csv";

  SECTION("recovers the fixture truth at the block level") {
    REQUIRE(run("estimate" + fixture_args + " --level 2 --out " + tmp.file("est.json")) == 0);
    const json est = slurp_json(tmp.file("est.json"));
    const json truth = slurp_json(kFixtures + "/params_small.json");
    REQUIRE(est["K"] == 3);
    REQUIRE(est["sizes"] == json(std::vector<int>{4, 4, 4}));
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        err = std::max(err, std::abs(est["rho"][i][j].get<double>() -
                                     truth["rho"][i][j].get<double>()));
    REQUIRE(err <= 0.05);
    REQUIRE(est["validity"]["status"] == "valid");
    REQUIRE(est["invalid_estimate"] == false);
    // lambda is diagonal-implied: 1 - rho_kk exactly
    for (int k = 0; k < 3; ++k)
      REQUIRE(est["lambda"][k].get<double>() ==
              Approx(1.0 - est["rho"][k][k].get<double>()).margin(1e-12));
    // the permutation undoes the shuffled column order
    REQUIRE(est["permutation"].size() == 12);
  }
  SECTION("equicorrelation level equals the average pairwise sample correlation") {
    REQUIRE(run("estimate" + fixture_args + " --level 0 --out " + tmp.file("eq.json")) == 0);
    const json est = slurp_json(tmp.file("eq.json"));
    REQUIRE(est["K"] == 1);
    // direct average of all pairwise sample correlations of the standardized panel
    const ReturnsPanel panel = io::read_returns_csv(kFixtures + "/panel_small.csv");
    const int n = static_cast<int>(panel.x.cols());
    Eigen::MatrixXd xs = panel.x;
    for (int c = 0; c < n; ++c) xs.col(c) /= std::sqrt(xs.col(c).squaredNorm() / xs.rows());
    const Eigen::MatrixXd corr = xs.transpose() * xs / static_cast<double>(xs.rows());
    double mean = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) mean += corr(i, j);
    mean /= n * (n - 1);
    REQUIRE(est["rho"][0][0].get<double>() == Approx(mean).margin(1e-10));
  }
  SECTION("heatmap matches the block coefficients") {
    REQUIRE(run("estimate" + fixture_args + " --level 2 --out " + tmp.file("est.json") +
                " --emit-heatmap " + tmp.file("hm.csv")) == 0);
    const json est = slurp_json(tmp.file("est.json"));
    const Eigen::MatrixXd hm = io::read_csv_matrix(tmp.file("hm.csv"));
    REQUIRE(hm.rows() == 12);
    REQUIRE(hm(0, 0) == 1.0);
    REQUIRE(hm(0, 1) == Approx(est["rho"][0][0].get<double>()));
    REQUIRE(hm(0, 11) == Approx(est["rho"][0][2].get<double>()));
    REQUIRE(hm(5, 6) == Approx(est["rho"][1][1].get<double>()));
  }
  SECTION("single-asset panel degenerates cleanly") {
    std::ofstream panel(tmp.file("one.csv"));
    panel << "date,X\nd0,0.5\nd1,-0.25\nd2,0.125\n";
    panel.close();
    std::ofstream groups(tmp.file("one_groups.csv"));
    groups << "X,SOLO\n";
    groups.close();
    REQUIRE(run("estimate --panel " + tmp.file("one.csv") + " --groups " +
                tmp.file("one_groups.csv") + " --level 1 --out " + tmp.file("one.json")) == 0);
    const json est = slurp_json(tmp.file("one.json"));
    REQUIRE(est["n"] == 1);
    REQUIRE(est["K"] == 1);
    REQUIRE(est["rho"][0][0] == 0.0);
    REQUIRE(est["sigma2"][0].get<double>() ==
            Approx((0.25 + 0.0625 + 0.015625) / 3.0));
  }
  SECTION("unmapped asset exits 2") {
    std::ofstream groups(tmp.file("partial.csv"));
    groups << "A0000,ALL.B00.S00\n";
    groups.close();
    REQUIRE(run("estimate --panel " + kFixtures + "/panel_small.csv --groups " +
                tmp.file("partial.csv") + " --level 1") == 2);
  }
  SECTION("zero-variance column exits 3") {
    std::ofstream panel(tmp.file("zv.csv"));
    panel << "date,A,B\nd0,0.1,0\nd1,-0.1,0\n";
    panel.close();
    std::ofstream groups(tmp.file("zv_groups.csv"));
    groups << "A,G\nB,G\n";
    groups.close();
    REQUIRE(run("estimate --panel " + tmp.file("zv.csv") + " --groups " +
                tmp.file("zv_groups.csv") + " --level 1") == 3);
  }
  SECTION("demeaning removes a contaminating level shift") {
    ReturnsPanel panel = io::read_returns_csv(kFixtures + "/panel_small.csv");
    panel.x.col(3).array() += 10.0;  // a large constant offset
    io::write_returns_csv(tmp.file("shifted.csv"), panel);
    REQUIRE(run("estimate --panel " + tmp.file("shifted.csv") + " --groups " + kFixtures +
                "/groups_small.csv --level 2 --demean --out " + tmp.file("dm.json")) == 0);
    const json est = slurp_json(tmp.file("dm.json"));
    const json truth = slurp_json(kFixtures + "/params_small.json");
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        err = std::max(err, std::abs(est["rho"][i][j].get<double>() -
                                     truth["rho"][i][j].get<double>()));
    REQUIRE(err <= 0.06);
    REQUIRE(est["demeaned"] == true);
  }
}

TEST_CASE("select subcommand", "[cli]") {
  TempDir tmp;
  const std::string fixture_args =
      " --panel " + kFixtures + "/panel_small.csv --groups " + kFixtures + "/groups_small.csv";

  SECTION("csv table carries the documented header") {
    REQUIRE(run("select" + fixture_args + " --levels 0,2,3 --out " + tmp.file("sel.csv")) == 0);
    const std::string text = slurp(tmp.file("sel.csv"));
    const std::string header = text.substr(0, text.find('\n'));
    REQUIRE(header ==
            "Block structure,Mean,Std.,Min,Q10%,Q50%,Q90%,Max,-2\xE2\x84\x93/(nN),BIC/(nN),K,"
            "K(K+1)/2");
    REQUIRE(text.find("equicorrelation") != std::string::npos);
  }
  SECTION("bic prefers the true block count and likelihood is monotone") {
    REQUIRE(run("select" + fixture_args + " --levels 0,2,3 --format json --out " +
                tmp.file("sel.json")) == 0);
    const json rows = slurp_json(tmp.file("sel.json"));
    REQUIRE(rows.size() == 3);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
      REQUIRE(row["neg2ll_per_cell"].get<double>() <= prev + 1e-9);
      prev = row["neg2ll_per_cell"].get<double>();
    }
    for (const auto& row : rows)
      REQUIRE((row["selected_by_bic"] == (row["K"] == 3)));
    // equicorrelation weighted mean equals the finer models' weighted mean
    REQUIRE(rows[0]["mean"].get<double>() ==
            Approx(rows[1]["mean"].get<double>()).margin(1e-10));
  }
  SECTION("aic never selects fewer blocks than bic") {
    REQUIRE(run("select" + fixture_args + " --levels 0,2,3 --format json --out " +
                tmp.file("sel.json")) == 0);
    const json rows = slurp_json(tmp.file("sel.json"));
    int bic_k = 0, aic_k = 0;
    double best_bic = 1e300, best_aic = 1e300;
    for (const auto& row : rows) {
      if (row["bic_per_cell"].get<double>() < best_bic) {
        best_bic = row["bic_per_cell"].get<double>();
        bic_k = row["K"].get<int>();
      }
      if (row["aic_per_cell"].get<double>() < best_aic) {
        best_aic = row["aic_per_cell"].get<double>();
        aic_k = row["K"].get<int>();
      }
    }
    REQUIRE(aic_k >= bic_k);
  }
  SECTION("unweighted summaries differ from cell-weighted ones") {
    REQUIRE(run("select" + fixture_args + " --levels 0,2 --format json --out " +
                tmp.file("w.json")) == 0);
    REQUIRE(run("select" + fixture_args + " --levels 0,2 --unweighted --format json --out " +
                tmp.file("u.json")) == 0);
    const json weighted = slurp_json(tmp.file("w.json"));
    const json unweighted = slurp_json(tmp.file("u.json"));
    // same likelihoods, different averaging of the coefficients
    REQUIRE(weighted[1]["neg2ll_per_cell"] == unweighted[1]["neg2ll_per_cell"]);
    REQUIRE(weighted[1]["mean"].get<double>() !=
            Approx(unweighted[1]["mean"].get<double>()).margin(1e-6));
  }
  SECTION("duplicate levels produce identical rows") {
    REQUIRE(run("select" + fixture_args + " --levels 2,2 --format json --out " +
                tmp.file("dup.json")) == 0);
    const json rows = slurp_json(tmp.file("dup.json"));
    REQUIRE(rows.size() == 2);
    json a = rows[0], b = rows[1];
    a.erase("selected_by_bic");
    b.erase("selected_by_bic");
    REQUIRE(a == b);
  }
  SECTION("a single level is rejected") {
    REQUIRE(run("select" + fixture_args + " --levels 2") == 2);
  }
}

TEST_CASE("outputs are byte-deterministic", "[cli]") {
  TempDir tmp;
  SECTION("simulate with a fixed seed") {
    const std::string args = " --sizes 3,3 --obs 50 --seed 99 --subdivide 1 --shuffle";
    REQUIRE(run("simulate" + args + " --panel " + tmp.file("a.csv") + " --groups " +
                tmp.file("ag.csv")) == 0);
    REQUIRE(run("simulate" + args + " --panel " + tmp.file("b.csv") + " --groups " +
                tmp.file("bg.csv")) == 0);
    REQUIRE(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));
    REQUIRE(slurp(tmp.file("ag.csv")) == slurp(tmp.file("bg.csv")));
  }
  SECTION("estimate twice on the same input") {
    const std::string fixture_args = " --panel " + kFixtures + "/panel_small.csv --groups " +
                                     kFixtures + "/groups_small.csv --level 2";
    REQUIRE(run("estimate" + fixture_args + " --out " + tmp.file("a.json")) == 0);
    REQUIRE(run("estimate" + fixture_args + " --out " + tmp.file("b.json")) == 0);
    REQUIRE(slurp(tmp.file("a.json")) == slurp(tmp.file("b.json")));
  }
}

TEST_CASE("bench subcommand", "[cli]") {
  TempDir tmp;
  SECTION("report shape") {
    REQUIRE(run("bench --n 64 --blocks 4 --reps 3 --ops det,inv --out " + tmp.file("b.csv")) ==
            0);
    const std::string text = slurp(tmp.file("b.csv"));
    REQUIRE(text.rfind("op,n,K,reps,canonical_ms,dense_ms,ratio", 0) == 0);
    REQUIRE(text.find("\ninv,64,4,3,") != std::string::npos);
  }
  SECTION("structured case is faster than dense") {
    REQUIRE(run("bench --n 256 --blocks 4 --reps 3 --ops loglik --out " + tmp.file("l.csv")) ==
            0);
    std::istringstream in(slurp(tmp.file("l.csv")));
    std::string header, row;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, row));
    const double ratio = std::stod(row.substr(row.rfind(',') + 1));
    REQUIRE(ratio > 1.0);
  }
  SECTION("all-singleton partition claims no structural advantage") {
    // n = K: the canonical path degenerates to same-size dense work, so the
    // two sides should stay within an order of magnitude of each other
    REQUIRE(run("bench --n 96 --blocks 96 --reps 7 --out " + tmp.file("nk.csv")) == 0);
    std::istringstream in(slurp(tmp.file("nk.csv")));
    std::string line;
    REQUIRE(std::getline(in, line));  // header
    int rows = 0;
    while (std::getline(in, line)) {
      const double ratio = std::stod(line.substr(line.rfind(',') + 1));
      REQUIRE(ratio > 0.1);
      REQUIRE(ratio < 10.0);
      ++rows;
    }
    REQUIRE(rows == 3);
  }
  SECTION("n below K is rejected") {
    REQUIRE(run("bench --n 3 --blocks 5") == 2);
  }
}
