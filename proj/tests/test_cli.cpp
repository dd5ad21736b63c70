// End-to-end tests driving the installed command-line binary. The path to the
// binary arrives as argv[1] so the test can run against any build tree.

#include "testutil.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

// Tests in this suite run in declaration order: the pipeline test creates the
// fixture files (graph, density, noisy and gappy readings) the later exit-code
// and experiment tests reuse.

using namespace jtvsp;

namespace {

std::string g_cli;
std::filesystem::path g_dir;

std::string path(const std::string& name) { return (g_dir / name).string(); }

int run(const std::string& args) {
  const std::string cmd =
      g_cli + " " + args + " > " + path("stdout.txt") + " 2> " + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text(const std::string& name, const std::string& text) {
  std::ofstream out(path(name));
  out << text;
}

double output_snr(const Matrix& ref, const Matrix& est) {
  return 10.0 * std::log10(ref.squaredNorm() / (est - ref).squaredNorm());
}

}  // namespace

TEST(Cli, HelpAndParseErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);                       // a subcommand is required
  EXPECT_EQ(run("no_such_command"), 2);
  EXPECT_EQ(run("graph build --radius 1"), 2);  // missing required options
  EXPECT_EQ(run("denoise --bogus-flag 1"), 2);
}

TEST(Cli, PipelineEndToEnd) {
  const Index n = 12, t = 64;

  // stations on file
  const Matrix coords = testutil::random_coords(n, 3);
  std::vector<std::string> ids;
  for (Index i = 0; i < n; ++i) ids.push_back("st" + std::to_string(i));
  write_coordinates(path("coords.csv"), ids, coords);

  // build the station graph
  ASSERT_EQ(run("graph build --coords " + path("coords.csv") + " --radius 10 " +
                "--target-degree 3 --out " + path("edges.csv")),
            0)
      << slurp(path("stderr.txt"));
  ASSERT_TRUE(std::filesystem::exists(path("edges.csv")));
  ASSERT_TRUE(std::filesystem::exists(path("edges_nodes.csv")));
  const LoadedGraph lg = read_graph(path("edges.csv"), path("edges_nodes.csv"));
  const double degree = average_degree(lg.graph);
  EXPECT_GE(degree, 2.5);
  EXPECT_LE(degree, 3.5);

  // a ground-truth density on that graph, written for synth
  const GraphSpectrum spec = eigendecompose(combinatorial_laplacian(lg.graph));
  Jpsd truth;
  truth.values.resize(n, 16);
  for (Index i = 0; i < n; ++i)
    for (Index m = 0; m < 16; ++m)
      truth.values(i, m) =
          0.2 + 1.5 / (1.0 + spec.eigenvalues(i) +
                       2.0 * (1.0 - std::cos(2.0 * M_PI * double(m) / 16.0)));
  write_jpsd(path("truth.csv"), spec.eigenvalues, truth);

  // synthesize one realization
  ASSERT_EQ(run("synth --edges " + path("edges.csv") + " --jpsd " + path("truth.csv") +
                " --steps 64 --realizations 1 --seed 5 --out " + path("synth")),
            0)
      << slurp(path("stderr.txt"));
  const Readings clean = read_readings(path("synth/realization_000.csv"));
  ASSERT_EQ(clean.values.rows(), n);
  ASSERT_EQ(clean.values.cols(), t);
  ASSERT_TRUE(clean.values.allFinite());

  // estimate a density back from the realization
  ASSERT_EQ(run("psd estimate --edges " + path("edges.csv") + " --data " +
                path("synth/realization_000.csv") + " --bands 16 --out " + path("est.csv")),
            0)
      << slurp(path("stderr.txt"));
  const LoadedJpsd est = read_jpsd(path("est.csv"));
  EXPECT_EQ(est.jpsd.values.rows(), n);
  EXPECT_EQ(est.jpsd.values.cols(), 16);
  EXPECT_GE(est.jpsd.values.minCoeff(), 0.0);

  // denoise a corrupted copy using the estimated density
  RandomStream rng(7, 0);
  const double sigma = 0.6;
  Matrix noisy = clean.values;
  for (Index c = 0; c < t; ++c)
    for (Index r = 0; r < n; ++r) noisy(r, c) += sigma * rng.gaussian();
  write_readings(path("noisy.csv"), clean.ids, noisy);
  ASSERT_EQ(run("denoise --edges " + path("edges.csv") + " --data " + path("noisy.csv") +
                " --jpsd " + path("est.csv") + " --sigma 0.6 --out " + path("denoised.csv")),
            0)
      << slurp(path("stderr.txt"));
  const Readings denoised = read_readings(path("denoised.csv"));
  EXPECT_GT(output_snr(clean.values, denoised.values), output_snr(clean.values, noisy) + 1.0);

  // punch holes and recover them
  RandomStream mask_rng(11, 0);
  Matrix gappy = clean.values;
  int n_missing = 0;
  for (Index c = 0; c < t; ++c) {
    for (Index r = 0; r < n; ++r) {
      if (mask_rng.uniform01() < 0.25) {
        gappy(r, c) = std::numeric_limits<double>::quiet_NaN();
        ++n_missing;
      }
    }
  }
  ASSERT_GT(n_missing, 0);
  write_readings(path("gappy.csv"), clean.ids, gappy);
  ASSERT_EQ(run("recover --edges " + path("edges.csv") + " --data " + path("gappy.csv") +
                " --jpsd " + path("est.csv") + " --out " + path("recovered.csv")),
            0)
      << slurp(path("stderr.txt"));
  const Readings recovered = read_readings(path("recovered.csv"));
  ASSERT_TRUE(recovered.values.allFinite());
  // observed entries are reproduced, gaps get plausible values
  double max_observed_err = 0.0;
  for (Index c = 0; c < t; ++c)
    for (Index r = 0; r < n; ++r)
      if (std::isfinite(gappy(r, c)))
        max_observed_err =
            std::max(max_observed_err, std::abs(recovered.values(r, c) - clean.values(r, c)));
  EXPECT_LT(max_observed_err, 1e-4);
  EXPECT_LT((recovered.values - clean.values).norm() / clean.values.norm(), 0.8);

  // byte-identical rerun: same inputs, same outputs
  ASSERT_EQ(run("denoise --edges " + path("edges.csv") + " --data " + path("noisy.csv") +
                " --jpsd " + path("est.csv") + " --sigma 0.6 --out " + path("denoised2.csv")),
            0);
  EXPECT_EQ(slurp(path("denoised.csv")), slurp(path("denoised2.csv")));
}

TEST(Cli, InputAndSolverFailuresUseDistinctExitCodes) {
  // missing input file
  EXPECT_EQ(run("psd estimate --edges " + path("nope.csv") + " --data " + path("nope2.csv") +
                " --out " + path("x.csv")),
            2);
  // band count whose hop does not divide the record length
  EXPECT_EQ(run("psd estimate --edges " + path("edges.csv") + " --data " +
                path("synth/realization_000.csv") + " --bands 10 --out " + path("x.csv")),
            2);
  const std::string err = slurp(path("stderr.txt"));
  EXPECT_NE(err.find("hop"), std::string::npos) << err;

  // a density from a different graph is rejected
  LoadedJpsd est = read_jpsd(path("est.csv"));
  Vector shifted = est.eigenvalues;
  shifted.array() += 0.5;
  write_jpsd(path("mismatched.csv"), shifted, est.jpsd);
  EXPECT_EQ(run("denoise --edges " + path("edges.csv") + " --data " + path("noisy.csv") +
                " --jpsd " + path("mismatched.csv") + " --sigma 0.5 --out " + path("x.csv")),
            2);

  // solver starved of iterations reports a convergence failure
  EXPECT_EQ(run("recover --edges " + path("edges.csv") + " --data " + path("gappy.csv") +
                " --jpsd " + path("est.csv") + " --max-iters 0 --tol 1e-12 --out " +
                path("x.csv")),
            3);
}

TEST(Cli, ExperimentProtocolsRunDeterministically) {
  write_text("exp.json", std::string("{\n") +
                             "  \"coords\": \"" + path("coords.csv") + "\",\n" +
                             "  \"readings\": \"" + path("synth/realization_000.csv") + "\",\n" +
                             "  \"out\": \"" + path("results.csv") + "\",\n" +
                             "  \"rho\": 0.5,\n" +
                             "  \"radius\": 10,\n" +
                             "  \"bands\": 8,\n" +
                             "  \"snr_grid_db\": [0],\n" +
                             "  \"mask_fraction_grid\": [0.3],\n" +
                             "  \"n_trials\": 2,\n" +
                             "  \"seed\": 1\n" +
                             "}\n");
  ASSERT_EQ(run("experiment denoising --config " + path("exp.json")), 0)
      << slurp(path("stderr.txt"));
  const std::string first = slurp(path("results.csv"));
  EXPECT_NE(first.find("output_snr_db"), std::string::npos);
  ASSERT_EQ(run("experiment denoising --config " + path("exp.json")), 0);
  EXPECT_EQ(slurp(path("results.csv")), first);

  ASSERT_EQ(run("experiment recovery --config " + path("exp.json") + " --out " +
                path("recovery_results.csv")),
            0)
      << slurp(path("stderr.txt"));
  const std::string rec = slurp(path("recovery_results.csv"));
  EXPECT_NE(rec.find("relative_error"), std::string::npos);
  EXPECT_NE(rec.find("n_infeasible"), std::string::npos);

  // unknown keys are configuration errors, not silently ignored
  write_text("bad.json", "{\"coords\": \"a\", \"readings\": \"b\", \"out\": \"c\", "
                         "\"radius\": 1, \"typo_key\": 3}\n");
  EXPECT_EQ(run("experiment denoising --config " + path("bad.json")), 2);
  const std::string err = slurp(path("stderr.txt"));
  EXPECT_NE(err.find("typo_key"), std::string::npos) << err;
}

int main_impl(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-cli-binary>\n");
    return 1;
  }
  g_cli = argv[1];
  g_dir = std::filesystem::temp_directory_path() / "jtvsp_cli_test";
  std::filesystem::remove_all(g_dir);
  std::filesystem::create_directories(g_dir);
  const int rc = RUN_ALL_TESTS();
  std::filesystem::remove_all(g_dir);
  return rc;
}

int main(int argc, char** argv) { return main_impl(argc, argv); }
