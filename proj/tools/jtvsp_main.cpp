// jtvsp: command-line front end for the joint time-vertex signal processing
// library. Subcommands build station graphs, estimate joint power densities,
// synthesize stationary realizations, denoise or recover readings, and run
// the full benchmarking protocols from a JSON config.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 solver failure.

#include <jtvsp/jtvsp.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace {

using jtvsp::Index;
using jtvsp::input_error;
using jtvsp::Matrix;
using jtvsp::require;
using jtvsp::Vector;

std::string derive_nodes_path(const std::string& edges_path) {
  const auto dot = edges_path.find_last_of('.');
  const auto slash = edges_path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return edges_path + "_nodes.csv";
  return edges_path.substr(0, dot) + "_nodes" + edges_path.substr(dot);
}

struct GraphBundle {
  jtvsp::Graph graph;
  std::vector<std::string> ids;
  jtvsp::GraphSpectrum spec;
};

GraphBundle load_graph(const std::string& edges_path, std::string nodes_path) {
  if (nodes_path.empty()) nodes_path = derive_nodes_path(edges_path);
  auto loaded = jtvsp::read_graph(edges_path, nodes_path);
  GraphBundle bundle;
  bundle.spec = jtvsp::eigendecompose(jtvsp::combinatorial_laplacian(loaded.graph));
  bundle.graph = std::move(loaded.graph);
  bundle.ids = std::move(loaded.ids);
  return bundle;
}

// Reorder a readings file to the graph's station order; the id sets must match.
Matrix align_readings(const GraphBundle& bundle, const jtvsp::Readings& readings,
                      const std::string& path) {
  require(readings.ids.size() == bundle.ids.size(),
          path + ": station count does not match the graph");
  std::unordered_map<std::string, Index> row_of;
  for (std::size_t r = 0; r < readings.ids.size(); ++r) {
    const bool inserted = row_of.emplace(readings.ids[r], static_cast<Index>(r)).second;
    require(inserted, path + ": duplicate station id '" + readings.ids[r] + "'");
  }
  Matrix aligned(static_cast<Index>(bundle.ids.size()), readings.values.cols());
  for (std::size_t r = 0; r < bundle.ids.size(); ++r) {
    const auto it = row_of.find(bundle.ids[r]);
    require(it != row_of.end(), path + ": no readings for station '" + bundle.ids[r] + "'");
    aligned.row(static_cast<Index>(r)) = readings.values.row(it->second);
  }
  return aligned;
}

// A density file must have been estimated on the same graph: eigenvalues in
// the file and of the loaded Laplacian must agree.
void check_density_matches_graph(const jtvsp::LoadedJpsd& loaded, const GraphBundle& bundle,
                                 const std::string& path) {
  require(loaded.eigenvalues.size() == bundle.spec.eigenvalues.size(),
          path + ": density row count does not match the graph");
  const double scale = std::max(1.0, bundle.spec.eigenvalues.cwiseAbs().maxCoeff());
  require((loaded.eigenvalues - bundle.spec.eigenvalues).cwiseAbs().maxCoeff() <= 1e-6 * scale,
          path + ": eigenvalues do not match the graph (density from a different graph?)");
}

// Largest even band count M <= min(32, T) whose hop M/2 divides T.
Index default_band_count_for(Index t) {
  for (Index m = std::min<Index>(32, t) & ~Index(1); m >= 2; m -= 2)
    if (t % (m / 2) == 0) return m;
  throw input_error("cannot pick a band count for " + std::to_string(t) + " steps");
}

// ---------------------------------------------------------------- graph build

struct GraphBuildArgs {
  std::string coords_path, out_path, nodes_path;
  double radius = 0.0;
  double target_degree = 3.0;
  double scale = -1.0;  // < 0: calibrate to the target degree
};

void run_graph_build(const GraphBuildArgs& args) {
  const auto coords = jtvsp::read_coordinates(args.coords_path);
  double scale = args.scale;
  if (scale < 0.0)
    scale = jtvsp::calibrate_kernel_scale(coords.points, args.radius, args.target_degree);
  const auto graph = jtvsp::build_gaussian_radius_graph(coords.points, args.radius, scale);
  const std::string nodes_path =
      args.nodes_path.empty() ? derive_nodes_path(args.out_path) : args.nodes_path;
  jtvsp::write_graph(args.out_path, nodes_path, graph, coords.ids);
  const Index edges = static_cast<Index>((graph.weights.array() > 0.0).count() / 2);
  std::printf("graph: %lld stations, %lld edges, average degree %.3f, kernel scale %.6g\n",
              static_cast<long long>(graph.n_vertices()), static_cast<long long>(edges),
              jtvsp::average_degree(graph), scale);
  std::printf("wrote %s and %s\n", args.out_path.c_str(), nodes_path.c_str());
}

// ---------------------------------------------------------------- psd estimate

struct PsdEstimateArgs {
  std::string edges_path, nodes_path, data_path, out_path;
  Index bands = 0;  // 0: derived from the record length
  bool keep_mean = false;
};

void run_psd_estimate(const PsdEstimateArgs& args) {
  const auto bundle = load_graph(args.edges_path, args.nodes_path);
  const auto readings = jtvsp::read_readings(args.data_path);
  const Matrix data = align_readings(bundle, readings, args.data_path);
  require(data.allFinite(), args.data_path + ": readings contain missing entries; "
                                             "estimation needs a complete record");
  const Index t = data.cols();
  const Index m = args.bands > 0 ? args.bands : default_band_count_for(t);
  require(m >= 2 && m % 2 == 0, "--bands must be an even number >= 2");
  require(m <= t, "--bands cannot exceed the record length");
  require(t % (m / 2) == 0,
          "record length " + std::to_string(t) + " is not a multiple of the hop " +
              std::to_string(m / 2) + "; pick --bands so that bands/2 divides the length");
  jtvsp::JpsdEstimationOptions opts;
  opts.remove_mean = !args.keep_mean;
  const auto density =
      jtvsp::estimate_jpsd(data, bundle.spec, jtvsp::iterated_sine_window(m), opts);
  jtvsp::write_jpsd(args.out_path, bundle.spec.eigenvalues, density);
  std::printf("estimated %lld x %lld joint density from %lld steps\n",
              static_cast<long long>(density.values.rows()),
              static_cast<long long>(density.values.cols()), static_cast<long long>(t));
  std::printf("wrote %s\n", args.out_path.c_str());
}

// ----------------------------------------------------------------------- synth

struct SynthArgs {
  std::string edges_path, nodes_path, jpsd_path, out_dir;
  int realizations = 1;
  Index steps = 0;  // 0: the density's native band count
  std::uint64_t seed = 0;
  double mean = 0.0;
  std::string noise = "gaussian";
};

jtvsp::NoiseKind parse_noise(const std::string& name) {
  if (name == "gaussian") return jtvsp::NoiseKind::gaussian;
  if (name == "uniform") return jtvsp::NoiseKind::uniform;
  if (name == "rademacher") return jtvsp::NoiseKind::rademacher;
  throw input_error("unknown noise kind '" + name + "'");
}

void run_synth(const SynthArgs& args) {
  const auto bundle = load_graph(args.edges_path, args.nodes_path);
  const auto loaded = jtvsp::read_jpsd(args.jpsd_path);
  check_density_matches_graph(loaded, bundle, args.jpsd_path);
  const Index t = args.steps > 0 ? args.steps : loaded.jpsd.n_bands();
  jtvsp::JointBasis jb{bundle.spec, jtvsp::TimeBasis(t)};
  jtvsp::JwssModel model{args.mean, jtvsp::upsample_to_grid(loaded.jpsd, t)};
  const auto xs = jtvsp::synthesize_jwss(jb, model, args.realizations, args.seed,
                                         parse_noise(args.noise));
  std::filesystem::create_directories(args.out_dir);
  for (std::size_t r = 0; r < xs.size(); ++r) {
    char name[64];
    std::snprintf(name, sizeof(name), "realization_%03zu.csv", r);
    jtvsp::write_readings(args.out_dir + "/" + name, bundle.ids, xs[r]);
  }
  std::printf("wrote %zu realizations of %lld x %lld to %s\n", xs.size(),
              static_cast<long long>(jb.n_vertices()), static_cast<long long>(t),
              args.out_dir.c_str());
}

// --------------------------------------------------------------------- denoise

struct DenoiseArgs {
  std::string edges_path, nodes_path, data_path, jpsd_path, out_path;
  double sigma = -1.0;
};

void run_denoise(const DenoiseArgs& args) {
  require(args.sigma >= 0.0, "--sigma must be nonnegative");
  const auto bundle = load_graph(args.edges_path, args.nodes_path);
  const auto readings = jtvsp::read_readings(args.data_path);
  const Matrix data = align_readings(bundle, readings, args.data_path);
  require(data.allFinite(),
          args.data_path + ": readings contain missing entries; use `recover` instead");
  const auto loaded = jtvsp::read_jpsd(args.jpsd_path);
  check_density_matches_graph(loaded, bundle, args.jpsd_path);

  Matrix cleaned;
  if (args.sigma == 0.0) {
    cleaned = data;  // no noise: the optimum is the observation itself
  } else {
    const Index t = data.cols();
    jtvsp::JointBasis jb{bundle.spec, jtvsp::TimeBasis(t)};
    const Matrix h = jtvsp::upsample_to_grid(loaded.jpsd, t);
    const double mean = data.mean();
    const Matrix centred = (data.array() - mean).matrix();
    const Matrix ones = Matrix::Ones(data.rows(), t);
    const Matrix noise = jtvsp::white_noise_density(data.rows(), t, args.sigma);
    cleaned = jtvsp::joint_wiener_closed_form(jb, ones, h, noise, centred);
    cleaned.array() += mean;
  }
  jtvsp::write_readings(args.out_path, bundle.ids, cleaned);
  std::printf("denoised %lld x %lld readings at sigma %.6g\n",
              static_cast<long long>(data.rows()), static_cast<long long>(data.cols()),
              args.sigma);
  std::printf("wrote %s\n", args.out_path.c_str());
}

// --------------------------------------------------------------------- recover

struct RecoverArgs {
  std::string edges_path, nodes_path, data_path, jpsd_path, out_path;
  double tol = 1e-8;
  int max_iters = 2000;
};

void run_recover(const RecoverArgs& args) {
  const auto bundle = load_graph(args.edges_path, args.nodes_path);
  const auto readings = jtvsp::read_readings(args.data_path);
  const Matrix data = align_readings(bundle, readings, args.data_path);
  const auto loaded = jtvsp::read_jpsd(args.jpsd_path);
  check_density_matches_graph(loaded, bundle, args.jpsd_path);

  const Index n = data.rows();
  const Index t = data.cols();
  jtvsp::BoolMatrix observed(n, t);
  Index n_observed = 0;
  double sum = 0.0;
  for (Index c = 0; c < t; ++c) {
    for (Index r = 0; r < n; ++r) {
      observed(r, c) = std::isfinite(data(r, c));
      if (observed(r, c)) {
        ++n_observed;
        sum += data(r, c);
      }
    }
  }
  require(n_observed > 0, args.data_path + ": no observed entries to recover from");
  const double mean = sum / static_cast<double>(n_observed);

  Matrix centred = data;
  for (Index c = 0; c < t; ++c)
    for (Index r = 0; r < n; ++r) centred(r, c) = observed(r, c) ? data(r, c) - mean : 0.0;

  jtvsp::JointBasis jb{bundle.spec, jtvsp::TimeBasis(t)};
  const Matrix h = jtvsp::upsample_to_grid(loaded.jpsd, t);
  const auto op = jtvsp::mask_operator(observed);
  jtvsp::SolverOptions opts;
  opts.tol = args.tol;
  opts.max_iters = args.max_iters;
  const auto report =
      jtvsp::wiener_solve_noiseless(jb, op, op.forward(jtvsp::vec(centred)), h, opts);
  if (!report.converged)
    throw jtvsp::convergence_error("recovery solver did not converge (residual " +
                                   jtvsp::csv::format_number(report.residual) + " after " +
                                   std::to_string(report.iterations) + " iterations)");
  Matrix filled = report.solution;
  filled.array() += mean;
  jtvsp::write_readings(args.out_path, bundle.ids, filled);
  std::printf("recovered %lld missing of %lld entries in %d iterations (residual %.3g)\n",
              static_cast<long long>(n * t - n_observed), static_cast<long long>(n * t),
              report.iterations, report.residual);
  std::printf("wrote %s\n", args.out_path.c_str());
}

// ------------------------------------------------------------------ experiment

struct ExperimentArgs {
  std::string config_path;
  std::string out_override;
};

struct ExperimentFiles {
  std::string coords, readings, out;
  jtvsp::ExperimentConfig config;
};

ExperimentFiles parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(path + ": invalid JSON: " + e.what());
  }
  const std::set<std::string> known = {
      "coords",  "readings",      "out",           "rho",        "snr_grid_db",
      "mask_fraction_grid", "n_trials", "seed",    "bands",      "radius",
      "target_degree", "solver",   "snr_cap_db"};
  for (const auto& item : j.items())
    require(known.count(item.key()) > 0, path + ": unknown config key '" + item.key() + "'");

  ExperimentFiles files;
  try {
    require(j.contains("coords") && j.contains("readings") && j.contains("out") &&
                j.contains("radius"),
            path + ": config requires coords, readings, out and radius");
    files.coords = j.at("coords").get<std::string>();
    files.readings = j.at("readings").get<std::string>();
    files.out = j.at("out").get<std::string>();
    auto& cfg = files.config;
    cfg.graph_radius = j.at("radius").get<double>();
    if (j.contains("rho")) cfg.rho = j.at("rho").get<double>();
    if (j.contains("snr_grid_db")) cfg.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
    if (j.contains("mask_fraction_grid"))
      cfg.mask_fraction_grid = j.at("mask_fraction_grid").get<std::vector<double>>();
    if (j.contains("n_trials")) cfg.n_trials = j.at("n_trials").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("bands")) cfg.bands = j.at("bands").get<Index>();
    if (j.contains("target_degree")) cfg.target_degree = j.at("target_degree").get<double>();
    if (j.contains("snr_cap_db")) cfg.snr_cap_db = j.at("snr_cap_db").get<double>();
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      const std::set<std::string> solver_keys = {"tol", "max_iters", "f_max"};
      for (const auto& item : s.items())
        require(solver_keys.count(item.key()) > 0,
                path + ": unknown solver key '" + item.key() + "'");
      if (s.contains("tol")) cfg.solver.tol = s.at("tol").get<double>();
      if (s.contains("max_iters")) cfg.solver.max_iters = s.at("max_iters").get<int>();
      if (s.contains("f_max")) cfg.solver.f_max = s.at("f_max").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw input_error(path + ": bad config value: " + e.what());
  }
  return files;
}

void print_summary(const jtvsp::ResultsTable& table) {
  for (const auto& s : jtvsp::summarize(table))
    std::printf("  %-7s parameter=%-8g %-16s mean=%-10.4g std=%-10.4g n=%d\n", s.method.c_str(),
                s.parameter, s.metric.c_str(), s.mean, s.stddev, s.count);
}

void run_experiment(const ExperimentArgs& args, bool denoising) {
  auto files = parse_experiment_config(args.config_path);
  if (!args.out_override.empty()) files.out = args.out_override;
  const auto ingested = jtvsp::ingest(files.coords, files.readings);
  for (const auto& msg : ingested.dropped) std::printf("dropped station %s\n", msg.c_str());
  std::printf("dataset: %lld stations, %lld steps (mean %.6g removed)\n",
              static_cast<long long>(ingested.dataset.n_stations()),
              static_cast<long long>(ingested.dataset.n_steps()), ingested.dataset.global_mean);
  const auto table = denoising ? jtvsp::run_denoising(ingested.dataset, files.config)
                               : jtvsp::run_recovery(ingested.dataset, files.config);
  jtvsp::write_results(files.out, table);
  std::printf("wrote %s\n", files.out.c_str());
  print_summary(table);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint time-vertex stationary signal processing toolkit"};
  app.require_subcommand(1);

  // graph build
  auto* graph = app.add_subcommand("graph", "station graph utilities");
  graph->require_subcommand(1);
  GraphBuildArgs graph_args;
  auto* build = graph->add_subcommand("build", "build a Gaussian-kernel radius graph");
  build->add_option("--coords", graph_args.coords_path, "station coordinates CSV (id,x,y[,z])")
      ->required();
  build->add_option("--radius", graph_args.radius, "neighbourhood radius")->required();
  build->add_option("--target-degree", graph_args.target_degree,
                    "calibrate the kernel scale to this average degree");
  build->add_option("--scale", graph_args.scale, "fix the kernel scale (skips calibration)");
  build->add_option("--out", graph_args.out_path, "output edges CSV")->required();
  build->add_option("--nodes", graph_args.nodes_path,
                    "output nodes CSV (default: <out>_nodes.csv)");
  build->callback([&] { run_graph_build(graph_args); });

  // psd estimate
  auto* psd = app.add_subcommand("psd", "power density utilities");
  psd->require_subcommand(1);
  PsdEstimateArgs psd_args;
  auto* estimate = psd->add_subcommand("estimate", "estimate the joint density from readings");
  estimate->add_option("--edges", psd_args.edges_path, "graph edges CSV")->required();
  estimate->add_option("--nodes", psd_args.nodes_path, "graph nodes CSV (default derived)");
  estimate->add_option("--data", psd_args.data_path, "readings CSV")->required();
  estimate->add_option("--bands", psd_args.bands, "number of frequency bands (even)");
  estimate->add_flag("--keep-mean", psd_args.keep_mean,
                     "fail if the readings are not already centred instead of centring them");
  estimate->add_option("--out", psd_args.out_path, "output density CSV")->required();
  estimate->callback([&] { run_psd_estimate(psd_args); });

  // synth
  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "synthesize stationary realizations");
  synth->add_option("--edges", synth_args.edges_path, "graph edges CSV")->required();
  synth->add_option("--nodes", synth_args.nodes_path, "graph nodes CSV (default derived)");
  synth->add_option("--jpsd", synth_args.jpsd_path, "joint density CSV")->required();
  synth->add_option("--realizations", synth_args.realizations, "number of realizations");
  synth->add_option("--steps", synth_args.steps, "time steps (default: the density's bands)");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("--mean", synth_args.mean, "constant mean coefficient");
  synth->add_option("--noise", synth_args.noise, "noise kind: gaussian|uniform|rademacher");
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth->callback([&] { run_synth(synth_args); });

  // denoise
  DenoiseArgs denoise_args;
  auto* denoise = app.add_subcommand("denoise", "remove additive white noise from readings");
  denoise->add_option("--edges", denoise_args.edges_path, "graph edges CSV")->required();
  denoise->add_option("--nodes", denoise_args.nodes_path, "graph nodes CSV (default derived)");
  denoise->add_option("--data", denoise_args.data_path, "noisy readings CSV")->required();
  denoise->add_option("--jpsd", denoise_args.jpsd_path, "joint density CSV")->required();
  denoise->add_option("--sigma", denoise_args.sigma, "noise standard deviation")->required();
  denoise->add_option("--out", denoise_args.out_path, "output readings CSV")->required();
  denoise->callback([&] { run_denoise(denoise_args); });

  // recover
  RecoverArgs recover_args;
  auto* recover = app.add_subcommand("recover", "fill missing readings (empty CSV cells)");
  recover->add_option("--edges", recover_args.edges_path, "graph edges CSV")->required();
  recover->add_option("--nodes", recover_args.nodes_path, "graph nodes CSV (default derived)");
  recover->add_option("--data", recover_args.data_path, "readings CSV with gaps")->required();
  recover->add_option("--jpsd", recover_args.jpsd_path, "joint density CSV")->required();
  recover->add_option("--tol", recover_args.tol, "solver tolerance");
  recover->add_option("--max-iters", recover_args.max_iters, "solver iteration budget");
  recover->add_option("--out", recover_args.out_path, "output readings CSV")->required();
  recover->callback([&] { run_recover(recover_args); });

  // experiment denoising|recovery
  auto* experiment = app.add_subcommand("experiment", "run a benchmarking protocol");
  experiment->require_subcommand(1);
  ExperimentArgs exp_args;
  auto* exp_denoising = experiment->add_subcommand("denoising", "additive-noise protocol");
  exp_denoising->add_option("--config", exp_args.config_path, "JSON config")->required();
  exp_denoising->add_option("--out", exp_args.out_override, "override the output CSV");
  exp_denoising->callback([&] { run_experiment(exp_args, /*denoising=*/true); });
  auto* exp_recovery = experiment->add_subcommand("recovery", "missing-data protocol");
  exp_recovery->add_option("--config", exp_args.config_path, "JSON config")->required();
  exp_recovery->add_option("--out", exp_args.out_override, "override the output CSV");
  exp_recovery->callback([&] { run_experiment(exp_args, /*denoising=*/false); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const jtvsp::convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
