#pragma once

#include "jtvsp/graph.hpp"
#include "jtvsp/io.hpp"
#include "jtvsp/psd_estimation.hpp"
#include "jtvsp/random.hpp"
#include "jtvsp/stationarity.hpp"
#include "jtvsp/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace jtvsp {

// A station dataset ready for experiments: aligned ids, coordinates and
// centred readings (the removed global mean is kept for reporting).
struct Dataset {
  std::vector<std::string> station_ids;
  Matrix coords;
  Matrix readings;
  double global_mean = 0.0;

  Index n_stations() const { return readings.rows(); }
  Index n_steps() const { return readings.cols(); }
};

struct IngestReport {
  Dataset dataset;
  std::vector<std::string> dropped;  // "<id>: <reason>" per rejected station
};

// Assemble a dataset from parallel arrays, dropping stations with missing or
// non-finite readings and centring the survivors.
inline IngestReport build_dataset(std::vector<std::string> ids, Matrix coords, Matrix readings) {
  const auto n = static_cast<Index>(ids.size());
  require(coords.rows() == n && readings.rows() == n,
          "build_dataset: ids, coordinates and readings must have matching rows");
  require(coords.size() == 0 || coords.allFinite(), "build_dataset: coordinates must be finite");
  require(readings.cols() >= 1, "build_dataset: readings need at least one step");

  IngestReport report;
  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i) {
    Index bad = -1;
    for (Index t = 0; t < readings.cols(); ++t) {
      if (!std::isfinite(readings(i, t))) {
        bad = t;
        break;
      }
    }
    if (bad >= 0)
      report.dropped.push_back(ids[static_cast<std::size_t>(i)] + ": missing reading at step " +
                               std::to_string(bad));
    else
      keep.push_back(i);
  }
  require(keep.size() >= 2, "build_dataset: fewer than two usable stations");

  Dataset& ds = report.dataset;
  ds.coords.resize(static_cast<Index>(keep.size()), coords.cols());
  ds.readings.resize(static_cast<Index>(keep.size()), readings.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    ds.station_ids.push_back(ids[static_cast<std::size_t>(keep[k])]);
    ds.coords.row(static_cast<Index>(k)) = coords.row(keep[k]);
    ds.readings.row(static_cast<Index>(k)) = readings.row(keep[k]);
  }
  ds.global_mean = ds.readings.mean();
  ds.readings.array() -= ds.global_mean;
  return report;
}

// Load a coordinates file and a readings file, matching rows by station id.
inline IngestReport ingest(const std::string& coords_path, const std::string& readings_path) {
  const Coordinates coords = read_coordinates(coords_path);
  const Readings readings = read_readings(readings_path);
  require(coords.ids.size() == readings.ids.size(),
          "ingest: station ids misaligned between coordinate and readings files");
  std::unordered_map<std::string, Index> row_of;
  for (std::size_t r = 0; r < readings.ids.size(); ++r) {
    const auto inserted = row_of.emplace(readings.ids[r], static_cast<Index>(r)).second;
    require(inserted, "ingest: duplicate station id '" + readings.ids[r] + "' in readings");
  }
  Matrix aligned(coords.points.rows(), readings.values.cols());
  for (std::size_t r = 0; r < coords.ids.size(); ++r) {
    const auto it = row_of.find(coords.ids[r]);
    require(it != row_of.end(),
            "ingest: station ids misaligned; '" + coords.ids[r] + "' has no readings");
    aligned.row(static_cast<Index>(r)) = readings.values.row(it->second);
  }
  return build_dataset(coords.ids, coords.points, std::move(aligned));
}

struct Split {
  Matrix train;
  Matrix test;
};

// Contiguous-in-time split: the first floor(rho*T) steps train, the rest test.
// rho == 1 trains and tests on the full record.
inline Split split(const Dataset& ds, double rho, Index min_train = 1) {
  require(std::isfinite(rho) && rho > 0.0 && rho <= 1.0, "split: rho must lie in (0, 1]");
  const Index t = ds.readings.cols();
  if (rho == 1.0) return {ds.readings, ds.readings};
  Index t_train = static_cast<Index>(std::floor(rho * static_cast<double>(t)));
  t_train = std::min(t_train, t - 1);
  require(t_train >= min_train, "split: training block shorter than the analysis window");
  return {ds.readings.leftCols(t_train), ds.readings.rightCols(t - t_train)};
}

struct ExperimentConfig {
  double rho = 0.5;
  std::vector<double> snr_grid_db = {-10, -5, 0, 5, 10, 15, 20, 25, 30};  // denoising
  std::vector<double> mask_fraction_grid = {0.1, 0.2, 0.3, 0.4, 0.5,
                                            0.6, 0.7, 0.8, 0.9};          // recovery
  int n_trials = 20;
  std::uint64_t seed = 0;
  Index bands = 0;             // 0: min(32, training length), rounded down to even
  double graph_radius = 0.0;   // must be set: neighbourhood radius for the station graph
  double target_degree = 3.0;  // kernel scale calibrated to this average degree
  SolverOptions solver;
  double snr_cap_db = 300.0;
};

struct ResultRow {
  std::string method;
  double parameter = 0.0;  // input SNR (dB) or mask fraction
  int trial = 0;           // -1 for per-grid-point bookkeeping rows
  std::string metric;
  double value = 0.0;
};

using ResultsTable = std::vector<ResultRow>;

struct ResultSummary {
  std::string method;
  double parameter = 0.0;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

inline std::vector<ResultSummary> summarize(const ResultsTable& table) {
  std::vector<ResultSummary> out;
  const auto find = [&](const ResultRow& row) -> ResultSummary* {
    for (auto& s : out)
      if (s.method == row.method && s.parameter == row.parameter && s.metric == row.metric)
        return &s;
    return nullptr;
  };
  // two passes: accumulate means, then spreads
  for (const auto& row : table) {
    ResultSummary* s = find(row);
    if (!s) {
      out.push_back({row.method, row.parameter, row.metric, 0.0, 0.0, 0});
      s = &out.back();
    }
    s->mean += row.value;
    s->count += 1;
  }
  for (auto& s : out) s.mean /= static_cast<double>(s.count);
  for (const auto& row : table) {
    ResultSummary* s = find(row);
    const double d = row.value - s->mean;
    s->stddev += d * d;
  }
  for (auto& s : out)
    s.stddev = s.count > 1 ? std::sqrt(s.stddev / static_cast<double>(s.count - 1)) : 0.0;
  return out;
}

// 10 log10(|ref|^2 / |est - ref|^2), capped so exact recovery stays finite.
inline double snr_db(const Matrix& reference, const Matrix& estimate, double cap_db = 300.0) {
  require(reference.rows() == estimate.rows() && reference.cols() == estimate.cols(),
          "snr_db: shape mismatch");
  const double ref = reference.squaredNorm();
  require(ref > 0.0, "snr_db: reference signal is identically zero");
  const double err = (estimate - reference).squaredNorm();
  if (err == 0.0) return cap_db;
  return std::min(cap_db, 10.0 * std::log10(ref / err));
}

namespace detail {

inline GraphSpectrum single_vertex_spectrum() {
  GraphSpectrum spec;
  spec.eigenvectors = Matrix::Ones(1, 1);
  spec.eigenvalues = Vector::Zero(1);
  return spec;
}

inline Index default_band_count(Index t_train) {
  Index m = std::min<Index>(32, t_train);
  if (m % 2 != 0) --m;
  require(m >= 2, "training block too short for a spectral window");
  return m;
}

// Everything the per-trial loops need, estimated once from the training block.
struct ExperimentSetup {
  GraphSpectrum spec;
  JointBasis jb;       // graph x test-block time axis
  JointBasis jb_row;   // single vertex x test-block time axis (per-row baseline)
  JointBasis jb_col;   // graph x single step (per-column baseline)
  Matrix test;         // held-out block
  Matrix h_joint;      // joint density on the test grid
  Matrix h_time;       // per-vertex temporal densities on the test grid
  Vector h_vertex;     // vertex density shared by all steps
  double signal_power = 0.0;
};

inline ExperimentSetup prepare_experiment(const Dataset& ds, const ExperimentConfig& cfg) {
  require(std::isfinite(cfg.graph_radius) && cfg.graph_radius > 0.0,
          "experiment config: graph_radius must be positive");
  require(cfg.n_trials >= 1, "experiment config: need at least one trial");

  ExperimentSetup s;
  const double scale = calibrate_kernel_scale(ds.coords, cfg.graph_radius, cfg.target_degree);
  const Graph graph = build_gaussian_radius_graph(ds.coords, cfg.graph_radius, scale);
  s.spec = eigendecompose(combinatorial_laplacian(graph));

  const Index t = ds.n_steps();
  Index t_train = cfg.rho == 1.0 ? t : static_cast<Index>(std::floor(cfg.rho * double(t)));
  const Index m = cfg.bands > 0 ? cfg.bands : default_band_count(t_train);
  require(m % 2 == 0 && m >= 2, "experiment config: bands must be even and at least 2");
  const Window window = iterated_sine_window(m);
  const Split blocks = split(ds, cfg.rho, m);
  s.test = blocks.test;
  const Index t_test = s.test.cols();

  s.jb = JointBasis{s.spec, TimeBasis(t_test)};
  s.jb_row = JointBasis{single_vertex_spectrum(), TimeBasis(t_test)};
  s.jb_col = JointBasis{s.spec, TimeBasis(1)};

  try {
    s.h_joint = upsample_to_grid(estimate_jpsd(blocks.train, s.spec, window), t_test);
  } catch (const std::exception& e) {
    throw input_error(std::string("joint density estimation failed: ") + e.what());
  }
  try {
    s.h_time = upsample_to_grid(welch_tpsd(blocks.train, window), t_test);
  } catch (const std::exception& e) {
    throw input_error(std::string("per-vertex density estimation failed: ") + e.what());
  }
  try {
    const Matrix rotated = s.spec.eigenvectors.transpose() * blocks.train;
    s.h_vertex = rotated.cwiseAbs2().rowwise().mean();
  } catch (const std::exception& e) {
    throw input_error(std::string("vertex density estimation failed: ") + e.what());
  }

  s.signal_power = s.test.squaredNorm() / static_cast<double>(s.test.size());
  require(s.signal_power > 0.0, "test block is identically zero");
  return s;
}

// Closed-form denoising with a per-vertex temporal density: each row is an
// independent time-domain Wiener filter.
inline Matrix denoise_rows(const ExperimentSetup& s, const Matrix& y, double sigma_sq) {
  Matrix out(y.rows(), y.cols());
  const Matrix noise = Matrix::Constant(1, y.cols(), sigma_sq);
  for (Index i = 0; i < y.rows(); ++i) {
    const Matrix h = s.h_time.row(i);
    const Matrix cleaned =
        joint_wiener_closed_form(s.jb_row, Matrix::Ones(1, y.cols()), h, noise, y.row(i));
    out.row(i) = cleaned;
  }
  return out;
}

// Closed-form denoising with the shared vertex density: each column is an
// independent graph-domain Wiener filter.
inline Matrix denoise_columns(const ExperimentSetup& s, const Matrix& y, double sigma_sq) {
  const Vector shrink =
      (s.h_vertex.array() / (s.h_vertex.array() + sigma_sq)).matrix();
  const Matrix& u = s.spec.eigenvectors;
  return u * shrink.asDiagonal() * (u.transpose() * y);
}

// Noise-free interpolation with an empty-mask fallback: with no observations
// the minimum-energy reconstruction is identically zero (the centred mean).
inline bool noiseless_fill(const JointBasis& jb, const BoolMatrix& observed, const Matrix& truth,
                           const Matrix& h, const SolverOptions& opts, Matrix* out) {
  if (!observed.any()) {
    *out = Matrix::Zero(truth.rows(), truth.cols());
    return true;
  }
  const LinearOperator op = mask_operator(observed);
  const Vector y = op.forward(vec(truth));
  const SolveReport report = wiener_solve_noiseless(jb, op, y, h, opts);
  if (!report.converged) return false;
  *out = report.solution;
  return true;
}

}  // namespace detail

// Additive-noise protocol: corrupt the held-out block at each input SNR and
// denoise it with the joint density, the per-vertex temporal densities, and
// the shared vertex density, all estimated on the training block.
inline ResultsTable run_denoising(const Dataset& ds, const ExperimentConfig& cfg) {
  require(!cfg.snr_grid_db.empty(), "run_denoising: empty SNR grid");
  for (const double snr : cfg.snr_grid_db)
    require(std::isfinite(snr), "run_denoising: SNR grid must be finite");
  const detail::ExperimentSetup s = detail::prepare_experiment(ds, cfg);
  const Index n = s.test.rows();
  const Index t_test = s.test.cols();
  const Matrix ones = Matrix::Ones(n, t_test);

  ResultsTable table;
  for (std::size_t gi = 0; gi < cfg.snr_grid_db.size(); ++gi) {
    const double snr_in = cfg.snr_grid_db[gi];
    const double sigma = std::sqrt(s.signal_power * std::pow(10.0, -snr_in / 10.0));
    for (int trial = 0; trial < cfg.n_trials; ++trial) {
      RandomStream rng(derive_seed(cfg.seed, gi, static_cast<std::uint64_t>(trial)));
      const Matrix y =
          s.test + sigma * white_noise_matrix(rng, n, t_test, NoiseKind::gaussian);
      Matrix x_joint, x_time, x_vertex;
      if (sigma == 0.0) {
        x_joint = x_time = x_vertex = y;
      } else {
        const Matrix noise = Matrix::Constant(n, t_test, sigma * sigma);
        x_joint = joint_wiener_closed_form(s.jb, ones, s.h_joint, noise, y);
        x_time = detail::denoise_rows(s, y, sigma * sigma);
        x_vertex = detail::denoise_columns(s, y, sigma * sigma);
      }
      table.push_back({"joint", snr_in, trial, "output_snr_db",
                       snr_db(s.test, x_joint, cfg.snr_cap_db)});
      table.push_back({"time", snr_in, trial, "output_snr_db",
                       snr_db(s.test, x_time, cfg.snr_cap_db)});
      table.push_back({"vertex", snr_in, trial, "output_snr_db",
                       snr_db(s.test, x_vertex, cfg.snr_cap_db)});
    }
  }
  return table;
}

// Missing-data protocol: mask the held-out block at each missing fraction and
// interpolate the gaps noiselessly with the three densities. Trials whose
// solver fails are excluded from the metric rows and tallied per grid point.
inline ResultsTable run_recovery(const Dataset& ds, const ExperimentConfig& cfg) {
  require(!cfg.mask_fraction_grid.empty(), "run_recovery: empty mask fraction grid");
  for (const double p : cfg.mask_fraction_grid)
    require(std::isfinite(p) && p >= 0.0 && p < 1.0,
            "run_recovery: mask fractions must lie in [0, 1)");
  const detail::ExperimentSetup s = detail::prepare_experiment(ds, cfg);
  const Index n = s.test.rows();
  const Index t_test = s.test.cols();

  ResultsTable table;
  for (std::size_t gi = 0; gi < cfg.mask_fraction_grid.size(); ++gi) {
    const double fraction = cfg.mask_fraction_grid[gi];
    int failed_joint = 0, failed_time = 0, failed_vertex = 0;
    for (int trial = 0; trial < cfg.n_trials; ++trial) {
      RandomStream rng(derive_seed(cfg.seed, gi, static_cast<std::uint64_t>(trial)));
      BoolMatrix observed(n, t_test);
      for (Index tt = 0; tt < t_test; ++tt)
        for (Index i = 0; i < n; ++i) observed(i, tt) = rng.uniform01() >= fraction;

      const auto record = [&](const char* method, const Matrix& estimate) {
        table.push_back({method, fraction, trial, "relative_error",
                         (estimate - s.test).norm() / s.test.norm()});
        table.push_back({method, fraction, trial, "output_snr_db",
                         snr_db(s.test, estimate, cfg.snr_cap_db)});
      };

      Matrix x_joint;
      if (detail::noiseless_fill(s.jb, observed, s.test, s.h_joint, cfg.solver, &x_joint))
        record("joint", x_joint);
      else
        ++failed_joint;

      Matrix x_time(n, t_test);
      bool time_ok = true;
      for (Index i = 0; i < n && time_ok; ++i) {
        const BoolMatrix row_mask = observed.row(i);
        Matrix filled;
        time_ok = detail::noiseless_fill(s.jb_row, row_mask, s.test.row(i),
                                         s.h_time.row(i), cfg.solver, &filled);
        if (time_ok) x_time.row(i) = filled;
      }
      if (time_ok)
        record("time", x_time);
      else
        ++failed_time;

      Matrix x_vertex(n, t_test);
      bool vertex_ok = true;
      const Matrix h_col = s.h_vertex;
      for (Index tt = 0; tt < t_test && vertex_ok; ++tt) {
        const BoolMatrix col_mask = observed.col(tt);
        Matrix filled;
        vertex_ok = detail::noiseless_fill(s.jb_col, col_mask, s.test.col(tt), h_col,
                                           cfg.solver, &filled);
        if (vertex_ok) x_vertex.col(tt) = filled;
      }
      if (vertex_ok)
        record("vertex", x_vertex);
      else
        ++failed_vertex;
    }
    table.push_back({"joint", fraction, -1, "n_infeasible", double(failed_joint)});
    table.push_back({"time", fraction, -1, "n_infeasible", double(failed_time)});
    table.push_back({"vertex", fraction, -1, "n_infeasible", double(failed_vertex)});
  }
  return table;
}

inline void write_results(const std::string& path, const ResultsTable& table) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(table.size());
  for (const auto& row : table)
    rows.push_back({row.method, csv::format_number(row.parameter), std::to_string(row.trial),
                    row.metric, csv::format_number(row.value)});
  csv::write_file(path, {"method", "parameter", "trial", "metric", "value"}, rows);
}

}  // namespace jtvsp
