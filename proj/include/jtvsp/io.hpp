#pragma once

#include "jtvsp/csv.hpp"
#include "jtvsp/graph.hpp"
#include "jtvsp/psd_estimation.hpp"

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

// File formats (all CSV with a header row):
//   coordinates: id,x,y[,z]
//   readings:    id,<t labels...>; empty cells mark missing data
//   graph edges: i,j,weight (vertex indices into the nodes file, i < j)
//   graph nodes: id,x,y[,z]
//   density:     lambda,<band frequencies...>; row n starts with lambda_n

namespace jtvsp {

struct Coordinates {
  std::vector<std::string> ids;
  Matrix points;  // n x d, d in {2, 3}
};

inline Coordinates read_coordinates(const std::string& path) {
  const auto table = csv::read_file(path);
  const auto cols = table.header.size();
  require(cols == 3 || cols == 4, path + ": expected header id,x,y[,z]");
  require(table.header[0] == "id", path + ": first column must be 'id'");
  require(!table.rows.empty(), path + ": no data rows");
  Coordinates out;
  out.points.resize(static_cast<Index>(table.rows.size()), static_cast<Index>(cols - 1));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.ids.push_back(table.rows[r][0]);
    for (std::size_t c = 1; c < cols; ++c)
      out.points(static_cast<Index>(r), static_cast<Index>(c - 1)) =
          csv::parse_number(table.rows[r][c], path);
  }
  return out;
}

inline void write_coordinates(const std::string& path, const std::vector<std::string>& ids,
                              const Matrix& points) {
  require(static_cast<Index>(ids.size()) == points.rows(),
          "write_coordinates: id count must match rows");
  require(points.cols() == 2 || points.cols() == 3, "write_coordinates: need 2 or 3 columns");
  std::vector<std::string> header = {"id", "x", "y"};
  if (points.cols() == 3) header.push_back("z");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ids.size());
  for (Index r = 0; r < points.rows(); ++r) {
    std::vector<std::string> row = {ids[static_cast<std::size_t>(r)]};
    for (Index c = 0; c < points.cols(); ++c) row.push_back(csv::format_number(points(r, c)));
    rows.push_back(std::move(row));
  }
  csv::write_file(path, header, rows);
}

struct Readings {
  std::vector<std::string> ids;
  Matrix values;  // NaN marks a missing datum
};

inline Readings read_readings(const std::string& path) {
  const auto table = csv::read_file(path);
  require(table.header.size() >= 2, path + ": expected header id,<time labels...>");
  require(table.header[0] == "id", path + ": first column must be 'id'");
  require(!table.rows.empty(), path + ": no data rows");
  const auto t = table.header.size() - 1;
  Readings out;
  out.values.resize(static_cast<Index>(table.rows.size()), static_cast<Index>(t));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.ids.push_back(table.rows[r][0]);
    for (std::size_t c = 1; c <= t; ++c)
      out.values(static_cast<Index>(r), static_cast<Index>(c - 1)) =
          csv::parse_number_or_missing(table.rows[r][c], path);
  }
  return out;
}

inline void write_readings(const std::string& path, const std::vector<std::string>& ids,
                           const Matrix& values) {
  require(static_cast<Index>(ids.size()) == values.rows(),
          "write_readings: id count must match rows");
  std::vector<std::string> header = {"id"};
  for (Index c = 0; c < values.cols(); ++c) header.push_back("t" + std::to_string(c));
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ids.size());
  for (Index r = 0; r < values.rows(); ++r) {
    std::vector<std::string> row = {ids[static_cast<std::size_t>(r)]};
    for (Index c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      row.push_back(std::isnan(v) ? std::string() : csv::format_number(v));
    }
    rows.push_back(std::move(row));
  }
  csv::write_file(path, header, rows);
}

inline void write_graph(const std::string& edges_path, const std::string& nodes_path,
                        const Graph& graph, const std::vector<std::string>& ids) {
  validate_graph(graph);
  require(static_cast<Index>(ids.size()) == graph.n_vertices(),
          "write_graph: id count must match the vertex count");
  require(graph.coords.size() > 0, "write_graph: graph must carry coordinates");
  std::vector<std::vector<std::string>> rows;
  for (Index i = 0; i < graph.n_vertices(); ++i)
    for (Index j = i + 1; j < graph.n_vertices(); ++j)
      if (graph.weights(i, j) > 0.0)
        rows.push_back({std::to_string(i), std::to_string(j),
                        csv::format_number(graph.weights(i, j))});
  csv::write_file(edges_path, {"i", "j", "weight"}, rows);
  write_coordinates(nodes_path, ids, graph.coords);
}

struct LoadedGraph {
  Graph graph;
  std::vector<std::string> ids;
};

inline LoadedGraph read_graph(const std::string& edges_path, const std::string& nodes_path) {
  const auto nodes = read_coordinates(nodes_path);
  const Index n = nodes.points.rows();
  const auto table = csv::read_file(edges_path);
  require(table.header.size() == 3 && table.header[0] == "i" && table.header[1] == "j" &&
              table.header[2] == "weight",
          edges_path + ": expected header i,j,weight");
  Matrix w = Matrix::Zero(n, n);
  for (const auto& row : table.rows) {
    const auto i = static_cast<Index>(csv::parse_number(row[0], edges_path));
    const auto j = static_cast<Index>(csv::parse_number(row[1], edges_path));
    const double weight = csv::parse_number(row[2], edges_path);
    require(i >= 0 && i < n && j >= 0 && j < n && i != j,
            edges_path + ": edge endpoints out of range");
    require(weight > 0.0 && std::isfinite(weight), edges_path + ": edge weights must be positive");
    w(i, j) = weight;
    w(j, i) = weight;
  }
  LoadedGraph out{Graph{std::move(w), nodes.points}, nodes.ids};
  validate_graph(out.graph);
  return out;
}

inline void write_jpsd(const std::string& path, const Vector& eigenvalues, const Jpsd& jpsd) {
  require(eigenvalues.size() == jpsd.values.rows(),
          "write_jpsd: eigenvalue count must match density rows");
  std::vector<std::string> header = {"lambda"};
  for (Index m = 0; m < jpsd.n_bands(); ++m)
    header.push_back("omega_" + csv::format_number(jpsd.band_frequency(m)));
  std::vector<std::vector<std::string>> rows;
  for (Index n = 0; n < jpsd.values.rows(); ++n) {
    std::vector<std::string> row = {csv::format_number(eigenvalues(n))};
    for (Index m = 0; m < jpsd.n_bands(); ++m)
      row.push_back(csv::format_number(jpsd.values(n, m)));
    rows.push_back(std::move(row));
  }
  csv::write_file(path, header, rows);
}

struct LoadedJpsd {
  Vector eigenvalues;
  Jpsd jpsd;
};

inline LoadedJpsd read_jpsd(const std::string& path) {
  const auto table = csv::read_file(path);
  require(table.header.size() >= 2 && table.header[0] == "lambda",
          path + ": expected header lambda,<band frequencies...>");
  require(!table.rows.empty(), path + ": no data rows");
  const auto bands = table.header.size() - 1;
  LoadedJpsd out;
  out.eigenvalues.resize(static_cast<Index>(table.rows.size()));
  out.jpsd.values.resize(static_cast<Index>(table.rows.size()), static_cast<Index>(bands));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.eigenvalues(static_cast<Index>(r)) = csv::parse_number(table.rows[r][0], path);
    for (std::size_t c = 1; c <= bands; ++c) {
      const double v = csv::parse_number(table.rows[r][c], path);
      require(v >= 0.0, path + ": density values must be nonnegative");
      out.jpsd.values(static_cast<Index>(r), static_cast<Index>(c - 1)) = v;
    }
  }
  return out;
}

}  // namespace jtvsp
