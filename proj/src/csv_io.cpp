#include "totalproj/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace totalproj {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DimensionMismatch("bad numeric cell: '" + s + "'");
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DimensionMismatch("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DimensionMismatch("cannot open for reading: " + path.string());
  return in;
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split_csv_line(line)) row.push_back(parse_double(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DimensionMismatch("ragged CSV matrix: " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DimensionMismatch("empty CSV matrix: " + path.string());
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_system_csv(const OverdeterminedSystem& sys, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (int j = 0; j < sys.cols(); ++j) out << "phi_" << j << ',';
  out << "v,d\n";
  for (int i = 0; i < sys.rows(); ++i) {
    for (int j = 0; j < sys.cols(); ++j) out << format_double(sys.phi()(i, j)) << ',';
    out << format_double(sys.targets()[i]) << ',' << format_double(sys.weights()[i])
        << '\n';
  }
}

OverdeterminedSystem read_system_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw DimensionMismatch("empty system file");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[header.size() - 2] != "v" || header.back() != "d") {
    throw DimensionMismatch("system CSV must end with columns v,d");
  }
  const int n = static_cast<int>(header.size()) - 2;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != n + 2) {
      throw DimensionMismatch("system row width mismatch");
    }
    std::vector<double> row;
    for (const auto& cell : cells) row.push_back(parse_double(cell));
    rows.push_back(std::move(row));
  }
  Matrix phi(rows.size(), n);
  Vector v(rows.size()), d(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < n; ++j) phi(static_cast<Eigen::Index>(i), j) = rows[i][j];
    v[static_cast<Eigen::Index>(i)] = rows[i][n];
    d[static_cast<Eigen::Index>(i)] = rows[i][n + 1];
  }
  return OverdeterminedSystem(std::move(phi), std::move(v), std::move(d));
}

void write_trace_csv(const SolveTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "k,err,g,theta,alpha,skipped\n";
  for (const auto& rec : trace.records) {
    out << rec.k << ',' << format_double(rec.err) << ',' << format_double(rec.g) << ','
        << format_double(rec.theta) << ',' << format_double(rec.alpha) << ','
        << (rec.skipped ? 1 : 0) << '\n';
  }
}

void write_mrp(const MarkovRewardProcess& mrp, const FeatureMap& features,
               std::uint64_t seed, const std::filesystem::path& dir,
               const std::string& stem) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(mrp.p, dir / (stem + "_P.csv"));
  write_matrix_csv(mrp.r, dir / (stem + "_R.csv"));
  write_matrix_csv(features.phi, dir / (stem + "_Phi.csv"));
  nlohmann::json meta{{"m", mrp.states()},
                      {"n", features.dim()},
                      {"gamma", mrp.gamma},
                      {"seed", seed}};
  auto out = open_out(dir / (stem + "_meta.json"));
  out << meta.dump(2) << '\n';
}

LoadedMrp read_mrp(const std::filesystem::path& dir, const std::string& stem) {
  auto in = open_in(dir / (stem + "_meta.json"));
  nlohmann::json meta = nlohmann::json::parse(in);
  Matrix p = read_matrix_csv(dir / (stem + "_P.csv"));
  Matrix r = read_matrix_csv(dir / (stem + "_R.csv"));
  Matrix phi = read_matrix_csv(dir / (stem + "_Phi.csv"));
  const int m = meta.at("m").get<int>();
  const int n = meta.at("n").get<int>();
  if (p.rows() != m || phi.rows() != m || phi.cols() != n) {
    throw DimensionMismatch("MRP metadata disagrees with CSV shapes");
  }
  return {MarkovRewardProcess(std::move(p), std::move(r), meta.at("gamma").get<double>()),
          FeatureMap{std::move(phi)}, meta.at("seed").get<std::uint64_t>()};
}

void write_table_csv(const CsvTable& table, const std::filesystem::path& path) {
  if (table.columns.empty()) throw DimensionMismatch("table has no columns");
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw DimensionMismatch("table row width does not match schema " + table.schema);
    }
  }
  auto out = open_out(path);
  out << "# schema: " << table.schema << '\n';
  if (!table.config_echo.empty()) out << "# config: " << table.config_echo << '\n';
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out << ',';
    out << table.columns[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

}  // namespace totalproj
