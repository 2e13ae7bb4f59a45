#include "mfk/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mfk::csv {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw std::runtime_error("cannot parse number: '" + s + "'");
  }
}

void expect_header(std::ifstream& in, const std::string& expected, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected)
    throw std::runtime_error(path + ": expected header '" + expected + "', got '" + line + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_field(const SpaceTimeField& field, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t,x,u\n";
  for (int k = 0; k < field.times.n_snapshots(); ++k)
    for (int i = 0; i < field.grid.n_nodes(); ++i)
      out << format_double(field.times.time(k)) << ',' << format_double(field.grid.node(i)) << ','
          << format_double(field.values(k, i)) << '\n';
}

SpaceTimeField read_field(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_header(in, "t,x,u", path);
  std::vector<double> ts, xs, us;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line);
    if (parts.size() != 3) throw std::runtime_error(path + ": malformed row '" + line + "'");
    ts.push_back(parse_double(parts[0]));
    xs.push_back(parse_double(parts[1]));
    us.push_back(parse_double(parts[2]));
  }
  if (us.empty()) throw std::runtime_error(path + ": no records");

  // Time-major layout: the x values of the first snapshot enumerate the grid.
  std::size_t nn = 1;
  while (nn < ts.size() && ts[nn] == ts[0]) ++nn;
  if (ts.size() % nn != 0) throw std::runtime_error(path + ": ragged snapshots");
  const std::size_t nt_snapshots = ts.size() / nn;
  if (nn < 3 || nt_snapshots < 2) throw std::runtime_error(path + ": grid too small");

  SpaceGrid grid(xs[0], xs[nn - 1], static_cast<int>(nn) - 1);
  TimeGrid times(ts.back(), static_cast<int>(nt_snapshots) - 1);
  Eigen::MatrixXd values(nt_snapshots, nn);
  for (std::size_t k = 0; k < nt_snapshots; ++k)
    for (std::size_t i = 0; i < nn; ++i) values(k, i) = us[k * nn + i];
  return SpaceTimeField(grid, times, std::move(values));
}

void write_ensemble(const ParticleEnsemble& ensemble, const TimeGrid& times,
                    const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t,particle_id,x\n";
  for (int k = 0; k < ensemble.positions.rows(); ++k)
    for (int p = 0; p < ensemble.n_particles; ++p)
      out << format_double(times.time(k)) << ',' << p << ','
          << format_double(ensemble.positions(k, p)) << '\n';
}

void write_measure(const EmpiricalMeasure& measure, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "x,rho,in_support\n";
  for (int i = 0; i < measure.axis.size(); ++i)
    out << format_double(measure.axis[i]) << ',' << format_double(measure.density[i]) << ','
        << (measure.support_mask[i] ? 1 : 0) << '\n';
}

EmpiricalMeasure read_measure(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_header(in, "x,rho,in_support", path);
  std::vector<double> xs, rhos;
  std::vector<bool> mask;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line);
    if (parts.size() != 3) throw std::runtime_error(path + ": malformed row '" + line + "'");
    xs.push_back(parse_double(parts[0]));
    rhos.push_back(parse_double(parts[1]));
    mask.push_back(parts[2] == "1");
  }
  if (xs.size() < 2) throw std::runtime_error(path + ": too few rows");
  EmpiricalMeasure m;
  m.axis = Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
  m.density = Eigen::Map<Eigen::VectorXd>(rhos.data(), rhos.size());
  m.support_mask.resize(mask.size());
  double min_in_support = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    m.support_mask[i] = mask[i];
    if (mask[i]) min_in_support = std::min(min_in_support, rhos[i]);
  }
  m.radial = xs[0] >= 0.0;
  m.support_threshold = std::isfinite(min_in_support) ? 0.5 * min_in_support : 0.0;
  return m;
}

void write_kernel_matrix(const KernelMatrix& kernel, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "kind,n,T,x0,dx\n";
  const double h = kernel.size() > 1 ? kernel.axis[1] - kernel.axis[0] : 0.0;
  out << to_string(kernel.kind) << ',' << kernel.size() << ','
      << format_double(kernel.time_horizon) << ',' << format_double(kernel.axis[0]) << ','
      << format_double(h) << '\n';
  for (int i = 0; i < kernel.size(); ++i) {
    for (int j = 0; j < kernel.size(); ++j) {
      if (j) out << ',';
      out << format_double(kernel.values(i, j));
    }
    out << '\n';
  }
}

KernelMatrix read_kernel_matrix(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_header(in, "kind,n,T,x0,dx", path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing value row");
  auto parts = split(line);
  if (parts.size() != 5) throw std::runtime_error(path + ": malformed value row");
  KernelMatrix k;
  k.kind = kernel_matrix_kind_from_string(parts[0]);
  const int n = static_cast<int>(parse_double(parts[1]));
  k.time_horizon = parse_double(parts[2]);
  const double x0 = parse_double(parts[3]);
  const double h = parse_double(parts[4]);
  k.axis.resize(n);
  for (int i = 0; i < n; ++i) k.axis[i] = x0 + i * h;
  k.values.resize(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated matrix");
    parts = split(line);
    if (static_cast<int>(parts.size()) != n)
      throw std::runtime_error(path + ": malformed matrix row");
    for (int j = 0; j < n; ++j) k.values(i, j) = parse_double(parts[j]);
  }
  return k;
}

void write_matrix(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out = open_out(path);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line);
    std::vector<double> row;
    row.reserve(parts.size());
    for (const auto& p : parts) row.push_back(parse_double(p));
    if (!rows.empty() && rows[0].size() != row.size())
      throw std::runtime_error(path + ": ragged matrix");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[0].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_vector(const Eigen::VectorXd& v, const std::string& path) {
  std::ofstream out = open_out(path);
  for (int i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

Eigen::VectorXd read_vector(const std::string& path) {
  const Eigen::MatrixXd m = read_matrix(path);
  if (m.cols() != 1) throw std::runtime_error(path + ": expected a single column");
  return m.col(0);
}

void write_system(const RegressionSystem& system, const std::string& directory) {
  write_matrix(system.A, directory + "/A.csv");
  write_vector(system.b, directory + "/b.csv");
  write_vector(system.P, directory + "/P.csv");
  std::ofstream out = open_out(directory + "/basis.csv");
  out << "mode,n,r_lo,r_hi,nu\n";
  out << (system.basis.mode == BasisMode::radial ? "radial" : "general") << ','
      << system.basis.size() << ',' << format_double(system.basis.knots[0]) << ','
      << format_double(system.basis.knots[system.basis.size()]) << ','
      << format_double(system.nu) << '\n';
}

RegressionSystem read_system(const std::string& directory) {
  RegressionSystem sys;
  sys.A = read_matrix(directory + "/A.csv");
  sys.b = read_vector(directory + "/b.csv");
  sys.P = read_vector(directory + "/P.csv");
  std::ifstream in = open_in(directory + "/basis.csv");
  expect_header(in, "mode,n,r_lo,r_hi,nu", directory + "/basis.csv");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(directory + "/basis.csv: missing values");
  const auto parts = split(line);
  if (parts.size() != 5) throw std::runtime_error(directory + "/basis.csv: malformed value row");
  const BasisMode mode = parts[0] == "radial" ? BasisMode::radial : BasisMode::general;
  sys.basis = build_basis(parse_double(parts[2]), parse_double(parts[3]),
                          static_cast<int>(parse_double(parts[1])), mode);
  sys.nu = parse_double(parts[4]);
  return sys;
}

void write_estimate(const CoefficientEstimate& estimate, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "i,r_mid,c_i\n";
  for (int i = 0; i < estimate.c.size(); ++i)
    out << i << ',' << format_double(estimate.basis.mid(i)) << ','
        << format_double(estimate.c[i]) << '\n';
}

Eigen::VectorXd read_estimate_coefficients(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_header(in, "i,r_mid,c_i", path);
  std::vector<double> cs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line);
    if (parts.size() != 3) throw std::runtime_error(path + ": malformed row");
    cs.push_back(parse_double(parts[2]));
  }
  return Eigen::Map<Eigen::VectorXd>(cs.data(), cs.size());
}

void write_picard(const PicardTable& table, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "i,sigma,b_proj,ratio,weighted\n";
  for (const auto& row : table.rows)
    out << row.index << ',' << format_double(row.sigma) << ',' << format_double(row.b_proj) << ','
        << format_double(row.ratio) << ',' << (table.weighted ? 1 : 0) << '\n';
}

void write_spectra(const SpectralDecomposition& unweighted, const SpectralDecomposition& weighted,
                   const std::string& path) {
  std::ofstream out = open_out(path);
  out << "i,lambda,weighted\n";
  for (int i = 0; i < unweighted.eigenvalues.size(); ++i)
    out << i << ',' << format_double(unweighted.eigenvalues[i]) << ",0\n";
  for (int i = 0; i < weighted.eigenvalues.size(); ++i)
    out << i << ',' << format_double(weighted.eigenvalues[i]) << ",1\n";
}

}  // namespace mfk::csv
