#include "mfk/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mfk/csv.hpp"
#include "mfk/rng.hpp"

namespace mfk {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kNoiseStream = 0xb0153ULL;

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + ": " + e.what());
  }
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

std::string join_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (kernel_kind == KernelKind::tabulated)
    throw std::invalid_argument("config: tabulated kernels are not configurable from file");
  if (!(nu > 0)) throw std::invalid_argument("config: nu must be > 0");
  if (!(x_min < x_max)) throw std::invalid_argument("config: x_min must be < x_max");
  if (nx < 8) throw std::invalid_argument("config: nx must be >= 8");
  if (nt < 3) throw std::invalid_argument("config: nt must be >= 3");
  if (!(t_end > 0)) throw std::invalid_argument("config: t_end must be > 0");
  if (!(init_sigma > 0)) throw std::invalid_argument("config: init_sigma must be > 0");
  if (basis_n.empty()) throw std::invalid_argument("config: basis_n must not be empty");
  for (int n : basis_n)
    if (n < 1) throw std::invalid_argument("config: basis sizes must be >= 1");
  if (!(lambda_min > 0) || !(lambda_max > lambda_min))
    throw std::invalid_argument("config: need 0 < lambda_min < lambda_max");
  if (lambda_count < 5) throw std::invalid_argument("config: lambda_count must be >= 5");
  if (tsvd_m < 1) throw std::invalid_argument("config: tsvd_m must be >= 1");
  if (noise_level < 0) throw std::invalid_argument("config: noise_level must be >= 0");
  if (directory.empty()) throw std::invalid_argument("config: output directory must be set");
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << "[kernel]\n";
  out << "kind = " << to_string(kernel_kind) << "\n\n";
  out << "[pde]\n";
  out << "nu = " << csv::format_double(nu) << "\n";
  out << "x_min = " << csv::format_double(x_min) << "\n";
  out << "x_max = " << csv::format_double(x_max) << "\n";
  out << "nx = " << nx << "\n";
  out << "nt = " << nt << "\n";
  out << "t_end = " << csv::format_double(t_end) << "\n";
  out << "init_mean = " << csv::format_double(init_mean) << "\n";
  out << "init_sigma = " << csv::format_double(init_sigma) << "\n\n";
  out << "[regression]\n";
  out << "basis_n = " << join_int_list(basis_n) << "\n";
  out << "method = " << to_string(method) << "\n";
  out << "norm = " << (norm == RegularizationNorm::weighted ? "weighted" : "unweighted") << "\n";
  out << "lambda_min = " << csv::format_double(lambda_min) << "\n";
  out << "lambda_max = " << csv::format_double(lambda_max) << "\n";
  out << "lambda_count = " << lambda_count << "\n";
  out << "tsvd_m = " << tsvd_m << "\n";
  out << "noise_level = " << csv::format_double(noise_level) << "\n";
  out << "seed = " << seed << "\n\n";
  out << "[output]\n";
  out << "directory = " << directory << "\n";
  return out.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (section != "kernel" && section != "pde" && section != "regression" &&
          section != "output")
        throw std::invalid_argument("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "kernel.kind") cfg.kernel_kind = kernel_kind_from_string(value);
    else if (qual == "pde.nu") cfg.nu = std::stod(value);
    else if (qual == "pde.x_min") cfg.x_min = std::stod(value);
    else if (qual == "pde.x_max") cfg.x_max = std::stod(value);
    else if (qual == "pde.nx") cfg.nx = std::stoi(value);
    else if (qual == "pde.nt") cfg.nt = std::stoi(value);
    else if (qual == "pde.t_end") cfg.t_end = std::stod(value);
    else if (qual == "pde.init_mean") cfg.init_mean = std::stod(value);
    else if (qual == "pde.init_sigma") cfg.init_sigma = std::stod(value);
    else if (qual == "regression.basis_n") cfg.basis_n = parse_int_list(value);
    else if (qual == "regression.method") {
      if (value == "plain") cfg.method = EstimateMethod::plain;
      else if (value == "tikhonov") cfg.method = EstimateMethod::tikhonov;
      else if (value == "tsvd") cfg.method = EstimateMethod::tsvd;
      else throw std::invalid_argument("config: unknown method '" + value + "'");
    } else if (qual == "regression.norm") {
      if (value == "weighted") cfg.norm = RegularizationNorm::weighted;
      else if (value == "unweighted") cfg.norm = RegularizationNorm::unweighted;
      else throw std::invalid_argument("config: unknown norm '" + value + "'");
    } else if (qual == "regression.lambda_min") cfg.lambda_min = std::stod(value);
    else if (qual == "regression.lambda_max") cfg.lambda_max = std::stod(value);
    else if (qual == "regression.lambda_count") cfg.lambda_count = std::stoi(value);
    else if (qual == "regression.tsvd_m") cfg.tsvd_m = std::stoi(value);
    else if (qual == "regression.noise_level") cfg.noise_level = std::stod(value);
    else if (qual == "regression.seed") cfg.seed = std::stoull(value);
    else if (qual == "output.directory") cfg.directory = value;
    else throw std::invalid_argument("config: unknown key '" + key + "' in section [" +
                                     section + "]");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << serialize();
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig sc;
  sc.nu = nu;
  sc.grid = SpaceGrid(x_min, x_max, nx);
  sc.times = TimeGrid(t_end, nt);
  sc.initial_density = gaussian_density(sc.grid, init_mean, init_sigma);
  return sc;
}

std::vector<double> ExperimentConfig::lambda_grid() const {
  std::vector<double> grid(lambda_count);
  const double step = std::log(lambda_max / lambda_min) / (lambda_count - 1);
  for (int i = 0; i < lambda_count; ++i) grid[i] = lambda_min * std::exp(i * step);
  grid.back() = lambda_max;
  return grid;
}

ExperimentConfig builtin_config(KernelKind kind) {
  ExperimentConfig cfg;
  cfg.kernel_kind = kind;
  switch (kind) {
    case KernelKind::cubic:
      cfg.nu = 0.04;
      cfg.x_min = -1.0;
      cfg.x_max = 1.0;
      cfg.nx = 256;
      cfg.init_sigma = 0.18;
      break;
    case KernelKind::opinion_dynamics:
      cfg.nu = 0.01;
      cfg.x_min = -1.0;
      cfg.x_max = 1.0;
      cfg.nx = 256;
      cfg.init_sigma = 0.12;
      break;
    case KernelKind::attraction_repulsion:
      cfg.nu = 0.05;
      cfg.x_min = -4.0;
      cfg.x_max = 4.0;
      cfg.nx = 256;
      cfg.init_sigma = 0.4;
      break;
    default:
      throw std::invalid_argument("builtin_config: no preset for this kind");
  }
  return cfg;
}

const ManifestEntry* Manifest::find(const std::string& file) const {
  for (const auto& e : entries)
    if (e.file == file) return &e;
  return nullptr;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  return hash;
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& b, double level, std::uint64_t seed) {
  if (level < 0) throw std::invalid_argument("add_noise: level must be >= 0");
  if (level == 0) return b;
  const double rms = std::sqrt(b.squaredNorm() / std::max<int>(1, static_cast<int>(b.size())));
  Eigen::VectorXd noisy = b;
  for (int i = 0; i < b.size(); ++i)
    noisy[i] += level * rms * counter_normal(seed, kNoiseStream, static_cast<std::uint64_t>(i));
  return noisy;
}

std::vector<SvdComparisonRow> compare_svd_report(const RegressionSystem& system) {
  const SpectralDecomposition unw = svd_unweighted(system.A);
  const SpectralDecomposition wtd = eig_generalized(system.A, system.P);
  const PicardTable pu = picard_table(unw, system.b);
  const PicardTable pw = picard_table(wtd, system.b);
  const int n = static_cast<int>(std::min(pu.rows.size(), pw.rows.size()));
  std::vector<SvdComparisonRow> rows;
  rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    SvdComparisonRow row;
    row.index = i;
    row.sigma_unweighted = pu.rows[i].sigma;
    row.b_proj_unweighted = pu.rows[i].b_proj;
    row.ratio_unweighted = pu.rows[i].ratio;
    row.sigma_weighted = pw.rows[i].sigma;
    row.b_proj_weighted = pw.rows[i].b_proj;
    row.ratio_weighted = pw.rows[i].ratio;
    row.weighted_ge_unweighted = pw.rows[i].sigma >= pu.rows[i].sigma;
    rows.push_back(row);
  }
  return rows;
}

void write_svd_report(const std::vector<SvdComparisonRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "i,sigma_unweighted,b_proj_unweighted,ratio_unweighted,"
         "sigma_weighted,b_proj_weighted,ratio_weighted,weighted_ge_unweighted\n";
  for (const auto& r : rows)
    out << r.index << ',' << csv::format_double(r.sigma_unweighted) << ','
        << csv::format_double(r.b_proj_unweighted) << ','
        << csv::format_double(r.ratio_unweighted) << ',' << csv::format_double(r.sigma_weighted)
        << ',' << csv::format_double(r.b_proj_weighted) << ','
        << csv::format_double(r.ratio_weighted) << ',' << (r.weighted_ge_unweighted ? 1 : 0)
        << '\n';
}

namespace {

struct PipelineData {
  SpaceTimeField field;
  EmpiricalMeasure rho_general;
  EmpiricalMeasure rho_radial;
  SupportInterval support;
};

void write_lcurve(const LCurveResult& lc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "lambda,excess_loss,penalty_norm,curvature,selected\n";
  for (std::size_t i = 0; i < lc.points.size(); ++i) {
    const auto& p = lc.points[i];
    out << csv::format_double(p.lambda) << ',' << csv::format_double(p.excess_loss) << ','
        << csv::format_double(p.penalty_norm) << ',' << csv::format_double(p.curvature) << ','
        << (static_cast<int>(i) == lc.index ? 1 : 0) << '\n';
  }
}

// Radial reporting grid: support nodes thinned to at most 65 samples.
Eigen::VectorXd reporting_radii(const PipelineData& data) {
  const double dx = data.rho_radial.spacing();
  const int hi = data.support.index_hi;
  const int stride = std::max(1, (hi + 63) / 64);
  std::vector<double> radii;
  for (int k = 0; k <= hi; k += stride) radii.push_back(k * dx);
  return Eigen::Map<Eigen::VectorXd>(radii.data(), radii.size());
}

void run_single(const ExperimentConfig& config, const PipelineData& data, int n,
                const std::string& dir, bool with_kernels, std::vector<std::string>& files,
                Eigen::VectorXd* lambda_min_out) {
  fs::create_directories(dir);
  auto emit = [&](const std::string& name) { files.push_back(dir + "/" + name); };

  RegressionSystem system;
  system.nu = config.nu;
  stage("assemble", [&] {
    system.basis = build_basis(data.support.lo, data.support.hi, n, BasisMode::radial);
    system.A = assemble_A(data.field, system.basis);
    system.b = assemble_b_data(data.field, system.basis, config.nu);
    system.P = assemble_P(data.rho_radial, system.basis).diag;
    csv::write_system(system, dir);
    return 0;
  });
  emit("A.csv");
  emit("b.csv");
  emit("P.csv");
  emit("basis.csv");

  if (with_kernels) {
    stage("kernels", [&] {
      const Eigen::VectorXd radii = reporting_radii(data);
      const KernelMatrix G = assemble_G(data.field, radii);
      const WeightedKernel R = weight_kernel(G, data.rho_radial);
      std::vector<double> signed_offsets;
      for (int i = static_cast<int>(radii.size()) - 1; i >= 1; --i)
        signed_offsets.push_back(-radii[i]);
      for (int i = 0; i < radii.size(); ++i) signed_offsets.push_back(radii[i]);
      const Eigen::VectorXd offsets =
          Eigen::Map<Eigen::VectorXd>(signed_offsets.data(), signed_offsets.size());
      const KernelMatrix F = assemble_F(data.field, offsets);
      const WeightedKernel Q = weight_kernel(F, data.rho_general);
      csv::write_kernel_matrix(G, dir + "/kernel_G.csv");
      csv::write_kernel_matrix(R.matrix, dir + "/kernel_R.csv");
      csv::write_kernel_matrix(F, dir + "/kernel_F.csv");
      csv::write_kernel_matrix(Q.matrix, dir + "/kernel_Q.csv");
      return 0;
    });
    emit("kernel_G.csv");
    emit("kernel_R.csv");
    emit("kernel_F.csv");
    emit("kernel_Q.csv");
  }

  Eigen::VectorXd b_used = system.b;
  if (config.noise_level > 0) {
    stage("noise", [&] {
      b_used = add_noise(system.b, config.noise_level, config.seed);
      csv::write_vector(b_used, dir + "/b_noisy.csv");
      return 0;
    });
    emit("b_noisy.csv");
  }

  SpectralDecomposition unw, wtd;
  stage("spectra", [&] {
    unw = svd_unweighted(system.A);
    wtd = eig_generalized(system.A, system.P);
    csv::write_spectra(unw, wtd, dir + "/spectra.csv");
    return 0;
  });
  emit("spectra.csv");
  if (lambda_min_out) {
    lambda_min_out->resize(2);
    (*lambda_min_out)[0] = unw.eigenvalues.minCoeff();
    (*lambda_min_out)[1] = unw.eigenvalues.maxCoeff();
  }

  stage("picard", [&] {
    csv::write_picard(picard_table(unw, b_used), dir + "/picard_unweighted.csv");
    csv::write_picard(picard_table(wtd, b_used), dir + "/picard_weighted.csv");
    return 0;
  });
  emit("picard_unweighted.csv");
  emit("picard_weighted.csv");

  const Eigen::MatrixXd B_norm =
      config.norm == RegularizationNorm::weighted
          ? Eigen::MatrixXd(system.P.asDiagonal())
          : Eigen::MatrixXd(system.basis.dr() *
                            Eigen::MatrixXd::Identity(system.A.rows(), system.A.cols()));

  std::vector<std::pair<std::string, CoefficientEstimate>> estimates;
  stage("estimate", [&] {
    estimates.emplace_back("plain", solve_unregularized(system.A, b_used, system.basis));
    const LCurveResult lc =
        lcurve_select(system.A, b_used, B_norm, config.lambda_grid(), system.basis);
    write_lcurve(lc, dir + "/lcurve.csv");
    estimates.emplace_back("tikhonov",
                           tikhonov_solve(system.A, b_used, B_norm, lc.lambda, system.basis));
    const SpectralDecomposition& decomp =
        config.norm == RegularizationNorm::weighted ? wtd : unw;
    const int m = std::min(config.tsvd_m, decomp.positive_count());
    estimates.emplace_back("tsvd", tsvd_solve(decomp, b_used, m, system.basis));
    for (const auto& [name, est] : estimates)
      csv::write_estimate(est, dir + "/estimate_" + name + ".csv");
    return 0;
  });
  emit("lcurve.csv");
  emit("estimate_plain.csv");
  emit("estimate_tikhonov.csv");
  emit("estimate_tsvd.csv");

  stage("report", [&] {
    std::ofstream rec(dir + "/recovery.csv", std::ios::binary);
    if (!rec) throw std::runtime_error("cannot open recovery.csv");
    rec << "method,l2rho_error,absolute,lambda,m\n";
    const InteractionKernel kernel = config.kernel();
    for (const auto& [name, est] : estimates) {
      const RelativeError err = l2rho_error(est, kernel, data.rho_radial);
      rec << name << ',' << csv::format_double(err.value) << ',' << (err.absolute ? 1 : 0) << ','
          << csv::format_double(est.lambda) << ',' << est.truncation << '\n';
    }
    rec.close();

    RegressionSystem reported = system;
    reported.b = b_used;
    write_svd_report(compare_svd_report(reported), dir + "/compare_svd.csv");
    return 0;
  });
  emit("recovery.csv");
  emit("compare_svd.csv");
}

}  // namespace

Manifest run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::string root = config.directory;
  fs::create_directories(root);
  std::vector<std::string> files;

  PipelineData data;
  stage("solve", [&] {
    data.field = solve_mean_field(config.kernel(), config.solver_config());
    csv::write_field(data.field, root + "/data.csv");
    return 0;
  });
  files.push_back(root + "/data.csv");

  stage("measure", [&] {
    data.rho_general = compute_rho_general(data.field);
    data.rho_radial = compute_rho_radial(data.field);
    data.support = support_of(data.rho_radial,
                              kDefaultSupportRatio * data.rho_radial.density.maxCoeff());
    csv::write_measure(data.rho_general, root + "/rho_general.csv");
    csv::write_measure(data.rho_radial, root + "/rho_radial.csv");
    return 0;
  });
  files.push_back(root + "/rho_general.csv");
  files.push_back(root + "/rho_radial.csv");

  {
    ExperimentConfig normalized = config;
    normalized.directory = ".";
    normalized.save(root + "/config.txt");
    files.push_back(root + "/config.txt");
  }

  if (config.basis_n.size() == 1) {
    run_single(config, data, config.basis_n[0], root, /*with_kernels=*/true, files, nullptr);
  } else {
    std::ofstream sweep(root + "/sweep_summary.csv", std::ios::binary);
    if (!sweep) throw std::runtime_error("sweep: cannot open sweep_summary.csv");
    sweep << "n,lambda_min,lambda_max,ratio\n";
    for (int n : config.basis_n) {
      Eigen::VectorXd extremes;
      run_single(config, data, n, root + "/n_" + std::to_string(n), /*with_kernels=*/false,
                 files, &extremes);
      sweep << n << ',' << csv::format_double(extremes[0]) << ','
            << csv::format_double(extremes[1]) << ','
            << csv::format_double(extremes[0] / extremes[1]) << '\n';
    }
    sweep.close();
    files.push_back(root + "/sweep_summary.csv");
  }

  Manifest manifest;
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    ManifestEntry entry;
    entry.file = fs::relative(path, root).generic_string();
    entry.bytes = static_cast<std::uint64_t>(fs::file_size(path));
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(path)));
    entry.fnv1a64 = hex;
    manifest.entries.push_back(entry);
  }
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.file < b.file; });
  std::ofstream out(root + "/manifest.csv", std::ios::binary);
  if (!out) throw std::runtime_error("manifest: cannot open manifest.csv");
  out << "file,bytes,fnv1a64\n";
  for (const auto& e : manifest.entries) out << e.file << ',' << e.bytes << ',' << e.fnv1a64 << '\n';
  return manifest;
}

}  // namespace mfk
