// Command-line front end for the kernel-estimation pipeline. Every verb reads
// the experiment config and works inside the output directory; stages that
// depend on earlier artifacts load them from disk, so the verbs can run one
// at a time or all at once through `sweep`.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "mfk/csv.hpp"
#include "mfk/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::int64_t seed_override = -1;
};

mfk::ExperimentConfig load_config(const CommonArgs& args) {
  mfk::ExperimentConfig cfg = mfk::ExperimentConfig::load(args.config_path);
  if (!args.out_override.empty()) cfg.directory = args.out_override;
  if (args.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed_override);
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--out", args.out_override, "output directory (overrides the config)");
  cmd->add_option("--seed", args.seed_override, "seed (overrides the config)");
}

mfk::RegressionSystem load_system(const mfk::ExperimentConfig& cfg) {
  return mfk::csv::read_system(cfg.directory);
}

int run_solve(const mfk::ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.directory);
  const mfk::SpaceTimeField field = mfk::solve_mean_field(cfg.kernel(), cfg.solver_config());
  mfk::csv::write_field(field, cfg.directory + "/data.csv");
  std::printf("wrote %s\n", (cfg.directory + "/data.csv").c_str());
  return 0;
}

int run_assemble(const mfk::ExperimentConfig& cfg) {
  const mfk::SpaceTimeField field = mfk::csv::read_field(cfg.directory + "/data.csv");
  mfk::EmpiricalMeasure rho_general = mfk::compute_rho_general(field);
  mfk::EmpiricalMeasure rho_radial = mfk::compute_rho_radial(field);
  const mfk::SupportInterval support = mfk::support_of(
      rho_radial, mfk::kDefaultSupportRatio * rho_radial.density.maxCoeff());
  mfk::csv::write_measure(rho_general, cfg.directory + "/rho_general.csv");
  mfk::csv::write_measure(rho_radial, cfg.directory + "/rho_radial.csv");

  mfk::RegressionSystem system;
  system.nu = cfg.nu;
  system.basis = mfk::build_basis(support.lo, support.hi, cfg.basis_n[0], mfk::BasisMode::radial);
  system.A = mfk::assemble_A(field, system.basis);
  system.b = mfk::assemble_b_data(field, system.basis, cfg.nu);
  system.P = mfk::assemble_P(rho_radial, system.basis).diag;
  mfk::csv::write_system(system, cfg.directory);
  std::printf("assembled n=%d system in %s\n", cfg.basis_n[0], cfg.directory.c_str());
  return 0;
}

int run_estimate(const mfk::ExperimentConfig& cfg) {
  const mfk::RegressionSystem system = load_system(cfg);
  Eigen::VectorXd b = system.b;
  if (cfg.noise_level > 0) {
    b = mfk::add_noise(b, cfg.noise_level, cfg.seed);
    mfk::csv::write_vector(b, cfg.directory + "/b_noisy.csv");
  }
  const Eigen::MatrixXd B_norm =
      cfg.norm == mfk::RegularizationNorm::weighted
          ? Eigen::MatrixXd(system.P.asDiagonal())
          : Eigen::MatrixXd(system.basis.dr() *
                            Eigen::MatrixXd::Identity(system.A.rows(), system.A.cols()));

  mfk::csv::write_estimate(mfk::solve_unregularized(system.A, b, system.basis),
                           cfg.directory + "/estimate_plain.csv");
  const mfk::LCurveResult lc =
      mfk::lcurve_select(system.A, b, B_norm, cfg.lambda_grid(), system.basis);
  mfk::csv::write_estimate(mfk::tikhonov_solve(system.A, b, B_norm, lc.lambda, system.basis),
                           cfg.directory + "/estimate_tikhonov.csv");
  const mfk::SpectralDecomposition decomp =
      cfg.norm == mfk::RegularizationNorm::weighted
          ? mfk::eig_generalized(system.A, system.P)
          : mfk::svd_unweighted(system.A);
  const int m = std::min(cfg.tsvd_m, decomp.positive_count());
  mfk::csv::write_estimate(mfk::tsvd_solve(decomp, b, m, system.basis),
                           cfg.directory + "/estimate_tsvd.csv");
  std::printf("estimates written to %s (lambda = %g, m = %d)\n", cfg.directory.c_str(),
              lc.lambda, m);
  return 0;
}

int run_spectra(const mfk::ExperimentConfig& cfg) {
  const mfk::RegressionSystem system = load_system(cfg);
  mfk::csv::write_spectra(mfk::svd_unweighted(system.A),
                          mfk::eig_generalized(system.A, system.P),
                          cfg.directory + "/spectra.csv");
  std::printf("wrote %s\n", (cfg.directory + "/spectra.csv").c_str());
  return 0;
}

int run_picard(const mfk::ExperimentConfig& cfg) {
  const mfk::RegressionSystem system = load_system(cfg);
  mfk::csv::write_picard(mfk::picard_table(mfk::svd_unweighted(system.A), system.b),
                         cfg.directory + "/picard_unweighted.csv");
  mfk::csv::write_picard(mfk::picard_table(mfk::eig_generalized(system.A, system.P), system.b),
                         cfg.directory + "/picard_weighted.csv");
  std::printf("wrote picard tables to %s\n", cfg.directory.c_str());
  return 0;
}

int run_report(const mfk::ExperimentConfig& cfg) {
  const mfk::RegressionSystem system = load_system(cfg);
  mfk::write_svd_report(mfk::compare_svd_report(system), cfg.directory + "/compare_svd.csv");
  std::printf("wrote %s\n", (cfg.directory + "/compare_svd.csv").c_str());
  return 0;
}

int run_sweep(const mfk::ExperimentConfig& cfg) {
  const mfk::Manifest manifest = mfk::run_experiment(cfg);
  std::printf("experiment complete: %zu artifacts in %s\n", manifest.entries.size(),
              cfg.directory.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-field interaction kernel estimation"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string verb;
  for (const char* name : {"solve", "assemble", "estimate", "spectra", "picard", "sweep",
                           "report"}) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common(cmd, args);
    cmd->callback([&verb, name] { verb = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const mfk::ExperimentConfig cfg = load_config(args);
    if (verb == "solve") return run_solve(cfg);
    if (verb == "assemble") return run_assemble(cfg);
    if (verb == "estimate") return run_estimate(cfg);
    if (verb == "spectra") return run_spectra(cfg);
    if (verb == "picard") return run_picard(cfg);
    if (verb == "report") return run_report(cfg);
    if (verb == "sweep") return run_sweep(cfg);
    std::fprintf(stderr, "unknown verb\n");
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", verb.c_str(), e.what());
    return 1;
  }
}
