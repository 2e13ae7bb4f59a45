#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfk/kernels.hpp"
#include "mfk/measures.hpp"
#include "mfk/pde.hpp"
#include "mfk/regression.hpp"
#include "mfk/spectral.hpp"

namespace mfk {

enum class RegularizationNorm { unweighted, weighted };

/// Everything one experiment needs, parsed from a sectioned key = value file.
/// Unknown sections or keys are rejected; serialization is canonical so a
/// config round-trips losslessly.
struct ExperimentConfig {
  // [kernel]
  KernelKind kernel_kind = KernelKind::cubic;

  // [pde]
  double nu = 0.025;
  double x_min = -1.0;
  double x_max = 1.0;
  int nx = 256;
  int nt = 1000;
  double t_end = 1.0;
  double init_mean = 0.0;
  double init_sigma = 0.14;

  // [regression]
  std::vector<int> basis_n = {16};
  EstimateMethod method = EstimateMethod::tikhonov;
  RegularizationNorm norm = RegularizationNorm::weighted;
  double lambda_min = 1e-8;
  double lambda_max = 1.0;
  int lambda_count = 20;
  int tsvd_m = 4;
  double noise_level = 0.0;
  std::uint64_t seed = 1;

  // [output]
  std::string directory = "out";

  void validate() const;
  std::string serialize() const;
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  void save(const std::string& path) const;

  InteractionKernel kernel() const { return InteractionKernel::builtin(kernel_kind); }
  SolverConfig solver_config() const;
  std::vector<double> lambda_grid() const;
};

/// Tuned desk-scale defaults for the three built-in kernels. The space
/// domains truncate where the density stays below ~1e-10 at the boundary
/// for the whole horizon.
ExperimentConfig builtin_config(KernelKind kind);

struct ManifestEntry {
  std::string file;
  std::uint64_t bytes = 0;
  std::string fnv1a64;  // hex
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(const std::string& file) const;
};

std::uint64_t fnv1a64_file(const std::string& path);

/// Full pipeline: synthesize data, assemble the measure/kernels/system,
/// decompose, estimate with every configured method, and write the artifact
/// set plus manifest.csv into config.directory (one subdirectory per basis
/// size when basis_n lists several). Identical config and seed produce
/// byte-identical artifacts. Any stage failure throws with the stage name.
Manifest run_experiment(const ExperimentConfig& config);

struct SvdComparisonRow {
  int index;
  double sigma_unweighted, b_proj_unweighted, ratio_unweighted;
  double sigma_weighted, b_proj_weighted, ratio_weighted;
  bool weighted_ge_unweighted;
};

/// Side-by-side weighted/unweighted spectra and b-projections for one system.
std::vector<SvdComparisonRow> compare_svd_report(const RegressionSystem& system);
void write_svd_report(const std::vector<SvdComparisonRow>& rows, const std::string& path);

/// Additive Gaussian noise on b at a relative RMS level, counter-seeded.
Eigen::VectorXd add_noise(const Eigen::VectorXd& b, double level, std::uint64_t seed);

}  // namespace mfk
