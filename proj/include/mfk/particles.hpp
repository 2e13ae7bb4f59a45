#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "mfk/grid.hpp"
#include "mfk/kernels.hpp"

namespace mfk {

struct ParticleEnsemble {
  Eigen::MatrixXd positions;  // [snapshot, particle]
  int n_particles = 0;
  double nu = 0.0;
  std::uint64_t seed = 0;
};

struct InitialDistribution {
  enum class Kind { gaussian, uniform } kind = Kind::gaussian;
  double a = 0.0;  // mean (gaussian) or lower bound (uniform)
  double b = 1.0;  // sigma (gaussian) or upper bound (uniform)

  static InitialDistribution gaussian(double mean, double sigma) {
    return {Kind::gaussian, mean, sigma};
  }
  static InitialDistribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
};

/// Euler-Maruyama for the exchangeable pair-interaction system
///   dX_i = (1/N) sum_j phi(|X_j - X_i|) sign(X_j - X_i) dt + sqrt(2 nu) dB_i,
/// with the j = i term contributing 0 and, for kernels singular at 0, pairs
/// closer than 1e-8 contributing 0. Noise comes from counter-based
/// per-particle streams, so a fixed seed reproduces positions bit for bit.
ParticleEnsemble simulate_particles(const InteractionKernel& kernel, int n_particles, double nu,
                                    const TimeGrid& times, const InitialDistribution& initial,
                                    std::uint64_t seed);

/// Same march from explicit initial positions, with explicit noise stream ids
/// (stream_ids[i] keys particle i's noise). Permuting initial positions and
/// stream ids together permutes the trajectories identically.
ParticleEnsemble simulate_particles_from(const InteractionKernel& kernel, double nu,
                                         const TimeGrid& times,
                                         const Eigen::VectorXd& initial_positions,
                                         const Eigen::VectorXi& stream_ids, std::uint64_t seed);

/// Mean pair force on each particle, summed in a label-independent order.
/// Direct O(N^2) evaluation; reference implementation for the fast paths.
Eigen::VectorXd pairwise_forces_naive(const InteractionKernel& kernel,
                                      const Eigen::VectorXd& positions);

/// Histogram of the positions on the grid's node-centered cells, normalized
/// to trapezoid mass 1. Throws if no particle lies inside the grid range.
Eigen::VectorXd empirical_density(const Eigen::VectorXd& positions, const SpaceGrid& grid);

}  // namespace mfk
