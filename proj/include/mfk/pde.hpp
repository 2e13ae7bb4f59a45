#pragma once

#include <Eigen/Core>

#include "mfk/grid.hpp"
#include "mfk/kernels.hpp"

namespace mfk {

struct SolverConfig {
  double nu = 0.1;  // diffusion coefficient
  SpaceGrid grid;
  TimeGrid times;
  Eigen::VectorXd initial_density;

  /// Throws unless the initial density is nonnegative with trapezoid mass 1 +- 1e-8.
  void validate() const;
};

/// Solves du/dt = nu * u_xx + d/dx [ u * (K*u) ] on the grid with zero total
/// flux at both ends, K(x) = phi(|x|) sign(x).
///
/// Finite volume on the grid nodes (half cells at the boundary): diffusion by
/// Crank-Nicolson, drift flux central, advanced by Adams-Bashforth 2 with a
/// trapezoidal predictor-corrector first step. Mass is conserved to round-off
/// per step; the explicit drift requires dt * max|K*u| / dx <= 1 and the
/// solve aborts naming the admissible dt otherwise.
SpaceTimeField solve_mean_field(const InteractionKernel& kernel, const SolverConfig& config);

/// Runs the solver for t_relax starting from u0 and returns the final
/// snapshot, used to produce numerically stationary states.
Eigen::VectorXd relax_to_stationary(const InteractionKernel& kernel, double nu,
                                    const SpaceGrid& grid, double t_relax, int nt_relax,
                                    const Eigen::VectorXd& u0);

/// Gaussian density truncated to the grid, normalized to trapezoid mass 1.
Eigen::VectorXd gaussian_density(const SpaceGrid& grid, double mean, double sigma);

/// Constant density on the grid with trapezoid mass 1.
Eigen::VectorXd uniform_density(const SpaceGrid& grid);

double density_mean(const Eigen::Ref<const Eigen::VectorXd>& density, const SpaceGrid& grid);
double density_variance(const Eigen::Ref<const Eigen::VectorXd>& density, const SpaceGrid& grid);

}  // namespace mfk
