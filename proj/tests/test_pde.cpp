#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfk/pde.hpp"

using namespace mfk;

namespace {

SolverConfig heat_config(double nu, double sigma0) {
  SolverConfig cfg;
  cfg.nu = nu;
  cfg.grid = SpaceGrid(-8.0, 8.0, 256);
  cfg.times = TimeGrid(1.0, 500);
  cfg.initial_density = gaussian_density(cfg.grid, 0.0, sigma0);
  return cfg;
}

SolverConfig cubic_config(int nx, int nt) {
  SolverConfig cfg;
  cfg.nu = 0.025;
  cfg.grid = SpaceGrid(-1.0, 1.0, nx);
  cfg.times = TimeGrid(1.0, nt);
  cfg.initial_density = gaussian_density(cfg.grid, 0.0, 0.14);
  return cfg;
}

double l1_distance_on_shared_nodes(const SpaceTimeField& coarse, const SpaceTimeField& fine) {
  // Nested grids over the same interval: fine has an integer refinement ratio.
  const int ratio = fine.grid.nx / coarse.grid.nx;
  REQUIRE(fine.grid.nx == coarse.grid.nx * ratio);
  Eigen::VectorXd diff(coarse.grid.n_nodes());
  const int last_c = coarse.times.nt, last_f = fine.times.nt;
  for (int i = 0; i < coarse.grid.n_nodes(); ++i)
    diff[i] = std::abs(coarse.values(last_c, i) - fine.values(last_f, i * ratio));
  return trapezoid_integral(diff, coarse.grid.dx());
}

}  // namespace

TEST_CASE("pure diffusion grows the variance like a heat kernel") {
  const double nu = 0.25, sigma0 = 0.5;
  const SolverConfig cfg = heat_config(nu, sigma0);
  const SpaceTimeField u = solve_mean_field(InteractionKernel::zero(), cfg);
  for (int k : {100, 250, 500}) {
    const double t = cfg.times.time(k);
    const double expected = sigma0 * sigma0 + 2.0 * nu * t;
    const double got = density_variance(u.values.row(k).transpose(), cfg.grid);
    CHECK(std::abs(got - expected) / expected < 0.02);
  }
}

TEST_CASE("mass conservation holds per step to 1e-10") {
  const SolverConfig cfg = cubic_config(128, 400);
  const SpaceTimeField u =
      solve_mean_field(InteractionKernel::builtin(KernelKind::cubic), cfg);
  for (int k = 0; k <= cfg.times.nt; ++k) CHECK(std::abs(u.mass_at(k) - 1.0) < 1e-10);
  CHECK(u.values.minCoeff() >= 0.0);  // tiny negatives are clamped at each step
}

TEST_CASE("self-convergence of the cubic example at second order") {
  const SpaceTimeField coarse =
      solve_mean_field(InteractionKernel::builtin(KernelKind::cubic), cubic_config(64, 250));
  const SpaceTimeField medium =
      solve_mean_field(InteractionKernel::builtin(KernelKind::cubic), cubic_config(128, 500));
  const SpaceTimeField fine =
      solve_mean_field(InteractionKernel::builtin(KernelKind::cubic), cubic_config(256, 1000));
  const double e1 = l1_distance_on_shared_nodes(coarse, medium);
  const double e2 = l1_distance_on_shared_nodes(medium, fine);
  CHECK(e2 > 0.0);
  CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("linear attraction has a gaussian stationary state with variance nu") {
  // Long-time integration from a deliberately wrong width; the fixed point
  // pins the convention: stationary variance equals the diffusion
  // coefficient.
  const double nu = 0.09;
  const SpaceGrid grid(-2.0, 2.0, 256);
  const Eigen::VectorXd u0 = gaussian_density(grid, 0.0, 0.5);
  const Eigen::VectorXd stat =
      relax_to_stationary(InteractionKernel::linear(), nu, grid, 12.0, 3000, u0);
  const double var = density_variance(stat, grid);
  CHECK(std::abs(var - nu) / nu < 0.02);

  // Restarting from the computed stationary state, the solution barely moves.
  SolverConfig cfg;
  cfg.nu = nu;
  cfg.grid = grid;
  cfg.times = TimeGrid(1.0, 1000);
  cfg.initial_density = stat;
  const SpaceTimeField u = solve_mean_field(InteractionKernel::linear(), cfg);
  double drift = 0.0;
  for (int k = 0; k <= cfg.times.nt; ++k)
    drift = std::max(drift, (u.values.row(k) - u.values.row(0)).cwiseAbs().maxCoeff());
  CHECK(drift <= 1e-3);
}

TEST_CASE("the drift CFL violation names the admissible dt") {
  Eigen::Vector2d radii(0.0, 100.0), values(0.0, 5000.0);  // phi(r) = 50 r
  const InteractionKernel strong = InteractionKernel::from_samples(radii, values);
  SolverConfig cfg;
  cfg.nu = 0.01;
  cfg.grid = SpaceGrid(-1.0, 1.0, 32);
  cfg.times = TimeGrid(1.0, 20);  // dt far above dx / max|K*u|
  cfg.initial_density = gaussian_density(cfg.grid, 0.0, 0.3);
  try {
    solve_mean_field(strong, cfg);
    FAIL("expected a CFL error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("dt must be <=") != std::string::npos);
  }
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.nu = 0.1;
  cfg.grid = SpaceGrid(-1.0, 1.0, 16);
  cfg.times = TimeGrid(1.0, 10);
  cfg.initial_density = Eigen::VectorXd::Ones(cfg.grid.n_nodes());  // mass 2
  CHECK_THROWS_AS(solve_mean_field(InteractionKernel::zero(), cfg), std::invalid_argument);
  cfg.initial_density = uniform_density(cfg.grid);
  cfg.initial_density[3] = -0.5;
  CHECK_THROWS_AS(solve_mean_field(InteractionKernel::zero(), cfg), std::invalid_argument);
}

TEST_CASE("helper densities are normalized") {
  const SpaceGrid grid(-3.0, 3.0, 100);
  CHECK(trapezoid_integral(gaussian_density(grid, 0.2, 0.4), grid.dx()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trapezoid_integral(uniform_density(grid), grid.dx()) ==
        doctest::Approx(1.0).epsilon(1e-12));
}
