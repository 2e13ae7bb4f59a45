#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mfk/particles.hpp"
#include "mfk/rng.hpp"

using namespace mfk;

namespace {

double sample_variance(const Eigen::VectorXd& x) {
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / (x.size() - 1);
}

}  // namespace

TEST_CASE("no interaction and no noise freezes the particles") {
  const TimeGrid times(1.0, 50);
  const ParticleEnsemble ens = simulate_particles(InteractionKernel::zero(), 16, 0.0, times,
                                                  InitialDistribution::gaussian(0.0, 1.0), 3);
  for (int k = 1; k <= times.nt; ++k)
    CHECK((ens.positions.row(k) - ens.positions.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear attraction keeps the stationary variance (moment equation oracle)") {
  // dVar/dt = -2 Var + 2 nu has the fixed point Var = nu; starting there the
  // sample variance should stay put up to Monte Carlo noise.
  const double nu = 0.25;
  const TimeGrid times(1.0, 1000);
  const ParticleEnsemble ens =
      simulate_particles(InteractionKernel::linear(), 10000, nu, times,
                         InitialDistribution::gaussian(0.0, std::sqrt(0.25)), 7);
  const double var = sample_variance(ens.positions.row(times.nt).transpose());
  CHECK(std::abs(var - 0.25) < 0.02);
}

TEST_CASE("fixed seed reproduces positions bit for bit") {
  const TimeGrid times(0.5, 100);
  const auto a = simulate_particles(InteractionKernel::builtin(KernelKind::cubic), 64, 0.1,
                                    times, InitialDistribution::gaussian(0.0, 0.3), 42);
  const auto b = simulate_particles(InteractionKernel::builtin(KernelKind::cubic), 64, 0.1,
                                    times, InitialDistribution::gaussian(0.0, 0.3), 42);
  CHECK((a.positions - b.positions).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("permuting particles and their noise streams permutes trajectories") {
  const int n = 48;
  const TimeGrid times(0.5, 80);
  Eigen::VectorXd x0(n);
  Eigen::VectorXi streams(n);
  for (int i = 0; i < n; ++i) {
    x0[i] = counter_normal(5, i, 999);
    streams[i] = i;
  }
  const auto base = simulate_particles_from(InteractionKernel::builtin(KernelKind::cubic), 0.05,
                                            times, x0, streams, 11);

  // Reverse both the initial positions and the stream ids.
  Eigen::VectorXd x0p(n);
  Eigen::VectorXi streamsp(n);
  for (int i = 0; i < n; ++i) {
    x0p[i] = x0[n - 1 - i];
    streamsp[i] = streams[n - 1 - i];
  }
  const auto perm = simulate_particles_from(InteractionKernel::builtin(KernelKind::cubic), 0.05,
                                            times, x0p, streamsp, 11);
  for (int k = 0; k <= times.nt; ++k)
    for (int i = 0; i < n; ++i) CHECK(perm.positions(k, i) == base.positions(k, n - 1 - i));
}

TEST_CASE("the cubic fast path matches the direct pair sum") {
  const int n = 500;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = 2.0 * counter_uniform(9, 0, i) - 1.0;

  const TimeGrid one_step(1e-3, 1);
  Eigen::VectorXi streams(n);
  std::iota(streams.data(), streams.data() + n, 0);
  const auto ens = simulate_particles_from(InteractionKernel::builtin(KernelKind::cubic), 0.0,
                                           one_step, x, streams, 0);
  const Eigen::VectorXd fast_force =
      (ens.positions.row(1) - ens.positions.row(0)).transpose() / one_step.dt();
  const Eigen::VectorXd naive_force =
      pairwise_forces_naive(InteractionKernel::builtin(KernelKind::cubic), x);
  CHECK((fast_force - naive_force).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("singular kernels skip near-coincident pairs") {
  Eigen::VectorXd x(3);
  x << 0.0, 1e-12, 0.5;
  const Eigen::VectorXd f =
      pairwise_forces_naive(InteractionKernel::builtin(KernelKind::attraction_repulsion), x);
  CHECK(f.allFinite());
}

TEST_CASE("a single in-range particle concentrates in one cell with mass 1") {
  const SpaceGrid grid(-1.0, 1.0, 16);
  Eigen::VectorXd pos(1);
  pos << 0.0;
  const Eigen::VectorXd rho = empirical_density(pos, grid);
  CHECK(trapezoid_integral(rho, grid.dx()) == doctest::Approx(1.0).epsilon(1e-12));
  int nonzero = 0;
  for (int i = 0; i < rho.size(); ++i)
    if (rho[i] != 0.0) ++nonzero;
  CHECK(nonzero == 1);
}

TEST_CASE("uniform samples fill the histogram evenly") {
  const int n = 1000000;
  Eigen::VectorXd pos(n);
  for (int i = 0; i < n; ++i) pos[i] = counter_uniform(123, 0, i);
  const SpaceGrid grid(0.0, 1.0, 10);  // 1e5+ expected per cell keeps 1% at >3 sigma
  const Eigen::VectorXd rho = empirical_density(pos, grid);
  // The two end bins have half the width, hence sqrt(2) more relative noise.
  for (int i = 1; i + 1 < rho.size(); ++i) CHECK(std::abs(rho[i] - 1.0) < 0.01);
  CHECK(std::abs(rho[0] - 1.0) < 0.015);
  CHECK(std::abs(rho[rho.size() - 1] - 1.0) < 0.015);
}

TEST_CASE("gaussian samples reproduce the gaussian density in L1") {
  const int n = 100000;
  Eigen::VectorXd pos(n);
  for (int i = 0; i < n; ++i) pos[i] = counter_normal(77, 0, i);
  const SpaceGrid grid(-8.0, 8.0, 128);  // bin width 1/8 balances noise and bias at this N
  const Eigen::VectorXd rho = empirical_density(pos, grid);
  Eigen::VectorXd diff(grid.n_nodes());
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const double x = grid.node(i);
    diff[i] = std::abs(rho[i] - std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI));
  }
  CHECK(trapezoid_integral(diff, grid.dx()) <= 0.02);
}

TEST_CASE("empirical density rejects fully out-of-range ensembles") {
  const SpaceGrid grid(0.0, 1.0, 8);
  Eigen::VectorXd pos(2);
  pos << -5.0, 7.0;
  CHECK_THROWS_AS(empirical_density(pos, grid), std::invalid_argument);
}
