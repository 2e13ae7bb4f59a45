#include "mfk/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfk/rng.hpp"

namespace mfk {

namespace {

constexpr double kSingularCutoff = 1e-8;
constexpr std::uint64_t kInitStep = 0x4000000000000000ULL;

// Summation over j runs in position-sorted order so the result does not
// depend on particle labels (exchangeability holds bitwise).
Eigen::VectorXd forces_generic(const InteractionKernel& kernel, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return x[a] < x[b]; });

  const bool singular = kernel.singular_at_zero();
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int jj = 0; jj < n; ++jj) {
      const int j = order[jj];
      const double d = x[j] - x[i];
      const double r = std::abs(d);
      if (r == 0.0) continue;
      if (singular && r < kSingularCutoff) continue;
      acc += kernel.phi(r) * (d > 0 ? 1.0 : -1.0);
    }
    f[i] = acc / n;
  }
  return f;
}

// phi(r) = 3 r^2 makes the pair sum separable over the sorted positions:
//   sum_j (x_j - x_i) |x_j - x_i| = [right sum of squares] - [left sum],
// expanded through prefix sums of x and x^2. O(N log N).
Eigen::VectorXd forces_cubic(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd sorted = x;
  std::sort(sorted.data(), sorted.data() + n);
  Eigen::VectorXd s1(n + 1), s2(n + 1);
  s1[0] = s2[0] = 0.0;
  for (int k = 0; k < n; ++k) {
    s1[k + 1] = s1[k] + sorted[k];
    s2[k + 1] = s2[k] + sorted[k] * sorted[k];
  }
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) {
    const double y = x[i];
    const int k = static_cast<int>(std::lower_bound(sorted.data(), sorted.data() + n, y) -
                                   sorted.data());
    const double right = (s2[n] - s2[k]) - 2.0 * y * (s1[n] - s1[k]) + (n - k) * y * y;
    const double left = k * y * y - 2.0 * y * s1[k] + s2[k];
    f[i] = 3.0 * (right - left) / n;
  }
  return f;
}

// Tabulated phi(r) = slope * r collapses the pair sum to the ensemble mean:
// (1/N) sum_j slope (x_j - x_i) = slope (mean - x_i). Valid while every pair
// distance stays inside the tabulated span.
bool is_linear_table(const InteractionKernel& kernel, double* slope) {
  if (kernel.kind != KernelKind::tabulated || kernel.tab_radii.size() != 2) return false;
  if (kernel.tab_radii[0] != 0.0 || kernel.tab_values[0] != 0.0) return false;
  *slope = kernel.tab_values[1] / kernel.tab_radii[1];
  return true;
}

Eigen::VectorXd forces_linear(const Eigen::VectorXd& x, double slope) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd sorted = x;
  std::sort(sorted.data(), sorted.data() + n);  // label-independent summation
  const double mean = sorted.sum() / n;
  return slope * (Eigen::VectorXd::Constant(n, mean) - x);
}

Eigen::VectorXd forces(const InteractionKernel& kernel, const Eigen::VectorXd& x) {
  if (kernel.kind == KernelKind::cubic) return forces_cubic(x);
  double slope = 0.0;
  if (is_linear_table(kernel, &slope) &&
      x.maxCoeff() - x.minCoeff() <= kernel.tab_radii[1])
    return forces_linear(x, slope);
  return forces_generic(kernel, x);
}

}  // namespace

Eigen::VectorXd pairwise_forces_naive(const InteractionKernel& kernel,
                                      const Eigen::VectorXd& positions) {
  return forces_generic(kernel, positions);
}

ParticleEnsemble simulate_particles_from(const InteractionKernel& kernel, double nu,
                                         const TimeGrid& times,
                                         const Eigen::VectorXd& initial_positions,
                                         const Eigen::VectorXi& stream_ids, std::uint64_t seed) {
  const int n = static_cast<int>(initial_positions.size());
  if (n < 2) throw std::invalid_argument("simulate_particles: need N >= 2");
  if (stream_ids.size() != n)
    throw std::invalid_argument("simulate_particles: stream ids must match particle count");
  if (nu < 0) throw std::invalid_argument("simulate_particles: nu must be >= 0");

  const double dt = times.dt();
  const double noise_scale = std::sqrt(2.0 * nu * dt);

  ParticleEnsemble ens;
  ens.n_particles = n;
  ens.nu = nu;
  ens.seed = seed;
  ens.positions.resize(times.n_snapshots(), n);
  Eigen::VectorXd x = initial_positions;
  ens.positions.row(0) = x.transpose();

  for (int step = 0; step < times.nt; ++step) {
    const Eigen::VectorXd f = forces(kernel, x);
    for (int i = 0; i < n; ++i) {
      const double noise =
          nu > 0 ? noise_scale * counter_normal(seed, static_cast<std::uint64_t>(stream_ids[i]),
                                                static_cast<std::uint64_t>(step))
                 : 0.0;
      x[i] += dt * f[i] + noise;
      if (!std::isfinite(x[i]))
        throw std::runtime_error("simulate_particles: particle " + std::to_string(i) +
                                 " diverged at step " + std::to_string(step));
    }
    ens.positions.row(step + 1) = x.transpose();
  }
  return ens;
}

ParticleEnsemble simulate_particles(const InteractionKernel& kernel, int n_particles, double nu,
                                    const TimeGrid& times, const InitialDistribution& initial,
                                    std::uint64_t seed) {
  if (n_particles < 2) throw std::invalid_argument("simulate_particles: need N >= 2");
  Eigen::VectorXd x0(n_particles);
  for (int i = 0; i < n_particles; ++i) {
    const auto stream = static_cast<std::uint64_t>(i);
    if (initial.kind == InitialDistribution::Kind::gaussian) {
      x0[i] = initial.a + initial.b * counter_normal(seed, stream, kInitStep);
    } else {
      x0[i] = initial.a + (initial.b - initial.a) * counter_uniform(seed, stream, kInitStep);
    }
  }
  Eigen::VectorXi streams(n_particles);
  for (int i = 0; i < n_particles; ++i) streams[i] = i;
  return simulate_particles_from(kernel, nu, times, x0, streams, seed);
}

Eigen::VectorXd empirical_density(const Eigen::VectorXd& positions, const SpaceGrid& grid) {
  const int n = grid.n_nodes();
  const double dx = grid.dx();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
  long inside = 0;
  for (int p = 0; p < positions.size(); ++p) {
    const double x = positions[p];
    if (x < grid.x_min || x > grid.x_max) continue;
    int i = static_cast<int>(std::floor((x - grid.x_min) / dx + 0.5));
    i = std::min(std::max(i, 0), n - 1);
    counts[i] += 1.0;
    ++inside;
  }
  if (inside == 0) throw std::invalid_argument("empirical_density: no particle inside the grid");

  // Node-centered bins have width dx (half width at the two ends), which is
  // exactly the trapezoid weight, so count/width normalizes cleanly.
  Eigen::VectorXd density(n);
  for (int i = 0; i < n; ++i) {
    const double width = (i == 0 || i == n - 1) ? 0.5 * dx : dx;
    density[i] = counts[i] / (static_cast<double>(positions.size()) * width);
  }
  const double mass = trapezoid_integral(density, dx);
  return density / mass;
}

}  // namespace mfk
