#include "mfk/pde.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfk {

void SolverConfig::validate() const {
  if (!(nu > 0)) throw std::invalid_argument("SolverConfig: nu must be > 0");
  if (initial_density.size() != grid.n_nodes())
    throw std::invalid_argument("SolverConfig: initial density size does not match grid");
  if (initial_density.minCoeff() < 0)
    throw std::invalid_argument("SolverConfig: initial density must be nonnegative");
  const double m = trapezoid_integral(initial_density, grid.dx());
  if (std::abs(m - 1.0) > 1e-8)
    throw std::invalid_argument("SolverConfig: initial mass is " + std::to_string(m));
}

namespace {

// Tridiagonal factorization of I - a*L, where L is the zero-flux finite
// volume Laplacian on the grid nodes. The matrix is constant over the march.
struct DiffusionSolver {
  Eigen::VectorXd diag, lower, upper, cp;  // cp: forward-sweep coefficients
  double a = 0;                            // nu * dt / 2
  int n = 0;
  double inv_dx2 = 0;

  DiffusionSolver(int n_nodes, double dx, double a_) : a(a_), n(n_nodes) {
    inv_dx2 = 1.0 / (dx * dx);
    diag.resize(n);
    lower = Eigen::VectorXd::Zero(n);
    upper = Eigen::VectorXd::Zero(n);
    // Interior rows: L = (u_{i+1} - 2u_i + u_{i-1}) / dx^2.
    // Boundary rows have half cells: L_0 = 2(u_1 - u_0)/dx^2, same mirrored.
    for (int i = 0; i < n; ++i) {
      if (i == 0) {
        diag[i] = 1.0 + 2.0 * a * inv_dx2;
        upper[i] = -2.0 * a * inv_dx2;
      } else if (i == n - 1) {
        diag[i] = 1.0 + 2.0 * a * inv_dx2;
        lower[i] = -2.0 * a * inv_dx2;
      } else {
        diag[i] = 1.0 + 2.0 * a * inv_dx2;
        lower[i] = -a * inv_dx2;
        upper[i] = -a * inv_dx2;
      }
    }
    cp.resize(n);
    cp[0] = upper[0] / diag[0];
    for (int i = 1; i < n; ++i) cp[i] = upper[i] / (diag[i] - lower[i] * cp[i - 1]);
  }

  // Applies L to u (used for the explicit Crank-Nicolson half).
  Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(n);
    out[0] = 2.0 * (u[1] - u[0]) * inv_dx2;
    for (int i = 1; i < n - 1; ++i) out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv_dx2;
    return out;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd d(n), x(n);
    d[0] = rhs[0] / diag[0];
    for (int i = 1; i < n; ++i)
      d[i] = (rhs[i] - lower[i] * d[i - 1]) / (diag[i] - lower[i] * cp[i - 1]);
    x[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = d[i] - cp[i] * x[i + 1];
    return x;
  }
};

// Drift divergence d/dx [u * v] with central face fluxes and zero end flux,
// v = K*u evaluated at the nodes. Faces where either side is at tail level
// (below 1e-8 of the peak) switch to the donor-cell flux, which cannot drive
// near-zero values negative; the weight of those faces keeps the switch
// invisible at the accuracy of any integral of u.
Eigen::VectorXd drift_divergence(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double dx) {
  const int n = static_cast<int>(u.size());
  const double tail = 1e-8 * u.maxCoeff();
  Eigen::VectorXd flux(n - 1);  // face i+1/2 between nodes i, i+1
  for (int i = 0; i < n - 1; ++i) {
    const double vf = 0.5 * (v[i] + v[i + 1]);
    if (u[i] < tail || u[i + 1] < tail) {
      // Characteristic speed of du/dt = d(v u)/dx is -v.
      flux[i] = vf * (vf < 0 ? u[i] : u[i + 1]);
    } else {
      flux[i] = vf * 0.5 * (u[i] + u[i + 1]);
    }
  }
  Eigen::VectorXd out(n);
  out[0] = flux[0] / (0.5 * dx);
  for (int i = 1; i < n - 1; ++i) out[i] = (flux[i] - flux[i - 1]) / dx;
  out[n - 1] = -flux[n - 2] / (0.5 * dx);
  return out;
}

Eigen::VectorXd clamp_density(Eigen::VectorXd u, int step, double target_mass, double dx) {
  if (!u.allFinite())
    throw std::runtime_error("solve_mean_field: non-finite density at step " + std::to_string(step));
  const double min = u.minCoeff();
  if (min < -1e-10 * std::max(1.0, u.maxCoeff()))
    throw std::runtime_error("solve_mean_field: density fell to " + std::to_string(min) +
                             " at step " + std::to_string(step));
  u = u.cwiseMax(0.0);
  // Remove the (round-off scale) mass added by the clamp.
  const double mass = trapezoid_integral(u, dx);
  if (mass > 0) u *= target_mass / mass;
  return u;
}

}  // namespace

SpaceTimeField solve_mean_field(const InteractionKernel& kernel, const SolverConfig& config) {
  config.validate();
  const SpaceGrid& grid = config.grid;
  const TimeGrid& times = config.times;
  const double dx = grid.dx();
  const double dt = times.dt();
  const int n = grid.n_nodes();

  const Eigen::VectorXd ksamples = kernel_from_phi(kernel, grid);
  const DiffusionSolver diffusion(n, dx, 0.5 * config.nu * dt);

  SpaceTimeField field(grid, times);
  Eigen::VectorXd u = config.initial_density;
  field.values.row(0) = u.transpose();

  auto velocity = [&](const Eigen::VectorXd& w) {
    return discrete_convolution(ksamples, w.cwiseMax(0.0), dx);
  };
  auto check_cfl = [&](const Eigen::VectorXd& v, int step) {
    const double vmax = v.cwiseAbs().maxCoeff();
    if (dt * vmax / dx > 1.0)
      throw std::runtime_error("solve_mean_field: drift CFL violated at step " +
                               std::to_string(step) + "; dt must be <= " +
                               std::to_string(dx / vmax));
  };

  const double target_mass = trapezoid_integral(u, dx);
  for (int step = 0; step < times.nt; ++step) {
    // Trapezoidal predictor-corrector for the drift, Crank-Nicolson for the
    // diffusion: second order in both dx and dt.
    const Eigen::VectorXd v = velocity(u);
    check_cfl(v, step);
    const Eigen::VectorXd drift = drift_divergence(u, v, dx);
    const Eigen::VectorXd half_diff = 0.5 * config.nu * dt * diffusion.apply_laplacian(u);

    const Eigen::VectorXd pred =
        diffusion.solve(u + half_diff + dt * drift).cwiseMax(0.0);
    const Eigen::VectorXd v1 = velocity(pred);
    check_cfl(v1, step);
    const Eigen::VectorXd drift1 = drift_divergence(pred, v1, dx);
    Eigen::VectorXd unew = diffusion.solve(u + half_diff + 0.5 * dt * (drift + drift1));

    u = clamp_density(std::move(unew), step + 1, target_mass, dx);
    field.values.row(step + 1) = u.transpose();
  }
  return field;
}

Eigen::VectorXd relax_to_stationary(const InteractionKernel& kernel, double nu,
                                    const SpaceGrid& grid, double t_relax, int nt_relax,
                                    const Eigen::VectorXd& u0) {
  SolverConfig cfg;
  cfg.nu = nu;
  cfg.grid = grid;
  cfg.times = TimeGrid(t_relax, nt_relax);
  cfg.initial_density = u0;
  const SpaceTimeField f = solve_mean_field(kernel, cfg);
  return f.values.row(f.times.nt).transpose();
}

Eigen::VectorXd gaussian_density(const SpaceGrid& grid, double mean, double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("gaussian_density: sigma must be > 0");
  Eigen::VectorXd u(grid.n_nodes());
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const double z = (grid.node(i) - mean) / sigma;
    u[i] = std::exp(-0.5 * z * z);
  }
  return u / trapezoid_integral(u, grid.dx());
}

Eigen::VectorXd uniform_density(const SpaceGrid& grid) {
  Eigen::VectorXd u = Eigen::VectorXd::Ones(grid.n_nodes());
  return u / trapezoid_integral(u, grid.dx());
}

double density_mean(const Eigen::Ref<const Eigen::VectorXd>& density, const SpaceGrid& grid) {
  Eigen::VectorXd xw = density.cwiseProduct(grid.nodes());
  return trapezoid_integral(xw, grid.dx()) / trapezoid_integral(density, grid.dx());
}

double density_variance(const Eigen::Ref<const Eigen::VectorXd>& density, const SpaceGrid& grid) {
  const double m = density_mean(density, grid);
  Eigen::VectorXd x = grid.nodes();
  Eigen::VectorXd w = density.cwiseProduct((x.array() - m).square().matrix());
  return trapezoid_integral(w, grid.dx()) / trapezoid_integral(density, grid.dx());
}

}  // namespace mfk
