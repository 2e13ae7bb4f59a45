#pragma once

#include <Eigen/Core>

namespace mfk {

/// Uniform spatial grid on [x_min, x_max] with nx cells (nx+1 nodes).
struct SpaceGrid {
  double x_min = 0.0;
  double x_max = 1.0;
  int nx = 2;

  SpaceGrid() = default;
  SpaceGrid(double x_min, double x_max, int nx);

  double dx() const { return (x_max - x_min) / nx; }
  int n_nodes() const { return nx + 1; }
  double node(int i) const { return x_min + i * dx(); }
  Eigen::VectorXd nodes() const;

  bool operator==(const SpaceGrid&) const = default;
};

/// Uniform time grid on [0, t_end] with nt steps (nt+1 snapshots).
struct TimeGrid {
  double t_end = 1.0;
  int nt = 1;

  TimeGrid() = default;
  TimeGrid(double t_end, int nt);

  double dt() const { return t_end / nt; }
  int n_snapshots() const { return nt + 1; }
  double time(int k) const { return k * dt(); }

  bool operator==(const TimeGrid&) const = default;
};

enum class Axis { space, time };

/// A scalar field on a space-time grid, values indexed [snapshot, node].
/// Used both for probability densities (the data) and for derived fields
/// such as finite-difference derivatives; density semantics are enforced
/// by validate_density() where a module requires them.
struct SpaceTimeField {
  SpaceGrid grid;
  TimeGrid times;
  Eigen::MatrixXd values;  // (nt+1) x (nx+1)

  SpaceTimeField() = default;
  SpaceTimeField(SpaceGrid g, TimeGrid t);
  SpaceTimeField(SpaceGrid g, TimeGrid t, Eigen::MatrixXd v);

  double mass_at(int snapshot) const;
  double max_value() const { return values.maxCoeff(); }

  /// Checks values >= -neg_tol and trapezoid mass within mass_tol of 1 at
  /// every snapshot; throws std::invalid_argument otherwise.
  void validate_density(double mass_tol = 1e-6, double neg_tol = 1e-12) const;
};

/// Composite trapezoid rule; requires >= 2 samples and spacing > 0.
double trapezoid_integral(const Eigen::Ref<const Eigen::VectorXd>& samples, double spacing);

/// Uniform-weight Riemann sum, spacing * sum(samples).
double riemann_sum(const Eigen::Ref<const Eigen::VectorXd>& samples, double spacing);

/// Trapezoid weight vector (h/2, h, ..., h, h/2) for n samples.
Eigen::VectorXd trapezoid_weights(int n, double spacing);

/// (K*u)(x_i) = sum_j K(x_i - x_j) u(x_j) w_j with trapezoid weights w.
/// kernel_samples live on the signed offset grid of the field's spacing and
/// must cover the full offset range: size == 2*field_slice.size() - 1, with
/// index nx corresponding to offset 0.
Eigen::VectorXd discrete_convolution(const Eigen::Ref<const Eigen::VectorXd>& kernel_samples,
                                     const Eigen::Ref<const Eigen::VectorXd>& field_slice,
                                     double spacing);

/// Second-order finite differences along one axis: central in the interior,
/// one-sided second-order at the two boundary indices.
SpaceTimeField finite_difference(const SpaceTimeField& field, Axis axis);

/// Same stencils applied to a single sampled sequence.
Eigen::VectorXd finite_difference_1d(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                     double spacing);

}  // namespace mfk
