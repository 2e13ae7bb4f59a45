#include "mfk/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfk {

SpaceGrid::SpaceGrid(double x_min_, double x_max_, int nx_) : x_min(x_min_), x_max(x_max_), nx(nx_) {
  if (!(x_min < x_max)) throw std::invalid_argument("SpaceGrid: x_min must be < x_max");
  if (nx < 2) throw std::invalid_argument("SpaceGrid: nx must be >= 2");
}

Eigen::VectorXd SpaceGrid::nodes() const {
  Eigen::VectorXd x(n_nodes());
  for (int i = 0; i < n_nodes(); ++i) x[i] = node(i);
  return x;
}

TimeGrid::TimeGrid(double t_end_, int nt_) : t_end(t_end_), nt(nt_) {
  if (!(t_end > 0)) throw std::invalid_argument("TimeGrid: t_end must be > 0");
  if (nt < 1) throw std::invalid_argument("TimeGrid: nt must be >= 1");
}

SpaceTimeField::SpaceTimeField(SpaceGrid g, TimeGrid t)
    : grid(g), times(t), values(Eigen::MatrixXd::Zero(t.n_snapshots(), g.n_nodes())) {}

SpaceTimeField::SpaceTimeField(SpaceGrid g, TimeGrid t, Eigen::MatrixXd v)
    : grid(g), times(t), values(std::move(v)) {
  if (values.rows() != times.n_snapshots() || values.cols() != grid.n_nodes())
    throw std::invalid_argument("SpaceTimeField: values shape does not match grids");
}

double SpaceTimeField::mass_at(int snapshot) const {
  return trapezoid_integral(values.row(snapshot).transpose(), grid.dx());
}

void SpaceTimeField::validate_density(double mass_tol, double neg_tol) const {
  if (values.minCoeff() < -neg_tol)
    throw std::invalid_argument("SpaceTimeField: negative density below tolerance, min = " +
                                std::to_string(values.minCoeff()));
  for (int k = 0; k < times.n_snapshots(); ++k) {
    const double m = mass_at(k);
    if (std::abs(m - 1.0) > mass_tol)
      throw std::invalid_argument("SpaceTimeField: mass at snapshot " + std::to_string(k) +
                                  " is " + std::to_string(m));
  }
}

double trapezoid_integral(const Eigen::Ref<const Eigen::VectorXd>& samples, double spacing) {
  if (samples.size() < 2) throw std::invalid_argument("trapezoid_integral: need >= 2 samples");
  if (!(spacing > 0)) throw std::invalid_argument("trapezoid_integral: spacing must be > 0");
  const auto n = samples.size();
  return spacing * (samples.sum() - 0.5 * (samples[0] + samples[n - 1]));
}

double riemann_sum(const Eigen::Ref<const Eigen::VectorXd>& samples, double spacing) {
  if (samples.size() < 1) throw std::invalid_argument("riemann_sum: need >= 1 sample");
  if (!(spacing > 0)) throw std::invalid_argument("riemann_sum: spacing must be > 0");
  return spacing * samples.sum();
}

Eigen::VectorXd trapezoid_weights(int n, double spacing) {
  if (n < 2) throw std::invalid_argument("trapezoid_weights: need n >= 2");
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, spacing);
  w[0] = 0.5 * spacing;
  w[n - 1] = 0.5 * spacing;
  return w;
}

Eigen::VectorXd discrete_convolution(const Eigen::Ref<const Eigen::VectorXd>& kernel_samples,
                                     const Eigen::Ref<const Eigen::VectorXd>& field_slice,
                                     double spacing) {
  const int n = static_cast<int>(field_slice.size());
  if (n < 2) throw std::invalid_argument("discrete_convolution: field needs >= 2 samples");
  if (kernel_samples.size() != 2 * n - 1)
    throw std::invalid_argument(
        "discrete_convolution: kernel must cover the full signed offset range "
        "(expected " +
        std::to_string(2 * n - 1) + " samples, got " + std::to_string(kernel_samples.size()) + ")");
  if (!(spacing > 0)) throw std::invalid_argument("discrete_convolution: spacing must be > 0");

  const Eigen::VectorXd w = trapezoid_weights(n, spacing);
  Eigen::VectorXd out(n);
  const int zero = n - 1;  // kernel index of offset 0
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += kernel_samples[zero + i - j] * field_slice[j] * w[j];
    out[i] = acc;
  }
  return out;
}

Eigen::VectorXd finite_difference_1d(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                     double spacing) {
  const auto n = samples.size();
  if (n < 3) throw std::invalid_argument("finite_difference: need >= 3 samples along the axis");
  Eigen::VectorXd d(n);
  const double inv2h = 1.0 / (2.0 * spacing);
  d[0] = (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) * inv2h;
  for (Eigen::Index i = 1; i + 1 < n; ++i) d[i] = (samples[i + 1] - samples[i - 1]) * inv2h;
  d[n - 1] = (3.0 * samples[n - 1] - 4.0 * samples[n - 2] + samples[n - 3]) * inv2h;
  return d;
}

SpaceTimeField finite_difference(const SpaceTimeField& field, Axis axis) {
  SpaceTimeField out(field.grid, field.times);
  if (axis == Axis::space) {
    if (field.grid.n_nodes() < 3)
      throw std::invalid_argument("finite_difference: need >= 3 space nodes");
    for (int k = 0; k < field.times.n_snapshots(); ++k)
      out.values.row(k) = finite_difference_1d(field.values.row(k).transpose(), field.grid.dx()).transpose();
  } else {
    if (field.times.n_snapshots() < 3)
      throw std::invalid_argument("finite_difference: need >= 3 time snapshots");
    for (int i = 0; i < field.grid.n_nodes(); ++i)
      out.values.col(i) = finite_difference_1d(field.values.col(i), field.times.dt());
  }
  return out;
}

}  // namespace mfk
