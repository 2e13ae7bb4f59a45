#include "mfk/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace mfk {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::cubic: return "cubic";
    case KernelKind::opinion_dynamics: return "opinion_dynamics";
    case KernelKind::attraction_repulsion: return "attraction_repulsion";
    case KernelKind::tabulated: return "tabulated";
  }
  throw std::logic_error("unreachable kernel kind");
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "cubic") return KernelKind::cubic;
  if (name == "opinion_dynamics") return KernelKind::opinion_dynamics;
  if (name == "attraction_repulsion") return KernelKind::attraction_repulsion;
  if (name == "tabulated") return KernelKind::tabulated;
  throw std::invalid_argument("unknown kernel kind: " + name);
}

namespace {
constexpr double kOpinionPlateau = 0.4;
constexpr double kOpinionCutoff = 0.6;

double tabulated_eval(const Eigen::VectorXd& radii, const Eigen::VectorXd& vals, double r) {
  // Linear interpolation; constant extrapolation with the end values.
  const int n = static_cast<int>(radii.size());
  if (r <= radii[0]) return vals[0];
  if (r >= radii[n - 1]) return vals[n - 1];
  const double h = radii[1] - radii[0];
  int i = static_cast<int>((r - radii[0]) / h);
  if (i >= n - 1) i = n - 2;
  const double t = (r - radii[i]) / h;
  return (1.0 - t) * vals[i] + t * vals[i + 1];
}
}  // namespace

double InteractionKernel::phi(double r) const {
  switch (kind) {
    case KernelKind::cubic:
      return 3.0 * r * r;
    case KernelKind::opinion_dynamics:
      if (r <= kOpinionPlateau) return 1.0;
      if (r >= kOpinionCutoff) return 0.0;
      return (kOpinionCutoff - r) / (kOpinionCutoff - kOpinionPlateau);
    case KernelKind::attraction_repulsion:
      return r - std::pow(r, -1.5);
    case KernelKind::tabulated:
      return tabulated_eval(tab_radii, tab_values, r);
  }
  throw std::logic_error("unreachable kernel kind");
}

double InteractionKernel::potential(double r) const {
  switch (kind) {
    case KernelKind::cubic:
      return r * r * r;
    case KernelKind::opinion_dynamics: {
      if (r <= kOpinionPlateau) return r;
      const double w = kOpinionCutoff - kOpinionPlateau;
      if (r >= kOpinionCutoff) return kOpinionPlateau + 0.5 * w;
      const double s = r - kOpinionPlateau;
      return kOpinionPlateau + s - 0.5 * s * s / w;
    }
    case KernelKind::attraction_repulsion:
      // Antiderivative of r - r^(-1.5) with the constant fixed at Phi(1) = 0.
      return 0.5 * r * r + 2.0 / std::sqrt(r) - 2.5;
    case KernelKind::tabulated: {
      // Trapezoid integral of the interpolant from 0 to r.
      if (r <= 0) return 0.0;
      const int steps = 256;
      const double h = r / steps;
      double acc = 0.5 * (phi(0.0) + phi(r));
      for (int i = 1; i < steps; ++i) acc += phi(i * h);
      return acc * h;
    }
  }
  throw std::logic_error("unreachable kernel kind");
}

InteractionKernel InteractionKernel::zero() {
  InteractionKernel k;
  k.kind = KernelKind::tabulated;
  k.tab_radii = Eigen::Vector2d(0.0, 1.0);
  k.tab_values = Eigen::Vector2d(0.0, 0.0);
  return k;
}

InteractionKernel InteractionKernel::linear() {
  // Two samples on a span wide enough that the interpolant is phi(r) = r on
  // any grid in practice.
  InteractionKernel k;
  k.kind = KernelKind::tabulated;
  k.tab_radii = Eigen::Vector2d(0.0, 1e6);
  k.tab_values = Eigen::Vector2d(0.0, 1e6);
  return k;
}

InteractionKernel InteractionKernel::builtin(KernelKind kind) {
  if (kind == KernelKind::tabulated)
    throw std::invalid_argument("builtin: tabulated kernels need samples; use from_samples");
  InteractionKernel k;
  k.kind = kind;
  return k;
}

InteractionKernel InteractionKernel::from_samples(Eigen::VectorXd radii, Eigen::VectorXd values) {
  if (radii.size() != values.size() || radii.size() < 2)
    throw std::invalid_argument("from_samples: need >= 2 matching samples");
  const double h = radii[1] - radii[0];
  for (int i = 1; i < radii.size(); ++i)
    if (std::abs(radii[i] - radii[i - 1] - h) > 1e-12 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument("from_samples: radii must be uniformly spaced");
  InteractionKernel k;
  k.kind = KernelKind::tabulated;
  k.tab_radii = std::move(radii);
  k.tab_values = std::move(values);
  return k;
}

Eigen::VectorXd kernel_from_phi(const InteractionKernel& kernel, const SpaceGrid& grid) {
  const int nx = grid.nx;
  const double dx = grid.dx();
  Eigen::VectorXd samples = Eigen::VectorXd::Zero(2 * nx + 1);
  const bool shift = kernel.singular_at_zero();
  for (int k = 1; k <= nx; ++k) {
    const double r = shift ? (k - 0.5) * dx : k * dx;
    const double v = kernel.phi(r);
    if (!std::isfinite(v))
      throw std::invalid_argument("kernel_from_phi: non-finite phi at r = " + std::to_string(r));
    samples[nx + k] = v;
    samples[nx - k] = -v;
  }
  samples[nx] = 0.0;
  return samples;
}

Eigen::VectorXd indicator_potential_samples(double lo, double hi, const SpaceGrid& grid) {
  if (!(0.0 <= lo && lo < hi))
    throw std::invalid_argument("indicator_potential_samples: need 0 <= lo < hi");
  const int nx = grid.nx;
  const double dx = grid.dx();
  Eigen::VectorXd samples(2 * nx + 1);
  for (int k = -nx; k <= nx; ++k) {
    const double r = std::abs(k) * dx;
    samples[nx + k] = std::max(0.0, std::min(r, hi) - lo);
  }
  return samples;
}

}  // namespace mfk
