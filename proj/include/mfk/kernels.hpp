#pragma once

#include <Eigen/Core>
#include <string>

#include "mfk/grid.hpp"

namespace mfk {

enum class KernelKind { cubic, opinion_dynamics, attraction_repulsion, tabulated };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Radial interaction law phi(r) for r >= 0 and its potential Phi(r).
/// In one dimension the induced pair kernel is K(x) = phi(|x|) * sign(x).
///
/// Built-in kinds:
///   cubic                 phi(r) = 3 r^2
///   opinion_dynamics      phi(r) = 1 on [0, 0.4], linear down to 0 at 0.6
///   attraction_repulsion  phi(r) = r - r^(-1.5), singular at r = 0
///
/// The potential is the antiderivative of phi with Phi(0) = 0, except for
/// attraction_repulsion whose phi is not integrable at 0; there the constant
/// is fixed by Phi(1) = 0 (kernels determine potentials only up to a constant).
struct InteractionKernel {
  KernelKind kind = KernelKind::tabulated;

  // For tabulated kernels: samples of phi at uniformly spaced radii.
  Eigen::VectorXd tab_radii;
  Eigen::VectorXd tab_values;

  double phi(double r) const;
  double potential(double r) const;
  bool singular_at_zero() const { return kind == KernelKind::attraction_repulsion; }

  static InteractionKernel zero();
  static InteractionKernel linear();  // phi(r) = r; K(x) = x
  static InteractionKernel builtin(KernelKind kind);
  static InteractionKernel from_samples(Eigen::VectorXd radii, Eigen::VectorXd values);
};

/// Samples K(x) = phi(|x|) sign(x) on the signed offset grid of `grid`
/// (2*nx + 1 samples, index nx = offset 0). Odd by construction, K(0) = 0.
/// Kernels singular at r = 0 are evaluated at cell midpoints instead of
/// nodes so that r = 0 is never touched; any NaN sample throws.
Eigen::VectorXd kernel_from_phi(const InteractionKernel& kernel, const SpaceGrid& grid);

/// Even samples Psi(x) = Phi(|x|) of the basis-cell antiderivative
/// Phi(r) = length([lo, hi] intersected with [0, r]) on the same offset grid.
/// Used by the loss-vector assembly, where the potential of an indicator
/// basis function is needed.
Eigen::VectorXd indicator_potential_samples(double lo, double hi, const SpaceGrid& grid);

}  // namespace mfk
