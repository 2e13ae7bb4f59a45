#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mfk/grid.hpp"

namespace mfk {

/// Time-averaged pair-difference density on a uniform axis: signed offsets x
/// for the general case, radii r >= 0 for the radial case. The support mask
/// marks nodes with density above support_threshold.
struct EmpiricalMeasure {
  Eigen::VectorXd axis;
  Eigen::VectorXd density;
  Eigen::Array<bool, Eigen::Dynamic, 1> support_mask;
  double support_threshold = 0.0;
  bool radial = false;

  double spacing() const { return axis[1] - axis[0]; }
  double mass() const { return trapezoid_integral(density, spacing()); }
  /// Piecewise-linear interpolant of the sampled density.
  double density_at(double x) const;
  /// Exact integral of the interpolant over [a, b] (clipped to the axis).
  double integral(double a, double b) const;
};

enum class KernelMatrixKind { G_bar, R_bar, F_bar, Q_bar };

std::string to_string(KernelMatrixKind kind);
KernelMatrixKind kernel_matrix_kind_from_string(const std::string& name);

/// A discretized symmetric integral kernel sampled on axis x axis.
struct KernelMatrix {
  KernelMatrixKind kind = KernelMatrixKind::F_bar;
  Eigen::VectorXd axis;
  Eigen::MatrixXd values;
  double time_horizon = 1.0;

  int size() const { return static_cast<int>(axis.size()); }
};

struct SupportInterval {
  double lo = 0.0, hi = 0.0;
  int index_lo = 0, index_hi = 0;
};

constexpr double kDefaultSupportRatio = 1e-8;  // threshold = ratio * max(density)

/// rho(x) = (1/T) int dt int u(y - x, t) u(y, t) dy on the signed offset grid
/// of u. The discrete correlation is averaged with its mirror (both are
/// quadratures of the same integral) so rho(x) = rho(-x) at round-off, then
/// normalized to trapezoid mass 1. A raw mass further than 2% from 1 is
/// rejected as invalid data.
EmpiricalMeasure compute_rho_general(const SpaceTimeField& u);

/// Radial fold of the general measure: rho(r) = rho_gen(r) + rho_gen(-r) for
/// r > 0 and 2 rho_gen(0) at r = 0, on the nonnegative offset grid.
EmpiricalMeasure compute_rho_radial(const SpaceTimeField& u);

/// Smallest closed interval of axis nodes with density > threshold; updates
/// the measure's mask and stored threshold. Throws if the support is empty.
SupportInterval support_of(EmpiricalMeasure& measure, double threshold);

/// F(y, z) = (1/T) int dt int u(x - y, t) u(x - z, t) u(x, t) dx evaluated on
/// the given offsets (each a node multiple of the grid spacing). Symmetric
/// and positive semidefinite by construction.
KernelMatrix assemble_F(const SpaceTimeField& u, const Eigen::VectorXd& offsets);

/// Radial kernel on r_values >= 0 via the four-term identity
///   G(r, s) = F(r, s) - F(r, -s) - F(-r, s) + F(-r, -s),
/// assembled in the factored form sum_x u(x) [u(x-r) - u(x+r)][u(x-s) - u(x+s)]
/// which makes positive semidefiniteness exact.
KernelMatrix assemble_G(const SpaceTimeField& u, const Eigen::VectorXd& r_values);

struct WeightedKernel {
  KernelMatrix matrix;
  int masked_nodes = 0;  // axis nodes where the density was at or below threshold
};

/// R(r, s) = G(r, s) / (rho(r) rho(s)) on the support, 0 elsewhere
/// (and Q from F in the general case). Off-support divisions are masked to
/// zero and counted.
WeightedKernel weight_kernel(const KernelMatrix& base, const EmpiricalMeasure& measure);

/// Closed forms for data in the Gaussian stationary state with standard
/// deviation sigma (u = N(0, sigma^2)):
///   rho(x) = exp(-x^2 / (4 sigma^2)) / (2 sigma sqrt(pi))
///   F(x,y) = exp(-(x^2 + y^2 - x y) / (3 sigma^2)) / (2 sqrt(3) pi sigma^2)
struct GaussianClosedForms {
  double sigma = 1.0;
  double u(double x) const;
  double rho(double x) const;
  double rho_radial(double r) const;
  double F(double x, double y) const;
};
GaussianClosedForms gaussian_closed_forms(double nu);

/// Closed forms for data in the Cauchy stationary state u = 1 / (pi (1+x^2)).
struct CauchyClosedForms {
  double u(double x) const;
  double rho(double x) const;
  double F(double x, double y) const;
};
CauchyClosedForms cauchy_closed_forms();

/// Bilinear form of two functions sampled on the kernel's axis,
/// sum_{k,l} h^2 f_k K(k,l) g_l with uniform node weight h.
double bilinear_form(const KernelMatrix& kernel, const Eigen::VectorXd& f,
                     const Eigen::VectorXd& g);

/// Same bilinear form through a weighted kernel: f' diag(rho) K diag(rho) g.
double bilinear_form_weighted(const KernelMatrix& kernel, const EmpiricalMeasure& measure,
                              const Eigen::VectorXd& f, const Eigen::VectorXd& g);

/// Weighted norm ||f||_{L^2(rho)} by trapezoid quadrature on the axis.
double l2rho_norm(const EmpiricalMeasure& measure, const Eigen::VectorXd& f);

}  // namespace mfk
