#pragma once

#include <Eigen/Core>
#include <string>

#include "mfk/grid.hpp"
#include "mfk/kernels.hpp"
#include "mfk/measures.hpp"

namespace mfk {

enum class BasisMode { radial, general };

/// Piecewise-constant indicator basis phi_i = 1_[r_{i-1}, r_i) on a uniform
/// partition, with continuous piecewise-linear antiderivatives Phi_i.
struct BasisSpec {
  Eigen::VectorXd knots;  // n+1 knots, uniform
  BasisMode mode = BasisMode::radial;

  int size() const { return static_cast<int>(knots.size()) - 1; }
  double dr() const { return knots[1] - knots[0]; }
  double lo(int i) const { return knots[i]; }
  double hi(int i) const { return knots[i + 1]; }
  double mid(int i) const { return 0.5 * (knots[i] + knots[i + 1]); }

  /// Indicator value of cell i at r; cells are half-open except the last.
  double eval(int i, double r) const;
  /// Phi_i(r) = int_0^r phi_i for the radial mode (r >= 0); for the general
  /// mode the antiderivative along the signed axis with the same clamp form.
  double antiderivative(int i, double r) const;
  /// Piecewise-constant function with the given coefficients.
  double evaluate(const Eigen::VectorXd& coeffs, double r) const;
};

BasisSpec build_basis(double support_lo, double support_hi, int n, BasisMode mode);

struct RegressionSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd P;  // diagonal of the weighted Gram matrix
  BasisSpec basis;
  double nu = 0.0;
};

enum class EstimateMethod { plain, tikhonov, tsvd };

std::string to_string(EstimateMethod method);

struct CoefficientEstimate {
  Eigen::VectorXd c;
  BasisSpec basis;
  double loss = 0.0;  // c'Ac - 2c'b at the stored system
  EstimateMethod method = EstimateMethod::plain;
  double lambda = 0.0;       // tikhonov
  int truncation = 0;        // tsvd
  double penalty_norm = 0.0; // ||c||_B at the solution (tikhonov)
};

/// Normal matrix A_ij = (1/T) int dt int (K_i * u)(K_j * u) u dx, with the
/// convolutions on uniform node weights so that the result coincides exactly
/// with the kernel-matrix route (see assemble_G / bilinear_form).
Eigen::MatrixXd assemble_A(const SpaceTimeField& u, const BasisSpec& basis);

/// Data-driven loss vector (no true kernel):
///   b_i = -(1/T) int dt int [ du/dt (Phi_i * u) + nu du/dx (K_i * u) ] dx,
/// with second-order finite differences for the data derivatives.
Eigen::VectorXd assemble_b_data(const SpaceTimeField& u, const BasisSpec& basis, double nu);

/// Oracle loss vector from a known kernel: b_i = <<phi_i, phi_true>> by the
/// same double-convolution quadrature as assemble_A.
Eigen::VectorXd assemble_b_oracle(const SpaceTimeField& u, const BasisSpec& basis,
                                  const InteractionKernel& kernel);

struct DiagonalWeight {
  Eigen::VectorXd diag;
  int zero_cells = 0;
};

/// P_ii = int_{cell i} rho dr, the exact integral of the measure's
/// piecewise-linear interpolant over the cell (cell average times dr).
/// Cells with no mass get entry 0 and are counted.
DiagonalWeight assemble_P(const EmpiricalMeasure& measure, const BasisSpec& basis);

/// Least squares c = A^-1 b when cond(A) <= 1e12, otherwise the minimum-norm
/// pseudo-inverse solution (eigenvalues below max/1e12 truncated).
CoefficientEstimate solve_unregularized(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                        const BasisSpec& basis);

double loss_value(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

struct RelativeError {
  double value = 0.0;
  bool absolute = false;  // set when ||phi_true||_{L^2(rho)} = 0
};

/// || phi_hat - phi_true ||_{L^2(rho)} / || phi_true ||_{L^2(rho)} on the
/// measure's axis. Kernels singular at 0 are sampled half a node away.
RelativeError l2rho_error(const CoefficientEstimate& estimate, const InteractionKernel& kernel,
                          const EmpiricalMeasure& measure);

}  // namespace mfk
