#pragma once

#include <Eigen/Core>
#include <vector>

#include "mfk/regression.hpp"

namespace mfk {

/// Eigenvalues above eigenvalue_floor() count as the numerically positive
/// spectrum throughout this module.
constexpr double kSpectrumFloorRatio = 1e-14;

/// Eigen-decomposition of A (unweighted, orthonormal eigenvectors) or of the
/// pencil (A, P) (weighted, P-orthonormal eigenvectors), sorted descending.
/// For weighted decompositions, cells whose P entry is zero are removed
/// before solving; their eigenvector rows are zero.
struct SpectralDecomposition {
  bool weighted = false;
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns
  Eigen::VectorXd weight;        // P diagonal (weighted only, full size)
  std::vector<int> retained;     // row indices kept in the weighted solve

  int positive_count() const;
  double eigenvalue_floor() const { return kSpectrumFloorRatio * eigenvalues.maxCoeff(); }
};

struct PicardRow {
  int index;
  double sigma;
  double b_proj;
  double ratio;
};

struct PicardTable {
  bool weighted = false;
  std::vector<PicardRow> rows;
};

/// Symmetric eigendecomposition of A; throws if A deviates from symmetry by
/// more than 1e-10 relative to its largest entry.
SpectralDecomposition svd_unweighted(const Eigen::MatrixXd& A);

/// Generalized problem A c = lambda P c for diagonal P >= 0, solved by the
/// symmetric reduction P^{-1/2} A P^{-1/2} on the cells with P > 0.
/// Throws if a retained diagonal entry is negative.
SpectralDecomposition eig_generalized(const Eigen::MatrixXd& A, const Eigen::VectorXd& P_diag);

PicardTable picard_table(const SpectralDecomposition& decomp, const Eigen::VectorXd& b);

/// c = (A + lambda B)^{-1} b; records the loss and the penalty norm ||c||_B.
CoefficientEstimate tikhonov_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                   const Eigen::MatrixXd& B, double lambda,
                                   const BasisSpec& basis);

struct LCurvePoint {
  double lambda;
  double excess_loss;  // loss(c_lambda) - min loss; the log axis of the curve
  double penalty_norm;
  double curvature;  // three-point discrete curvature; 0 at the ends
};

struct LCurveResult {
  double lambda = 0.0;
  int index = 0;
  std::vector<LCurvePoint> points;
};

/// L-curve corner on (log excess-loss, log penalty-norm): the grid lambda
/// with the largest three-point curvature. The loss axis is shifted by the
/// unregularized minimum so that it is positive; the shift is quadratic in b,
/// which makes the selection invariant under rescaling b. If the excess loss
/// at the smallest lambda is already at round-off, or no point's curvature
/// exceeds 1e-6, there is no corner and the smallest lambda is returned.
/// Curvature ties go to the larger lambda.
LCurveResult lcurve_select(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Eigen::MatrixXd& B, const std::vector<double>& lambda_grid,
                           const BasisSpec& basis);

/// Truncated expansion c = sum_{k<m} eigval_k^{-1} (v_k . b) v_k over the
/// decomposition's leading m eigenpairs (P-inner products come built into the
/// weighted eigenvectors). m must stay within the numerically positive
/// spectrum.
CoefficientEstimate tsvd_solve(const SpectralDecomposition& decomp, const Eigen::VectorXd& b,
                               int m, const BasisSpec& basis);

/// First m eigenvector columns: the coefficient representation of the
/// m-dimensional eigen-subspace.
Eigen::MatrixXd rkhs_subspace(const SpectralDecomposition& decomp, int m);

}  // namespace mfk
