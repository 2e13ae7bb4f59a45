#include "mfk/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfk {

namespace {

void sort_descending(Eigen::VectorXd& evals, Eigen::MatrixXd& evecs) {
  const int n = static_cast<int>(evals.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return evals[a] > evals[b]; });
  Eigen::VectorXd sv(n);
  Eigen::MatrixXd sm(evecs.rows(), n);
  for (int i = 0; i < n; ++i) {
    sv[i] = evals[order[i]];
    sm.col(i) = evecs.col(order[i]);
  }
  evals = sv;
  evecs = sm;
}

}  // namespace

int SpectralDecomposition::positive_count() const {
  const double floor = eigenvalue_floor();
  int count = 0;
  for (int i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues[i] > floor) ++count;
  return count;
}

SpectralDecomposition svd_unweighted(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("svd_unweighted: matrix must be square");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("svd_unweighted: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (A + A.transpose()));
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("svd_unweighted: eigendecomposition failed");

  SpectralDecomposition d;
  d.weighted = false;
  d.eigenvalues = eig.eigenvalues();
  d.eigenvectors = eig.eigenvectors();
  sort_descending(d.eigenvalues, d.eigenvectors);
  return d;
}

SpectralDecomposition eig_generalized(const Eigen::MatrixXd& A, const Eigen::VectorXd& P_diag) {
  if (A.rows() != A.cols() || A.rows() != P_diag.size())
    throw std::invalid_argument("eig_generalized: shape mismatch");
  const int n = static_cast<int>(P_diag.size());
  std::vector<int> retained;
  for (int i = 0; i < n; ++i) {
    if (P_diag[i] < 0)
      throw std::invalid_argument("eig_generalized: negative weight at cell " + std::to_string(i));
    if (P_diag[i] > 0) retained.push_back(i);
  }
  if (retained.empty()) throw std::invalid_argument("eig_generalized: all weights are zero");

  const int m = static_cast<int>(retained.size());
  Eigen::MatrixXd Ar(m, m);
  Eigen::VectorXd pr(m);
  for (int i = 0; i < m; ++i) {
    pr[i] = P_diag[retained[i]];
    for (int j = 0; j < m; ++j) Ar(i, j) = A(retained[i], retained[j]);
  }
  const Eigen::VectorXd isqrt = pr.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd B = isqrt.asDiagonal() * Ar * isqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (B + B.transpose()));
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("eig_generalized: eigendecomposition failed");

  SpectralDecomposition d;
  d.weighted = true;
  d.weight = P_diag;
  d.retained = retained;
  d.eigenvalues = eig.eigenvalues();
  Eigen::MatrixXd compact = isqrt.asDiagonal() * eig.eigenvectors();  // P-orthonormal
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n, m);
  for (int i = 0; i < m; ++i) full.row(retained[i]) = compact.row(i);
  d.eigenvectors = full;
  sort_descending(d.eigenvalues, d.eigenvectors);
  return d;
}

PicardTable picard_table(const SpectralDecomposition& decomp, const Eigen::VectorXd& b) {
  if (b.size() != decomp.eigenvectors.rows())
    throw std::invalid_argument("picard_table: b does not conform to the decomposition");
  PicardTable table;
  table.weighted = decomp.weighted;
  const int n = static_cast<int>(decomp.eigenvalues.size());
  table.rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    PicardRow row;
    row.index = i;
    row.sigma = decomp.eigenvalues[i];
    row.b_proj = std::abs(decomp.eigenvectors.col(i).dot(b));
    row.ratio = row.sigma != 0.0 ? row.b_proj / row.sigma
                                 : std::numeric_limits<double>::quiet_NaN();
    table.rows.push_back(row);
  }
  return table;
}

CoefficientEstimate tikhonov_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                   const Eigen::MatrixXd& B, double lambda,
                                   const BasisSpec& basis) {
  if (lambda < 0) throw std::invalid_argument("tikhonov_solve: lambda must be >= 0");
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows() || A.rows() != b.size())
    throw std::invalid_argument("tikhonov_solve: shape mismatch");
  const Eigen::MatrixXd M = A + lambda * B;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  Eigen::VectorXd c = ldlt.solve(b);
  const double residual = (M * c - b).norm();
  if (ldlt.info() != Eigen::Success || !c.allFinite() ||
      residual > 1e-8 * std::max(1.0, b.norm()))
    throw std::runtime_error(
        "tikhonov_solve: system is numerically singular; try a larger lambda");

  CoefficientEstimate est;
  est.c = c;
  est.basis = basis;
  est.method = EstimateMethod::tikhonov;
  est.lambda = lambda;
  est.loss = loss_value(c, A, b);
  est.penalty_norm = std::sqrt(std::max(0.0, c.dot(B * c)));
  return est;
}

LCurveResult lcurve_select(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Eigen::MatrixXd& B, const std::vector<double>& lambda_grid,
                           const BasisSpec& basis) {
  if (lambda_grid.size() < 5)
    throw std::invalid_argument("lcurve_select: need a grid of >= 5 lambdas");
  for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] > 0) || !(lambda_grid[i] < lambda_grid[i + 1]))
      throw std::invalid_argument("lcurve_select: grid must be positive and sorted");

  LCurveResult result;
  result.points.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const CoefficientEstimate est = tikhonov_solve(A, b, B, lambda, basis);
    LCurvePoint p;
    p.lambda = lambda;
    p.excess_loss = est.loss;  // shifted below
    p.penalty_norm = est.penalty_norm;
    p.curvature = 0.0;
    result.points.push_back(p);
  }

  bool all_identical = true;
  for (std::size_t i = 1; i < result.points.size(); ++i)
    if (result.points[i].excess_loss != result.points[0].excess_loss ||
        result.points[i].penalty_norm != result.points[0].penalty_norm)
      all_identical = false;
  if (all_identical) throw std::invalid_argument("lcurve_select: degenerate curve");

  // The loss itself is negative at any minimizer; shift by the smallest loss
  // reached on the grid (the loss is non-decreasing in lambda, so this is the
  // stable stand-in for the unregularized minimum). The shift scales like
  // b^2, which keeps the selection invariant under rescaling b.
  double loss_min = result.points.front().excess_loss;
  double loss_scale = std::abs(loss_min);
  for (const auto& p : result.points) {
    loss_min = std::min(loss_min, p.excess_loss);
    loss_scale = std::max(loss_scale, std::abs(p.excess_loss));
  }
  const double floor = 1e-15 * std::max(loss_scale, 1e-300);
  for (auto& p : result.points) p.excess_loss = std::max(p.excess_loss - loss_min, floor);

  // Nothing to regularize: the loss stays at its minimum across the whole
  // grid (flat curve within round-off of the loss scale).
  if (result.points.back().excess_loss <= 2.0 * floor) {
    result.lambda = lambda_grid.front();
    result.index = 0;
    return result;
  }

  auto log_or = [](double v) { return std::log(std::max(v, 1e-300)); };
  const int np = static_cast<int>(result.points.size());
  for (int i = 1; i + 1 < np; ++i) {
    // Floor points carry no loss information; a corner needs a real excess.
    if (result.points[i].excess_loss <= 2.0 * floor) continue;
    const double x0 = log_or(result.points[i - 1].excess_loss),
                 y0 = log_or(result.points[i - 1].penalty_norm);
    const double x1 = log_or(result.points[i].excess_loss),
                 y1 = log_or(result.points[i].penalty_norm);
    const double x2 = log_or(result.points[i + 1].excess_loss),
                 y2 = log_or(result.points[i + 1].penalty_norm);
    // Menger curvature of the three consecutive points.
    const double cross = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    const double a = std::hypot(x1 - x0, y1 - y0);
    const double c = std::hypot(x2 - x1, y2 - y1);
    const double d = std::hypot(x2 - x0, y2 - y0);
    result.points[i].curvature =
        (a > 0 && c > 0 && d > 0) ? 2.0 * std::abs(cross) / (a * c * d) : 0.0;
  }

  double kappa_max = 0.0;
  for (const auto& p : result.points) kappa_max = std::max(kappa_max, p.curvature);
  if (kappa_max <= 1e-6) {  // no corner anywhere
    result.lambda = lambda_grid.front();
    result.index = 0;
    return result;
  }

  // The steep branch of the curve often bends on its own and produces a
  // spurious curvature peak before the branch junction. Among the local
  // curvature maxima that carry at least 5% of the peak curvature, the
  // junction is the one at the largest lambda, which is also the safer
  // (more regularized) tie direction.
  int best_index = -1;
  for (int i = 1; i + 1 < np; ++i) {
    const double k = result.points[i].curvature;
    if (k < std::max(1e-6, 0.05 * kappa_max)) continue;
    if (k + 1e-12 * kappa_max < result.points[i - 1].curvature) continue;
    if (k + 1e-12 * kappa_max < result.points[i + 1].curvature) continue;
    best_index = i;
  }
  if (best_index < 0) {
    result.lambda = lambda_grid.front();
    result.index = 0;
    return result;
  }
  result.lambda = lambda_grid[best_index];
  result.index = best_index;
  return result;
}

CoefficientEstimate tsvd_solve(const SpectralDecomposition& decomp, const Eigen::VectorXd& b,
                               int m, const BasisSpec& basis) {
  if (b.size() != decomp.eigenvectors.rows())
    throw std::invalid_argument("tsvd_solve: b does not conform to the decomposition");
  const int positive = decomp.positive_count();
  if (m < 1 || m > positive)
    throw std::invalid_argument("tsvd_solve: m = " + std::to_string(m) +
                                " exceeds the numerically positive spectrum (" +
                                std::to_string(positive) + ")");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(b.size());
  for (int k = 0; k < m; ++k) {
    const Eigen::VectorXd v = decomp.eigenvectors.col(k);
    c += (v.dot(b) / decomp.eigenvalues[k]) * v;
  }
  CoefficientEstimate est;
  est.c = c;
  est.basis = basis;
  est.method = EstimateMethod::tsvd;
  est.truncation = m;
  return est;
}

Eigen::MatrixXd rkhs_subspace(const SpectralDecomposition& decomp, int m) {
  const int positive = decomp.positive_count();
  if (m < 1 || m > positive)
    throw std::invalid_argument("rkhs_subspace: m exceeds the numerically positive spectrum");
  return decomp.eigenvectors.leftCols(m);
}

}  // namespace mfk
