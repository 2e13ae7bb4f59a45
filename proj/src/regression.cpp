#include "mfk/regression.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfk {

namespace {

Eigen::VectorXd time_weights(const TimeGrid& times) {
  Eigen::VectorXd w = trapezoid_weights(times.n_snapshots(), times.dt());
  return w / times.t_end;
}

Eigen::VectorXd prefix_sums(const Eigen::VectorXd& v) {
  Eigen::VectorXd p(v.size() + 1);
  p[0] = 0.0;
  for (int i = 0; i < v.size(); ++i) p[i + 1] = p[i] + v[i];
  return p;
}

// Box sum over u_{m-K} .. u_{m+K}, clipped to the grid.
inline double box_sum(const Eigen::VectorXd& prefix, int m, int K, int nn) {
  const int lo = std::max(m - K, 0);
  const int hi = std::min(m + K, nn - 1);
  if (hi < lo) return 0.0;
  return prefix[hi + 1] - prefix[lo];
}

// Convolution of the odd indicator kernel K_i(o) = phi_i(|o|) sign(o) (radial)
// or the plain indicator (general) with a field slice, uniform node weight dx.
void indicator_convolution(const BasisSpec& basis, int i, const Eigen::VectorXd& ut, double dx,
                           Eigen::Ref<Eigen::VectorXd> out) {
  const int nn = static_cast<int>(ut.size());
  const int klo = std::max(0, static_cast<int>(std::floor(basis.lo(i) / dx)) - 1);
  const int khi = std::min(nn - 1, static_cast<int>(std::ceil(basis.hi(i) / dx)) + 1);
  out.setZero();
  if (basis.mode == BasisMode::radial) {
    for (int k = std::max(klo, 1); k <= khi; ++k) {
      const double v = basis.eval(i, k * dx);
      if (v == 0.0) continue;
      for (int m = 0; m < nn; ++m) {
        const double a = (m - k >= 0) ? ut[m - k] : 0.0;
        const double b = (m + k < nn) ? ut[m + k] : 0.0;
        out[m] += v * (a - b);
      }
    }
  } else {
    const int lo_k = static_cast<int>(std::floor((basis.lo(i) / dx))) - 1;
    const int hi_k = static_cast<int>(std::ceil((basis.hi(i) / dx))) + 1;
    for (int k = lo_k; k <= hi_k; ++k) {
      const double v = basis.eval(i, k * dx);
      if (v == 0.0) continue;
      for (int m = 0; m < nn; ++m) {
        const int j = m - k;
        if (j >= 0 && j < nn) out[m] += v * ut[j];
      }
    }
  }
  out *= dx;
}

// Convolution of the basis antiderivative Phi_i(|o|) (radial; even in o).
// Phi_i = w on |o| >= hi, so the constant tail reduces to prefix sums:
//   Phi_i(o) = w * 1 - [w * 1_{|o| <= lo} + (hi - |o|) * 1_{lo < |o| < hi}].
void antiderivative_convolution_radial(const BasisSpec& basis, int i, const Eigen::VectorXd& ut,
                                       const Eigen::VectorXd& prefix, double dx,
                                       Eigen::Ref<Eigen::VectorXd> out) {
  const int nn = static_cast<int>(ut.size());
  const double lo = basis.lo(i), hi = basis.hi(i);
  const double w = hi - lo;
  const double total = prefix[nn];
  const int k_in = static_cast<int>(std::floor(lo / dx + 1e-12));       // |k| dx <= lo
  const int k_out = static_cast<int>(std::ceil(hi / dx - 1e-12)) - 1;   // |k| dx < hi
  for (int m = 0; m < nn; ++m) {
    double acc = w * (total - box_sum(prefix, m, k_in, nn));
    for (int k = k_in + 1; k <= k_out; ++k) {
      const double ramp = w - (k * dx - lo);  // = hi - |k| dx on the ramp
      const double a = (m - k >= 0) ? ut[m - k] : 0.0;
      const double b = (m + k < nn && k > 0) ? ut[m + k] : 0.0;
      acc -= ramp * (a + b);
    }
    out[m] = dx * acc;
  }
}

void antiderivative_convolution(const BasisSpec& basis, int i, const Eigen::VectorXd& ut,
                                const Eigen::VectorXd& prefix, double dx,
                                Eigen::Ref<Eigen::VectorXd> out) {
  const int nn = static_cast<int>(ut.size());
  if (basis.mode == BasisMode::radial) {
    antiderivative_convolution_radial(basis, i, ut, prefix, dx, out);
    return;
  }
  // General mode: Phi_i(o) = clamp(o - lo, 0, w), evaluated directly.
  for (int m = 0; m < nn; ++m) {
    double acc = 0.0;
    for (int j = 0; j < nn; ++j) acc += basis.antiderivative(i, (m - j) * dx) * ut[j];
    out[m] = dx * acc;
  }
}

Eigen::VectorXd full_kernel_convolution(const Eigen::VectorXd& samples,
                                        const Eigen::VectorXd& ut, double dx) {
  const int nn = static_cast<int>(ut.size());
  const int zero = nn - 1;
  Eigen::VectorXd out(nn);
  for (int m = 0; m < nn; ++m) {
    double acc = 0.0;
    for (int j = 0; j < nn; ++j) acc += samples[zero + m - j] * ut[j];
    out[m] = dx * acc;
  }
  return out;
}

}  // namespace

double BasisSpec::eval(int i, double r) const {
  const int n = size();
  if (i < 0 || i >= n) throw std::out_of_range("BasisSpec::eval: cell index");
  if (r < lo(i) || r > hi(i)) return 0.0;
  if (r == hi(i) && i != n - 1) return 0.0;  // half-open cells, last one closed
  return 1.0;
}

double BasisSpec::antiderivative(int i, double r) const {
  const double w = hi(i) - lo(i);
  return std::clamp(r - lo(i), 0.0, w);
}

double BasisSpec::evaluate(const Eigen::VectorXd& coeffs, double r) const {
  if (coeffs.size() != size())
    throw std::invalid_argument("BasisSpec::evaluate: coefficient count mismatch");
  if (r < knots[0] || r > knots[size()]) return 0.0;
  int i = static_cast<int>((r - knots[0]) / dr());
  if (i >= size()) i = size() - 1;
  return coeffs[i];
}

BasisSpec build_basis(double support_lo, double support_hi, int n, BasisMode mode) {
  if (n < 1) throw std::invalid_argument("build_basis: n must be >= 1");
  if (!(support_lo < support_hi)) throw std::invalid_argument("build_basis: empty support");
  if (mode == BasisMode::radial && support_lo < 0)
    throw std::invalid_argument("build_basis: radial support must be >= 0");
  BasisSpec basis;
  basis.mode = mode;
  basis.knots.resize(n + 1);
  const double h = (support_hi - support_lo) / n;
  for (int i = 0; i <= n; ++i) basis.knots[i] = support_lo + i * h;
  basis.knots[n] = support_hi;
  return basis;
}

std::string to_string(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::plain: return "plain";
    case EstimateMethod::tikhonov: return "tikhonov";
    case EstimateMethod::tsvd: return "tsvd";
  }
  throw std::logic_error("unreachable estimate method");
}

Eigen::MatrixXd assemble_A(const SpaceTimeField& u, const BasisSpec& basis) {
  u.validate_density();
  const int n = basis.size();
  const int nn = u.grid.n_nodes();
  const double dx = u.grid.dx();
  const Eigen::VectorXd tw = time_weights(u.times);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd conv(nn, n);
  for (int t = 0; t < u.times.n_snapshots(); ++t) {
    const Eigen::VectorXd ut = u.values.row(t).transpose().cwiseMax(0.0);
    for (int i = 0; i < n; ++i) indicator_convolution(basis, i, ut, dx, conv.col(i));
    const double wt = tw[t] * dx;
    A.noalias() += wt * (conv.transpose() * ut.asDiagonal() * conv);
  }
  // Exact symmetry regardless of summation round-off.
  A = 0.5 * (A + A.transpose()).eval();
  return A;
}

Eigen::VectorXd assemble_b_data(const SpaceTimeField& u, const BasisSpec& basis, double nu) {
  u.validate_density();
  if (u.times.n_snapshots() < 3)
    throw std::invalid_argument("assemble_b_data: need >= 3 snapshots for time differences");
  const int n = basis.size();
  const int nn = u.grid.n_nodes();
  const double dx = u.grid.dx();
  const Eigen::VectorXd tw = time_weights(u.times);

  const SpaceTimeField dtu = finite_difference(u, Axis::time);
  const SpaceTimeField dxu = finite_difference(u, Axis::space);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd kconv(nn), pconv(nn);
  for (int t = 0; t < u.times.n_snapshots(); ++t) {
    const Eigen::VectorXd ut = u.values.row(t).transpose().cwiseMax(0.0);
    const Eigen::VectorXd prefix = prefix_sums(ut);
    const Eigen::VectorXd dtu_t = dtu.values.row(t).transpose();
    const Eigen::VectorXd dxu_t = dxu.values.row(t).transpose();
    const double wt = tw[t] * dx;
    for (int i = 0; i < n; ++i) {
      indicator_convolution(basis, i, ut, dx, kconv);
      antiderivative_convolution(basis, i, ut, prefix, dx, pconv);
      b[i] -= wt * (pconv.dot(dtu_t) + nu * kconv.dot(dxu_t));
    }
  }
  return b;
}

Eigen::VectorXd assemble_b_oracle(const SpaceTimeField& u, const BasisSpec& basis,
                                  const InteractionKernel& kernel) {
  u.validate_density();
  const int n = basis.size();
  const int nn = u.grid.n_nodes();
  const double dx = u.grid.dx();
  const Eigen::VectorXd tw = time_weights(u.times);
  const Eigen::VectorXd ksamples = kernel_from_phi(kernel, u.grid);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd conv(nn);
  for (int t = 0; t < u.times.n_snapshots(); ++t) {
    const Eigen::VectorXd ut = u.values.row(t).transpose().cwiseMax(0.0);
    const Eigen::VectorXd true_conv = full_kernel_convolution(ksamples, ut, dx);
    const Eigen::VectorXd weighted = true_conv.cwiseProduct(ut);
    const double wt = tw[t] * dx;
    for (int i = 0; i < n; ++i) {
      indicator_convolution(basis, i, ut, dx, conv);
      b[i] += wt * conv.dot(weighted);
    }
  }
  return b;
}

DiagonalWeight assemble_P(const EmpiricalMeasure& measure, const BasisSpec& basis) {
  DiagonalWeight out;
  out.diag.resize(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    const double v = measure.integral(basis.lo(i), basis.hi(i));
    out.diag[i] = std::max(v, 0.0);
    if (out.diag[i] == 0.0) ++out.zero_cells;
  }
  return out;
}

CoefficientEstimate solve_unregularized(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                        const BasisSpec& basis) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw std::invalid_argument("solve_unregularized: shape mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("solve_unregularized: eigendecomposition failed");
  const Eigen::VectorXd& evals = eig.eigenvalues();  // ascending
  const double lmax = evals[evals.size() - 1];
  const double lmin = evals[0];

  CoefficientEstimate est;
  est.basis = basis;
  est.method = EstimateMethod::plain;
  if (lmax <= 0) {
    est.c = Eigen::VectorXd::Zero(b.size());
  } else if (lmin > lmax / 1e12) {
    est.c = Eigen::LDLT<Eigen::MatrixXd>(A).solve(b);
  } else {
    // Minimum-norm pseudo-inverse: drop eigenvalues at or below max/1e12.
    const double cutoff = lmax / 1e12;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(b.size());
    for (int k = 0; k < evals.size(); ++k) {
      if (evals[k] > cutoff) {
        const Eigen::VectorXd v = eig.eigenvectors().col(k);
        c += (v.dot(b) / evals[k]) * v;
      }
    }
    est.c = c;
  }
  if (!est.c.allFinite()) throw std::runtime_error("solve_unregularized: non-finite solution");
  est.loss = loss_value(est.c, A, b);
  return est;
}

double loss_value(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size() || c.size() != b.size())
    throw std::invalid_argument("loss_value: shape mismatch");
  return c.dot(A * c) - 2.0 * c.dot(b);
}

RelativeError l2rho_error(const CoefficientEstimate& estimate, const InteractionKernel& kernel,
                          const EmpiricalMeasure& measure) {
  const int n = static_cast<int>(measure.axis.size());
  const double h = measure.spacing();
  Eigen::VectorXd diff2(n), truth2(n);
  for (int k = 0; k < n; ++k) {
    const double r = measure.axis[k];
    const double r_eval = (kernel.singular_at_zero() && std::abs(r) < 0.5 * h)
                              ? 0.5 * h
                              : r;
    const double pt = kernel.phi(std::abs(r_eval)) * (measure.radial ? 1.0 : (r < 0 ? -1.0 : 1.0));
    const double ph = estimate.basis.evaluate(estimate.c, r);
    diff2[k] = (ph - pt) * (ph - pt) * measure.density[k];
    truth2[k] = pt * pt * measure.density[k];
  }
  const double num = std::sqrt(trapezoid_integral(diff2, h));
  const double den = std::sqrt(trapezoid_integral(truth2, h));
  RelativeError err;
  if (den == 0.0) {
    err.value = num;
    err.absolute = true;
  } else {
    err.value = num / den;
  }
  return err;
}

}  // namespace mfk
