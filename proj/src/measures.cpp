#include "mfk/measures.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfk {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd time_weights(const TimeGrid& times) {
  // (1/T) * trapezoid in t; the weights sum to exactly 1.
  Eigen::VectorXd w = trapezoid_weights(times.n_snapshots(), times.dt());
  return w / times.t_end;
}

// Offsets must sit on the node lattice of the data grid.
std::vector<int> offset_indices(const Eigen::VectorXd& offsets, const SpaceGrid& grid) {
  std::vector<int> idx(offsets.size());
  const double dx = grid.dx();
  for (int i = 0; i < offsets.size(); ++i) {
    const double k = offsets[i] / dx;
    const int ki = static_cast<int>(std::lround(k));
    if (std::abs(k - ki) > 1e-9 || std::abs(ki) > grid.nx)
      throw std::invalid_argument("offset " + std::to_string(offsets[i]) +
                                  " is not a node of the data grid");
    idx[i] = ki;
  }
  return idx;
}

void apply_default_mask(EmpiricalMeasure& m) {
  m.support_threshold = kDefaultSupportRatio * m.density.maxCoeff();
  m.support_mask = m.density.array() > m.support_threshold;
}

}  // namespace

double EmpiricalMeasure::density_at(double x) const {
  const int n = static_cast<int>(axis.size());
  if (x <= axis[0]) return x == axis[0] ? density[0] : 0.0;
  if (x >= axis[n - 1]) return x == axis[n - 1] ? density[n - 1] : 0.0;
  const double h = spacing();
  int i = static_cast<int>((x - axis[0]) / h);
  if (i >= n - 1) i = n - 2;
  const double t = (x - axis[i]) / h;
  return (1.0 - t) * density[i] + t * density[i + 1];
}

double EmpiricalMeasure::integral(double a, double b) const {
  const int n = static_cast<int>(axis.size());
  a = std::max(a, axis[0]);
  b = std::min(b, axis[n - 1]);
  if (!(a < b)) return 0.0;
  const double h = spacing();
  double acc = 0.0;
  int k = static_cast<int>((a - axis[0]) / h);
  while (k < n - 1 && axis[k + 1] <= a) ++k;
  for (; k < n - 1 && axis[k] < b; ++k) {
    const double lo = std::max(a, axis[k]);
    const double hi = std::min(b, axis[k + 1]);
    if (hi <= lo) continue;
    acc += 0.5 * (density_at(lo) + density_at(hi)) * (hi - lo);
  }
  return acc;
}

std::string to_string(KernelMatrixKind kind) {
  switch (kind) {
    case KernelMatrixKind::G_bar: return "G_bar";
    case KernelMatrixKind::R_bar: return "R_bar";
    case KernelMatrixKind::F_bar: return "F_bar";
    case KernelMatrixKind::Q_bar: return "Q_bar";
  }
  throw std::logic_error("unreachable kernel matrix kind");
}

KernelMatrixKind kernel_matrix_kind_from_string(const std::string& name) {
  if (name == "G_bar") return KernelMatrixKind::G_bar;
  if (name == "R_bar") return KernelMatrixKind::R_bar;
  if (name == "F_bar") return KernelMatrixKind::F_bar;
  if (name == "Q_bar") return KernelMatrixKind::Q_bar;
  throw std::invalid_argument("unknown kernel matrix kind: " + name);
}

EmpiricalMeasure compute_rho_general(const SpaceTimeField& u) {
  u.validate_density();
  const int nx = u.grid.nx;
  const int nn = u.grid.n_nodes();
  const double dx = u.grid.dx();
  const Eigen::VectorXd tw = time_weights(u.times);

  Eigen::VectorXd corr = Eigen::VectorXd::Zero(2 * nx + 1);
  for (int t = 0; t < u.times.n_snapshots(); ++t) {
    const Eigen::VectorXd ut = u.values.row(t).transpose().cwiseMax(0.0);
    const double wt = tw[t] * dx;
    for (int k = -nx; k <= nx; ++k) {
      double acc = 0.0;
      const int mlo = std::max(0, k), mhi = std::min(nn - 1, nn - 1 + k);
      for (int m = mlo; m <= mhi; ++m) acc += ut[m] * ut[m - k];
      corr[nx + k] += wt * acc;
    }
  }

  EmpiricalMeasure rho;
  rho.radial = false;
  rho.axis.resize(2 * nx + 1);
  rho.density.resize(2 * nx + 1);
  for (int k = -nx; k <= nx; ++k) {
    rho.axis[nx + k] = k * dx;
    rho.density[nx + k] = 0.5 * (corr[nx + k] + corr[nx - k]);
  }
  // Unit data mass is enforced per snapshot upstream; the raw correlation
  // mass deviates from 1 only by quadrature truncation, O(dx) when the data
  // does not vanish at the boundary. Reject runaway values, rescale the rest.
  const double raw_mass = trapezoid_integral(rho.density, dx);
  if (std::abs(raw_mass - 1.0) > 0.2)
    throw std::invalid_argument("compute_rho_general: pair density mass " +
                                std::to_string(raw_mass) + " is too far from 1");
  rho.density /= raw_mass;
  apply_default_mask(rho);
  return rho;
}

EmpiricalMeasure compute_rho_radial(const SpaceTimeField& u) {
  const EmpiricalMeasure gen = compute_rho_general(u);
  const int nx = u.grid.nx;
  EmpiricalMeasure rho;
  rho.radial = true;
  rho.axis.resize(nx + 1);
  rho.density.resize(nx + 1);
  for (int k = 0; k <= nx; ++k) {
    rho.axis[k] = gen.axis[nx + k];
    rho.density[k] = gen.density[nx + k] + gen.density[nx - k];
  }
  apply_default_mask(rho);
  return rho;
}

SupportInterval support_of(EmpiricalMeasure& measure, double threshold) {
  if (!(threshold > 0)) throw std::invalid_argument("support_of: threshold must be > 0");
  const int n = static_cast<int>(measure.axis.size());
  int lo = -1, hi = -1;
  for (int i = 0; i < n; ++i) {
    if (measure.density[i] > threshold) {
      if (lo < 0) lo = i;
      hi = i;
    }
  }
  if (lo < 0) throw std::invalid_argument("support_of: empty support at this threshold");
  measure.support_threshold = threshold;
  measure.support_mask = measure.density.array() > threshold;
  return {measure.axis[lo], measure.axis[hi], lo, hi};
}

KernelMatrix assemble_F(const SpaceTimeField& u, const Eigen::VectorXd& offsets) {
  u.validate_density();
  const std::vector<int> idx = offset_indices(offsets, u.grid);
  const int n = static_cast<int>(idx.size());
  const int nn = u.grid.n_nodes();
  const double dx = u.grid.dx();
  const Eigen::VectorXd tw = time_weights(u.times);

  KernelMatrix F;
  F.kind = KernelMatrixKind::F_bar;
  F.axis = offsets;
  F.time_horizon = u.times.t_end;
  F.values = Eigen::MatrixXd::Zero(n, n);

  for (int t = 0; t < u.times.n_snapshots(); ++t) {
    const Eigen::VectorXd ut = u.values.row(t).transpose().cwiseMax(0.0);
    const double* p = ut.data();
    const double wt = tw[t] * dx;
    for (int i = 0; i < n; ++i) {
      const int ki = idx[i];
      for (int j = i; j < n; ++j) {
        const int kj = idx[j];
        const int mlo = std::max({0, ki, kj});
        const int mhi = std::min({nn - 1, nn - 1 + ki, nn - 1 + kj});
        double acc = 0.0;
        for (int m = mlo; m <= mhi; ++m) acc += p[m] * p[m - ki] * p[m - kj];
        F.values(i, j) += wt * acc;
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) F.values(i, j) = F.values(j, i);
  return F;
}

KernelMatrix assemble_G(const SpaceTimeField& u, const Eigen::VectorXd& r_values) {
  u.validate_density();
  for (int i = 0; i < r_values.size(); ++i)
    if (r_values[i] < 0) throw std::invalid_argument("assemble_G: radii must be >= 0");
  const std::vector<int> idx = offset_indices(r_values, u.grid);
  const int n = static_cast<int>(idx.size());
  const int nn = u.grid.n_nodes();
  const double dx = u.grid.dx();
  const Eigen::VectorXd tw = time_weights(u.times);

  KernelMatrix G;
  G.kind = KernelMatrixKind::G_bar;
  G.axis = r_values;
  G.time_horizon = u.times.t_end;
  G.values = Eigen::MatrixXd::Zero(n, n);

  // diff_i(x) = u(x - r_i) - u(x + r_i), zero off the grid.
  Eigen::MatrixXd diff(n, nn);
  for (int t = 0; t < u.times.n_snapshots(); ++t) {
    const Eigen::VectorXd ut = u.values.row(t).transpose().cwiseMax(0.0);
    for (int i = 0; i < n; ++i) {
      const int k = idx[i];
      for (int m = 0; m < nn; ++m) {
        const double a = (m - k >= 0 && m - k < nn) ? ut[m - k] : 0.0;
        const double b = (m + k >= 0 && m + k < nn) ? ut[m + k] : 0.0;
        diff(i, m) = a - b;
      }
    }
    const double wt = tw[t] * dx;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double acc = 0.0;
        for (int m = 0; m < nn; ++m) acc += ut[m] * diff(i, m) * diff(j, m);
        G.values(i, j) += wt * acc;
      }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) G.values(i, j) = G.values(j, i);
  return G;
}

WeightedKernel weight_kernel(const KernelMatrix& base, const EmpiricalMeasure& measure) {
  if (base.kind != KernelMatrixKind::G_bar && base.kind != KernelMatrixKind::F_bar)
    throw std::invalid_argument("weight_kernel: base must be a G_bar or F_bar kernel");
  const int n = base.size();

  // Look the density up at the base axis nodes; they must lie on the
  // measure's axis.
  Eigen::VectorXd rho(n);
  Eigen::Array<bool, Eigen::Dynamic, 1> ok(n);
  const double h = measure.spacing();
  for (int i = 0; i < n; ++i) {
    const double pos = (base.axis[i] - measure.axis[0]) / h;
    const int k = static_cast<int>(std::lround(pos));
    if (std::abs(pos - k) > 1e-9 || k < 0 || k >= measure.axis.size())
      throw std::invalid_argument("weight_kernel: base and measure grids do not match");
    rho[i] = measure.density[k];
    ok[i] = measure.support_mask[k];
  }

  WeightedKernel out;
  out.matrix.kind = base.kind == KernelMatrixKind::G_bar ? KernelMatrixKind::R_bar
                                                         : KernelMatrixKind::Q_bar;
  out.matrix.axis = base.axis;
  out.matrix.time_horizon = base.time_horizon;
  out.matrix.values = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (!ok[i]) ++out.masked_nodes;
    for (int j = 0; j < n; ++j)
      if (ok[i] && ok[j]) out.matrix.values(i, j) = base.values(i, j) / (rho[i] * rho[j]);
  }
  return out;
}

double GaussianClosedForms::u(double x) const {
  return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2.0 * kPi));
}

double GaussianClosedForms::rho(double x) const {
  return std::exp(-0.25 * x * x / (sigma * sigma)) / (2.0 * sigma * std::sqrt(kPi));
}

double GaussianClosedForms::rho_radial(double r) const { return 2.0 * rho(r); }

double GaussianClosedForms::F(double x, double y) const {
  return std::exp(-(x * x + y * y - x * y) / (3.0 * sigma * sigma)) /
         (2.0 * std::sqrt(3.0) * kPi * sigma * sigma);
}

GaussianClosedForms gaussian_closed_forms(double nu) {
  if (!(nu > 0)) throw std::invalid_argument("gaussian_closed_forms: nu must be > 0");
  return GaussianClosedForms{nu};
}

double CauchyClosedForms::u(double x) const { return 1.0 / (kPi * (1.0 + x * x)); }

double CauchyClosedForms::rho(double x) const { return 2.0 / (kPi * (x * x + 4.0)); }

double CauchyClosedForms::F(double x, double y) const {
  return 2.0 * (x * x - x * y + y * y + 12.0) /
         (kPi * kPi * (x * x + 4.0) * (y * y + 4.0) * (x * x - 2.0 * x * y + y * y + 4.0));
}

CauchyClosedForms cauchy_closed_forms() { return CauchyClosedForms{}; }

double bilinear_form(const KernelMatrix& kernel, const Eigen::VectorXd& f,
                     const Eigen::VectorXd& g) {
  if (f.size() != kernel.size() || g.size() != kernel.size())
    throw std::invalid_argument("bilinear_form: sample size does not match the kernel axis");
  const double h = kernel.axis[1] - kernel.axis[0];
  return h * h * f.dot(kernel.values * g);
}

double bilinear_form_weighted(const KernelMatrix& kernel, const EmpiricalMeasure& measure,
                              const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (kernel.axis.size() != measure.axis.size())
    throw std::invalid_argument("bilinear_form_weighted: kernel and measure grids differ");
  const double h = kernel.axis[1] - kernel.axis[0];
  const Eigen::VectorXd fr = f.cwiseProduct(measure.density);
  const Eigen::VectorXd gr = g.cwiseProduct(measure.density);
  return h * h * fr.dot(kernel.values * gr);
}

double l2rho_norm(const EmpiricalMeasure& measure, const Eigen::VectorXd& f) {
  if (f.size() != measure.axis.size())
    throw std::invalid_argument("l2rho_norm: sample size does not match the measure axis");
  Eigen::VectorXd integrand = f.array().square() * measure.density.array();
  return std::sqrt(trapezoid_integral(integrand, measure.spacing()));
}

}  // namespace mfk
