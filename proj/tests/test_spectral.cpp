#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mfk/measures.hpp"
#include "mfk/pde.hpp"
#include "mfk/rng.hpp"
#include "mfk/spectral.hpp"

using namespace mfk;

namespace {

Eigen::MatrixXd random_spd(int n, std::uint64_t seed, double cond) {
  // Orthogonal factor from QR of a random matrix, prescribed spectrum.
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = counter_normal(seed, i, j);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd evals(n);
  for (int i = 0; i < n; ++i) evals[i] = std::pow(cond, -static_cast<double>(i) / (n - 1));
  return Q * evals.asDiagonal() * Q.transpose();
}

BasisSpec unit_basis(int n) { return build_basis(0.0, static_cast<double>(n), n, BasisMode::radial); }

struct CubicSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd P;
  BasisSpec basis;
  EmpiricalMeasure rad;
};

CubicSystem cubic_system(int n) {
  const InteractionKernel cubic = InteractionKernel::builtin(KernelKind::cubic);
  SolverConfig cfg;
  cfg.nu = 0.04;
  cfg.grid = SpaceGrid(-1.0, 1.0, 256);
  cfg.times = TimeGrid(1.0, 1000);
  cfg.initial_density = gaussian_density(cfg.grid, 0.0, 0.18);
  const SpaceTimeField u = solve_mean_field(cubic, cfg);
  CubicSystem sys;
  sys.rad = compute_rho_radial(u);
  const SupportInterval iv =
      support_of(sys.rad, kDefaultSupportRatio * sys.rad.density.maxCoeff());
  sys.basis = build_basis(iv.lo, iv.hi, n, BasisMode::radial);
  sys.A = assemble_A(u, sys.basis);
  sys.b = assemble_b_data(u, sys.basis, cfg.nu);
  sys.P = assemble_P(sys.rad, sys.basis).diag;
  return sys;
}

}  // namespace

TEST_CASE("unweighted decomposition of a diagonal matrix") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = 3.0;
  A(1, 1) = 1.0;
  const SpectralDecomposition d = svd_unweighted(A);
  CHECK(d.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(d.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(d.eigenvectors(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(d.eigenvectors(1, 1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unweighted decomposition reconstructs and stays orthonormal") {
  const Eigen::MatrixXd A = random_spd(12, 5, 1e6);
  const SpectralDecomposition d = svd_unweighted(A);
  const Eigen::MatrixXd rec =
      d.eigenvectors * d.eigenvalues.asDiagonal() * d.eigenvectors.transpose();
  CHECK((rec - A).cwiseAbs().maxCoeff() <= 1e-10 * d.eigenvalues[0]);
  const Eigen::MatrixXd gram = d.eigenvectors.transpose() * d.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() <= 1e-10);
  for (int i = 1; i < 12; ++i) CHECK(d.eigenvalues[i] <= d.eigenvalues[i - 1]);
}

TEST_CASE("non-symmetric input is rejected") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  A(0, 1) = 1.0;
  CHECK_THROWS_AS(svd_unweighted(A), std::invalid_argument);
}

TEST_CASE("the cubic normal matrix is ill-conditioned already at n = 32") {
  const CubicSystem sys = cubic_system(32);
  const SpectralDecomposition d = svd_unweighted(sys.A);
  CHECK(d.eigenvalues[31] / d.eigenvalues[0] <= 1e-3);
}

TEST_CASE("generalized decomposition with identity weight matches the plain one") {
  const Eigen::MatrixXd A = random_spd(9, 7, 1e4);
  const Eigen::VectorXd P = Eigen::VectorXd::Ones(9);
  const SpectralDecomposition gen = eig_generalized(A, P);
  const SpectralDecomposition unw = svd_unweighted(A);
  CHECK((gen.eigenvalues - unw.eigenvalues).cwiseAbs().maxCoeff() <= 1e-10 * unw.eigenvalues[0]);
  // P-orthonormal == orthonormal here.
  const Eigen::MatrixXd gram = gen.eigenvectors.transpose() * gen.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("a matching pencil has unit spectrum") {
  Eigen::VectorXd P(5);
  P << 0.3, 1.2, 0.9, 2.0, 0.5;
  const Eigen::MatrixXd A = P.asDiagonal();
  const SpectralDecomposition d = eig_generalized(A, P);
  for (int i = 0; i < 5; ++i) CHECK(d.eigenvalues[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generalized eigenpairs satisfy the pencil residual bound") {
  const Eigen::MatrixXd A = random_spd(10, 9, 1e8);
  Eigen::VectorXd P(10);
  for (int i = 0; i < 10; ++i) P[i] = 0.1 + counter_uniform(33, 0, i);
  const SpectralDecomposition d = eig_generalized(A, P);
  const double lmax = svd_unweighted(A).eigenvalues[0];
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd v = d.eigenvectors.col(k);
    CHECK((A * v - d.eigenvalues[k] * P.asDiagonal() * v).norm() <= 1e-8 * lmax);
  }
  const Eigen::MatrixXd gram = d.eigenvectors.transpose() * P.asDiagonal() * d.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("zero-weight cells are removed and negative weights rejected") {
  const Eigen::MatrixXd A = random_spd(6, 11, 1e3);
  Eigen::VectorXd P(6);
  P << 1.0, 0.0, 2.0, 1.5, 0.0, 0.7;
  const SpectralDecomposition d = eig_generalized(A, P);
  CHECK(static_cast<int>(d.retained.size()) == 4);
  CHECK(d.eigenvalues.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(d.eigenvectors(1, k) == 0.0);
    CHECK(d.eigenvectors(4, k) == 0.0);
  }
  P[1] = -0.1;
  CHECK_THROWS_AS(eig_generalized(A, P), std::invalid_argument);
}

TEST_CASE("picard rows for aligned and zero loss vectors") {
  const Eigen::MatrixXd A = random_spd(7, 13, 1e5);
  const SpectralDecomposition d = svd_unweighted(A);
  const PicardTable aligned = picard_table(d, d.eigenvectors.col(0));
  CHECK(aligned.rows[0].b_proj == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 1; i < 7; ++i) CHECK(std::abs(aligned.rows[i].b_proj) <= 1e-12);

  const PicardTable zero = picard_table(d, Eigen::VectorXd::Zero(7));
  for (const auto& row : zero.rows) CHECK(row.b_proj == 0.0);
}

TEST_CASE("picard ratios stay finite over the numerically positive spectrum") {
  const CubicSystem sys = cubic_system(16);
  const SpectralDecomposition d = svd_unweighted(sys.A);
  const PicardTable table = picard_table(d, sys.b);
  const double floor = 1e-10 * d.eigenvalues[0];
  for (const auto& row : table.rows)
    if (row.sigma > floor) CHECK(std::isfinite(row.ratio));
}

TEST_CASE("tikhonov at lambda 0 equals the plain solve on a well-conditioned system") {
  const Eigen::MatrixXd A = random_spd(8, 17, 100.0);
  Eigen::VectorXd b(8);
  for (int i = 0; i < 8; ++i) b[i] = counter_normal(18, 0, i);
  const BasisSpec basis = unit_basis(8);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(8, 8);
  const CoefficientEstimate tik = tikhonov_solve(A, b, B, 0.0, basis);
  const CoefficientEstimate plain = solve_unregularized(A, b, basis);
  CHECK((tik.c - plain.c).cwiseAbs().maxCoeff() <= 1e-10 * plain.c.cwiseAbs().maxCoeff());
}

TEST_CASE("a dominant penalty shrinks the solution to zero") {
  const Eigen::MatrixXd A = random_spd(6, 19, 1e4);
  Eigen::VectorXd b(6);
  for (int i = 0; i < 6; ++i) b[i] = counter_normal(20, 0, i);
  const BasisSpec basis = unit_basis(6);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(6, 6);
  const double big = 1e6 * svd_unweighted(A).eigenvalues[0];
  const CoefficientEstimate small = tikhonov_solve(A, b, B, big, basis);
  const CoefficientEstimate plain = solve_unregularized(A, b, basis);
  CHECK(small.c.norm() <= 1e-3 * plain.c.norm());
}

TEST_CASE("the penalty norm is non-increasing along the lambda path") {
  const Eigen::MatrixXd A = random_spd(10, 23, 1e9);
  Eigen::VectorXd b(10);
  for (int i = 0; i < 10; ++i) b[i] = counter_normal(24, 0, i);
  const BasisSpec basis = unit_basis(10);
  Eigen::VectorXd w(10);
  for (int i = 0; i < 10; ++i) w[i] = 0.2 + counter_uniform(25, 0, i);
  const Eigen::MatrixXd B = w.asDiagonal();
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k) {
    const double lambda = 1e-10 * std::pow(1e12, k / 19.0);
    const CoefficientEstimate est = tikhonov_solve(A, b, B, lambda, basis);
    CHECK(est.penalty_norm <= last * (1.0 + 1e-12));
    last = est.penalty_norm;
  }
}

TEST_CASE("singular shifted systems ask for a larger lambda") {
  const Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 4);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
  try {
    tikhonov_solve(A, b, B, 1.0, unit_basis(4));
    FAIL("expected failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("larger lambda") != std::string::npos);
  }
}

namespace {
std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo * std::exp(i * std::log(hi / lo) / (count - 1));
  g.back() = hi;
  return g;
}
}  // namespace

TEST_CASE("a loss flat across the grid needs no regularization") {
  // b in the range of the top eigenvector of a well-conditioned system: every
  // lambda below the spectrum floor reproduces the minimizer, the curve is
  // flat, and the smallest lambda comes back.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  A(0, 0) = 2.0;
  A(1, 1) = 1.5;
  A(2, 2) = 1.0;
  Eigen::VectorXd b(3);
  b << 1.0, 0.0, 0.0;
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(3, 3);
  const auto grid = log_grid(1e-14, 1e-10, 9);
  const LCurveResult lc = lcurve_select(A, b, B, grid, unit_basis(3));
  CHECK(lc.lambda == grid.front());
}

TEST_CASE("noise on the loss vector moves the corner strictly inside the grid") {
  const CubicSystem sys = cubic_system(16);
  Eigen::VectorXd noisy = sys.b;
  const double rms = std::sqrt(sys.b.squaredNorm() / sys.b.size());
  for (int i = 0; i < noisy.size(); ++i) noisy[i] += 0.01 * rms * counter_normal(77, 1, i);
  const Eigen::MatrixXd B = sys.P.asDiagonal();
  const auto grid = log_grid(1e-8, 1.0, 20);
  const LCurveResult lc = lcurve_select(sys.A, noisy, B, grid, sys.basis);
  CHECK(lc.lambda > grid.front());
  CHECK(lc.lambda < grid.back());

  // Scaling b by 10 translates the log-log curve and keeps the same corner.
  const LCurveResult scaled = lcurve_select(sys.A, 10.0 * noisy, B, grid, sys.basis);
  CHECK(scaled.index == lc.index);
}

TEST_CASE("identical curves are rejected as degenerate") {
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd b(3);
  b << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(lcurve_select(A, b, B, log_grid(1e-6, 1e-2, 6), unit_basis(3)),
                  std::invalid_argument);
}

TEST_CASE("full truncation reproduces the plain solve") {
  const Eigen::MatrixXd A = random_spd(7, 29, 50.0);
  Eigen::VectorXd b(7);
  for (int i = 0; i < 7; ++i) b[i] = counter_normal(30, 0, i);
  const BasisSpec basis = unit_basis(7);
  const SpectralDecomposition d = svd_unweighted(A);
  const CoefficientEstimate full = tsvd_solve(d, b, 7, basis);
  const CoefficientEstimate plain = solve_unregularized(A, b, basis);
  CHECK((full.c - plain.c).cwiseAbs().maxCoeff() <= 1e-12 * plain.c.cwiseAbs().maxCoeff());

  const CoefficientEstimate one = tsvd_solve(d, b, 1, basis);
  const double along = std::abs(one.c.dot(d.eigenvectors.col(0)));
  CHECK(one.c.norm() == doctest::Approx(along).epsilon(1e-12));

  CHECK_THROWS_AS(tsvd_solve(d, b, 8, basis), std::invalid_argument);
}

TEST_CASE("truncated expansion equals regression on the eigen-subspace") {
  // Synthetic systems, both norms, every m. The two routes differ by
  // eps_mach * lmax / lambda_m in double precision, so a spectrum within
  // three decades keeps every m at the 1e-12 agreement level.
  const int n = 10;
  const Eigen::MatrixXd A = random_spd(n, 31, 1e3);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = counter_normal(32, 0, i);
  Eigen::VectorXd P(n);
  for (int i = 0; i < n; ++i) P[i] = 0.3 + counter_uniform(34, 0, i);
  const BasisSpec basis = unit_basis(n);

  for (bool weighted : {false, true}) {
    const SpectralDecomposition d =
        weighted ? eig_generalized(A, P) : svd_unweighted(A);
    for (int m = 1; m <= d.positive_count(); ++m) {
      const CoefficientEstimate tsvd = tsvd_solve(d, b, m, basis);
      const Eigen::MatrixXd Vm = rkhs_subspace(d, m);
      const Eigen::MatrixXd proj = Vm.transpose() * A * Vm;
      const Eigen::VectorXd alpha = proj.ldlt().solve(Vm.transpose() * b);
      const Eigen::VectorXd via_subspace = Vm * alpha;
      CHECK((tsvd.c - via_subspace).norm() <= 1e-12 * std::max(1.0, tsvd.c.norm()));
    }
  }

  // On a wider spectrum the agreement degrades exactly with the
  // amplification factor; the leading decades still meet 1e-12.
  const Eigen::MatrixXd A6 = random_spd(n, 35, 1e6);
  const SpectralDecomposition d6 = svd_unweighted(A6);
  for (int m = 1; m <= n && d6.eigenvalues[m - 1] >= 1e-3 * d6.eigenvalues[0]; ++m) {
    const CoefficientEstimate tsvd = tsvd_solve(d6, b, m, basis);
    const Eigen::MatrixXd Vm = rkhs_subspace(d6, m);
    const Eigen::VectorXd alpha =
        (Vm.transpose() * A6 * Vm).ldlt().solve(Vm.transpose() * b);
    CHECK((tsvd.c - Vm * alpha).norm() <= 1e-12 * std::max(1.0, tsvd.c.norm()));
  }
}

TEST_CASE("eigen-subspaces are nested and orthonormal in their inner product") {
  const CubicSystem sys = cubic_system(16);
  const SpectralDecomposition unw = svd_unweighted(sys.A);
  const SpectralDecomposition wtd = eig_generalized(sys.A, sys.P);

  const Eigen::MatrixXd full_u = rkhs_subspace(unw, unw.positive_count());
  CHECK(((full_u.transpose() * full_u) -
         Eigen::MatrixXd::Identity(full_u.cols(), full_u.cols()))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  const Eigen::MatrixXd full_w = rkhs_subspace(wtd, wtd.positive_count());
  CHECK(((full_w.transpose() * sys.P.asDiagonal() * full_w) -
         Eigen::MatrixXd::Identity(full_w.cols(), full_w.cols()))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);

  // Projection residual of the sampled kernel is non-increasing in m.
  Eigen::VectorXd target(sys.basis.size());
  for (int i = 0; i < sys.basis.size(); ++i) {
    const double r = sys.basis.mid(i);
    target[i] = 3.0 * r * r;
  }
  double last = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= std::min(8, unw.positive_count()); ++m) {
    const Eigen::MatrixXd Vm = rkhs_subspace(unw, m);
    const double res = (target - Vm * (Vm.transpose() * target)).norm();
    CHECK(res <= last * (1.0 + 1e-12));
    last = res;
  }

  // The weighted and unweighted leading subspaces genuinely differ.
  const int m = 4;
  const Eigen::MatrixXd U = rkhs_subspace(unw, m);
  const Eigen::MatrixXd W_raw = rkhs_subspace(wtd, m);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(W_raw);
  const Eigen::MatrixXd W =
      Eigen::MatrixXd(qr.householderQ()).leftCols(m);  // orthonormal span of the weighted basis
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(U.transpose() * W);
  const double smallest_cosine = svd.singularValues().minCoeff();
  CHECK(smallest_cosine < 1.0 - 1e-8);  // principal angle > 0
}

TEST_CASE("numerical null directions of A stay null for the pencil") {
  // Constructed rank deficiency: the quotient v'Av / v'Pv vanishes relative
  // to the largest generalized eigenvalue.
  const int n = 8;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = counter_normal(41, i, j);
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ();
  Eigen::VectorXd evals(n);
  for (int i = 0; i < n; ++i) evals[i] = i < 5 ? std::pow(10.0, -i) : 0.0;
  const Eigen::MatrixXd A = Q * evals.asDiagonal() * Q.transpose();
  Eigen::VectorXd P(n);
  for (int i = 0; i < n; ++i) P[i] = 0.2 + counter_uniform(42, 0, i);

  const SpectralDecomposition unw = svd_unweighted(A);
  const SpectralDecomposition wtd = eig_generalized(A, P);
  const double gamma_max = wtd.eigenvalues[0];
  const double floor = 1e-12 * unw.eigenvalues[0];
  int checked = 0;
  for (int k = 0; k < n; ++k) {
    if (unw.eigenvalues[k] > floor) continue;
    const Eigen::VectorXd v = unw.eigenvectors.col(k);
    const double quotient = v.dot(A * v) / v.dot(P.asDiagonal() * v);
    CHECK(std::abs(quotient) <= 1e-8 * gamma_max);
    ++checked;
  }
  CHECK(checked == 3);
}
