#pragma once

#include <string>

#include "mfk/grid.hpp"
#include "mfk/measures.hpp"
#include "mfk/particles.hpp"
#include "mfk/regression.hpp"
#include "mfk/spectral.hpp"

namespace mfk::csv {

// All writers print doubles with "%.17g" so files are value-exact on reload
// and byte-identical across reruns.

std::string format_double(double v);

/// `t,x,u`, one record per (time, space) node, time-major.
void write_field(const SpaceTimeField& field, const std::string& path);
SpaceTimeField read_field(const std::string& path);

/// `t,particle_id,x`, snapshot-major.
void write_ensemble(const ParticleEnsemble& ensemble, const TimeGrid& times,
                    const std::string& path);

/// `x,rho,in_support`.
void write_measure(const EmpiricalMeasure& measure, const std::string& path);
EmpiricalMeasure read_measure(const std::string& path);

/// Header `kind,n,T,x0,dx`, one value row, then n row-major matrix rows.
void write_kernel_matrix(const KernelMatrix& kernel, const std::string& path);
KernelMatrix read_kernel_matrix(const std::string& path);

/// System bundle: A.csv (matrix rows), b.csv and P.csv (one entry per line),
/// basis.csv (`mode,n,r_lo,r_hi,nu` header plus one value row).
void write_system(const RegressionSystem& system, const std::string& directory);
RegressionSystem read_system(const std::string& directory);

/// `i,r_mid,c_i`.
void write_estimate(const CoefficientEstimate& estimate, const std::string& path);
Eigen::VectorXd read_estimate_coefficients(const std::string& path);

/// `i,sigma,b_proj,ratio,weighted`.
void write_picard(const PicardTable& table, const std::string& path);

/// `i,lambda,weighted` for one or two decompositions merged.
void write_spectra(const SpectralDecomposition& unweighted, const SpectralDecomposition& weighted,
                   const std::string& path);

void write_matrix(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd read_matrix(const std::string& path);
void write_vector(const Eigen::VectorXd& v, const std::string& path);
Eigen::VectorXd read_vector(const std::string& path);

}  // namespace mfk::csv
