#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace eigcd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Complex = std::complex<double>;

// Error hierarchy. The CLI maps these onto process exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct MissingArtifact : Error {
  using Error::Error;
};
struct BlowUp : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct RankDeficient : Error {
  using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

inline void require_dims(bool cond, const std::string& msg) {
  if (!cond) throw DimensionMismatch(msg);
}

// x^p with the convention 0^p = 0, needed for the alpha-family bounds where
// zero diffusivities/fluxes correspond to genuinely empty matrix columns.
inline double pow_or_zero(double x, double p) {
  return x == 0.0 ? 0.0 : std::pow(x, p);
}

inline double weighted_norm(const Vec& u, const Vec& vol) {
  return std::sqrt(u.dot(vol.cwiseProduct(u)));
}

inline double kinetic_energy(const Vec& u, const Vec& vol) {
  return 0.5 * u.dot(vol.cwiseProduct(u));
}

}  // namespace eigcd
