#pragma once

#include "eigcd/fom.hpp"

#include <iostream>

namespace eigcd {

// Omega-orthonormal velocity basis with its boundary basis and lifting map.
// Phi columns are discretely divergence-free; F_inhom carries the
// inhomogeneous boundary data (empty in fully periodic cases).
struct PodBasis {
  Mat Phi;     // n_vel x M, Phi^T Omega Phi = I
  Vec sigma;   // all computed singular values, non-increasing
  int M = 0;
  Mat Phi_bc;  // n_bc x M_bc, Phi_bc^T Phi_bc = I
  int M_bc = 0;
  Mat F_inhom;  // n_vel x M_bc lifting map
  Vec vol;      // Omega diagonal, kept for projections

  Vec bc_coeffs(const Vec& y_bc) const {
    return M_bc > 0 ? Vec(Phi_bc.transpose() * y_bc) : Vec(Vec::Zero(0));
  }
  // Best-approximation coefficients a = Phi^T Omega u; the lifting columns
  // are Omega-orthogonal to the divergence-free basis, so no subtraction is
  // needed.
  Vec project(const Vec& u) const {
    return Phi.transpose() * vol.cwiseProduct(u);
  }
  Vec reconstruct(const Vec& a, const Vec& a_bc) const {
    Vec u = Phi.leftCols(a.size()) * a;
    if (M_bc > 0 && a_bc.size() > 0) u += F_inhom * a_bc;
    return u;
  }
};

namespace detail {

// Fix each column's sign so its largest-magnitude entry is positive.
inline void fix_signs(Mat& m) {
  for (int j = 0; j < m.cols(); ++j) {
    int row = 0;
    m.col(j).cwiseAbs().maxCoeff(&row);
    if (m(row, j) < 0.0) m.col(j) = -m.col(j);
  }
}

inline Vec quadrature_weights(const Vec& dts) {
  const double total = dts.sum();
  if (total <= 0.0) return Vec::Ones(dts.size());  // degenerate T = 0 archive
  return dts / total;
}

struct SvdResult {
  Mat modes;
  Vec sigma;
  int rank;  // effective rank after the 1e-14 relative cutoff
};

inline SvdResult weighted_svd(const Mat& samples, const Vec& weights,
                              int want, const char* what) {
  require(weights.minCoeff() >= 0.0, "weighted POD: negative weight");
  Mat scaled = samples * weights.cwiseSqrt().asDiagonal();
  Eigen::BDCSVD<Mat> svd(scaled, Eigen::ComputeThinU);
  SvdResult r;
  r.sigma = svd.singularValues();
  if (r.sigma.size() == 0 || r.sigma(0) <= 0.0)
    throw RankDeficient(std::string(what) + ": sample matrix has rank zero");
  int rank = 0;
  while (rank < r.sigma.size() && r.sigma(rank) / r.sigma(0) >= 1e-14) ++rank;
  if (want > rank) {
    std::cerr << what << ": requested " << want << " modes but effective rank"
              << " is " << rank << "; truncating\n";
  }
  r.rank = std::min(want, rank);
  r.modes = svd.matrixU().leftCols(r.rank);
  return r;
}

}  // namespace detail

// Delta t-weighted, Omega-orthonormal POD of the archived snapshots. The SVD
// is taken of Omega^{1/2} X Delta^{1/2} directly (economy form), not of the
// K x K correlation problem.
inline PodBasis weighted_pod(const SnapshotArchive& arch, int M) {
  require(M >= 1 && M <= std::min<long>(arch.X.rows(), arch.X.cols()),
          "weighted_pod: M out of range");
  const Vec vol = Vec::Constant(
      arch.X.rows(), (arch.domain.x1 - arch.domain.x0) / arch.nx *
                         (arch.domain.y1 - arch.domain.y0) / arch.ny);
  const Vec w = detail::quadrature_weights(arch.dts);
  Mat scaled = vol.cwiseSqrt().asDiagonal() * arch.X;
  auto svd = detail::weighted_svd(scaled, w, M, "weighted_pod");

  PodBasis basis;
  basis.Phi = vol.cwiseSqrt().cwiseInverse().asDiagonal() * svd.modes;
  detail::fix_signs(basis.Phi);
  basis.sigma = svd.sigma;
  basis.M = svd.rank;
  basis.M_bc = 0;
  basis.vol = vol;
  return basis;
}

struct BoundaryPod {
  Mat Phi_bc;  // n_bc x M_bc
  Mat coeffs;  // M_bc x K samples a_bc(t_i)
};

// Unweighted-orthonormal basis of the boundary snapshot set, with the same
// Delta t weighting as the velocity POD.
inline BoundaryPod boundary_pod(const SnapshotArchive& arch, int M_bc) {
  require(arch.n_bc() > 0, "boundary_pod: archive has no boundary data");
  require(M_bc >= 1, "boundary_pod: M_bc must be >= 1");
  const Vec w = detail::quadrature_weights(arch.dts);
  auto svd = detail::weighted_svd(arch.ybc, w, M_bc, "boundary_pod");
  BoundaryPod bp;
  bp.Phi_bc = svd.modes;
  detail::fix_signs(bp.Phi_bc);
  bp.coeffs = bp.Phi_bc.transpose() * arch.ybc;
  return bp;
}

// Mass-consistent minimal-Omega-norm lifting: column j solves
// M f_j = B_M phi_bc_j via the pressure Poisson factorization. Such columns
// are Omega-orthogonal to every divergence-free field.
inline Mat build_lifting(const DiscreteOperators& ops,
                         const PoissonProjector& proj, const Mat& Phi_bc) {
  Mat F(ops.n_vel(), Phi_bc.cols());
  const auto oinv = ops.vol.cwiseInverse();
  for (int j = 0; j < Phi_bc.cols(); ++j) {
    const Vec rhs = ops.bmaps.B_div * Phi_bc.col(j);
    const Vec q = proj.solve(rhs);
    F.col(j) = oinv.cwiseProduct(ops.div.transpose() * q);
  }
  return F;
}

// Full offline basis construction: boundary basis and lifting first (when
// the case is inhomogeneous), then weighted POD of the homogenized
// snapshots.
inline PodBasis build_pod(const DiscreteOperators& ops,
                          const PoissonProjector& proj,
                          const SnapshotArchive& arch, int M, int M_bc) {
  if (arch.n_bc() == 0) {
    PodBasis basis = weighted_pod(arch, M);
    basis.Phi_bc.resize(0, 0);
    basis.F_inhom.resize(arch.n_vel(), 0);
    return basis;
  }
  auto bp = boundary_pod(arch, M_bc);
  Mat F = build_lifting(ops, proj, bp.Phi_bc);

  SnapshotArchive hom = arch;
  hom.X -= F * bp.coeffs;
  PodBasis basis = weighted_pod(hom, M);
  basis.Phi_bc = bp.Phi_bc;
  basis.M_bc = static_cast<int>(bp.Phi_bc.cols());
  basis.F_inhom = F;
  return basis;
}

}  // namespace eigcd
