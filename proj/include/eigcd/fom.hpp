#pragma once

#include "eigcd/operators.hpp"
#include "eigcd/stability.hpp"

#include <functional>
#include <vector>

namespace eigcd {

// Pressure projection onto the discretely divergence-consistent space.
// L = M Omega^-1 M^T is factored once; the constant pressure null space
// (fully periodic or fully Dirichlet boundaries) is handled by pinning the
// first pressure unknown to zero.
class PoissonProjector {
 public:
  explicit PoissonProjector(const DiscreteOperators& ops) : ops_(&ops) {
    const SpMat Mt = ops.div.transpose();
    SpMat L = ops.div * ops.vol.cwiseInverse().asDiagonal() * Mt;
    L.makeCompressed();
    const Vec colsum = Mt * Vec::Ones(ops.grid.n_p);
    pinned_ = colsum.cwiseAbs().maxCoeff() < 1e-12;
    if (pinned_) {
      std::vector<Triplet> t;
      t.reserve(L.nonZeros() + 1);
      for (int k = 0; k < L.outerSize(); ++k)
        for (SpMat::InnerIterator it(L, k); it; ++it)
          if (it.row() != 0 && it.col() != 0)
            t.emplace_back(it.row(), it.col(), it.value());
      t.emplace_back(0, 0, 1.0);
      SpMat Lp(L.rows(), L.cols());
      Lp.setFromTriplets(t.begin(), t.end());
      L.swap(Lp);
    }
    ldlt_.compute(L);
    require(ldlt_.info() == Eigen::Success,
            "PoissonProjector: factorization of M Oinv M^T failed");
  }

  bool pinned() const { return pinned_; }

  Vec solve(Vec rhs) const {
    if (pinned_) rhs(0) = 0.0;
    return ldlt_.solve(rhs);
  }

  // Returns the closest (in the Omega norm) field to w with M u = y_M.
  Vec project(const Vec& w, const Vec& y_div) const {
    const Vec q = solve(ops_->div * w - y_div);
    return w - ops_->vol.cwiseInverse().cwiseProduct(ops_->div.transpose() * q);
  }

 private:
  const DiscreteOperators* ops_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  bool pinned_ = false;
};

struct FomState {
  Vec u;
  Vec p;
  double t = 0.0;
  double dt_last = 0.0;
};

// Per-step log shared by the FOM and ROM integrators.
struct TraceRow {
  double t;         // step start time
  double dt;
  double re_bound;
  double im_bound;
  double zmax;
  double energy;    // kinetic energy after the step
};
using Trace = std::vector<TraceRow>;

struct SnapshotArchive {
  Mat X;      // n_vel x K velocity snapshots
  Vec dts;    // K quadrature weights, sum = T
  Vec times;  // K sample times
  Mat ybc;    // n_bc x K boundary vectors at sample times

  std::string case_id = "custom";
  int nx = 0, ny = 0;
  Domain domain{0, 1, 0, 1};
  double re = 1.0;
  BcKind bc[4] = {BcKind::Periodic, BcKind::Periodic, BcKind::Periodic,
                  BcKind::Periodic};

  int count() const { return static_cast<int>(X.cols()); }
  int n_vel() const { return static_cast<int>(X.rows()); }
  int n_bc() const { return static_cast<int>(ybc.rows()); }
};

// Offline structures of the staggered algebraic eigenbound estimate: the
// absolute transformed operators that turn each bound into one sparse
// matrix-vector product and a max.
struct AlgEigBoundCache {
  SpMat abs_diff;  // |K^T Oinv S^T|        (n_f x n_f)
  SpMat abs_conv;  // |K|^T Oinv |A|^T      (n_f x n_f)
  double alpha = 0.0;
  double diff_bound_alpha0 = 0.0;  // constant while Lambda is constant
};

inline AlgEigBoundCache make_algeig_cache(const DiscreteOperators& ops) {
  AlgEigBoundCache c;
  const auto oinv = ops.vol.cwiseInverse();
  const SpMat Kt = ops.face_div.transpose();
  c.abs_diff =
      SpMat(Kt * oinv.asDiagonal() * SpMat(ops.face_grad.transpose()))
          .cwiseAbs();
  c.abs_conv = SpMat(Kt).cwiseAbs() * oinv.asDiagonal() *
               SpMat(ops.adv_interp.transpose()).cwiseAbs();
  c.abs_diff.makeCompressed();
  c.abs_conv.makeCompressed();
  c.diff_bound_alpha0 = (c.abs_diff * ops.lambda).maxCoeff();
  return c;
}

// alpha = 0 eigenbound estimates for Oinv D and Oinv C(u).
inline EigenboundEstimate fom_eigenbounds(const DiscreteOperators& ops,
                                          const AlgEigBoundCache& cache,
                                          const Vec& u, const Vec& y_bc) {
  require_dims(u.size() == ops.n_vel(), "fom_eigenbounds: dimension mismatch");
  EigenboundEstimate b;
  b.re_bound = cache.diff_bound_alpha0;
  Vec flux = ops.flux_interp * u;
  if (y_bc.size() > 0) flux += ops.bmaps.B_flux * y_bc;
  b.im_bound = 0.5 * (cache.abs_conv * flux.cwiseAbs()).maxCoeff();
  return b;
}

struct AlphaBoundRow {
  double alpha;
  double diff_bound;
  double conv_bound;
};

// The alpha-dependent family the staggered estimate is drawn from; alpha = 0
// avoids one elementwise product per step and is the default.
inline std::vector<AlphaBoundRow> alpha_family_bounds(
    const DiscreteOperators& ops, const AlgEigBoundCache& cache, const Vec& u,
    const Vec& y_bc, const std::vector<double>& alphas) {
  Vec flux = ops.flux_interp * u;
  if (y_bc.size() > 0) flux += ops.bmaps.B_flux * y_bc;
  const Vec aflux = flux.cwiseAbs();

  std::vector<AlphaBoundRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) {
    Vec lam_pow(ops.n_f), flux_pow(ops.n_f);
    for (int f = 0; f < ops.n_f; ++f) {
      lam_pow(f) = pow_or_zero(ops.lambda(f), 1.0 - alpha);
      flux_pow(f) = pow_or_zero(aflux(f), 1.0 - alpha);
    }
    const Vec dv = cache.abs_diff * lam_pow;
    const Vec cv = cache.abs_conv * flux_pow;
    double diff_bound = 0.0, conv_bound = 0.0;
    for (int f = 0; f < ops.n_f; ++f) {
      diff_bound =
          std::max(diff_bound, pow_or_zero(ops.lambda(f), alpha) * dv(f));
      conv_bound =
          std::max(conv_bound, pow_or_zero(aflux(f), alpha) * cv(f));
    }
    rows.push_back({alpha, diff_bound, 0.5 * conv_bound});
  }
  return rows;
}

using BcFunction = std::function<Vec(double)>;  // t -> y_bc

// One explicit RK step of the projected momentum equation. Every stage is
// re-projected so the stage fields satisfy M u = y_M at the stage time.
inline FomState rk4_projection_step(const DiscreteOperators& ops,
                                    const PoissonProjector& proj,
                                    const ErkScheme& scheme,
                                    const FomState& state, double dt,
                                    const BcFunction& ybc_at,
                                    const Vec& force) {
  require(dt > 0.0, "rk4_projection_step: dt must be positive");
  const int s = scheme.stages;
  const auto oinv = ops.vol.cwiseInverse();

  auto tendency = [&](const Vec& u, double t) -> Vec {
    const Vec ybc = ybc_at ? ybc_at(t) : Vec();
    Vec flux = ops.flux_interp * u;
    Vec adv = ops.adv_interp * u;
    if (ybc.size() > 0) {
      flux += ops.bmaps.B_flux * ybc;
      adv += ops.bmaps.B_adv * ybc;
    }
    Vec rhs = -convective_apply_faces(ops, flux, adv) + ops.diff * u;
    if (ybc.size() > 0) rhs += ops.bmaps.B_diff * ybc;
    Vec out = oinv.cwiseProduct(rhs);
    if (force.size() > 0) out += force;
    return out;
  };
  auto y_div_at = [&](double t) -> Vec {
    if (!ybc_at || ops.n_bc() == 0) return Vec::Zero(ops.grid.n_p);
    return ops.bmaps.B_div * ybc_at(t);
  };

  std::vector<Vec> k(s);
  k[0] = tendency(state.u, state.t);
  for (int i = 1; i < s; ++i) {
    Vec w = state.u;
    for (int j = 0; j < i; ++j)
      if (scheme.a(i, j) != 0.0) w += dt * scheme.a(i, j) * k[j];
    const double ti = state.t + scheme.c(i) * dt;
    w = proj.project(w, y_div_at(ti));
    k[i] = tendency(w, ti);
  }
  Vec w = state.u;
  for (int j = 0; j < s; ++j) w += dt * scheme.b(j) * k[j];

  FomState next;
  next.t = state.t + dt;
  const Vec rhs = ops.div * w - y_div_at(next.t);
  const Vec q = proj.solve(rhs);
  next.u = w - oinv.cwiseProduct(ops.div.transpose() * q);
  next.p = q / dt;
  next.dt_last = dt;
  if (next.u.cwiseAbs().maxCoeff() > 1e6)
    throw BlowUp("rk4_projection_step: velocity exceeded 1e6");
  return next;
}

struct FomProblem {
  DiscreteOperators ops;
  BoundarySpec bc;
  Vec u0;
  double t_end = 1.0;
  ErkScheme scheme = ErkScheme::classic(4);
  TimestepPolicy policy;
  int stride = 1;
  std::string case_id = "custom";
};

struct FomResult {
  SnapshotArchive archive;
  Trace trace;
  FomState final_state;
  double max_div_residual = 0.0;
};

// Integrate 0 -> T with the algebraic self-adaptive timestep, archiving the
// state every `stride` accepted steps (plus t = 0 and t = T). Snapshot
// weights are trapezoid quadrature weights over the record times, so they
// are positive and sum to T.
inline FomResult run_fom(const FomProblem& prob) {
  const auto& ops = prob.ops;
  const auto& grid = ops.grid;
  PoissonProjector proj(ops);
  const AlgEigBoundCache cache = make_algeig_cache(ops);
  const Vec force = grid.eval_force(prob.bc);

  BcFunction ybc_at;
  if (grid.n_bc > 0)
    ybc_at = [&](double t) { return grid.eval_bc(prob.bc, t); };

  FomState st;
  st.t = 0.0;
  st.u = proj.project(prob.u0, ybc_at ? Vec(ops.bmaps.B_div * ybc_at(0.0))
                                      : Vec(Vec::Zero(grid.n_p)));
  st.p = Vec::Zero(grid.n_p);

  std::vector<Vec> snaps, ybcs;
  std::vector<double> snap_times;
  auto record = [&](const FomState& s) {
    snaps.push_back(s.u);
    snap_times.push_back(s.t);
    ybcs.push_back(ybc_at ? ybc_at(s.t) : Vec(Vec::Zero(0)));
  };
  record(st);

  FomResult res;
  const double T = prob.t_end;
  long step = 0;
  while (st.t < T - 1e-12 * std::max(1.0, T)) {
    const Vec ybc_now = ybc_at ? ybc_at(st.t) : Vec();
    const EigenboundEstimate b = fom_eigenbounds(ops, cache, st.u, ybc_now);
    const RayRoot root = ray_zmax(prob.scheme, b, prob.policy.bisect_tol);
    require(!root.degenerate,
            "run_fom: convection-only stability impossible for this scheme");
    double dt = prob.policy.safety * root.zmax / b.modulus();
    dt = std::min(std::max(dt, prob.policy.dt_min), prob.policy.dt_max);
    if (st.t + dt > T) dt = T - st.t;
    st = rk4_projection_step(ops, proj, prob.scheme, st, dt, ybc_at, force);
    ++step;

    const Vec ydiv = ybc_at ? Vec(ops.bmaps.B_div * ybc_at(st.t))
                            : Vec(Vec::Zero(grid.n_p));
    const double div_res = (ops.div * st.u - ydiv).cwiseAbs().maxCoeff();
    res.max_div_residual = std::max(res.max_div_residual, div_res);

    res.trace.push_back({st.t - dt, dt, b.re_bound, b.im_bound, root.zmax,
                         kinetic_energy(st.u, ops.vol)});
    if (step % prob.stride == 0 || st.t >= T - 1e-12 * std::max(1.0, T))
      record(st);
  }

  SnapshotArchive& arch = res.archive;
  const int K = static_cast<int>(snaps.size());
  arch.X.resize(grid.n_vel, K);
  arch.ybc.resize(grid.n_bc, K);
  arch.times.resize(K);
  arch.dts.resize(K);
  for (int k = 0; k < K; ++k) {
    arch.X.col(k) = snaps[k];
    if (grid.n_bc > 0) arch.ybc.col(k) = ybcs[k];
    arch.times(k) = snap_times[k];
  }
  if (K == 1) {
    arch.dts(0) = 0.0;
  } else {
    arch.dts(0) = 0.5 * (arch.times(1) - arch.times(0));
    for (int k = 1; k < K - 1; ++k)
      arch.dts(k) = 0.5 * (arch.times(k + 1) - arch.times(k - 1));
    arch.dts(K - 1) = 0.5 * (arch.times(K - 1) - arch.times(K - 2));
  }
  arch.case_id = prob.case_id;
  arch.nx = grid.nx;
  arch.ny = grid.ny;
  arch.domain = {grid.x0, grid.x1, grid.y0, grid.y1};
  arch.re = ops.re;
  arch.bc[0] = grid.bc_left;
  arch.bc[1] = grid.bc_right;
  arch.bc[2] = grid.bc_bottom;
  arch.bc[3] = grid.bc_top;
  res.final_state = st;
  return res;
}

}  // namespace eigcd
