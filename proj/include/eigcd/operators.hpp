#pragma once

#include "eigcd/grid.hpp"

#include <map>
#include <tuple>
#include <vector>

namespace eigcd {

// Boundary contribution maps: y_* = B_* y_bc for * in {div, adv, flux, diff,
// grad}.
struct BoundaryMaps {
  SpMat B_div;   // y_M, pressure-cell mass defect        (n_p  x n_bc)
  SpMat B_adv;   // y_A, advected velocity at faces       (n_f  x n_bc)
  SpMat B_flux;  // y_Pi, mass flux at faces              (n_f  x n_bc)
  SpMat B_diff;  // y_D, diffusive tendency               (n_vel x n_bc)
  SpMat B_grad;  // y_G, prescribed-pressure term (empty) (n_vel x n_bc)
};

// Sparse operators of the symmetry-preserving staggered discretization.
// Momentum control volumes are uniform (hx*hy); faces carry areas, so the
// assembled tendencies are in flux form and divide by `vol` to give du/dt.
struct DiscreteOperators {
  StaggeredGrid grid;
  double re = 1.0;

  SpMat div;        // M: pressure-cell mass defect, Mu = y_M   (n_p x n_vel)
  SpMat grad;       // G = -Omega M^T                           (n_vel x n_p)
  Vec vol;          // Omega diagonal                           (n_vel)
  SpMat diff;       // D = face_div * diag(lambda) * face_grad  (n_vel x n_vel)
  SpMat face_div;   // K: signed face-to-cell incidence         (n_vel x n_f)
  SpMat face_grad;  // S: cell-to-face differencing             (n_f x n_vel)
  Vec lambda;       // face diffusivities, zero on outflow ghost faces (n_f)
  SpMat flux_interp;  // Pi: mass flux at faces                 (n_f x n_vel)
  SpMat adv_interp;   // A: advected velocity at faces          (n_f x n_vel)
  BoundaryMaps bmaps;

  int n_f = 0;

  int n_vel() const { return grid.n_vel; }
  int n_bc() const { return grid.n_bc; }
};

namespace detail {

struct FaceInfo {
  ValueRef minus, plus;      // same-component values across the face
  ValueRef flux_a, flux_b;   // normal-component values carrying the mass flux
  double area = 0.0;
  bool x_normal = false;
};

// The four faces of each momentum control volume, enumerated once; faces
// shared by two CVs of the same component get a single id.
class FaceTable {
 public:
  explicit FaceTable(const StaggeredGrid& g) : g_(g) {
    // u cells: west/east faces at pressure centres, south/north at corners.
    for (int j = 0; j < g.ny; ++j) {
      for (int i = g.u_i_begin; i < g.u_i_end; ++i) {
        touch_ux(i - 1, j);
        touch_ux(i, j);
        touch_uy(i, j);
        touch_uy(i, j + 1);
      }
    }
    for (int j = g.v_j_begin; j < g.v_j_end; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        touch_vy(i, j - 1);
        touch_vy(i, j);
        touch_vx(i, j);
        touch_vx(i + 1, j);
      }
    }
  }

  const std::vector<FaceInfo>& faces() const { return faces_; }

 private:
  using Key = std::tuple<int, int, int, int>;  // comp, orient, ia, ja

  void touch_ux(int ic, int j) {
    if (g_.x_periodic()) ic = StaggeredGrid::wrap(ic, g_.nx);
    if (!insert({0, 0, ic, j})) return;
    FaceInfo f;
    f.minus = g_.resolve_u(ic, j);
    f.plus = g_.resolve_u(ic + 1, j);
    f.flux_a = f.minus;
    f.flux_b = f.plus;
    f.area = g_.hy;
    f.x_normal = true;
    faces_.push_back(f);
  }
  void touch_uy(int i, int je) {
    if (g_.y_periodic()) je = StaggeredGrid::wrap(je, g_.ny);
    if (!insert({0, 1, i, je})) return;
    FaceInfo f;
    f.minus = g_.resolve_u(i, je - 1);
    f.plus = g_.resolve_u(i, je);
    f.flux_a = g_.resolve_v(i - 1, je);
    f.flux_b = g_.resolve_v(i, je);
    f.area = g_.hx;
    f.x_normal = false;
    faces_.push_back(f);
  }
  void touch_vy(int i, int jc) {
    if (g_.y_periodic()) jc = StaggeredGrid::wrap(jc, g_.ny);
    if (!insert({1, 1, i, jc})) return;
    FaceInfo f;
    f.minus = g_.resolve_v(i, jc);
    f.plus = g_.resolve_v(i, jc + 1);
    f.flux_a = f.minus;
    f.flux_b = f.plus;
    f.area = g_.hx;
    f.x_normal = false;
    faces_.push_back(f);
  }
  void touch_vx(int ie, int j) {
    if (g_.x_periodic()) ie = StaggeredGrid::wrap(ie, g_.nx);
    if (!insert({1, 0, ie, j})) return;
    FaceInfo f;
    f.minus = g_.resolve_v(ie - 1, j);
    f.plus = g_.resolve_v(ie, j);
    f.flux_a = g_.resolve_u(ie, j - 1);
    f.flux_b = g_.resolve_u(ie, j);
    f.area = g_.hy;
    f.x_normal = true;
    faces_.push_back(f);
  }

  bool insert(const Key& k) {
    auto [it, fresh] = ids_.emplace(k, static_cast<int>(faces_.size()));
    (void)it;
    return fresh;
  }

  const StaggeredGrid& g_;
  std::map<Key, int> ids_;
  std::vector<FaceInfo> faces_;
};

}  // namespace detail

inline DiscreteOperators assemble_operators(const StaggeredGrid& grid,
                                            double re) {
  require(re > 0.0, "assemble_operators: Re must be positive");
  DiscreteOperators ops;
  ops.grid = grid;
  ops.re = re;
  ops.vol = Vec::Constant(grid.n_vel, grid.hx * grid.hy);

  const detail::FaceTable table(grid);
  const auto& faces = table.faces();
  ops.n_f = static_cast<int>(faces.size());

  std::vector<Triplet> tK, tS, tSbc, tPi, tPibc, tA, tAbc;
  ops.lambda = Vec::Zero(ops.n_f);

  for (int f = 0; f < ops.n_f; ++f) {
    const auto& fc = faces[f];
    const bool ghost = fc.minus.ghost || fc.plus.ghost;

    // K: outward incidence; only sides that are actual control volumes.
    if (fc.minus.kind == ValueRef::Kind::Dof && !fc.minus.ghost)
      tK.emplace_back(fc.minus.index, f, 1.0);
    if (fc.plus.kind == ValueRef::Kind::Dof && !fc.plus.ghost)
      tK.emplace_back(fc.plus.index, f, -1.0);

    // Diffusion: difference across the face; outflow ghost faces carry no
    // diffusive flux (zero normal gradient). Distances wrap across periodic
    // seams.
    if (!ghost) {
      double dist = fc.x_normal ? std::abs(fc.plus.x - fc.minus.x)
                                : std::abs(fc.plus.y - fc.minus.y);
      if (fc.x_normal && grid.x_periodic())
        dist = std::min(dist, (grid.x1 - grid.x0) - dist);
      if (!fc.x_normal && grid.y_periodic())
        dist = std::min(dist, (grid.y1 - grid.y0) - dist);
      ops.lambda(f) = fc.area / (re * dist);
      for (const auto& [ref, sgn] :
           {std::pair{fc.minus, -1.0}, std::pair{fc.plus, 1.0}}) {
        if (ref.kind == ValueRef::Kind::Dof)
          tS.emplace_back(f, ref.index, sgn);
        else
          tSbc.emplace_back(f, ref.index, sgn);
      }
    }

    // Mass flux and advected velocity, arithmetic means; ghost-clamped refs
    // collapse both halves onto the interior value.
    for (const auto& ref : {fc.flux_a, fc.flux_b}) {
      if (ref.kind == ValueRef::Kind::Dof)
        tPi.emplace_back(f, ref.index, 0.5 * fc.area);
      else
        tPibc.emplace_back(f, ref.index, 0.5 * fc.area);
    }
    for (const auto& ref : {fc.minus, fc.plus}) {
      if (ref.kind == ValueRef::Kind::Dof)
        tA.emplace_back(f, ref.index, 0.5);
      else
        tAbc.emplace_back(f, ref.index, 0.5);
    }
  }

  const int nv = grid.n_vel, nf = ops.n_f, nb = grid.n_bc, np = grid.n_p;
  auto build = [](int rows, int cols, std::vector<Triplet>& t) {
    SpMat m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
  };
  ops.face_div = build(nv, nf, tK);
  ops.face_grad = build(nf, nv, tS);
  SpMat S_bc = build(nf, nb, tSbc);
  ops.flux_interp = build(nf, nv, tPi);
  ops.bmaps.B_flux = build(nf, nb, tPibc);
  ops.adv_interp = build(nf, nv, tA);
  ops.bmaps.B_adv = build(nf, nb, tAbc);

  ops.diff = ops.face_div * ops.lambda.asDiagonal() * ops.face_grad;
  ops.diff.makeCompressed();
  ops.bmaps.B_diff = ops.face_div * ops.lambda.asDiagonal() * S_bc;
  ops.bmaps.B_diff.makeCompressed();

  // Mass defect: Mu = y_M with M carrying minus the outward flux of the
  // unknowns, so boundary inflow appears with negative sign in y_M.
  std::vector<Triplet> tM, tMbc;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int c = grid.pidx(i, j);
      struct Entry {
        ValueRef ref;
        double outward_area;
      };
      const Entry ent[4] = {
          {grid.resolve_u(i, j), -grid.hy},
          {grid.resolve_u(i + 1, j), grid.hy},
          {grid.resolve_v(i, j), -grid.hx},
          {grid.resolve_v(i, j + 1), grid.hx},
      };
      for (const auto& e : ent) {
        require(!e.ref.ghost, "assemble_operators: ghost value in divergence");
        if (e.ref.kind == ValueRef::Kind::Dof)
          tM.emplace_back(c, e.ref.index, -e.outward_area);
        else
          tMbc.emplace_back(c, e.ref.index, e.outward_area);
      }
    }
  }
  ops.div = build(np, nv, tM);
  ops.bmaps.B_div = build(np, nb, tMbc);
  ops.grad = (-(ops.vol.asDiagonal() * SpMat(ops.div.transpose()))).eval();
  ops.grad.makeCompressed();
  ops.bmaps.B_grad = SpMat(nv, nb);  // no prescribed boundary pressure

  return ops;
}

// y_* vectors for a given boundary state.
struct BoundaryVectors {
  Vec y_div, y_adv, y_flux, y_diff, y_grad;
};

inline BoundaryVectors boundary_vectors(const DiscreteOperators& ops,
                                        const Vec& y_bc) {
  require_dims(y_bc.size() == ops.n_bc(),
               "boundary_vectors: y_bc dimension mismatch");
  BoundaryVectors y;
  y.y_div = ops.bmaps.B_div * y_bc;
  y.y_adv = ops.bmaps.B_adv * y_bc;
  y.y_flux = ops.bmaps.B_flux * y_bc;
  y.y_diff = ops.bmaps.B_diff * y_bc;
  y.y_grad = ops.bmaps.B_grad * y_bc;
  return y;
}

// K((Pi u_conv + y_Pi) o (A u_adv + y_A)): convective momentum outflux.
inline Vec convective_apply(const DiscreteOperators& ops, const Vec& u_conv,
                            const Vec& u_adv, const Vec& y_bc) {
  require_dims(u_conv.size() == ops.n_vel() && u_adv.size() == ops.n_vel(),
               "convective_apply: velocity dimension mismatch");
  Vec flux = ops.flux_interp * u_conv;
  Vec adv = ops.adv_interp * u_adv;
  if (y_bc.size() > 0) {
    require_dims(y_bc.size() == ops.n_bc(),
                 "convective_apply: y_bc dimension mismatch");
    flux += ops.bmaps.B_flux * y_bc;
    adv += ops.bmaps.B_adv * y_bc;
  }
  return ops.face_div * flux.cwiseProduct(adv);
}

// Same contraction with precomputed face vectors (hot path of the
// integrator).
inline Vec convective_apply_faces(const DiscreteOperators& ops,
                                  const Vec& flux, const Vec& adv) {
  return ops.face_div * flux.cwiseProduct(adv);
}

// Dense materialization of C(u_conv) = K diag(Pi u_conv + y_Pi) A for small
// grids; used by tests and the spectral oracles.
inline Mat dense_convective_matrix(const DiscreteOperators& ops,
                                   const Vec& u_conv, const Vec& y_bc) {
  Vec flux = ops.flux_interp * u_conv;
  if (y_bc.size() > 0) flux += ops.bmaps.B_flux * y_bc;
  Mat K = Mat(ops.face_div);
  Mat A = Mat(ops.adv_interp);
  return K * flux.asDiagonal() * A;
}

}  // namespace eigcd
