#pragma once

#include "eigcd/core.hpp"

#include <functional>
#include <vector>

namespace eigcd {

enum class BcKind { Periodic, Dirichlet, Outflow };

inline const char* to_string(BcKind k) {
  switch (k) {
    case BcKind::Periodic: return "periodic";
    case BcKind::Dirichlet: return "dirichlet";
    case BcKind::Outflow: return "outflow";
  }
  return "?";
}

inline BcKind bc_from_string(const std::string& s) {
  if (s == "periodic") return BcKind::Periodic;
  if (s == "dirichlet") return BcKind::Dirichlet;
  if (s == "outflow") return BcKind::Outflow;
  throw ConfigError("unknown boundary kind '" + s + "'");
}

// Boundary data and body force for a case. The value functions are sampled at
// the grid's boundary slots to build y_bc(t); they may be empty for fully
// periodic cases.
struct BoundarySpec {
  BcKind left = BcKind::Periodic;
  BcKind right = BcKind::Periodic;
  BcKind bottom = BcKind::Periodic;
  BcKind top = BcKind::Periodic;
  std::function<double(double, double, double)> u_bc;  // (x, y, t)
  std::function<double(double, double, double)> v_bc;
  std::function<double(double, double)> force_u;  // per-volume body force
  std::function<double(double, double)> force_v;
};

// A velocity value referenced by an operator stencil: either an interior
// unknown or a prescribed boundary slot. `ghost` marks values borrowed
// through the zero-gradient outflow closure; there is no control volume on
// that side of the face.
struct ValueRef {
  enum class Kind { Dof, Slot };
  Kind kind = Kind::Dof;
  int index = -1;
  double x = 0.0, y = 0.0;
  bool ghost = false;
};

struct BcSlot {
  int comp;  // 0 = u, 1 = v
  double x, y;
};

// Uniform 2D staggered Cartesian grid. u unknowns live on vertical cell
// faces, v unknowns on horizontal ones, pressure at cell centres. Unknown
// ordering is u-faces first, then v-faces, row-major by cell index.
struct StaggeredGrid {
  int nx = 0, ny = 0;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  double hx = 0, hy = 0;
  BcKind bc_left, bc_right, bc_bottom, bc_top;

  int u_i_begin = 0, u_i_end = 0;  // u DOF x-face indices in [begin, end)
  int v_j_begin = 0, v_j_end = 0;
  int n_u = 0, n_v = 0, n_vel = 0, n_p = 0, n_bc = 0;

  std::vector<BcSlot> slots;
  // Slot base offsets; -1 when the side carries no Dirichlet data.
  int slot_left_u = -1, slot_left_v = -1;
  int slot_right_u = -1, slot_right_v = -1;
  int slot_bottom_v = -1, slot_bottom_u = -1;
  int slot_top_v = -1, slot_top_u = -1;

  bool x_periodic() const { return bc_left == BcKind::Periodic; }
  bool y_periodic() const { return bc_bottom == BcKind::Periodic; }

  double x_edge(int i) const { return x0 + i * hx; }
  double y_edge(int j) const { return y0 + j * hy; }
  double x_center(int i) const { return x0 + (i + 0.5) * hx; }
  double y_center(int j) const { return y0 + (j + 0.5) * hy; }

  int n_u_cols() const { return u_i_end - u_i_begin; }
  int n_v_rows() const { return v_j_end - v_j_begin; }

  int uidx(int i, int j) const { return j * n_u_cols() + (i - u_i_begin); }
  int vidx(int i, int j) const { return n_u + (j - v_j_begin) * nx + i; }
  int pidx(int i, int j) const { return j * nx + i; }

  static int wrap(int i, int n) { return ((i % n) + n) % n; }

  // Value of the u component requested at x-face index i, cell row j.
  // Out-of-range indices resolve to boundary slots (Dirichlet) or are clamped
  // to the nearest unknown (outflow zero-gradient ghost).
  ValueRef resolve_u(int i, int j) const {
    bool ghost = false;
    if (y_periodic()) {
      j = wrap(j, ny);
    } else if (j < 0) {
      if (bc_bottom == BcKind::Dirichlet) {
        int si = x_periodic() ? wrap(i, nx) : i;
        return slot_ref(slot_bottom_u + si);
      }
      j = 0;
      ghost = true;
    } else if (j >= ny) {
      if (bc_top == BcKind::Dirichlet) {
        int si = x_periodic() ? wrap(i, nx) : i;
        return slot_ref(slot_top_u + si);
      }
      j = ny - 1;
      ghost = true;
    }
    if (x_periodic()) {
      i = wrap(i, nx);
    } else if (i < u_i_begin) {
      if (bc_left == BcKind::Dirichlet) return slot_ref(slot_left_u + j);
      i = u_i_begin;
      ghost = true;
    } else if (i >= u_i_end) {
      if (bc_right == BcKind::Dirichlet) return slot_ref(slot_right_u + j);
      i = u_i_end - 1;
      ghost = true;
    }
    return ValueRef{ValueRef::Kind::Dof, uidx(i, j), x_edge(i), y_center(j),
                    ghost};
  }

  // Value of the v component at cell column i, y-face index j.
  ValueRef resolve_v(int i, int j) const {
    bool ghost = false;
    if (x_periodic()) {
      i = wrap(i, nx);
    } else if (i < 0) {
      if (bc_left == BcKind::Dirichlet) {
        int sj = y_periodic() ? wrap(j, ny) : j;
        return slot_ref(slot_left_v + sj);
      }
      i = 0;
      ghost = true;
    } else if (i >= nx) {
      if (bc_right == BcKind::Dirichlet) {
        int sj = y_periodic() ? wrap(j, ny) : j;
        return slot_ref(slot_right_v + sj);
      }
      i = nx - 1;
      ghost = true;
    }
    if (y_periodic()) {
      j = wrap(j, ny);
    } else if (j < v_j_begin) {
      if (bc_bottom == BcKind::Dirichlet) return slot_ref(slot_bottom_v + i);
      j = v_j_begin;
      ghost = true;
    } else if (j >= v_j_end) {
      if (bc_top == BcKind::Dirichlet) return slot_ref(slot_top_v + i);
      j = v_j_end - 1;
      ghost = true;
    }
    return ValueRef{ValueRef::Kind::Dof, vidx(i, j), x_center(i), y_edge(j),
                    ghost};
  }

  // Sample boundary value functions at every slot to build y_bc(t).
  Vec eval_bc(const BoundarySpec& bc, double t) const {
    Vec y = Vec::Zero(n_bc);
    for (int s = 0; s < n_bc; ++s) {
      const BcSlot& sl = slots[s];
      if (sl.comp == 0) {
        y(s) = bc.u_bc ? bc.u_bc(sl.x, sl.y, t) : 0.0;
      } else {
        y(s) = bc.v_bc ? bc.v_bc(sl.x, sl.y, t) : 0.0;
      }
    }
    return y;
  }

  // Per-volume body force sampled at all velocity unknowns.
  Vec eval_force(const BoundarySpec& bc) const {
    Vec f = Vec::Zero(n_vel);
    if (bc.force_u) {
      for (int j = 0; j < ny; ++j)
        for (int i = u_i_begin; i < u_i_end; ++i)
          f(uidx(i, j)) = bc.force_u(x_edge(i), y_center(j));
    }
    if (bc.force_v) {
      for (int j = v_j_begin; j < v_j_end; ++j)
        for (int i = 0; i < nx; ++i)
          f(vidx(i, j)) = bc.force_v(x_center(i), y_edge(j));
    }
    return f;
  }

 private:
  ValueRef slot_ref(int s) const {
    const BcSlot& sl = slots[s];
    return ValueRef{ValueRef::Kind::Slot, s, sl.x, sl.y, false};
  }
};

struct Domain {
  double x0, x1, y0, y1;
};

inline StaggeredGrid build_grid(int nx, int ny, const Domain& dom,
                                const BoundarySpec& bc) {
  require(nx >= 2 && ny >= 2, "build_grid: nx, ny must be >= 2");
  require(dom.x1 > dom.x0 && dom.y1 > dom.y0,
          "build_grid: domain extents must be positive");
  require((bc.left == BcKind::Periodic) == (bc.right == BcKind::Periodic),
          "build_grid: periodic sides must come in matched pairs (x)");
  require((bc.bottom == BcKind::Periodic) == (bc.top == BcKind::Periodic),
          "build_grid: periodic sides must come in matched pairs (y)");

  StaggeredGrid g;
  g.nx = nx;
  g.ny = ny;
  g.x0 = dom.x0;
  g.x1 = dom.x1;
  g.y0 = dom.y0;
  g.y1 = dom.y1;
  g.hx = (dom.x1 - dom.x0) / nx;
  g.hy = (dom.y1 - dom.y0) / ny;
  g.bc_left = bc.left;
  g.bc_right = bc.right;
  g.bc_bottom = bc.bottom;
  g.bc_top = bc.top;

  if (g.x_periodic()) {
    g.u_i_begin = 0;
    g.u_i_end = nx;
  } else {
    g.u_i_begin = (bc.left == BcKind::Dirichlet) ? 1 : 0;
    g.u_i_end = (bc.right == BcKind::Dirichlet) ? nx : nx + 1;
  }
  if (g.y_periodic()) {
    g.v_j_begin = 0;
    g.v_j_end = ny;
  } else {
    g.v_j_begin = (bc.bottom == BcKind::Dirichlet) ? 1 : 0;
    g.v_j_end = (bc.top == BcKind::Dirichlet) ? ny : ny + 1;
  }
  g.n_u = g.n_u_cols() * ny;
  g.n_v = g.n_v_rows() * nx;
  g.n_vel = g.n_u + g.n_v;
  g.n_p = nx * ny;

  // Boundary value slots, sides in the fixed order left, right, bottom, top;
  // the side-normal component first, then the tangential one.
  auto add_left_right = [&](BcKind kind, int iface, int& su, int& sv) {
    if (kind != BcKind::Dirichlet) return;
    su = static_cast<int>(g.slots.size());
    for (int j = 0; j < ny; ++j)
      g.slots.push_back({0, g.x_edge(iface), g.y_center(j)});
    sv = static_cast<int>(g.slots.size());
    const int jmax = g.y_periodic() ? ny - 1 : ny;
    for (int j = 0; j <= jmax; ++j)
      g.slots.push_back({1, g.x_edge(iface), g.y_edge(j)});
  };
  auto add_bottom_top = [&](BcKind kind, int jface, int& sv, int& su) {
    if (kind != BcKind::Dirichlet) return;
    sv = static_cast<int>(g.slots.size());
    for (int i = 0; i < nx; ++i)
      g.slots.push_back({1, g.x_center(i), g.y_edge(jface)});
    su = static_cast<int>(g.slots.size());
    const int imax = g.x_periodic() ? nx - 1 : nx;
    for (int i = 0; i <= imax; ++i)
      g.slots.push_back({0, g.x_edge(i), g.y_edge(jface)});
  };
  add_left_right(bc.left, 0, g.slot_left_u, g.slot_left_v);
  add_left_right(bc.right, nx, g.slot_right_u, g.slot_right_v);
  add_bottom_top(bc.bottom, 0, g.slot_bottom_v, g.slot_bottom_u);
  add_bottom_top(bc.top, ny, g.slot_top_v, g.slot_top_u);
  g.n_bc = static_cast<int>(g.slots.size());
  return g;
}

}  // namespace eigcd
