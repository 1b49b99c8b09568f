#pragma once

#include "eigcd/core.hpp"

#include <array>
#include <vector>

namespace eigcd {

// Explicit Runge-Kutta scheme with s stages and order p = s <= 4, so the
// stability function is the degree-s Taylor polynomial of exp(z).
struct ErkScheme {
  int stages = 4;
  Mat a;   // strictly lower triangular stage coefficients
  Vec b;   // weights
  Vec c;   // abscissae, c_i = sum_j a_ij

  static ErkScheme classic(int s) {
    require(s >= 1 && s <= 4, "ErkScheme: stages must be in 1..4");
    ErkScheme sc;
    sc.stages = s;
    sc.a = Mat::Zero(s, s);
    sc.b = Vec::Zero(s);
    switch (s) {
      case 1:  // forward Euler
        sc.b << 1.0;
        break;
      case 2:  // Heun
        sc.a(1, 0) = 1.0;
        sc.b << 0.5, 0.5;
        break;
      case 3:  // Kutta's third-order scheme
        sc.a(1, 0) = 0.5;
        sc.a(2, 0) = -1.0;
        sc.a(2, 1) = 2.0;
        sc.b << 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
        break;
      case 4:  // classic RK4
        sc.a(1, 0) = 0.5;
        sc.a(2, 1) = 0.5;
        sc.a(3, 2) = 1.0;
        sc.b << 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0;
        break;
    }
    sc.c = sc.a.rowwise().sum();
    return sc;
  }
};

// Bendixson-rectangle corner: the relevant eigenvalue estimate is
// lambda = -re_bound + i*im_bound with both components nonnegative.
struct EigenboundEstimate {
  double re_bound = 0.0;
  double im_bound = 0.0;

  double modulus() const { return std::hypot(re_bound, im_bound); }
  Complex corner() const { return Complex(-re_bound, im_bound); }
};

// |R(z)| with R the Taylor polynomial of exp up to the stage count.
inline double stability_value(const ErkScheme& scheme, Complex z) {
  Complex r(1.0, 0.0);
  Complex term(1.0, 0.0);
  for (int j = 1; j <= scheme.stages; ++j) {
    term *= z / static_cast<double>(j);
    r += term;
  }
  return std::abs(r);
}

struct RayRoot {
  double zmax = 0.0;
  // Set when the ray lies on the imaginary axis and the scheme's stability
  // region touches that axis only at the origin (s = 1, 2): convection-only
  // stability is impossible and zmax = 0 is returned.
  bool degenerate = false;
};

// Largest r with |R(r * dhat)| = 1 along the ray from the origin through the
// eigenbound corner. Bracket by stepping outward in increments of 0.5 until
// |R| > 1, then bisect to the requested tolerance.
inline RayRoot ray_zmax(const ErkScheme& scheme, const EigenboundEstimate& dir,
                        double tol = 1e-6) {
  require(tol > 0.0, "ray_zmax: tol must be positive");
  const double mod = dir.modulus();
  require(mod > 0.0, "ray_zmax: direction must be nonzero");
  if (dir.re_bound == 0.0 && scheme.stages <= 2) {
    return {0.0, true};
  }
  const Complex dhat = dir.corner() / mod;

  double lo = 0.0;
  double hi = 0.5;
  const double step = 0.5;
  // RK regions with s <= 4 are bounded, so the scan terminates quickly.
  while (stability_value(scheme, hi * dhat) <= 1.0) {
    lo = hi;
    hi += step;
    require(hi < 1e3, "ray_zmax: failed to bracket |R| > 1");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (stability_value(scheme, mid * dhat) <= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

struct TimestepPolicy {
  double safety = 1.0;      // multiplier on z_max, in (0, 1]
  double dt_min = 1e-10;
  double dt_max = 1e3;      // also the fallback for vanishing eigenbounds
  double bisect_tol = 1e-6;
};

// dt = safety * z_max / |lambda_F|, clamped to [dt_min, dt_max].
inline double max_timestep(const ErkScheme& scheme,
                           const EigenboundEstimate& bound,
                           const TimestepPolicy& policy = {}) {
  const double mod = bound.modulus();
  if (mod < 1e-14) return policy.dt_max;
  const RayRoot root = ray_zmax(scheme, bound, policy.bisect_tol);
  if (root.degenerate) {
    throw Error(
        "max_timestep: purely imaginary eigenbound with a scheme whose "
        "stability region touches the imaginary axis only at the origin");
  }
  const double dt = policy.safety * root.zmax / mod;
  return std::min(std::max(dt, policy.dt_min), policy.dt_max);
}

}  // namespace eigcd
