#include <catch2/catch_amalgamated.hpp>

#include "eigcd/fom.hpp"
#include "test_util.hpp"

#include <random>

using namespace eigcd;
using namespace eigcd::testutil;

namespace {

double dense_spectral_radius_sym(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double dense_spectral_radius(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("algebraic diffusion bound: hand value on a uniform periodic grid") {
  const double re = 40.0;
  auto ops = assemble_operators(periodic_grid(4, 4, 2.0, 1.0), re);
  auto cache = make_algeig_cache(ops);
  auto b = fom_eigenbounds(ops, cache, Vec::Zero(ops.n_vel()), Vec());
  CHECK(b.im_bound == 0.0);
  const double expect =
      4.0 / re * (1.0 / (ops.grid.hx * ops.grid.hx) +
                  1.0 / (ops.grid.hy * ops.grid.hy));
  CHECK(b.re_bound == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("algebraic bounds dominate dense spectral radii") {
  std::mt19937_64 rng(31);
  auto ops = assemble_operators(periodic_grid(8, 8), 1.0);
  auto cache = make_algeig_cache(ops);
  const Mat oinv = ops.vol.cwiseInverse().asDiagonal();
  const double rho_diff = dense_spectral_radius_sym(oinv * Mat(ops.diff));

  for (int trial = 0; trial < 50; ++trial) {
    Vec u = random_divfree(ops.grid, rng);
    auto b = fom_eigenbounds(ops, cache, u, Vec());
    CHECK(b.re_bound >= rho_diff - 1e-12);
    const double rho_conv =
        dense_spectral_radius(oinv * dense_convective_matrix(ops, u, Vec()));
    CHECK(b.im_bound >= rho_conv - 1e-12 * std::max(1.0, rho_conv));
  }
}

TEST_CASE("alpha family of bounds") {
  std::mt19937_64 rng(37);

  SECTION("diffusive bound is alpha-independent on uniform square grids") {
    auto ops = assemble_operators(periodic_grid(12, 12), 100.0);
    auto cache = make_algeig_cache(ops);
    Vec u = random_divfree(ops.grid, rng);
    auto rows = alpha_family_bounds(ops, cache, u, Vec(), {0.0, 0.5, 1.0});
    CHECK(rows[0].diff_bound == Catch::Approx(rows[2].diff_bound).margin(1e-12));
    CHECK(rows[0].diff_bound == Catch::Approx(rows[1].diff_bound).margin(1e-12));
  }

  SECTION("convective bound near its minimum at alpha = 0 for the shear IC") {
    auto ops = assemble_operators(periodic_grid(20, 20), 100.0);
    auto cache = make_algeig_cache(ops);
    const auto& g = ops.grid;
    const double delta = M_PI / 15.0, eps = 1.0 / 20.0;
    Vec u = Vec::Zero(g.n_vel);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double yc = g.y_center(j);
        const double prof = yc <= M_PI ? std::tanh((yc - M_PI / 2) / delta)
                                       : std::tanh((3 * M_PI / 2 - yc) / delta);
        u(g.uidx(i, j)) = 1.0 + prof;
        u(g.vidx(i, j)) = eps * std::sin(g.x_center(i));
      }
    auto rows = alpha_family_bounds(ops, cache, u, Vec(), {0.0, 1.0});
    CHECK(rows[0].conv_bound <= rows[1].conv_bound + 1e-12);
  }

  SECTION("all alpha bounds dominate the dense radii on a 6x6 grid") {
    auto ops = assemble_operators(periodic_grid(6, 6), 5.0);
    auto cache = make_algeig_cache(ops);
    const Mat oinv = ops.vol.cwiseInverse().asDiagonal();
    const double rho_diff = dense_spectral_radius_sym(oinv * Mat(ops.diff));
    Vec u = random_divfree(ops.grid, rng);
    const double rho_conv =
        dense_spectral_radius(oinv * dense_convective_matrix(ops, u, Vec()));
    auto rows = alpha_family_bounds(ops, cache, u, Vec(),
                                    {-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0});
    for (const auto& r : rows) {
      CHECK(r.diff_bound >= rho_diff - 1e-10);
      CHECK(r.conv_bound >= rho_conv - 1e-10);
    }
  }
}

TEST_CASE("projected RK step") {
  SECTION("zero state with zero forcing stays zero") {
    auto ops = assemble_operators(periodic_grid(6, 6), 100.0);
    PoissonProjector proj(ops);
    FomState st;
    st.u = Vec::Zero(ops.n_vel());
    st.p = Vec::Zero(ops.grid.n_p);
    auto next = rk4_projection_step(ops, proj, ErkScheme::classic(4), st, 0.01,
                                    BcFunction(), Vec());
    CHECK(next.u.cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("single-mode energy decay matches the viscous rate within 1%") {
    const double re = 100.0;
    auto ops = assemble_operators(periodic_grid(32, 32), re);
    const auto& g = ops.grid;
    Vec u(g.n_vel);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        u(g.uidx(i, j)) = std::sin(g.x_edge(i)) * std::cos(g.y_center(j));
        u(g.vidx(i, j)) = -std::cos(g.x_center(i)) * std::sin(g.y_edge(j));
      }
    PoissonProjector proj(ops);
    CHECK((ops.div * u).cwiseAbs().maxCoeff() < 1e-12);

    FomState st;
    st.u = u;
    st.p = Vec::Zero(g.n_p);
    const double dt = 1e-3;
    auto next = rk4_projection_step(ops, proj, ErkScheme::classic(4), st, dt,
                                    BcFunction(), Vec());
    const double e0 = kinetic_energy(st.u, ops.vol);
    const double e1 = kinetic_energy(next.u, ops.vol);
    const double rate = std::log(e1 / e0) / dt;
    CHECK(rate == Catch::Approx(-4.0 / re).epsilon(0.01));
    CHECK((ops.div * next.u).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("adaptive FOM run on a small periodic case") {
  std::mt19937_64 rng(41);
  FomProblem prob;
  prob.ops = assemble_operators(periodic_grid(8, 8), 50.0);
  prob.u0 = random_divfree(prob.ops.grid, rng);
  prob.t_end = 0.5;
  prob.case_id = "smoke";
  auto res = run_fom(prob);

  CHECK(res.max_div_residual < 1e-8);
  CHECK(res.archive.count() == static_cast<int>(res.trace.size()) + 1);
  CHECK(res.archive.dts.minCoeff() > 0.0);
  CHECK(res.archive.dts.sum() == Catch::Approx(prob.t_end).margin(1e-10));
  CHECK(res.archive.times(res.archive.count() - 1) ==
        Catch::Approx(prob.t_end).margin(1e-12));

  // Periodic and unforced: kinetic energy non-increasing per step.
  double prev = kinetic_energy(res.archive.X.col(0), prob.ops.vol);
  for (const auto& row : res.trace) {
    CHECK(row.energy <= prev * (1.0 + 1e-10));
    prev = row.energy;
  }
}

TEST_CASE("run_fom with T = 0 archives only the initial condition") {
  std::mt19937_64 rng(43);
  FomProblem prob;
  prob.ops = assemble_operators(periodic_grid(4, 4), 10.0);
  prob.u0 = random_divfree(prob.ops.grid, rng);
  prob.t_end = 0.0;
  auto res = run_fom(prob);
  CHECK(res.archive.count() == 1);
  CHECK(res.trace.empty());
  CHECK(res.archive.dts(0) == 0.0);
}
