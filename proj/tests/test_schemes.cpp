#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "platemix/errors.hpp"
#include "platemix/manufactured.hpp"
#include "platemix/mesh.hpp"
#include "platemix/norms.hpp"
#include "platemix/schemes.hpp"
#include "platemix/system.hpp"

using namespace platemix;

namespace {

double matrix_scale(const SparseMat& A) {
  double s = 0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMat::InnerIterator it(A, k); it; ++it) s = std::max(s, std::abs(it.value()));
  return s;
}

// residual of the rows belonging to one block of the solved system
double block_row_residual(const SchemeSystem& S, const SolutionFields& sol,
                          const std::string& name) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(S.sys.size());
  auto put = [&](const std::string& blk, const Eigen::VectorXd& v) {
    if (!S.sys.has_block(blk)) return;
    const auto& b = S.sys.block(blk);
    x.segment(b.offset, b.size) = v;
  };
  put("phi", sol.phi.coeffs);
  if (sol.zeta) put("zeta", sol.zeta->coeffs);
  put("omega", sol.omega.coeffs);
  if (sol.y) put("y", sol.y->coeffs);
  if (sol.p.size()) put("p", sol.p);
  if (S.sys.has_block("mean")) x[S.sys.block("mean").offset] = sol.mean_multiplier;
  Eigen::VectorXd r = S.sys.A * x - S.sys.rhs;
  const auto& b = S.sys.block(name);
  return r.segment(b.offset, b.size).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("every scheme assembles a symmetric system") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  ManufacturedCase rm = make_rm_case(0.3);
  ManufacturedCase kirch = make_kirchhoff_case();
  for (SchemeKind kind : {SchemeKind::rm_mixed, SchemeKind::rm_mixed_reduced,
                          SchemeKind::rm_primal, SchemeKind::bfs_check}) {
    SchemeSystem S = assemble_scheme(m, rm.problem(), kind, 0.3);
    CHECK(max_asymmetry(S.sys.A) <= 1e-13 * matrix_scale(S.sys.A));
  }
  for (SchemeKind kind : {SchemeKind::k_mixed, SchemeKind::k_mixed_reduced}) {
    SchemeSystem S = assemble_scheme(m, kirch.problem(), kind, 0.0);
    CHECK(max_asymmetry(S.sys.A) <= 1e-13 * matrix_scale(S.sys.A));
  }
}

TEST_CASE("unknown counts") {
  Mesh m = mesh_at_level(canonical_domain(), 2);
  int V_int = m.num_interior_vertices(), E_int = m.num_interior_edges(), T = m.num_triangles();
  SchemeSystem S = assemble_scheme(m, make_rm_case(1.0).problem(), SchemeKind::rm_mixed, 1.0);
  CHECK(S.sys.size() == (2 * V_int + E_int) + E_int + V_int + (V_int + 1) + T + 1);
  CHECK(S.sys.size() == 1346);
}

TEST_CASE("thin-plate system equals the thick one with the shear removed at t = 1") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  ManufacturedCase rm = make_rm_case(1.0);
  SchemeSystem R = assemble_scheme(m, rm.problem(), SchemeKind::rm_mixed, 1.0);
  ManufacturedCase kc = make_kirchhoff_case();
  PlateProblem kp = kc.problem();
  kp.load_f = rm.problem().load_f;  // same loads so the rhs agrees too
  kp.load_g = rm.problem().load_g;
  kp.load_quadrature_degree = rm.load_degree;
  SchemeSystem K = assemble_scheme(m, kp, SchemeKind::k_mixed, 0.0);

  Eigen::MatrixXd Ar(R.sys.A), Ak(K.sys.A);
  auto sub = [](const Eigen::MatrixXd& A, const BlockSystem& sys, const std::string& r,
                const std::string& c) {
    const auto& rb = sys.block(r);
    const auto& cb = sys.block(c);
    return A.block(rb.offset, cb.offset, rb.size, cb.size).eval();
  };
  for (auto [r, c] : std::vector<std::pair<std::string, std::string>>{
           {"phi", "phi"}, {"phi", "y"}, {"phi", "p"}, {"omega", "y"}, {"p", "mean"}}) {
    CHECK((sub(Ar, R.sys, r, c) - sub(Ak, K.sys, r, c)).norm() == 0.0);
  }
  CHECK((R.sys.extract("phi", R.sys.rhs) - K.sys.extract("phi", K.sys.rhs)).norm() == 0.0);
  CHECK((R.sys.extract("omega", R.sys.rhs) - K.sys.extract("omega", K.sys.rhs)).norm() == 0.0);
}

TEST_CASE("precondition violations are rejected") {
  Mesh coarse = generate_mesh(canonical_domain(), 1);  // no interior vertices
  ManufacturedCase rm = make_rm_case(1.0);
  CHECK_THROWS_AS(assemble_scheme(coarse, rm.problem(), SchemeKind::rm_mixed, 1.0),
                  std::invalid_argument);
  Mesh m = mesh_at_level(canonical_domain(), 1);
  CHECK_THROWS_AS(assemble_scheme(m, rm.problem(), SchemeKind::rm_mixed, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_scheme(m, rm.problem(), SchemeKind::rm_primal, -1.0),
                  std::invalid_argument);
}

TEST_CASE("zero loads produce the zero solution") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  PlateProblem prob;
  for (SchemeKind kind : {SchemeKind::rm_mixed, SchemeKind::k_mixed}) {
    SchemeSystem S = assemble_scheme(m, prob, kind, 0.5);
    SolutionFields sol = solve_scheme(S);
    CHECK(sol.phi.coeffs.norm() == 0.0);
    CHECK(sol.omega.coeffs.norm() == 0.0);
  }
}

TEST_CASE("solved systems satisfy their constraint rows") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  ManufacturedCase rm = make_rm_case(1e-1);
  SchemeSystem S = assemble_scheme(m, rm.problem(), SchemeKind::rm_mixed, 1e-1);
  SolutionFields sol = solve_scheme(S);
  double scale = std::max(1.0, S.sys.rhs.lpNorm<Eigen::Infinity>());
  CHECK(block_row_residual(S, sol, "y") <= 1e-9 * scale);
  CHECK(block_row_residual(S, sol, "p") <= 1e-9 * scale);
  CHECK(block_row_residual(S, sol, "mean") <= 1e-9 * scale);
}

TEST_CASE("thin-plate solution satisfies the limit constraints") {
  Mesh m = mesh_at_level(canonical_domain(), 2);
  ManufacturedCase kc = make_kirchhoff_case();
  SchemeSystem S = assemble_scheme(m, kc.problem(), SchemeKind::k_mixed, 0.0);
  SolutionFields sol = solve_scheme(S);
  // (rot phi, q) = 0 and (phi - grad omega, grad z) = 0 for all tests
  double scale = std::max(1.0, S.sys.rhs.lpNorm<Eigen::Infinity>());
  CHECK(block_row_residual(S, sol, "y") <= 1e-9 * scale);
  CHECK(block_row_residual(S, sol, "p") <= 1e-9 * scale);
}

TEST_CASE("errors decrease under refinement") {
  ManufacturedCase rm = make_rm_case(1e-1);
  double prev_phi = 0, prev_w = 0;
  for (int l = 1; l <= 2; ++l) {
    Mesh m = mesh_at_level(canonical_domain(), l);
    SolutionFields sol = solve_scheme(assemble_scheme(m, rm.problem(), SchemeKind::rm_mixed, 1e-1));
    ErrorRecord err = error_norms(sol, rm);
    if (l == 2) {
      CHECK(err.phi_h1 < prev_phi);
      CHECK(err.w_h1 < prev_w);
    }
    prev_phi = err.phi_h1;
    prev_w = err.w_h1;
  }
}

TEST_CASE("primal and reduced mixed schemes produce the same rotation and deflection") {
  ManufacturedCase rm = make_rm_case(1.0);
  Mesh m = mesh_at_level(canonical_domain(), 1);
  SolutionFields mixed =
      solve_scheme(assemble_scheme(m, rm.problem(), SchemeKind::rm_mixed_reduced, 1.0));
  SolutionFields primal =
      solve_scheme(assemble_scheme(m, rm.problem(), SchemeKind::rm_primal, 1.0));
  CHECK((mixed.phi.coeffs - primal.phi.coeffs).norm() <= 1e-8 * primal.phi.coeffs.norm());
  CHECK((mixed.omega.coeffs - primal.omega.coeffs).norm() <= 1e-8 * primal.omega.coeffs.norm());
}

TEST_CASE("shear recovery") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  DofMap rt = build_dofmap(m, SpaceKind::rt_rot);
  DofMap br = build_dofmap(m, SpaceKind::br_vec);
  DofMap p1z = build_dofmap(m, SpaceKind::p1_zero);

  SUBCASE("gradient of a single hat") {
    FieldFunction omega(p1z);
    omega.coeffs[5] = 1.0;
    FieldFunction phi(br);  // zero
    FieldFunction zeta = recover_shear(rt, phi, omega, 1.0);
    Eigen::VectorXd want = gradient_edge_coefficients(rt, omega);
    CHECK((zeta.coeffs - want).lpNorm<Eigen::Infinity>() <= 1e-14);
  }

  SUBCASE("edgewise compatible pair recovers zero") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1, 1);
    FieldFunction omega(p1z);
    for (int i = 0; i < omega.coeffs.size(); ++i) omega.coeffs[i] = u(rng);
    // bubble-only field whose edge integrals match grad omega
    FieldFunction phi(br);
    Eigen::VectorXd gw = gradient_edge_coefficients(rt, omega);
    for (int e = 0; e < m.num_edges(); ++e) {
      int rb = br.edge_dof[e];
      if (rb < 0) continue;
      phi.coeffs[2 * br.n_interior_vertices + rb] = gw[rt.edge_dof[e]] / (m.edge_length(e) / 6.0);
    }
    FieldFunction zeta = recover_shear(rt, phi, omega, 0.37);
    CHECK(zeta.coeffs.lpNorm<Eigen::Infinity>() <= 1e-12 * gw.lpNorm<Eigen::Infinity>());
  }

  SUBCASE("matches the solved shear of the reduced scheme") {
    ManufacturedCase rm = make_rm_case(1.0);
    SolutionFields sol =
        solve_scheme(assemble_scheme(m, rm.problem(), SchemeKind::rm_mixed_reduced, 1.0));
    FieldFunction rec = recover_shear(*sol.rt_map, sol.phi, sol.omega, 1.0);
    CHECK(l2_norm(FieldFunction(*sol.rt_map, rec.coeffs - sol.zeta->coeffs)) <=
          1e-8 * l2_norm(*sol.zeta));
  }

  SUBCASE("invalid thickness") {
    FieldFunction omega(p1z);
    FieldFunction phi(br);
    CHECK_THROWS_AS(recover_shear(rt, phi, omega, 0.0), std::invalid_argument);
  }
}

TEST_CASE("near-limit thickness approaches the rotation-free constraint") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  ManufacturedCase rm = make_rm_case(1e-8);
  SolutionFields sol = solve_scheme(assemble_scheme(m, rm.problem(), SchemeKind::rm_mixed, 1e-8));
  // moments of rot phi_h against unit piecewise constants
  double worst = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    double circ = 0;
    for (int i = 0; i < 3; ++i) {
      int e = m.tri_edges[t][i];
      circ += m.tri_edge_sign[t][i] * edge_tangential_integral_br(sol.phi, e);
    }
    worst = std::max(worst, std::abs(circ) / std::sqrt(m.area(t)));
  }
  CHECK(worst <= 1e-6 * l2_norm(sol.phi));
}

TEST_CASE("cross-check gaps") {
  Mesh m = mesh_at_level(canonical_domain(), 1);

  SUBCASE("zero loads give zero gaps") {
    PlateProblem prob;
    BfsGaps g = bfs_cross_check(m, prob, 1.0);
    CHECK(g.phi_h1 == 0.0);
    CHECK(g.omega_h1 == 0.0);
    CHECK(g.y_h1 == 0.0);
    CHECK(g.p_l2 == 0.0);
    CHECK(g.alpha_res == 0.0);
  }

  SUBCASE("manufactured loads give five finite numbers") {
    ManufacturedCase rm = make_rm_case(1.0);
    BfsGaps g = bfs_cross_check(m, rm.problem(), 1.0);
    for (double v : {g.phi_h1, g.omega_h1, g.y_h1, g.p_l2, g.alpha_res}) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
  }

  SUBCASE("the two five-field systems coincide discretely") {
    // (phi_B, alpha_B, omega_B, y_B, p_B) = (phi, zeta + grad y, omega, -y, -p)
    // solves the comparison system exactly: alpha stays inside the edge
    // element space because gradients of the hole-constant space do
    ManufacturedCase rm = make_rm_case(1e-1);
    BfsGaps g = bfs_cross_check(m, rm.problem(), 1e-1);
    CHECK(g.phi_h1 <= 1e-8 * g.phi_scale);
    CHECK(g.omega_h1 <= 1e-8 * g.omega_scale);
    CHECK(g.y_h1 <= 1e-8 * g.y_scale);
    CHECK(g.p_l2 <= 1e-8 * g.p_scale);
    CHECK(g.alpha_res <= 1e-8 * g.alpha_scale);
  }
}

TEST_CASE("block system export and standalone solve") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  ManufacturedCase rm = make_rm_case(0.5);
  SchemeSystem S = assemble_scheme(m, rm.problem(), SchemeKind::rm_mixed, 0.5);
  const char* path = "scheme_export_test.mtx";
  write_matrix_market(S.sys.A, path, true);
  SparseMat back = read_matrix_market(path);
  CHECK((Eigen::MatrixXd(back) - Eigen::MatrixXd(S.sys.A)).norm() <=
        1e-12 * Eigen::MatrixXd(S.sys.A).norm());
  SolveReport rep = solve_symmetric_indefinite(back, S.sys.rhs);
  CHECK(rep.rel_residual <= 1e-10);
  std::remove(path);
}
