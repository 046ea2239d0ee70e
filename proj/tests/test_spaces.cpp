#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "platemix/forms.hpp"
#include "platemix/mesh.hpp"
#include "platemix/spaces.hpp"

using namespace platemix;

TEST_CASE("dof counts on the refined holed mesh") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  REQUIRE(m.num_interior_vertices() == 16);
  REQUIRE(m.num_interior_edges() == 80);
  CHECK(build_dofmap(m, SpaceKind::p1_hole_constant).n_dofs == 17);
  CHECK(build_dofmap(m, SpaceKind::rt_rot).n_dofs == 80);
  CHECK(build_dofmap(m, SpaceKind::br_vec).n_dofs == 112);
  CHECK(build_dofmap(m, SpaceKind::p1_zero).n_dofs == 16);
  CHECK(build_dofmap(m, SpaceKind::p0_mean_zero).n_dofs == m.num_triangles());
  CHECK(build_dofmap(m, SpaceKind::p1).n_dofs == m.num_vertices());
}

TEST_CASE("hole-constant space reduces to the zero-trace space when J = 0") {
  Mesh m = mesh_at_level(Domain{3.0, {}}, 1);
  DofMap a = build_dofmap(m, SpaceKind::p1_hole_constant);
  DofMap b = build_dofmap(m, SpaceKind::p1_zero);
  CHECK(a.n_dofs == b.n_dofs);
  CHECK(a.vertex_dof == b.vertex_dof);
}

TEST_CASE("hole vertices tie to one unknown") {
  Mesh m = mesh_at_level(two_hole_domain(), 1);
  DofMap d = build_dofmap(m, SpaceKind::p1_hole_constant);
  CHECK(d.n_dofs == m.num_interior_vertices() + 2);
  int hole1 = -1, hole2 = -1;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.vertex_tag[v] == 1) {
      if (hole1 < 0) hole1 = d.vertex_dof[v];
      CHECK(d.vertex_dof[v] == hole1);
    }
    if (m.vertex_tag[v] == 2) {
      if (hole2 < 0) hole2 = d.vertex_dof[v];
      CHECK(d.vertex_dof[v] == hole2);
    }
    if (m.vertex_tag[v] == 0) CHECK(d.vertex_dof[v] == -1);
  }
  CHECK(hole1 != hole2);
}

TEST_CASE("exact sequence identities") {
  Mesh coarse = generate_mesh(canonical_domain(), 1);
  ExactSequenceReport rep = check_exact_sequence(coarse);
  CHECK(rep.ok);
  CHECK(rep.dim_rt == 16);
  CHECK(rep.dim_grad_source == 1);
  CHECK(rep.dim_rot_target == 15);

  Mesh fine = refine_uniform(coarse);
  rep = check_exact_sequence(fine);
  CHECK(rep.ok);
  CHECK(rep.dim_rt == 80);
  CHECK(rep.dim_grad_source == 17);
  CHECK(rep.dim_rot_target == 63);
  CHECK(rep.rot_rank == 63);
  CHECK(rep.max_gradient_rot_residual <= 1e-12);
}

TEST_CASE("holeless sequence dimension") {
  for (int l : {1, 2}) {
    Mesh m = mesh_at_level(Domain{3.0, {}}, l);
    DofMap rt = build_dofmap(m, SpaceKind::rt_rot);
    CHECK(rt.n_dofs == m.num_interior_vertices() + m.num_triangles() - 1);
    CHECK(check_exact_sequence(m).ok);
  }
}

TEST_CASE("rt basis circulation matches the orientation sign") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  DofMap rt = build_dofmap(m, SpaceKind::rt_rot);
  for (int t = 0; t < m.num_triangles(); ++t) {
    CellBasis cb(m, rt, t);
    for (int i = 0; i < 3; ++i)
      CHECK(cb.rt_rot(i) * m.area(t) ==
            doctest::Approx(m.tri_edge_sign[t][i]).epsilon(1e-12));
  }
}

TEST_CASE("edge dof sign consistency across adjacent triangles") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  DofMap br = build_dofmap(m, SpaceKind::br_vec);
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  FieldFunction f(br);
  for (int i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] = u(rng);

  // the tangential edge integral of a continuous field computed from the
  // local trace of either neighbour must coincide
  for (int e = 0; e < m.num_edges(); ++e) {
    if (m.edge_tris[e][1] < 0) continue;
    double vals[2];
    for (int s = 0; s < 2; ++s) {
      int t = m.edge_tris[e][s];
      Eigen::MatrixXd T = local_rt_interpolation(m, br, t);
      int local = -1;
      for (int i = 0; i < 3; ++i)
        if (m.tri_edges[t][i] == e) local = i;
      REQUIRE(local >= 0);
      int dofs[9];
      br.cell_dofs(t, dofs);
      double v = 0;
      for (int j = 0; j < 9; ++j)
        if (dofs[j] >= 0) v += T(local, j) * f.coeffs[dofs[j]];
      vals[s] = v;
    }
    CHECK(vals[0] == doctest::Approx(vals[1]).epsilon(1e-12));
  }
}

TEST_CASE("field json dump") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  DofMap rt = build_dofmap(m, SpaceKind::rt_rot);
  FieldFunction f(rt);
  f.coeffs[3] = 2.5;
  auto j = field_to_json(f);
  CHECK(j["kind"] == "rt_rot");
  CHECK(j["n_dofs"] == 80);
  CHECK(j["coefficients"][3] == 2.5);
  CHECK_THROWS_AS(FieldFunction(rt, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}
