#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "platemix/mesh.hpp"

using namespace platemix;

namespace {

double min_angle(const Mesh& m) {
  double worst = 10.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      Vec2 a = m.vertices[tri[(i + 1) % 3]] - m.vertices[tri[i]];
      Vec2 b = m.vertices[tri[(i + 2) % 3]] - m.vertices[tri[i]];
      worst = std::min(worst, std::acos(a.dot(b) / (a.norm() * b.norm())));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("holeless 3x3 grid counts") {
  Mesh m = generate_square_hole_mesh(3.0, {}, 1);
  CHECK(m.num_vertices() == 16);
  CHECK(m.num_edges() == 33);
  CHECK(m.num_triangles() == 18);
  CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 1);
  CHECK(validate(m).ok);
}

TEST_CASE("two-triangle unit square") {
  Mesh m = generate_square_hole_mesh(1.0, {}, 1);
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_edges() == 5);
  CHECK(m.num_triangles() == 2);
  CHECK(validate(m).ok);
}

TEST_CASE("square with unit hole") {
  Mesh m = generate_mesh(canonical_domain(), 1);
  CHECK(m.num_vertices() == 16);
  CHECK(m.num_edges() == 32);
  CHECK(m.num_triangles() == 16);
  CHECK(m.num_holes == 1);
  CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 0);
  CHECK(m.num_interior_vertices() == 0);
  CHECK(m.num_interior_edges() == 16);
  CHECK(validate(m).ok);
}

TEST_CASE("generator rejects bad holes") {
  CHECK_THROWS_AS(generate_square_hole_mesh(3.0, {Box{1.25, 1, 2, 2}}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_square_hole_mesh(3.0, {Box{0, 1, 2, 2}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_square_hole_mesh(5.0, {Box{1, 1, 2, 2}, Box{2, 1, 3, 2}}, 1),
                  std::invalid_argument);
}

TEST_CASE("refinement counts and inheritance") {
  Mesh m = generate_mesh(canonical_domain(), 1);
  Mesh r = refine_uniform(m);
  CHECK(r.num_vertices() == 48);
  CHECK(r.num_edges() == 112);
  CHECK(r.num_triangles() == 64);
  CHECK(r.num_vertices() - r.num_edges() + r.num_triangles() == 0);
  CHECK(validate(r).ok);

  Mesh sq = generate_square_hole_mesh(1.0, {}, 1);
  Mesh sqr = refine_uniform(sq);
  CHECK(sqr.num_vertices() == 9);
  CHECK(sqr.num_edges() == 16);
  CHECK(sqr.num_triangles() == 8);

  for (int t = 0; t < r.num_triangles(); ++t)
    CHECK(r.area(t) == doctest::Approx(m.area(r.parent_tri[t])/4.0).epsilon(1e-13));
}

TEST_CASE("refinement preserves area, angles and hole count over levels") {
  for (const Domain& dom : {canonical_domain(), two_hole_domain()}) {
    Mesh m = generate_mesh(dom, 1);
    double area0 = m.total_area();
    double angle0 = min_angle(m);
    for (int l = 0; l < 4; ++l) {
      m = refine_uniform(m);
      CHECK(validate(m).ok);
      CHECK(m.num_holes == dom.hole_count());
      CHECK(std::abs(m.total_area() - area0) <= 1e-12 * area0);
      CHECK(min_angle(m) == doctest::Approx(angle0).epsilon(1e-12));
      CHECK(m.num_interior_edges() ==
            m.num_interior_vertices() + m.num_triangles() + m.num_holes - 1);
    }
  }
}

TEST_CASE("boundary components") {
  Mesh m = generate_mesh(canonical_domain(), 1);
  auto cycles = boundary_components(m);
  REQUIRE(cycles.size() == 2);
  CHECK(cycles[0].size() == 12);
  CHECK(cycles[1].size() == 4);

  Mesh r = refine_uniform(m);
  cycles = boundary_components(r);
  REQUIRE(cycles.size() == 2);
  CHECK(cycles[0].size() == 24);
  CHECK(cycles[1].size() == 8);

  Mesh holeless = generate_square_hole_mesh(3.0, {}, 1);
  CHECK(boundary_components(holeless).size() == 1);
}

TEST_CASE("validate flags corrupted meshes") {
  Mesh good = generate_mesh(canonical_domain(), 1);

  {
    auto tris = good.triangles;
    std::swap(tris[3][0], tris[3][1]);  // flip orientation
    Mesh bad = Mesh::from_cells(good.vertices, tris, good.vertex_tag, good.num_holes);
    ValidationReport rep = validate(bad);
    CHECK_FALSE(rep.ok);
    bool mentions_area = false;
    for (const auto& v : rep.violations) mentions_area |= v.find("area") != std::string::npos;
    CHECK(mentions_area);
  }
  {
    // removing a fully interior triangle leaves V and E untouched, so the
    // recount trips the Euler identity
    Mesh fine = refine_uniform(good);
    int victim = -1;
    for (int t = 0; t < fine.num_triangles() && victim < 0; ++t)
      if (fine.edge_tag[fine.tri_edges[t][0]] == kInteriorTag &&
          fine.edge_tag[fine.tri_edges[t][1]] == kInteriorTag &&
          fine.edge_tag[fine.tri_edges[t][2]] == kInteriorTag)
        victim = t;
    REQUIRE(victim >= 0);
    auto tris = fine.triangles;
    tris.erase(tris.begin() + victim);
    Mesh bad = Mesh::from_cells(fine.vertices, tris, fine.vertex_tag, fine.num_holes);
    ValidationReport rep = validate(bad);
    CHECK_FALSE(rep.ok);
    bool mentions_euler = false;
    for (const auto& v : rep.violations) mentions_euler |= v.find("Euler") != std::string::npos;
    CHECK(mentions_euler);
  }
}

TEST_CASE("json round trip") {
  Mesh m = mesh_at_level(two_hole_domain(), 1);
  Mesh back = mesh_from_json(mesh_to_json(m));
  CHECK(back.num_vertices() == m.num_vertices());
  CHECK(back.num_edges() == m.num_edges());
  CHECK(back.num_triangles() == m.num_triangles());
  CHECK(back.num_holes == m.num_holes);
  CHECK(back.vertex_tag == m.vertex_tag);
  CHECK(validate(back).ok);

  nlohmann::json bad = mesh_to_json(m);
  bad["version"] = 2;
  CHECK_THROWS_AS(mesh_from_json(bad), std::invalid_argument);
  bad = mesh_to_json(m);
  bad["boundary_tags"]["vertices"].erase(0);
  CHECK_THROWS_AS(mesh_from_json(bad), std::invalid_argument);
}

TEST_CASE("edge orientation is lower to higher index") {
  Mesh m = mesh_at_level(canonical_domain(), 1);
  for (const auto& e : m.edges) CHECK(e[0] < e[1]);
  // tangent matches the stored orientation
  for (int e = 0; e < m.num_edges(); ++e) {
    Vec2 d = m.vertices[m.edges[e][1]] - m.vertices[m.edges[e][0]];
    CHECK((m.edge_tangent(e) - d.normalized()).norm() < 1e-14);
  }
}
