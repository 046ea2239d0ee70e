#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "platemix/manufactured.hpp"
#include "platemix/mesh.hpp"

using namespace platemix;

TEST_CASE("all fields vanish on the boundary") {
  ManufacturedCase c = make_rm_case(0.1);
  Mesh m = mesh_at_level(c.domain, 1);
  for (int e = 0; e < m.num_edges(); ++e) {
    if (m.edge_tag[e] < 0) continue;
    Vec2 a = m.vertices[m.edges[e][0]], b = m.vertices[m.edges[e][1]];
    for (double s : {0.0, 0.31, 0.77, 1.0}) {
      Vec2 x = a + s * (b - a);
      CHECK(std::abs(c.omega(x)) <= 1e-13);
      CHECK(c.phi(x).norm() <= 1e-13);
      CHECK(c.zeta(x).norm() <= 1e-13);
    }
  }
}

TEST_CASE("shear field is independent of the thickness") {
  ManufacturedCase a = make_rm_case(1.0);
  ManufacturedCase b = make_rm_case(1e-4);
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0, 3);
  for (int k = 0; k < 50; ++k) {
    Vec2 x(u(rng), u(rng));
    CHECK((a.zeta(x) - b.zeta(x)).norm() <= 1e-13 * std::max(1.0, a.zeta(x).norm()));
  }
}

TEST_CASE("thick plate strong form holds against the difference oracle") {
  CHECK(verify_rm_case_fd(1.0) <= 1e-6);
  CHECK(verify_rm_case_fd(1e-2) <= 1e-6);
  CHECK(verify_rm_case_fd(1e-4) <= 1e-6);
}

TEST_CASE("thin plate load matches the nested difference oracle") {
  CHECK(verify_kirchhoff_case_fd() <= 1e-6);
}

TEST_CASE("thin plate rotation is the gradient of the deflection") {
  ManufacturedCase c = make_kirchhoff_case();
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.05, 2.95);
  const double h = 1e-6;
  for (int k = 0; k < 30; ++k) {
    Vec2 x(u(rng), u(rng));
    // phi equals the gradient: finite differences of omega reproduce it
    Vec2 fd((c.omega(x + Vec2(h, 0)) - c.omega(x - Vec2(h, 0))) / (2 * h),
            (c.omega(x + Vec2(0, h)) - c.omega(x - Vec2(0, h))) / (2 * h));
    CHECK((c.phi(x) - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
    // and rot phi vanishes
    double rot = (c.phi(x + Vec2(h, 0)).y() - c.phi(x - Vec2(h, 0)).y()) / (2 * h) -
                 (c.phi(x + Vec2(0, h)).x() - c.phi(x - Vec2(0, h)).x()) / (2 * h);
    CHECK(std::abs(rot) <= 1e-5);
  }
}

TEST_CASE("transverse load is the divergence of the shear") {
  ManufacturedCase c = make_rm_case(0.5);
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> u(0.05, 2.95);
  const double h = 1e-6;
  for (int k = 0; k < 30; ++k) {
    Vec2 x(u(rng), u(rng));
    double div_zeta = (c.zeta(x + Vec2(h, 0)).x() - c.zeta(x - Vec2(h, 0)).x()) / (2 * h) +
                      (c.zeta(x + Vec2(0, h)).y() - c.zeta(x - Vec2(0, h)).y()) / (2 * h);
    CHECK(std::abs(-div_zeta - c.g(x)) <= 1e-6 * std::max(1.0, std::abs(c.g(x))));
  }
}

TEST_CASE("invalid thickness rejected") {
  CHECK_THROWS_AS(make_rm_case(0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_rm_case(-1.0), std::invalid_argument);
}
