#pragma once

// Interpolation operators onto the discrete spaces:
//   interpolate_clement  vertex values from patchwise L2 projections onto
//                        linears, boundary vertices forced to zero
//   interpolate_fortin   Clement vertex part plus a diagonal bubble
//                        correction matching every tangential edge integral
//   interpolate_rt       nodal interpolant of the rotated Raviart-Thomas
//                        space (edge dof = tangential edge integral)
//
// All three are pure and safe for concurrent use.

#include <Eigen/Dense>

#include <functional>

#include "platemix/mesh.hpp"
#include "platemix/quadrature.hpp"
#include "platemix/spaces.hpp"

namespace platemix {

using VectorField = std::function<Vec2(const Vec2&)>;

namespace detail {

inline const std::vector<std::array<double, 2>>& segment_gauss8() {
  // 8-point Gauss on [0,1]: {node, weight}
  static const std::vector<std::array<double, 2>> rule = [] {
    std::vector<double> x, w;
    gauss_legendre_01(8, x, w);
    std::vector<std::array<double, 2>> r(8);
    for (int i = 0; i < 8; ++i) r[i] = {x[i], w[i]};
    return r;
  }();
  return rule;
}

}  // namespace detail

// Tangential integral of a smooth field over edge e (8-point Gauss).
inline double edge_tangential_integral(const Mesh& m, int e, const VectorField& v) {
  Vec2 a = m.vertices[m.edges[e][0]], b = m.vertices[m.edges[e][1]];
  Vec2 d = b - a;
  double s = 0;
  for (const auto& [x, w] : detail::segment_gauss8()) s += w * v(a + x * d).dot(d);
  return s;  // d carries both the tangent and the length
}

// Tangential integral of a br_vec field over edge e, analytic: the linear
// part integrates by the endpoint average, the edge's own bubble by |e|/6.
inline double edge_tangential_integral_br(const FieldFunction& f, int e) {
  const DofMap& d = *f.dofmap;
  const Mesh& m = *d.mesh;
  int va = m.edges[e][0], vb = m.edges[e][1];
  Vec2 dv = m.vertices[vb] - m.vertices[va];
  Vec2 pa = Vec2::Zero(), pb = Vec2::Zero();
  for (int c = 0; c < 2; ++c) {
    int ra = d.vertex_dof[va], rb = d.vertex_dof[vb];
    if (ra >= 0) pa[c] = f.coeffs[2 * ra + c];
    if (rb >= 0) pb[c] = f.coeffs[2 * rb + c];
  }
  double s = 0.5 * (pa + pb).dot(dv);
  int rb = d.edge_dof[e];
  if (rb >= 0) s += f.coeffs[2 * d.n_interior_vertices + rb] * m.edge_length(e) / 6.0;
  return s;
}

// Patchwise L2 projection onto linears, evaluated at the vertex. Boundary
// vertices are set to zero so the result lies in the zero-trace space.
inline FieldFunction interpolate_clement(const DofMap& br, const VectorField& v) {
  if (br.kind != SpaceKind::br_vec) throw std::invalid_argument("clement needs a br_vec dofmap");
  const Mesh& m = *br.mesh;
  FieldFunction out(br);

  std::vector<std::vector<int>> patch(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) patch[m.triangles[t][i]].push_back(t);

  QuadratureRule rule = quadrature(4);
  for (int vtx = 0; vtx < m.num_vertices(); ++vtx) {
    int rank = br.vertex_dof[vtx];
    if (rank < 0) continue;
    const Vec2 x0 = m.vertices[vtx];
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Matrix<double, 3, 2> rhs = Eigen::Matrix<double, 3, 2>::Zero();
    for (int t : patch[vtx]) {
      TriGeometry g = TriGeometry::from(m, t);
      for (size_t q = 0; q < rule.size(); ++q) {
        Vec2 x = g.point(rule.points[q]);
        double w = rule.weights[q] * g.area;
        Eigen::Vector3d mono(1.0, x.x() - x0.x(), x.y() - x0.y());
        A += w * mono * mono.transpose();
        Vec2 val = v(x);
        rhs += w * mono * val.transpose();
      }
    }
    Eigen::Matrix<double, 3, 2> coef = A.ldlt().solve(rhs);
    out.coeffs[2 * rank] = coef(0, 0);  // projection evaluated at the centered vertex
    out.coeffs[2 * rank + 1] = coef(0, 1);
  }
  return out;
}

// Fortin operator onto br_vec: Clement vertex part, bubble coefficients fixed
// so that the tangential integral over every interior edge matches the input.
inline FieldFunction interpolate_fortin(const DofMap& br, const VectorField& v) {
  FieldFunction out = interpolate_clement(br, v);
  const Mesh& m = *br.mesh;
  for (int e = 0; e < m.num_edges(); ++e) {
    int rb = br.edge_dof[e];
    if (rb < 0) continue;
    double target = edge_tangential_integral(m, e, v);
    out.coeffs[2 * br.n_interior_vertices + rb] = 0.0;
    double linear_part = edge_tangential_integral_br(out, e);
    out.coeffs[2 * br.n_interior_vertices + rb] =
        (target - linear_part) / (m.edge_length(e) / 6.0);
  }
  return out;
}

// Nodal rotated Raviart-Thomas interpolant of a smooth field.
inline FieldFunction interpolate_rt(const DofMap& rt, const VectorField& v) {
  if (rt.kind != SpaceKind::rt_rot) throw std::invalid_argument("interpolate_rt needs rt_rot");
  const Mesh& m = *rt.mesh;
  FieldFunction out(rt);
  for (int e = 0; e < m.num_edges(); ++e)
    if (rt.edge_dof[e] >= 0) out.coeffs[rt.edge_dof[e]] = edge_tangential_integral(m, e, v);
  return out;
}

// Same interpolant applied to a br_vec field; edge integrals are exact.
inline FieldFunction interpolate_rt(const DofMap& rt, const FieldFunction& br) {
  if (br.dofmap->kind != SpaceKind::br_vec)
    throw std::invalid_argument("expected a br_vec field");
  const Mesh& m = *rt.mesh;
  FieldFunction out(rt);
  for (int e = 0; e < m.num_edges(); ++e)
    if (rt.edge_dof[e] >= 0) out.coeffs[rt.edge_dof[e]] = edge_tangential_integral_br(br, e);
  return out;
}

}  // namespace platemix
