#pragma once

// L2 and H1 norms of discrete fields. A degree-4 rule integrates every
// product of the piecewise polynomial bases exactly.

#include <cmath>

#include "platemix/quadrature.hpp"
#include "platemix/spaces.hpp"

namespace platemix {

inline double l2_norm_sq(const FieldFunction& f) {
  const DofMap& d = *f.dofmap;
  const Mesh& m = *d.mesh;
  QuadratureRule rule = quadrature(4);
  double s = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    TriGeometry g = TriGeometry::from(m, t);
    for (size_t q = 0; q < rule.size(); ++q) {
      double w = rule.weights[q] * g.area;
      if (d.kind == SpaceKind::br_vec || d.kind == SpaceKind::rt_rot)
        s += w * eval_vector(f, t, rule.points[q]).squaredNorm();
      else
        s += w * eval_scalar(f, t, rule.points[q]) * eval_scalar(f, t, rule.points[q]);
    }
  }
  return s;
}

inline double h1_seminorm_sq(const FieldFunction& f) {
  const DofMap& d = *f.dofmap;
  const Mesh& m = *d.mesh;
  QuadratureRule rule = quadrature(4);
  double s = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    TriGeometry g = TriGeometry::from(m, t);
    if (d.kind == SpaceKind::br_vec) {
      for (size_t q = 0; q < rule.size(); ++q)
        s += rule.weights[q] * g.area * eval_br_grad(f, t, rule.points[q]).squaredNorm();
    } else {
      s += g.area * eval_scalar_grad(f, t).squaredNorm();
    }
  }
  return s;
}

inline double l2_norm(const FieldFunction& f) { return std::sqrt(l2_norm_sq(f)); }
inline double h1_norm(const FieldFunction& f) { return std::sqrt(l2_norm_sq(f) + h1_seminorm_sq(f)); }

// L2 norm of rot of an rt_rot field (piecewise constant).
inline double rt_rot_l2_norm(const FieldFunction& f) {
  const Mesh& m = *f.dofmap->mesh;
  double s = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    double r = eval_rt_rot(f, t);
    s += m.area(t) * r * r;
  }
  return std::sqrt(s);
}

}  // namespace platemix
