#pragma once

// Error norms of solved fields against the closed-form manufactured fields,
// and reference-based errors for the multipliers (no closed form exists for
// them). The manufactured fields are polynomials, so a collapsed tensor rule
// of matching degree integrates the error integrands exactly; degree 34
// covers (omega - omega_h)^2 with omega of degree 16.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>

#include "platemix/manufactured.hpp"
#include "platemix/quadrature.hpp"
#include "platemix/schemes.hpp"
#include "platemix/spaces.hpp"

namespace platemix {

struct ErrorRecord {
  double phi_h1 = std::numeric_limits<double>::quiet_NaN();
  double w_h1 = std::numeric_limits<double>::quiet_NaN();
  double zeta_xt = std::numeric_limits<double>::quiet_NaN();
  double p_l2 = std::numeric_limits<double>::quiet_NaN();
  double y_h1 = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline int level_gap(const Mesh& coarse, const Mesh& fine) {
  int gap = 0;
  long tc = coarse.num_triangles(), tf = fine.num_triangles();
  while (tf > tc) {
    tf /= 4;
    ++gap;
  }
  if (tf != tc) throw std::invalid_argument("meshes are not nested refinements");
  return gap;
}

}  // namespace detail

// |y_ref - y_h|_1 integrated on the reference mesh; both fields piecewise
// linear there, so a degree-2 rule is exact.
inline double y_error_vs_reference(const SolutionFields& sol, const SolutionFields& ref) {
  const Mesh& fine = *ref.y_dofmap->mesh;
  const Mesh& coarse = *sol.y_dofmap->mesh;
  int shift = 2 * detail::level_gap(coarse, fine);
  QuadratureRule rule = quadrature(2);
  double s = 0;
  for (int tf = 0; tf < fine.num_triangles(); ++tf) {
    int tc = tf >> shift;
    TriGeometry gf = TriGeometry::from(fine, tf);
    TriGeometry gc = TriGeometry::from(coarse, tc);
    Vec2 dgrad = eval_scalar_grad(*ref.y, tf) - eval_scalar_grad(*sol.y, tc);
    double cell = gf.area * dgrad.squaredNorm();
    for (size_t q = 0; q < rule.size(); ++q) {
      Vec2 x = gf.point(rule.points[q]);
      double dv = eval_scalar(*ref.y, tf, rule.points[q]) -
                  eval_scalar(*sol.y, tc, gc.barycentric(x));
      cell += rule.weights[q] * gf.area * dv * dv;
    }
    s += cell;
  }
  return std::sqrt(s);
}

inline double p_error_vs_reference(const SolutionFields& sol, const SolutionFields& ref) {
  const Mesh& fine = *ref.p0_map->mesh;
  const Mesh& coarse = *sol.p0_map->mesh;
  int shift = 2 * detail::level_gap(coarse, fine);
  double s = 0;
  for (int tf = 0; tf < fine.num_triangles(); ++tf) {
    double d = ref.p[tf] - sol.p[tf >> shift];
    s += fine.area(tf) * d * d;
  }
  return std::sqrt(s);
}

// phi/omega/zeta errors against the closed forms; p/y against the optional
// finer reference solution.
inline ErrorRecord error_norms(const SolutionFields& sol, const ManufacturedCase& mc,
                               const SolutionFields* fine_ref = nullptr, int quad_degree = 34) {
  const Mesh& m = *sol.br_map->mesh;
  QuadratureRule rule = quadrature(quad_degree);
  ErrorRecord rec;

  double phi2 = 0, w2 = 0, zeta2 = 0, rot2 = 0;
  std::vector<int> bdofs(9), odofs(3), zdofs(3);
  bool has_zeta = sol.zeta.has_value() && static_cast<bool>(mc.zeta);
  for (int t = 0; t < m.num_triangles(); ++t) {
    CellBasis br(m, *sol.br_map, t);
    sol.br_map->cell_dofs(t, bdofs.data());
    sol.omega_dofmap->cell_dofs(t, odofs.data());
    Vec2 gw_h = eval_scalar_grad(sol.omega, t);
    double rot_h = 0;
    std::optional<CellBasis> rt;
    if (has_zeta) {
      rt.emplace(m, *sol.rt_map, t);
      sol.rt_map->cell_dofs(t, zdofs.data());
      rot_h = eval_rt_rot(*sol.zeta, t);
    }

    for (size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double w = rule.weights[q] * br.geom.area;
      Vec2 x = br.geom.point(l);

      Vec2 phi_h = Vec2::Zero();
      Eigen::Matrix2d gphi_h = Eigen::Matrix2d::Zero();
      for (int s = 0; s < 9; ++s)
        if (bdofs[s] >= 0) {
          phi_h += sol.phi.coeffs[bdofs[s]] * br.br_value(s, l);
          gphi_h += sol.phi.coeffs[bdofs[s]] * br.br_grad(s, l);
        }
      phi2 += w * ((mc.phi(x) - phi_h).squaredNorm() + (mc.grad_phi(x) - gphi_h).squaredNorm());

      double w_h = 0;
      for (int s = 0; s < 3; ++s)
        if (odofs[s] >= 0) w_h += sol.omega.coeffs[odofs[s]] * l[s];
      double dw = mc.omega(x) - w_h;
      w2 += w * (dw * dw + (mc.grad_omega(x) - gw_h).squaredNorm());

      if (has_zeta) {
        Vec2 z_h = Vec2::Zero();
        for (int s = 0; s < 3; ++s)
          if (zdofs[s] >= 0) z_h += sol.zeta->coeffs[zdofs[s]] * rt->rt_value(s, l);
        zeta2 += w * (mc.zeta(x) - z_h).squaredNorm();
        double drot = mc.rot_zeta(x) - rot_h;
        rot2 += w * drot * drot;
      }
    }
  }

  rec.phi_h1 = std::sqrt(phi2);
  rec.w_h1 = std::sqrt(w2);
  if (has_zeta) rec.zeta_xt = sol.t * std::sqrt(zeta2) + sol.t * sol.t * std::sqrt(rot2);

  if (fine_ref) {
    if (sol.y && fine_ref->y) rec.y_h1 = y_error_vs_reference(sol, *fine_ref);
    if (sol.p.size() > 0 && fine_ref->p.size() > 0) rec.p_l2 = p_error_vs_reference(sol, *fine_ref);
  }
  return rec;
}

}  // namespace platemix
