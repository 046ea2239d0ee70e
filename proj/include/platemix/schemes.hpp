#pragma once

// The discrete plate systems. Unknown layout per scheme:
//   rm_mixed / rm_mixed_reduced : [phi zeta omega y p mean]
//   rm_primal                   : [phi omega]
//   k_mixed / k_mixed_reduced   : [phi omega y p mean]
//   bfs_check                   : [phi alpha omega y p mean]
//
// All block systems are symmetric indefinite. The zero-mean constraint on the
// piecewise-constant multiplier is a single Lagrange row (sum of q_K |K|).
//
// Sign convention: the systems are the Galerkin restrictions of the
// continuous augmented formulations, so the g-load enters the third row as
// -(grad mu, grad y) = <g, mu>. The companion comparison system keeps its own
// printed signs (y and p come out with flipped sign relative to the mixed
// scheme, and the auxiliary field alpha approaches grad y + zeta).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "platemix/forms.hpp"
#include "platemix/interpolate.hpp"
#include "platemix/mesh.hpp"
#include "platemix/norms.hpp"
#include "platemix/solver.hpp"
#include "platemix/spaces.hpp"
#include "platemix/system.hpp"

namespace platemix {

enum class SchemeKind { rm_mixed, rm_mixed_reduced, rm_primal, k_mixed, k_mixed_reduced, bfs_check };

inline const char* scheme_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::rm_mixed: return "rm-mixed";
    case SchemeKind::rm_mixed_reduced: return "rm-reduced";
    case SchemeKind::rm_primal: return "rm-primal";
    case SchemeKind::k_mixed: return "k-mixed";
    case SchemeKind::k_mixed_reduced: return "k-reduced";
    case SchemeKind::bfs_check: return "bfs-check";
  }
  return "?";
}

inline bool is_rm_scheme(SchemeKind k) {
  return k == SchemeKind::rm_mixed || k == SchemeKind::rm_mixed_reduced ||
         k == SchemeKind::rm_primal || k == SchemeKind::bfs_check;
}

struct PlateProblem {
  PlateMaterial material;
  std::function<Vec2(const Vec2&)> load_f;    // moment load; null = zero
  std::function<double(const Vec2&)> load_g;  // transverse load; null = zero
  int load_quadrature_degree = 6;
};

struct SchemeSystem {
  SchemeKind kind;
  double t = 0;
  const Mesh* mesh = nullptr;
  PlateMaterial material;
  std::shared_ptr<const DofMap> br, rt, omega_map, y_map, p0;
  BlockSystem sys;
};

struct SolutionFields {
  SchemeKind kind;
  double t = 0;
  std::shared_ptr<const DofMap> br_map, rt_map, omega_dofmap, y_dofmap, p0_map;
  FieldFunction phi;
  std::optional<FieldFunction> zeta;  // shear unknown (alpha for the comparison system)
  FieldFunction omega;
  std::optional<FieldFunction> y;
  Eigen::VectorXd p;  // piecewise constant coefficients
  double mean_multiplier = 0;
  double solve_residual = 0;
};

inline SchemeSystem assemble_scheme(const Mesh& m, const PlateProblem& prob, SchemeKind kind,
                                    double t) {
  prob.material.check();
  bool rm = is_rm_scheme(kind);
  if (rm && t <= 0)
    throw std::invalid_argument(std::string(scheme_name(kind)) + " requires t > 0");

  SchemeSystem S;
  S.kind = kind;
  S.t = rm ? t : 0.0;
  S.mesh = &m;
  S.material = prob.material;
  S.br = std::make_shared<DofMap>(build_dofmap(m, SpaceKind::br_vec));
  S.omega_map = std::make_shared<DofMap>(build_dofmap(m, SpaceKind::p1_zero));
  if (S.omega_map->n_dofs == 0)
    throw std::invalid_argument("insufficient resolution: mesh has no interior vertices");
  bool has_rt = (kind == SchemeKind::rm_mixed || kind == SchemeKind::rm_mixed_reduced ||
                 kind == SchemeKind::bfs_check);
  bool has_multipliers = (kind != SchemeKind::rm_primal);
  if (has_rt || kind == SchemeKind::rm_primal || kind == SchemeKind::k_mixed_reduced)
    S.rt = std::make_shared<DofMap>(build_dofmap(m, SpaceKind::rt_rot));
  if (has_multipliers) {
    S.y_map = std::make_shared<DofMap>(build_dofmap(m, SpaceKind::p1_hole_constant));
    S.p0 = std::make_shared<DofMap>(build_dofmap(m, SpaceKind::p0_mean_zero));
  }

  const DofMap& br = *S.br;
  const DofMap& omega = *S.omega_map;
  double t2 = t * t;

  Eigen::VectorXd load_f = prob.load_f
                               ? assemble_vector_load(m, br, prob.load_f, prob.load_quadrature_degree)
                               : Eigen::VectorXd::Zero(br.n_dofs);
  Eigen::VectorXd load_g = prob.load_g
                               ? assemble_scalar_load(m, omega, prob.load_g, prob.load_quadrature_degree)
                               : Eigen::VectorXd::Zero(omega.n_dofs);

  BlockSystemBuilder bld;

  if (kind == SchemeKind::rm_primal) {
    const DofMap& rt = *S.rt;
    bld.add_block("phi", br.n_dofs);
    bld.add_block("omega", omega.n_dofs);

    QuadratureRule rule = quadrature(4);
    std::vector<Triplet> trips;
    std::vector<int> bd(9), od(3);
    for (int tr = 0; tr < m.num_triangles(); ++tr) {
      Eigen::MatrixXd loc(12, 12);
      Eigen::MatrixXd E = local_elasticity(m, br, tr, prob.material, rule);
      // edgewise shear map [Pi | -grad]: cell (phi,omega) dofs -> rt coefficients
      Eigen::MatrixXd T(3, 12);
      T.leftCols(9) = local_rt_interpolation(m, br, tr);
      T.rightCols(3).setZero();
      {
        CellBasis cb(m, rt, tr);
        for (int i = 0; i < 3; ++i) {
          auto [a, b] = cb.rt_pair[i];
          T(i, 9 + b) -= 1.0;  // -(omega(b) - omega(a))
          T(i, 9 + a) += 1.0;
        }
      }
      Eigen::MatrixXd Mrt = local_coupling(m, rt, rt, tr, FormTag::rt_mass, rule);
      loc.setZero();
      loc.topLeftCorner(9, 9) = E;
      loc += (1.0 / t2) * T.transpose() * Mrt * T;

      br.cell_dofs(tr, bd.data());
      omega.cell_dofs(tr, od.data());
      int gd[12];
      for (int i = 0; i < 9; ++i) gd[i] = bd[i];
      for (int i = 0; i < 3; ++i) gd[9 + i] = od[i] < 0 ? -1 : br.n_dofs + od[i];
      for (int i = 0; i < 12; ++i) {
        if (gd[i] < 0) continue;
        for (int j = 0; j < 12; ++j)
          if (gd[j] >= 0 && loc(i, j) != 0) bld.add_entry(gd[i], gd[j], loc(i, j));
      }
    }
    bld.set_rhs("phi", load_f);
    bld.set_rhs("omega", load_g);
    S.sys = bld.finish();
    return S;
  }

  // mixed families
  bld.add_block("phi", br.n_dofs);
  if (has_rt) bld.add_block("zeta", S.rt->n_dofs);
  bld.add_block("omega", omega.n_dofs);
  bld.add_block("y", S.y_map->n_dofs);
  bld.add_block("p", S.p0->n_dofs);
  bld.add_block("mean", 1);

  const DofMap& y = *S.y_map;
  const DofMap& p0 = *S.p0;

  bld.add_diagonal_block("phi", assemble_elasticity(m, br, prob.material));

  bool reduced = (kind == SchemeKind::rm_mixed_reduced || kind == SchemeKind::k_mixed_reduced);
  SparseMat phi_y = reduced ? assemble_reduced_coupling(m, br, *S.rt, y)
                            : assemble_form(m, br, y, FormTag::vec_dot_grad);
  SparseMat omega_y = assemble_form(m, omega, y, FormTag::grad_grad);
  SparseMat phi_p = assemble_form(m, br, p0, FormTag::rot_times_p0);

  if (kind == SchemeKind::bfs_check) {
    const DofMap& rt = *S.rt;
    bld.add_diagonal_block("zeta", assemble_form(m, rt, rt, FormTag::rt_mass), t2);
    bld.add_coupling("phi", "y", phi_y, -1.0);
    bld.add_coupling("phi", "p", phi_p, -1.0);
    bld.add_coupling("zeta", "p", assemble_form(m, rt, p0, FormTag::rt_rot_p0), -t2);
    bld.add_coupling("omega", "y", omega_y, +1.0);
    bld.add_diagonal_block("y", assemble_form(m, y, y, FormTag::grad_grad), -t2);
  } else {
    if (has_rt) {
      const DofMap& rt = *S.rt;
      bld.add_diagonal_block("zeta", assemble_form(m, rt, rt, FormTag::rt_mass), t2);
      bld.add_coupling("zeta", "y", assemble_form(m, rt, y, FormTag::rt_dot_grad), t2);
      bld.add_coupling("zeta", "p", assemble_form(m, rt, p0, FormTag::rt_rot_p0), t2);
    }
    bld.add_coupling("phi", "y", phi_y, +1.0);
    bld.add_coupling("phi", "p", phi_p, +1.0);
    bld.add_coupling("omega", "y", omega_y, -1.0);
  }

  // zero-mean multiplier row for p
  {
    int po = bld.offset("p"), mo = bld.offset("mean");
    for (int k = 0; k < m.num_triangles(); ++k) {
      bld.add_entry(po + k, mo, m.area(k));
      bld.add_entry(mo, po + k, m.area(k));
    }
  }

  bld.set_rhs("phi", load_f);
  bld.set_rhs("omega", load_g);
  S.sys = bld.finish();
  return S;
}

inline SolutionFields solve_scheme(const SchemeSystem& S, double tol = 1e-10) {
  SolveReport rep = solve_symmetric_indefinite(S.sys.A, S.sys.rhs, tol);

  SolutionFields out;
  out.kind = S.kind;
  out.t = S.t;
  out.br_map = S.br;
  out.rt_map = S.rt;
  out.omega_dofmap = S.omega_map;
  out.y_dofmap = S.y_map;
  out.p0_map = S.p0;
  out.solve_residual = rep.rel_residual;

  out.phi = FieldFunction(*S.br, S.sys.extract("phi", rep.x));
  out.omega = FieldFunction(*S.omega_map, S.sys.extract("omega", rep.x));
  if (S.sys.has_block("zeta")) out.zeta = FieldFunction(*S.rt, S.sys.extract("zeta", rep.x));
  if (S.sys.has_block("y")) out.y = FieldFunction(*S.y_map, S.sys.extract("y", rep.x));
  if (S.sys.has_block("p")) out.p = S.sys.extract("p", rep.x);
  if (S.sys.has_block("mean")) out.mean_multiplier = S.sys.extract("mean", rep.x)[0];
  return out;
}

// zeta_h = t^-2 (grad omega_h - Pi phi_h), evaluated edgewise: the gradient
// of a P1 function has exact tangential integrals omega(end) - omega(start).
inline FieldFunction recover_shear(const DofMap& rt, const FieldFunction& phi,
                                   const FieldFunction& omega, double t) {
  if (t <= 0) throw std::invalid_argument("recover_shear requires t > 0");
  const Mesh& m = *rt.mesh;
  FieldFunction zeta(rt);
  for (int e = 0; e < m.num_edges(); ++e) {
    int r = rt.edge_dof[e];
    if (r < 0) continue;
    double wa = 0, wb = 0;
    int da = omega.dofmap->vertex_dof[m.edges[e][0]];
    int db = omega.dofmap->vertex_dof[m.edges[e][1]];
    if (da >= 0) wa = omega.coeffs[da];
    if (db >= 0) wb = omega.coeffs[db];
    zeta.coeffs[r] = ((wb - wa) - edge_tangential_integral_br(phi, e)) / (t * t);
  }
  return zeta;
}

// ---- cross-check against the companion five-field system ----------------------

struct BfsGaps {
  double phi_h1 = 0;      // |phi - phi_B|_1
  double omega_h1 = 0;    // |omega - omega_B|_1
  double y_h1 = 0;        // |y + y_B|_1
  double p_l2 = 0;        // |p + p_B|_0
  double alpha_res = 0;   // |alpha_B - (grad y + zeta)|_0
  // norms of the mixed-scheme quantities, for judging gap significance
  double phi_scale = 0, omega_scale = 0, y_scale = 0, p_scale = 0, alpha_scale = 0;
};

inline BfsGaps bfs_cross_check(const Mesh& m, const PlateProblem& prob, double t,
                               double tol = 1e-10) {
  SolutionFields mixed = solve_scheme(assemble_scheme(m, prob, SchemeKind::rm_mixed, t), tol);
  SolutionFields bfs = solve_scheme(assemble_scheme(m, prob, SchemeKind::bfs_check, t), tol);

  BfsGaps gaps;
  gaps.phi_h1 = h1_norm(FieldFunction(*mixed.br_map, mixed.phi.coeffs - bfs.phi.coeffs));
  gaps.omega_h1 =
      h1_norm(FieldFunction(*mixed.omega_dofmap, mixed.omega.coeffs - bfs.omega.coeffs));
  gaps.y_h1 = h1_norm(FieldFunction(*mixed.y_dofmap, mixed.y->coeffs + bfs.y->coeffs));
  double p2 = 0;
  for (int k = 0; k < m.num_triangles(); ++k) {
    double d = mixed.p[k] + bfs.p[k];
    p2 += m.area(k) * d * d;
  }
  gaps.p_l2 = std::sqrt(p2);

  Eigen::VectorXd grad_y = gradient_edge_coefficients(*mixed.rt_map, *mixed.y);
  FieldFunction resid(*mixed.rt_map,
                      Eigen::VectorXd(bfs.zeta->coeffs - grad_y - mixed.zeta->coeffs));
  gaps.alpha_res = l2_norm(resid);

  gaps.phi_scale = h1_norm(mixed.phi);
  gaps.omega_scale = h1_norm(mixed.omega);
  gaps.y_scale = h1_norm(*mixed.y);
  double ps = 0;
  for (int k = 0; k < m.num_triangles(); ++k) ps += m.area(k) * mixed.p[k] * mixed.p[k];
  gaps.p_scale = std::sqrt(ps);
  gaps.alpha_scale = l2_norm(FieldFunction(*mixed.rt_map,
                                           Eigen::VectorXd(grad_y + mixed.zeta->coeffs)));
  return gaps;
}

}  // namespace platemix
