#pragma once

// The five finite element spaces of the discretization and their DOF maps:
//   p1                 continuous piecewise linears, unconstrained
//   p1_zero            linears vanishing on the whole boundary
//   p1_hole_constant   linears vanishing on the outer boundary, one shared
//                      unknown per hole boundary
//   br_vec             rotated Bernardi-Raugel: vector linears (zero trace)
//                      plus one tangential edge bubble per interior edge
//   rt_rot             rotated Raviart-Thomas of lowest order, zero
//                      tangential trace on the boundary
//   p0_mean_zero       piecewise constants; the zero-mean constraint is
//                      enforced at scheme level by a multiplier row
//
// DOF numbering is deterministic: vertices first (ascending index), then
// edges (ascending index). Edge quantities follow the global edge
// orientation from the lower vertex index to the higher one.

#include <Eigen/Dense>
#include <Eigen/SparseQR>

#include <array>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "platemix/mesh.hpp"

namespace platemix {

enum class SpaceKind { p1, p1_zero, p1_hole_constant, br_vec, rt_rot, p0_mean_zero };

inline const char* space_name(SpaceKind k) {
  switch (k) {
    case SpaceKind::p1: return "p1";
    case SpaceKind::p1_zero: return "p1_zero";
    case SpaceKind::p1_hole_constant: return "p1_hole_constant";
    case SpaceKind::br_vec: return "br_vec";
    case SpaceKind::rt_rot: return "rt_rot";
    case SpaceKind::p0_mean_zero: return "p0_mean_zero";
  }
  return "?";
}

struct DofMap {
  SpaceKind kind;
  const Mesh* mesh = nullptr;
  int n_dofs = 0;
  // Scalar kinds: global dof per vertex (-1 = eliminated). For br_vec this is
  // the interior vertex rank; dof of (vertex v, component c) is 2*rank+c.
  std::vector<int> vertex_dof;
  // rt_rot: interior edge rank. br_vec: bubble rank (offset by 2*V_int).
  std::vector<int> edge_dof;
  int n_interior_vertices = 0;
  int n_interior_edges = 0;

  int local_size() const {
    switch (kind) {
      case SpaceKind::br_vec: return 9;
      case SpaceKind::rt_rot: return 3;
      case SpaceKind::p0_mean_zero: return 1;
      default: return 3;
    }
  }

  // Global dof (or -1) of each local slot on triangle t. br_vec local order:
  // [v0x v0y v1x v1y v2x v2y b0 b1 b2], bubble i on the edge opposite vertex i.
  void cell_dofs(int t, int* out) const {
    const auto& tri = mesh->triangles[t];
    switch (kind) {
      case SpaceKind::p1:
      case SpaceKind::p1_zero:
      case SpaceKind::p1_hole_constant:
        for (int i = 0; i < 3; ++i) out[i] = vertex_dof[tri[i]];
        break;
      case SpaceKind::br_vec:
        for (int i = 0; i < 3; ++i) {
          int r = vertex_dof[tri[i]];
          out[2 * i] = r < 0 ? -1 : 2 * r;
          out[2 * i + 1] = r < 0 ? -1 : 2 * r + 1;
        }
        for (int i = 0; i < 3; ++i) {
          int r = edge_dof[mesh->tri_edges[t][i]];
          out[6 + i] = r < 0 ? -1 : 2 * n_interior_vertices + r;
        }
        break;
      case SpaceKind::rt_rot:
        for (int i = 0; i < 3; ++i) out[i] = edge_dof[mesh->tri_edges[t][i]];
        break;
      case SpaceKind::p0_mean_zero:
        out[0] = t;
        break;
    }
  }
};

inline DofMap build_dofmap(const Mesh& m, SpaceKind kind) {
  DofMap d;
  d.kind = kind;
  d.mesh = &m;

  auto interior_vertex_ranks = [&]() {
    d.vertex_dof.assign(m.num_vertices(), -1);
    int r = 0;
    for (int v = 0; v < m.num_vertices(); ++v)
      if (m.vertex_tag[v] == kInteriorTag) d.vertex_dof[v] = r++;
    d.n_interior_vertices = r;
    return r;
  };
  auto interior_edge_ranks = [&]() {
    d.edge_dof.assign(m.num_edges(), -1);
    int r = 0;
    for (int e = 0; e < m.num_edges(); ++e)
      if (m.edge_tag[e] == kInteriorTag) d.edge_dof[e] = r++;
    d.n_interior_edges = r;
    return r;
  };

  switch (kind) {
    case SpaceKind::p1: {
      d.vertex_dof.resize(m.num_vertices());
      for (int v = 0; v < m.num_vertices(); ++v) d.vertex_dof[v] = v;
      d.n_dofs = m.num_vertices();
      break;
    }
    case SpaceKind::p1_zero:
      d.n_dofs = interior_vertex_ranks();
      break;
    case SpaceKind::p1_hole_constant: {
      int n = interior_vertex_ranks();
      // one shared column per hole: all vertices of component j tie to it
      for (int v = 0; v < m.num_vertices(); ++v)
        if (m.vertex_tag[v] >= 1) d.vertex_dof[v] = n + m.vertex_tag[v] - 1;
      d.n_dofs = n + m.num_holes;
      break;
    }
    case SpaceKind::br_vec:
      d.n_dofs = 2 * interior_vertex_ranks() + interior_edge_ranks();
      break;
    case SpaceKind::rt_rot:
      d.n_dofs = interior_edge_ranks();
      break;
    case SpaceKind::p0_mean_zero:
      d.n_dofs = m.num_triangles();
      break;
  }
  return d;
}

struct FieldFunction {
  const DofMap* dofmap = nullptr;
  Eigen::VectorXd coeffs;

  FieldFunction() = default;
  explicit FieldFunction(const DofMap& d) : dofmap(&d), coeffs(Eigen::VectorXd::Zero(d.n_dofs)) {}
  FieldFunction(const DofMap& d, Eigen::VectorXd c) : dofmap(&d), coeffs(std::move(c)) {
    if (coeffs.size() != d.n_dofs) throw std::invalid_argument("coefficient length mismatch");
  }
};

inline nlohmann::json field_to_json(const FieldFunction& f) {
  nlohmann::json j;
  j["kind"] = space_name(f.dofmap->kind);
  j["n_dofs"] = f.dofmap->n_dofs;
  j["coefficients"] = std::vector<double>(f.coeffs.data(), f.coeffs.data() + f.coeffs.size());
  return j;
}

// ---- per-triangle geometry and basis evaluation ------------------------------

struct TriGeometry {
  Vec2 p[3];
  double area;
  Vec2 grad_lambda[3];

  static TriGeometry from(const Mesh& m, int t) {
    TriGeometry g;
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) g.p[i] = m.vertices[tri[i]];
    g.area = 0.5 * cross2(g.p[1] - g.p[0], g.p[2] - g.p[0]);
    for (int i = 0; i < 3; ++i)
      g.grad_lambda[i] = perp(g.p[(i + 2) % 3] - g.p[(i + 1) % 3]) / (2.0 * g.area);
    return g;
  }

  Vec2 point(const std::array<double, 3>& l) const {
    return l[0] * p[0] + l[1] * p[1] + l[2] * p[2];
  }
  std::array<double, 3> barycentric(const Vec2& x) const {
    double a1 = cross2(x - p[0], p[2] - p[0]) / (2.0 * area);
    double a2 = cross2(p[1] - p[0], x - p[0]) / (2.0 * area);
    return {1.0 - a1 - a2, a1, a2};
  }
};

// Scratch object evaluating the cell-local basis of one space on one triangle.
struct CellBasis {
  const Mesh* mesh;
  const DofMap* dofmap;
  int tri;
  TriGeometry geom;
  // rt_rot: local endpoints (a, b) of each local edge ordered so that the
  // global tangent points a -> b
  std::array<std::array<int, 2>, 3> rt_pair;
  std::array<Vec2, 3> edge_tangent;  // global tangent of local edge i
  std::array<double, 3> edge_len;

  CellBasis(const Mesh& m, const DofMap& d, int t) : mesh(&m), dofmap(&d), tri(t) {
    geom = TriGeometry::from(m, t);
    const auto& tv = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      int e = m.tri_edges[t][i];
      int a = (i + 1) % 3, b = (i + 2) % 3;
      if (tv[a] > tv[b]) std::swap(a, b);  // global orientation: lower -> higher
      rt_pair[i] = {a, b};
      edge_tangent[i] = m.edge_tangent(e);
      edge_len[i] = m.edge_length(e);
    }
  }

  int size() const { return dofmap->local_size(); }

  // scalar kinds
  double p1_value(int i, const std::array<double, 3>& l) const { return l[i]; }
  Vec2 p1_grad(int i) const { return geom.grad_lambda[i]; }

  // br_vec slots
  Vec2 br_value(int slot, const std::array<double, 3>& l) const {
    if (slot < 6) {
      Vec2 v = Vec2::Zero();
      v[slot % 2] = l[slot / 2];
      return v;
    }
    int i = slot - 6;
    auto [a, b] = rt_pair[i];
    return (l[a] * l[b]) * edge_tangent[i];
  }
  // gradient convention: row r = component r, column c = d/dx_c
  Eigen::Matrix2d br_grad(int slot, const std::array<double, 3>& l) const {
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    if (slot < 6) {
      g.row(slot % 2) = geom.grad_lambda[slot / 2].transpose();
      return g;
    }
    int i = slot - 6;
    auto [a, b] = rt_pair[i];
    Vec2 gb = l[a] * geom.grad_lambda[b] + l[b] * geom.grad_lambda[a];
    g = edge_tangent[i] * gb.transpose();
    return g;
  }

  // rt_rot slots; W = la grad(lb) - lb grad(la) with unit circulation along
  // the globally oriented edge
  Vec2 rt_value(int i, const std::array<double, 3>& l) const {
    auto [a, b] = rt_pair[i];
    return l[a] * geom.grad_lambda[b] - l[b] * geom.grad_lambda[a];
  }
  double rt_rot(int i) const {
    auto [a, b] = rt_pair[i];
    return 2.0 * cross2(geom.grad_lambda[a], geom.grad_lambda[b]);
  }
};

// ---- field evaluation ---------------------------------------------------------

inline double eval_scalar(const FieldFunction& f, int t, const std::array<double, 3>& l) {
  CellBasis cb(*f.dofmap->mesh, *f.dofmap, t);
  int dofs[3];
  f.dofmap->cell_dofs(t, dofs);
  double v = 0;
  for (int i = 0; i < 3; ++i)
    if (dofs[i] >= 0) v += f.coeffs[dofs[i]] * l[i];
  return v;
}

inline Vec2 eval_scalar_grad(const FieldFunction& f, int t) {
  TriGeometry g = TriGeometry::from(*f.dofmap->mesh, t);
  int dofs[3];
  f.dofmap->cell_dofs(t, dofs);
  Vec2 v = Vec2::Zero();
  for (int i = 0; i < 3; ++i)
    if (dofs[i] >= 0) v += f.coeffs[dofs[i]] * g.grad_lambda[i];
  return v;
}

inline Vec2 eval_vector(const FieldFunction& f, int t, const std::array<double, 3>& l) {
  const DofMap& d = *f.dofmap;
  CellBasis cb(*d.mesh, d, t);
  Vec2 v = Vec2::Zero();
  if (d.kind == SpaceKind::br_vec) {
    int dofs[9];
    d.cell_dofs(t, dofs);
    for (int s = 0; s < 9; ++s)
      if (dofs[s] >= 0) v += f.coeffs[dofs[s]] * cb.br_value(s, l);
  } else if (d.kind == SpaceKind::rt_rot) {
    int dofs[3];
    d.cell_dofs(t, dofs);
    for (int s = 0; s < 3; ++s)
      if (dofs[s] >= 0) v += f.coeffs[dofs[s]] * cb.rt_value(s, l);
  } else {
    throw std::invalid_argument("eval_vector: not a vector space");
  }
  return v;
}

inline Eigen::Matrix2d eval_br_grad(const FieldFunction& f, int t, const std::array<double, 3>& l) {
  CellBasis cb(*f.dofmap->mesh, *f.dofmap, t);
  int dofs[9];
  f.dofmap->cell_dofs(t, dofs);
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int s = 0; s < 9; ++s)
    if (dofs[s] >= 0) g += f.coeffs[dofs[s]] * cb.br_grad(s, l);
  return g;
}

// rot of an rt_rot field; constant per triangle
inline double eval_rt_rot(const FieldFunction& f, int t) {
  CellBasis cb(*f.dofmap->mesh, *f.dofmap, t);
  int dofs[3];
  f.dofmap->cell_dofs(t, dofs);
  double r = 0;
  for (int s = 0; s < 3; ++s)
    if (dofs[s] >= 0) r += f.coeffs[dofs[s]] * cb.rt_rot(s);
  return r;
}

// ---- the discrete exact sequence ---------------------------------------------

// Edge coefficients of grad(z) for a scalar field z given by vertex dofs; the
// tangential integral over the oriented edge (a,b) is z(b) - z(a).
inline Eigen::VectorXd gradient_edge_coefficients(const DofMap& rt, const FieldFunction& z) {
  const Mesh& m = *rt.mesh;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(rt.n_dofs);
  for (int e = 0; e < m.num_edges(); ++e) {
    int r = rt.edge_dof[e];
    if (r < 0) continue;
    double za = 0, zb = 0;
    int da = z.dofmap->vertex_dof[m.edges[e][0]];
    int db = z.dofmap->vertex_dof[m.edges[e][1]];
    if (da >= 0) za = z.coeffs[da];
    if (db >= 0) zb = z.coeffs[db];
    d[r] = zb - za;
  }
  return d;
}

struct ExactSequenceReport {
  bool ok = true;
  int dim_rt = 0, dim_grad_source = 0, dim_rot_target = 0;
  int rot_rank = 0, rot_rank_expected = 0;
  double max_gradient_rot_residual = 0;
  std::vector<std::string> violations;
};

// Verifies, on one mesh: the dimension identity
// dim(rt_rot) = dim(p1_hole_constant) + dim(p0 mean-zero), surjectivity of rot
// onto mean-zero constants (rank T-1), and grad(p1_hole_constant) c ker(rot).
inline ExactSequenceReport check_exact_sequence(const Mesh& m) {
  ExactSequenceReport rep;
  DofMap rt = build_dofmap(m, SpaceKind::rt_rot);
  DofMap lc = build_dofmap(m, SpaceKind::p1_hole_constant);

  rep.dim_rt = rt.n_dofs;
  rep.dim_grad_source = lc.n_dofs;
  rep.dim_rot_target = m.num_triangles() - 1;
  if (rep.dim_rt != rep.dim_grad_source + rep.dim_rot_target) {
    rep.ok = false;
    rep.violations.push_back("dimension identity failed: " + std::to_string(rep.dim_rt) +
                             " != " + std::to_string(rep.dim_grad_source) + " + " +
                             std::to_string(rep.dim_rot_target));
  }

  // circulation matrix: (rot tau, 1_K) = sum of signed edge dofs around K;
  // every column touches at most the two triangles sharing the edge, so a
  // sparse rank-revealing factorization is cheap
  {
    std::vector<Eigen::Triplet<double>> trips;
    for (int t = 0; t < m.num_triangles(); ++t)
      for (int i = 0; i < 3; ++i) {
        int r = rt.edge_dof[m.tri_edges[t][i]];
        if (r >= 0) trips.emplace_back(t, r, m.tri_edge_sign[t][i]);
      }
    Eigen::SparseMatrix<double> M(m.num_triangles(), rt.n_dofs);
    M.setFromTriplets(trips.begin(), trips.end());
    M.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.setPivotThreshold(1e-10);
    qr.compute(M);
    rep.rot_rank = static_cast<int>(qr.rank());
  }
  rep.rot_rank_expected = m.num_triangles() - 1;
  if (rep.rot_rank != rep.rot_rank_expected) {
    rep.ok = false;
    rep.violations.push_back("rot not surjective onto mean-zero constants: rank " +
                             std::to_string(rep.rot_rank) + ", expected " +
                             std::to_string(rep.rot_rank_expected));
  }

  // gradients lie in the kernel of rot
  for (int j = 0; j < lc.n_dofs; ++j) {
    FieldFunction z(lc);
    z.coeffs[j] = 1.0;
    Eigen::VectorXd d = gradient_edge_coefficients(rt, z);
    for (int t = 0; t < m.num_triangles(); ++t) {
      double circ = 0;
      for (int i = 0; i < 3; ++i) {
        int r = rt.edge_dof[m.tri_edges[t][i]];
        if (r >= 0) circ += m.tri_edge_sign[t][i] * d[r];
      }
      rep.max_gradient_rot_residual = std::max(rep.max_gradient_rot_residual,
                                               std::abs(circ) / m.area(t));
    }
  }
  if (rep.max_gradient_rot_residual > 1e-12) {
    rep.ok = false;
    rep.violations.push_back("gradient fields leave the kernel of rot, residual " +
                             std::to_string(rep.max_gradient_rot_residual));
  }
  return rep;
}

}  // namespace platemix
