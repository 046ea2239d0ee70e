#pragma once

// Local and global assembly of the bilinear forms of the plate systems.
// Default quadrature degree is 4, which integrates every form here exactly
// (the worst integrand is a bubble x bubble product of degree 4).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <stdexcept>
#include <vector>

#include "platemix/mesh.hpp"
#include "platemix/quadrature.hpp"
#include "platemix/spaces.hpp"

namespace platemix {

using SparseMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct PlateMaterial {
  double youngs = 12.0;
  double poisson = 0.0;
  double lambda = 1.0;  // shear scale; the schemes take it as 1
  double thickness = 0.0;

  void check() const {
    if (youngs <= 0) throw std::invalid_argument("Young modulus must be positive");
    if (poisson < 0 || poisson > 0.5 - 1e-6)
      throw std::invalid_argument("Poisson ratio must lie in [0, 0.5) away from 0.5");
    if (thickness < 0) throw std::invalid_argument("thickness must be nonnegative");
  }
  double bending_scale() const { return youngs / (12.0 * (1.0 - poisson * poisson)); }
};

// C tau = E/(12(1-nu^2)) [ (1-nu) tau + nu tr(tau) Id ]
inline Eigen::Matrix2d apply_plate_tensor(const Eigen::Matrix2d& tau, const PlateMaterial& mat) {
  return mat.bending_scale() *
         ((1.0 - mat.poisson) * tau +
          mat.poisson * tau.trace() * Eigen::Matrix2d::Identity());
}

enum class FormTag {
  mass_vec,      // br x br      (phi, psi)
  grad_grad,     // p1 x p1      (grad u, grad v)
  vec_dot_grad,  // br x p1      (phi, grad v)
  rot_times_p0,  // br x p0      (rot phi, q)
  rt_mass,       // rt x rt      (zeta, eta)
  rt_rot_p0,     // rt x p0      (rot zeta, q)
  rt_dot_grad,   // rt x p1      (zeta, grad v)
  vec_grad_grad, // br x br      (grad phi : grad psi)
  mass_scalar,   // p1 x p1      (u, v)
  rt_rot_rot,    // rt x rt      (rot zeta, rot eta)
};

namespace detail {

inline bool is_p1_family(SpaceKind k) {
  return k == SpaceKind::p1 || k == SpaceKind::p1_zero || k == SpaceKind::p1_hole_constant;
}

inline void expect_spaces(FormTag tag, SpaceKind row, SpaceKind col) {
  auto need = [&](bool ok) {
    if (!ok) throw std::invalid_argument("form tag incompatible with the given spaces");
  };
  switch (tag) {
    case FormTag::mass_vec:
    case FormTag::vec_grad_grad:
      need(row == SpaceKind::br_vec && col == SpaceKind::br_vec);
      break;
    case FormTag::grad_grad:
    case FormTag::mass_scalar:
      need(is_p1_family(row) && is_p1_family(col));
      break;
    case FormTag::vec_dot_grad:
      need(row == SpaceKind::br_vec && is_p1_family(col));
      break;
    case FormTag::rot_times_p0:
      need(row == SpaceKind::br_vec && col == SpaceKind::p0_mean_zero);
      break;
    case FormTag::rt_mass:
    case FormTag::rt_rot_rot:
      need(row == SpaceKind::rt_rot && col == SpaceKind::rt_rot);
      break;
    case FormTag::rt_rot_p0:
      need(row == SpaceKind::rt_rot && col == SpaceKind::p0_mean_zero);
      break;
    case FormTag::rt_dot_grad:
      need(row == SpaceKind::rt_rot && is_p1_family(col));
      break;
  }
}

}  // namespace detail

// Local matrix of one coupling form on triangle t; rows/cols in cell-local
// dof order of the respective space.
inline Eigen::MatrixXd local_coupling(const Mesh& m, const DofMap& rows, const DofMap& cols,
                                      int t, FormTag tag, const QuadratureRule& rule) {
  detail::expect_spaces(tag, rows.kind, cols.kind);
  CellBasis rb(m, rows, t), cb(m, cols, t);
  const double A = rb.geom.area;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows.local_size(), cols.local_size());

  switch (tag) {
    case FormTag::grad_grad:
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          out(i, j) = A * rb.p1_grad(i).dot(cb.p1_grad(j));
      return out;
    case FormTag::rt_rot_p0:
      for (int i = 0; i < 3; ++i) out(i, 0) = A * rb.rt_rot(i);
      return out;
    case FormTag::rt_rot_rot:
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out(i, j) = A * rb.rt_rot(i) * cb.rt_rot(j);
      return out;
    default:
      break;
  }

  for (size_t q = 0; q < rule.size(); ++q) {
    const auto& l = rule.points[q];
    double w = rule.weights[q] * A;
    switch (tag) {
      case FormTag::mass_vec:
        for (int i = 0; i < 9; ++i) {
          Vec2 vi = rb.br_value(i, l);
          for (int j = 0; j < 9; ++j) out(i, j) += w * vi.dot(cb.br_value(j, l));
        }
        break;
      case FormTag::vec_grad_grad:
        for (int i = 0; i < 9; ++i) {
          Eigen::Matrix2d gi = rb.br_grad(i, l);
          for (int j = 0; j < 9; ++j)
            out(i, j) += w * (gi.array() * cb.br_grad(j, l).array()).sum();
        }
        break;
      case FormTag::vec_dot_grad:
        for (int i = 0; i < 9; ++i) {
          Vec2 vi = rb.br_value(i, l);
          for (int j = 0; j < 3; ++j) out(i, j) += w * vi.dot(cb.p1_grad(j));
        }
        break;
      case FormTag::rot_times_p0:
        for (int i = 0; i < 9; ++i) {
          Eigen::Matrix2d gi = rb.br_grad(i, l);
          out(i, 0) += w * (gi(1, 0) - gi(0, 1));
        }
        break;
      case FormTag::rt_mass:
        for (int i = 0; i < 3; ++i) {
          Vec2 vi = rb.rt_value(i, l);
          for (int j = 0; j < 3; ++j) out(i, j) += w * vi.dot(cb.rt_value(j, l));
        }
        break;
      case FormTag::rt_dot_grad:
        for (int i = 0; i < 3; ++i) {
          Vec2 vi = rb.rt_value(i, l);
          for (int j = 0; j < 3; ++j) out(i, j) += w * vi.dot(cb.p1_grad(j));
        }
        break;
      case FormTag::mass_scalar:
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) out(i, j) += w * l[i] * l[j];
        break;
      default:
        break;
    }
  }
  return out;
}

// (C E(phi_i), E(phi_j)) over the 9 br_vec cell dofs; symmetric positive
// semidefinite with the rigid motions as kernel.
inline Eigen::MatrixXd local_elasticity(const Mesh& m, const DofMap& br, int t,
                                        const PlateMaterial& mat, const QuadratureRule& rule) {
  if (br.kind != SpaceKind::br_vec) throw std::invalid_argument("elasticity needs br_vec");
  CellBasis cb(m, br, t);
  if (cb.geom.area <= 0) throw std::invalid_argument("degenerate triangle");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(9, 9);
  for (size_t q = 0; q < rule.size(); ++q) {
    const auto& l = rule.points[q];
    double w = rule.weights[q] * cb.geom.area;
    Eigen::Matrix2d strain[9], stress[9];
    for (int i = 0; i < 9; ++i) {
      Eigen::Matrix2d g = cb.br_grad(i, l);
      strain[i] = 0.5 * (g + g.transpose());
      stress[i] = apply_plate_tensor(strain[i], mat);
    }
    for (int i = 0; i < 9; ++i)
      for (int j = i; j < 9; ++j) {
        double v = w * (stress[i].array() * strain[j].array()).sum();
        out(i, j) += v;
        if (j != i) out(j, i) += v;
      }
  }
  return out;
}

// Tangential edge integrals of the br_vec cell basis: the 3x9 map from cell
// dofs to rotated Raviart-Thomas edge coefficients. Row i is the local edge
// opposite vertex i, oriented globally.
inline Eigen::MatrixXd local_rt_interpolation(const Mesh& m, const DofMap& br, int t) {
  CellBasis cb(m, br, t);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3, 9);
  const auto& tri = m.triangles[t];
  for (int i = 0; i < 3; ++i) {
    auto [a, b] = cb.rt_pair[i];
    Vec2 d = m.vertices[tri[b]] - m.vertices[tri[a]];  // tangent times length
    for (int v : {a, b})
      for (int c = 0; c < 2; ++c) out(i, 2 * v + c) += 0.5 * d[c];
    out(i, 6 + i) = cb.edge_len[i] / 6.0;
  }
  return out;
}

namespace detail {

template <class LocalOp>
void scatter_block(std::vector<Triplet>& trips, const Mesh& m, const DofMap& rows,
                   const DofMap& cols, LocalOp&& local, int row_offset, int col_offset,
                   double scale) {
  int lr = rows.local_size(), lc = cols.local_size();
  std::vector<int> rd(lr), cd(lc);
  for (int t = 0; t < m.num_triangles(); ++t) {
    Eigen::MatrixXd loc = local(t);
    rows.cell_dofs(t, rd.data());
    cols.cell_dofs(t, cd.data());
    for (int i = 0; i < lr; ++i) {
      if (rd[i] < 0) continue;
      for (int j = 0; j < lc; ++j) {
        if (cd[j] < 0) continue;
        double v = scale * loc(i, j);
        if (v != 0.0) trips.emplace_back(row_offset + rd[i], col_offset + cd[j], v);
      }
    }
  }
}

}  // namespace detail

inline SparseMat assemble_form(const Mesh& m, const DofMap& rows, const DofMap& cols, FormTag tag,
                               int quad_degree = 4) {
  QuadratureRule rule = quadrature(quad_degree);
  std::vector<Triplet> trips;
  detail::scatter_block(trips, m, rows, cols,
                        [&](int t) { return local_coupling(m, rows, cols, t, tag, rule); }, 0, 0,
                        1.0);
  SparseMat A(rows.n_dofs, cols.n_dofs);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

inline SparseMat assemble_elasticity(const Mesh& m, const DofMap& br, const PlateMaterial& mat,
                                     int quad_degree = 4) {
  QuadratureRule rule = quadrature(quad_degree);
  std::vector<Triplet> trips;
  detail::scatter_block(trips, m, br, br,
                        [&](int t) { return local_elasticity(m, br, t, mat, rule); }, 0, 0, 1.0);
  SparseMat A(br.n_dofs, br.n_dofs);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

// (Pi psi_i, grad z_j): rotated RT interpolation composed with the rt/grad
// coupling, assembled trianglewise.
inline SparseMat assemble_reduced_coupling(const Mesh& m, const DofMap& br, const DofMap& rt,
                                           const DofMap& p1c, int quad_degree = 4) {
  QuadratureRule rule = quadrature(quad_degree);
  std::vector<Triplet> trips;
  detail::scatter_block(
      trips, m, br, p1c,
      [&](int t) -> Eigen::MatrixXd {
        Eigen::MatrixXd T = local_rt_interpolation(m, br, t);
        Eigen::MatrixXd L = local_coupling(m, rt, p1c, t, FormTag::rt_dot_grad, rule);
        return T.transpose() * L;
      },
      0, 0, 1.0);
  SparseMat A(br.n_dofs, p1c.n_dofs);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

inline Eigen::VectorXd assemble_vector_load(const Mesh& m, const DofMap& br,
                                            const std::function<Vec2(const Vec2&)>& f,
                                            int quad_degree) {
  QuadratureRule rule = quadrature(quad_degree);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(br.n_dofs);
  std::vector<int> dofs(br.local_size());
  for (int t = 0; t < m.num_triangles(); ++t) {
    CellBasis cb(m, br, t);
    br.cell_dofs(t, dofs.data());
    for (size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double w = rule.weights[q] * cb.geom.area;
      Vec2 fv = f(cb.geom.point(l));
      for (int i = 0; i < 9; ++i)
        if (dofs[i] >= 0) b[dofs[i]] += w * fv.dot(cb.br_value(i, l));
    }
  }
  return b;
}

inline Eigen::VectorXd assemble_scalar_load(const Mesh& m, const DofMap& p1,
                                            const std::function<double(const Vec2&)>& g,
                                            int quad_degree) {
  QuadratureRule rule = quadrature(quad_degree);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p1.n_dofs);
  int dofs[3];
  for (int t = 0; t < m.num_triangles(); ++t) {
    TriGeometry geom = TriGeometry::from(m, t);
    p1.cell_dofs(t, dofs);
    for (size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double w = rule.weights[q] * geom.area;
      double gv = g(geom.point(l));
      for (int i = 0; i < 3; ++i)
        if (dofs[i] >= 0) b[dofs[i]] += w * gv * l[i];
    }
  }
  return b;
}

}  // namespace platemix
