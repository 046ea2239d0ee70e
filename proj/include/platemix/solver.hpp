#pragma once

// Direct solution of the symmetric indefinite systems and the discrete
// inf-sup estimator.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <chrono>
#include <stdexcept>

#include "platemix/forms.hpp"
#include "platemix/mesh.hpp"
#include "platemix/spaces.hpp"
#include "platemix/system.hpp"

namespace platemix {

struct SolveReport {
  Eigen::VectorXd x;
  double rel_residual = 0;
  long factor_nnz = 0;
  double seconds = 0;
};

// Sparse LU with column pivoting as the default route, dense LU as fallback
// for systems up to 5000 unknowns, one step of iterative refinement when the
// first residual misses the tolerance. Deterministic for identical inputs.
inline SolveReport solve_symmetric_indefinite(const SparseMat& A, const Eigen::VectorXd& b,
                                              double tol = 1e-10) {
  if (A.rows() != A.cols()) throw std::invalid_argument("matrix must be square");
  if (A.rows() != b.size()) throw std::invalid_argument("rhs length mismatch");
  auto t0 = std::chrono::steady_clock::now();

  SolveReport rep;
  double bnorm = b.norm();

  Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  bool sparse_ok = (lu.info() == Eigen::Success);
  if (sparse_ok) {
    rep.x = lu.solve(b);
    rep.factor_nnz = lu.nnzL() + lu.nnzU();
    Eigen::VectorXd r = b - A * rep.x;
    if (bnorm > 0 && r.norm() / bnorm > tol) rep.x += lu.solve(r);  // refinement
  } else if (A.rows() <= 5000) {
    Eigen::MatrixXd Ad(A);
    Eigen::PartialPivLU<Eigen::MatrixXd> dlu(Ad);
    rep.x = dlu.solve(b);
    rep.factor_nnz = A.rows() * static_cast<long>(A.rows());
    Eigen::VectorXd r = b - A * rep.x;
    if (bnorm > 0 && r.norm() / bnorm > tol) rep.x += dlu.solve(r);
  } else {
    throw std::runtime_error("factorization failed (structurally singular matrix?)");
  }

  double rnorm = (b - A * rep.x).norm();
  rep.rel_residual = (bnorm > 0) ? rnorm / bnorm : rnorm;
  if (!(rep.rel_residual <= tol))  // negated so nan (singular factor) lands here too
    throw std::runtime_error("solver tolerance not reached: residual " +
                             std::to_string(rep.rel_residual));
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

struct InfSupEstimate {
  double beta = 0;
  double t = 0;
  int level = -1;
  double eig_residual = 0;
  int n_constraint = 0;  // rows of the constraint block
  int n_primal = 0;      // columns
};

namespace detail {

// beta^2 = smallest positive eigenvalue of B X^-1 B^T q = lambda M q.
// Eigenvalues below 1e-12 * lambda_max are null directions (the mean
// constraint) and are discarded.
inline InfSupEstimate infsup_from_matrices(const SparseMat& B,
                                           const std::vector<SparseMat>& X_blocks,
                                           const Eigen::MatrixXd& M) {
  int nQ = static_cast<int>(B.rows());
  Eigen::MatrixXd Bt = Eigen::MatrixXd(B).transpose();  // n_V x n_Q
  Eigen::MatrixXd Y(Bt.rows(), nQ);
  int off = 0;
  for (const auto& Xb : X_blocks) {
    Eigen::SimplicialLDLT<SparseMat> chol(Xb);
    if (chol.info() != Eigen::Success)
      throw std::runtime_error("norm Gram block is not positive definite");
    Y.middleRows(off, Xb.rows()) = chol.solve(Bt.middleRows(off, Xb.rows()));
    off += static_cast<int>(Xb.rows());
  }
  if (off != Bt.rows()) throw std::invalid_argument("Gram blocks do not cover the primal space");

  Eigen::MatrixXd S = Eigen::MatrixXd(B) * Y;
  S = 0.5 * (S + S.transpose()).eval();

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, M);
  if (eig.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed");
  const auto& ev = eig.eigenvalues();
  double lmax = ev.maxCoeff();
  int idx = -1;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > 1e-12 * lmax) {
      idx = i;
      break;
    }
  if (idx < 0) throw std::runtime_error("constraint block has no positive spectrum");

  InfSupEstimate est;
  est.beta = std::sqrt(ev[idx]);
  est.n_constraint = nQ;
  est.n_primal = static_cast<int>(Bt.rows());
  Eigen::VectorXd q = eig.eigenvectors().col(idx);
  est.eig_residual = (S * q - ev[idx] * M * q).norm() / std::max(1e-300, (S * q).norm());
  return est;
}

}  // namespace detail

struct InfSupMatrices {
  SparseMat B;                       // constraint rows (z, q) x columns (psi, eta, mu)
  std::vector<SparseMat> X_blocks;   // block-diagonal norm Gram of the primal triple
  Eigen::MatrixXd M;                 // norm Gram of the multiplier pair
};

inline InfSupMatrices build_infsup_matrices(const Mesh& m, double t) {
  if (t <= 0) throw std::invalid_argument("inf-sup estimation requires t > 0");
  DofMap br = build_dofmap(m, SpaceKind::br_vec);
  DofMap rt = build_dofmap(m, SpaceKind::rt_rot);
  DofMap p1z = build_dofmap(m, SpaceKind::p1_zero);
  DofMap p1c = build_dofmap(m, SpaceKind::p1_hole_constant);
  DofMap p0 = build_dofmap(m, SpaceKind::p0_mean_zero);

  int nV = br.n_dofs + rt.n_dofs + p1z.n_dofs;
  int nQ = p1c.n_dofs + p0.n_dofs;
  if (nV > 9000 || nQ > 3200)
    throw std::runtime_error("problem too large for the dense inf-sup path");

  // constraint block, rows (z, q), columns (psi, eta, mu)
  std::vector<Triplet> trips;
  auto insert = [&](const SparseMat& M, int ro, int co, double s, bool transpose) {
    for (int k = 0; k < M.outerSize(); ++k)
      for (SparseMat::InnerIterator it(M, k); it; ++it) {
        if (transpose)
          trips.emplace_back(ro + it.col(), co + it.row(), s * it.value());
        else
          trips.emplace_back(ro + it.row(), co + it.col(), s * it.value());
      }
  };
  SparseMat psi_gradz = assemble_form(m, br, p1c, FormTag::vec_dot_grad);
  SparseMat eta_gradz = assemble_form(m, rt, p1c, FormTag::rt_dot_grad);
  SparseMat gradmu_gradz = assemble_form(m, p1z, p1c, FormTag::grad_grad);
  SparseMat psi_rot = assemble_form(m, br, p0, FormTag::rot_times_p0);
  SparseMat eta_rot = assemble_form(m, rt, p0, FormTag::rt_rot_p0);
  int off_eta = br.n_dofs, off_mu = br.n_dofs + rt.n_dofs, off_q = p1c.n_dofs;
  insert(psi_gradz, 0, 0, 1.0, true);
  insert(eta_gradz, 0, off_eta, t * t, true);
  insert(gradmu_gradz, 0, off_mu, -1.0, true);
  insert(psi_rot, off_q, 0, 1.0, true);
  insert(eta_rot, off_q, off_eta, t * t, true);
  SparseMat B(nQ, nV);
  B.setFromTriplets(trips.begin(), trips.end());

  std::vector<SparseMat> X_blocks;
  X_blocks.push_back(SparseMat(assemble_form(m, br, br, FormTag::mass_vec) +
                               assemble_form(m, br, br, FormTag::vec_grad_grad)));
  X_blocks.push_back(SparseMat(t * t * assemble_form(m, rt, rt, FormTag::rt_mass) +
                               t * t * t * t * assemble_form(m, rt, rt, FormTag::rt_rot_rot)));
  X_blocks.push_back(SparseMat(assemble_form(m, p1z, p1z, FormTag::mass_scalar) +
                               assemble_form(m, p1z, p1z, FormTag::grad_grad)));

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nQ, nQ);
  M.topLeftCorner(p1c.n_dofs, p1c.n_dofs) =
      Eigen::MatrixXd(assemble_form(m, p1c, p1c, FormTag::grad_grad));
  for (int k = 0; k < m.num_triangles(); ++k) M(off_q + k, off_q + k) = m.area(k);

  return InfSupMatrices{std::move(B), std::move(X_blocks), std::move(M)};
}

// Discrete inf-sup constant of the constraint form b_t over
// V = br_vec x rt_rot x p1_zero against Q = p1_hole_constant x p0. The X-norm
// Gram on V is block diagonal (H1, t^2 L2 + t^4 rot, H1); the Q Gram carries
// the gradient seminorm on the hole-constant space and the L2 mass on
// constants (the zero-mean direction shows up as a discarded null eigenvalue).
inline InfSupEstimate estimate_infsup(const Mesh& m, double t, int level_tag = -1) {
  InfSupMatrices mats = build_infsup_matrices(m, t);
  InfSupEstimate est = detail::infsup_from_matrices(mats.B, mats.X_blocks, mats.M);
  est.t = t;
  est.level = level_tag;
  return est;
}

}  // namespace platemix
