#pragma once

// Closed-form manufactured cases on the canonical square-with-hole domain.
// With q(u) = u(3-u)(u-1)(u-2) and b(x,y) = q(x)q(y):
//   thick plate:  omega = b^2, phi = grad omega + t^2 (b,b),
//                 zeta = -(b,b)  (independent of t),
//                 f = -div C E(phi) + (b,b), g = div (b,b)
//   thin plate:   omega = b^2, phi = grad omega, f = 0,
//                 g = c1 * biharmonic(omega)
// Every field vanishes on the full boundary because q has roots at 0,1,2,3.
//
// The finite-difference oracle re-derives the loads from the strong form with
// long double arithmetic; it shares only the pointwise field evaluators with
// the implementation.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "platemix/mesh.hpp"
#include "platemix/schemes.hpp"

namespace platemix {

namespace detail {

template <class R>
R q_deriv(R u, int k) {
  switch (k) {
    case 0: return u * (R(6) + u * (R(-11) + u * (R(6) - u)));
    case 1: return R(6) + u * (R(-22) + u * (R(18) - R(4) * u));
    case 2: return R(-22) + u * (R(36) - R(12) * u);
    case 3: return R(36) - R(24) * u;
    case 4: return R(-24);
    default: return R(0);
  }
}

inline constexpr double kBinom[5][5] = {{1, 0, 0, 0, 0},
                                        {1, 1, 0, 0, 0},
                                        {1, 2, 1, 0, 0},
                                        {1, 3, 3, 1, 0},
                                        {1, 4, 6, 4, 1}};

// All pointwise quantities of the polynomial family, templated so the
// oracle can run in extended precision.
template <class R>
struct PlatePolyCore {
  R t = 0;
  R c1 = 1;  // E / (12 (1 - nu^2))
  R nu = 0;

  R b(R x, R y, int i, int j) const { return q_deriv(x, i) * q_deriv(y, j); }

  // derivative d^{i+j} (b^2) / dx^i dy^j by the Leibniz rule
  R w(R x, R y, int i, int j) const {
    R s = 0;
    for (int a = 0; a <= i; ++a)
      for (int c = 0; c <= j; ++c)
        s += R(kBinom[i][a] * kBinom[j][c]) * b(x, y, a, c) * b(x, y, i - a, j - c);
    return s;
  }

  R omega(R x, R y) const { return w(x, y, 0, 0); }
  void grad_omega(R x, R y, R out[2]) const {
    out[0] = w(x, y, 1, 0);
    out[1] = w(x, y, 0, 1);
  }
  void phi(R x, R y, R out[2]) const {
    out[0] = w(x, y, 1, 0) + t * t * b(x, y, 0, 0);
    out[1] = w(x, y, 0, 1) + t * t * b(x, y, 0, 0);
  }
  // rows = components, columns = derivative direction
  void grad_phi(R x, R y, R out[2][2]) const {
    R t2 = t * t;
    out[0][0] = w(x, y, 2, 0) + t2 * b(x, y, 1, 0);
    out[0][1] = w(x, y, 1, 1) + t2 * b(x, y, 0, 1);
    out[1][0] = w(x, y, 1, 1) + t2 * b(x, y, 1, 0);
    out[1][1] = w(x, y, 0, 2) + t2 * b(x, y, 0, 1);
  }

  // moment tensor C E(phi) of the thick-plate rotation
  void moment(R x, R y, R out[2][2]) const {
    R t2 = t * t;
    R e11 = w(x, y, 2, 0) + t2 * b(x, y, 1, 0);
    R e22 = w(x, y, 0, 2) + t2 * b(x, y, 0, 1);
    R e12 = w(x, y, 1, 1) + t2 * (b(x, y, 1, 0) + b(x, y, 0, 1)) / R(2);
    R tr = e11 + e22;
    out[0][0] = c1 * ((R(1) - nu) * e11 + nu * tr);
    out[1][1] = c1 * ((R(1) - nu) * e22 + nu * tr);
    out[0][1] = out[1][0] = c1 * (R(1) - nu) * e12;
  }

  // analytic divergence of the moment tensor
  void div_moment(R x, R y, R out[2]) const {
    R t2 = t * t;
    R de11_dx = w(x, y, 3, 0) + t2 * b(x, y, 2, 0);
    R de12_dy = w(x, y, 1, 2) + t2 * (b(x, y, 1, 1) + b(x, y, 0, 2)) / R(2);
    R de12_dx = w(x, y, 2, 1) + t2 * (b(x, y, 2, 0) + b(x, y, 1, 1)) / R(2);
    R de22_dy = w(x, y, 0, 3) + t2 * b(x, y, 0, 2);
    R dtr_dx = w(x, y, 3, 0) + w(x, y, 1, 2) + t2 * (b(x, y, 2, 0) + b(x, y, 1, 1));
    R dtr_dy = w(x, y, 2, 1) + w(x, y, 0, 3) + t2 * (b(x, y, 1, 1) + b(x, y, 0, 2));
    out[0] = c1 * ((R(1) - nu) * (de11_dx + de12_dy) + nu * dtr_dx);
    out[1] = c1 * ((R(1) - nu) * (de12_dx + de22_dy) + nu * dtr_dy);
  }

  void f_rm(R x, R y, R out[2]) const {
    div_moment(x, y, out);
    out[0] = -out[0] + b(x, y, 0, 0);
    out[1] = -out[1] + b(x, y, 0, 0);
  }
  R g_rm(R x, R y) const { return b(x, y, 1, 0) + b(x, y, 0, 1); }

  R g_kirchhoff(R x, R y) const {
    return c1 * (w(x, y, 4, 0) + R(2) * w(x, y, 2, 2) + w(x, y, 0, 4));
  }
};

}  // namespace detail

struct ManufacturedCase {
  std::string name;
  Domain domain;
  double t = 0;
  PlateMaterial material;
  bool thin_limit = false;  // Kirchhoff family

  std::function<double(const Vec2&)> omega;
  std::function<Vec2(const Vec2&)> grad_omega;
  std::function<Vec2(const Vec2&)> phi;
  std::function<Eigen::Matrix2d(const Vec2&)> grad_phi;
  std::function<Vec2(const Vec2&)> zeta;      // null for the thin-plate case
  std::function<double(const Vec2&)> rot_zeta;
  std::function<Vec2(const Vec2&)> f;         // null when identically zero
  std::function<double(const Vec2&)> g;
  int load_degree = 16;
  std::function<double()> self_check;  // strong-form oracle; largest relative residual

  PlateProblem problem() const {
    PlateProblem p;
    p.material = material;
    p.material.thickness = t;
    p.load_f = f;
    p.load_g = g;
    p.load_quadrature_degree = load_degree;
    return p;
  }
};

inline PlateMaterial default_case_material() {
  PlateMaterial m;
  m.youngs = 12.0;
  m.poisson = 0.3;
  return m;
}

inline double verify_rm_case_fd(double t, PlateMaterial mat = default_case_material(),
                                int npoints = 100, unsigned seed = 2024);
inline double verify_kirchhoff_case_fd(PlateMaterial mat = default_case_material(),
                                       int npoints = 100, unsigned seed = 2024);

inline ManufacturedCase make_rm_case(double t, PlateMaterial mat = default_case_material()) {
  if (t <= 0) throw std::invalid_argument("make_rm_case requires t > 0");
  mat.check();
  detail::PlatePolyCore<double> core{t, mat.bending_scale(), mat.poisson};

  ManufacturedCase c;
  c.name = "rm";
  c.domain = canonical_domain();
  c.t = t;
  c.material = mat;
  c.omega = [core](const Vec2& x) { return core.omega(x.x(), x.y()); };
  c.grad_omega = [core](const Vec2& x) {
    double g[2];
    core.grad_omega(x.x(), x.y(), g);
    return Vec2(g[0], g[1]);
  };
  c.phi = [core](const Vec2& x) {
    double g[2];
    core.phi(x.x(), x.y(), g);
    return Vec2(g[0], g[1]);
  };
  c.grad_phi = [core](const Vec2& x) {
    double g[2][2];
    core.grad_phi(x.x(), x.y(), g);
    Eigen::Matrix2d M;
    M << g[0][0], g[0][1], g[1][0], g[1][1];
    return M;
  };
  c.zeta = [core](const Vec2& x) {
    double bb = core.b(x.x(), x.y(), 0, 0);
    return Vec2(-bb, -bb);
  };
  c.rot_zeta = [core](const Vec2& x) {
    return -core.b(x.x(), x.y(), 1, 0) + core.b(x.x(), x.y(), 0, 1);
  };
  c.f = [core](const Vec2& x) {
    double g[2];
    core.f_rm(x.x(), x.y(), g);
    return Vec2(g[0], g[1]);
  };
  c.g = [core](const Vec2& x) { return core.g_rm(x.x(), x.y()); };
  c.self_check = [t, mat] { return verify_rm_case_fd(t, mat, 100, 2024); };
  return c;
}

inline ManufacturedCase make_kirchhoff_case(PlateMaterial mat = default_case_material()) {
  mat.check();
  detail::PlatePolyCore<double> core{0.0, mat.bending_scale(), mat.poisson};

  ManufacturedCase c;
  c.name = "kirchhoff";
  c.domain = canonical_domain();
  c.t = 0;
  c.material = mat;
  c.thin_limit = true;
  c.omega = [core](const Vec2& x) { return core.omega(x.x(), x.y()); };
  c.grad_omega = [core](const Vec2& x) {
    double g[2];
    core.grad_omega(x.x(), x.y(), g);
    return Vec2(g[0], g[1]);
  };
  c.phi = c.grad_omega;
  c.grad_phi = [core](const Vec2& x) {
    double g[2][2];
    core.grad_phi(x.x(), x.y(), g);
    Eigen::Matrix2d M;
    M << g[0][0], g[0][1], g[1][0], g[1][1];
    return M;
  };
  c.g = [core](const Vec2& x) { return core.g_kirchhoff(x.x(), x.y()); };
  c.self_check = [mat] { return verify_kirchhoff_case_fd(mat, 100, 2024); };
  return c;
}

// ---- finite difference oracle --------------------------------------------------

namespace detail {

// interior sample points away from the hole, seeded and reproducible
inline std::vector<Vec2> oracle_points(const Domain& d, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.02, d.outer_side - 0.02);
  std::vector<Vec2> pts;
  while (static_cast<int>(pts.size()) < n) {
    Vec2 x(u(rng), u(rng));
    bool inside_hole = false;
    for (const auto& h : d.holes)
      inside_hole |= (x.x() > h.x0 - 0.02 && x.x() < h.x1 + 0.02 && x.y() > h.y0 - 0.02 &&
                      x.y() < h.y1 + 0.02);
    if (!inside_hole) pts.push_back(x);
  }
  return pts;
}

}  // namespace detail

// Verifies the thick-plate strong form at random interior points: both lines
// of the system, with the differential operators re-derived by central
// differences (step 1e-5) in long double. Returns the largest relative
// residual, measured against the largest term of each line.
inline double verify_rm_case_fd(double t, PlateMaterial mat, int npoints, unsigned seed) {
  using R = long double;
  detail::PlatePolyCore<R> core{static_cast<R>(t), static_cast<R>(mat.bending_scale()),
                                static_cast<R>(mat.poisson)};
  const R h = 1e-5L;
  const R t2 = core.t * core.t;
  double worst = 0;

  for (const Vec2& p : detail::oracle_points(canonical_domain(), npoints, seed)) {
    R x = p.x(), y = p.y();

    // first line: -div C E(phi) + t^-2 (phi - grad omega) = f
    R mxp[2][2], mxm[2][2], myp[2][2], mym[2][2];
    core.moment(x + h, y, mxp);
    core.moment(x - h, y, mxm);
    core.moment(x, y + h, myp);
    core.moment(x, y - h, mym);
    R divm[2] = {(mxp[0][0] - mxm[0][0]) / (2 * h) + (myp[0][1] - mym[0][1]) / (2 * h),
                 (mxp[1][0] - mxm[1][0]) / (2 * h) + (myp[1][1] - mym[1][1]) / (2 * h)};
    R phi[2], gw[2], fv[2];
    core.phi(x, y, phi);
    core.grad_omega(x, y, gw);
    core.f_rm(x, y, fv);
    for (int c = 0; c < 2; ++c) {
      R shear = (phi[c] - gw[c]) / t2;
      R resid = -divm[c] + shear - fv[c];
      R scale = std::max({std::abs((double)divm[c]), std::abs((double)shear),
                          std::abs((double)fv[c]), 1.0});
      worst = std::max(worst, std::abs((double)resid) / (double)scale);
    }

    // second line: t^-2 (-lap omega + div phi) = g
    R lap = (core.omega(x + h, y) - 2 * core.omega(x, y) + core.omega(x - h, y)) / (h * h) +
            (core.omega(x, y + h) - 2 * core.omega(x, y) + core.omega(x, y - h)) / (h * h);
    R pxp[2], pxm[2], pyp[2], pym[2];
    core.phi(x + h, y, pxp);
    core.phi(x - h, y, pxm);
    core.phi(x, y + h, pyp);
    core.phi(x, y - h, pym);
    R divphi = (pxp[0] - pxm[0]) / (2 * h) + (pyp[1] - pym[1]) / (2 * h);
    R gv = core.g_rm(x, y);
    R resid = (-lap + divphi) / t2 - gv;
    R scale = std::max({std::abs((double)(lap / t2)), std::abs((double)(divphi / t2)),
                        std::abs((double)gv), 1.0});
    worst = std::max(worst, std::abs((double)resid) / (double)scale);
  }
  return worst;
}

// Thin-plate analogue: g against a nested difference of the analytic moment
// tensor of grad omega (divergence of divergence), Richardson-extrapolated to
// remove the leading truncation term.
inline double verify_kirchhoff_case_fd(PlateMaterial mat, int npoints, unsigned seed) {
  using R = long double;
  detail::PlatePolyCore<R> core{0.0L, static_cast<R>(mat.bending_scale()),
                                static_cast<R>(mat.poisson)};
  double worst = 0;

  auto divdiv_moment = [&core](R x, R y, R h) {
    R mxp[2][2], mxm[2][2], myp[2][2], mym[2][2], mpp[2][2], mpm[2][2], mmp[2][2], mmm[2][2],
        m00[2][2];
    core.moment(x + h, y, mxp);
    core.moment(x - h, y, mxm);
    core.moment(x, y + h, myp);
    core.moment(x, y - h, mym);
    core.moment(x + h, y + h, mpp);
    core.moment(x + h, y - h, mpm);
    core.moment(x - h, y + h, mmp);
    core.moment(x - h, y - h, mmm);
    core.moment(x, y, m00);
    R d2xx = (mxp[0][0] - 2 * m00[0][0] + mxm[0][0]) / (h * h);
    R d2yy = (myp[1][1] - 2 * m00[1][1] + mym[1][1]) / (h * h);
    R d2xy = (mpp[0][1] - mpm[0][1] - mmp[0][1] + mmm[0][1]) / (4 * h * h);
    return d2xx + 2 * d2xy + d2yy;
  };

  const R h = 2e-4L;
  for (const Vec2& p : detail::oracle_points(canonical_domain(), npoints, seed)) {
    R x = p.x(), y = p.y();
    R coarse = divdiv_moment(x, y, h), fine = divdiv_moment(x, y, h / 2);
    R dd = (R(4) * fine - coarse) / R(3);
    R gv = core.g_kirchhoff(x, y);
    double scale = std::max(std::abs((double)gv), 1.0);
    worst = std::max(worst, std::abs((double)(dd - gv)) / scale);
  }
  return worst;
}

}  // namespace platemix
