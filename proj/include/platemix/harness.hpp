#pragma once

// Convergence and robustness drivers plus table output. Levels of one run
// share the refinement chain of the canonical domain; the multiplier errors
// of level l are measured against the solution at level min(l+2, L) from the
// same run (nan on the finest level, where no finer solution exists).

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "platemix/errors.hpp"
#include "platemix/interpolate.hpp"
#include "platemix/manufactured.hpp"
#include "platemix/schemes.hpp"
#include "platemix/solver.hpp"

namespace platemix {

struct ConvergenceRow {
  int level = 0;
  double h = 0;
  long ndofs = 0;
  ErrorRecord err;
  double rate_phi = std::numeric_limits<double>::quiet_NaN();
  double rate_w = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable {
  std::string scheme;
  std::string case_name;
  double t = 0;
  std::vector<ConvergenceRow> rows;
};

inline int worker_cap() {
  if (const char* env = std::getenv("PLATEMIX_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

namespace detail {

// solve one scheme on one mesh; rm_primal additionally gets the recovered
// shear attached so its error columns are complete
inline SolutionFields solve_on_mesh(const Mesh& m, const ManufacturedCase& mc, SchemeKind kind,
                                    double t, double tol, long* ndofs = nullptr) {
  SchemeSystem sys = assemble_scheme(m, mc.problem(), kind, t);
  if (ndofs) *ndofs = sys.sys.size();
  SolutionFields sol = solve_scheme(sys, tol);
  if (kind == SchemeKind::rm_primal) {
    sol.rt_map = std::make_shared<DofMap>(build_dofmap(m, SpaceKind::rt_rot));
    sol.zeta = recover_shear(*sol.rt_map, sol.phi, sol.omega, t);
  }
  return sol;
}

}  // namespace detail

inline ConvergenceTable run_convergence(SchemeKind kind, const ManufacturedCase& mc, int levels,
                                        double solver_tol = 1e-10) {
  if (levels < 1) throw std::invalid_argument("need at least one level");
  if (mc.self_check) {
    double resid = mc.self_check();
    if (!(resid <= 1e-6))
      throw std::runtime_error("manufactured case fails its strong-form oracle: residual " +
                               std::to_string(resid));
  }
  std::deque<Mesh> meshes;
  meshes.push_back(generate_mesh(mc.domain, 1));
  for (int l = 1; l <= levels; ++l) meshes.push_back(refine_uniform(meshes.back()));

  std::vector<SolutionFields> sols(levels + 1);
  std::vector<long> ndofs(levels + 1, 0);
  for (int l = 1; l <= levels; ++l)
    sols[l] = detail::solve_on_mesh(meshes[l], mc, kind, mc.t, solver_tol, &ndofs[l]);

  ConvergenceTable table;
  table.scheme = scheme_name(kind);
  table.case_name = mc.name;
  table.t = mc.t;
  for (int l = 1; l <= levels; ++l) {
    ConvergenceRow row;
    row.level = l;
    row.h = meshes[l].mesh_size();
    row.ndofs = ndofs[l];
    int ref = std::min(l + 2, levels);
    row.err = error_norms(sols[l], mc, ref > l ? &sols[ref] : nullptr);
    if (l > 1) {
      const ErrorRecord& prev = table.rows.back().err;
      row.rate_phi = std::log2(prev.phi_h1 / row.err.phi_h1);
      row.rate_w = std::log2(prev.w_h1 / row.err.w_h1);
    }
    table.rows.push_back(row);
  }
  return table;
}

struct SweepRow {
  double t = 0;
  ErrorRecord err;
  double xt_total = 0;  // phi + omega + scaled-shear error, the computable part of the X^t norm
};

struct SweepTable {
  std::string scheme;
  int level = 0;
  std::vector<SweepRow> rows;
};

inline SweepTable run_t_sweep(SchemeKind kind, const std::vector<double>& t_list, int level,
                              double solver_tol = 1e-10) {
  if (!is_rm_scheme(kind)) throw std::invalid_argument("the t-sweep applies to the thick-plate schemes");
  Mesh mesh = mesh_at_level(canonical_domain(), level);

  SweepTable table;
  table.scheme = scheme_name(kind);
  table.level = level;
  table.rows.resize(t_list.size());

  int workers = std::min<int>(worker_cap(), static_cast<int>(t_list.size()));
  std::atomic<size_t> next{0};
  auto run_cell = [&](size_t i) {
    ManufacturedCase mc = make_rm_case(t_list[i]);
    SolutionFields sol = detail::solve_on_mesh(mesh, mc, kind, t_list[i], solver_tol);
    SweepRow row;
    row.t = t_list[i];
    row.err = error_norms(sol, mc);
    row.xt_total = row.err.phi_h1 + row.err.w_h1 + row.err.zeta_xt;
    table.rows[i] = row;
  };
  if (workers <= 1) {
    for (size_t i = 0; i < t_list.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < t_list.size(); i = next.fetch_add(1)) run_cell(i);
      });
    for (auto& th : pool) th.join();
  }
  return table;
}

// ---- verification battery (mesh / sequence / commuting identities) ------------

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> lines;

  void add(bool pass, const std::string& what) {
    ok &= pass;
    lines.push_back(std::string(pass ? "[ok]   " : "[FAIL] ") + what);
  }
};

// relative violation of the commuting identity: per-triangle circulation of
// (Pi v - v) against the largest circulation of v itself
inline double commuting_residual(const Mesh& m, const FieldFunction& interp,
                                 const VectorField& v) {
  double worst = 0, scale = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    double ci = 0, cv = 0;
    for (int i = 0; i < 3; ++i) {
      int e = m.tri_edges[t][i];
      double target = edge_tangential_integral(m, e, v);
      double got = (interp.dofmap->kind == SpaceKind::br_vec)
                       ? edge_tangential_integral_br(interp, e)
                       : (interp.dofmap->edge_dof[e] >= 0
                              ? interp.coeffs[interp.dofmap->edge_dof[e]]
                              : 0.0);
      ci += m.tri_edge_sign[t][i] * (got - target);
      cv += m.tri_edge_sign[t][i] * target;
    }
    worst = std::max(worst, std::abs(ci));
    scale = std::max(scale, std::abs(cv));
  }
  return worst / std::max(scale, 1e-30);
}

// random polynomials times the bump of the canonical domain, so every field
// vanishes on the whole boundary including the hole
inline std::vector<VectorField> random_smooth_fields(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<VectorField> out;
  for (int k = 0; k < count; ++k) {
    std::array<double, 12> c;
    for (double& v : c) v = u(rng);
    out.push_back([c](const Vec2& p) {
      double x = p.x(), y = p.y();
      double bump = detail::q_deriv(x, 0) * detail::q_deriv(y, 0);
      double r1 = c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
      double r2 = c[6] + c[7] * x + c[8] * y + c[9] * x * x + c[10] * x * y + c[11] * y * y;
      return Vec2(r1 * bump, r2 * bump);
    });
  }
  return out;
}

inline VerifyReport run_verify(int mesh_levels) {
  VerifyReport rep;
  char buf[256];

  for (const Domain& dom : {canonical_domain(), two_hole_domain()}) {
    Mesh m = generate_mesh(dom, 1);
    double area0 = m.total_area();
    for (int l = 0; l <= mesh_levels; ++l) {
      if (l > 0) m = refine_uniform(m);
      ValidationReport v = validate(m);
      std::snprintf(buf, sizeof buf, "mesh invariants, J=%d level %d (V=%d E=%d T=%d)",
                    dom.hole_count(), l, m.num_vertices(), m.num_edges(), m.num_triangles());
      rep.add(v.ok, buf);
      for (const auto& viol : v.violations) rep.add(false, "  " + viol);
      rep.add(std::abs(m.total_area() - area0) <= 1e-12 * area0, "area preserved");
    }
  }

  int seq_levels = std::min(mesh_levels, 3);
  for (int l = 1; l <= seq_levels; ++l) {
    Mesh m = mesh_at_level(canonical_domain(), l);
    ExactSequenceReport seq = check_exact_sequence(m);
    std::snprintf(buf, sizeof buf,
                  "exact sequence, level %d: dim %d = %d + %d, rank %d, kernel residual %.2e",
                  l, seq.dim_rt, seq.dim_grad_source, seq.dim_rot_target, seq.rot_rank,
                  seq.max_gradient_rot_residual);
    rep.add(seq.ok, buf);
  }

  {
    Mesh m = mesh_at_level(canonical_domain(), 2);
    DofMap br = build_dofmap(m, SpaceKind::br_vec);
    DofMap rt = build_dofmap(m, SpaceKind::rt_rot);
    double worst_f = 0, worst_r = 0;
    for (const VectorField& v : random_smooth_fields(20, 901)) {
      worst_f = std::max(worst_f, commuting_residual(m, interpolate_fortin(br, v), v));
      worst_r = std::max(worst_r, commuting_residual(m, interpolate_rt(rt, v), v));
    }
    std::snprintf(buf, sizeof buf, "commuting identity, Fortin operator: %.2e", worst_f);
    rep.add(worst_f <= 1e-12, buf);
    std::snprintf(buf, sizeof buf, "commuting identity, edge interpolant: %.2e", worst_r);
    rep.add(worst_r <= 1e-12, buf);
  }
  return rep;
}

// ---- output --------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

}  // namespace detail

inline const char* csv_header() {
  return "level,h,ndofs,err_phi_h1,err_w_h1,err_zeta_xt,err_p_l2,err_y_h1,rate_phi,rate_w";
}

inline void write_csv(const ConvergenceTable& t, std::ostream& out) {
  out << csv_header() << "\n";
  for (const auto& r : t.rows) {
    out << r.level << "," << detail::fmt(r.h) << "," << r.ndofs << ","
        << detail::fmt(r.err.phi_h1) << "," << detail::fmt(r.err.w_h1) << ","
        << detail::fmt(r.err.zeta_xt) << "," << detail::fmt(r.err.p_l2) << ","
        << detail::fmt(r.err.y_h1) << "," << detail::fmt(r.rate_phi) << ","
        << detail::fmt(r.rate_w) << "\n";
  }
}

inline nlohmann::json table_to_json(const ConvergenceTable& t) {
  nlohmann::json j;
  j["scheme"] = t.scheme;
  j["case"] = t.case_name;
  j["t"] = t.t;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows) {
    j["rows"].push_back({{"level", r.level},
                         {"h", r.h},
                         {"ndofs", r.ndofs},
                         {"err_phi_h1", r.err.phi_h1},
                         {"err_w_h1", r.err.w_h1},
                         {"err_zeta_xt", r.err.zeta_xt},
                         {"err_p_l2", r.err.p_l2},
                         {"err_y_h1", r.err.y_h1},
                         {"rate_phi", r.rate_phi},
                         {"rate_w", r.rate_w}});
  }
  return j;
}

// Gap table of the cross-check runs, written in the shared column layout:
// the five reported gaps occupy the error columns.
struct BfsTable {
  double t = 0;
  std::vector<int> levels;
  std::vector<double> h;
  std::vector<long> ndofs;
  std::vector<BfsGaps> gaps;
};

inline BfsTable run_bfs_levels(double t, int levels, double solver_tol = 1e-10) {
  BfsTable table;
  table.t = t;
  ManufacturedCase mc = make_rm_case(t);
  std::deque<Mesh> meshes;
  meshes.push_back(generate_mesh(mc.domain, 1));
  for (int l = 1; l <= levels; ++l) {
    meshes.push_back(refine_uniform(meshes.back()));
    const Mesh& m = meshes.back();
    table.levels.push_back(l);
    table.h.push_back(m.mesh_size());
    table.ndofs.push_back(0);
    table.gaps.push_back(bfs_cross_check(m, mc.problem(), t, solver_tol));
  }
  return table;
}

inline void write_csv(const BfsTable& t, std::ostream& out) {
  out << csv_header() << "\n";
  double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t i = 0; i < t.gaps.size(); ++i) {
    const BfsGaps& g = t.gaps[i];
    double rp = (i > 0) ? std::log2(t.gaps[i - 1].phi_h1 / g.phi_h1) : nan;
    double rw = (i > 0) ? std::log2(t.gaps[i - 1].omega_h1 / g.omega_h1) : nan;
    out << t.levels[i] << "," << detail::fmt(t.h[i]) << "," << t.ndofs[i] << ","
        << detail::fmt(g.phi_h1) << "," << detail::fmt(g.omega_h1) << ","
        << detail::fmt(g.alpha_res) << "," << detail::fmt(g.p_l2) << ","
        << detail::fmt(g.y_h1) << "," << detail::fmt(rp) << "," << detail::fmt(rw) << "\n";
  }
}

}  // namespace platemix
