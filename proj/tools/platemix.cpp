// Command line driver. Subcommands:
//   mesh gen   generate the structured square-with-holes mesh as JSON
//   run        solve one scheme over a level sequence, emit CSV/JSON tables
//   infsup     discrete inf-sup constants over a level sequence
//   verify     mesh / exact-sequence / commuting-identity battery
//   solve      standalone solve of a MatrixMarket system
//
// Exit codes: 0 success, 1 invariant violation or runtime failure, 2 usage.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "platemix/harness.hpp"
#include "platemix/mesh.hpp"
#include "platemix/schemes.hpp"
#include "platemix/solver.hpp"
#include "platemix/system.hpp"

namespace {

struct RunConfig {
  std::string scheme = "rm-mixed";
  double t = 1.0;
  int levels = 3;
  std::string case_name = "rm";
  std::string out_path;
  std::string format = "csv";
};

platemix::SchemeKind parse_scheme(const std::string& s) {
  using platemix::SchemeKind;
  if (s == "rm-mixed") return SchemeKind::rm_mixed;
  if (s == "rm-reduced") return SchemeKind::rm_mixed_reduced;
  if (s == "rm-primal") return SchemeKind::rm_primal;
  if (s == "k-mixed") return SchemeKind::k_mixed;
  if (s == "k-reduced") return SchemeKind::k_mixed_reduced;
  if (s == "bfs-check") return SchemeKind::bfs_check;
  throw CLI::ValidationError("--scheme", "unknown scheme " + s);
}

// JSON config mirroring the CLI flags; explicit flags win.
void apply_config_file(const std::string& path, RunConfig& cfg, const CLI::App& cmd) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  in >> j;
  auto unset = [&](const std::string& flag) { return cmd.get_option(flag)->count() == 0; };
  if (j.contains("scheme") && unset("--scheme")) cfg.scheme = j["scheme"].get<std::string>();
  if (j.contains("t") && unset("--t")) cfg.t = j["t"].get<double>();
  if (j.contains("levels") && unset("--levels")) cfg.levels = j["levels"].get<int>();
  if (j.contains("case") && unset("--case")) cfg.case_name = j["case"].get<std::string>();
  if (j.contains("out") && unset("--out")) cfg.out_path = j["out"].get<std::string>();
  if (j.contains("format") && unset("--format")) cfg.format = j["format"].get<std::string>();
}

int cmd_run(RunConfig cfg) {
  using namespace platemix;
  SchemeKind kind = parse_scheme(cfg.scheme);

  // the thin-plate limit: a vanishing thickness routes to the Kirchhoff schemes
  if (is_rm_scheme(kind) && cfg.t == 0.0) {
    SchemeKind routed = (kind == SchemeKind::rm_mixed) ? SchemeKind::k_mixed
                                                       : SchemeKind::k_mixed_reduced;
    std::cerr << "note: t = 0 routes " << scheme_name(kind) << " to " << scheme_name(routed)
              << "\n";
    kind = routed;
  }

  bool rm_family = is_rm_scheme(kind);
  if (rm_family && cfg.case_name != "rm")
    throw CLI::ValidationError("--case", "thick-plate schemes need --case rm");
  if (!rm_family && cfg.case_name != "kirchhoff")
    throw CLI::ValidationError("--case", "Kirchhoff schemes need --case kirchhoff");

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path);
    if (!file) throw std::runtime_error("cannot open " + cfg.out_path);
    out = &file;
  }

  if (kind == SchemeKind::bfs_check) {
    BfsTable table = run_bfs_levels(cfg.t, cfg.levels);
    if (cfg.format == "json") {
      nlohmann::json j;
      j["scheme"] = "bfs-check";
      j["t"] = cfg.t;
      j["rows"] = nlohmann::json::array();
      for (size_t i = 0; i < table.gaps.size(); ++i)
        j["rows"].push_back({{"level", table.levels[i]},
                             {"h", table.h[i]},
                             {"gap_phi_h1", table.gaps[i].phi_h1},
                             {"gap_w_h1", table.gaps[i].omega_h1},
                             {"gap_y_h1", table.gaps[i].y_h1},
                             {"gap_p_l2", table.gaps[i].p_l2},
                             {"alpha_residual", table.gaps[i].alpha_res}});
      *out << j.dump(2) << "\n";
    } else {
      write_csv(table, *out);
    }
    return 0;
  }

  ManufacturedCase mc = rm_family ? make_rm_case(cfg.t) : make_kirchhoff_case();
  ConvergenceTable table = run_convergence(kind, mc, cfg.levels);
  if (cfg.format == "json")
    *out << table_to_json(table).dump(2) << "\n";
  else
    write_csv(table, *out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed finite element schemes for clamped plates on holed domains"};
  app.require_subcommand(1);

  // mesh gen
  auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
  auto* gen = mesh_cmd->add_subcommand("gen", "generate a structured mesh");
  double outer = 3.0;
  int n = 1, refine = 0;
  std::vector<std::string> hole_specs;
  std::string mesh_out = "mesh.json";
  gen->add_option("--outer", outer, "outer square side length");
  gen->add_option("--hole", hole_specs, "hole box x0,y0,x1,y1 (repeatable)");
  gen->add_option("--n", n, "grid subdivisions per unit length");
  gen->add_option("--refine", refine, "uniform refinements after generation");
  gen->add_option("--out", mesh_out, "output mesh file");

  // run
  auto* run = app.add_subcommand("run", "convergence run of one scheme");
  RunConfig cfg;
  std::string config_path;
  run->add_option("--scheme", cfg.scheme,
                  "rm-mixed|rm-reduced|rm-primal|k-mixed|k-reduced|bfs-check");
  run->add_option("--t", cfg.t, "plate thickness");
  run->add_option("--levels", cfg.levels, "number of refinement levels");
  run->add_option("--case", cfg.case_name, "rm|kirchhoff");
  run->add_option("--out", cfg.out_path, "output file (default stdout)");
  run->add_option("--format", cfg.format, "csv|json");
  run->add_option("--config", config_path, "JSON config mirroring these flags");

  // infsup
  auto* infsup = app.add_subcommand("infsup", "discrete inf-sup constants");
  double infsup_t = 1e-3;
  int infsup_levels = 3;
  infsup->add_option("--t", infsup_t, "plate thickness");
  infsup->add_option("--levels", infsup_levels, "levels 1..n");

  // verify
  auto* verify = app.add_subcommand("verify", "structural verification battery");
  int mesh_levels = 3;
  verify->add_option("--mesh-levels", mesh_levels, "refinement depth of the mesh checks");

  // solve
  auto* solve = app.add_subcommand("solve", "solve a MatrixMarket system");
  std::string mtx_path, rhs_path, sol_out;
  double tol = 1e-10;
  solve->add_option("--matrix", mtx_path, "MatrixMarket coordinate file")->required();
  solve->add_option("--rhs", rhs_path, "right-hand side, one value per line")->required();
  solve->add_option("--out", sol_out, "solution output file (default stdout)");
  solve->add_option("--tol", tol, "relative residual tolerance");

  try {
    app.parse(argc, argv);

    if (gen->parsed()) {
      std::vector<platemix::Box> holes;
      for (const std::string& spec : hole_specs) {
        platemix::Box b;
        if (std::sscanf(spec.c_str(), "%lf,%lf,%lf,%lf", &b.x0, &b.y0, &b.x1, &b.y1) != 4)
          throw CLI::ValidationError("--hole", "expected x0,y0,x1,y1");
        holes.push_back(b);
      }
      platemix::Mesh m = platemix::generate_square_hole_mesh(outer, holes, n);
      for (int i = 0; i < refine; ++i) m = platemix::refine_uniform(m);
      platemix::ValidationReport rep = platemix::validate(m);
      if (!rep.ok) {
        for (const auto& v : rep.violations) std::cerr << "invariant: " << v << "\n";
        return 1;
      }
      platemix::save_mesh(m, mesh_out);
      std::cout << "wrote " << mesh_out << " (V=" << m.num_vertices() << " E=" << m.num_edges()
                << " T=" << m.num_triangles() << ", J=" << m.num_holes << ")\n";
      return 0;
    }

    if (run->parsed()) {
      if (!config_path.empty()) apply_config_file(config_path, cfg, *run);
      return cmd_run(cfg);
    }

    if (infsup->parsed()) {
      bool all_positive = true;
      for (int l = 1; l <= infsup_levels; ++l) {
        platemix::Mesh m = platemix::mesh_at_level(platemix::canonical_domain(), l);
        platemix::InfSupEstimate est = platemix::estimate_infsup(m, infsup_t, l);
        std::printf("level %d  t %.3e  beta %.6e  (eig residual %.1e)\n", l, infsup_t, est.beta,
                    est.eig_residual);
        all_positive &= est.beta > 0;
      }
      return all_positive ? 0 : 1;
    }

    if (verify->parsed()) {
      platemix::VerifyReport rep = platemix::run_verify(mesh_levels);
      for (const auto& line : rep.lines) std::cout << line << "\n";
      std::cout << (rep.ok ? "verify: ok" : "verify: FAILED") << "\n";
      return rep.ok ? 0 : 1;
    }

    if (solve->parsed()) {
      platemix::SparseMat A = platemix::read_matrix_market(mtx_path);
      Eigen::VectorXd b = platemix::read_vector(rhs_path);
      platemix::SolveReport rep = platemix::solve_symmetric_indefinite(A, b, tol);
      std::cerr << "n = " << A.rows() << ", relative residual = " << rep.rel_residual << "\n";
      if (sol_out.empty())
        for (long i = 0; i < rep.x.size(); ++i) std::cout << rep.x[i] << "\n";
      else
        platemix::write_vector(rep.x, sol_out);
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const CLI::Error& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
