// Command-line driver: solve, stability, cond, filter-error, eoc-study.
#include <fmt/format.h>
#include <fmt/os.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "sdapk/config.hpp"

namespace fs = std::filesystem;
using namespace sdapk;

namespace {

constexpr int kOk = 0, kConfigError = 1, kBlowUp = 2;

void write_snapshot(const fs::path& path, const SdSolver& s, const Eigen::MatrixXd& U) {
  auto out = fmt::output_file(path.string());
  out.print("cell_id,point_x,point_y,u\n");
  for (std::size_t c = 0; c < s.mesh().size(); ++c)
    for (std::size_t j = 0; j < s.ops().Ks(); ++j) {
      const Point2 p = s.solution_point(c, j);
      out.print("{},{:.12g},{:.12g},{:.12e}\n", c, p.x, p.y, U(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)));
    }
}

int cmd_solve(const Config& cfg, const fs::path& out) {
  const TriMesh mesh = make_mesh(cfg.mesh);
  SdSolver solver(mesh, make_problem(cfg.problem), cfg.run);
  write_snapshot(out / "snapshot_initial.csv", solver, solver.initial_state());

  auto diag = fmt::output_file((out / "diagnostics.csv").string());
  diag.print("t,min,max,L1,L2,Linf{}\n", cfg.output.timing ? ",wall_ms" : "");
  const SolveResult res = solver.run([&](const DiagnosticsRow& d) {
    diag.print("{:.12g},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}", d.t, d.min, d.max, d.L1, d.L2, d.Linf);
    if (cfg.output.timing) diag.print(",{:.3f}", d.wall_ms);
    diag.print("\n");
  });
  diag.close();

  if (res.blew_up) {
    const std::string msg = fmt::format("blow-up: last finite time {:.6g}, offending cell {}, step {}\n",
                                        res.last_finite_t, res.offending_cell, res.steps);
    auto rep = fmt::output_file((out / "blowup.txt").string());
    rep.print("{}", msg);
    std::cerr << msg;
    return kBlowUp;
  }
  write_snapshot(out / "snapshot_final.csv", solver, res.U);
  if (cfg.run.with_exact && cfg.problem.name == "advection") {
    const auto n = solver.error_norms(res.U, res.t);
    auto err = fmt::output_file((out / "errors.csv").string());
    err.print("t,cells,N,L1,L2,Linf\n{:.12g},{},{},{:.12e},{:.12e},{:.12e}\n", res.t, mesh.size(), cfg.run.N, n.L1,
              n.L2, n.Linf);
  }
  std::cout << fmt::format("reached t={:.6g} in {} steps (dt={:.6g}), min {:.6g}, max {:.6g}\n", res.t, res.steps,
                           res.dt, res.U.minCoeff(), res.U.maxCoeff());
  return kOk;
}

int cmd_stability(const Config& cfg, const fs::path& out) {
  const auto& st = cfg.stability;
  SweepSpec spec;
  spec.N = cfg.run.N;
  spec.tuples = st.tuples;
  spec.filtered = st.filtered;
  spec.p_values = st.p;
  spec.c_values = st.c;
  spec.base = st.settings;
  spec.lagrange = st.lagrange;
  spec.cases = case_grid(st.n_psi, st.n_w);
  spec.checkpoint = st.checkpoint;
  const std::vector<SweepRow> rows = sweep(spec);

  auto csv = fmt::output_file((out / "stability.csv").string());
  csv.print("{}\n", sweep_csv_header());
  const SweepRow* best = nullptr;
  for (const auto& r : rows) {
    csv.print("{}\n", sweep_csv_line(r));
    if (!best || r.L < best->L) best = &r;
  }
  csv.close();
  auto sum = fmt::output_file((out / "stability_best.csv").string());
  sum.print("{}\n{}\n", sweep_csv_header(), sweep_csv_line(*best));
  std::cout << fmt::format("N={} best L={:.7g} at ({:.3g},{:.3g},{:.3g})\n", spec.N, best->L, best->alpha, best->beta,
                           best->gamma);
  return kOk;
}

int cmd_cond(const Config& cfg, const fs::path& out) {
  auto csv = fmt::output_file((out / "cond.csv").string());
  csv.print("basis,N,kappa\n");
  for (const auto& p : cfg.cond.tuples)
    for (int N = cfg.cond.N_min; N <= cfg.cond.N_max; ++N)
      csv.print("({:g};{:g};{:g}),{},{:.6e}\n", p.alpha, p.beta, p.gamma, N, vandermonde_condition(p, N));
  if (cfg.cond.lagrange_row)
    for (int N = cfg.cond.N_min; N <= cfg.cond.N_max; ++N)
      csv.print("lagrange,{},{:.6e}\n", N, lagrange_reference_condition(N));
  return kOk;
}

int cmd_filter_error(const Config& cfg, const fs::path& out) {
  const auto& fe = cfg.filter_error;
  const auto rows = error_study(error_study_function(fe.function), cfg.run.params, fe.profile, fe.N, fe.options);
  auto csv = fmt::output_file((out / "filter_error.csv").string());
  csv.print("N,region,max_error,x,y,fitted_exponent,fitted_constant\n");
  std::map<std::string, std::vector<const ErrorStudyRow*>> by_region;
  for (const auto& r : rows) {
    csv.print("{},{},{:.9e},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.N, r.region, r.max_error, r.x, r.y, r.fitted_exponent,
              r.fitted_constant);
    by_region[r.region].push_back(&r);
  }
  csv.close();
  // gnuplot data: one block per region, separated by two blank lines
  auto dat = fmt::output_file((out / "filter_error.dat").string());
  std::vector<std::string> names;
  for (const auto& [region, rs] : by_region) {
    names.push_back(region);
    dat.print("# {}\n# N max_error\n", region);
    for (const auto* r : rs) dat.print("{} {:.9e}\n", r->N, r->max_error);
    dat.print("\n\n");
  }
  dat.close();
  auto gp = fmt::output_file((out / "filter_error.gp").string());
  gp.print("set logscale xy\nset xlabel 'N'\nset ylabel 'max error'\nplot ");
  for (std::size_t i = 0; i < names.size(); ++i)
    gp.print("{}'filter_error.dat' index {} with linespoints title '{}'", i ? ", " : "", i, names[i]);
  gp.print("\n");
  return kOk;
}

int cmd_eoc(const Config& cfg, const fs::path& out) {
  struct Entry {
    std::size_t cells;
    int N;
    SdSolver::Norms err;
    double wall_ms;
  };
  std::vector<Entry> table;
  ProblemSpec ps = cfg.problem;
  ps.name = "advection";
  ps.psi = cfg.eoc.psi;
  for (int nb : cfg.eoc.n_blocks) {
    const TriMesh mesh = build_pattern_grid(nb);
    for (int N : cfg.eoc.N) {
      RunConfig rc = cfg.run;
      rc.N = N;
      rc.with_exact = false;
      const auto t0 = std::chrono::steady_clock::now();
      SdSolver s(mesh, make_problem(ps), rc);
      const SolveResult r = s.run();
      if (r.blew_up) {
        std::cerr << fmt::format("blow-up at N={} cells={}\n", N, mesh.size());
        return kBlowUp;
      }
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      table.push_back({mesh.size(), N, s.error_norms(r.U, r.t), ms});
    }
  }
  auto find = [&](std::size_t cells, int N) -> const Entry* {
    for (const auto& e : table)
      if (e.cells == cells && e.N == N) return &e;
    return nullptr;
  };
  auto csv = fmt::output_file((out / "eoc.csv").string());
  csv.print("cells,N,L1,L2,Linf,eoc_k,eoc_N\n");
  std::size_t prev_cells = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Entry& e = table[i];
    if (i > 0 && table[i - 1].cells != e.cells) prev_cells = table[i - 1].cells;
    std::string ek, en;
    if (const Entry* c = prev_cells ? find(prev_cells, e.N) : nullptr)
      ek = fmt::format("{:.4f}", eoc(c->err.Linf, e.err.Linf, double(c->cells), double(e.cells)));
    if (const Entry* c = find(e.cells, e.N - 1))
      en = fmt::format("{:.4f}", eoc(c->err.Linf, e.err.Linf, e.N - 1.0, e.N));
    csv.print("{},{},{:.6e},{:.6e},{:.6e},{},{}\n", e.cells, e.N, e.err.L1, e.err.L2, e.err.Linf, ek, en);
  }
  csv.close();
  if (cfg.output.timing) {
    auto tm = fmt::output_file((out / "eoc_timing.csv").string());
    tm.print("cells,N,wall_ms\n");
    for (const auto& e : table) tm.print("{},{},{:.3f}\n", e.cells, e.N, e.wall_ms);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral difference solver with APK flux bases and modal filtering"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::map<std::string, int (*)(const Config&, const fs::path&)> commands = {
      {"solve", cmd_solve}, {"stability", cmd_stability}, {"cond", cmd_cond},
      {"filter-error", cmd_filter_error}, {"eoc-study", cmd_eoc}};
  const std::map<std::string, std::string> help = {
      {"solve", "advance a conservation law and write snapshots and diagnostics"},
      {"stability", "von Neumann sweep of the largest real eigenvalue part"},
      {"cond", "Vandermonde condition numbers over N"},
      {"filter-error", "maximum error of filtered expansions over N"},
      {"eoc-study", "advection convergence table over meshes and degrees"}};
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config,-c", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out_dir, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  Config cfg;
  try {
    cfg = load_config(config_path);
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    return commands.at(name)(cfg, fs::path(out_dir));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}
