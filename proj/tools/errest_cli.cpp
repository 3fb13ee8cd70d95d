// errest: run Krylov solvers with adaptive error estimates.
//
//   errest run --solver cgls --matrix tests/data/illc1033.mtx --rhs bundled --oracle
//   errest compare --solver-a cgls --solver-b lsqr --synthetic svd:5,3,10,1
//   errest synth --synthetic survey:1033,160,3,0,11 --out illc1033.mtx --rhs-out illc1033_b.mtx

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "errest/run.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumeric = 2, kIo = 3 };

struct RunFlags {
  std::string solver = "cgls";
  std::string precond = "none";
  std::string rhs = "generated:0";
  std::string csv;
  std::string json;
};

void add_problem_flags(CLI::App* cmd, errest::RunConfig& cfg) {
  auto* m = cmd->add_option("--matrix", cfg.matrix_path, "Matrix Market file");
  auto* s = cmd->add_option("--synthetic", cfg.synthetic,
                            "identity:N | diag:d1,... | svd:m,n,cond,seed | sparse:m,n,nnz,spread,seed | "
                            "survey:m,points,control,scaled,seed");
  m->excludes(s);
  cmd->add_option("--tau", cfg.tau, "relative accuracy of accepted estimates")->capture_default_str();
  cmd->add_option("--tol-est", cfg.tol_est, "TOL of the adaptive delay rule")->capture_default_str();
  cmd->add_option("--alpha", cfg.alpha, "stopping tolerance on ||A|| ||x_k||")->capture_default_str();
  cmd->add_option("--beta", cfg.beta, "stopping tolerance on ||b||")->capture_default_str();
  cmd->add_option("--max-iter", cfg.max_iter)->capture_default_str();
}

std::filesystem::path default_output(const std::string& explicit_path, const errest::RunConfig& cfg,
                                     const char* ext) {
  if (!explicit_path.empty()) return explicit_path;
  const char* dir = std::getenv("ERREST_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return {};
  std::string stem(errest::to_string(cfg.solver));
  if (cfg.precond != errest::PrecondKind::identity) stem += "_" + std::string(errest::to_string(cfg.precond));
  return std::filesystem::path(dir) / (stem + ext);
}

std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + p.string());
  return out;
}

int guarded(const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const errest::ParseError& e) {
    std::cerr << "errest: parse error: " << e.what() << '\n';
    return kIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "errest: I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "errest: I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const errest::BreakdownError& e) {
    std::cerr << "errest: breakdown: " << e.what() << '\n';
    return kNumeric;
  } catch (const errest::NumericError& e) {
    std::cerr << "errest: numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "errest: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "errest: " << e.what() << '\n';
    return kNumeric;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov least-squares / least-norm solvers with adaptive error estimates"};
  app.require_subcommand(1);

  errest::RunConfig run_cfg;
  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "run one solver and write CSV/JSON");
  add_problem_flags(run_cmd, run_cfg);
  run_cmd->add_option("--solver", run_flags.solver, "cg | cgls | lsqr | cgne | craig")->capture_default_str();
  run_cmd->add_option("--precond", run_flags.precond, "none | jacobi | ic0")->capture_default_str();
  run_cmd->add_option("--rhs", run_flags.rhs, "bundled | generated:SEED")->capture_default_str();
  run_cmd->add_flag("--oracle", run_cfg.oracle, "compute true errors and ideal delays densely");
  run_cmd->add_option("--csv", run_flags.csv, "per-iteration CSV (default: $ERREST_OUT_DIR or stdout)");
  run_cmd->add_option("--json", run_flags.json, "summary JSON (default: $ERREST_OUT_DIR)");

  errest::RunConfig cmp_cfg;
  std::string solver_a = "cgls", solver_b = "lsqr", precond_a = "none", precond_b = "none";
  std::string cmp_rhs = "generated:0";
  auto* cmp_cmd = app.add_subcommand("compare", "run two configurations on one instance");
  add_problem_flags(cmp_cmd, cmp_cfg);
  cmp_cmd->add_option("--solver-a", solver_a)->capture_default_str();
  cmp_cmd->add_option("--solver-b", solver_b)->capture_default_str();
  cmp_cmd->add_option("--precond-a", precond_a)->capture_default_str();
  cmp_cmd->add_option("--precond-b", precond_b)->capture_default_str();
  cmp_cmd->add_option("--rhs", cmp_rhs)->capture_default_str();

  std::string synth_spec, synth_out, synth_rhs_out;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic matrix as Matrix Market");
  synth_cmd->add_option("--synthetic", synth_spec)->required();
  synth_cmd->add_option("--out", synth_out)->required();
  synth_cmd->add_option("--rhs-out", synth_rhs_out, "also write a least-squares right-hand side");
  synth_cmd->add_option("--rhs-seed", synth_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*run_cmd) {
    return guarded([&] {
      run_cfg.solver = errest::parse_solver(run_flags.solver);
      run_cfg.precond = errest::parse_precond(run_flags.precond);
      run_cfg.rhs = errest::parse_rhs(run_flags.rhs);
      const auto report = errest::run(run_cfg);
      const auto csv_path = default_output(run_flags.csv, run_cfg, ".csv");
      const auto json_path = default_output(run_flags.json, run_cfg, ".json");
      if (csv_path.empty()) {
        errest::write_csv(std::cout, report);
      } else {
        auto out = open_output(csv_path);
        errest::write_csv(out, report);
      }
      if (!json_path.empty()) {
        auto out = open_output(json_path);
        out << errest::summary_json(run_cfg, report).dump(2) << '\n';
      }
    });
  }
  if (*cmp_cmd) {
    return guarded([&] {
      cmp_cfg.rhs = errest::parse_rhs(cmp_rhs);
      errest::RunConfig a = cmp_cfg, b = cmp_cfg;
      a.solver = errest::parse_solver(solver_a);
      b.solver = errest::parse_solver(solver_b);
      a.precond = errest::parse_precond(precond_a);
      b.precond = errest::parse_precond(precond_b);
      std::cout << errest::compare_json(errest::compare(a, b)).dump(2) << '\n';
    });
  }
  return guarded([&] {
    const auto A = errest::make_synthetic(synth_spec);
    errest::save_matrix_market(synth_out, A);
    if (!synth_rhs_out.empty()) {
      const auto p = errest::generate_rhs(A, errest::ProblemKind::least_squares, synth_seed);
      errest::save_vector_market(synth_rhs_out, p.rhs);
    }
  });
}
