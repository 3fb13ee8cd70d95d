#pragma once

// Run harness behind the command-line tool: builds a problem instance,
// dispatches to a solver, optionally runs the oracle and renders the
// per-iteration CSV and the JSON summary.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errest/cg.hpp"
#include "errest/cgls.hpp"
#include "errest/cgne.hpp"
#include "errest/craig.hpp"
#include "errest/lsqr.hpp"
#include "errest/matrix_market.hpp"
#include "errest/oracle.hpp"
#include "errest/precond.hpp"
#include "errest/preconditioned.hpp"
#include "errest/problem.hpp"
#include "errest/synthetic.hpp"

namespace errest {

/// Bad flag combinations; the CLI maps it to exit code 1.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class SolverKind { cg, cgls, lsqr, cgne, craig };

inline std::string_view to_string(SolverKind s) {
  switch (s) {
  case SolverKind::cg: return "cg";
  case SolverKind::cgls: return "cgls";
  case SolverKind::lsqr: return "lsqr";
  case SolverKind::cgne: return "cgne";
  case SolverKind::craig: return "craig";
  }
  return "unknown";
}

inline SolverKind parse_solver(std::string_view s) {
  for (auto k : {SolverKind::cg, SolverKind::cgls, SolverKind::lsqr, SolverKind::cgne, SolverKind::craig}) {
    if (s == to_string(k)) return k;
  }
  throw UsageError("unknown solver '" + std::string(s) + "'");
}

/// "none" selects the unpreconditioned solver.
inline PrecondKind parse_precond(std::string_view s) {
  if (s == "none") return PrecondKind::identity;
  if (s == "jacobi") return PrecondKind::jacobi;
  if (s == "ic0") return PrecondKind::ic0;
  throw UsageError("unknown preconditioner '" + std::string(s) + "'");
}

inline std::string_view precond_label(PrecondKind k) {
  return k == PrecondKind::identity ? "none" : to_string(k);
}

/// Least-squares solvers get a least-squares right-hand side, the others a consistent one.
inline ProblemKind problem_kind(SolverKind s) {
  return s == SolverKind::cgls || s == SolverKind::lsqr ? ProblemKind::least_squares
                                                        : ProblemKind::least_norm;
}

inline GramSide gram_side(SolverKind s) {
  return problem_kind(s) == ProblemKind::least_squares ? GramSide::gram_cols : GramSide::gram_rows;
}

struct RhsSpec {
  bool bundled = false; ///< read <matrix stem>_b.mtx next to the matrix
  std::uint64_t seed = 0;
};

/// "bundled" or "generated:SEED".
inline RhsSpec parse_rhs(std::string_view s) {
  if (s == "bundled") return {true, 0};
  constexpr std::string_view prefix = "generated:";
  if (s.substr(0, prefix.size()) == prefix) {
    const std::string digits(s.substr(prefix.size()));
    if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
      return {false, std::stoull(digits)};
    }
  }
  throw UsageError("bad --rhs '" + std::string(s) + "' (expected bundled or generated:SEED)");
}

inline std::string to_string(const RhsSpec& r) {
  return r.bundled ? "bundled" : "generated:" + std::to_string(r.seed);
}

struct RunConfig {
  SolverKind solver = SolverKind::cgls;
  PrecondKind precond = PrecondKind::identity;
  std::string matrix_path;
  std::string synthetic;
  RhsSpec rhs;
  double tau = 0.25;
  double tol_est = 1e-4;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t max_iter = 1000;
  bool oracle = false;
  /// Keep iterates even without the oracle (used by compare).
  bool store_iterates = false;

  SolverConfig solver_config() const {
    SolverConfig c;
    c.max_iter = max_iter;
    c.tau = tau;
    c.tol_est = tol_est;
    c.stop_alpha = alpha;
    c.stop_beta = beta;
    c.record_local_orthogonality = true;
    c.store_iterates = oracle || store_iterates;
    return c;
  }

  void validate() const {
    if (matrix_path.empty() == synthetic.empty()) {
      throw UsageError("give exactly one of --matrix and --synthetic");
    }
    if (rhs.bundled && matrix_path.empty()) throw UsageError("--rhs bundled needs --matrix");
    if (solver == SolverKind::cg && precond != PrecondKind::identity) {
      throw UsageError("cg has no preconditioned variant");
    }
    try {
      solver_config().validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
};

inline std::filesystem::path bundled_rhs_path(const std::filesystem::path& matrix) {
  auto p = matrix;
  p.replace_filename(matrix.stem().string() + "_b.mtx");
  return p;
}

inline ProblemInstance load_instance(const RunConfig& cfg) {
  cfg.validate();
  SparseMatrix A = cfg.matrix_path.empty() ? make_synthetic(cfg.synthetic)
                                           : load_matrix_market(cfg.matrix_path);
  const ProblemKind kind = problem_kind(cfg.solver);
  if (cfg.solver == SolverKind::cg && A.rows() != A.cols()) {
    throw UsageError("cg needs a square matrix");
  }
  if (!cfg.rhs.bundled) return generate_rhs(A, kind, cfg.rhs.seed);
  ProblemInstance p;
  p.rhs = load_vector_market(bundled_rhs_path(cfg.matrix_path));
  if (p.rhs.size() != A.rows()) {
    throw DimensionError("bundled right-hand side has length " + std::to_string(p.rhs.size()) +
                         ", matrix has " + std::to_string(A.rows()) + " rows");
  }
  p.matrix = std::move(A);
  p.kind = kind;
  return p;
}

inline SolverTrace solve_instance(const ProblemInstance& p, const RunConfig& cfg) {
  const SolverConfig sc = cfg.solver_config();
  const SparseMatrix& A = p.matrix;
  if (cfg.precond == PrecondKind::identity) {
    switch (cfg.solver) {
    case SolverKind::cg: return cg_solve(A, p.rhs, sc);
    case SolverKind::cgls: return cgls_solve(A, p.rhs, sc);
    case SolverKind::lsqr: return lsqr_solve(A, p.rhs, sc);
    case SolverKind::cgne: return cgne_solve(A, p.rhs, sc);
    case SolverKind::craig: return craig_solve(A, p.rhs, sc, /*want_y=*/true);
    }
  }
  const SplitPreconditioner M = build_preconditioner(A, cfg.precond, gram_side(cfg.solver));
  switch (cfg.solver) {
  case SolverKind::cgls: return pcgls_solve(A, p.rhs, M, sc);
  case SolverKind::lsqr: return plsqr_solve(A, p.rhs, M, sc);
  case SolverKind::cgne: return pcgne_solve(A, p.rhs, M, sc);
  case SolverKind::craig: return pcraig_solve(A, p.rhs, M, sc);
  case SolverKind::cg: break;
  }
  throw UsageError("cg has no preconditioned variant");
}

struct ReportRow {
  std::size_t k = 0;
  double res_norm = kNotRecorded;
  double delta = kNotRecorded;
  std::optional<EstimateEvent> event; ///< the estimate accepted for ell = k
  std::optional<double> true_err_sq;
  std::optional<IdealDelay> ideal_delay;
  double local_orth = kNotRecorded;
};

struct RunSummary {
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::max_iterations;
  std::optional<EstimateEvent> final_estimate;
  std::size_t accepted_estimates = 0;
  std::size_t clamped_deltas = 0;
  std::optional<std::size_t> plateau_index;
  std::optional<EstimateAudit> audit;
  std::optional<double> r_true_norm;
};

struct RunReport {
  ProblemInstance instance;
  SolverTrace trace;
  std::optional<OracleReport> oracle;
  std::vector<ReportRow> rows;
  RunSummary summary;
};

inline RunReport build_report(const RunConfig& cfg, ProblemInstance instance, SolverTrace trace) {
  RunReport rep;
  if (cfg.oracle) {
    const ErrorNorm norm = instance.kind == ProblemKind::least_squares ? ErrorNorm::energy_AtA
                                                                       : ErrorNorm::euclidean;
    rep.oracle = make_oracle_report(instance.matrix, instance.rhs, trace, norm, cfg.tau);
  }
  std::vector<std::optional<EstimateEvent>> by_ell(trace.records.size());
  for (const auto& ev : trace.events) {
    if (ev.ell < by_ell.size()) by_ell[ev.ell] = ev;
  }
  rep.rows.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    ReportRow row;
    row.k = rec.k;
    row.res_norm = rec.res_norm;
    row.delta = rec.delta;
    row.event = by_ell[rec.k];
    row.local_orth = rec.local_orth;
    if (rep.oracle) {
      row.true_err_sq = rep.oracle->true_errors[rec.k];
      row.ideal_delay = rep.oracle->ideal_delays[rec.k];
    }
    rep.rows.push_back(row);
  }

  auto& s = rep.summary;
  s.iterations = trace.iterations();
  s.status = trace.status;
  if (!trace.events.empty()) s.final_estimate = trace.events.back();
  s.accepted_estimates = trace.events.size();
  s.clamped_deltas = trace.clamped_deltas;
  if (rep.oracle) {
    s.plateau_index = rep.oracle->plateau_index;
    s.audit = audit_estimates(trace.events, rep.oracle->true_errors, rep.oracle->plateau_index, cfg.tau);
    s.r_true_norm = rep.oracle->r_true_norm;
  }
  rep.instance = std::move(instance);
  rep.trace = std::move(trace);
  return rep;
}

inline RunReport run(const RunConfig& cfg) {
  ProblemInstance p = load_instance(cfg);
  SolverTrace t = solve_instance(p, cfg);
  return build_report(cfg, std::move(p), std::move(t));
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_opt(double v) { return std::isnan(v) ? std::string() : fmt17(v); }

} // namespace detail

inline constexpr std::string_view kCsvHeader =
    "k,res_norm,delta,accepted_ell,estimate,true_err_sq,ideal_delay,chosen_delay,local_orth";

/// One row per iteration; estimate columns refer to ell = k, empty where unknown.
inline void write_csv(std::ostream& out, const RunReport& rep) {
  out << kCsvHeader << '\n';
  for (const auto& r : rep.rows) {
    out << r.k << ',' << detail::fmt_opt(r.res_norm) << ',' << detail::fmt_opt(r.delta) << ',';
    if (r.event) out << r.event->ell;
    out << ',';
    if (r.event) out << detail::fmt17(r.event->estimate);
    out << ',';
    if (r.true_err_sq) out << detail::fmt17(*r.true_err_sq);
    out << ',';
    if (r.ideal_delay) out << r.ideal_delay->delay;
    out << ',';
    if (r.event) out << r.event->delay();
    out << ',' << detail::fmt_opt(r.local_orth) << '\n';
  }
}

inline nlohmann::ordered_json event_json(const EstimateEvent& e) {
  return {{"ell", e.ell}, {"k", e.k}, {"estimate", e.estimate}, {"delay", e.delay()}};
}

inline nlohmann::ordered_json summary_json(const RunConfig& cfg, const RunReport& rep) {
  using nlohmann::ordered_json;
  const auto& s = rep.summary;
  ordered_json j;
  j["solver"] = to_string(cfg.solver);
  j["preconditioner"] = precond_label(cfg.precond);
  j["source"] = cfg.matrix_path.empty() ? "synthetic:" + cfg.synthetic : cfg.matrix_path;
  j["rhs"] = to_string(cfg.rhs);
  j["problem_kind"] = to_string(rep.instance.kind);
  j["rows"] = rep.instance.matrix.rows();
  j["cols"] = rep.instance.matrix.cols();
  j["nnz"] = rep.instance.matrix.nnz();
  j["tau"] = cfg.tau;
  j["tol_est"] = cfg.tol_est;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["max_iter"] = cfg.max_iter;
  j["iterations"] = s.iterations;
  j["status"] = to_string(s.status);
  j["accepted_estimates"] = s.accepted_estimates;
  j["final_estimate"] = s.final_estimate ? event_json(*s.final_estimate) : ordered_json(nullptr);
  j["clamped_deltas"] = s.clamped_deltas;
  if (rep.oracle) {
    const auto& a = *s.audit;
    std::size_t infinite = 0;
    for (const auto& d : rep.oracle->ideal_delays) infinite += d.finite ? 0 : 1;
    j["r_true_norm"] = *s.r_true_norm;
    j["plateau_index"] = *s.plateau_index;
    j["checked_estimates"] = a.checked;
    j["lower_bound_violations"] = a.lower_bound.size();
    j["accuracy_violations"] = a.accuracy.size();
    ordered_json lb = ordered_json::array(), acc = ordered_json::array();
    for (const auto& v : a.lower_bound) lb.push_back(v.event.ell);
    for (const auto& v : a.accuracy) acc.push_back(v.event.ell);
    j["lower_bound_violation_ells"] = lb;
    j["accuracy_violation_ells"] = acc;
    j["ideal_delay_unreached"] = infinite;
  } else {
    j["plateau_index"] = nullptr;
  }
  ordered_json ev = ordered_json::array();
  for (const auto& e : rep.trace.events) ev.push_back(event_json(e));
  j["events"] = ev;
  return j;
}

struct CompareReport {
  std::size_t iterations_a = 0;
  std::size_t iterations_b = 0;
  std::size_t common_iterates = 0;
  double max_iterate_distance = 0.0;
  double reference_norm = 0.0;       ///< ||x|| of the final iterate of run A
  double max_relative_distance = 0.0;
  std::size_t common_estimates = 0;
  double max_estimate_ratio = 1.0;   ///< max over common ell of max(a/b, b/a)
};

/// Runs both configurations (concurrently) on the same instance and measures their divergence.
inline CompareReport compare(RunConfig a, RunConfig b) {
  a.store_iterates = b.store_iterates = true;
  a.oracle = b.oracle = false;
  const ProblemInstance pa = load_instance(a);
  const ProblemInstance pb = load_instance(b);
  if (pa.kind != pb.kind || !(pa.matrix == pb.matrix) || pa.rhs != pb.rhs) {
    throw UsageError("compare: the two configurations do not describe the same instance");
  }
  auto fa = std::async(std::launch::async, [&] { return solve_instance(pa, a); });
  const SolverTrace tb = solve_instance(pb, b);
  const SolverTrace ta = fa.get();

  CompareReport c;
  c.iterations_a = ta.iterations();
  c.iterations_b = tb.iterations();
  c.common_iterates = std::min(ta.iterates.size(), tb.iterates.size());
  for (std::size_t k = 0; k < c.common_iterates; ++k) {
    c.max_iterate_distance = std::max(c.max_iterate_distance, norm2(subtract(ta.iterates[k], tb.iterates[k])));
  }
  c.reference_norm = norm2(ta.x);
  c.max_relative_distance = c.reference_norm > 0.0 ? c.max_iterate_distance / c.reference_norm
                                                   : c.max_iterate_distance;
  std::vector<const EstimateEvent*> eb(tb.records.size() + 1, nullptr);
  for (const auto& e : tb.events) {
    if (e.ell < eb.size()) eb[e.ell] = &e;
  }
  for (const auto& e : ta.events) {
    if (e.ell >= eb.size() || eb[e.ell] == nullptr) continue;
    ++c.common_estimates;
    const double x = e.estimate, y = eb[e.ell]->estimate;
    double ratio = 1.0;
    if (x != y) ratio = (x == 0.0 || y == 0.0) ? std::numeric_limits<double>::infinity()
                                                : std::max(x / y, y / x);
    c.max_estimate_ratio = std::max(c.max_estimate_ratio, ratio);
  }
  return c;
}

inline nlohmann::ordered_json compare_json(const CompareReport& c) {
  nlohmann::ordered_json j;
  j["iterations_a"] = c.iterations_a;
  j["iterations_b"] = c.iterations_b;
  j["common_iterates"] = c.common_iterates;
  j["max_iterate_distance"] = c.max_iterate_distance;
  j["reference_norm"] = c.reference_norm;
  j["max_relative_distance"] = c.max_relative_distance;
  j["common_estimates"] = c.common_estimates;
  if (std::isinf(c.max_estimate_ratio)) {
    j["max_estimate_ratio"] = "inf";
  } else {
    j["max_estimate_ratio"] = c.max_estimate_ratio;
  }
  return j;
}

} // namespace errest
