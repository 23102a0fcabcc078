// qmarg: command-line front end for the marginal compatibility toolkit.
//
// Exit codes: 0 compatible / pass, 1 incompatible / fail, 2 invalid input,
// 3 solver failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qmarg/compat.hpp"
#include "qmarg/identical.hpp"
#include "qmarg/io.hpp"
#include "qmarg/marginals.hpp"
#include "qmarg/oracle.hpp"
#include "qmarg/witness.hpp"

namespace {

using qmarg::io::Json;

enum Exit { kCompatible = 0, kIncompatible = 1, kInvalid = 2, kSolver = 3 };

struct Common {
  std::string report = "text";
  double tol = qmarg::kDecisionTol;
  double consistency_tol = qmarg::kConsistencyTol;
  int max_iter = 200;
  std::optional<double> p;
};

void add_common(CLI::App* cmd, Common& c, bool solver) {
  cmd->add_option("--report", c.report, "report format")->check(CLI::IsMember({"json", "text"}));
  cmd->add_option("--p", c.p, "parameter of a generator file")->check(CLI::Range(0.0, 1.0));
  if (!solver) return;
  cmd->add_option("--tol", c.tol, "decision tolerance on t*");
  cmd->add_option("--consistency-tol", c.consistency_tol, "overlap consistency tolerance");
  cmd->add_option("--max-iter", c.max_iter, "interior-point iteration limit")->check(CLI::PositiveNumber);
}

qmarg::CompatSettings compat_settings(const Common& c) {
  qmarg::CompatSettings s;
  s.decision_tol = c.tol;
  s.consistency_tol = c.consistency_tol;
  s.solver.max_iter = c.max_iter;
  return s;
}

void emit(const Json& report, const Common& c) {
  if (c.report == "json")
    std::cout << report.dump(2) << '\n';
  else
    std::cout << qmarg::io::render_text(report);
}

Json residuals_json(const qmarg::sdp::Residuals& r) {
  return Json{{"primal_value", r.primal_value},       {"dual_value", r.dual_value},
              {"gap", r.gap},                         {"dual_infeasibility", r.dual_infeasibility},
              {"primal_min_eig", r.primal_min_eig},   {"dual_min_eig", r.dual_min_eig},
              {"complementarity", r.complementarity}};
}

// Serializes the witness and recomputes its pairing from the serialized form.
void attach_witness(Json& report, const qmarg::Witness& w, const qmarg::MarginalSet& ms, double offset = 0.0) {
  const Json wj = qmarg::io::witness_to_json(w);
  const auto back = qmarg::io::witness_from_json(wj);
  report["witness"] = wj;
  report["witness_min_eig"] = qmarg::min_eigenvalue(qmarg::p_of(back));
  const double value = qmarg::pairing(back, ms);
  report["pairing"] = value;
  if (offset != 0.0) {
    report["witness_offset"] = offset;
    report["certificate_value"] = value - offset;
  }
}

int cmd_check(const std::string& file, const Common& c) {
  const auto pf = qmarg::io::load_problem(file);
  const auto ms = qmarg::io::problem_marginals(pf, c.p);
  const auto v = qmarg::check_compatibility(ms, compat_settings(c));

  Json r = qmarg::io::report_header("check");
  r["input"] = qmarg::io::problem_to_json(ms);
  r["mode"] = ms.full() ? "full" : "partial";
  r["verdict"] = qmarg::to_string(v.kind);
  r["t_star"] = v.t_star;
  r["boundary"] = v.boundary;
  r["gap"] = v.gap;
  r["iterations"] = v.iterations;
  r["residuals"] = residuals_json(v.residuals);
  if (v.state) {
    r["state"] = qmarg::io::matrix_to_json(v.state->matrix());
    r["state_min_eig"] = qmarg::min_eigenvalue(v.state->op());
  }
  if (v.witness) {
    attach_witness(r, *v.witness, ms);
    if (!v.released_residuals.empty()) r["released_residuals"] = v.released_residuals;
  }
  emit(r, c);
  return v.kind == qmarg::VerdictKind::compatible ? kCompatible : kIncompatible;
}

int cmd_delta(const std::string& file, const Common& c) {
  const auto pf = qmarg::io::load_problem(file);
  const auto ms = qmarg::io::problem_marginals(pf, c.p);
  const auto d = qmarg::delta(ms);

  Json r = qmarg::io::report_header("delta");
  r["input"] = qmarg::io::problem_to_json(ms);
  r["min_eig"] = d.min_eig;
  r["max_eig"] = d.max_eig;
  r["lower_bound"] = d.lower_applicable ? (d.lower_satisfied ? "pass" : "fail") : "not-applicable";
  r["upper_bound"] = d.upper_applicable ? (d.upper_satisfied ? "pass" : "fail") : "not-applicable";
  r["verdict"] = d.passes() ? "pass" : "fail";
  if (d.passes())
    r["warning"] = "the Delta condition is necessary only; passing it does not imply compatibility";
  emit(r, c);
  return d.passes() ? kCompatible : kIncompatible;
}

std::optional<qmarg::MarginalSet> optional_marginals(const std::string& file, const Common& c) {
  if (file.empty()) return std::nullopt;
  return qmarg::io::problem_marginals(qmarg::io::load_problem(file), c.p);
}

int cmd_witness_extract(const std::string& file, const std::string& out, const Common& c) {
  const auto pf = qmarg::io::load_problem(file);
  if (!pf.op) throw qmarg::InvalidInput("file has no operator to decompose");
  const auto form = qmarg::certify_p_form(*pf.op);
  if (!form.is_p_form) {
    throw qmarg::InvalidInput("operator is not of p-form (max |Tr(Z B_m)| = " + std::to_string(form.max_violation) +
                              ")");
  }
  const auto w = qmarg::extract_witness(*pf.op);
  Json r = qmarg::io::report_header("witness-extract");
  r["p_form_residual"] = form.max_violation;
  r["operator_min_eig"] = qmarg::min_eigenvalue(*pf.op);
  r["reconstruction_error"] = qmarg::max_norm(qmarg::p_of(w).matrix() - pf.op->matrix());
  if (out.empty()) {
    r["witness"] = qmarg::io::witness_to_json(w);
  } else {
    qmarg::io::save_json(qmarg::io::witness_to_json(w), out);
    r["output"] = out;
  }
  emit(r, c);
  return kCompatible;
}

int cmd_witness_verify(const std::string& file, const std::string& marginals, const Common& c) {
  const auto w = qmarg::io::load_witness(file);
  const auto pw = qmarg::p_of(w);
  Json r = qmarg::io::report_header("witness-verify");
  r["min_eig"] = qmarg::min_eigenvalue(pw);
  r["p_form_residual"] = qmarg::certify_p_form(pw).max_violation;
  r["is_witness"] = qmarg::is_witness(w);
  int code = kCompatible;
  if (const auto ms = optional_marginals(marginals, c)) {
    const double value = qmarg::pairing(w, *ms);
    r["pairing"] = value;
    const bool certifies = r["is_witness"].get<bool>() && value < 0.0;
    r["verdict"] = certifies ? "incompatible" : "not-detected";
    if (certifies) code = kIncompatible;
  }
  emit(r, c);
  if (!r["is_witness"].get<bool>()) return kInvalid;
  return code;
}

int cmd_witness_refine(const std::string& file, const std::string& with, const std::string& out,
                       const Common& c) {
  const auto w = qmarg::io::load_witness(file);
  const auto p = with.empty() ? qmarg::unit_parts_witness(w.shape()) : qmarg::io::load_witness(with);
  const auto before = qmarg::tangency(w);
  const auto refined = qmarg::refine(w, p);
  const auto after = qmarg::tangency(refined);
  Json r = qmarg::io::report_header("witness-refine");
  r["lambda_min_before"] = before.lambda_min;
  r["lambda_min_after"] = after.lambda_min;
  r["tangential"] = after.tangential;
  if (out.empty()) {
    r["witness"] = qmarg::io::witness_to_json(refined);
  } else {
    qmarg::io::save_json(qmarg::io::witness_to_json(refined), out);
    r["output"] = out;
  }
  emit(r, c);
  return kCompatible;
}

struct IdenticalArgs {
  std::optional<int> particles;
  std::string statistics;
  bool verify_exact = false;
};

// Loads an identical-particle file, replacing dims by n copies of d when the
// particle count is given on the command line.
std::pair<qmarg::io::ProblemFile, qmarg::ParticleSystem> load_identical(const std::string& file,
                                                                       const IdenticalArgs& a) {
  auto j = qmarg::io::load_json(file);
  if (!j.is_object() || !j.contains("dims") || !j["dims"].is_array() || j["dims"].empty() ||
      !j["dims"][0].is_number_integer())
    throw qmarg::InvalidInput("identical-particle file needs dims");
  const int d = j["dims"][0].get<int>();
  for (const auto& v : j["dims"])
    if (v != d) throw qmarg::InvalidInput("identical particles need equal local dimensions");
  std::optional<int> n = a.particles;
  if (!n && j.contains("particles") && j["particles"].is_number_integer()) n = j["particles"].get<int>();
  if (!n) n = static_cast<int>(j["dims"].size());
  if (*n < 2) throw qmarg::InvalidInput("identical-particle problems need at least two particles");
  j["dims"] = std::vector<int>(*n, d);
  auto pf = qmarg::io::parse_problem(j);
  std::optional<qmarg::Statistics> stat = pf.statistics;
  if (!a.statistics.empty()) stat = qmarg::parse_statistics(a.statistics);
  if (!stat) throw qmarg::InvalidInput("statistics not given (use --statistics bose|fermi)");
  return {std::move(pf), qmarg::ParticleSystem(d, *n, *stat)};
}

int cmd_identical_check(const std::string& file, const IdenticalArgs& a, const Common& c) {
  const auto [pf, ps] = load_identical(file, a);
  if (!pf.marginals) throw qmarg::InvalidInput("problem file has no marginals");
  qmarg::IdenticalSettings settings;
  settings.compat = compat_settings(c);
  const auto iv = qmarg::check_identical(*pf.marginals, ps, settings);
  const auto& v = iv.verdict;

  Json r = qmarg::io::report_header("identical-check");
  r["input"] = qmarg::io::problem_to_json(*pf.marginals);
  r["statistics"] = qmarg::to_string(ps.statistics());
  r["particles"] = ps.n();
  r["d"] = ps.d();
  r["verdict"] = qmarg::to_string(v.kind);
  r["t_star"] = v.t_star;
  r["gap"] = v.gap;
  r["iterations"] = v.iterations;
  r["symmetrized_basis"] = iv.symmetrized;
  for (const auto& e : pf.marginals->entries())
    if (e.systems.size() == 1 && ps.statistics() == qmarg::Statistics::fermi)
      r["coleman_bound_satisfied"] = qmarg::coleman_check(e.state, ps.n());
  if (v.witness && iv.expanded) attach_witness(r, *v.witness, *iv.expanded, iv.witness_offset);
  emit(r, c);
  return v.kind == qmarg::VerdictKind::compatible ? kCompatible : kIncompatible;
}

int cmd_identical_gse(const std::string& file, const IdenticalArgs& a, const Common& c) {
  const auto [pf, ps] = load_identical(file, a);
  if (!pf.hamiltonian) throw qmarg::InvalidInput("problem file has no hamiltonian");
  const qmarg::TwoBodyHamiltonian h(*pf.hamiltonian);
  qmarg::GroundStateSettings settings;
  settings.solver.max_iter = c.max_iter;
  const auto res = qmarg::ground_state(h, ps, settings);

  Json r = qmarg::io::report_header("identical-gse");
  r["statistics"] = qmarg::to_string(ps.statistics());
  r["particles"] = ps.n();
  r["d"] = ps.d();
  r["hamiltonian"] = qmarg::io::matrix_to_json(h.op().matrix());
  r["energy"] = res.energy;
  r["variables"] = res.variables;
  r["iterations"] = res.solution.iterations;
  r["gap"] = res.solution.gap;
  r["rho2"] = qmarg::io::matrix_to_json(res.rho2.matrix());
  if (a.verify_exact) {
    const double exact = qmarg::oracle::exact_ground_energy(h, ps);
    r["exact_energy"] = exact;
    r["difference"] = res.energy - exact;
  }
  emit(r, c);
  return kCompatible;
}

int cmd_sample(const std::vector<int>& dims, std::uint64_t seed, const std::string& out, const Common& c) {
  const qmarg::SystemShape shape(dims);
  const auto rho = qmarg::oracle::random_density(shape, seed);
  Json problem = qmarg::io::problem_to_json(qmarg::oracle::marginals_of(rho));
  if (out.empty()) {
    std::cout << problem.dump(2) << '\n';
    return kCompatible;
  }
  qmarg::io::save_json(problem, out);
  Json r = qmarg::io::report_header("sample");
  r["seed"] = seed;
  r["output"] = out;
  emit(r, c);
  return kCompatible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum marginal compatibility: SDP verdicts and witness certificates"};
  app.require_subcommand(1);
  Common common;
  std::string file;
  std::string out;
  std::string marginals;
  std::string with;
  IdenticalArgs ident;

  auto* check = app.add_subcommand("check", "decide compatibility of a marginal set");
  check->add_option("file", file, "problem file")->required();
  add_common(check, common, true);

  auto* delta = app.add_subcommand("delta", "evaluate the Delta necessary condition");
  delta->add_option("file", file, "problem file")->required();
  add_common(delta, common, false);

  auto* witness = app.add_subcommand("witness", "witness certificates");
  witness->require_subcommand(1);
  auto* extract = witness->add_subcommand("extract", "decompose a p-form operator into a witness");
  extract->add_option("file", file, "file with an operator")->required();
  extract->add_option("-o,--output", out, "witness output file");
  add_common(extract, common, false);
  auto* verify = witness->add_subcommand("verify", "check a witness and optionally pair it with marginals");
  verify->add_option("file", file, "witness file")->required();
  verify->add_option("--marginals", marginals, "problem file to pair with");
  add_common(verify, common, false);
  auto* refine = witness->add_subcommand("refine", "refine a non-tangential witness");
  refine->add_option("file", file, "witness file")->required();
  refine->add_option("--with", with, "witness file with positive parts (default: identity parts)");
  refine->add_option("-o,--output", out, "witness output file");
  add_common(refine, common, false);

  auto* identical = app.add_subcommand("identical", "bosonic and fermionic variants");
  identical->require_subcommand(1);
  auto* icheck = identical->add_subcommand("check", "compatibility with a (anti)symmetric global state");
  auto* gse = identical->add_subcommand("gse", "ground-state energy of a two-body Hamiltonian");
  for (auto* cmd : {icheck, gse}) {
    cmd->add_option("file", file, "problem file")->required();
    cmd->add_option("--particles", ident.particles, "particle count")->check(CLI::PositiveNumber);
    cmd->add_option("--statistics", ident.statistics, "bose or fermi")->check(CLI::IsMember({"bose", "fermi"}));
    add_common(cmd, common, true);
  }
  gse->add_flag("--verify-exact", ident.verify_exact, "also compute the energy by exact diagonalization");

  auto* sample = app.add_subcommand("sample", "write the marginals of a random global state");
  std::vector<int> dims;
  std::uint64_t seed = 1;
  sample->add_option("--dims", dims, "local dimensions")->required()->delimiter(',');
  sample->add_option("--seed", seed, "random seed");
  sample->add_option("-o,--output", out, "problem output file");
  add_common(sample, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalid;
  }

  try {
    if (check->parsed()) return cmd_check(file, common);
    if (delta->parsed()) return cmd_delta(file, common);
    if (extract->parsed()) return cmd_witness_extract(file, out, common);
    if (verify->parsed()) return cmd_witness_verify(file, marginals, common);
    if (refine->parsed()) return cmd_witness_refine(file, with, out, common);
    if (icheck->parsed()) return cmd_identical_check(file, ident, common);
    if (gse->parsed()) return cmd_identical_gse(file, ident, common);
    if (sample->parsed()) return cmd_sample(dims, seed, out, common);
  } catch (const qmarg::InvalidInput& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kInvalid;
  } catch (const qmarg::SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  }
  return kInvalid;
}
