#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "proxcomp/admm.hpp"
#include "proxcomp/bench.hpp"
#include "proxcomp/compiler.hpp"
#include "proxcomp/dcp.hpp"
#include "proxcomp/error.hpp"
#include "proxcomp/problems.hpp"
#include "proxcomp/separate.hpp"
#include "proxcomp/serialize.hpp"

using namespace proxcomp;

namespace {

struct SolveFlags {
  double lambda = 1.0;
  int max_iters = 10000;
  double abs_tol = 1e-4;
  double rel_tol = 1e-3;
  bool adaptive = false;
  std::string trace_csv;
};

void add_solver_flags(CLI::App* app, SolveFlags& f, const std::string& lambda_flag) {
  app->add_option(lambda_flag, f.lambda, "ADMM penalty parameter")->capture_default_str();
  app->add_option("--max-iters", f.max_iters, "Iteration limit")->capture_default_str();
  app->add_option("--abs-tol", f.abs_tol, "Absolute residual tolerance")->capture_default_str();
  app->add_option("--rel-tol", f.rel_tol, "Relative residual tolerance")->capture_default_str();
  app->add_flag("--adaptive-lambda", f.adaptive, "Rescale the penalty to balance residuals");
}

admm::SolverParams to_params(const SolveFlags& f, std::uint64_t seed) {
  admm::SolverParams p;
  p.lambda = f.lambda;
  p.max_iters = f.max_iters;
  p.abs_tol = f.abs_tol;
  p.rel_tol = f.rel_tol;
  p.adaptive_lambda = f.adaptive;
  p.trace_csv = f.trace_csv;
  p.seed = seed;
  return p;
}

Problem load_problem(const std::string& path) {
  const Serialized s = read_files(path);
  return parse_problem(s.text, s.data);
}

int cmd_check(const std::string& path, bool json) {
  const Problem p = load_problem(path);
  const auto v = dcp::verify(p);
  if (json) {
    nlohmann::json j = {{"dcp", v.accepted}, {"reason", v.reason}, {"path", v.path}};
    std::cout << j.dump(2) << "\n";
  } else if (v.accepted) {
    std::cout << "DCP: yes\n";
  } else {
    std::cout << "DCP: no\n  " << v.reason << "\n  at " << v.path << "\n";
  }
  return v.accepted ? 0 : 1;
}

int cmd_compile(const std::string& path, const std::string& emit, bool no_prox, const std::string& out,
                bool trace) {
  const Problem p = load_problem(path);
  compiler::Options opt;
  opt.prox_rules = !no_prox;
  const auto c = compiler::compile(p, opt);
  Serialized s;
  if (emit == "prox-affine") s = serialize(c.prox_affine);
  else s = serialize(separate(c.prox_affine));
  if (trace)
    for (const auto& d : c.rule_trace) std::cerr << d.rule << "\t" << d.subtree << "\n";
  if (out.empty()) std::cout << s.text;
  else write_files(out, s);
  return 0;
}

int cmd_solve(const std::string& path, const SolveFlags& flags, bool json) {
  const Problem p = load_problem(path);
  const auto c = compiler::compile(p);
  const SeparableProblem sep = separate(c.prox_affine);
  const auto res = admm::solve(sep, to_params(flags, problems::seed_from_env(0)));
  const double obj = evaluate_scalar(p.objective, res.solution);
  const double viol = constraint_violation(p, res.solution);

  std::vector<Expr> vars = variables_of(p.objective);
  for (const auto& con : p.constraints)
    for (const auto& a : con.args) collect_variables(a, vars);
  if (json) {
    nlohmann::json sol = nlohmann::json::object();
    for (const auto& v : vars) {
      const Matrix& m = res.solution.at(v->var_id);
      sol[v->name] = {{"rows", m.rows()}, {"cols", m.cols()},
                      {"values", std::vector<double>(m.data(), m.data() + m.size())}};
    }
    nlohmann::json j = {{"status", admm::status_name(res.status)},
                        {"objective", obj},
                        {"violation", viol},
                        {"iterations", res.iterations},
                        {"seconds", res.diagnostics.seconds},
                        {"solution", sol}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("status:     %s\n", admm::status_name(res.status).c_str());
    std::printf("objective:  %.10g\n", obj);
    std::printf("violation:  %.3e\n", viol);
    std::printf("iterations: %d\n", res.iterations);
    std::printf("time:       %.3f s\n", res.diagnostics.seconds);
  }
  return 0;
}

struct BenchFlags {
  std::vector<std::string> problems;
  problems::BenchmarkSpec size;
  bool seed_given = false;
  std::string write_problem;
  std::string dump_data;
  bool json = false;
  bool csv = false;
};

int cmd_bench(BenchFlags& b, const SolveFlags& flags) {
  for (const auto& n : b.problems)
    if (!problems::known(n)) throw UserError("unknown benchmark problem: " + n);
  if (b.problems.empty()) b.problems = problems::names();
  const std::uint64_t seed = b.seed_given ? b.size.seed : problems::seed_from_env(0);

  std::vector<problems::BenchmarkSpec> specs;
  for (const auto& n : b.problems) {
    auto s = b.size;
    s.name = n;
    s.seed = seed;
    specs.push_back(s);
  }
  if (!b.write_problem.empty()) {
    if (specs.size() != 1) throw UserError("--write-problem needs exactly one --problem");
    write_files(b.write_problem, serialize(problems::generate(specs[0]).problem));
    return 0;
  }
  if (!b.dump_data.empty()) {
    nlohmann::json all = nlohmann::json::object();
    for (const auto& s : specs) {
      const auto g = problems::generate(s);
      nlohmann::json data = nlohmann::json::object();
      for (const auto& [name, m] : g.data)
        data[name] = {{"rows", m.rows()}, {"cols", m.cols()},
                      {"values", std::vector<double>(m.data(), m.data() + m.size())}};
      all[s.name] = {{"m", g.spec.m}, {"n", g.spec.n}, {"k", g.spec.k}, {"density", g.spec.density},
                     {"seed", g.spec.seed}, {"hyper", g.hyper}, {"data", data}};
    }
    std::ofstream f(b.dump_data);
    if (!f) throw UserError("cannot write " + b.dump_data);
    f << std::setprecision(17) << all.dump() << "\n";
    return 0;
  }
  const auto report = bench::run_benchmarks(specs, to_params(flags, seed));
  if (b.json) std::cout << report.json();
  else if (b.csv) std::cout << report.csv();
  else std::cout << report.table();
  for (const auto& r : report.rows)
    if (r.status == "error") return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex problem compiler and ADMM solver"};
  app.require_subcommand(1);

  std::string path;
  bool json = false;

  auto* check = app.add_subcommand("check", "Verify a problem file against the DCP rules");
  check->add_option("file", path, "Problem file")->required();
  check->add_flag("--json", json, "Machine-readable output");

  std::string emit = "prox-affine", out;
  bool no_prox = false, trace = false;
  auto* compile = app.add_subcommand("compile", "Compile a problem file to prox-affine form");
  compile->add_option("file", path, "Problem file")->required();
  compile->add_option("--emit", emit, "Output form")
      ->check(CLI::IsMember({"prox-affine", "separable"}))
      ->capture_default_str();
  compile->add_flag("--no-prox-rules", no_prox, "Use conic reductions even where a prox kernel exists");
  compile->add_option("-o,--output", out, "Write <path> and <path>.data instead of printing");
  compile->add_flag("--trace", trace, "Print the rule chosen for each subtree to stderr");

  SolveFlags flags;
  auto* solve = app.add_subcommand("solve", "Compile and solve a problem file");
  solve->add_option("file", path, "Problem file")->required();
  add_solver_flags(solve, flags, "--lambda");
  solve->add_option("--trace-csv", flags.trace_csv, "Write per-iteration residuals to a CSV file");
  solve->add_flag("--json", json, "Machine-readable output");

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "Run the benchmark problem suite");
  bench->add_option("--problem", bf.problems, "Problem name (repeatable; default all)");
  bench->add_option("--m", bf.size.m, "Rows / samples");
  bench->add_option("--n", bf.size.n, "Columns / features");
  bench->add_option("--k", bf.size.k, "Third size parameter (targets, rank)");
  bench->add_option("--density", bf.size.density, "Density of sparse data");
  bench->add_option("--seed", bf.size.seed, "Data seed (default PROXCOMP_SEED or 0)");
  bench->add_option("--reg", bf.size.lambda, "Regularization weight (default per problem)");
  add_solver_flags(bench, flags, "--lambda");
  bench->add_option("--write-problem", bf.write_problem, "Write the generated problem file and exit");
  bench->add_option("--dump-data", bf.dump_data, "Write generated data (column-major JSON) and exit");
  bench->add_flag("--json", bf.json, "JSON report");
  bench->add_flag("--csv", bf.csv, "CSV report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  bf.seed_given = bench->count("--seed") > 0;

  try {
    if (*check) return cmd_check(path, json);
    if (*compile) return cmd_compile(path, emit, no_prox, out, trace);
    if (*solve) return cmd_solve(path, flags, json);
    if (*bench) return cmd_bench(bf, flags);
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
