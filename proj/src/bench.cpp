#include "proxcomp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "proxcomp/compiler.hpp"
#include "proxcomp/separate.hpp"

namespace proxcomp::bench {
namespace {

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

RunRow run_one(const problems::BenchmarkSpec& spec, const admm::SolverParams& params) {
  RunRow row;
  row.name = spec.name;
  try {
    const auto gen = problems::generate(spec);
    auto t0 = std::chrono::steady_clock::now();
    const auto compiled = compiler::compile(gen.problem);
    const SeparableProblem sep = separate(compiled.prox_affine);
    row.compile_seconds = since(t0);
    row.terms = sep.terms.size();
    row.constraints = sep.constraints.size();
    t0 = std::chrono::steady_clock::now();
    const auto res = admm::solve(sep, params);
    row.solve_seconds = since(t0);
    row.status = admm::status_name(res.status);
    row.iterations = res.iterations;
    for (auto c : res.diagnostics.prox_calls) row.prox_calls += c;
    row.objective = evaluate_scalar(gen.problem.objective, res.solution);
    row.violation = constraint_violation(gen.problem, res.solution);
  } catch (const std::exception& e) {
    row.status = "error";
    row.message = e.what();
  }
  return row;
}

RunReport run_benchmarks(std::vector<problems::BenchmarkSpec> specs, const admm::SolverParams& params) {
  std::sort(specs.begin(), specs.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  RunReport r;
  for (const auto& s : specs) r.rows.push_back(run_one(s, params));
  return r;
}

std::string RunReport::csv() const {
  std::ostringstream os;
  os << "problem,status,time_s,objective,violation,iterations,prox_calls,terms,constraints\n";
  for (const auto& r : rows)
    os << r.name << ',' << r.status << ',' << num(r.compile_seconds + r.solve_seconds) << ',' << num(r.objective)
       << ',' << num(r.violation) << ',' << r.iterations << ',' << r.prox_calls << ',' << r.terms << ','
       << r.constraints << '\n';
  return os.str();
}

std::string RunReport::json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"problem", r.name},
                        {"status", r.status},
                        {"objective", r.objective},
                        {"violation", r.violation},
                        {"iterations", r.iterations},
                        {"prox_calls", r.prox_calls},
                        {"terms", r.terms},
                        {"constraints", r.constraints},
                        {"compile_s", r.compile_seconds},
                        {"solve_s", r.solve_seconds}};
    if (!r.message.empty()) j["message"] = r.message;
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

std::string RunReport::table() const {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %10s %14s %10s %7s  %s\n", "Problem", "Time (s)", "Objective", "Violation",
                "Iters", "Status");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-18s %10.3f %14.6g %10.2e %7d  %s\n", r.name.c_str(),
                  r.compile_seconds + r.solve_seconds, r.objective, r.violation, r.iterations, r.status.c_str());
    os << buf;
    if (!r.message.empty()) os << "  " << r.message << "\n";
  }
  return os.str();
}

}  // namespace proxcomp::bench
