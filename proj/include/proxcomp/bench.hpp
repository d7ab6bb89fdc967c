#pragma once

#include <string>
#include <vector>

#include "proxcomp/admm.hpp"
#include "proxcomp/problems.hpp"

namespace proxcomp::bench {

struct RunRow {
  std::string name;
  std::string status;  // optimal-to-tolerance, max-iters or error
  double objective = 0.0;
  double violation = 0.0;
  int iterations = 0;
  std::int64_t prox_calls = 0;
  std::size_t terms = 0;
  std::size_t constraints = 0;
  double compile_seconds = 0.0;
  double solve_seconds = 0.0;
  std::string message;  // error text when status is "error"
};

struct RunReport {
  std::vector<RunRow> rows;

  // Columns: problem,status,time_s,objective,violation,iterations,prox_calls,terms,constraints
  std::string csv() const;
  std::string json() const;
  // Aligned text table (Problem, Time, Objective, ...).
  std::string table() const;
};

// Generate, compile, separate and solve one problem. Failures are reported
// in the row, never thrown. The objective is evaluated on the generated
// problem, not on the solver's internal form.
RunRow run_one(const problems::BenchmarkSpec& spec, const admm::SolverParams& params);

// Rows come back ordered by problem name.
RunReport run_benchmarks(std::vector<problems::BenchmarkSpec> specs, const admm::SolverParams& params);

}  // namespace proxcomp::bench
