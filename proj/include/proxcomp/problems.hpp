#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "proxcomp/expr.hpp"

namespace proxcomp::problems {

struct BenchmarkSpec {
  std::string name;
  // Zero means "use the problem's default".
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t k = 0;
  double density = 0.0;
  std::uint64_t seed = 0;
  // Regularization weight; negative means the problem's default rule.
  double lambda = -1.0;
};

struct Generated {
  BenchmarkSpec spec;  // with defaults filled in
  Problem problem;
  std::map<std::string, Expr> variables;
  // Problem data by name (for external reference solvers) and the scalar
  // hyperparameters actually used.
  std::map<std::string, Matrix> data;
  std::map<std::string, double> hyper;
};

// The registered benchmark names, sorted.
std::vector<std::string> names();
bool known(const std::string& name);

// Throws UserError for an unknown name or a bad size.
Generated generate(BenchmarkSpec spec);

// Deterministic normal and uniform draws (mt19937_64 with Box-Muller), so
// generated data does not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double normal();
  Matrix normal(std::int64_t rows, std::int64_t cols);
  // Entries kept with probability `density`, values standard normal.
  Matrix sparse_normal(std::int64_t rows, std::int64_t cols, double density);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Seed from PROXCOMP_SEED if set, else `fallback`.
std::uint64_t seed_from_env(std::uint64_t fallback);

}  // namespace proxcomp::problems
