#include <doctest.h>

#include <set>

#include "proxcomp/compiler.hpp"
#include "proxcomp/problems.hpp"
#include "proxcomp/separate.hpp"

using namespace proxcomp;

namespace {
std::multiset<std::string> atoms(const std::vector<Expr>& terms) {
  std::multiset<std::string> out;
  for (const auto& t : terms) out.insert(t->atom);
  return out;
}
}  // namespace

TEST_CASE("lasso compiles to two prox terms") {
  problems::Rng rng(1);
  const Expr x = variable("x", 10);
  Problem p{build_atom("sum_squares", {mul(constant(rng.normal(5, 10)), x) - constant(rng.normal(5, 1))}) +
                build_atom("norm1", {x}),
            {}};
  const auto c = compiler::compile(p);
  CHECK(atoms(c.prox_affine.terms) == std::multiset<std::string>{"norm1", "sum_squares"});
  const auto sep = separate(c.prox_affine);
  CHECK(sep.terms.size() == 2);
  CHECK(sep.constraints.size() == 1);
  CHECK_NOTHROW(check_separable(sep));
}

TEST_CASE("disabling prox rules falls back to cones") {
  const Expr x = variable("x", 4);
  Problem p{build_atom("norm2", {x}), {}};
  compiler::Options opt;
  opt.prox_rules = false;
  const auto c = compiler::compile(p, opt);
  CHECK(atoms(c.prox_affine.terms).count("soc") == 1);
  CHECK(atoms(c.prox_affine.terms).count("norm2") == 0);
}

TEST_CASE("exp of a sum goes through an epigraph") {
  problems::Rng rng(2);
  const Expr x = variable("x", 3);
  const Expr ct = constant(Matrix(rng.normal(1, 3)));
  Problem p{build_atom("exp", {build_atom("norm2", {x}) + mul(ct, x)}) + build_atom("norm1", {x}), {}};
  const auto c = compiler::compile(p);
  CHECK(atoms(c.prox_affine.terms) == std::multiset<std::string>{"exp", "nonneg", "norm1", "soc", "zero"});
  const auto sep = separate(c.prox_affine);
  CHECK_NOTHROW(check_separable(sep));
}

TEST_CASE("every benchmark separates") {
  for (const auto& name : problems::names()) {
    CAPTURE(name);
    problems::BenchmarkSpec spec;
    spec.name = name;
    const auto g = problems::generate(spec);
    CHECK_NOTHROW(check_separable(separate(compiler::compile(g.problem).prox_affine)));
  }
}
