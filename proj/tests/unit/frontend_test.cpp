#include <doctest.h>

#include "proxcomp/compiler.hpp"
#include "proxcomp/dcp.hpp"
#include "proxcomp/error.hpp"
#include "proxcomp/expr.hpp"
#include "proxcomp/problems.hpp"
#include "proxcomp/serialize.hpp"

using namespace proxcomp;

TEST_CASE("dcp accepts convex objectives") {
  const Expr x = variable("x", 5);
  Problem p{build_atom("norm1", {x}) + build_atom("sum_squares", {x}), {}};
  CHECK(dcp::verify(p).accepted);
}

TEST_CASE("dcp rejects a concave objective with a path") {
  const Expr x = variable("x", 5);
  Problem p{-1.0 * build_atom("norm2", {x}), {}};
  const auto v = dcp::verify(p);
  CHECK_FALSE(v.accepted);
  CHECK_FALSE(v.path.empty());
}

TEST_CASE("unknown atom is a user error") {
  CHECK_THROWS_AS(build_atom("frobnicate", {variable("x", 2)}), UserError);
}

TEST_CASE("shape mismatch is a dimension error") {
  CHECK_THROWS_AS(variable("a", 3) + variable("b", 4), DimensionError);
}

TEST_CASE("affine form collects coefficients") {
  const Expr x = variable("x", 3);
  const auto f = affine_form(compiler::linearize(2.0 * x - constant(Matrix::Ones(3, 1))));
  REQUIRE(f.terms.size() == 1);
  CHECK(f.terms[0].op.materialize()(0, 0) == 2.0);
}

TEST_CASE("problem files round-trip") {
  for (const std::string name : {"lasso", "covsel", "qp"}) {
    problems::BenchmarkSpec spec;
    spec.name = name;
    const auto g = problems::generate(spec);
    const Serialized s = serialize(g.problem);
    const Problem back = parse_problem(s.text, s.data);
    CHECK(serialize(back).text == s.text);
  }
}

TEST_CASE("generated data is deterministic per seed") {
  problems::Rng a(7), b(7);
  CHECK(a.normal(3, 3) == b.normal(3, 3));
}
