#include <doctest.h>

#include "proxcomp/error.hpp"
#include "proxcomp/linop.hpp"
#include "proxcomp/problems.hpp"

using namespace proxcomp;

namespace {
double err(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("scalar and diagonal combine without densifying") {
  const LinearOp s = LinearOp::scalar(2.0, 3);
  const LinearOp d = LinearOp::diagonal(Vector::LinSpaced(3, 1, 3));
  CHECK(add(s, s).kind() == LinearOp::Kind::Scalar);
  CHECK(add(s, s).scalar_value() == 4.0);
  CHECK(add(s, d).kind() == LinearOp::Kind::Diagonal);
  CHECK(compose(d, d).kind() == LinearOp::Kind::Diagonal);
  CHECK(compose(d, d).diagonal_vector()(2) == 9.0);
  CHECK(s.storage() == 1);
}

TEST_CASE("dense promotion and apply") {
  problems::Rng rng(1);
  const Matrix a = rng.normal(4, 3), b = rng.normal(4, 3);
  const LinearOp sum = add(LinearOp::dense(a), LinearOp::dense(b));
  const Vector x = rng.normal(3, 1);
  CHECK(err(sum.apply(x), (a + b) * x) < 1e-12);
  CHECK(err(LinearOp::dense(a).transpose().apply(Vector::Ones(4)), a.transpose() * Vector::Ones(4)) < 1e-12);
}

TEST_CASE("kron apply matches the column-major identity") {
  problems::Rng rng(2);
  const Matrix a = rng.normal(2, 3), b = rng.normal(4, 5);
  const LinearOp k = LinearOp::kron(LinearOp::dense(a), LinearOp::dense(b));
  const Matrix x = rng.normal(5, 3);
  const Vector got = k.apply(Eigen::Map<const Vector>(x.data(), x.size()));
  const Matrix want = b * x * a.transpose();
  CHECK(err(got, Eigen::Map<const Vector>(want.data(), want.size())) < 1e-12);
  CHECK(k.storage() == a.size() + b.size());
}

TEST_CASE("kron rules keep the product structured") {
  problems::Rng rng(3);
  const LinearOp a = LinearOp::dense(rng.normal(2, 2));
  const LinearOp b = LinearOp::dense(rng.normal(3, 3)), c = LinearOp::dense(rng.normal(3, 3));
  CHECK(add(LinearOp::kron(a, b), LinearOp::kron(a, c)).kind() == LinearOp::Kind::Kron);
  CHECK(compose(LinearOp::kron(a, b), LinearOp::kron(a, c)).kind() == LinearOp::Kind::Kron);
}

TEST_CASE("inverse of a sparse operator") {
  SparseMatrix m(3, 3);
  m.insert(0, 0) = 2.0;
  m.insert(1, 1) = 4.0;
  m.insert(2, 2) = 1.0;
  m.insert(0, 2) = 1.0;
  const LinearOp op = LinearOp::sparse(m);
  const Vector y(Vector::Ones(3));
  CHECK(err(op.apply(op.inverse().apply(y)), y) < 1e-12);
}

TEST_CASE("dimension mismatch raises") {
  CHECK_THROWS_AS(add(LinearOp::scalar(1.0, 3), LinearOp::scalar(1.0, 4)), DimensionError);
  CHECK_THROWS_AS(LinearOp::scalar(1.0, 3).apply(Vector::Ones(2)), DimensionError);
}

TEST_CASE("singular inverse raises") {
  CHECK_THROWS_AS(LinearOp::dense(Matrix::Zero(2, 2)).inverse().apply(Vector::Ones(2)), SingularError);
}

TEST_CASE("hstack applies blockwise") {
  const LinearOp h = hstack({LinearOp::scalar(2.0, 2), LinearOp::dense(Matrix::Ones(2, 1))});
  Vector x(3);
  x << 1, 2, 3;
  Vector want(2);
  want << 5, 7;
  CHECK(err(h.apply(x), want) == 0.0);
}
