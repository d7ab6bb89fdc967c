#include <doctest.h>

#include <cmath>

#include "proxcomp/prox.hpp"
#include "proxcomp/prox_registry.hpp"

using namespace proxcomp;
using namespace proxcomp::prox;

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
}

TEST_CASE("simple scalar proxes") {
  CHECK(prox_square(2.0, 0.5) == doctest::Approx(1.0));
  CHECK(prox_hinge(0.3, 1.0) == doctest::Approx(0.0));
  CHECK(prox_hinge(2.0, 1.0) == doctest::Approx(1.0));
  CHECK(prox_hinge(-2.0, 1.0) == doctest::Approx(-2.0));
  // x - v - lambda/x = 0
  const double x = prox_neg_log(1.0, 2.0);
  CHECK(x * x - x - 2.0 == doctest::Approx(0.0).epsilon(1e-12));
  // exp: x - v + lambda e^x = 0
  const double e = prox_exp(1.0, 1.0);
  CHECK(e - 1.0 + std::exp(e) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("projections") {
  Vector v(3);
  v << -1, 2, -3;
  CHECK(project_nonneg(v).minCoeff() == 0.0);
  const auto [x, t] = project_soc(Vector::Ones(2) * 3.0, 0.0);
  CHECK(x.norm() == doctest::Approx(t));
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = -1.0;
  const Matrix p = project_psd(m);
  CHECK(p(1, 1) == doctest::Approx(0.0));
  CHECK(project_l1_ball(v, 1.0).cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("fused lasso on a step") {
  Vector y(4);
  y << 0, 0, 1, 1;
  const Vector x = prox_fused_lasso(y, 0.1);
  CHECK(x(0) == doctest::Approx(0.05));
  CHECK(x(3) == doctest::Approx(0.95));
  CHECK(prox_fused_lasso(y, 10.0).cwiseAbs().maxCoeff() - 0.5 == doctest::Approx(0.0));
}

TEST_CASE("registry lookup") {
  CHECK(find_prox("norm1") != nullptr);
  CHECK(find_prox("no_such_function") == nullptr);
  CHECK_THROWS(lookup_prox("no_such_function"));
  CHECK(prox_names().size() >= 20);
}
