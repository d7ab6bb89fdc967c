#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "prox_internal.hpp"
#include "proxcomp/error.hpp"
#include "proxcomp/prox.hpp"

namespace proxcomp::prox {

Vector project_l1_ball(const Vector& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  // Randomized pivoting on |v| to find the threshold theta with
  // sum_i max(|v_i| - theta, 0) = radius.
  std::vector<double> work(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) work[i] = std::abs(v(i));
  std::mt19937_64 rng(0x5eed);
  std::size_t begin = 0, end = work.size();
  double sum = 0.0;
  std::size_t count = 0;
  while (begin < end) {
    std::uniform_int_distribution<std::size_t> pick(begin, end - 1);
    const double pivot = work[pick(rng)];
    // Partition [begin, end) into [>= pivot | < pivot].
    auto mid = std::partition(work.begin() + begin, work.begin() + end,
                              [pivot](double x) { return x >= pivot; });
    const std::size_t split = static_cast<std::size_t>(mid - work.begin());
    double upper_sum = 0.0;
    for (std::size_t i = begin; i < split; ++i) upper_sum += work[i];
    const std::size_t upper_count = split - begin;
    if ((sum + upper_sum) - static_cast<double>(count + upper_count) * pivot < radius) {
      sum += upper_sum;
      count += upper_count;
      begin = split;
    } else {
      // Drop one copy of the pivot itself from the upper part.
      auto it = std::find(work.begin() + begin, work.begin() + split, pivot);
      std::iter_swap(it, work.begin() + split - 1);
      end = split - 1;
    }
  }
  const double theta = (sum - radius) / static_cast<double>(count);
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = soft_threshold(v(i), theta);
  return out;
}

Vector prox_linf(const Vector& v, double lambda) {
  // Clip |v| at the level tau where the clipped mass sum_i (|v_i| - tau)_+
  // equals lambda. Sorted scan, independent of project_l1_ball.
  if (v.lpNorm<1>() <= lambda) return Vector::Zero(v.size());
  std::vector<double> a(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) a[i] = std::abs(v(i));
  std::sort(a.begin(), a.end(), std::greater<>());
  double prefix = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    prefix += a[k];
    tau = (prefix - lambda) / static_cast<double>(k + 1);
    if (k + 1 == a.size() || a[k + 1] <= tau) break;
  }
  Vector x(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) x(i) = std::copysign(std::min(std::abs(v(i)), tau), v(i));
  return x;
}

Vector prox_l2_group(const Vector& v, double lambda) {
  const double norm = v.norm();
  if (norm <= lambda) return Vector::Zero(v.size());
  return (1.0 - lambda / norm) * v;
}

Vector prox_fused_lasso(const Vector& y, double lambda) {
  // Forward pass tracks the derivative of the message function as a
  // piecewise-linear function with knots x and slope/intercept increments
  // (a, b); t holds the clamping bounds used by the backward pass.
  // Knot fields are interleaved for locality.
  struct Knot {
    double x, a, b;
  };
  struct Bound {
    double lo, hi;
  };
  const Eigen::Index n = y.size();
  if (n <= 1) return y;
  std::unique_ptr<Knot[]> knots(new Knot[2 * n]);
  std::unique_ptr<Bound[]> bounds(new Bound[n - 1]);
  Knot* kn = knots.get();
  Bound* t = bounds.get();
  t[0] = {-lambda + y(0), lambda + y(0)};
  Eigen::Index l = n - 1, r = n;
  kn[l] = {t[0].lo, 1, -y(0) + lambda};
  kn[r] = {t[0].hi, -1, y(0) + lambda};
  double afirst = 1, bfirst = -lambda - y(1), alast = -1, blast = -lambda + y(1);

  for (Eigen::Index k = 1; k < n - 1; ++k) {
    double alo = afirst, blo = bfirst;
    Eigen::Index lo = l;
    for (; lo <= r; ++lo) {
      if (alo * kn[lo].x + blo > -lambda) break;
      alo += kn[lo].a;
      blo += kn[lo].b;
    }
    t[k].lo = (-lambda - blo) / alo;
    l = lo - 1;
    kn[l].x = t[k].lo;

    double ahi = alast, bhi = blast;
    Eigen::Index hi = r;
    for (; hi >= l; --hi) {
      if (-ahi * kn[hi].x - bhi < lambda) break;
      ahi += kn[hi].a;
      bhi += kn[hi].b;
    }
    t[k].hi = (lambda + bhi) / (-ahi);
    r = hi + 1;

    kn[l].a = alo;
    kn[l].b = blo + lambda;
    kn[r] = {t[k].hi, ahi, bhi + lambda};
    afirst = 1;
    bfirst = -lambda - y(k + 1);
    alast = -1;
    blast = -lambda + y(k + 1);
  }

  double alo = afirst, blo = bfirst;
  for (Eigen::Index lo = l; lo <= r; ++lo) {
    if (alo * kn[lo].x + blo > 0) break;
    alo += kn[lo].a;
    blo += kn[lo].b;
  }
  Vector beta(n);
  beta(n - 1) = -blo / alo;
  for (Eigen::Index k = n - 2; k >= 0; --k) {
    if (beta(k + 1) > t[k].hi) beta(k) = t[k].hi;
    else if (beta(k + 1) < t[k].lo) beta(k) = t[k].lo;
    else beta(k) = beta(k + 1);
  }
  return beta;
}

std::pair<Vector, double> project_soc(const Vector& x, double t, double kappa) {
  const double norm = x.norm();
  if (norm <= kappa * t) return {x, t};
  if (kappa * norm <= -t) return {Vector::Zero(x.size()), 0.0};
  const double alpha = kappa * (kappa * norm + t) / (kappa * kappa + 1.0);
  return {(alpha / norm) * x, alpha / kappa};
}

Vector project_cone(const ConeSpec& cone, const Vector& v) {
  switch (cone.cone) {
    case Cone::Nonneg: return project_nonneg(v);
    case Cone::Soc: {
      if (v.size() < 1) throw DimensionError("soc projection of an empty vector");
      auto [x, t] = project_soc(v.head(v.size() - 1), v(v.size() - 1));
      Vector out(v.size());
      out << x, t;
      return out;
    }
    case Cone::Psd: {
      const auto n = cone.psd_n;
      if (n * n != v.size()) throw DimensionError("psd projection: vector is not n*n");
      Matrix p = project_psd(Eigen::Map<const Matrix>(v.data(), n, n));
      return Eigen::Map<const Vector>(p.data(), p.size());
    }
    case Cone::Zero: {
      const Matrix a = cone.a.materialize();
      const Vector rhs = a * v - cone.b;
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a * a.transpose());
      Vector x = v - a.transpose() * cod.solve(rhs);
      if ((a * x - cone.b).norm() > 1e-8 * (1.0 + cone.b.norm()))
        throw SingularError("zero-cone projection: affine subspace {x : A x = b} is empty");
      return x;
    }
  }
  throw InternalError("project_cone: unknown cone");
}

}  // namespace proxcomp::prox
