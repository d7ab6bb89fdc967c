#pragma once

#include <cmath>
#include <functional>

namespace proxcomp::prox::detail {

constexpr int kNewtonMaxIter = 100;
constexpr double kNewtonTol = 1e-12;

// Root of an increasing function g on the bracket [lo, hi] with
// g(lo) <= 0 <= g(hi). Newton steps that leave the bracket are replaced by
// bisection, so iterates never leave [lo, hi].
double guarded_newton(const std::function<double(double)>& g,
                      const std::function<double(double)>& dg, double lo, double hi, double x0,
                      double scale);

// Expand upward from `start` in doubling steps until g >= 0.
double bracket_above(const std::function<double(double)>& g, double start);
// Expand downward from `start` in doubling steps until g <= 0.
double bracket_below(const std::function<double(double)>& g, double start);
// Halve toward zero from `start` (> 0) until g <= 0.
double bracket_toward_zero(const std::function<double(double)>& g, double start);

// W(e^u): the Lambert W function of an exponential, stable for large u.
double lambert_w_exp(double u);

}  // namespace proxcomp::prox::detail
