#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "prox_internal.hpp"
#include "proxcomp/error.hpp"
#include "proxcomp/prox.hpp"

namespace proxcomp::prox {
namespace detail {

double guarded_newton(const std::function<double(double)>& g,
                      const std::function<double(double)>& dg, double lo, double hi, double x0,
                      double scale) {
  const double tol = kNewtonTol * std::max(1.0, scale);
  double x = std::clamp(x0, lo, hi);
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const double gx = g(x);
    if (std::abs(gx) <= tol) return x;
    if (gx < 0) lo = x; else hi = x;
    const double d = dg(x);
    double next = (d > 0 && std::isfinite(d)) ? x - gx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      return next;
    x = next;
  }
  // Bisection finishes off anything Newton could not.
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double bracket_above(const std::function<double(double)>& g, double start) {
  double step = 1.0;
  double x = start;
  while (g(x) < 0) {
    x = start + step;
    step *= 2;
  }
  return x;
}

double bracket_below(const std::function<double(double)>& g, double start) {
  double step = 1.0;
  double x = start;
  while (g(x) > 0) {
    x = start - step;
    step *= 2;
  }
  return x;
}

double bracket_toward_zero(const std::function<double(double)>& g, double start) {
  double x = start;
  while (g(x) > 0 && x > std::numeric_limits<double>::min()) x *= 0.5;
  return x;
}

double lambert_w_exp(double u) {
  // Solve w + log(w) = u for w > 0.
  double w = u > 1.0 ? u - std::log(u) : std::exp(u);
  if (w <= 0) w = std::numeric_limits<double>::min();
  for (int it = 0; it < 100; ++it) {
    const double f = w + std::log(w) - u;
    const double step = f / (1.0 + 1.0 / w);
    double next = w - step;
    if (next <= 0) next = 0.5 * w;
    if (std::abs(next - w) <= 1e-15 * std::max(1.0, w)) return next;
    w = next;
  }
  return w;
}

}  // namespace detail

using detail::guarded_newton;

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

Vector soft_threshold(const Vector& v, double t) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = soft_threshold(v(i), t);
  return out;
}

double prox_hinge(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v >= 0.0) return 0.0;
  return v;
}

double prox_deadzone(double v, double lambda, double eps) {
  const double a = std::abs(v);
  const double s = v >= 0 ? 1.0 : -1.0;
  if (a <= eps) return v;
  if (a <= eps + lambda) return s * eps;
  return v - s * lambda;
}

double prox_quantile(double v, double lambda, double alpha) {
  if (v > lambda * alpha) return v - lambda * alpha;
  if (v < lambda * (alpha - 1.0)) return v - lambda * (alpha - 1.0);
  return 0.0;
}

double prox_square(double v, double lambda) { return v / (1.0 + 2.0 * lambda); }

double prox_neg_log(double v, double lambda) {
  // Positive root of x^2 - v x - lambda = 0, written to avoid cancellation.
  const double r = std::sqrt(v * v + 4.0 * lambda);
  return v >= 0 ? 0.5 * (v + r) : 2.0 * lambda / (r - v);
}

namespace {

// Real roots of c3 s^3 + c2 s^2 + c1 s + c0, polished by Newton.
std::vector<double> cubic_roots(double c3, double c2, double c1, double c0) {
  std::vector<double> roots;
  const double b = c2 / c3, c = c1 / c3, d = c0 / c3;
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc > 0) {
    const double sq = std::sqrt(disc);
    roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) - b / 3.0);
  } else if (p == 0.0) {
    roots.push_back(-b / 3.0);
  } else {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(theta - 2.0 * M_PI * k / 3.0) - b / 3.0);
  }
  for (double& s : roots) {
    for (int it = 0; it < 8; ++it) {
      const double f = ((c3 * s + c2) * s + c1) * s + c0;
      const double df = (3.0 * c3 * s + 2.0 * c2) * s + c1;
      if (df == 0.0) break;
      const double next = s - f / df;
      if (!std::isfinite(next)) break;
      s = next;
    }
  }
  return roots;
}

}  // namespace

std::pair<double, double> prox_quad_over_lin(double a, double b, double lambda, double wx,
                                             double wy) {
  auto objective = [&](double x, double y) {
    double f;
    if (y > 0) f = x * x / y;
    else f = (x == 0.0 && y == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    return lambda * f + 0.5 * wx * (x - a) * (x - a) + 0.5 * wy * (y - b) * (y - b);
  };
  // Boundary candidate: x = 0 with y >= 0.
  std::pair<double, double> best{0.0, std::max(b, 0.0)};
  double best_val = objective(best.first, best.second);
  // Interior: with s = 2 lambda + wx y,
  //   wy s^3 - wy (2 lambda + wx b) s^2 - lambda wx^3 a^2 = 0.
  for (double s : cubic_roots(wy, -wy * (2.0 * lambda + wx * b), 0.0, -lambda * wx * wx * wx * a * a)) {
    if (!(s > 2.0 * lambda)) continue;
    const double y = (s - 2.0 * lambda) / wx;
    const double x = wx * a * y / s;
    const double val = objective(x, y);
    if (val < best_val) {
      best_val = val;
      best = {x, y};
    }
  }
  return best;
}

double prox_logistic(double v, double lambda) {
  auto sigmoid = [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); };
  auto g = [&](double x) { return lambda * sigmoid(x) + x - v; };
  auto dg = [&](double x) {
    const double s = sigmoid(x);
    return lambda * s * (1.0 - s) + 1.0;
  };
  // lambda*sigmoid lies in (0, lambda), so the root is in [v - lambda, v].
  return guarded_newton(g, dg, v - lambda, v, v - 0.5 * lambda, std::abs(v) + lambda);
}

double prox_exp(double v, double lambda) {
  auto g = [&](double x) { return lambda * std::exp(x) + x - v; };
  auto dg = [&](double x) { return lambda * std::exp(x) + 1.0; };
  // Closed form v - W(lambda e^v) is available; only the bracket uses it.
  const double lo = detail::bracket_below(g, v - 1.0);
  return guarded_newton(g, dg, lo, v, v - detail::lambert_w_exp(std::log(lambda) + v),
                        std::abs(v) + 1.0);
}

double prox_neg_entropy(double v, double lambda) {
  auto g = [&](double x) { return lambda * (std::log(x) + 1.0) + x - v; };
  auto dg = [&](double x) { return lambda / x + 1.0; };
  const double hi = detail::bracket_above(g, std::max(v, 1.0));
  const double lo = detail::bracket_toward_zero(g, std::min(hi, 1.0));
  return guarded_newton(g, dg, lo, hi, 0.5 * (lo + hi), std::abs(v) + lambda);
}

double prox_inv_pos(double v, double lambda) {
  auto g = [&](double x) { return x - v - lambda / (x * x); };
  auto dg = [&](double x) { return 1.0 + 2.0 * lambda / (x * x * x); };
  const double hi = detail::bracket_above(g, std::max(v, 0.0) + std::cbrt(lambda));
  const double lo = detail::bracket_toward_zero(g, hi);
  return guarded_newton(g, dg, lo, hi, hi, std::abs(v) + lambda);
}

std::pair<double, double> prox_kl_div(double a, double b, double lambda, double wx, double wy) {
  // Stationarity eliminates x = wy y (y - b) / lambda, leaving an increasing
  // scalar condition in y on (max(b, 0), inf).
  const double y_min = std::max(b, 0.0);
  auto g = [&](double y) {
    return lambda * (std::log(wy * (y - b) / lambda) + 1.0) + wx * (wy * y * (y - b) / lambda - a);
  };
  auto dg = [&](double y) {
    return lambda / (y - b) + wx * wy * (2.0 * y - b) / lambda;
  };
  if (b < 0 && g(0.0) >= 0) return {0.0, 0.0};
  const double hi = detail::bracket_above(g, y_min + 1.0);
  double lo = y_min;
  double step = hi - y_min;
  while (step > 0 && g(y_min + step) > 0) step *= 0.5;
  lo = y_min + step;
  const double y = guarded_newton(g, dg, lo, hi, 0.5 * (lo + hi), std::abs(a) + std::abs(b) + lambda);
  return {wy * y * (y - b) / lambda, y};
}

Vector prox_log_sum_exp(const Vector& v, double lambda) {
  // With s = log sum exp(x), each coordinate solves x_i + lambda e^{x_i - s} = v_i,
  // i.e. x_i = v_i - W(lambda e^{v_i - s}); s is fixed by sum_i e^{x_i - s} = 1,
  // a decreasing scalar condition phi(s) = sum_i W(lambda e^{v_i - s}) / lambda - 1.
  const Eigen::Index n = v.size();
  const double log_lambda = std::log(lambda);
  auto weights = [&](double s, Vector& w) {
    for (Eigen::Index i = 0; i < n; ++i) w(i) = detail::lambert_w_exp(log_lambda + v(i) - s);
  };
  Vector w(n);
  auto phi = [&](double s) {
    weights(s, w);
    return -(w.sum() / lambda - 1.0);  // increasing in s
  };
  auto dphi = [&](double s) {
    weights(s, w);
    // dW/du = W / (1 + W), u = log(lambda) + v_i - s.
    double d = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) d += w(i) / (1.0 + w(i));
    return d / lambda;
  };
  const double vmax = v.maxCoeff();
  const double lo = detail::bracket_below(phi, vmax - lambda);
  const double hi = detail::bracket_above(phi, std::max(lo, vmax + std::log(static_cast<double>(n))));
  const double s = guarded_newton(phi, dphi, lo, hi, 0.5 * (lo + hi), 1.0);
  weights(s, w);
  return v - w;
}

Vector prox_scalar_newton(NewtonAtom atom, const Vector& v, double lambda) {
  if (atom == NewtonAtom::LogSumExp) return prox_log_sum_exp(v, lambda);
  if (atom == NewtonAtom::KlDiv) {
    if (v.size() % 2 != 0) throw DimensionError("kl_div prox expects stacked (x; y)");
    const Eigen::Index n = v.size() / 2;
    Vector out(v.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      auto [x, y] = prox_kl_div(v(i), v(n + i), lambda);
      out(i) = x;
      out(n + i) = y;
    }
    return out;
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    switch (atom) {
      case NewtonAtom::Logistic: out(i) = prox_logistic(v(i), lambda); break;
      case NewtonAtom::Exp: out(i) = prox_exp(v(i), lambda); break;
      case NewtonAtom::NegEntropy: out(i) = prox_neg_entropy(v(i), lambda); break;
      case NewtonAtom::InvPos: out(i) = prox_inv_pos(v(i), lambda); break;
      default: break;
    }
  }
  return out;
}

Vector prox_exact_equation(ExactAtom atom, const Vector& v, double lambda) {
  if (atom == ExactAtom::QuadOverLin) {
    if (v.size() % 2 != 0) throw DimensionError("quad_over_lin prox expects stacked (x; y)");
    const Eigen::Index n = v.size() / 2;
    Vector out(v.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      auto [x, y] = prox_quad_over_lin(v(i), v(n + i), lambda);
      out(i) = x;
      out(n + i) = y;
    }
    return out;
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out(i) = atom == ExactAtom::Square ? prox_square(v(i), lambda) : prox_neg_log(v(i), lambda);
  return out;
}

Vector project_nonneg(const Vector& v) { return v.cwiseMax(0.0); }

}  // namespace proxcomp::prox
