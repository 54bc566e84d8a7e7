#include "rh/polynomial.hpp"

#include <cmath>

#include "rh/error.hpp"

namespace rh {
namespace {

void check_horizon(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw RangeError("polynomial horizon must be positive");
}

template <std::size_t N>
double jerk_integral(const Polynomial<N>& p, double T) {
  // Three-point Gauss-Legendre on [0, T].
  static constexpr double kNodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr double kWeights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double t = 0.5 * T * (kNodes[i] + 1.0);
    const double j = p.d3(t);
    acc += kWeights[i] * j * j;
  }
  return 0.5 * T * acc;
}

}  // namespace

Quintic quintic_between(double x0, double v0, double a0, double x1, double v1, double a1,
                        double T) {
  check_horizon(T);
  const double T2 = T * T;
  const double T3 = T2 * T;
  const double T4 = T3 * T;
  const double T5 = T4 * T;
  // Residuals of the end conditions after the start terms are fixed.
  const double r0 = x1 - (x0 + v0 * T + 0.5 * a0 * T2);
  const double r1 = v1 - (v0 + a0 * T);
  const double r2 = a1 - a0;
  Quintic p;
  p.c = {x0,
         v0,
         0.5 * a0,
         (10.0 * r0 - 4.0 * r1 * T + 0.5 * r2 * T2) / T3,
         (-15.0 * r0 + 7.0 * r1 * T - r2 * T2) / T4,
         (6.0 * r0 - 3.0 * r1 * T + 0.5 * r2 * T2) / T5};
  return p;
}

Quartic quartic_between(double x0, double v0, double a0, double v1, double a1, double T) {
  check_horizon(T);
  const double T2 = T * T;
  const double T3 = T2 * T;
  const double r1 = v1 - (v0 + a0 * T);
  const double r2 = a1 - a0;
  Quartic p;
  p.c = {x0, v0, 0.5 * a0, (3.0 * r1 - r2 * T) / (3.0 * T2), (-2.0 * r1 + r2 * T) / (4.0 * T3)};
  return p;
}

double squared_jerk_integral(const Quintic& p, double T) { return jerk_integral(p, T); }
double squared_jerk_integral(const Quartic& p, double T) { return jerk_integral(p, T); }

}  // namespace rh
