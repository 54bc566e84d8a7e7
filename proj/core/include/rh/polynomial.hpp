#pragma once

#include <array>

namespace rh {

// x(t) = sum c[i] t^i on [0, T].
template <std::size_t N>
struct Polynomial {
  std::array<double, N> c{};

  double value(double t) const { return eval(0, t); }
  double d1(double t) const { return eval(1, t); }
  double d2(double t) const { return eval(2, t); }
  double d3(double t) const { return eval(3, t); }

  // k-th derivative at t, Horner form.
  double eval(int k, double t) const {
    double acc = 0.0;
    for (int i = static_cast<int>(N) - 1; i >= k; --i) {
      double coef = c[static_cast<std::size_t>(i)];
      for (int j = 0; j < k; ++j) coef *= static_cast<double>(i - j);
      acc = acc * t + coef;
    }
    return acc;
  }
};

using Quintic = Polynomial<6>;
using Quartic = Polynomial<5>;

// Matches (x, x', x'') at 0 and at T.
Quintic quintic_between(double x0, double v0, double a0, double x1, double v1, double a1,
                        double T);
// Matches (x, x', x'') at 0 and (x', x'') at T; the end position is free.
Quartic quartic_between(double x0, double v0, double a0, double v1, double a1, double T);

// Integral of the squared third derivative over [0, T]. Exact for both
// degrees (the integrand is a polynomial of degree <= 4).
double squared_jerk_integral(const Quintic& p, double T);
double squared_jerk_integral(const Quartic& p, double T);

}  // namespace rh
