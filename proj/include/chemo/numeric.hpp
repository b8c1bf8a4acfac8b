#pragma once

#include <cassert>
#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace chemo {

// Classical fixed-step RK4 over a flat state vector. deriv(t, y, dy) writes
// dy/dt into dy; y is updated in place. State dimension is capped so no
// allocation happens per step.
template <class Deriv>
void rk4_step(double t, double h, std::span<double> y, Deriv&& deriv) {
  constexpr int cap = 8;
  const int n = static_cast<int>(y.size());
  assert(n <= cap);
  double k1[cap], k2[cap], k3[cap], k4[cap], w[cap];

  deriv(t, y.data(), k1);
  for (int i = 0; i < n; ++i) w[i] = y[i] + 0.5 * h * k1[i];
  deriv(t + 0.5 * h, w, k2);
  for (int i = 0; i < n; ++i) w[i] = y[i] + 0.5 * h * k2[i];
  deriv(t + 0.5 * h, w, k3);
  for (int i = 0; i < n; ++i) w[i] = y[i] + h * k3[i];
  deriv(t + h, w, k4);
  for (int i = 0; i < n; ++i)
    y[i] += (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
}

// Plain bisection; requires f(lo) and f(hi) of opposite sign. Stops when the
// bracket width drops below xtol and returns the midpoint.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iters = 200);

// Sign-change brackets of f on a uniform grid of n+1 points over [lo, hi].
// Exact zeros at grid points are folded into the adjacent bracket; tangencies
// without a sign change are not reported.
std::vector<std::pair<double, double>> scan_sign_changes(
    const std::function<double(double)>& f, double lo, double hi, int n);

// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

// All roots of the monic polynomial x^n + c[0] x^(n-1) + ... + c[n-1]
// (Durand-Kerner iteration).
std::vector<std::complex<double>> poly_roots(std::span<const double> coeffs);

// Characteristic polynomial coefficients of a dense n x n matrix (row-major),
// monic convention as accepted by poly_roots (Faddeev-LeVerrier).
std::vector<double> char_poly(std::span<const double> matrix, int n);

// Centered moving average of width `window` samples (odd preferred); output
// has size() - window + 1 entries, entry j averaging samples [j, j+window).
std::vector<double> moving_average(std::span<const double> x, int window);

double mean(std::span<const double> x);
double stddev(std::span<const double> x);  // population convention

}  // namespace chemo
