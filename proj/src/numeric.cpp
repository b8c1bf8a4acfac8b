#include "chemo/numeric.hpp"

#include <cmath>
#include <stdexcept>

namespace chemo {

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iters) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("bisect: root not bracketed");
  for (int i = 0; i < max_iters && hi - lo > xtol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> scan_sign_changes(
    const std::function<double(double)>& f, double lo, double hi, int n) {
  std::vector<std::pair<double, double>> brackets;
  int prev_sign = 0;
  double prev_x = lo;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double v = f(x);
    const int sign = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (sign != 0) {
      if (prev_sign != 0 && sign != prev_sign) brackets.emplace_back(prev_x, x);
      prev_sign = sign;
      prev_x = x;
    }
  }
  return brackets;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double fm,
                            double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, fa, b, fb, fm);
  return adaptive_simpson_rec(f, a, fa, b, fb, fm, whole, tol, 50);
}

std::vector<std::complex<double>> poly_roots(std::span<const double> coeffs) {
  const int n = static_cast<int>(coeffs.size());
  if (n == 0) return {};
  using C = std::complex<double>;
  auto eval = [&](C x) {
    C v = 1.0;
    for (int i = 0; i < n; ++i) v = v * x + coeffs[i];
    return v;
  };
  // Standard Durand-Kerner start: powers of a point off the real axis.
  std::vector<C> r(n);
  const C seed(0.4, 0.9);
  r[0] = seed;
  for (int i = 1; i < n; ++i) r[i] = r[i - 1] * seed;
  for (int iter = 0; iter < 500; ++iter) {
    double move = 0.0;
    for (int i = 0; i < n; ++i) {
      C denom = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != i) denom *= r[i] - r[j];
      const C delta = eval(r[i]) / denom;
      r[i] -= delta;
      move = std::max(move, std::abs(delta));
    }
    if (move < 1e-14) break;
  }
  return {r.begin(), r.end()};
}

std::vector<double> char_poly(std::span<const double> matrix, int n) {
  // Faddeev-LeVerrier: M_1 = A, c_1 = -tr(M_1), M_{k+1} = A (M_k + c_k I).
  std::vector<double> a(matrix.begin(), matrix.end());
  std::vector<double> m(a);
  std::vector<double> coeffs(n);
  for (int k = 0; k < n; ++k) {
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += m[i * n + i];
    coeffs[k] = -tr / (k + 1);
    if (k + 1 == n) break;
    std::vector<double> shifted(m);
    for (int i = 0; i < n; ++i) shifted[i * n + i] += coeffs[k];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += a[i * n + l] * shifted[l * n + j];
        m[i * n + j] = acc;
      }
  }
  return coeffs;
}

std::vector<double> moving_average(std::span<const double> x, int window) {
  if (window < 1 || static_cast<int>(x.size()) < window) return {};
  std::vector<double> out;
  out.reserve(x.size() - window + 1);
  double acc = 0.0;
  for (int i = 0; i < window; ++i) acc += x[i];
  out.push_back(acc / window);
  for (size_t i = window; i < x.size(); ++i) {
    acc += x[i] - x[i - window];
    out.push_back(acc / window);
  }
  return out;
}

double mean(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return x.empty() ? 0.0 : acc / x.size();
}

double stddev(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return std::sqrt(acc / x.size());
}

}  // namespace chemo
