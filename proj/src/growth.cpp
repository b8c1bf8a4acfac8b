#include "chemo/growth.hpp"

#include "chemo/numeric.hpp"

#include <cmath>

namespace chemo {

GrowthFunction GrowthFunction::monod(double mu_max, double k) {
  if (mu_max <= 0.0 || k <= 0.0)
    throw std::invalid_argument("monod: mu_max and k must be positive");
  return GrowthFunction(Monod{mu_max, k});
}

GrowthFunction GrowthFunction::haldane(double a, double b, double c) {
  if (a <= 0.0)
    throw std::invalid_argument("haldane: a must be positive");
  if (b < 0.0 || c < 0.0)
    throw std::invalid_argument("haldane: b and c must be non-negative");
  return GrowthFunction(Haldane{a, b, c});
}

GrowthFunction GrowthFunction::tabulated(
    std::vector<std::pair<double, double>> points) {
  if (points.size() < 2)
    throw std::invalid_argument("tabulated: need at least two points");
  if (points.front().first != 0.0 || points.front().second != 0.0)
    throw std::invalid_argument("tabulated: first point must be (0, 0)");
  Tabulated t;
  t.s.reserve(points.size());
  t.mu.reserve(points.size());
  for (const auto& [s, mu] : points) {
    if (!t.s.empty() && s <= t.s.back())
      throw std::invalid_argument("tabulated: abscissae must be increasing");
    if (mu < 0.0) throw std::invalid_argument("tabulated: negative rate");
    t.s.push_back(s);
    t.mu.push_back(mu);
  }
  return GrowthFunction(std::move(t));
}

std::string GrowthFunction::describe() const {
  return std::visit(
      [](const auto& g) -> std::string {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Monod>) {
          return "monod(mu_max=" + std::to_string(g.mu_max) +
                 ", k=" + std::to_string(g.k) + ")";
        } else if constexpr (std::is_same_v<T, Haldane>) {
          return "haldane(a=" + std::to_string(g.a) +
                 ", b=" + std::to_string(g.b) + ", c=" + std::to_string(g.c) +
                 ")";
        } else {
          return "tabulated(" + std::to_string(g.s.size()) + " points)";
        }
      },
      impl_);
}

double min_derivative(const GrowthFunction& f, double lo, double hi) {
  if (lo < 0.0 || lo >= hi)
    throw std::domain_error("min_derivative: need 0 <= lo < hi");
  // Keep scan points strictly inside the tabulated range; closed forms are
  // unaffected by the nudge.
  double inner_lo = lo, inner_hi = hi;
  if (const auto* t = std::get_if<GrowthFunction::Tabulated>(&f.raw())) {
    inner_lo = std::max(inner_lo, t->s.front() + 1e-7);
    inner_hi = std::min(inner_hi, t->s.back() - 1e-7);
  }
  const int n = 10000;
  const double step = (inner_hi - inner_lo) / n;
  double best_x = inner_lo;
  double best = f.derivative(inner_lo);
  for (int i = 1; i <= n; ++i) {
    const double x = inner_lo + i * step;
    const double d = f.derivative(x);
    if (d < best) {
      best = d;
      best_x = x;
    }
  }
  // Local refinement: shrink a three-point bracket around the minimum.
  double a = std::max(inner_lo, best_x - step);
  double b = std::min(inner_hi, best_x + step);
  double m = best_x, fm = best;
  for (int r = 0; r < 10; ++r) {
    const double l = 0.5 * (a + m), rr = 0.5 * (m + b);
    const double fl = f.derivative(l), fr = f.derivative(rr);
    if (fl < fm && fl <= fr) {
      b = m;
      m = l;
      fm = fl;
    } else if (fr < fm) {
      a = m;
      m = rr;
      fm = fr;
    } else {
      a = l;
      b = rr;
    }
  }
  return fm;
}

double crossover(const GrowthFunction& f1, const GrowthFunction& f2, double lo,
                 double hi) {
  if (lo < 0.0 || lo >= hi)
    throw std::domain_error("crossover: need 0 <= lo < hi");
  auto diff = [&](double s) { return f1.value(s) - f2.value(s); };
  const auto brackets = scan_sign_changes(diff, lo, hi, 2000);
  if (brackets.empty())
    throw NoCrossover("crossover: no sign change of mu1 - mu2 in range");
  if (brackets.size() > 1)
    throw AmbiguousCrossover("crossover: multiple sign changes in range");
  return bisect(diff, brackets[0].first, brackets[0].second, 1e-12);
}

}  // namespace chemo
