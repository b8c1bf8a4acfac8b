#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace chemo {

// Growth-rate curve mu(s). All kinds satisfy mu(0) = 0 and are Lipschitz on
// their domain. Tabulated interpolates linearly between its nodes and must
// start at (0, 0).
class GrowthFunction {
 public:
  struct Monod {
    double mu_max, k;
  };
  struct Haldane {
    double a, b, c;  // s / (a + b s + c s^2)
  };
  struct Tabulated {
    std::vector<double> s, mu;
  };

  static GrowthFunction monod(double mu_max, double k);
  static GrowthFunction haldane(double a, double b, double c);
  static GrowthFunction tabulated(std::vector<std::pair<double, double>> points);

  double value(double s) const;
  double derivative(double s) const;

  const std::variant<Monod, Haldane, Tabulated>& raw() const { return impl_; }
  std::string describe() const;

 private:
  explicit GrowthFunction(std::variant<Monod, Haldane, Tabulated> impl)
      : impl_(std::move(impl)) {}
  std::variant<Monod, Haldane, Tabulated> impl_;
};

struct NoCrossover : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AmbiguousCrossover : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimum of mu' over [lo, hi], dense grid scan plus local bisection
// refinement. Used to pick admissible proportional gains.
double min_derivative(const GrowthFunction& f, double lo, double hi);

// The point in [lo, hi] where mu1 - mu2 changes sign, assuming it does so
// exactly once. Throws NoCrossover / AmbiguousCrossover otherwise.
double crossover(const GrowthFunction& f1, const GrowthFunction& f2, double lo,
                 double hi);

inline double GrowthFunction::value(double s) const {
  if (s < 0.0) throw std::domain_error("growth: negative substrate");
  return std::visit(
      [s](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Monod>) {
          return g.mu_max * s / (g.k + s);
        } else if constexpr (std::is_same_v<T, Haldane>) {
          return s / (g.a + g.b * s + g.c * s * s);
        } else {
          if (s > g.s.back())
            throw std::domain_error("growth: substrate beyond table range");
          const auto it = std::upper_bound(g.s.begin(), g.s.end(), s);
          if (it == g.s.begin()) return g.mu.front();
          const size_t i = (it == g.s.end() ? g.s.size() : it - g.s.begin()) - 1;
          if (i + 1 == g.s.size()) return g.mu.back();
          const double w = (s - g.s[i]) / (g.s[i + 1] - g.s[i]);
          return g.mu[i] + w * (g.mu[i + 1] - g.mu[i]);
        }
      },
      impl_);
}

inline double GrowthFunction::derivative(double s) const {
  if (s < 0.0) throw std::domain_error("growth: negative substrate");
  return std::visit(
      [s, this](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Monod>) {
          const double d = g.k + s;
          return g.mu_max * g.k / (d * d);
        } else if constexpr (std::is_same_v<T, Haldane>) {
          const double q = g.a + g.b * s + g.c * s * s;
          return (g.a - g.c * s * s) / (q * q);
        } else {
          // Finite difference of the interpolant; s must be strictly inside.
          const double lo = g.s.front(), hi = g.s.back();
          if (s <= lo || s >= hi)
            throw std::domain_error("growth: derivative outside table range");
          const double h = std::min({1e-6, (s - lo) / 2, (hi - s) / 2});
          return (value(s + h) - value(s - h)) / (2.0 * h);
        }
      },
      impl_);
}

}  // namespace chemo
