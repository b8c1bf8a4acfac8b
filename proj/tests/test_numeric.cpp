#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "chemo/numeric.hpp"

#include <algorithm>
#include <cmath>

using namespace chemo;

TEST_CASE("bisect locates bracketed roots") {
  const double r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-12);
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12),
                  std::invalid_argument);
}

TEST_CASE("sign-change scan finds each bracket once") {
  auto f = [](double x) { return std::sin(x); };
  const auto b = scan_sign_changes(f, 0.5, 9.0, 1000);  // roots at pi, 2pi
  REQUIRE(b.size() == 2);
  CHECK(b[0].first < M_PI);
  CHECK(b[0].second > M_PI);
  CHECK(b[1].first < 2 * M_PI);
  CHECK(b[1].second > 2 * M_PI);
  CHECK(scan_sign_changes([](double) { return 0.0; }, 0.0, 1.0, 100).empty());
  CHECK(scan_sign_changes([](double x) { return x * x; }, -1.0, 1.0, 100).empty());
}

TEST_CASE("adaptive simpson reaches the requested tolerance") {
  CHECK(adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-12) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const double v = adaptive_simpson(
      [](double x) { return 1.0 / std::sqrt(x + 1e-3); }, 0.0, 1.0, 1e-10);
  const double exact = 2.0 * (std::sqrt(1.001) - std::sqrt(1e-3));
  CHECK(v == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("polynomial roots via Durand-Kerner") {
  // (x - 1)(x - 2)(x - 3) = x^3 - 6x^2 + 11x - 6
  auto roots = poly_roots(std::vector<double>{-6.0, 11.0, -6.0});
  std::sort(roots.begin(), roots.end(),
            [](auto a, auto b) { return a.real() < b.real(); });
  CHECK(roots[0].real() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(roots[1].real() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(roots[2].real() == doctest::Approx(3.0).epsilon(1e-10));
  for (const auto& r : roots) CHECK(std::abs(r.imag()) < 1e-10);

  auto imag_pair = poly_roots(std::vector<double>{0.0, 1.0});  // x^2 + 1
  CHECK(std::abs(imag_pair[0].imag()) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("characteristic polynomial of a known matrix") {
  // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
  const std::vector<double> m{2.0, 1.0, 1.0, 2.0};
  const auto coeffs = char_poly(m, 2);
  CHECK(coeffs[0] == doctest::Approx(-4.0));  // -trace
  CHECK(coeffs[1] == doctest::Approx(3.0));   // det
  auto roots = poly_roots(coeffs);
  std::sort(roots.begin(), roots.end(),
            [](auto a, auto b) { return a.real() < b.real(); });
  CHECK(roots[0].real() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(roots[1].real() == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("rk4 shows fourth-order global error on exp") {
  auto deriv = [](double, const double* y, double* dy) { dy[0] = y[0]; };
  auto run = [&](double h) {
    double y[1] = {1.0};
    const long n = std::lround(1.0 / h);
    for (long i = 0; i < n; ++i)
      rk4_step(i * h, h, std::span<double>(y, 1), deriv);
    return std::abs(y[0] - std::exp(1.0));
  };
  const double e1 = run(0.1), e2 = run(0.05);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 24.0);
}

TEST_CASE("moving average and window statistics") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const auto ma = moving_average(x, 3);
  REQUIRE(ma.size() == 3);
  CHECK(ma[0] == doctest::Approx(2.0));
  CHECK(ma[2] == doctest::Approx(4.0));
  CHECK(mean(x) == doctest::Approx(3.0));
  CHECK(stddev(x) == doctest::Approx(std::sqrt(2.0)));
}
