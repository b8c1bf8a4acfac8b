#include "chemo/settle.hpp"

#include "chemo/numeric.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace chemo {

SettleResult run_until_settled(
    ClosedLoop& loop, const SettleConfig& cfg, double h,
    const std::function<void(const WindowStats&)>& on_window) {
  if (loop.law() != FeedbackLaw::simple)
    throw std::logic_error("run_until_settled: needs the simple feedback law");
  if (cfg.window <= 0.0 || cfg.improvement_ratio <= 0.0 ||
      cfg.improvement_ratio >= 1.0 || cfg.max_time < 2.0 * cfg.window)
    throw std::invalid_argument("run_until_settled: bad settle config");

  const long n = std::lround(cfg.window / h);
  const double t0 = loop.time();
  std::vector<double> samples(n);

  SettleResult res;
  double prev_std = -1.0;
  while (loop.time() - t0 + cfg.window <= cfg.max_time + 1e-9) {
    for (long i = 0; i < n; ++i) {
      loop.advance(h);
      samples[i] = loop.measured();
    }
    const double m = mean(samples);
    const double sd = stddev(samples);
    ++res.windows;
    if (on_window) on_window({res.windows, m, sd});
    res.s_eq = m;
    res.elapsed = loop.time() - t0;
    if (prev_std >= 0.0 && sd >= cfg.improvement_ratio * prev_std) {
      res.settled = true;
      break;
    }
    prev_std = sd;
  }
  res.d_at_eq = simple_feedback(res.s_eq, loop.refs(), loop.config());
  return res;
}

}  // namespace chemo
