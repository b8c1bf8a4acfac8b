#include "chemo/twospecies.hpp"

#include "chemo/numeric.hpp"

#include <array>
#include <cmath>

namespace chemo {

namespace {

void require_linear_regime(double mu2, const ControllerConfig& cfg) {
  if (mu2 <= cfg.d_min || mu2 >= cfg.d_max)
    throw SaturationActive(
        "exclusion equilibrium: mu2(s_ref) outside (d_min, d_max)");
}

}  // namespace

std::vector<std::complex<double>> eigs_excluded_closed_form(
    const GrowthFunction& f1, const GrowthFunction& f2, double s_ref,
    double s_in, const ControllerConfig& cfg, FeedbackLaw law) {
  const double mu1 = f1.value(s_ref);
  const double mu2 = f2.value(s_ref);
  const double dmu2 = f2.derivative(s_ref);
  require_linear_regime(mu2, cfg);

  std::vector<std::complex<double>> eigs{-mu2, mu1 - mu2};
  if (law == FeedbackLaw::simple) {
    eigs.emplace_back(-(dmu2 + cfg.gain_prop) * (s_in - s_ref));
  } else {
    const double tr = -(dmu2 + cfg.gain_prop) * (s_in - s_ref);
    const double det = cfg.gain_adapt * (mu2 - cfg.d_min) *
                       (cfg.d_max - mu2) * (s_in - s_ref);
    const std::complex<double> disc =
        std::sqrt(std::complex<double>(tr * tr - 4.0 * det));
    eigs.push_back(0.5 * (tr + disc));
    eigs.push_back(0.5 * (tr - disc));
  }
  return eigs;
}

std::vector<std::complex<double>> eigs_excluded_numerical(
    const GrowthFunction& f1, const GrowthFunction& f2, double s_ref,
    double s_in, const ControllerConfig& cfg, FeedbackLaw law, double fd_h) {
  const double mu2_ref = f2.value(s_ref);
  require_linear_regime(mu2_ref, cfg);
  const bool adapt = law == FeedbackLaw::dynamic_adapt;
  const int n = adapt ? 4 : 3;

  auto field = [&](const std::array<double, 4>& x, std::array<double, 4>& dx) {
    const double s = x[0], b1 = x[1], b2 = x[2];
    const double d_ref = adapt ? x[3] : mu2_ref;
    const double d = saturate(d_ref - cfg.gain_prop * (s - s_ref), cfg.d_min,
                              cfg.d_max);
    const double m1 = f1.value(s);
    const double m2 = f2.value(s);
    dx[0] = -m1 * b1 - m2 * b2 + d * (s_in - s);
    dx[1] = (m1 - d) * b1;
    dx[2] = (m2 - d) * b2;
    if (adapt)
      dx[3] = -cfg.gain_adapt * (s - s_ref) * (d_ref - cfg.d_min) *
              (cfg.d_max - d_ref);
  };

  std::array<double, 4> eq{s_ref, 0.0, s_in - s_ref, mu2_ref};
  std::vector<double> jac(n * n);
  std::array<double, 4> xp, xm, fp, fm;
  for (int j = 0; j < n; ++j) {
    xp = eq;
    xm = eq;
    xp[j] += fd_h;
    xm[j] -= fd_h;
    field(xp, fp);
    field(xm, fm);
    for (int i = 0; i < n; ++i)
      jac[i * n + j] = (fp[i] - fm[i]) / (2.0 * fd_h);
  }
  return poly_roots(char_poly(jac, n));
}

double delayed_loss_boundary(const GrowthFunction& f1, const GrowthFunction& f2,
                             double s_start, double s_in,
                             const DelayedLossOptions& opt) {
  if (s_start <= opt.floor || s_start >= s_in)
    throw std::domain_error("delayed_loss_boundary: s_start out of range");
  auto integrand = [&](double sigma) {
    return (f1.value(sigma) - f2.value(sigma)) / (sigma * (s_in - sigma));
  };
  if (integrand(s_start) > 1e-9)
    throw std::domain_error(
        "delayed_loss_boundary: species 1 not suppressed at s_start");

  // Walk downward, accumulating Phi(x) = integral from s_start to x. Phi
  // rises while mu1 < mu2 and falls once the crossover is passed; the first
  // return to zero is the boundary.
  const double cell = (s_start - opt.floor) / opt.cells;
  const double cell_tol = opt.quad_tol / opt.cells;
  double phi = 0.0;
  bool rose = false;
  double x_hi = s_start;
  for (int i = 1; i <= opt.cells; ++i) {
    const double x_lo = s_start - i * cell;
    const double phi_hi = phi;
    phi -= adaptive_simpson(integrand, x_lo, x_hi, cell_tol);
    if (phi > 1e-14) rose = true;
    if (phi <= 0.0) {
      if (!rose) return s_start;  // degenerate start at (or below) crossover
      auto inner = [&](double x) {
        return phi_hi - adaptive_simpson(integrand, x, x_hi, opt.quad_tol);
      };
      return bisect(inner, x_lo, x_hi, 1e-12);
    }
    x_hi = x_lo;
  }
  throw NoReturn("delayed_loss_boundary: integral never returns to zero");
}

namespace {

struct ProbeRead {
  double s = 0.0;
  double d = 0.0;
  double at = 0.0;
  bool converged = false;
};

// Offline event detection on one probe's measured-output record.
ProbeRead detect_event(const std::vector<double>& samples, double t_start,
                       double h, const SwitchProtocol& p,
                       const ControllerState& refs,
                       const ControllerConfig& cfg) {
  ProbeRead out;
  const int nw = std::max(1, (int)std::lround(p.smoothing_window / h));
  const std::vector<double> smooth = moving_average(samples, nw);
  if (smooth.empty()) return out;
  auto center_time = [&](size_t j) {
    return t_start + (j + 0.5 * (nw - 1) + 1.0) * h;
  };
  auto read_at = [&](size_t j) {
    out.s = smooth[j];
    out.d = simple_feedback(smooth[j], refs, cfg);
    out.at = center_time(j);
    out.converged = true;
  };

  const int nd = std::max(1, (int)std::lround(p.slope_span / h));
  const int n2 = std::max(1, (int)std::lround(p.curvature_span / h));
  const size_t m = smooth.size();

  auto slope_at = [&](size_t j) {
    return (smooth[j + nd] - smooth[j - nd]) / (2.0 * nd * h);
  };

  if (p.read_off == ReadOff::stop_of_increase) {
    bool armed = false;
    for (size_t j = nd; j + nd < m; ++j) {
      if (center_time(j) - t_start < p.skip_initial) continue;
      const double sl = slope_at(j);
      if (!armed && sl > p.slope_band) armed = true;
      if (armed && sl < -p.slope_band) {
        read_at(j);
        return out;
      }
    }
  } else {
    // The approach to the momentary equilibrium decelerates (positive second
    // difference); the first confirmed drop below the band marks the
    // departure-side zero crossing.
    for (size_t j = n2; j + n2 < m; ++j) {
      if (center_time(j) - t_start < p.skip_initial) continue;
      const double cur = (smooth[j + n2] - 2.0 * smooth[j] + smooth[j - n2]) /
                         (n2 * h * n2 * h);
      if (cur < -p.curvature_band) {
        read_at(j);
        return out;
      }
    }
  }

  // No event: accept the tail as a reading if the record ends stationary
  // (the probe degenerated to ordinary stabilization).
  const size_t tail = std::min<size_t>(m, std::lround(p.tail_window / h));
  double slope_acc = 0.0;
  size_t cnt = 0;
  for (size_t j = std::max<size_t>(nd, m - tail); j + nd < m; ++j, ++cnt)
    slope_acc += std::abs(slope_at(j));
  const double tail_mean =
      mean(std::span<const double>(smooth).subspan(m - tail, tail));
  out.s = tail_mean;
  out.d = simple_feedback(tail_mean, refs, cfg);
  out.at = center_time(m - 1);
  out.converged = cnt > 0 && slope_acc / cnt < p.stationary_band;
  return out;
}

}  // namespace

ReconstructedGraph run_switch_protocol(ClosedLoop& loop,
                                       const SwitchProtocol& protocol,
                                       const SettleConfig& settle, double h) {
  if (loop.law() != FeedbackLaw::simple)
    throw std::logic_error("run_switch_protocol: needs the simple law");
  if (protocol.probes.empty())
    throw std::invalid_argument("run_switch_protocol: no probes");

  ReconstructedGraph g;
  const long probe_steps = std::lround(protocol.probe_time / h);
  std::vector<double> samples(probe_steps);
  for (const ControllerState& probe : protocol.probes) {
    loop.set_refs(protocol.park);
    run_until_settled(loop, settle, h);
    if (protocol.park_dwell > 0.0) loop.run_for(protocol.park_dwell, h);

    loop.set_refs(probe);
    const double t_start = loop.time();
    for (long i = 0; i < probe_steps; ++i) {
      loop.advance(h);
      samples[i] = loop.measured();
    }
    const ProbeRead r =
        detect_event(samples, t_start, h, protocol, probe, loop.config());
    g.points.push_back({r.s, r.d, r.at, r.converged, 0, 0.0});
  }
  return g;
}

std::vector<GainStudyRow> gain_accuracy_study(
    const GainStudyConfig& gc, const PlantParams& plant, ControllerConfig cfg,
    const Disturbance& dist, const SettleConfig& settle,
    const PlantState& initial, double h) {
  if (plant.growths.size() != 2)
    throw std::invalid_argument("gain_accuracy_study: needs two species");
  const GrowthFunction& target = plant.growths[gc.protocol.target_species];
  const GrowthFunction& other = plant.growths[1 - gc.protocol.target_species];

  std::vector<GainStudyRow> rows;
  for (double gain : gc.gains) {
    ControllerConfig run_cfg = cfg;
    run_cfg.gain_prop = gain;
    SwitchProtocol p = gc.protocol;
    if (gain == 0.0) {
      p.probes.clear();
      for (double d : gc.d_probes_zero_gain)
        p.probes.push_back({gc.protocol.park.s_ref, d});
    }
    ClosedLoop loop(plant, run_cfg, FeedbackLaw::simple, dist, initial,
                    p.park);
    const ReconstructedGraph g = run_switch_protocol(loop, p, settle, h);
    for (const GraphPoint& pt : g.points) {
      const double mu_t = target.value(pt.s);
      const double mu_o = other.value(pt.s);
      rows.push_back({gain, pt.s, pt.mu_est, mu_t, mu_o,
                      std::abs(pt.mu_est - mu_t) / std::abs(mu_o - mu_t),
                      pt.converged});
    }
  }
  return rows;
}

}  // namespace chemo
