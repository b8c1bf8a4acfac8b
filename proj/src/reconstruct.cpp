#include "chemo/reconstruct.hpp"

#include "chemo/numeric.hpp"

#include <cmath>

namespace chemo {

NoEquilibrium::NoEquilibrium(const std::string& what, int brackets_found)
    : std::runtime_error(what), brackets(brackets_found) {}

double equilibrium_oracle(const GrowthFunction& f, const ControllerState& refs,
                          const ControllerConfig& cfg, double s_in) {
  auto gap = [&](double s) {
    return refs.d_ref - cfg.gain_prop * (s - refs.s_ref) - f.value(s);
  };
  const auto brackets = scan_sign_changes(gap, 0.0, s_in, 4096);
  if (brackets.empty())
    throw NoEquilibrium("equilibrium oracle: no sign change on (0, s_in)", 0);
  if (brackets.size() > 1)
    throw NoEquilibrium("equilibrium oracle: " +
                            std::to_string(brackets.size()) +
                            " candidate equilibria, admissibility violated",
                        static_cast<int>(brackets.size()));
  return bisect(gap, brackets[0].first, brackets[0].second, 1e-12);
}

std::vector<std::pair<double, double>> oracle_curve(
    const GrowthFunction& f, const ControllerConfig& cfg, double s_in,
    std::span<const double> grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double s_ref : grid) {
    auto res = [&](double d) {
      try {
        return equilibrium_oracle(f, {s_ref, d}, cfg, s_in) - s_ref;
      } catch (const NoEquilibrium& e) {
        if (e.brackets != 0) throw;
        // Feedback line clear of the curve: the loop parks at washout
        // (line above) or full depletion (line below).
        const double mid = 0.5 * s_in;
        const double line = d - cfg.gain_prop * (mid - s_ref);
        return line > f.value(mid) ? s_in - s_ref : -s_ref;
      }
    };
    out.emplace_back(s_ref, bisect(res, cfg.d_min, cfg.d_max, 1e-12));
  }
  return out;
}

MapEval SimulatedMap::eval(double s_ref, double d_ref) {
  loop_.set_refs({s_ref, d_ref});
  SettleResult r = run_until_settled(loop_, settle_, h_);
  if (!r.settled) {
    // Soft failure: one retry with a doubled budget before flagging.
    SettleConfig retry = settle_;
    retry.max_time *= 2.0;
    r = run_until_settled(loop_, retry, h_);
  }
  return {r.s_eq, r.settled};
}

MapEval OracleMap::eval(double s_ref, double d_ref) {
  return {equilibrium_oracle(f_, {s_ref, d_ref}, cfg_, s_in_), true};
}

ReconstructedGraph drift_reconstruct(ClosedLoop& loop, const DriftWindow& win,
                                     double h) {
  if (loop.law() != FeedbackLaw::dynamic_adapt || loop.drift() == 0.0)
    throw std::logic_error(
        "drift_reconstruct: needs the dynamic law with a nonzero drift");
  ReconstructedGraph g;
  const double t0 = loop.time();
  double next_record = t0;
  while (loop.time() - t0 < win.max_time) {
    const double s_ref = loop.refs().s_ref;
    if (s_ref < win.s_lo || s_ref > win.s_hi) break;
    if (loop.time() >= next_record - 0.5 * h) {
      g.points.push_back(
          {s_ref, loop.refs().d_ref, loop.time(), true, 0, 0.0});
      next_record += win.record_every;
    }
    loop.advance(h);
  }
  return g;
}

namespace {

double clamp_ref(double d, const ControllerConfig& cfg) {
  return saturate(d, cfg.d_min, cfg.d_max);
}

}  // namespace

ReconstructedGraph newton_reconstruct(const NewtonConfig& nc,
                                      EquilibriumMap& map,
                                      const ControllerConfig& cfg) {
  if (nc.s_grid.empty())
    throw std::invalid_argument("newton_reconstruct: empty grid");
  if (nc.tol <= 0.0)
    throw std::invalid_argument("newton_reconstruct: tol must be positive");
  const double fd = nc.fd_step > 0.0 ? nc.fd_step : 0.01 * (cfg.d_max - cfg.d_min);

  ReconstructedGraph g;
  double prev_s = 0.0, prev_d = 0.0;    // last accepted point
  double prev2_s = 0.0, prev2_d = 0.0;  // the one before it
  int accepted = 0;

  for (size_t k = 0; k < nc.s_grid.size(); ++k) {
    const double s_k = nc.s_grid[k];
    if (accepted > 0 && std::abs(s_k - prev_s) < 1e-15)
      throw std::invalid_argument("newton_reconstruct: repeated abscissa");

    double d;
    if (accepted == 0) {
      d = nc.d_start > 0.0 ? nc.d_start : 0.5 * (cfg.d_min + cfg.d_max);
    } else if (accepted == 1) {
      d = prev_d;
    } else {
      const double slope = (prev_d - prev2_d) / (prev_s - prev2_s);
      d = clamp_ref(prev_d + slope * (s_k - prev_s), cfg);
    }

    // For the first point there is no secant slope yet; estimate
    // d(s_eq)/d(d_ref) once by a forward difference and keep it.
    double fd_slope = 0.0;
    bool have_fd_slope = false;

    MapEval e = map.eval(s_k, d);
    double r = e.s_eq - s_k;
    int iters = 0;
    bool ok = std::abs(r) < nc.tol && e.settled;
    while (!ok && iters < nc.max_iters) {
      double d_new;
      if (accepted == 0) {
        if (!have_fd_slope) {
          const double d_probe = d + fd <= cfg.d_max ? d + fd : d - fd;
          const MapEval probe = map.eval(s_k, d_probe);
          fd_slope = (probe.s_eq - e.s_eq) / (d_probe - d);
          have_fd_slope = true;
        }
        d_new = std::abs(fd_slope) > 1e-12 ? d - r / fd_slope
                                           : d - 0.5 * r / cfg.gain_prop;
      } else {
        const double m = (d - prev_d) / (s_k - prev_s);
        const double deriv_inv = cfg.gain_prop + m;  // 1 / (ds_eq/dd_ref)
        d_new = deriv_inv < 1e-8 ? d - 0.5 * r / cfg.gain_prop
                                 : d - r * deriv_inv;
      }
      d = clamp_ref(d_new, cfg);
      e = map.eval(s_k, d);
      r = e.s_eq - s_k;
      ++iters;
      ok = std::abs(r) < nc.tol && e.settled;
    }

    g.points.push_back({s_k, d, map.time(), ok, iters, std::abs(r)});
    prev2_s = prev_s;
    prev2_d = prev_d;
    prev_s = s_k;
    prev_d = d;
    ++accepted;
  }
  return g;
}

ReconstructedGraph secant_reconstruct(const SecantConfig& sc,
                                      std::pair<double, double> seed0,
                                      std::pair<double, double> seed1,
                                      EquilibriumMap& map,
                                      const ControllerConfig& cfg) {
  if (sc.spacing <= 0.0)
    throw std::invalid_argument("secant_reconstruct: spacing must be positive");
  ReconstructedGraph g;
  auto p0 = seed0;
  auto p1 = seed1;
  for (int k = 0; k < sc.max_points; ++k) {
    const double ds = p1.first - p0.first;
    const double dd = p1.second - p0.second;
    const double norm = std::hypot(sc.weight_s * ds, sc.weight_d * dd);
    if (norm < 1e-12)
      throw StalledContinuation("secant_reconstruct: consecutive points coincide");
    const double s_pred = p1.first + sc.spacing * ds / norm;
    const double d_pred = clamp_ref(p1.second + sc.spacing * dd / norm, cfg);
    if (s_pred < sc.s_lo || s_pred > sc.s_hi) break;

    const MapEval e = map.eval(s_pred, d_pred);
    const double s_next = e.s_eq;
    const double d_next =
        clamp_ref(d_pred - cfg.gain_prop * (s_next - s_pred), cfg);
    g.points.push_back({s_next, d_next, map.time(), e.settled, 1,
                        std::abs(s_next - s_pred)});
    p0 = p1;
    p1 = {s_next, d_next};
  }
  return g;
}

}  // namespace chemo
