#include "chemo/scenario.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace chemo {

using nlohmann::json;

ConfigError::ConfigError(std::vector<std::string> problems_in)
    : std::runtime_error("invalid scenario config (" +
                         std::to_string(problems_in.size()) + " problems, first: " +
                         (problems_in.empty() ? std::string("?")
                                              : problems_in.front()) +
                         ")"),
      problems(std::move(problems_in)) {}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

struct Parser {
  std::vector<std::string> problems;

  void fail(const std::string& where, const std::string& what) {
    problems.push_back(where + ": " + what);
  }

  const json* object(const json& j, const std::string& where, const char* key,
                     bool required = true) {
    if (!j.contains(key)) {
      if (required) fail(where, std::string("missing section '") + key + "'");
      return nullptr;
    }
    if (!j.at(key).is_object()) {
      fail(where + "." + key, "expected an object");
      return nullptr;
    }
    return &j.at(key);
  }

  double number(const json& j, const std::string& where, const char* key,
                std::optional<double> def = std::nullopt) {
    if (!j.contains(key)) {
      if (def) return *def;
      fail(where, std::string("missing field '") + key + "'");
      return 0.0;
    }
    if (!j.at(key).is_number()) {
      fail(where + "." + key, "expected a number");
      return def.value_or(0.0);
    }
    return j.at(key).get<double>();
  }

  long integer(const json& j, const std::string& where, const char* key,
               std::optional<long> def = std::nullopt) {
    if (!j.contains(key)) {
      if (def) return *def;
      fail(where, std::string("missing field '") + key + "'");
      return 0;
    }
    if (!j.at(key).is_number_integer()) {
      fail(where + "." + key, "expected an integer");
      return def.value_or(0);
    }
    return j.at(key).get<long>();
  }

  std::string text(const json& j, const std::string& where, const char* key,
                   std::optional<std::string> def = std::nullopt) {
    if (!j.contains(key)) {
      if (def) return *def;
      fail(where, std::string("missing field '") + key + "'");
      return {};
    }
    if (!j.at(key).is_string()) {
      fail(where + "." + key, "expected a string");
      return def.value_or("");
    }
    return j.at(key).get<std::string>();
  }
};

std::optional<GrowthFunction> parse_growth(Parser& p, const json& j,
                                           const std::string& where) {
  if (!j.is_object()) {
    p.fail(where, "expected an object");
    return std::nullopt;
  }
  const std::string kind = p.text(j, where, "kind");
  try {
    if (kind == "monod")
      return GrowthFunction::monod(p.number(j, where, "mu_max"),
                                   p.number(j, where, "k"));
    if (kind == "haldane")
      return GrowthFunction::haldane(p.number(j, where, "a"),
                                     p.number(j, where, "b"),
                                     p.number(j, where, "c"));
    if (kind == "tabulated") {
      if (!j.contains("points") || !j.at("points").is_array()) {
        p.fail(where + ".points", "expected an array of [s, mu] pairs");
        return std::nullopt;
      }
      std::vector<std::pair<double, double>> pts;
      for (const auto& e : j.at("points")) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
            !e[1].is_number()) {
          p.fail(where + ".points", "entries must be [s, mu] number pairs");
          return std::nullopt;
        }
        pts.emplace_back(e[0].get<double>(), e[1].get<double>());
      }
      return GrowthFunction::tabulated(std::move(pts));
    }
    if (!kind.empty()) p.fail(where + ".kind", "unknown growth kind '" + kind + "'");
  } catch (const std::invalid_argument& e) {
    p.fail(where, e.what());
  }
  return std::nullopt;
}

std::vector<double> parse_grid(Parser& p, const json& j,
                               const std::string& where) {
  std::vector<double> grid;
  if (j.contains("points")) {
    if (!j.at("points").is_array()) {
      p.fail(where + ".points", "expected an array");
      return grid;
    }
    for (const auto& e : j.at("points")) {
      if (!e.is_number()) {
        p.fail(where + ".points", "entries must be numbers");
        return {};
      }
      grid.push_back(e.get<double>());
    }
  } else if (const json* g = p.object(j, where, "grid", false)) {
    const double start = p.number(*g, where + ".grid", "start");
    const double step = p.number(*g, where + ".grid", "step");
    const long count = p.integer(*g, where + ".grid", "count");
    for (long i = 0; i < count; ++i) grid.push_back(start + i * step);
  } else {
    p.fail(where, "need either 'points' or 'grid'");
  }
  return grid;
}

std::vector<ControllerState> parse_probes(Parser& p, const json& j,
                                          const std::string& where) {
  std::vector<ControllerState> probes;
  if (j.contains("probes")) {
    if (!j.at("probes").is_array()) {
      p.fail(where + ".probes", "expected an array of [s_ref, d_ref] pairs");
      return probes;
    }
    for (const auto& e : j.at("probes")) {
      if (!e.is_array() || e.size() != 2) {
        p.fail(where + ".probes", "entries must be [s_ref, d_ref] pairs");
        return {};
      }
      probes.push_back({e[0].get<double>(), e[1].get<double>()});
    }
  } else if (const json* g = p.object(j, where, "probe_s", false)) {
    const double start = p.number(*g, where + ".probe_s", "start");
    const double step = p.number(*g, where + ".probe_s", "step");
    const long count = p.integer(*g, where + ".probe_s", "count");
    const double d = p.number(j, where, "probe_d");
    for (long i = 0; i < count; ++i) probes.push_back({start + i * step, d});
  } else {
    p.fail(where, "need either 'probes' or 'probe_s' + 'probe_d'");
  }
  return probes;
}

SwitchProtocol parse_protocol(Parser& p, const json& j,
                              const std::string& where) {
  SwitchProtocol proto;
  if (j.contains("park") && j.at("park").is_array() && j.at("park").size() == 2) {
    proto.park = {j.at("park")[0].get<double>(), j.at("park")[1].get<double>()};
  } else {
    p.fail(where + ".park", "expected [s_ref, d_ref]");
  }
  proto.probes = parse_probes(p, j, where);
  const std::string ro = p.text(j, where, "read_off");
  if (ro == "stop_of_increase")
    proto.read_off = ReadOff::stop_of_increase;
  else if (ro == "inflection")
    proto.read_off = ReadOff::inflection;
  else if (!ro.empty())
    p.fail(where + ".read_off",
           "expected 'stop_of_increase' or 'inflection'");
  proto.target_species = (int)p.integer(j, where, "target_species");
  proto.smoothing_window = p.number(j, where, "smoothing_window", 5.0);
  proto.slope_span = p.number(j, where, "slope_span", 0.5);
  proto.slope_band = p.number(j, where, "slope_band", 1e-4);
  proto.curvature_span = p.number(j, where, "curvature_span", 2.0);
  proto.curvature_band = p.number(j, where, "curvature_band", 1e-3);
  proto.skip_initial = p.number(j, where, "skip_initial", 10.0);
  proto.probe_time = p.number(j, where, "probe_time", 150.0);
  proto.tail_window = p.number(j, where, "tail_window", 20.0);
  proto.stationary_band = p.number(j, where, "stationary_band", 5e-3);
  proto.park_dwell = p.number(j, where, "park_dwell", 0.0);
  return proto;
}

void validate(Parser& p, ScenarioConfig& cfg) {
  const double s_in = cfg.plant.s_in;
  if (s_in <= 0.0) p.fail("plant.s_in", "must be positive");
  if (cfg.plant.b_min < 0.0 || cfg.plant.b_min >= s_in)
    p.fail("plant.b_min", "must lie in [0, s_in)");
  if (cfg.plant.growths.empty() || cfg.plant.growths.size() > 2)
    p.fail("plant.growth", "need one or two species");
  for (size_t i = 0; i < cfg.plant.growths.size(); ++i) {
    if (const auto* t = std::get_if<GrowthFunction::Tabulated>(
            &cfg.plant.growths[i].raw())) {
      if (t->s.back() < s_in)
        p.fail("plant.growth[" + std::to_string(i) + "]",
               "table must cover [0, s_in]");
    }
  }

  const auto& c = cfg.controller;
  if (!(c.d_min > 0.0 && c.d_min < c.d_max))
    p.fail("controller", "need 0 < d_min < d_max");
  if (c.gain_prop <= 0.0)
    p.fail("controller.gain_prop", "must be positive");
  if (cfg.law == FeedbackLaw::dynamic_adapt && c.gain_adapt <= 0.0)
    p.fail("controller.gain_adapt", "must be positive for the dynamic law");
  if (c.s_min < 0.0 || c.s_min >= s_in)
    p.fail("controller.s_min", "must lie in [0, s_in)");
  if (cfg.refs0.s_ref < 0.0 || cfg.refs0.s_ref > s_in)
    p.fail("controller.s_ref0", "must lie in [0, s_in]");
  if (cfg.refs0.d_ref < c.d_min || cfg.refs0.d_ref > c.d_max)
    p.fail("controller.d_ref0", "must lie in [d_min, d_max]");

  if (cfg.disturbance.amplitude < 0.0 || cfg.disturbance.amplitude >= 1.0)
    p.fail("disturbance.amplitude", "must lie in [0, 1)");

  if (cfg.settle.window <= 0.0) p.fail("settle.window", "must be positive");
  if (cfg.settle.improvement_ratio <= 0.0 || cfg.settle.improvement_ratio >= 1.0)
    p.fail("settle.improvement_ratio", "must lie in (0, 1)");
  if (cfg.settle.max_time < 2.0 * cfg.settle.window)
    p.fail("settle.max_time", "must be at least twice the window");
  if (cfg.settle.tol <= 0.0) p.fail("settle.tol", "must be positive");

  if (cfg.h <= 0.0) p.fail("integrator.h", "must be positive");
  if (cfg.record_every < cfg.h)
    p.fail("record_every", "must be at least the step size");

  if (cfg.initial) {
    if (cfg.initial->s < 0.0 || cfg.initial->s > s_in)
      p.fail("initial.s", "must lie in [0, s_in]");
    if (cfg.initial->b.size() != cfg.plant.growths.size())
      p.fail("initial.b", "species count mismatch");
    for (double b : cfg.initial->b)
      if (b < 0.0) p.fail("initial.b", "biomass must be non-negative");
  }

  switch (cfg.kind) {
    case MethodKind::drift:
      if (cfg.law != FeedbackLaw::dynamic_adapt)
        p.fail("method", "drift requires controller.law = 'dynamic'");
      if (cfg.drift.rate == 0.0) p.fail("method.rate", "must be nonzero");
      if (!(cfg.drift.s_lo < cfg.drift.s_hi) || cfg.drift.s_lo <= 0.0 ||
          cfg.drift.s_hi >= s_in)
        p.fail("method", "need 0 < s_lo < s_hi < s_in");
      break;
    case MethodKind::newton: {
      if (cfg.law != FeedbackLaw::simple)
        p.fail("method", "newton requires controller.law = 'simple'");
      if (cfg.newton.s_grid.empty()) p.fail("method.grid", "empty grid");
      for (size_t i = 0; i < cfg.newton.s_grid.size(); ++i) {
        const double s = cfg.newton.s_grid[i];
        if (s <= 0.0 || s >= s_in)
          p.fail("method.grid[" + std::to_string(i) + "]",
                 "abscissa outside (0, s_in)");
        if (i > 0 && s == cfg.newton.s_grid[i - 1])
          p.fail("method.grid[" + std::to_string(i) + "]",
                 "consecutive abscissae must be distinct");
      }
      if (cfg.newton.tol <= 0.0) p.fail("method.tol", "must be positive");
      if (cfg.newton.max_iters < 1) p.fail("method.max_iters", "must be >= 1");
      break;
    }
    case MethodKind::secant:
      if (cfg.law != FeedbackLaw::simple)
        p.fail("method", "secant requires controller.law = 'simple'");
      if (cfg.secant.cfg.spacing <= 0.0)
        p.fail("method.spacing", "must be positive");
      if (cfg.secant.cfg.max_points < 1)
        p.fail("method.max_points", "must be >= 1");
      if (!cfg.secant.seed_points &&
          cfg.secant.seed_grid[0] == cfg.secant.seed_grid[1])
        p.fail("method.seed_grid", "seed abscissae must be distinct");
      break;
    case MethodKind::switch_protocol:
    case MethodKind::gain_study: {
      if (cfg.law != FeedbackLaw::simple)
        p.fail("method", "switching protocols require controller.law = 'simple'");
      const SwitchProtocol& proto = cfg.kind == MethodKind::gain_study
                                        ? cfg.gain_study.protocol
                                        : cfg.protocol;
      if (proto.probes.empty() && cfg.kind == MethodKind::switch_protocol)
        p.fail("method.probes", "need at least one probe");
      if (proto.target_species < 0 ||
          proto.target_species >= (int)cfg.plant.growths.size())
        p.fail("method.target_species", "no such species");
      if (cfg.kind == MethodKind::gain_study) {
        if (cfg.plant.growths.size() != 2)
          p.fail("method", "gain study needs two species");
        if (cfg.gain_study.gains.empty())
          p.fail("method.gains", "need at least one gain");
        for (double g : cfg.gain_study.gains)
          if (g < 0.0) p.fail("method.gains", "gains must be non-negative");
        const bool has_zero =
            std::find(cfg.gain_study.gains.begin(), cfg.gain_study.gains.end(),
                      0.0) != cfg.gain_study.gains.end();
        if (has_zero && cfg.gain_study.d_probes_zero_gain.empty())
          p.fail("method.d_probes_zero_gain",
                 "required when the gain list contains 0");
      }
      break;
    }
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& name) {
  Parser p;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("parse error: ") + e.what()});
  }

  ScenarioConfig cfg;
  cfg.name = name;

  if (const json* plant = p.object(j, name, "plant")) {
    cfg.plant.s_in = p.number(*plant, "plant", "s_in");
    cfg.plant.b_min = p.number(*plant, "plant", "b_min", 0.0);
    if (plant->contains("growth") && plant->at("growth").is_array()) {
      int i = 0;
      for (const auto& e : plant->at("growth")) {
        auto g = parse_growth(p, e, "plant.growth[" + std::to_string(i) + "]");
        if (g) cfg.plant.growths.push_back(std::move(*g));
        ++i;
      }
    } else {
      p.fail("plant.growth", "expected an array of growth functions");
    }
  }

  if (const json* ctl = p.object(j, name, "controller")) {
    const std::string law = p.text(*ctl, "controller", "law", "simple");
    if (law == "simple")
      cfg.law = FeedbackLaw::simple;
    else if (law == "dynamic")
      cfg.law = FeedbackLaw::dynamic_adapt;
    else
      p.fail("controller.law", "expected 'simple' or 'dynamic'");
    cfg.controller.d_min = p.number(*ctl, "controller", "d_min");
    cfg.controller.d_max = p.number(*ctl, "controller", "d_max");
    cfg.controller.gain_prop = p.number(*ctl, "controller", "gain_prop");
    cfg.controller.gain_adapt = p.number(*ctl, "controller", "gain_adapt", 0.0);
    cfg.controller.s_min = p.number(*ctl, "controller", "s_min", 0.0);
    cfg.refs0.s_ref = p.number(*ctl, "controller", "s_ref0");
    cfg.refs0.d_ref = p.number(
        *ctl, "controller", "d_ref0",
        0.5 * (cfg.controller.d_min + cfg.controller.d_max));
  }

  if (const json* d = p.object(j, name, "disturbance", false)) {
    const std::string kind = p.text(*d, "disturbance", "kind", "none");
    if (kind == "biharmonic") {
      cfg.disturbance.amplitude = p.number(*d, "disturbance", "amplitude");
      cfg.disturbance.freq1 = p.number(*d, "disturbance", "freq1", 3.0);
      cfg.disturbance.freq2 = p.number(*d, "disturbance", "freq2", 1.0);
    } else if (kind != "none") {
      p.fail("disturbance.kind", "expected 'none' or 'biharmonic'");
    }
  }

  if (const json* s = p.object(j, name, "settle", false)) {
    cfg.settle.window = p.number(*s, "settle", "window", 20.0);
    cfg.settle.improvement_ratio =
        p.number(*s, "settle", "improvement_ratio", 0.9);
    cfg.settle.max_time = p.number(*s, "settle", "max_time", 500.0);
    cfg.settle.tol = p.number(*s, "settle", "tol", 1e-3);
  }

  if (const json* integ = p.object(j, name, "integrator", false))
    cfg.h = p.number(*integ, "integrator", "h", 0.01);
  cfg.record_every = p.number(j, name, "record_every", 1.0);
  cfg.error_skip = p.number(j, name, "error_skip", 0.0);
  cfg.seed = (unsigned long)p.integer(j, name, "seed", 1);
  if (const json* o = p.object(j, name, "outputs", false))
    cfg.out_dir = p.text(*o, "outputs", "dir", std::string("out"));

  if (const json* init = p.object(j, name, "initial", false)) {
    PlantState st;
    st.s = p.number(*init, "initial", "s");
    if (init->contains("b") && init->at("b").is_array())
      for (const auto& e : init->at("b")) st.b.push_back(e.get<double>());
    else
      p.fail("initial.b", "expected an array");
    cfg.initial = std::move(st);
  }

  if (const json* m = p.object(j, name, "method")) {
    const std::string type = p.text(*m, "method", "type");
    if (type == "drift") {
      cfg.kind = MethodKind::drift;
      cfg.drift.rate = p.number(*m, "method", "rate");
      cfg.drift.s_lo = p.number(*m, "method", "s_lo");
      cfg.drift.s_hi = p.number(*m, "method", "s_hi");
      cfg.drift.max_time = p.number(*m, "method", "max_time", 1e9);
    } else if (type == "newton") {
      cfg.kind = MethodKind::newton;
      cfg.newton.s_grid = parse_grid(p, *m, "method");
      cfg.newton.tol = p.number(*m, "method", "tol", cfg.settle.tol);
      cfg.newton.max_iters = (int)p.integer(*m, "method", "max_iters", 12);
      cfg.newton.fd_step = p.number(*m, "method", "fd_step", 0.0);
      cfg.newton.d_start = p.number(*m, "method", "d_start", -1.0);
    } else if (type == "secant") {
      cfg.kind = MethodKind::secant;
      cfg.secant.cfg.spacing = p.number(*m, "method", "spacing");
      cfg.secant.cfg.max_points = (int)p.integer(*m, "method", "max_points", 40);
      cfg.secant.cfg.s_lo = p.number(*m, "method", "s_lo", 0.0);
      cfg.secant.cfg.s_hi = p.number(*m, "method", "s_hi", cfg.plant.s_in);
      cfg.secant.cfg.weight_s = p.number(*m, "method", "weight_s", 1.0);
      cfg.secant.cfg.weight_d = p.number(*m, "method", "weight_d", 1.0);
      cfg.secant.seed_tol = p.number(*m, "method", "seed_tol", cfg.settle.tol);
      if (m->contains("seed_points")) {
        const auto& sp = m->at("seed_points");
        if (sp.is_array() && sp.size() == 2 && sp[0].is_array() &&
            sp[1].is_array()) {
          cfg.secant.seed_points = {{{sp[0][0].get<double>(), sp[0][1].get<double>()},
                                     {sp[1][0].get<double>(), sp[1][1].get<double>()}}};
        } else {
          p.fail("method.seed_points", "expected two [s, d] pairs");
        }
      } else if (m->contains("seed_grid") && m->at("seed_grid").is_array() &&
                 m->at("seed_grid").size() == 2) {
        cfg.secant.seed_grid = {m->at("seed_grid")[0].get<double>(),
                                m->at("seed_grid")[1].get<double>()};
      } else {
        p.fail("method", "need 'seed_grid' or 'seed_points'");
      }
    } else if (type == "switch") {
      cfg.kind = MethodKind::switch_protocol;
      cfg.protocol = parse_protocol(p, *m, "method");
    } else if (type == "gain_study") {
      cfg.kind = MethodKind::gain_study;
      cfg.gain_study.protocol = parse_protocol(p, *m, "method");
      if (m->contains("gains") && m->at("gains").is_array())
        for (const auto& e : m->at("gains"))
          cfg.gain_study.gains.push_back(e.get<double>());
      else
        p.fail("method.gains", "expected an array");
      if (m->contains("d_probes_zero_gain") &&
          m->at("d_probes_zero_gain").is_array())
        for (const auto& e : m->at("d_probes_zero_gain"))
          cfg.gain_study.d_probes_zero_gain.push_back(e.get<double>());
    } else {
      p.fail("method.type", "unknown method '" + type + "'");
    }
  }

  if (p.problems.empty()) validate(p, cfg);
  if (!p.problems.empty()) throw ConfigError(std::move(p.problems));
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open " + path.string()});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.stem().string());
}

PlantState initial_state(const ScenarioConfig& cfg) {
  if (cfg.initial) return *cfg.initial;
  PlantState st;
  st.s = cfg.refs0.s_ref;
  const double share =
      (cfg.plant.s_in - st.s) / (double)cfg.plant.growths.size();
  st.b.assign(cfg.plant.growths.size(), std::max(share, 0.0));
  return st;
}

namespace {

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::string& header)
      : out_(path) {
    if (!out_) throw ConfigError({"cannot write " + path.string()});
    out_ << header << "\n";
  }
  void row(std::initializer_list<double> vals) {
    bool first = true;
    for (double v : vals) {
      if (!first) out_ << ",";
      out_ << format_double(v);
      first = false;
    }
    out_ << "\n";
  }
  void raw(const std::string& line) { out_ << line << "\n"; }

 private:
  std::ofstream out_;
};

const GrowthFunction& truth_for(const ScenarioConfig& cfg) {
  const int idx = cfg.kind == MethodKind::switch_protocol
                      ? cfg.protocol.target_species
                      : 0;
  return cfg.plant.growths[idx];
}

void write_reconstruction(const std::filesystem::path& path,
                          const ReconstructedGraph& g,
                          const GrowthFunction& truth) {
  Csv csv(path, "s,mu_est,mu_true,abs_error,accepted_at,converged");
  for (const GraphPoint& pt : g.points) {
    const double mu_true = truth.value(pt.s);
    csv.row({pt.s, pt.mu_est, mu_true, std::abs(pt.mu_est - mu_true),
             pt.accepted_at, pt.converged ? 1.0 : 0.0});
  }
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg,
                       const std::filesystem::path& out_dir, bool quiet) {
  const auto wall_start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);

  RunReport report;
  ReconstructedGraph graph;
  std::vector<GainStudyRow> study_rows;
  double model_time = 0.0;

  const bool single_loop = cfg.kind != MethodKind::gain_study;
  std::optional<Csv> timeseries;
  if (single_loop) {
    const auto path = out_dir / "timeseries.csv";
    std::string header = "t,s_true,s_measured";
    for (size_t i = 0; i < cfg.plant.growths.size(); ++i)
      header += ",b" + std::to_string(i + 1);
    header += ",d,s_ref,d_ref";
    timeseries.emplace(path, header);
    report.files.push_back(path);
  }

  try {
    if (single_loop) {
      const double drift =
          cfg.kind == MethodKind::drift ? cfg.drift.rate : 0.0;
      ClosedLoop loop(cfg.plant, cfg.controller, cfg.law, cfg.disturbance,
                      initial_state(cfg), cfg.refs0, drift);
      double last_record = -1e18;
      loop.set_observer([&](const ClosedLoop& l) {
        if (l.time() - last_record >= cfg.record_every - 0.5 * cfg.h) {
          last_record = l.time();
          const PlantState& st = l.state();
          std::string line = format_double(st.t) + "," +
                             format_double(st.s) + "," +
                             format_double(l.measured());
          for (double b : st.b) line += "," + format_double(b);
          line += "," + format_double(l.dilution()) + "," +
                  format_double(l.refs().s_ref) + "," +
                  format_double(l.refs().d_ref);
          timeseries->raw(line);
        }
      });

      switch (cfg.kind) {
        case MethodKind::drift: {
          DriftWindow win{cfg.drift.s_lo, cfg.drift.s_hi, cfg.drift.max_time,
                          cfg.record_every};
          graph = drift_reconstruct(loop, win, cfg.h);
          break;
        }
        case MethodKind::newton: {
          SimulatedMap map(loop, cfg.settle, cfg.h);
          graph = newton_reconstruct(cfg.newton, map, cfg.controller);
          break;
        }
        case MethodKind::secant: {
          SimulatedMap map(loop, cfg.settle, cfg.h);
          std::pair<double, double> s0, s1;
          if (cfg.secant.seed_points) {
            s0 = (*cfg.secant.seed_points)[0];
            s1 = (*cfg.secant.seed_points)[1];
          } else {
            NewtonConfig seed_nc;
            seed_nc.s_grid = {cfg.secant.seed_grid[0], cfg.secant.seed_grid[1]};
            seed_nc.tol = cfg.secant.seed_tol;
            const ReconstructedGraph seeds =
                newton_reconstruct(seed_nc, map, cfg.controller);
            s0 = {seeds.points[0].s, seeds.points[0].mu_est};
            s1 = {seeds.points[1].s, seeds.points[1].mu_est};
            graph.points = seeds.points;
          }
          const ReconstructedGraph cont = secant_reconstruct(
              cfg.secant.cfg, s0, s1, map, cfg.controller);
          graph.points.insert(graph.points.end(), cont.points.begin(),
                              cont.points.end());
          break;
        }
        case MethodKind::switch_protocol:
          graph = run_switch_protocol(loop, cfg.protocol, cfg.settle, cfg.h);
          break;
        case MethodKind::gain_study:
          break;  // unreachable
      }
      model_time = loop.time();
    } else {
      study_rows = gain_accuracy_study(cfg.gain_study, cfg.plant,
                                       cfg.controller, cfg.disturbance,
                                       cfg.settle, initial_state(cfg), cfg.h);
    }
  } catch (const NumericalBlowup& e) {
    report.exit_code = 3;
    report.summary = std::string("numerical failure: ") + e.what();
    if (!quiet) std::fputs((report.summary + "\n").c_str(), stdout);
    return report;
  }

  // Reconstruction table and error statistics against the known growth law.
  int unconverged = 0;
  double max_err = 0.0, mean_err = 0.0;
  long counted = 0;
  if (single_loop) {
    const GrowthFunction& truth = truth_for(cfg);
    const auto path = out_dir / "reconstruction.csv";
    write_reconstruction(path, graph, truth);
    report.files.push_back(path);
    for (const GraphPoint& pt : graph.points) {
      if (!pt.converged) ++unconverged;
      if (pt.accepted_at < cfg.error_skip) continue;
      const double err = std::abs(pt.mu_est - truth.value(pt.s));
      max_err = std::max(max_err, err);
      mean_err += err;
      ++counted;
    }
  } else {
    const auto path = out_dir / "gain_study.csv";
    Csv csv(path, "gain_prop,s,mu_est,mu_true,rel_error,converged");
    for (const GainStudyRow& r : study_rows) {
      if (!r.converged) ++unconverged;
      csv.row({r.gain, r.s, r.mu_est, r.mu_target, r.rel_error,
               r.converged ? 1.0 : 0.0});
      max_err = std::max(max_err, std::abs(r.mu_est - r.mu_target));
      mean_err += std::abs(r.mu_est - r.mu_target);
      ++counted;
    }
    report.files.push_back(path);
  }
  if (counted > 0) mean_err /= counted;

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    wall_start)
          .count();
  report.exit_code = unconverged > 0 ? 1 : 0;
  report.model_time = model_time;

  static const char* kNames[] = {"drift", "newton", "secant", "switch",
                                 "gain_study"};
  std::ostringstream sum;
  sum << "scenario: " << cfg.name << "\n"
      << "method: " << kNames[(int)cfg.kind] << "\n"
      << "points: " << (single_loop ? graph.points.size() : study_rows.size())
      << "\n"
      << "unconverged: " << unconverged << "\n"
      << "max_abs_error: " << format_double(max_err) << "\n"
      << "mean_abs_error: " << format_double(mean_err) << "\n"
      << "model_time: " << format_double(model_time) << "\n"
      << "wall_time_s: " << format_double(wall) << "\n"
      << "exit: " << report.exit_code << "\n";
  report.summary = sum.str();

  const auto sum_path = out_dir / "summary.txt";
  std::ofstream sout(sum_path);
  sout << report.summary;
  report.files.push_back(sum_path);

  if (!quiet) std::fputs(report.summary.c_str(), stdout);
  return report;
}

RunReport write_reference_outputs(const ScenarioConfig& cfg,
                                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunReport report;
  if (cfg.plant.growths.size() == 1) {
    std::vector<double> grid;
    if (cfg.kind == MethodKind::newton && !cfg.newton.s_grid.empty()) {
      grid = cfg.newton.s_grid;
    } else {
      for (int i = 1; i < 50; ++i) grid.push_back(cfg.plant.s_in * i / 50.0);
    }
    const auto curve =
        oracle_curve(cfg.plant.growths[0], cfg.controller, cfg.plant.s_in, grid);
    const auto path = out_dir / "oracle.csv";
    Csv csv(path, "s,mu_oracle,mu_true,abs_diff");
    for (const auto& [s, mu] : curve) {
      const double mu_true = cfg.plant.growths[0].value(s);
      csv.row({s, mu, mu_true, std::abs(mu - mu_true)});
    }
    report.files.push_back(path);
    report.summary = "wrote oracle curve (" + std::to_string(curve.size()) +
                     " points) to " + path.string() + "\n";
  } else {
    const auto path = out_dir / "eigenvalues.csv";
    Csv csv(path,
            "s_ref,index,re_closed_form,im_closed_form,re_numerical,"
            "im_numerical");
    for (double frac : {0.2, 0.35, 0.5, 0.65, 0.8}) {
      const double s_ref = cfg.plant.s_in * frac;
      const auto closed = eigs_excluded_closed_form(
          cfg.plant.growths[0], cfg.plant.growths[1], s_ref, cfg.plant.s_in,
          cfg.controller, cfg.law);
      auto numeric = eigs_excluded_numerical(
          cfg.plant.growths[0], cfg.plant.growths[1], s_ref, cfg.plant.s_in,
          cfg.controller, cfg.law);
      // Pair each closed-form eigenvalue with its nearest numerical one.
      for (size_t i = 0; i < closed.size(); ++i) {
        size_t best = 0;
        for (size_t k = 1; k < numeric.size(); ++k)
          if (std::abs(numeric[k] - closed[i]) <
              std::abs(numeric[best] - closed[i]))
            best = k;
        csv.row({s_ref, (double)i, closed[i].real(), closed[i].imag(),
                 numeric[best].real(), numeric[best].imag()});
      }
    }
    report.files.push_back(path);
    report.summary = "wrote eigenvalue report to " + path.string() + "\n";
  }
  return report;
}

}  // namespace chemo
