#include "facilitrans/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace facilitrans {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path + ": " + what);
}

// Object view that records consumed keys and rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& node(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) fail(at(key), "missing required key");
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const json& v = node(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(at(key), "wrong type");
    }
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    return get<T>(key);
  }

  template <typename T>
  std::optional<T> maybe(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return get<T>(key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) fail(at(item.key()), "unknown key");
    }
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Complex parse_amplitude(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<Real>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<Real>(), v[1].get<Real>()};
  }
  fail(path, "amplitude must be a number or [re, im]");
}

Vec3 parse_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected three numbers");
  Vec3 out;
  for (int k = 0; k < 3; ++k) {
    if (!v[static_cast<std::size_t>(k)].is_number()) fail(path, "expected three numbers");
    out[k] = v[static_cast<std::size_t>(k)].get<Real>();
  }
  return out;
}

template <typename Fn>
auto rethrow_as_config(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail(path, e.what());
  }
}

}  // namespace

PulseSchedule RunConfig::resolved_schedule() const {
  if (schedule) return *schedule;
  if (route) return plan_route(geometry, route->start, route->waypoints);
  throw Error(ErrorCode::Config, "config: needs 'schedule' or 'route'");
}

QuantumState RunConfig::initial_state() const {
  const int n = geometry.n_sites();
  PureState pure = [&] {
    switch (initial.kind) {
      case InitialSpec::Kind::Excitation: return single_excitation(n, initial.site);
      case InitialSpec::Kind::Bell: return bell_pair(n, initial.site_a, initial.site_b);
      case InitialSpec::Kind::Patterns: {
        std::vector<OccupationPattern> pats;
        for (const auto& p : initial.patterns) pats.push_back(OccupationPattern::from_string(p));
        return make_pure(pats, initial.amplitudes);
      }
    }
    throw Error(ErrorCode::Config, "initial: unknown type");
  }();
  if (initial.density || params.dissipative()) return to_density(pure);
  return pure;
}

TransportProblem RunConfig::problem() const {
  if (!in_site || !out_site) throw Error(ErrorCode::Config, "config.measure: in_site and out_site required");
  return TransportProblem{geometry, params, resolved_schedule(), *in_site, *out_site, options};
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  cfg.source = doc;
  Reader root(doc, "config");

  cfg.output_dir = root.get<std::string>("output_dir", "out");
  cfg.seed = root.get<std::uint64_t>("seed", 0);

  if (root.has("physical_units")) {
    Reader u(root.node("physical_units"), "config.physical_units");
    PhysicalUnits units;
    units.omega_2pi_mhz = u.get<Real>("omega_2pi_mhz");
    units.length_unit_um = u.get<Real>("r1_um");
    u.finish();
    if (!(units.omega_2pi_mhz > 0.0) || !(units.length_unit_um > 0.0)) {
      fail("config.physical_units", "omega_2pi_mhz and r1_um must be positive");
    }
    cfg.units = units;
  } else {
    root.get<json>("physical_units", json());
  }

  {
    Reader m(root.node("model"), "config.model");
    auto& p = cfg.params;
    p.omega = m.get<Real>("omega", 1.0);
    p.v1 = m.get<Real>("v1");
    p.v2 = m.get<Real>("v2");
    p.d_delta1 = m.get<Real>("d_delta1", 0.0);
    p.d_delta2 = m.get<Real>("d_delta2", 0.0);
    p.include_nnn = m.get<bool>("include_nnn", true);
    p.c6 = m.maybe<Real>("c6");
    p.gamma_decay = m.get<Real>("gamma_decay", 0.0);
    p.gamma_deph = m.get<Real>("gamma_deph", 0.0);
    p.period_scale = m.get<Real>("period_scale", 1.0);
    m.finish();
    rethrow_as_config("config.model", [&] { p.validate(); return 0; });
  }

  {
    Reader c(root.node("chain"), "config.chain");
    const int n = c.get<int>("n_sites");
    const Real r1 = c.get<Real>("r1", 1.0);
    const Real c6 = cfg.params.c6 ? *cfg.params.c6 : cfg.params.v1 * std::pow(r1, 6);
    const Real r2_default = std::pow(c6 / cfg.params.v2, 1.0 / 6.0);
    const Real r2 = c.get<Real>("r2", r2_default);
    c.finish();
    cfg.geometry = rethrow_as_config("config.chain", [&] { return ChainGeometry(n, r1, r2); });
  }

  if (root.has("schedule") && root.has("route")) fail("config", "give either 'schedule' or 'route'");
  if (root.has("schedule")) {
    const json& s = root.node("schedule");
    if (!s.is_array()) fail("config.schedule", "expected a list of pulses");
    PulseSchedule schedule;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string path = "config.schedule[" + std::to_string(i) + "]";
      if (s[i].is_number_integer()) {
        schedule.tokens.push_back(PulseToken{s[i].get<int>(), 1.0, std::nullopt});
        continue;
      }
      Reader t(s[i], path);
      PulseToken token;
      token.detuning_index = t.get<int>("pulse");
      token.duration_in_T = t.get<Real>("duration", 1.0);
      token.d_delta = t.maybe<Real>("d_delta");
      t.finish();
      schedule.tokens.push_back(token);
    }
    rethrow_as_config("config.schedule", [&] { schedule.validate(); return 0; });
    cfg.schedule = schedule;
  } else {
    root.get<json>("schedule", json());
  }
  if (root.has("route")) {
    Reader r(root.node("route"), "config.route");
    RouteSpec route;
    route.start = r.get<int>("start");
    route.waypoints = r.get<std::vector<int>>("waypoints");
    r.finish();
    cfg.route = route;
  } else {
    root.get<json>("route", json());
  }

  const bool has_initial = root.has("initial");
  if (has_initial) {
    Reader i(root.node("initial"), "config.initial");
    const auto type = i.get<std::string>("type");
    auto& init = cfg.initial;
    init.density = i.get<bool>("density", false);
    if (type == "excitation") {
      init.kind = InitialSpec::Kind::Excitation;
      init.site = i.get<int>("site");
    } else if (type == "bell") {
      init.kind = InitialSpec::Kind::Bell;
      const auto sites = i.get<std::vector<int>>("sites");
      if (sites.size() != 2) fail(i.at("sites"), "expected two sites");
      init.site_a = sites[0];
      init.site_b = sites[1];
    } else if (type == "patterns") {
      init.kind = InitialSpec::Kind::Patterns;
      init.patterns = i.get<std::vector<std::string>>("patterns");
      const json& amps = i.node("amplitudes");
      if (!amps.is_array()) fail(i.at("amplitudes"), "expected a list");
      for (std::size_t k = 0; k < amps.size(); ++k) {
        init.amplitudes.push_back(parse_amplitude(amps[k], i.at("amplitudes")));
      }
    } else {
      fail(i.at("type"), "must be excitation, bell or patterns");
    }
    i.finish();
    rethrow_as_config("config.initial", [&] { return n_sites_of(cfg.initial_state()); });
  } else {
    root.get<json>("initial", json());
  }

  if (root.has("measure")) {
    Reader m(root.node("measure"), "config.measure");
    cfg.in_site = m.get<int>("in_site");
    cfg.out_site = m.get<int>("out_site");
    m.finish();
    const int n = cfg.geometry.n_sites();
    if (*cfg.in_site < 1 || *cfg.in_site > n || *cfg.out_site < 1 || *cfg.out_site > n) {
      fail("config.measure", "sites outside the chain");
    }
  } else {
    root.get<json>("measure", json());
  }
  // Without an explicit initial state, start from an excitation on the input site.
  if (!has_initial && cfg.in_site) cfg.initial.site = *cfg.in_site;

  if (root.has("simulation")) {
    Reader s(root.node("simulation"), "config.simulation");
    cfg.options.samples_per_pulse = s.get<int>("samples_per_pulse", 50);
    cfg.options.tol = s.get<Real>("tol", 1e-8);
    cfg.options.frame_correction = s.get<bool>("frame_correction", true);
    s.finish();
    if (cfg.options.samples_per_pulse < 1) fail(s.at("samples_per_pulse"), "must be at least 1");
    if (!(cfg.options.tol > 0.0)) fail(s.at("tol"), "must be positive");
  } else {
    root.get<json>("simulation", json());
  }

  if (root.has("disorder")) {
    Reader d(root.node("disorder"), "config.disorder");
    DisorderSpec spec;
    const bool internal = d.has("sigma");
    const bool lab = d.has("sigma_nm");
    if (internal == lab) fail("config.disorder", "give exactly one of 'sigma' or 'sigma_nm'");
    if (internal) {
      spec.sigma = parse_vec3(d.node("sigma"), d.at("sigma"));
      d.get<json>("sigma_nm", json());
    } else {
      if (!cfg.units) fail(d.at("sigma_nm"), "requires a physical_units block");
      const Vec3 nm = parse_vec3(d.node("sigma_nm"), d.at("sigma_nm"));
      for (int k = 0; k < 3; ++k) spec.sigma[k] = cfg.units->length_from_nm(nm[k]) * cfg.geometry.r1();
      d.get<json>("sigma", json());
    }
    spec.n_realizations = d.get<int>("n_realizations", 50);
    spec.base_seed = cfg.seed;
    cfg.mc_draws = d.get<int>("mc_draws", 100000);
    d.finish();
    rethrow_as_config("config.disorder", [&] { spec.validate(); return 0; });
    if (cfg.mc_draws < 1) fail(d.at("mc_draws"), "must be positive");
    cfg.disorder = spec;
  } else {
    root.get<json>("disorder", json());
  }

  if (root.has("scan")) {
    Reader s(root.node("scan"), "config.scan");
    ScanGrid grid;
    grid.objective = rethrow_as_config(s.at("objective"), [&] {
      return objective_from_string(s.get<std::string>("objective", "truth_table"));
    });
    const json& axes = s.node("axes");
    if (!axes.is_array()) fail(s.at("axes"), "expected a list");
    for (std::size_t k = 0; k < axes.size(); ++k) {
      Reader a(axes[k], s.at("axes") + "[" + std::to_string(k) + "]");
      ScanAxis axis;
      axis.name = a.get<std::string>("name");
      axis.min = a.get<Real>("min");
      axis.max = a.get<Real>("max");
      axis.count = a.get<int>("count");
      a.finish();
      grid.axes.push_back(axis);
    }
    s.finish();
    rethrow_as_config("config.scan", [&] { grid.validate(); return 0; });
    cfg.scan = grid;
  } else {
    root.get<json>("scan", json());
  }

  if (root.has("optimize")) {
    Reader o(root.node("optimize"), "config.optimize");
    OptimizeSpec spec;
    spec.objective = rethrow_as_config(o.at("objective"), [&] {
      return objective_from_string(o.get<std::string>("objective", "truth_table"));
    });
    spec.names = o.get<std::vector<std::string>>("parameters");
    spec.start = o.maybe<std::vector<Real>>("start");
    spec.lower = o.get<std::vector<Real>>("lower");
    spec.upper = o.get<std::vector<Real>>("upper");
    spec.settings.max_iterations = o.get<int>("max_iterations", 200);
    spec.settings.spread_tolerance = o.get<Real>("spread_tolerance", 1e-5);
    o.finish();
    for (const auto& name : spec.names) {
      rethrow_as_config(o.at("parameters"), [&] { return get_parameter(cfg.params, name); });
    }
    const std::size_t dim = spec.names.size();
    if (dim == 0 || spec.lower.size() != dim || spec.upper.size() != dim ||
        (spec.start && spec.start->size() != dim)) {
      fail("config.optimize", "parameters, start, lower and upper must have equal length");
    }
    cfg.optimize = spec;
  } else {
    root.get<json>("optimize", json());
  }

  root.finish();

  if (cfg.route) {
    rethrow_as_config("config.route", [&] { return cfg.resolved_schedule().size(); });
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, path + ": " + e.what());
  }
  return parse_config(doc);
}

std::uint64_t config_hash(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace facilitrans
