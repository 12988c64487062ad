#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "inclab/errors.hpp"
#include "inclab/experiments.hpp"

namespace inclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Reads keys from one JSON object and rejects any key it was not asked for.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const nlohmann::json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

nlohmann::json bound_to_json(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

double bound_from_json(const nlohmann::json* j, double unbounded) {
  return (j == nullptr || j->is_null()) ? unbounded : j->get<double>();
}

FunctionalEvent endpoint_nonpositive() {
  return {"endpoint_nonpositive", event::PointHalfSpace{{}, 0.0, true}};
}

void read_grid(Section& s, const char* key, AnchorGrid& g) {
  if (const auto* j = s.sub(key)) {
    Section t(*j, s.path(key));
    t.get("lo", g.lo);
    t.get("hi", g.hi);
    t.get("u_res", g.u_res);
    t.get("m", g.m);
    t.finish();
  }
}

nlohmann::json grid_json(const AnchorGrid& g) { return {{"lo", g.lo}, {"hi", g.hi}, {"u_res", g.u_res}, {"m", g.m}}; }

FunctionalEvent read_event(const nlohmann::json& j, const std::string& path) {
  try {
    return functional_event_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.wschebor.sets = {
      {"negative_half_line", -kInf, 0.0, 0.01, "AC5"},
      {"unit_interval", -1.0, 1.0, 0.01, "AC5"},
      {"real_line", -kInf, kInf, 1e-12, ""},
  };
  c.theorem1.events = {
      {endpoint_nonpositive(), 0.5, 0.03, "AC6"},
      {{"unit_sup_ball", event::SupBall{1.0}}, std::nullopt, 0.05, "AC6"},
  };
  c.char_functional.cases = {
      {{{0.5}, {0.7}}, {1.0, 1.0}, 0.04, "AC7"},
      {{{1.0}}, {1.0}, 0.04, ""},
      {{{0.5}}, {0.0}, 1e-12, ""},
  };
  c.variance.event = endpoint_nonpositive();
  return c;
}

void ExperimentConfig::override_replicas(std::size_t replicas) {
  if (replicas == 0) throw ConfigError("--replicas must be positive");
  theorem1.mc_paths = replicas;
  variance.replicas = replicas;
  clt.replicas = replicas;
  theorem3.law_replicas = replicas;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c = ExperimentConfig::defaults();
  Section root(j, "config");
  root.get("schema_version", c.schema_version);
  if (c.schema_version != kConfigSchemaVersion) {
    throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version) + " (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  }
  root.get("seed", c.seed);

  if (const auto* w = root.sub("wschebor")) {
    Section s(*w, "config.wschebor");
    s.get("dt", c.wschebor.dt);
    s.get("a", c.wschebor.a);
    s.get("b", c.wschebor.b);
    s.get("epsilons", c.wschebor.epsilons);
    if (const auto* sets = s.sub("sets")) {
      c.wschebor.sets.clear();
      for (const auto& e : *sets) {
        Section t(e, "config.wschebor.sets[]");
        IntervalSet set;
        t.get("name", set.name);
        set.lo = bound_from_json(t.sub("lo"), -kInf);
        set.hi = bound_from_json(t.sub("hi"), kInf);
        t.get("tolerance", set.tolerance);
        t.get("criterion", set.criterion);
        t.finish();
        c.wschebor.sets.push_back(set);
      }
    }
    s.finish();
  }

  if (const auto* t1 = root.sub("theorem1")) {
    Section s(*t1, "config.theorem1");
    auto& t = c.theorem1;
    s.get("d", t.d);
    s.get("n", t.n);
    s.get("beta", t.beta);
    read_grid(s, "grid", t.grid);
    s.get("mc_paths", t.mc_paths);
    if (const auto* evs = s.sub("events")) {
      t.events.clear();
      for (const auto& e : *evs) {
        Section u(e, "config.theorem1.events[]");
        EventCheck check;
        const auto* ev = u.sub("event");
        if (!ev) throw ConfigError("config.theorem1.events[]: missing 'event'");
        check.event = read_event(*ev, "config.theorem1.events[].event");
        if (const auto* target = u.sub("target"); target && !target->is_null()) check.target = target->get<double>();
        u.get("tolerance", check.tolerance);
        u.get("criterion", check.criterion);
        u.finish();
        t.events.push_back(check);
      }
    }
    s.get("oscillation_deltas", t.oscillation_deltas);
    s.get("oscillation_eps", t.oscillation_eps);
    s.finish();
  }

  if (const auto* ch = root.sub("char")) {
    Section s(*ch, "config.char");
    auto& t = c.char_functional;
    s.get("d", t.d);
    s.get("n", t.n);
    s.get("beta", t.beta);
    read_grid(s, "grid", t.grid);
    if (const auto* cases = s.sub("cases")) {
      t.cases.clear();
      for (const auto& e : *cases) {
        Section u(e, "config.char.cases[]");
        CharCase cc;
        u.get("points", cc.points);
        u.get("thetas", cc.thetas);
        u.get("tolerance", cc.tolerance);
        u.get("criterion", cc.criterion);
        u.finish();
        t.cases.push_back(cc);
      }
    }
    s.finish();
  }

  if (const auto* v = root.sub("variance")) {
    Section s(*v, "config.variance");
    auto& t = c.variance;
    s.get("d", t.d);
    s.get("n", t.n);
    s.get("beta", t.beta);
    if (const auto* dn = s.sub("doubling_n")) {
      t.doubling_n = dn->is_null() ? std::nullopt : std::optional<std::uint64_t>(dn->get<std::uint64_t>());
    }
    s.get("lo", t.lo);
    s.get("hi", t.hi);
    s.get("anchor_spacing", t.anchor_spacing);
    s.get("m", t.m);
    s.get("replicas", t.replicas);
    if (const auto* e = s.sub("event")) t.event = read_event(*e, "config.variance.event");
    s.get("band", t.band);
    s.get("reference_replicas", t.reference_replicas);
    s.finish();
  }

  if (const auto* cl = root.sub("clt")) {
    Section s(*cl, "config.clt");
    auto& t = c.clt;
    s.get("n", t.n);
    s.get("beta", t.beta);
    s.get("m", t.m);
    s.get("replicas", t.replicas);
    s.get("alpha", t.alpha);
    s.get("marginals", t.marginals);
    s.get("pair", t.pair);
    s.get("cov_tolerance", t.cov_tolerance);
    s.get("mean_tolerance", t.mean_tolerance);
    s.finish();
  }

  if (const auto* t2 = root.sub("theorem2")) {
    Section s(*t2, "config.theorem2");
    auto& t = c.theorem2;
    s.get("d", t.d);
    s.get("beta", t.beta);
    s.get("n_min", t.n_min);
    s.get("n_max", t.n_max);
    s.get("trend_n", t.trend_n);
    read_grid(s, "grid", t.grid);
    s.get("epsilon", t.epsilon);
    s.get("trend_tolerance", t.trend_tolerance);
    s.get("target_densities", t.target_densities);
    s.get("sup_fraction_floor", t.sup_fraction_floor);
    s.finish();
  }

  if (const auto* t3 = root.sub("theorem3")) {
    Section s(*t3, "config.theorem3");
    auto& t = c.theorem3;
    s.get("d", t.d);
    s.get("c", t.c);
    s.get("n", t.n);
    read_grid(s, "grid", t.grid);
    s.get("epsilon", t.epsilon);
    s.get("target_densities", t.target_densities);
    s.get("law_n", t.law_n);
    s.get("law_replicas", t.law_replicas);
    s.get("alpha", t.alpha);
    s.finish();
  }

  if (const auto* p = root.sub("poissonization")) {
    Section s(*p, "config.poissonization");
    auto& t = c.poissonization;
    s.get("factor2_cases", t.factor2.cases);
    s.get("max_n", t.factor2.max_n);
    s.get("max_atoms", t.factor2.max_atoms);
    t.independence.max_atoms = t.factor2.max_atoms;
    s.get("independence_cases", t.independence.cases);
    s.get("max_mean", t.independence.max_mean);
    s.get("exists_forall_cases", t.exists_forall_cases);
    s.finish();
  }
  root.finish();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& s : c.wschebor.sets) {
    sets.push_back({{"name", s.name},
                    {"lo", bound_to_json(s.lo)},
                    {"hi", bound_to_json(s.hi)},
                    {"tolerance", s.tolerance},
                    {"criterion", s.criterion}});
  }
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : c.theorem1.events) {
    events.push_back({{"event", to_json(e.event)},
                      {"target", e.target ? nlohmann::json(*e.target) : nlohmann::json(nullptr)},
                      {"tolerance", e.tolerance},
                      {"criterion", e.criterion}});
  }
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& cc : c.char_functional.cases) {
    cases.push_back(
        {{"points", cc.points}, {"thetas", cc.thetas}, {"tolerance", cc.tolerance}, {"criterion", cc.criterion}});
  }
  const auto& v = c.variance;
  const auto& p = c.poissonization;
  return {
      {"schema_version", c.schema_version},
      {"seed", c.seed},
      {"wschebor", {{"dt", c.wschebor.dt}, {"a", c.wschebor.a}, {"b", c.wschebor.b},
                    {"epsilons", c.wschebor.epsilons}, {"sets", sets}}},
      {"theorem1", {{"d", c.theorem1.d}, {"n", c.theorem1.n}, {"beta", c.theorem1.beta},
                    {"grid", grid_json(c.theorem1.grid)}, {"mc_paths", c.theorem1.mc_paths}, {"events", events},
                    {"oscillation_deltas", c.theorem1.oscillation_deltas},
                    {"oscillation_eps", c.theorem1.oscillation_eps}}},
      {"char", {{"d", c.char_functional.d}, {"n", c.char_functional.n}, {"beta", c.char_functional.beta},
                {"grid", grid_json(c.char_functional.grid)}, {"cases", cases}}},
      {"variance", {{"d", v.d}, {"n", v.n}, {"beta", v.beta},
                    {"doubling_n", v.doubling_n ? nlohmann::json(*v.doubling_n) : nlohmann::json(nullptr)},
                    {"lo", v.lo}, {"hi", v.hi}, {"anchor_spacing", v.anchor_spacing}, {"m", v.m},
                    {"replicas", v.replicas}, {"event", to_json(v.event)}, {"band", v.band},
                    {"reference_replicas", v.reference_replicas}}},
      {"clt", {{"n", c.clt.n}, {"beta", c.clt.beta}, {"m", c.clt.m}, {"replicas", c.clt.replicas},
               {"alpha", c.clt.alpha}, {"marginals", c.clt.marginals}, {"pair", c.clt.pair},
               {"cov_tolerance", c.clt.cov_tolerance}, {"mean_tolerance", c.clt.mean_tolerance}}},
      {"theorem2", {{"d", c.theorem2.d}, {"beta", c.theorem2.beta}, {"n_min", c.theorem2.n_min},
                    {"n_max", c.theorem2.n_max}, {"trend_n", c.theorem2.trend_n},
                    {"grid", grid_json(c.theorem2.grid)}, {"epsilon", c.theorem2.epsilon},
                    {"trend_tolerance", c.theorem2.trend_tolerance},
                    {"target_densities", c.theorem2.target_densities},
                    {"sup_fraction_floor", c.theorem2.sup_fraction_floor}}},
      {"theorem3", {{"d", c.theorem3.d}, {"c", c.theorem3.c}, {"n", c.theorem3.n},
                    {"grid", grid_json(c.theorem3.grid)}, {"epsilon", c.theorem3.epsilon},
                    {"target_densities", c.theorem3.target_densities}, {"law_n", c.theorem3.law_n},
                    {"law_replicas", c.theorem3.law_replicas}, {"alpha", c.theorem3.alpha}}},
      {"poissonization", {{"factor2_cases", p.factor2.cases}, {"max_n", p.factor2.max_n},
                          {"max_atoms", p.factor2.max_atoms}, {"independence_cases", p.independence.cases},
                          {"max_mean", p.independence.max_mean},
                          {"exists_forall_cases", p.exists_forall_cases}}},
  };
}

SeedStream experiment_seed(std::uint64_t root, const std::string& experiment) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : experiment) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return SeedStream(root).child(h);
}

double log_log(double n) {
  if (!(n > std::exp(1.0))) throw ConfigError("log log n needs n > e, got n = " + std::to_string(n));
  return std::log(std::log(n));
}

std::vector<std::uint64_t> subsequence_schedule(std::uint64_t n_min, std::uint64_t n_max) {
  std::vector<std::uint64_t> out;
  for (int k = 3;; ++k) {
    const double v = std::floor(std::exp(k / std::log(static_cast<double>(k))));
    if (v > static_cast<double>(n_max)) break;
    const auto n = static_cast<std::uint64_t>(v);
    if (n >= n_min && (out.empty() || out.back() != n)) out.push_back(n);
  }
  return out;
}

ScheduleRatios schedule_ratios(std::uint64_t n, double a, int d) {
  ScheduleRatios r;
  r.n = n;
  r.a = a;
  const double ll = log_log(static_cast<double>(n));
  r.window_mass = static_cast<double>(n) * std::pow(a, d);
  r.scale_ratio = std::log(1.0 / a) / ll;
  r.mass_ratio = r.window_mass / ll;
  return r;
}

nlohmann::json to_json(const ScheduleRatios& r) {
  return {{"n", r.n},
          {"a", r.a},
          {"n_a_d", r.window_mass},
          {"log_inv_a_over_loglog_n", r.scale_ratio},
          {"n_a_d_over_loglog_n", r.mass_ratio}};
}

std::vector<std::vector<double>> sheet_covariance(const std::vector<std::vector<double>>& points) {
  const std::size_t p = points.size();
  std::vector<std::vector<double>> s(p, std::vector<double>(p, 1.0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      if (points[i].size() != points[k].size()) throw ShapeError("covariance points differ in dimension");
      for (std::size_t j = 0; j < points[i].size(); ++j) s[i][k] *= std::min(points[i][j], points[k][j]);
    }
  }
  return s;
}

}  // namespace inclab
