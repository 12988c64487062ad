#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "inclab/errors.hpp"
#include "inclab/experiments.hpp"
#include "inclab/increments.hpp"
#include "inclab/parallel.hpp"
#include "inclab/sampling.hpp"
#include "inclab/stats.hpp"

namespace inclab {

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

WindowConfig make_window(double a, const AnchorGrid& g, int d) {
  WindowConfig w;
  w.a = a;
  w.lo = g.lo;
  w.hi = g.hi;
  w.u_res = g.u_res;
  w.t_spec = GridSpec(d, g.m);
  w.validate();
  return w;
}

double power_scale(std::uint64_t n, double beta) { return std::pow(static_cast<double>(n), -beta); }

// Power schedule assumptions: a_n = n^-beta decreasing, n a_n^d increasing and
// log(1/a_n) / log log n > min_ratio at every scheduled n.
std::vector<ScheduleRatios> check_power_schedule(const std::vector<std::uint64_t>& ns, double beta, int d,
                                                 double min_ratio, const std::string& who) {
  if (d < 1) throw ConfigError(who + ": d must be >= 1");
  if (!(beta > 0) || !(beta * d < 1)) {
    throw ConfigError(who + ": a_n = n^-beta needs 0 < beta < 1/d so that a_n -> 0 and n a_n^d -> inf (beta = " +
                      fmt(beta) + ", d = " + std::to_string(d) + ")");
  }
  std::vector<ScheduleRatios> out;
  for (auto n : ns) {
    const auto r = schedule_ratios(n, power_scale(n, beta), d);
    if (!(r.scale_ratio > min_ratio)) {
      throw ConfigError(who + ": log(1/a_n)/log log n = " + fmt(r.scale_ratio) + " at n = " + std::to_string(n) +
                        " must exceed " + fmt(min_ratio));
    }
    out.push_back(r);
  }
  return out;
}

// Index of lattice point t in the (m+1)^d offset lattice.
std::size_t lattice_point(const std::vector<double>& t, const GridSpec& spec, const std::string& who) {
  if (static_cast<int>(t.size()) != spec.d) throw ConfigError(who + ": point dimension differs from d");
  std::vector<int> idx(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double j = std::round(t[k] * spec.m);
    if (t[k] < 0 || t[k] > 1 || std::abs(j - t[k] * spec.m) > 1e-9) {
      throw ConfigError(who + ": point coordinate " + fmt(t[k]) + " is not on the 1/" + std::to_string(spec.m) +
                        " offset lattice");
    }
    idx[k] = static_cast<int>(j);
  }
  return flat_index(idx, spec.m + 1);
}

double serial_fraction(const IncrementField& field, const FunctionalEvent& e) {
  const std::size_t anchors = field.config.anchor_count();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < anchors; ++i) hits += holds(e, slice(field, i)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(anchors);
}

// Exact P(K <= k_max) style probabilities for endpoint half-spaces of a
// Poissonized increment; nullopt for other events.
std::optional<double> exact_poissonized_probability(const FunctionalEvent& e, double window_mass) {
  const auto* h = std::get_if<event::PointHalfSpace>(&e.predicate);
  if (!h) return std::nullopt;
  for (double t : h->point) {
    if (t != 1.0) return std::nullopt;
  }
  // f(1) = (K - mu) / sqrt(mu) with K ~ Poisson(mu).
  const double x = window_mass + h->threshold * std::sqrt(window_mass);
  if (h->leq) {
    if (x < 0) return 0.0;
    return poisson_cdf(static_cast<std::uint64_t>(std::floor(x)), window_mass);
  }
  const double k = std::ceil(x);
  if (k <= 0) return 1.0;
  return poisson_tail_above(static_cast<std::uint64_t>(k) - 1, window_mass);
}

}  // namespace

Report run_wschebor(const WschConfig& c, const SeedStream& seed) {
  if (!(c.dt > 0)) throw ConfigError("wschebor: dt must be positive");
  if (!(c.a >= 0 && c.a < c.b)) throw ConfigError("wschebor: need 0 <= a < b");
  if (c.epsilons.empty()) throw ConfigError("wschebor: empty epsilon schedule");
  for (std::size_t i = 1; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] < c.epsilons[i - 1])) throw ConfigError("wschebor: epsilon schedule must be decreasing");
  }
  std::vector<std::size_t> lags;
  for (double eps : c.epsilons) {
    if (eps < c.dt) {
      throw ConfigError("wschebor: epsilon " + fmt(eps) + " is below the path resolution dt = " + fmt(c.dt));
    }
    const double k = std::round(eps / c.dt);
    if (std::abs(k * c.dt - eps) > 1e-9 * eps) {
      throw ConfigError("wschebor: epsilon " + fmt(eps) + " is not a multiple of dt = " + fmt(c.dt));
    }
    lags.push_back(static_cast<std::size_t>(k));
  }

  const auto first = static_cast<std::size_t>(std::llround(c.a / c.dt));
  const auto count = static_cast<std::size_t>(std::llround((c.b - c.a) / c.dt));
  const std::size_t steps = first + count + lags.front();
  const auto path = sample_brownian_path(steps, c.dt, seed.child(stream_tag::kPath));

  Report rep;
  rep.experiment = "wschebor";
  rep.seed = to_json(seed);
  rep.columns = {"epsilon", "set", "measure", "target"};
  rep.statistics["path_steps"] = steps;
  rep.statistics["grid_points"] = count;
  for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
    const double eps = c.epsilons[e];
    const double scale = 1.0 / std::sqrt(eps);
    for (const auto& set : c.sets) {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < count; ++i) {
        const double z = (path[first + i + lags[e]] - path[first + i]) * scale;
        hits += (z >= set.lo && z <= set.hi) ? 1 : 0;
      }
      const double measure = (c.b - c.a) * static_cast<double>(hits) / static_cast<double>(count);
      const double target = (c.b - c.a) * (normal_cdf(set.hi) - normal_cdf(set.lo));
      rep.verdicts.push_back(within(set.name + " @ eps=" + fmt(eps), set.criterion, measure, target, set.tolerance));
      rep.rows.push_back({eps, set.name, measure, target});
      rep.statistics["measures"][set.name].push_back({{"epsilon", eps}, {"measure", measure}, {"target", target}});
    }
  }
  return rep;
}

Report run_theorem1(const Theorem1Config& c, const SeedStream& seed) {
  const auto ratios = check_power_schedule(c.n, c.beta, c.d, 1.0, "theorem1");
  if (c.mc_paths == 0) throw ConfigError("theorem1: mc_paths must be positive");
  const GridSpec t_spec(c.d, c.grid.m);

  std::vector<FunctionalEvent> events;
  for (const auto& e : c.events) events.push_back(e.event);
  auto deltas = c.oscillation_deltas;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  for (double delta : deltas) {
    events.push_back({"oscillation_delta_" + fmt(delta), event::Oscillation{delta, c.oscillation_eps}});
  }

  // Limit probabilities by Wiener-sheet Monte Carlo.
  std::vector<char> hit(c.mc_paths * events.size(), 0);
  const auto sheet_seed = seed.child(stream_tag::kSheet);
  parallel_for(c.mc_paths, [&](std::size_t p) {
    const auto w = sample_wiener_sheet(t_spec, sheet_seed.child(p));
    for (std::size_t e = 0; e < events.size(); ++e) hit[p * events.size() + e] = holds(events[e], w) ? 1 : 0;
  });
  std::vector<double> mc(events.size()), mc_err(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) {
    std::size_t k = 0;
    for (std::size_t p = 0; p < c.mc_paths; ++p) k += static_cast<std::size_t>(hit[p * events.size() + e]);
    mc[e] = static_cast<double>(k) / static_cast<double>(c.mc_paths);
    mc_err[e] = std::sqrt(mc[e] * (1 - mc[e]) / static_cast<double>(c.mc_paths));
  }

  Report rep;
  rep.experiment = "theorem1";
  rep.seed = to_json(seed);
  rep.columns = {"n", "a", "event", "fraction", "target", "mc_estimate", "mc_stderr"};
  for (std::size_t e = 0; e < events.size(); ++e) {
    rep.statistics["sheet_mc"][events[e].name] = {{"estimate", mc[e]}, {"stderr", mc_err[e]}, {"paths", c.mc_paths}};
  }
  for (std::size_t i = 0; i < c.n.size(); ++i) {
    const std::uint64_t n = c.n[i];
    const double a = ratios[i].a;
    const auto window = make_window(a, c.grid, c.d);
    const auto cloud = sample_uniform(n, c.d, seed.child(stream_tag::kPoints).child(n));
    const auto field = centered_field(cloud, n, window);
    nlohmann::json per_n = to_json(ratios[i]);
    std::vector<double> fractions(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
      fractions[e] = occupation_fraction(field, events[e]);
      per_n["fractions"][events[e].name] = fractions[e];
    }
    for (std::size_t e = 0; e < c.events.size(); ++e) {
      const auto& check = c.events[e];
      const double target = check.target.value_or(mc[e]);
      auto v = within(events[e].name + " @ n=" + std::to_string(n), check.criterion, fractions[e], target,
                      check.tolerance);
      v.detail = check.target ? "exact limit" : "sheet MC stderr " + fmt(mc_err[e]);
      rep.verdicts.push_back(v);
      rep.rows.push_back({n, a, events[e].name, fractions[e], target, mc[e], mc_err[e]});
    }
    bool monotone = true;
    for (std::size_t e = c.events.size(); e < events.size(); ++e) {
      rep.rows.push_back({n, a, events[e].name, fractions[e], nullptr, mc[e], mc_err[e]});
      if (e > c.events.size() && fractions[e] > fractions[e - 1]) monotone = false;
    }
    if (deltas.size() > 1) {
      Verdict v;
      v.name = "oscillation fraction decreases with delta @ n=" + std::to_string(n);
      v.pass = monotone;
      v.value = monotone ? 1.0 : 0.0;
      v.target = 1.0;
      rep.verdicts.push_back(v);
    }
    rep.statistics["per_n"].push_back(per_n);
  }
  return rep;
}

Report char_functional_check(const CharConfig& c, const SeedStream& seed) {
  const auto ratios = check_power_schedule({c.n}, c.beta, c.d, 1.0, "char");
  const auto window = make_window(ratios[0].a, c.grid, c.d);
  const GridSpec& ts = window.t_spec;

  struct Prepared {
    std::vector<std::size_t> idx;
    double target = 1.0;
  };
  std::vector<Prepared> prepared;
  for (const auto& cc : c.cases) {
    if (cc.points.empty() || cc.points.size() > 5) throw ConfigError("char: need 1 <= p <= 5 points");
    if (cc.points.size() != cc.thetas.size()) throw ConfigError("char: points and thetas differ in length");
    Prepared p;
    for (const auto& t : cc.points) p.idx.push_back(lattice_point(t, ts, "char"));
    const auto sigma = sheet_covariance(cc.points);
    double q = 0.0;
    for (std::size_t i = 0; i < cc.thetas.size(); ++i) {
      for (std::size_t k = 0; k < cc.thetas.size(); ++k) q += cc.thetas[i] * sigma[i][k] * cc.thetas[k];
    }
    p.target = std::exp(-0.5 * q);
    prepared.push_back(p);
  }

  const auto cloud = sample_uniform(c.n, c.d, seed.child(stream_tag::kPoints));
  const auto field = centered_field(cloud, c.n, window);
  const std::size_t anchors = window.anchor_count();
  const std::size_t P = ts.point_count();

  Report rep;
  rep.experiment = "char";
  rep.seed = to_json(seed);
  rep.statistics["schedule"] = to_json(ratios[0]);
  rep.statistics["anchors"] = anchors;
  rep.columns = {"case", "re", "im", "target", "gap"};
  for (std::size_t k = 0; k < c.cases.size(); ++k) {
    CompensatedSum re, im;
    for (std::size_t u = 0; u < anchors; ++u) {
      double phase = 0.0;
      for (std::size_t j = 0; j < prepared[k].idx.size(); ++j) {
        phase += c.cases[k].thetas[j] * field.values[u * P + prepared[k].idx[j]];
      }
      re.add(std::cos(phase));
      im.add(std::sin(phase));
    }
    const std::complex<double> avg(re.value() / static_cast<double>(anchors),
                                   im.value() / static_cast<double>(anchors));
    const double gap = std::abs(avg - prepared[k].target);
    auto v = within("case " + std::to_string(k) + " |estimate - exp(-theta'Sigma theta/2)|", c.cases[k].criterion,
                    gap, 0.0, c.cases[k].tolerance);
    v.detail = "estimate " + fmt(avg.real()) + (avg.imag() < 0 ? "" : "+") + fmt(avg.imag()) + "i vs " +
               fmt(prepared[k].target);
    rep.verdicts.push_back(v);
    rep.rows.push_back({k, avg.real(), avg.imag(), prepared[k].target, gap});
    rep.statistics["cases"].push_back({{"points", c.cases[k].points},
                                       {"thetas", c.cases[k].thetas},
                                       {"re", avg.real()},
                                       {"im", avg.imag()},
                                       {"modulus", std::abs(avg)},
                                       {"target", prepared[k].target},
                                       {"gap", gap}});
  }
  return rep;
}

Report variance_decay_check(const VarianceConfig& c, const SeedStream& seed) {
  if (c.replicas < 200) throw ConfigError("variance: replica count must be >= 200");
  if (c.n.empty()) throw ConfigError("variance: empty n schedule");
  if (!(c.anchor_spacing > 0)) throw ConfigError("variance: anchor_spacing must be positive");
  auto schedule = c.n;
  if (c.doubling_n) schedule.push_back(*c.doubling_n);
  check_power_schedule(schedule, c.beta, c.d, 1.0, "variance");

  struct Run {
    std::uint64_t n;
    double a;
    std::string label;
  };
  std::vector<Run> runs;
  for (auto n : c.n) runs.push_back({n, power_scale(n, c.beta), "n=" + std::to_string(n)});
  if (c.doubling_n) {
    runs.push_back({*c.doubling_n, 2.0 * power_scale(*c.doubling_n, c.beta),
                    "n=" + std::to_string(*c.doubling_n) + ", 2a"});
  }

  Report rep;
  rep.experiment = "variance";
  rep.seed = to_json(seed);
  rep.columns = {"run", "n", "a", "reference", "numerator", "denominator", "ratio"};
  std::vector<double> ratios;
  bool applicable = true;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    AnchorGrid g{c.lo, c.hi, 0, c.m};
    g.u_res = std::max(2, static_cast<int>(std::ceil((c.hi - c.lo) / (c.anchor_spacing * run.a))) + 1);
    const auto window = make_window(run.a, g, c.d);
    const double window_mass = static_cast<double>(run.n) * std::pow(run.a, c.d);

    double reference = 0.0;
    if (auto exact = exact_poissonized_probability(c.event, window_mass)) {
      reference = *exact;
    } else {
      std::vector<char> hit(c.reference_replicas);
      const auto ref_seed = seed.child(0x524546).child(r);
      parallel_for(c.reference_replicas, [&](std::size_t i) {
        RandomEngine rng(ref_seed.child(i));
        hit[i] = holds(c.event, sample_poissonized_window(run.n, run.a, window.t_spec, rng)) ? 1 : 0;
      });
      std::size_t k = 0;
      for (char h : hit) k += static_cast<std::size_t>(h);
      reference = static_cast<double>(k) / static_cast<double>(c.reference_replicas);
    }
    const double var = reference * (1.0 - reference);

    std::vector<double> sq(c.replicas);
    const auto run_seed = seed.child(stream_tag::kPoints).child(r);
    parallel_for(c.replicas, [&](std::size_t i) {
      const auto cloud = sample_uniform(run.n, c.d, run_seed.child(i));
      const double frac = serial_fraction(centered_field(cloud, run.n, window), c.event);
      sq[i] = (frac - reference) * (frac - reference);
    });
    CompensatedSum num;
    for (double s : sq) num.add(s);
    const double numerator = num.value() / static_cast<double>(c.replicas);
    const double denominator = std::pow(run.a, c.d) * var;
    const double ratio = denominator > 0 ? numerator / denominator : std::numeric_limits<double>::quiet_NaN();
    if (!(denominator > 0)) applicable = false;
    ratios.push_back(ratio);
    rep.rows.push_back({run.label, run.n, run.a, reference, numerator, denominator, ratio});
    rep.statistics["runs"].push_back({{"label", run.label},
                                      {"n", run.n},
                                      {"a", run.a},
                                      {"anchors", window.anchor_count()},
                                      {"reference", reference},
                                      {"numerator", numerator},
                                      {"denominator", denominator},
                                      {"ratio", ratio}});
  }
  if (!applicable) {
    rep.statistics["note"] = "not applicable: rho has zero variance under the Poissonized law";
    return rep;
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  auto v = at_most("max/min ratio across runs", "AC9", *hi / *lo, c.band);
  rep.verdicts.push_back(v);
  return rep;
}

Report poissonized_clt_check(const CltConfig& c, const SeedStream& seed) {
  if (c.replicas < 10000) throw ConfigError("clt: replica count must be >= 10^4");
  if (c.marginals.empty()) throw ConfigError("clt: no marginal points");
  const int d = static_cast<int>(c.marginals.front().size());
  if (d < 1) throw ConfigError("clt: empty marginal point");
  if (!(c.beta > 0) || !(c.beta * d < 1)) throw ConfigError("clt: need 0 < beta < 1/d so that n a^d -> inf");
  if (c.pair.size() != 2) throw ConfigError("clt: pair must list exactly two points");
  const GridSpec ts(d, c.m);
  const double a = power_scale(c.n, c.beta);

  std::vector<std::vector<double>> points = c.marginals;
  points.push_back(c.pair[0]);
  points.push_back(c.pair[1]);
  std::vector<std::size_t> idx;
  for (const auto& t : points) idx.push_back(lattice_point(t, ts, "clt"));

  const std::size_t P = points.size();
  std::vector<double> values(c.replicas * P);
  const auto rep_seed = seed.child(stream_tag::kSheet);
  parallel_for(c.replicas, [&](std::size_t r) {
    RandomEngine rng(rep_seed.child(r));
    const auto f = sample_poissonized_window(c.n, a, ts, rng);
    const auto cdf = f.cdf();
    for (std::size_t k = 0; k < P; ++k) values[r * P + k] = cdf[idx[k]];
  });
  auto column = [&](std::size_t k) {
    std::vector<double> col(c.replicas);
    for (std::size_t r = 0; r < c.replicas; ++r) col[r] = values[r * P + k];
    return col;
  };

  Report rep;
  rep.experiment = "clt";
  rep.seed = to_json(seed);
  rep.statistics["a"] = a;
  rep.statistics["n_a_d"] = static_cast<double>(c.n) * std::pow(a, d);
  rep.columns = {"point", "mean", "variance", "target_variance", "ks", "critical"};
  const double critical = ks_critical_value(c.replicas, c.alpha);
  const auto sigma = sheet_covariance(points);
  for (std::size_t k = 0; k < c.marginals.size(); ++k) {
    const auto col = column(k);
    const auto mv = mean_var(col);
    const double sd = std::sqrt(sigma[k][k]);
    const double ks = ks_statistic(col, [sd](double x) { return normal_cdf(x / sd); });
    std::ostringstream name;
    name << "t=" << nlohmann::json(c.marginals[k]).dump();
    auto v = at_most("KS " + name.str(), "AC8", ks, critical);
    v.detail = "alpha = " + fmt(c.alpha);
    rep.verdicts.push_back(v);
    rep.verdicts.push_back(within("mean " + name.str(), "", mv.mean, 0.0, c.mean_tolerance));
    rep.rows.push_back({name.str(), mv.mean, mv.variance, sigma[k][k], ks, critical});
    rep.statistics["marginals"].push_back({{"point", c.marginals[k]},
                                           {"mean", mv.mean},
                                           {"variance", mv.variance},
                                           {"target_variance", sigma[k][k]},
                                           {"ks", ks},
                                           {"critical", critical}});
  }
  const auto x = column(P - 2);
  const auto y = column(P - 1);
  const double cov = sample_covariance(x, y);
  const double target = sigma[P - 2][P - 1];
  rep.verdicts.push_back(within("pair covariance", "AC8", cov, target, c.cov_tolerance));
  rep.statistics["pair"] = {{"points", c.pair}, {"covariance", cov}, {"target", target}};
  return rep;
}

}  // namespace inclab
