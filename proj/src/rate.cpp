#include "inclab/rate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Dense>

#include "inclab/errors.hpp"
#include "inclab/stats.hpp"

namespace inclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Lattice constraints count as satisfied within this absolute slack.
constexpr double kFeasTol = 1e-12;
// exp(-s) overflows below this.
constexpr double kMinExponent = -700.0;

bool within_threshold(double r, double threshold) {
  return r <= threshold * (1.0 + 1e-12) + 1e-15;
}

void prefix_cells(std::vector<double>& x, int m, int d) {
  for (int axis = 0; axis < d; ++axis) {
    const std::size_t stride = ipow(static_cast<std::size_t>(m), d - 1 - axis);
    for (std::size_t p = 0; p < x.size(); ++p) {
      if ((p / stride) % static_cast<std::size_t>(m) > 0) x[p] += x[p - stride];
    }
  }
}

void suffix_cells(std::vector<double>& x, int m, int d) {
  for (int axis = 0; axis < d; ++axis) {
    const std::size_t stride = ipow(static_cast<std::size_t>(m), d - 1 - axis);
    for (std::size_t p = x.size(); p-- > 0;) {
      if ((p / stride) % static_cast<std::size_t>(m) + 1 < static_cast<std::size_t>(m)) x[p] += x[p + stride];
    }
  }
}

// Constraint t <-> cell t (the lattice point at its upper corner).
std::vector<double> interior_values(const GridFunction& f) {
  const auto& spec = f.spec();
  std::vector<double> out(spec.cell_count());
  std::vector<int> idx(spec.d);
  for (std::size_t c = 0; c < out.size(); ++c) {
    unflatten(c, spec.m, idx);
    for (int& j : idx) ++j;
    out[c] = f.cdf()[flat_index(idx, spec.m + 1)];
  }
  return out;
}

// Dual of  min sum_c w phi(g_c)  s.t.  |w cum(g) - F| <= eps.
//   D(mu) = w sum_c psi(s_c) - <mu, F> - eps |mu|_1,  s = suffix-sums of mu,
// where psi(s) = min_x phi(x) + s x is attained at x*(s).
struct DualProblem {
  BallKind kind;
  int m;
  int d;
  std::size_t n;
  double w;
  double eps;
  std::vector<double> F;

  double xstar(double s) const {
    return kind == BallKind::strassen ? -0.5 * s : std::exp(-std::max(s, kMinExponent));
  }
  double dxstar(double s) const {
    return kind == BallKind::strassen ? -0.5 : -std::exp(-std::max(s, kMinExponent));
  }
  double psi(double s) const {
    return kind == BallKind::strassen ? -0.25 * s * s : 1.0 - std::exp(-std::max(s, kMinExponent));
  }
  double phi(double x) const { return kind == BallKind::strassen ? x * x : poisson_h(x); }

  std::vector<double> shadow(const std::vector<double>& mu) const {
    auto s = mu;
    suffix_cells(s, m, d);
    return s;
  }

  std::vector<double> primal(const std::vector<double>& mu) const {
    auto s = shadow(mu);
    for (double& v : s) v = xstar(v);
    return s;
  }

  std::vector<double> lattice(const std::vector<double>& g) const {
    auto c = g;
    prefix_cells(c, m, d);
    for (double& v : c) v *= w;
    return c;
  }

  // Smooth part of the dual, optionally with its gradient w cum(x*) - F.
  double smooth(const std::vector<double>& mu, std::vector<double>* grad) const {
    const auto s = shadow(mu);
    CompensatedSum val;
    std::vector<double> x(n);
    for (std::size_t c = 0; c < n; ++c) {
      val.add(w * psi(s[c]));
      val.add(-mu[c] * F[c]);
      x[c] = xstar(s[c]);
    }
    if (grad) {
      *grad = lattice(x);
      for (std::size_t c = 0; c < n; ++c) (*grad)[c] -= F[c];
    }
    return val.value();
  }

  double dual(const std::vector<double>& mu) const {
    double l1 = 0.0;
    for (double v : mu) l1 += std::abs(v);
    return smooth(mu, nullptr) - eps * l1;
  }

  double rate(const std::vector<double>& g) const {
    CompensatedSum s;
    for (double x : g) s.add(w * phi(x));
    return s.value();
  }

  double deviation(const std::vector<double>& g) const {
    const auto c = lattice(g);
    double dev = 0.0;
    for (std::size_t t = 0; t < n; ++t) dev = std::max(dev, std::abs(c[t] - F[t]));
    return dev;
  }
};

struct Anchor {
  std::vector<double> g;
  double deviation;
};

struct PolishResult {
  bool ok = false;
  std::vector<double> mu;
  std::vector<double> g;
};

// Active-set Newton on the dual restricted to the support of mu, with
// sign-inconsistent multipliers dropped and violated constraints added.
PolishResult polish(const DualProblem& P, const std::vector<double>& mu0) {
  std::vector<int> sign(P.n, 0);
  std::vector<double> nu = mu0;
  for (std::size_t t = 0; t < P.n; ++t) sign[t] = (nu[t] > 0) - (nu[t] < 0);
  double scale = 1.0;
  for (double v : P.F) scale = std::max(scale, std::abs(v));

  std::vector<int> idx_i(P.d), idx_j(P.d), corner(P.d);
  for (int round = 0; round < 20; ++round) {
    std::vector<std::size_t> S;
    for (std::size_t t = 0; t < P.n; ++t) {
      if (sign[t] != 0) {
        S.push_back(t);
      } else {
        nu[t] = 0.0;
      }
    }
    const auto k = static_cast<Eigen::Index>(S.size());
    auto restricted = [&](const std::vector<double>& v) {
      CompensatedSum val;
      const auto s = P.shadow(v);
      for (std::size_t c = 0; c < P.n; ++c) val.add(P.w * P.psi(s[c]));
      for (std::size_t t : S) val.add(-v[t] * (P.F[t] + P.eps * sign[t]));
      return val.value();
    };

    bool converged = false;
    for (int iter = 0; iter < 80; ++iter) {
      const auto s = P.shadow(nu);
      std::vector<double> x(P.n), dx(P.n);
      for (std::size_t c = 0; c < P.n; ++c) {
        x[c] = P.xstar(s[c]);
        dx[c] = P.dxstar(s[c]);
      }
      const auto cum = P.lattice(x);
      Eigen::VectorXd G(k);
      double gmax = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const std::size_t t = S[static_cast<std::size_t>(i)];
        G(i) = cum[t] - (P.F[t] + P.eps * sign[t]);
        gmax = std::max(gmax, std::abs(G(i)));
      }
      if (gmax <= 1e-13 * scale) {
        converged = true;
        break;
      }
      prefix_cells(dx, P.m, P.d);
      Eigen::MatrixXd negH(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        unflatten(S[static_cast<std::size_t>(i)], P.m, idx_i);
        for (Eigen::Index j = 0; j <= i; ++j) {
          unflatten(S[static_cast<std::size_t>(j)], P.m, idx_j);
          for (int a = 0; a < P.d; ++a) corner[a] = std::min(idx_i[a], idx_j[a]);
          const double h = -P.w * dx[flat_index(corner, P.m)];
          negH(i, j) = h;
          negH(j, i) = h;
        }
      }
      const Eigen::VectorXd step = negH.ldlt().solve(G);
      if (!step.allFinite()) return {};
      const double base = restricted(nu);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls) {
        auto trial = nu;
        for (Eigen::Index i = 0; i < k; ++i) trial[S[static_cast<std::size_t>(i)]] += alpha * step(i);
        if (restricted(trial) >= base - 1e-15 * std::max(1.0, std::abs(base))) {
          nu = std::move(trial);
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
    }
    if (!converged) return {};

    const auto g = P.primal(nu);
    const auto cum = P.lattice(g);
    bool changed = false;
    for (std::size_t t = 0; t < P.n; ++t) {
      if (sign[t] != 0 && nu[t] * sign[t] < 0) {
        sign[t] = 0;
        changed = true;
      } else if (sign[t] == 0) {
        const double dev = cum[t] - P.F[t];
        if (std::abs(dev) > P.eps + kFeasTol) {
          sign[t] = dev > 0 ? 1 : -1;
          changed = true;
        }
      }
    }
    if (!changed) return {true, nu, g};
  }
  return {};
}

struct DualSolve {
  double lower = 0.0;
  double upper = kInf;
  std::vector<double> witness;
  std::vector<double> last_primal;
  int iterations = 0;
  bool converged = false;
};

DualSolve solve_dual(const DualProblem& P, const Anchor* anchor, const SolverOptions& opt, double threshold) {
  DualSolve out;
  auto consider = [&](std::vector<double> g) {
    const double dev = P.deviation(g);
    if (dev > P.eps + kFeasTol) {
      if (!anchor || dev <= anchor->deviation) return;
      const double theta = (dev - P.eps) / (dev - anchor->deviation);
      for (std::size_t c = 0; c < g.size(); ++c) g[c] = (1.0 - theta) * g[c] + theta * anchor->g[c];
      if (P.deviation(g) > P.eps + kFeasTol) return;
    }
    const double val = P.rate(g);
    if (val < out.upper) {
      out.upper = val;
      out.witness = std::move(g);
    }
  };
  auto gap_closed = [&] {
    return std::isfinite(out.upper) &&
           out.upper - out.lower <= opt.gap_tolerance * std::max(1.0, std::abs(out.upper));
  };
  auto certified = [&] { return within_threshold(out.upper, threshold) || out.lower > threshold; };

  if (anchor) consider(anchor->g);

  std::vector<double> mu(P.n, 0.0), y(P.n, 0.0), grad;
  double t = 1.0;
  double L = 1.0;
  double previous = P.dual(mu);
  out.lower = previous;
  std::deque<double> history;

  for (int it = 1; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    const double qy = P.smooth(y, &grad);
    std::vector<double> z(P.n);
    double qz = 0.0;
    for (int bt = 0; bt < 100; ++bt) {
      const double thresh = P.eps / L;
      double lin = 0.0, sq = 0.0;
      for (std::size_t c = 0; c < P.n; ++c) {
        const double v = y[c] + grad[c] / L;
        z[c] = v > thresh ? v - thresh : (v < -thresh ? v + thresh : 0.0);
        const double diff = z[c] - y[c];
        lin += grad[c] * diff;
        sq += diff * diff;
      }
      qz = P.smooth(z, nullptr);
      if (qz >= qy + lin - 0.5 * L * sq - 1e-14 * std::max(1.0, std::abs(qy))) break;
      L *= 2.0;
    }
    double l1 = 0.0;
    for (double v : z) l1 += std::abs(v);
    const double dz = qz - P.eps * l1;
    out.lower = std::max(out.lower, dz);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (dz < previous) {
      // adaptive restart
      y = z;
      t = 1.0;
    } else {
      for (std::size_t c = 0; c < P.n; ++c) y[c] = z[c] + ((t - 1.0) / t_next) * (z[c] - mu[c]);
      t = t_next;
    }
    mu = z;
    previous = dz;

    out.last_primal = P.primal(mu);
    consider(out.last_primal);

    if (opt.polish_every > 0 && (it == 1 || it % opt.polish_every == 0)) {
      const auto pol = polish(P, mu);
      if (pol.ok) {
        out.lower = std::max(out.lower, P.dual(pol.mu));
        out.last_primal = pol.g;
        consider(pol.g);
        mu = pol.mu;
        y = mu;
        t = 1.0;
        previous = P.dual(mu);
      }
    }

    if (gap_closed()) {
      out.converged = true;
      return out;
    }
    if (opt.decision_only && certified()) return out;

    history.push_back(out.lower);
    if (static_cast<int>(history.size()) > opt.stall_window) {
      const double gain = history.back() - history.front();
      history.pop_front();
      if (gain < opt.stall_tolerance && certified()) return out;
    }
  }
  return out;
}

}  // namespace

double poisson_h(double x, HZero h_zero) {
  if (x < 0) return kInf;
  if (x == 0) return h_zero == HZero::continuous ? 1.0 : 0.0;
  return x * std::log(x) - x + 1.0;
}

RateValue rate_J(const GridFunction& f) {
  RateValue out;
  out.witness = to_density(f);
  CompensatedSum s;
  const double vol = f.spec().cell_volume();
  for (double g : out.witness) s.add(g * g * vol);
  out.value = s.value();
  return out;
}

RateValue rate_poisson(const GridFunction& f, HZero h_zero) {
  RateValue out;
  out.witness = to_density(f);
  const double vol = f.spec().cell_volume();
  CompensatedSum s;
  for (double g : out.witness) {
    if (g < 0) {
      out.value = kInf;
      out.finite = false;
      out.reason = "negative density: Poisson paths are non-decreasing";
      return out;
    }
    s.add(poisson_h(g, h_zero) * vol);
  }
  out.value = s.value();
  return out;
}

BallSpec BallSpec::strassen(double epsilon) { return {BallKind::strassen, 1.0, epsilon, HZero::continuous}; }
BallSpec BallSpec::gamma(double c, double epsilon) { return {BallKind::gamma, c, epsilon, HZero::continuous}; }

double BallSpec::threshold() const { return kind == BallKind::strassen ? 1.0 : 1.0 / c; }

void BallSpec::validate() const {
  if (kind == BallKind::gamma && !(c > 0)) throw DomainError("Gamma ball needs c > 0");
  if (!(epsilon >= 0)) throw DomainError("ball enlargement must be >= 0");
}

RateValue ball_rate(const GridFunction& f, const BallSpec& ball) {
  return ball.kind == BallKind::strassen ? rate_J(f) : rate_poisson(f, ball.h_zero);
}

const char* to_string(Membership m) {
  switch (m) {
    case Membership::member:
      return "member";
    case Membership::non_member:
      return "non-member";
    case Membership::indeterminate:
      return "indeterminate";
  }
  return "?";
}

FeasibilityReport ball_feasibility(const GridFunction& f, const BallSpec& ball, const SolverOptions& options) {
  ball.validate();
  const double threshold = ball.threshold();
  FeasibilityReport rep;
  auto finish = [&](FeasibilityReport& r) -> FeasibilityReport& {
    r.margin = threshold - r.r;
    if (within_threshold(r.upper, threshold)) {
      r.status = Membership::member;
    } else if (r.lower > threshold) {
      r.status = Membership::non_member;
    } else if (r.converged) {
      r.status = within_threshold(r.r, threshold) ? Membership::member : Membership::non_member;
    } else {
      r.status = Membership::indeterminate;
    }
    return r;
  };

  const RateValue own = ball_rate(f, ball);
  if (ball.epsilon == 0.0) {
    rep.r = rep.lower = rep.upper = own.value;
    rep.converged = true;
    rep.witness = own.witness;
    return finish(rep);
  }
  if (ball.kind == BallKind::gamma && ball.h_zero == HZero::literal) {
    throw DomainError("h(0) = 0 makes the Poisson rate non-convex; enlarged-ball feasibility needs h(0) = 1");
  }

  DualProblem P{ball.kind, f.spec().m, f.spec().d, f.spec().cell_count(), f.spec().cell_volume(),
                ball.epsilon, interior_values(f)};

  // In d = 1 a non-negative density exists iff the greedy non-decreasing
  // path through the boxes never leaves them.
  if (ball.kind == BallKind::gamma && f.spec().d == 1) {
    const auto F = f.cdf();
    double h = 0.0;
    for (std::size_t j = 1; j < F.size(); ++j) {
      h = std::max(h, F[j] - ball.epsilon);
      if (h > F[j] + ball.epsilon + kFeasTol) {
        rep.r = rep.lower = rep.upper = kInf;
        rep.converged = true;
        return finish(rep);
      }
    }
  }

  // Zero-rate density (0 for J, 1 for the Poisson rate).
  const std::vector<double> flat(P.n, ball.kind == BallKind::strassen ? 0.0 : 1.0);
  if (P.deviation(flat) <= P.eps + kFeasTol) {
    rep.converged = true;
    rep.witness = flat;
    return finish(rep);
  }

  std::optional<Anchor> anchor;
  if (own.finite) {
    anchor = Anchor{own.witness, P.deviation(own.witness)};
  } else {
    // Strictly feasible nonnegative point from the half-radius problem.
    DualProblem half = P;
    half.eps = 0.5 * P.eps;
    SolverOptions inner = options;
    inner.max_iterations = std::min(options.max_iterations, 2000);
    inner.decision_only = false;
    const auto sub = solve_dual(half, nullptr, inner, threshold);
    for (const auto* cand : {&sub.witness, &sub.last_primal}) {
      if (cand->empty()) continue;
      const double dev = P.deviation(*cand);
      if (dev < P.eps) {
        anchor = Anchor{*cand, dev};
        break;
      }
    }
  }

  const auto sol = solve_dual(P, anchor ? &*anchor : nullptr, options, threshold);
  rep.lower = sol.lower;
  rep.upper = sol.upper;
  rep.iterations = sol.iterations;
  rep.converged = sol.converged;
  rep.witness = sol.witness;
  rep.r = std::isfinite(sol.upper) ? sol.upper : sol.lower;
  return finish(rep);
}

ClusterReport cluster_check(std::span<const GridFunction> path, std::span<const GridFunction> targets,
                            const BallSpec& ball, double eps, const SolverOptions& options) {
  ball.validate();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto rv = ball_rate(targets[i], ball);
    if (!rv.finite || !within_threshold(rv.value, ball.threshold())) {
      throw PreconditionError("cluster target " + std::to_string(i) + " lies outside the ball (rate " +
                              std::to_string(rv.value) + ")");
    }
  }
  SolverOptions opt = options;
  opt.decision_only = true;

  ClusterReport rep;
  rep.first_visit.assign(targets.size(), std::nullopt);
  rep.visit_count.assign(targets.size(), 0);
  rep.membership.reserve(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) {
    const auto status = ball_feasibility(path[j], ball, opt).status;
    rep.membership.push_back(status);
    if (status == Membership::member) ++rep.member_count;
    if (status == Membership::indeterminate) ++rep.indeterminate_count;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (sup_distance(path[j], targets[i]) <= eps) {
        ++rep.visit_count[i];
        if (!rep.first_visit[i]) rep.first_visit[i] = j;
      }
    }
  }
  for (std::size_t j = path.size(); j-- > 0;) {
    if (rep.membership[j] != Membership::member) break;
    rep.absorption_index = j;
  }
  return rep;
}

nlohmann::json to_json(const RateValue& v) {
  nlohmann::json j{{"value", v.finite ? nlohmann::json(v.value) : nlohmann::json("inf")}, {"finite", v.finite}};
  if (!v.reason.empty()) j["reason"] = v.reason;
  return j;
}

nlohmann::json to_json(const FeasibilityReport& r) {
  auto num = [](double x) {
    if (std::isfinite(x)) return nlohmann::json(x);
    return nlohmann::json(x > 0 ? "inf" : "-inf");
  };
  return {{"status", to_string(r.status)}, {"value", num(r.r)},       {"finite", std::isfinite(r.r)},
          {"lower", num(r.lower)},         {"upper", num(r.upper)},   {"margin", num(r.margin)},
          {"iterations", r.iterations},    {"converged", r.converged}};
}

nlohmann::json to_json(const BallSpec& b) {
  nlohmann::json j{{"kind", b.kind == BallKind::strassen ? "strassen" : "gamma"}, {"epsilon", b.epsilon}};
  if (b.kind == BallKind::gamma) {
    j["c"] = b.c;
    j["h_zero"] = b.h_zero == HZero::continuous ? "continuous" : "literal";
  }
  return j;
}

BallSpec ball_spec_from_json(const nlohmann::json& j) {
  BallSpec b;
  const auto kind = j.value("kind", std::string("strassen"));
  if (kind == "strassen") {
    b.kind = BallKind::strassen;
  } else if (kind == "gamma") {
    b.kind = BallKind::gamma;
  } else {
    throw ConfigError("unknown ball kind '" + kind + "'");
  }
  b.c = j.value("c", 1.0);
  b.epsilon = j.value("epsilon", 0.0);
  b.h_zero = j.value("h_zero", std::string("continuous")) == "literal" ? HZero::literal : HZero::continuous;
  b.validate();
  return b;
}

}  // namespace inclab
