#include "inclab/poissonization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "inclab/errors.hpp"
#include "inclab/stats.hpp"

namespace inclab {

namespace {

constexpr double kMembershipTol = 1e-12;

bool same_point(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > kMembershipTol) return false;
  }
  return true;
}

void add_into(Vec& acc, const Vec& x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

std::string format_vec(const Vec& v) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  out << ')';
  return out.str();
}

std::string format_tuple(const std::vector<Vec>& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? " " : "") + format_vec(t[i]);
  return s + "]";
}

std::vector<char> selection_mask(const DiscreteDist& dist, const std::vector<std::size_t>& B) {
  std::vector<char> mask(dist.atoms.size(), 0);
  for (std::size_t b : B) {
    if (b >= dist.atoms.size()) throw DomainError("selection index " + std::to_string(b) + " is not an atom");
    mask[b] = 1;
  }
  return mask;
}

// Forward recursion over k for several selections sharing one sequence of
// draws. A state is the concatenation over selections of (running sum,
// phi summary); sequences with equal states are merged.
class JointRecursion {
 public:
  JointRecursion(const DiscreteDist& dist, const std::vector<std::vector<std::size_t>>& Bs, const TruncMap& phi,
                 std::size_t budget)
      : dist_(dist), phi_(phi), budget_(budget) {
    for (const auto& B : Bs) masks_.push_back(selection_mask(dist, B));
    dim_ = static_cast<std::size_t>(dist.dim);
    width_ = dim_ + phi.state_size();
    Vec start;
    const Vec zero = dist.zero();
    for (std::size_t l = 0; l < masks_.size(); ++l) append_component(start, zero, phi_.init(zero));
    states_[start] = 1.0;
  }

  std::uint64_t k() const { return k_; }
  const std::map<Vec, double>& states() const { return states_; }

  void advance() {
    std::map<Vec, double> next;
    const Vec zero = dist_.zero();
    for (const auto& [state, p] : states_) {
      for (std::size_t a = 0; a < dist_.atoms.size(); ++a) {
        const double w = p * dist_.probs[a];
        if (w == 0.0) continue;
        Vec out;
        out.reserve(state.size());
        for (std::size_t l = 0; l < masks_.size(); ++l) {
          const auto* base = state.data() + l * width_;
          Vec s(base, base + dim_);
          if (k_ == 0) s = zero;
          if (masks_[l][a]) add_into(s, dist_.atoms[a]);
          Vec summary;
          if (k_ == 0) {
            summary = phi_.init(s);
          } else {
            summary.assign(base + dim_, base + width_);
            if (!phi_.absorbed(summary)) phi_.update(summary, s);
          }
          append_component(out, s, summary);
        }
        next[std::move(out)] += w;
      }
      if (next.size() > budget_) {
        throw BudgetError("exact recursion exceeded its state budget of " + std::to_string(budget_) +
                          " at k = " + std::to_string(k_ + 1));
      }
    }
    states_ = std::move(next);
    ++k_;
  }

  Vec value(const Vec& state, std::size_t l) const {
    const auto* base = state.data() + l * width_;
    return phi_.value(Vec(base, base + dim_), Vec(base + dim_, base + width_));
  }

 private:
  void append_component(Vec& out, const Vec& s, const Vec& summary) const {
    if (phi_.absorbed(summary)) {
      out.insert(out.end(), dim_, 0.0);
    } else {
      out.insert(out.end(), s.begin(), s.end());
    }
    out.insert(out.end(), summary.begin(), summary.end());
  }

  const DiscreteDist& dist_;
  const TruncMap& phi_;
  std::size_t budget_;
  std::vector<std::vector<char>> masks_;
  std::size_t dim_ = 1;
  std::size_t width_ = 1;
  std::uint64_t k_ = 0;
  std::map<Vec, double> states_;
};

void check_mean(double mean) {
  if (!(mean > 0) || !std::isfinite(mean)) throw DomainError("Poisson mean must be positive and finite");
}

}  // namespace

void DiscreteDist::validate() const {
  if (dim < 1) throw ShapeError("semigroup dimension must be >= 1");
  if (atoms.empty()) throw ShapeError("distribution needs at least one atom");
  if (atoms.size() != probs.size()) throw ShapeError("atoms and probs differ in length");
  CompensatedSum total;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != static_cast<std::size_t>(dim)) throw ShapeError("atom has the wrong dimension");
    if (!(probs[i] >= 0)) throw DomainError("probabilities must be non-negative");
    total.add(probs[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (atoms[i] == atoms[j]) throw DomainError("atoms must be distinct: " + format_vec(atoms[i]));
    }
  }
  if (std::abs(total.value() - 1.0) > 1e-15) throw DomainError("probabilities must sum to 1");
}

double DiscreteDist::mass(const std::vector<std::size_t>& subset) const {
  const auto mask = selection_mask(*this, subset);
  CompensatedSum s;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (mask[i]) s.add(probs[i]);
  }
  return s.value();
}

DiscreteDist DiscreteDist::uniform(std::vector<Vec> atoms) {
  DiscreteDist d;
  if (atoms.empty()) throw ShapeError("distribution needs at least one atom");
  d.dim = static_cast<int>(atoms.front().size());
  d.probs.assign(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
  d.atoms = std::move(atoms);
  d.validate();
  return d;
}

double Seminorm::operator()(const Vec& x) const {
  switch (kind) {
    case Kind::abs_linear: {
      if (weights.size() != x.size()) throw ShapeError("seminorm weights do not match the dimension");
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
      return std::abs(s);
    }
    case Kind::l1: {
      double s = 0.0;
      for (double v : x) s += std::abs(v);
      return s;
    }
    case Kind::linf: {
      double s = 0.0;
      for (double v : x) s = std::max(s, std::abs(v));
      return s;
    }
  }
  return 0.0;
}

TruncMap TruncMap::last() { return TruncMap{}; }

TruncMap TruncMap::running_max(std::vector<Seminorm> seminorms) {
  if (seminorms.empty()) throw ShapeError("running max needs at least one seminorm");
  TruncMap t;
  t.kind_ = Kind::running_max;
  t.seminorms_ = std::move(seminorms);
  return t;
}

TruncMap TruncMap::exists(std::vector<Vec> set) {
  TruncMap t;
  t.kind_ = Kind::exists;
  t.set_ = std::move(set);
  return t;
}

TruncMap TruncMap::forall(std::vector<Vec> set) {
  TruncMap t;
  t.kind_ = Kind::forall;
  t.set_ = std::move(set);
  return t;
}

bool TruncMap::in_set(const Vec& x) const {
  return std::ranges::any_of(set_, [&](const Vec& c) { return same_point(c, x); });
}

std::size_t TruncMap::state_size() const {
  switch (kind_) {
    case Kind::last:
      return 0;
    case Kind::running_max:
      return seminorms_.size();
    case Kind::exists:
    case Kind::forall:
      return 1;
  }
  return 0;
}

Vec TruncMap::init(const Vec& s) const {
  switch (kind_) {
    case Kind::last:
      return {};
    case Kind::running_max: {
      Vec m(seminorms_.size());
      for (std::size_t l = 0; l < m.size(); ++l) m[l] = seminorms_[l](s);
      return m;
    }
    case Kind::exists:
    case Kind::forall:
      return {in_set(s) ? 1.0 : 0.0};
  }
  return {};
}

void TruncMap::update(Vec& state, const Vec& s) const {
  switch (kind_) {
    case Kind::last:
      return;
    case Kind::running_max:
      for (std::size_t l = 0; l < state.size(); ++l) state[l] = std::max(state[l], seminorms_[l](s));
      return;
    case Kind::exists:
      if (in_set(s)) state[0] = 1.0;
      return;
    case Kind::forall:
      if (!in_set(s)) state[0] = 0.0;
      return;
  }
}

Vec TruncMap::value(const Vec& last_sum, const Vec& state) const {
  return kind_ == Kind::last ? last_sum : state;
}

bool TruncMap::absorbed(const Vec& state) const {
  if (kind_ == Kind::exists) return state[0] == 1.0;
  if (kind_ == Kind::forall) return state[0] == 0.0;
  return false;
}

Vec TruncMap::apply(const std::vector<Vec>& tuple) const {
  if (tuple.empty()) throw DomainError("phi is defined on non-empty tuples");
  Vec state = init(tuple.front());
  for (std::size_t i = 1; i < tuple.size(); ++i) update(state, tuple[i]);
  return value(tuple.back(), state);
}

const char* to_string(TruncMap::Kind kind) {
  switch (kind) {
    case TruncMap::Kind::last:
      return "last";
    case TruncMap::Kind::running_max:
      return "running_max";
    case TruncMap::Kind::exists:
      return "exists";
    case TruncMap::Kind::forall:
      return "forall";
  }
  return "?";
}

bool EventSpec::contains(const Vec& v) const {
  switch (kind) {
    case Kind::all:
      return true;
    case Kind::in_set:
      return std::ranges::any_of(values, [&](const Vec& c) { return same_point(c, v); });
    case Kind::geq:
      return index < v.size() && v[index] >= threshold - kMembershipTol;
    case Kind::leq:
      return index < v.size() && v[index] <= threshold + kMembershipTol;
  }
  return false;
}

EventSpec EventSpec::of(std::vector<Vec> values) {
  EventSpec c;
  c.kind = Kind::in_set;
  c.values = std::move(values);
  return c;
}

EventSpec EventSpec::at_least(double t, std::size_t index) {
  EventSpec c;
  c.kind = Kind::geq;
  c.threshold = t;
  c.index = index;
  return c;
}

EventSpec EventSpec::at_most(double t, std::size_t index) {
  EventSpec c;
  c.kind = Kind::leq;
  c.threshold = t;
  c.index = index;
  return c;
}

AxiomReport check_axioms(const TupleMap& phi, const std::vector<Vec>& closure, bool check_zero_irrelevance,
                         int max_len) {
  AxiomReport rep;
  rep.zero_irrelevance_checked = check_zero_irrelevance;
  if (closure.empty()) return rep;
  const Vec zero(closure.front().size(), 0.0);
  const std::size_t c = closure.size();
  for (int p = 1; p < max_len; ++p) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
    while (true) {
      std::vector<Vec> t;
      for (std::size_t i : idx) t.push_back(closure[i]);
      const Vec base = phi(t);
      ++rep.tuples_checked;

      auto dup_last = t;
      dup_last.push_back(t.back());
      if (rep.truncating && phi(dup_last) != base) {
        rep.truncating = false;
        rep.counterexample = "duplicated last entry changes phi on " + format_tuple(t);
      }
      auto dup_first = t;
      dup_first.insert(dup_first.begin(), t.front());
      if (rep.truncating && phi(dup_first) != base) {
        rep.truncating = false;
        rep.counterexample = "duplicated first entry changes phi on " + format_tuple(t);
      }
      if (check_zero_irrelevance && rep.zero_irrelevant) {
        auto with_zero = t;
        with_zero.insert(with_zero.begin(), zero);
        if (phi(with_zero) != base) {
          rep.zero_irrelevant = false;
          if (rep.counterexample.empty()) rep.counterexample = "prepending 0 changes phi on " + format_tuple(t);
        }
      }

      std::size_t pos = 0;
      while (pos < idx.size() && ++idx[pos] == c) idx[pos++] = 0;
      if (pos == idx.size()) break;
    }
  }
  return rep;
}

AxiomReport check_axioms(const TruncMap& phi, const std::vector<Vec>& closure, bool check_zero_irrelevance,
                         int max_len) {
  return check_axioms([&phi](const std::vector<Vec>& t) { return phi.apply(t); }, closure, check_zero_irrelevance,
                      max_len);
}

std::vector<Vec> atom_closure(const DiscreteDist& dist) {
  std::set<Vec> out;
  out.insert(dist.zero());
  for (std::size_t i = 0; i < dist.atoms.size(); ++i) {
    out.insert(dist.atoms[i]);
    for (std::size_t j = i; j < dist.atoms.size(); ++j) {
      Vec s = dist.atoms[i];
      add_into(s, dist.atoms[j]);
      out.insert(s);
    }
  }
  return {out.begin(), out.end()};
}

Law fixed_n_law(const DiscreteDist& dist, std::uint64_t n, const std::vector<std::size_t>& B, const TruncMap& phi,
                std::uint64_t budget) {
  dist.validate();
  const auto mask = selection_mask(dist, B);
  if (n == 0) return {{phi.apply({dist.zero()}), 1.0}};
  const std::size_t A = dist.atoms.size();
  double sequences = 1.0;
  for (std::uint64_t i = 0; i < n; ++i) sequences *= static_cast<double>(A);
  if (sequences > static_cast<double>(budget)) {
    throw BudgetError("enumeration of " + std::to_string(A) + "^" + std::to_string(n) + " sequences exceeds budget " +
                      std::to_string(budget));
  }
  std::map<Vec, CompensatedSum> acc;
  std::vector<std::size_t> idx(n, 0);
  std::vector<Vec> sums(n);
  while (true) {
    double w = 1.0;
    Vec s = dist.zero();
    for (std::uint64_t i = 0; i < n; ++i) {
      w *= dist.probs[idx[i]];
      if (mask[idx[i]]) add_into(s, dist.atoms[idx[i]]);
      sums[i] = s;
    }
    if (w > 0) acc[phi.apply(sums)].add(w);
    std::size_t pos = 0;
    while (pos < n && ++idx[pos] == A) idx[pos++] = 0;
    if (pos == n) break;
  }
  Law law;
  for (const auto& [v, s] : acc) law[v] = s.value();
  return law;
}

Law fixed_n_law_dp(const DiscreteDist& dist, std::uint64_t n, const std::vector<std::size_t>& B, const TruncMap& phi,
                   std::size_t state_budget) {
  dist.validate();
  JointRecursion rec(dist, {B}, phi, state_budget);
  while (rec.k() < n) rec.advance();
  std::map<Vec, CompensatedSum> acc;
  for (const auto& [state, p] : rec.states()) acc[rec.value(state, 0)].add(p);
  Law law;
  for (const auto& [v, s] : acc) law[v] = s.value();
  return law;
}

std::uint64_t default_cutoff(double mean) {
  check_mean(mean);
  return static_cast<std::uint64_t>(std::ceil(mean + 10.0 * std::sqrt(mean) + 10.0));
}

double probability(const Law& law, const EventSpec& c) {
  CompensatedSum s;
  for (const auto& [v, p] : law) {
    if (c.contains(v)) s.add(p);
  }
  return s.value();
}

double total_mass(const Law& law) {
  CompensatedSum s;
  for (const auto& [v, p] : law) s.add(p);
  return s.value();
}

double MixtureLaw::probability(const EventSpec& c) const { return inclab::probability(law, c); }

MixtureLaw poissonized_law(const DiscreteDist& dist, double mean, const std::vector<std::size_t>& B,
                           const TruncMap& phi, std::optional<std::uint64_t> cutoff, std::size_t state_budget) {
  dist.validate();
  check_mean(mean);
  MixtureLaw out;
  out.cutoff = cutoff.value_or(default_cutoff(mean));
  out.tail = poisson_tail_above(out.cutoff, mean);
  JointRecursion rec(dist, {B}, phi, state_budget);
  std::map<Vec, CompensatedSum> acc;
  while (true) {
    const double w = poisson_pmf(rec.k(), mean);
    for (const auto& [state, p] : rec.states()) acc[rec.value(state, 0)].add(w * p);
    if (rec.k() == out.cutoff) break;
    rec.advance();
  }
  for (const auto& [v, s] : acc) out.law[v] = s.value();
  return out;
}

Factor2Result check_factor2(const DiscreteDist& dist, std::uint64_t n, const std::vector<std::size_t>& B,
                            const TruncMap& phi, const EventSpec& C) {
  dist.validate();
  if (n == 0) throw PreconditionError("the factor-2 check needs n >= 1 (mean of eta equals n)");
  const double pb = dist.mass(B);
  if (pb > 0.5 + 1e-15) {
    throw PreconditionError("P(X in B) = " + std::to_string(pb) + " exceeds 1/2");
  }
  Factor2Result r;
  Law fixed;
  try {
    fixed = fixed_n_law(dist, n, B, phi);
  } catch (const BudgetError&) {
    fixed = fixed_n_law_dp(dist, n, B, phi);
  }
  r.lhs = probability(fixed, C);
  const auto mix = poissonized_law(dist, static_cast<double>(n), B, phi);
  r.poisson = mix.probability(C);
  r.tail = mix.tail;
  r.rhs = 2.0 * (r.poisson + r.tail);
  r.holds = r.lhs <= r.rhs;
  r.holds_factor1 = r.lhs <= r.poisson + r.tail;
  return r;
}

IndependenceResult check_independence(const DiscreteDist& dist, double mean,
                                      const std::vector<std::vector<std::size_t>>& Bs, const TruncMap& phi,
                                      const std::vector<EventSpec>& Cs, std::size_t state_budget) {
  dist.validate();
  check_mean(mean);
  if (Bs.empty() || Bs.size() != Cs.size()) throw ShapeError("need one event per selection set");
  std::vector<int> owner(dist.atoms.size(), -1);
  for (std::size_t l = 0; l < Bs.size(); ++l) {
    for (std::size_t b : Bs[l]) {
      if (b >= owner.size()) throw DomainError("selection index " + std::to_string(b) + " is not an atom");
      if (owner[b] >= 0 && owner[b] != static_cast<int>(l)) {
        throw PreconditionError("selection sets overlap at atom " + std::to_string(b));
      }
      owner[b] = static_cast<int>(l);
    }
  }
  const auto axioms = check_axioms(phi, atom_closure(dist), true);
  if (!axioms.truncating || !axioms.zero_irrelevant) {
    throw PreconditionError("phi must be truncating and zero-irrelevant: " + axioms.counterexample);
  }

  const std::size_t r = Bs.size();
  const std::uint64_t cutoff = default_cutoff(mean);
  JointRecursion rec(dist, Bs, phi, state_budget);
  CompensatedSum joint;
  std::vector<CompensatedSum> marginal(r);
  while (true) {
    const double w = poisson_pmf(rec.k(), mean);
    for (const auto& [state, p] : rec.states()) {
      bool all = true;
      for (std::size_t l = 0; l < r; ++l) {
        const bool in = Cs[l].contains(rec.value(state, l));
        if (in) marginal[l].add(w * p);
        all = all && in;
      }
      if (all) joint.add(w * p);
    }
    if (rec.k() == cutoff) break;
    rec.advance();
  }
  IndependenceResult out;
  out.joint = joint.value();
  out.product = 1.0;
  for (const auto& m : marginal) out.product *= m.value();
  out.gap = std::abs(out.joint - out.product);
  out.tail = poisson_tail_above(cutoff, mean);
  out.tolerance = static_cast<double>(r + 1) * out.tail + 1e-10;
  out.holds = out.gap <= out.tolerance;
  return out;
}

ExistsForallResult check_exists_forall(const DiscreteDist& dist, std::uint64_t n, const std::vector<std::size_t>& B,
                                       const std::vector<Vec>& C) {
  const auto hit = EventSpec::of({{1.0}});
  return {check_factor2(dist, n, B, TruncMap::exists(C), hit), check_factor2(dist, n, B, TruncMap::forall(C), hit)};
}

namespace {

// Half-integer coordinates in [-1.5, 1.5] keep every partial sum exact.
DiscreteDist random_dist(RandomEngine& rng, int dim, std::size_t atoms) {
  DiscreteDist d;
  d.dim = dim;
  std::set<Vec> seen;
  while (d.atoms.size() < atoms) {
    Vec a(static_cast<std::size_t>(dim));
    for (double& x : a) x = 0.5 * (static_cast<double>(rng() % 7) - 3.0);
    if (seen.insert(a).second) d.atoms.push_back(a);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < atoms; ++i) {
    d.probs.push_back(0.05 + rng.uniform());
    total += d.probs.back();
  }
  CompensatedSum head;
  for (std::size_t i = 0; i + 1 < atoms; ++i) {
    d.probs[i] /= total;
    head.add(d.probs[i]);
  }
  d.probs.back() = 1.0 - head.value();
  return d;
}

std::vector<std::size_t> random_subset(RandomEngine& rng, std::size_t atoms) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < atoms; ++i) {
    if (rng() & 1U) s.push_back(i);
  }
  return s;
}

Seminorm random_seminorm(RandomEngine& rng, int dim) {
  Seminorm s;
  switch (rng() % 3) {
    case 0: {
      s.kind = Seminorm::Kind::abs_linear;
      s.weights.assign(static_cast<std::size_t>(dim), 0.0);
      s.weights[rng() % static_cast<std::uint64_t>(dim)] = 1.0;
      if (dim > 1) s.weights[rng() % static_cast<std::uint64_t>(dim)] -= 1.0;
      break;
    }
    case 1:
      s.kind = Seminorm::Kind::l1;
      break;
    default:
      s.kind = Seminorm::Kind::linf;
  }
  return s;
}

std::vector<Vec> random_points(RandomEngine& rng, const std::vector<Vec>& pool, std::size_t max_count) {
  std::vector<Vec> out;
  const std::size_t count = 1 + rng() % max_count;
  for (std::size_t i = 0; i < count; ++i) out.push_back(pool[rng() % pool.size()]);
  return out;
}

}  // namespace

CampaignResult run_factor2_campaign(const Factor2CampaignConfig& config) {
  if (config.max_atoms < 1 || config.max_n < 1) throw ConfigError("campaign needs max_atoms >= 1 and max_n >= 1");
  CampaignResult out;
  for (std::size_t c = 0; c < config.cases; ++c) {
    RandomEngine rng(config.seed.child(stream_tag::kCampaign).child(config.indicator_only ? 1 : 0).child(c));
    const int dim = rng.uniform() < 0.7 ? 1 : 2;
    const std::size_t natoms = 1 + rng() % config.max_atoms;
    const auto dist = random_dist(rng, dim, natoms);
    std::vector<std::size_t> B;
    for (int attempt = 0; attempt < 50; ++attempt) {
      B = random_subset(rng, natoms);
      if (dist.mass(B) <= 0.5) break;
      B.clear();
    }
    const std::uint64_t n = 1 + rng() % config.max_n;

    TruncMap phi;
    EventSpec C;
    const auto closure = atom_closure(dist);
    switch (config.indicator_only ? 2 : c % 3) {
      case 0: {
        const auto law = fixed_n_law(dist, n, B, phi);
        std::vector<Vec> support;
        for (const auto& [v, p] : law) support.push_back(v);
        C = EventSpec::of(random_points(rng, support, support.size()));
        break;
      }
      case 1: {
        std::vector<Seminorm> norms{random_seminorm(rng, dim)};
        if (rng() & 1U) norms.push_back(random_seminorm(rng, dim));
        phi = TruncMap::running_max(std::move(norms));
        const auto law = fixed_n_law(dist, n, B, phi);
        auto it = law.begin();
        std::advance(it, static_cast<std::ptrdiff_t>(rng() % law.size()));
        C = EventSpec::at_least(it->first[0]);
        break;
      }
      default: {
        const auto set = random_points(rng, closure, 3);
        phi = (rng() & 1U) ? TruncMap::exists(set) : TruncMap::forall(set);
        C = EventSpec::of({{1.0}});
      }
    }
    const auto r = check_factor2(dist, n, B, phi, C);
    ++out.cases;
    ++out.cases_by_kind[to_string(phi.kind())];
    if (!r.holds) ++out.violations;
    if (!r.holds_factor1) ++out.factor1_violations;
    if (r.rhs > 0) out.worst = std::max(out.worst, r.lhs / r.rhs);
    out.records.push_back({{"case", c},
                           {"dist", to_json(dist)},
                           {"n", n},
                           {"B", B},
                           {"phi", to_json(phi)},
                           {"C", to_json(C)},
                           {"result", to_json(r)}});
  }
  return out;
}

CampaignResult run_independence_campaign(const IndependenceCampaignConfig& config) {
  if (config.max_atoms < 2) throw ConfigError("independence campaign needs max_atoms >= 2");
  if (!(config.max_mean > 0)) throw ConfigError("independence campaign needs max_mean > 0");
  CampaignResult out;
  for (std::size_t c = 0; c < config.cases; ++c) {
    RandomEngine rng(config.seed.child(stream_tag::kCampaign).child(0x494e44).child(c));
    const int dim = rng.uniform() < 0.7 ? 1 : 2;
    const std::size_t natoms = 2 + rng() % (config.max_atoms - 1);
    const auto dist = random_dist(rng, dim, natoms);
    const double mean = std::max(0.25, config.max_mean * rng.uniform());

    const std::size_t r = (natoms >= 3 && (rng() & 1U)) ? 3 : 2;
    std::vector<std::size_t> order(natoms);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> Bs(r);
    for (std::size_t i = 0; i < natoms; ++i) {
      const std::size_t l = i < r ? i : rng() % (r + 1);
      if (l < r) Bs[l].push_back(order[i]);
    }

    TruncMap phi;
    std::vector<EventSpec> Cs;
    const auto closure = atom_closure(dist);
    std::vector<Vec> nonzero;
    for (const auto& v : closure) {
      if (v != dist.zero()) nonzero.push_back(v);
    }
    switch (c % 4) {
      case 0:
        for (std::size_t l = 0; l < r; ++l) {
          const double t = 0.5 * (static_cast<double>(rng() % 5) - 2.0);
          Cs.push_back((rng() & 1U) ? EventSpec::at_least(t) : EventSpec::at_most(t));
        }
        break;
      case 1:
        phi = TruncMap::running_max({random_seminorm(rng, dim)});
        for (std::size_t l = 0; l < r; ++l) Cs.push_back(EventSpec::at_least(0.5 * static_cast<double>(1 + rng() % 3)));
        break;
      case 2:
        phi = TruncMap::exists(random_points(rng, nonzero, 3));
        Cs.assign(r, EventSpec::of({{1.0}}));
        break;
      default: {
        auto set = random_points(rng, nonzero, 2);
        set.push_back(dist.zero());
        phi = TruncMap::forall(std::move(set));
        Cs.assign(r, EventSpec::of({{1.0}}));
      }
    }
    const auto res = check_independence(dist, mean, Bs, phi, Cs);
    ++out.cases;
    ++out.cases_by_kind[to_string(phi.kind())];
    if (!res.holds) ++out.violations;
    out.worst = std::max(out.worst, res.gap / res.tolerance);
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& e : Cs) cs.push_back(to_json(e));
    out.records.push_back({{"case", c},
                           {"dist", to_json(dist)},
                           {"mean", mean},
                           {"B", Bs},
                           {"phi", to_json(phi)},
                           {"C", cs},
                           {"result", to_json(res)}});
  }
  return out;
}

nlohmann::json to_json(const DiscreteDist& d) {
  return {{"dim", d.dim}, {"atoms", d.atoms}, {"probs", d.probs}};
}

nlohmann::json to_json(const TruncMap& phi) {
  nlohmann::json j{{"kind", to_string(phi.kind())}};
  if (phi.kind() == TruncMap::Kind::running_max) {
    auto& arr = j["seminorms"] = nlohmann::json::array();
    for (const auto& s : phi.seminorms()) {
      const char* kind = s.kind == Seminorm::Kind::abs_linear ? "abs_linear"
                         : s.kind == Seminorm::Kind::l1     ? "l1"
                                                            : "linf";
      nlohmann::json e{{"kind", kind}};
      if (s.kind == Seminorm::Kind::abs_linear) e["weights"] = s.weights;
      arr.push_back(e);
    }
  }
  if (phi.kind() == TruncMap::Kind::exists || phi.kind() == TruncMap::Kind::forall) j["set"] = phi.set();
  return j;
}

nlohmann::json to_json(const EventSpec& c) {
  switch (c.kind) {
    case EventSpec::Kind::all:
      return {{"kind", "all"}};
    case EventSpec::Kind::in_set:
      return {{"kind", "in_set"}, {"values", c.values}};
    case EventSpec::Kind::geq:
      return {{"kind", "geq"}, {"index", c.index}, {"threshold", c.threshold}};
    case EventSpec::Kind::leq:
      return {{"kind", "leq"}, {"index", c.index}, {"threshold", c.threshold}};
  }
  return {};
}

nlohmann::json to_json(const Factor2Result& r) {
  return {{"lhs", r.lhs},   {"poisson", r.poisson}, {"tail", r.tail},
          {"rhs", r.rhs},   {"holds", r.holds},     {"holds_factor1", r.holds_factor1}};
}

nlohmann::json to_json(const IndependenceResult& r) {
  return {{"joint", r.joint}, {"product", r.product},     {"gap", r.gap},
          {"tail", r.tail},   {"tolerance", r.tolerance}, {"holds", r.holds}};
}

nlohmann::json to_json(const CampaignResult& r) {
  return {{"cases", r.cases},
          {"violations", r.violations},
          {"factor1_violations", r.factor1_violations},
          {"cases_by_kind", r.cases_by_kind},
          {"worst", r.worst},
          {"records", r.records}};
}

nlohmann::json law_to_json(const Law& law) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [v, p] : law) arr.push_back({{"value", v}, {"p", p}});
  return arr;
}

}  // namespace inclab
