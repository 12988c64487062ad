#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "inclab/seed.hpp"

namespace inclab {

using Vec = std::vector<double>;
// Exact finite law keyed by value. Values built from half-integer atoms are
// exact in binary floating point, so keys compare reliably.
using Law = std::map<Vec, double>;

// Finite-support law on R^dim (addition semigroup, identity 0).
struct DiscreteDist {
  int dim = 1;
  std::vector<Vec> atoms;
  std::vector<double> probs;

  void validate() const;
  Vec zero() const { return Vec(static_cast<std::size_t>(dim), 0.0); }
  // P(X in B) for B given as atom indices.
  double mass(const std::vector<std::size_t>& subset) const;
  static DiscreteDist uniform(std::vector<Vec> atoms);
};

struct Seminorm {
  enum class Kind { abs_linear, l1, linf };
  Kind kind = Kind::linf;
  Vec weights;  // abs_linear only: |<w, x>|
  double operator()(const Vec& x) const;
};

// phi over tuples of running sums. Evaluated incrementally: a fixed-width
// summary state is seeded by the first entry and updated per entry, so the
// exact laws can merge sequences that agree on (running sum, summary).
class TruncMap {
 public:
  enum class Kind { last, running_max, exists, forall };

  static TruncMap last();
  static TruncMap running_max(std::vector<Seminorm> seminorms);
  static TruncMap exists(std::vector<Vec> set);
  static TruncMap forall(std::vector<Vec> set);

  Kind kind() const { return kind_; }
  const std::vector<Seminorm>& seminorms() const { return seminorms_; }
  const std::vector<Vec>& set() const { return set_; }

  std::size_t state_size() const;
  Vec init(const Vec& s) const;
  void update(Vec& state, const Vec& s) const;
  Vec value(const Vec& last_sum, const Vec& state) const;
  // Once true the value no longer depends on future entries or the sum.
  bool absorbed(const Vec& state) const;
  // phi(d_1, ..., d_p); the tuple must be non-empty.
  Vec apply(const std::vector<Vec>& tuple) const;
  bool in_set(const Vec& x) const;

 private:
  Kind kind_ = Kind::last;
  std::vector<Seminorm> seminorms_;
  std::vector<Vec> set_;
};

const char* to_string(TruncMap::Kind kind);

// Measurable subset of the phi codomain.
struct EventSpec {
  enum class Kind { all, in_set, geq, leq };
  Kind kind = Kind::all;
  std::vector<Vec> values;  // in_set
  std::size_t index = 0;    // geq / leq: component compared
  double threshold = 0.0;

  bool contains(const Vec& v) const;
  static EventSpec everything() { return {}; }
  static EventSpec of(std::vector<Vec> values);
  static EventSpec at_least(double c, std::size_t index = 0);
  static EventSpec at_most(double c, std::size_t index = 0);
};

// Truncating-axiom checker, generic over any tuple map. Checks
// phi(d..., d_p, d_p) = phi(d..., d_p) and phi(d_1, d_1, ...) = phi(d_1, ...)
// on every tuple of length < max_len over `closure`, and optionally
// phi(0, d...) = phi(d...).
using TupleMap = std::function<Vec(const std::vector<Vec>&)>;
struct AxiomReport {
  bool truncating = true;
  bool zero_irrelevance_checked = false;
  bool zero_irrelevant = true;
  std::size_t tuples_checked = 0;
  std::string counterexample;
};
AxiomReport check_axioms(const TupleMap& phi, const std::vector<Vec>& closure, bool check_zero_irrelevance,
                         int max_len = 4);
AxiomReport check_axioms(const TruncMap& phi, const std::vector<Vec>& closure, bool check_zero_irrelevance,
                         int max_len = 4);
// {0} together with every sum of one or two atoms.
std::vector<Vec> atom_closure(const DiscreteDist& dist);

inline constexpr std::uint64_t kEnumerationBudget = 10'000'000;
inline constexpr std::size_t kStateBudget = 2'000'000;

// Law of phi(S_1, ..., S_n) with S_m = sum_{i <= m} 1_B(X_i) X_i, by raw
// enumeration of all |atoms|^n sequences. n = 0 gives phi((0)).
Law fixed_n_law(const DiscreteDist& dist, std::uint64_t n, const std::vector<std::size_t>& B, const TruncMap& phi,
                std::uint64_t budget = kEnumerationBudget);
// Same law through the merged-state recursion.
Law fixed_n_law_dp(const DiscreteDist& dist, std::uint64_t n, const std::vector<std::size_t>& B, const TruncMap& phi,
                   std::size_t state_budget = kStateBudget);

std::uint64_t default_cutoff(double mean);

struct MixtureLaw {
  Law law;                // sum_{k <= cutoff} P(eta = k) law_k
  double tail = 0.0;      // P(eta > cutoff), exact
  std::uint64_t cutoff = 0;
  double probability(const EventSpec& c) const;
};
MixtureLaw poissonized_law(const DiscreteDist& dist, double mean, const std::vector<std::size_t>& B,
                           const TruncMap& phi, std::optional<std::uint64_t> cutoff = std::nullopt,
                           std::size_t state_budget = kStateBudget);

double probability(const Law& law, const EventSpec& c);
double total_mass(const Law& law);

struct Factor2Result {
  double lhs = 0.0;       // fixed-n probability
  double poisson = 0.0;   // truncated poissonized probability
  double tail = 0.0;
  double rhs = 0.0;       // 2 (poisson + tail)
  bool holds = false;
  // lhs <= poisson + tail, i.e. the inequality with factor 1.
  bool holds_factor1 = false;
};
Factor2Result check_factor2(const DiscreteDist& dist, std::uint64_t n, const std::vector<std::size_t>& B,
                            const TruncMap& phi, const EventSpec& C);

struct IndependenceResult {
  double joint = 0.0;
  double product = 0.0;
  double gap = 0.0;
  double tail = 0.0;
  double tolerance = 0.0;  // (r + 1) tail + 1e-10
  bool holds = false;
};
IndependenceResult check_independence(const DiscreteDist& dist, double mean,
                                      const std::vector<std::vector<std::size_t>>& Bs, const TruncMap& phi,
                                      const std::vector<EventSpec>& Cs, std::size_t state_budget = kStateBudget);

struct ExistsForallResult {
  Factor2Result exists;
  Factor2Result forall;
};
ExistsForallResult check_exists_forall(const DiscreteDist& dist, std::uint64_t n, const std::vector<std::size_t>& B,
                                       const std::vector<Vec>& C);

struct Factor2CampaignConfig {
  std::size_t cases = 200;
  std::uint64_t max_n = 6;
  std::size_t max_atoms = 3;
  // Restrict to the exists / forall maps.
  bool indicator_only = false;
  SeedStream seed{0};
};
struct IndependenceCampaignConfig {
  std::size_t cases = 100;
  std::size_t max_atoms = 3;
  double max_mean = 3.0;
  SeedStream seed{0};
};
struct CampaignResult {
  std::size_t cases = 0;
  std::size_t violations = 0;
  // Factor-2 campaign only: cases where factor 1 would already fail. A
  // positive count shows the check can fail at all.
  std::size_t factor1_violations = 0;
  std::map<std::string, std::size_t> cases_by_kind;
  double worst = 0.0;  // max lhs / rhs, or max gap / tolerance
  nlohmann::json records = nlohmann::json::array();
};
CampaignResult run_factor2_campaign(const Factor2CampaignConfig& config);
CampaignResult run_independence_campaign(const IndependenceCampaignConfig& config);

nlohmann::json to_json(const DiscreteDist& d);
nlohmann::json to_json(const TruncMap& phi);
nlohmann::json to_json(const EventSpec& c);
nlohmann::json to_json(const Factor2Result& r);
nlohmann::json to_json(const IndependenceResult& r);
nlohmann::json to_json(const CampaignResult& r);
nlohmann::json law_to_json(const Law& law);

}  // namespace inclab
