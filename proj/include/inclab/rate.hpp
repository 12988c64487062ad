#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "inclab/grid.hpp"

namespace inclab {

// Value of h at 0. The continuous limit of x log x - x + 1 is 1; the
// literal convention sets h(0) = 0 and is kept for comparison only.
enum class HZero { continuous, literal };

// h(x) = x log x - x + 1 for x > 0; +inf for x < 0.
double poisson_h(double x, HZero h_zero = HZero::continuous);

struct RateValue {
  double value = 0.0;
  bool finite = true;
  std::vector<double> witness;  // density achieving the value at grid scale
  std::string reason;           // set when the value is infinite
};

// Gaussian energy: sum_c g_c^2 m^-d with g the cell density of f.
RateValue rate_J(const GridFunction& f);
// Poisson energy: sum_c h(g_c) m^-d; infinite if any density is negative.
RateValue rate_poisson(const GridFunction& f, HZero h_zero = HZero::continuous);

enum class BallKind { strassen, gamma };

// Sublevel set {J <= 1} (Strassen) or {poisson rate <= 1/c} (Gamma),
// enlarged by epsilon in the lattice sup norm.
struct BallSpec {
  BallKind kind = BallKind::strassen;
  double c = 1.0;
  double epsilon = 0.0;
  HZero h_zero = HZero::continuous;

  static BallSpec strassen(double epsilon);
  static BallSpec gamma(double c, double epsilon);

  double threshold() const;
  void validate() const;
};

RateValue ball_rate(const GridFunction& f, const BallSpec& ball);

enum class Membership { member, non_member, indeterminate };
const char* to_string(Membership m);

struct SolverOptions {
  int max_iterations = 10000;
  int stall_window = 50;
  double stall_tolerance = 1e-9;
  double gap_tolerance = 1e-9;
  int polish_every = 25;
  // Stop as soon as membership is certified instead of closing the gap.
  bool decision_only = false;
};

struct FeasibilityReport {
  Membership status = Membership::indeterminate;
  double r = 0.0;      // best estimate of inf{rate(h) : |h - f| <= eps}
  double lower = 0.0;  // dual bound
  double upper = 0.0;  // value of a feasible density (+inf if none found)
  double margin = 0.0; // threshold - r
  int iterations = 0;
  bool converged = false;  // upper - lower within gap tolerance
  std::vector<double> witness;
};

// Decides f in ball^epsilon by computing
//   r(f, eps) = inf { rate(h) : sup_distance(h, f) <= eps }
// over cell densities. The constraint is a box on every lattice value.
//
// The dual (smooth concave part plus an l1 term) is maximized by FISTA
// with backtracking; feasible primal points come from interpolating the
// dual's primal iterate with a strictly feasible anchor, and every few
// iterations an active-set Newton polish solves the KKT system on the
// current support. Lower and upper bounds are certified at every step.
FeasibilityReport ball_feasibility(const GridFunction& f, const BallSpec& ball,
                                   const SolverOptions& options = {});

struct ClusterReport {
  std::optional<std::size_t> absorption_index;  // start of the final in-ball run
  std::vector<std::optional<std::size_t>> first_visit;
  std::vector<std::size_t> visit_count;
  std::size_t member_count = 0;
  std::size_t indeterminate_count = 0;
  std::vector<Membership> membership;
};

// Absorption of the path into ball^ball.epsilon and visits of each
// target's eps-neighbourhood. Targets must lie in the (unenlarged) ball.
// Indeterminate solves count as non-members for absorption.
ClusterReport cluster_check(std::span<const GridFunction> path, std::span<const GridFunction> targets,
                            const BallSpec& ball, double eps, const SolverOptions& options = {});

nlohmann::json to_json(const RateValue& v);
nlohmann::json to_json(const FeasibilityReport& r);
nlohmann::json to_json(const BallSpec& b);
BallSpec ball_spec_from_json(const nlohmann::json& j);

}  // namespace inclab
