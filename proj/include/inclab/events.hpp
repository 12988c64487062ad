#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "inclab/grid.hpp"
#include "inclab/rate.hpp"

namespace inclab {

namespace event {

struct Always {};

// f(t) <= threshold (or >= when leq is false) at a lattice point t.
// An empty point means t = (1, ..., 1).
struct PointHalfSpace {
  std::vector<double> point;
  double threshold = 0.0;
  bool leq = true;
};

// ||f|| <= radius.
struct SupBall {
  double radius = 1.0;
};

// sup over lattice pairs with |s - t|_inf < delta of |f(s) - f(t)| > eps.
struct Oscillation {
  double delta = 0.5;
  double eps = 0.1;
};

// sup_distance(f, center) <= eps.
struct Neighborhood {
  GridFunction center;
  double eps = 0.0;
};

// f in the eps-enlarged Strassen ball or Gamma_c.
struct InBall {
  BallSpec ball;
};

}  // namespace event

// Testable predicate on D([0,1]^d) evaluated at lattice resolution.
struct FunctionalEvent {
  std::string name;
  std::variant<event::Always, event::PointHalfSpace, event::SupBall, event::Oscillation,
               event::Neighborhood, event::InBall>
      predicate;
};

bool holds(const FunctionalEvent& e, const GridFunction& f);

// Largest |f(s) - f(t)| over lattice pairs with |s - t|_inf < delta.
double lattice_oscillation(const GridFunction& f, double delta);

FunctionalEvent functional_event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FunctionalEvent& e);

}  // namespace inclab
