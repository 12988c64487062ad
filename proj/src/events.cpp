#include "inclab/events.hpp"

#include <algorithm>
#include <cmath>

#include "inclab/errors.hpp"

namespace inclab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double value_at(const GridFunction& f, const std::vector<double>& point) {
  const auto& spec = f.spec();
  if (point.empty()) return f.total_mass();
  if (static_cast<int>(point.size()) != spec.d) throw ShapeError("event point dimension mismatch");
  std::vector<int> idx(spec.d);
  for (int k = 0; k < spec.d; ++k) {
    const double j = std::round(point[k] * spec.m);
    if (j < 0 || j > spec.m || std::abs(point[k] - j / spec.m) > 1e-12) {
      throw DomainError("event point is not on the offset lattice");
    }
    idx[k] = static_cast<int>(j);
  }
  return f.at(idx);
}

}  // namespace

double lattice_oscillation(const GridFunction& f, double delta) {
  const auto& spec = f.spec();
  const int e = spec.m + 1;
  // |s - t|_inf < delta  <=>  index offsets of at most reach.
  int reach = static_cast<int>(std::ceil(delta * spec.m)) - 1;
  if (std::abs(delta * spec.m - std::round(delta * spec.m)) > 1e-9) {
    reach = static_cast<int>(std::floor(delta * spec.m));
  }
  reach = std::clamp(reach, 0, spec.m);
  if (reach == 0) return 0.0;
  const std::size_t pts = spec.point_count();
  std::vector<int> a(spec.d), b(spec.d), off(spec.d);
  const int width = 2 * reach + 1;
  const std::size_t box = ipow(static_cast<std::size_t>(width), spec.d);
  double best = 0.0;
  for (std::size_t p = 0; p < pts; ++p) {
    unflatten(p, e, a);
    for (std::size_t o = 0; o < box; ++o) {
      unflatten(o, width, off);
      bool inside = true;
      for (int k = 0; k < spec.d; ++k) {
        b[k] = a[k] + off[k] - reach;
        if (b[k] < 0 || b[k] > spec.m) inside = false;
      }
      if (!inside) continue;
      best = std::max(best, std::abs(f.cdf()[p] - f.cdf()[flat_index(b, e)]));
    }
  }
  return best;
}

bool holds(const FunctionalEvent& e, const GridFunction& f) {
  return std::visit(
      overloaded{
          [](const event::Always&) { return true; },
          [&](const event::PointHalfSpace& h) {
            const double v = value_at(f, h.point);
            return h.leq ? v <= h.threshold : v >= h.threshold;
          },
          [&](const event::SupBall& b) { return sup_norm(f) <= b.radius; },
          [&](const event::Oscillation& o) { return lattice_oscillation(f, o.delta) > o.eps; },
          [&](const event::Neighborhood& n) { return sup_distance(f, n.center) <= n.eps; },
          [&](const event::InBall& b) {
            SolverOptions opt;
            opt.decision_only = true;
            return ball_feasibility(f, b.ball, opt).status == Membership::member;
          },
      },
      e.predicate);
}

FunctionalEvent functional_event_from_json(const nlohmann::json& j) {
  FunctionalEvent e;
  const auto kind = j.at("kind").get<std::string>();
  e.name = j.value("name", kind);
  if (kind == "always") {
    e.predicate = event::Always{};
  } else if (kind == "point_leq" || kind == "point_geq" || kind == "endpoint_leq" || kind == "endpoint_geq") {
    event::PointHalfSpace h;
    h.point = j.value("point", std::vector<double>{});
    h.threshold = j.value("threshold", 0.0);
    h.leq = kind.ends_with("leq");
    e.predicate = h;
  } else if (kind == "sup_ball") {
    e.predicate = event::SupBall{j.value("radius", 1.0)};
  } else if (kind == "oscillation") {
    e.predicate = event::Oscillation{j.value("delta", 0.5), j.value("eps", 0.1)};
  } else if (kind == "neighborhood") {
    e.predicate = event::Neighborhood{grid_function_from_json(j.at("center")), j.value("eps", 0.0)};
  } else if (kind == "in_ball") {
    e.predicate = event::InBall{ball_spec_from_json(j.at("ball"))};
  } else {
    throw ConfigError("unknown event kind '" + kind + "'");
  }
  return e;
}

nlohmann::json to_json(const FunctionalEvent& e) {
  nlohmann::json j = std::visit(
      overloaded{
          [](const event::Always&) { return nlohmann::json{{"kind", "always"}}; },
          [](const event::PointHalfSpace& h) {
            return nlohmann::json{
                {"kind", h.leq ? "point_leq" : "point_geq"}, {"point", h.point}, {"threshold", h.threshold}};
          },
          [](const event::SupBall& b) { return nlohmann::json{{"kind", "sup_ball"}, {"radius", b.radius}}; },
          [](const event::Oscillation& o) {
            return nlohmann::json{{"kind", "oscillation"}, {"delta", o.delta}, {"eps", o.eps}};
          },
          [](const event::Neighborhood& n) {
            return nlohmann::json{{"kind", "neighborhood"}, {"center", to_json(n.center)}, {"eps", n.eps}};
          },
          [](const event::InBall& b) { return nlohmann::json{{"kind", "in_ball"}, {"ball", to_json(b.ball)}}; },
      },
      e.predicate);
  j["name"] = e.name;
  return j;
}

}  // namespace inclab
