#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "inclab/events.hpp"
#include "inclab/grid.hpp"
#include "inclab/sampling.hpp"

namespace inclab {

// Anchors u on a u_res^d lattice over I = [lo, hi]^d, offsets t on the
// t_spec lattice, window [u, u + a t]. Requires hi + a <= 1 so windows
// never leave the unit cube.
struct WindowConfig {
  double a = 0.1;
  double lo = 0.25;
  double hi = 0.65;
  int u_res = 10;
  GridSpec t_spec{1, 8};

  void validate() const;
  std::size_t anchor_count() const;
  double anchor_coordinate(int j) const;
  std::vector<double> anchor(std::size_t flat) const;
  // Flat anchor index of a point on the anchor lattice.
  std::size_t anchor_index(std::span<const double> u) const;
};

nlohmann::json to_json(const WindowConfig& c);
WindowConfig window_config_from_json(const nlohmann::json& j, int d);

enum class FieldMode { raw, centered, poissonized };
const char* to_string(FieldMode mode);

// values[u * P + t] with U anchors and P = (m+1)^d offset lattice points.
struct IncrementField {
  WindowConfig config;
  FieldMode mode = FieldMode::raw;
  std::uint64_t n = 0;
  std::optional<std::uint64_t> eta;
  SeedStream seed;
  std::vector<double> values;

  std::size_t offsets() const { return config.t_spec.point_count(); }
  std::span<const double> row(std::size_t anchor) const {
    return std::span<const double>(values).subspan(anchor * offsets(), offsets());
  }
};

// Raw counts #{i : u < U_i <= u + a t} (coordinatewise). Points are
// bucketed once on a grid of pitch a/m (coarsened if the grid would be
// huge); each anchor then scans only the buckets its window touches.
IncrementField count_field(const PointCloud& cloud, const WindowConfig& config);

// (raw - n a^d prod t) / sqrt(n a^d). For the poissonized mode the raw
// field must come from eta points and n is the nominal Poisson mean.
IncrementField normalize(const IncrementField& raw, FieldMode mode, std::uint64_t n);

// Convenience builders: centered field of the first n points, and the
// poissonized field over eta ~ Poisson(n) points.
IncrementField centered_field(const PointCloud& cloud, std::uint64_t n, const WindowConfig& config);
IncrementField poissonized_field(std::uint64_t n, int d, const WindowConfig& config, const SeedStream& seed);

GridFunction slice(const IncrementField& field, std::size_t anchor);
GridFunction slice_at(const IncrementField& field, std::span<const double> u);

// Fraction of anchors whose slice satisfies the event.
double occupation_fraction(const IncrementField& field, const FunctionalEvent& event);

// Poissonized increment at the origin, sampled through the restriction of
// the Poisson process to the window: K ~ Poisson(n a^d) uniform points in
// [0, a]^d. Same law as slicing a poissonized field at u = 0 without
// drawing the eta - K points that fall outside the window.
GridFunction sample_poissonized_window(std::uint64_t n, double a, const GridSpec& t_spec, RandomEngine& rng);

// Columnar values file plus a JSON sidecar (config, mode, n, eta, seed).
void write_field(const IncrementField& field, const std::filesystem::path& stem);
IncrementField read_field(const std::filesystem::path& stem);

}  // namespace inclab
