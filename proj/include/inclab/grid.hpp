#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace inclab {

// Regular lattice {0, 1/m, ..., 1}^d on the unit cube, with m^d cells.
struct GridSpec {
  int d = 1;
  int m = 1;

  GridSpec() = default;
  GridSpec(int dim, int cells_per_axis);

  std::size_t cell_count() const;
  std::size_t point_count() const;
  double cell_volume() const;

  bool operator==(const GridSpec&) const = default;
};

// j-th lattice coordinate j/m. Every module derives offsets from this one
// expression so that window bounds agree bit for bit.
inline double lattice_coordinate(int j, int m) {
  return static_cast<double>(j) / static_cast<double>(m);
}

// Row-major multi-index helpers; axis 0 is the slowest.
std::size_t flat_index(std::span<const int> index, int extent);
void unflatten(std::size_t flat, int extent, std::span<int> index);
std::size_t ipow(std::size_t base, int exp);

// Discretized element of D([0,1]^d): signed cell masses of a finite
// measure together with its distribution function on the lattice.
//
// cdf has (m+1)^d entries and vanishes wherever a lattice coordinate is 0.
// Immutable once built.
class GridFunction {
 public:
  GridFunction() = default;

  static GridFunction zero(const GridSpec& spec);
  static GridFunction from_density(const GridSpec& spec, std::span<const double> density);
  static GridFunction from_cell_mass(const GridSpec& spec, std::vector<double> mass);
  // Lattice values must vanish on the lower boundary; cell masses are
  // recovered by inclusion-exclusion.
  static GridFunction from_cdf(const GridSpec& spec, std::vector<double> cdf);

  const GridSpec& spec() const { return spec_; }
  std::span<const double> cell_mass() const { return cell_mass_; }
  std::span<const double> cdf() const { return cdf_; }

  double at(std::span<const int> lattice_index) const;
  double total_mass() const;

  GridFunction scaled(double factor) const;

 private:
  GridFunction(GridSpec spec, std::vector<double> mass, std::vector<double> cdf);

  GridSpec spec_;
  std::vector<double> cell_mass_;
  std::vector<double> cdf_;
};

// alpha * f + beta * g, built from cell masses.
GridFunction combine(double alpha, const GridFunction& f, double beta, const GridFunction& g);

// Cumulative sums of cell masses onto the (m+1)^d lattice, axis by axis.
std::vector<double> cumulate(const GridSpec& spec, std::span<const double> cell_mass);
// Inverse of cumulate: alternating differences of lattice values.
std::vector<double> difference(const GridSpec& spec, std::span<const double> cdf);

// Densities recovered from the lattice values (mass / cell volume).
std::vector<double> to_density(const GridFunction& f);

// Mass of the lattice-aligned rectangle [s, t]. Corners are given as
// coordinates in [0,1]^d and must sit on the lattice.
double eval_rect(const GridFunction& f, std::span<const double> lower, std::span<const double> upper);
double eval_rect_index(const GridFunction& f, std::span<const int> lower, std::span<const int> upper);

// Grid surrogate of the sup norm on [0,1]^d: max over lattice points.
double sup_norm(const GridFunction& f);
double sup_distance(const GridFunction& f, const GridFunction& g);

nlohmann::json to_json(const GridFunction& f);
GridFunction grid_function_from_json(const nlohmann::json& j);

}  // namespace inclab
