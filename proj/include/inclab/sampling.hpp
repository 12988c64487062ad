#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "inclab/grid.hpp"
#include "inclab/seed.hpp"

namespace inclab {

// n points in [0,1]^d stored point-major: coords[i * d + k].
struct PointCloud {
  int d = 1;
  std::vector<double> coords;
  SeedStream seed;

  std::size_t size() const { return coords.size() / static_cast<std::size_t>(d); }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords).subspan(i * static_cast<std::size_t>(d), static_cast<std::size_t>(d));
  }
  // First n points. Samples are generated sequentially, so the prefix of a
  // larger cloud equals the smaller cloud drawn from the same stream.
  PointCloud prefix(std::size_t n) const;
};

PointCloud sample_uniform(std::size_t n, int d, const SeedStream& seed);

// Poisson(mean) by sequential inversion for mean <= 10 and Hoermann's
// PTRD transformed rejection above.
std::uint64_t poisson_variate(RandomEngine& rng, double mean);
std::uint64_t sample_poisson_count(double mean, const SeedStream& seed);

// Wiener sheet on the lattice: i.i.d. N(0, m^-d) cell masses, cumulated.
// The lattice restriction has covariance prod_k min(s_k, t_k) exactly.
GridFunction sample_wiener_sheet(const GridSpec& spec, const SeedStream& seed);

// Counting distribution function with independent Poisson(intensity * m^-d)
// cell counts.
GridFunction sample_poisson_sheet(double intensity, const GridSpec& spec, const SeedStream& seed);

// Brownian path W(0), W(dt), ..., W(steps * dt).
std::vector<double> sample_brownian_path(std::size_t steps, double dt, const SeedStream& seed);

// Columnar file: magic, d, n, root seed; then coordinate-major f64 LE.
void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_point_cloud(const std::filesystem::path& path);

}  // namespace inclab
