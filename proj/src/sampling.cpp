#include "inclab/sampling.hpp"

#include <cmath>
#include <fstream>

#include "inclab/binary_io.hpp"
#include "inclab/errors.hpp"

namespace inclab {

namespace {

constexpr std::array<char, 8> kCloudMagic = {'I', 'N', 'C', 'L', 'P', 'C', '0', '1'};

std::uint64_t poisson_inversion(RandomEngine& rng, double mean) {
  // Sequential search on the cdf.
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t x = 0;
  while (u > cdf && p > 0.0) {
    ++x;
    p *= mean / static_cast<double>(x);
    cdf += p;
  }
  return x;
}

std::uint64_t poisson_ptrd(RandomEngine& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  while (true) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

PointCloud PointCloud::prefix(std::size_t n) const {
  if (n > size()) throw DomainError("prefix longer than the cloud");
  PointCloud out;
  out.d = d;
  out.seed = seed;
  out.coords.assign(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(n * static_cast<std::size_t>(d)));
  return out;
}

PointCloud sample_uniform(std::size_t n, int d, const SeedStream& seed) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  PointCloud cloud;
  cloud.d = d;
  cloud.seed = seed;
  cloud.coords.resize(n * static_cast<std::size_t>(d));
  RandomEngine rng(seed.child(stream_tag::kPoints));
  for (double& x : cloud.coords) x = rng.uniform();
  return cloud;
}

std::uint64_t poisson_variate(RandomEngine& rng, double mean) {
  if (!(mean > 0) || !std::isfinite(mean)) throw DomainError("Poisson mean must be positive and finite");
  return mean <= 10.0 ? poisson_inversion(rng, mean) : poisson_ptrd(rng, mean);
}

std::uint64_t sample_poisson_count(double mean, const SeedStream& seed) {
  RandomEngine rng(seed.child(stream_tag::kPoissonCount));
  return poisson_variate(rng, mean);
}

GridFunction sample_wiener_sheet(const GridSpec& spec, const SeedStream& seed) {
  RandomEngine rng(seed.child(stream_tag::kSheet));
  const double sd = std::sqrt(spec.cell_volume());
  std::vector<double> mass(spec.cell_count());
  for (double& x : mass) x = sd * rng.normal();
  return GridFunction::from_cell_mass(spec, std::move(mass));
}

GridFunction sample_poisson_sheet(double intensity, const GridSpec& spec, const SeedStream& seed) {
  if (!(intensity > 0)) throw DomainError("Poisson sheet intensity must be positive");
  RandomEngine rng(seed.child(stream_tag::kSheet));
  const double cell_mean = intensity * spec.cell_volume();
  std::vector<double> mass(spec.cell_count());
  for (double& x : mass) x = static_cast<double>(poisson_variate(rng, cell_mean));
  return GridFunction::from_cell_mass(spec, std::move(mass));
}

std::vector<double> sample_brownian_path(std::size_t steps, double dt, const SeedStream& seed) {
  if (!(dt > 0)) throw DomainError("path step must be positive");
  RandomEngine rng(seed.child(stream_tag::kPath));
  const double sd = std::sqrt(dt);
  std::vector<double> w(steps + 1, 0.0);
  for (std::size_t i = 1; i <= steps; ++i) w[i] = w[i - 1] + sd * rng.normal();
  return w;
}

void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  binary::write_magic(out, kCloudMagic);
  binary::write_u32(out, static_cast<std::uint32_t>(cloud.d));
  binary::write_u32(out, 0);
  binary::write_u64(out, cloud.size());
  binary::write_u64(out, cloud.seed.root());
  const std::size_t n = cloud.size();
  for (int k = 0; k < cloud.d; ++k) {
    for (std::size_t i = 0; i < n; ++i) binary::write_f64(out, cloud.coords[i * cloud.d + k]);
  }
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  binary::expect_magic(in, kCloudMagic, path);
  PointCloud cloud;
  cloud.d = static_cast<int>(binary::read_u32(in));
  binary::read_u32(in);
  const std::uint64_t n = binary::read_u64(in);
  cloud.seed = SeedStream(binary::read_u64(in));
  if (cloud.d < 1) throw DomainError("point cloud file " + path.string() + " has invalid dimension");
  cloud.coords.resize(n * static_cast<std::size_t>(cloud.d));
  for (int k = 0; k < cloud.d; ++k) {
    for (std::size_t i = 0; i < n; ++i) cloud.coords[i * cloud.d + k] = binary::read_f64(in);
  }
  return cloud;
}

}  // namespace inclab
