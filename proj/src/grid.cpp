#include "inclab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inclab/errors.hpp"

namespace inclab {

namespace {

constexpr double kLatticeSnap = 1e-12;

int snap_to_lattice(double x, int m) {
  const double scaled = x * m;
  const double j = std::round(scaled);
  if (j < 0 || j > m || std::abs(x - j / m) > kLatticeSnap) {
    throw DomainError("coordinate " + std::to_string(x) + " is not on the 1/" +
                      std::to_string(m) + " lattice");
  }
  return static_cast<int>(j);
}

void require_same_spec(const GridFunction& f, const GridFunction& g) {
  if (!(f.spec() == g.spec())) throw ShapeError("grid functions live on different lattices");
}

}  // namespace

GridSpec::GridSpec(int dim, int cells_per_axis) : d(dim), m(cells_per_axis) {
  if (d < 1) throw ShapeError("grid dimension must be >= 1");
  if (m < 1) throw ShapeError("cells per axis must be >= 1");
}

std::size_t GridSpec::cell_count() const { return ipow(static_cast<std::size_t>(m), d); }
std::size_t GridSpec::point_count() const { return ipow(static_cast<std::size_t>(m) + 1, d); }
double GridSpec::cell_volume() const { return 1.0 / static_cast<double>(cell_count()); }

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

std::size_t flat_index(std::span<const int> index, int extent) {
  std::size_t flat = 0;
  for (int j : index) flat = flat * static_cast<std::size_t>(extent) + static_cast<std::size_t>(j);
  return flat;
}

void unflatten(std::size_t flat, int extent, std::span<int> index) {
  for (std::size_t k = index.size(); k-- > 0;) {
    index[k] = static_cast<int>(flat % static_cast<std::size_t>(extent));
    flat /= static_cast<std::size_t>(extent);
  }
}

std::vector<double> cumulate(const GridSpec& spec, std::span<const double> cell_mass) {
  if (cell_mass.size() != spec.cell_count()) {
    throw ShapeError("expected " + std::to_string(spec.cell_count()) + " cell masses, got " +
                     std::to_string(cell_mass.size()));
  }
  const int e = spec.m + 1;
  std::vector<double> cdf(spec.point_count(), 0.0);
  std::vector<int> idx(spec.d);
  for (std::size_t c = 0; c < cell_mass.size(); ++c) {
    unflatten(c, spec.m, idx);
    for (int& j : idx) ++j;
    cdf[flat_index(idx, e)] = cell_mass[c];
  }
  // Prefix sums along axis 0, then axis 1, ...
  for (int axis = 0; axis < spec.d; ++axis) {
    const std::size_t stride = ipow(e, spec.d - 1 - axis);
    for (std::size_t p = 0; p < cdf.size(); ++p) {
      const std::size_t j = (p / stride) % e;
      if (j > 0) cdf[p] += cdf[p - stride];
    }
  }
  return cdf;
}

std::vector<double> difference(const GridSpec& spec, std::span<const double> cdf) {
  if (cdf.size() != spec.point_count()) throw ShapeError("lattice value count does not match grid");
  const int e = spec.m + 1;
  std::vector<double> work(cdf.begin(), cdf.end());
  for (int axis = 0; axis < spec.d; ++axis) {
    const std::size_t stride = ipow(e, spec.d - 1 - axis);
    for (std::size_t p = work.size(); p-- > 0;) {
      const std::size_t j = (p / stride) % e;
      if (j > 0) work[p] -= work[p - stride];
    }
  }
  std::vector<double> mass(spec.cell_count());
  std::vector<int> idx(spec.d);
  for (std::size_t c = 0; c < mass.size(); ++c) {
    unflatten(c, spec.m, idx);
    for (int& j : idx) ++j;
    mass[c] = work[flat_index(idx, e)];
  }
  return mass;
}

GridFunction::GridFunction(GridSpec spec, std::vector<double> mass, std::vector<double> cdf)
    : spec_(spec), cell_mass_(std::move(mass)), cdf_(std::move(cdf)) {}

GridFunction GridFunction::zero(const GridSpec& spec) {
  return {spec, std::vector<double>(spec.cell_count(), 0.0),
          std::vector<double>(spec.point_count(), 0.0)};
}

GridFunction GridFunction::from_density(const GridSpec& spec, std::span<const double> density) {
  if (density.size() != spec.cell_count()) {
    throw ShapeError("density has " + std::to_string(density.size()) + " entries, grid has " +
                     std::to_string(spec.cell_count()) + " cells");
  }
  std::vector<double> mass(density.size());
  const double vol = spec.cell_volume();
  for (std::size_t c = 0; c < mass.size(); ++c) {
    if (!std::isfinite(density[c])) throw DomainError("density entries must be finite");
    mass[c] = density[c] * vol;
  }
  return from_cell_mass(spec, std::move(mass));
}

GridFunction GridFunction::from_cell_mass(const GridSpec& spec, std::vector<double> mass) {
  auto cdf = cumulate(spec, mass);
  return {spec, std::move(mass), std::move(cdf)};
}

GridFunction GridFunction::from_cdf(const GridSpec& spec, std::vector<double> cdf) {
  if (cdf.size() != spec.point_count()) throw ShapeError("lattice value count does not match grid");
  const int e = spec.m + 1;
  std::vector<int> idx(spec.d);
  for (std::size_t p = 0; p < cdf.size(); ++p) {
    unflatten(p, e, idx);
    if (std::ranges::find(idx, 0) != idx.end() && cdf[p] != 0.0) {
      throw DomainError("distribution function must vanish on the lower boundary");
    }
  }
  auto mass = difference(spec, cdf);
  return {spec, std::move(mass), std::move(cdf)};
}

double GridFunction::at(std::span<const int> lattice_index) const {
  if (static_cast<int>(lattice_index.size()) != spec_.d) throw ShapeError("index dimension mismatch");
  for (int j : lattice_index) {
    if (j < 0 || j > spec_.m) throw DomainError("lattice index out of range");
  }
  return cdf_[flat_index(lattice_index, spec_.m + 1)];
}

double GridFunction::total_mass() const { return cdf_.back(); }

GridFunction GridFunction::scaled(double factor) const {
  std::vector<double> mass(cell_mass_);
  for (double& x : mass) x *= factor;
  return from_cell_mass(spec_, std::move(mass));
}

GridFunction combine(double alpha, const GridFunction& f, double beta, const GridFunction& g) {
  require_same_spec(f, g);
  std::vector<double> mass(f.cell_mass().size());
  for (std::size_t c = 0; c < mass.size(); ++c) {
    mass[c] = alpha * f.cell_mass()[c] + beta * g.cell_mass()[c];
  }
  return GridFunction::from_cell_mass(f.spec(), std::move(mass));
}

std::vector<double> to_density(const GridFunction& f) {
  auto mass = difference(f.spec(), f.cdf());
  const double scale = static_cast<double>(f.spec().cell_count());
  for (double& x : mass) x *= scale;
  return mass;
}

double eval_rect_index(const GridFunction& f, std::span<const int> lower, std::span<const int> upper) {
  const int d = f.spec().d;
  if (static_cast<int>(lower.size()) != d || static_cast<int>(upper.size()) != d) {
    throw ShapeError("rectangle corner dimension mismatch");
  }
  for (int k = 0; k < d; ++k) {
    if (lower[k] < 0 || upper[k] > f.spec().m || lower[k] > upper[k]) {
      throw DomainError("rectangle corners must satisfy 0 <= s <= t <= 1 coordinatewise");
    }
  }
  std::vector<int> corner(d);
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    int lows = 0;
    for (int k = 0; k < d; ++k) {
      const bool low = (mask >> k) & 1u;
      corner[k] = low ? lower[k] : upper[k];
      lows += low;
    }
    const double v = f.cdf()[flat_index(corner, f.spec().m + 1)];
    total += (lows % 2 == 0) ? v : -v;
  }
  return total;
}

double eval_rect(const GridFunction& f, std::span<const double> lower, std::span<const double> upper) {
  const int d = f.spec().d;
  if (static_cast<int>(lower.size()) != d || static_cast<int>(upper.size()) != d) {
    throw ShapeError("rectangle corner dimension mismatch");
  }
  std::vector<int> lo(d), hi(d);
  for (int k = 0; k < d; ++k) {
    lo[k] = snap_to_lattice(lower[k], f.spec().m);
    hi[k] = snap_to_lattice(upper[k], f.spec().m);
  }
  return eval_rect_index(f, lo, hi);
}

double sup_norm(const GridFunction& f) {
  double best = 0.0;
  for (double v : f.cdf()) best = std::max(best, std::abs(v));
  return best;
}

double sup_distance(const GridFunction& f, const GridFunction& g) {
  require_same_spec(f, g);
  double best = 0.0;
  for (std::size_t p = 0; p < f.cdf().size(); ++p) {
    best = std::max(best, std::abs(f.cdf()[p] - g.cdf()[p]));
  }
  return best;
}

nlohmann::json to_json(const GridFunction& f) {
  return {{"d", f.spec().d},
          {"m", f.spec().m},
          {"cell_mass", std::vector<double>(f.cell_mass().begin(), f.cell_mass().end())}};
}

GridFunction grid_function_from_json(const nlohmann::json& j) {
  const GridSpec spec(j.at("d").get<int>(), j.at("m").get<int>());
  return GridFunction::from_cell_mass(spec, j.at("cell_mass").get<std::vector<double>>());
}

}  // namespace inclab
