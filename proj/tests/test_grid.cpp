#include <gtest/gtest.h>

#include "inclab/errors.hpp"
#include "inclab/grid.hpp"
#include "inclab/seed.hpp"

using namespace inclab;

namespace {

std::vector<double> random_mass(std::size_t count, std::uint64_t seed) {
  RandomEngine rng{SeedStream(seed)};
  std::vector<double> v(count);
  for (auto& x : v) x = rng.uniform() * 4 - 2;
  return v;
}

}  // namespace

TEST(Grid, CumulateDifferenceRoundTrip) {
  for (int d = 1; d <= 3; ++d) {
    for (int m = 1; m <= 4; ++m) {
      const GridSpec spec(d, m);
      const auto mass = random_mass(spec.cell_count(), 100 * d + m);
      const auto cdf = cumulate(spec, mass);
      ASSERT_EQ(cdf.size(), spec.point_count());
      const auto back = difference(spec, cdf);
      for (std::size_t i = 0; i < mass.size(); ++i) EXPECT_NEAR(back[i], mass[i], 1e-12);
    }
  }
}

TEST(Grid, CdfMatchesDirectSum) {
  const GridSpec spec(2, 3);
  const auto mass = random_mass(spec.cell_count(), 7);
  const auto f = GridFunction::from_cell_mass(spec, mass);
  for (int i = 0; i <= 3; ++i) {
    for (int j = 0; j <= 3; ++j) {
      double direct = 0;
      for (int a = 0; a < i; ++a)
        for (int b = 0; b < j; ++b) direct += mass[a * 3 + b];
      const int idx[2] = {i, j};
      EXPECT_NEAR(f.at(idx), direct, 1e-12);
    }
  }
}

TEST(Grid, RectangleIsSumOfCells) {
  const GridSpec spec(2, 4);
  const auto mass = random_mass(spec.cell_count(), 11);
  const auto f = GridFunction::from_cell_mass(spec, mass);
  const int lo[2] = {1, 0}, hi[2] = {3, 4};
  double direct = 0;
  for (int a = 1; a < 3; ++a)
    for (int b = 0; b < 4; ++b) direct += mass[a * 4 + b];
  EXPECT_NEAR(eval_rect_index(f, lo, hi), direct, 1e-12);
  const double lo_c[2] = {0.25, 0.0}, hi_c[2] = {0.75, 1.0};
  EXPECT_NEAR(eval_rect(f, lo_c, hi_c), direct, 1e-12);
  const double off[2] = {0.3, 0.0};
  EXPECT_THROW(eval_rect(f, off, hi_c), DomainError);
}

TEST(Grid, ConstantDensity) {
  const GridSpec spec(1, 4);
  const std::vector<double> dens(4, 2.0);
  const auto f = GridFunction::from_density(spec, dens);
  for (int j = 0; j <= 4; ++j) {
    const int idx[1] = {j};
    EXPECT_DOUBLE_EQ(f.at(idx), 2.0 * j / 4);
  }
  EXPECT_DOUBLE_EQ(f.total_mass(), 2.0);
  EXPECT_DOUBLE_EQ(sup_norm(f), 2.0);
  for (double g : to_density(f)) EXPECT_DOUBLE_EQ(g, 2.0);
}

TEST(Grid, FromCdfRejectsNonzeroBoundary) {
  const GridSpec spec(1, 2);
  EXPECT_THROW(GridFunction::from_cdf(spec, {0.1, 0.2, 0.3}), DomainError);
  EXPECT_THROW(GridFunction::from_cdf(spec, {0.0, 0.2}), ShapeError);
}

TEST(Grid, CombineAndScale) {
  const GridSpec spec(2, 2);
  const auto f = GridFunction::from_cell_mass(spec, random_mass(4, 1));
  const auto g = GridFunction::from_cell_mass(spec, random_mass(4, 2));
  const auto h = combine(2.0, f, -1.0, g);
  for (std::size_t i = 0; i < spec.point_count(); ++i) {
    EXPECT_NEAR(h.cdf()[i], 2 * f.cdf()[i] - g.cdf()[i], 1e-12);
  }
  EXPECT_NEAR(sup_distance(f.scaled(3.0), f), 2 * sup_norm(f), 1e-12);
  EXPECT_THROW(combine(1.0, f, 1.0, GridFunction::zero(GridSpec(2, 3))), ShapeError);
}

TEST(Grid, JsonRoundTrip) {
  const GridSpec spec(3, 2);
  const auto f = GridFunction::from_cell_mass(spec, random_mass(spec.cell_count(), 3));
  const auto g = grid_function_from_json(nlohmann::json::parse(to_json(f).dump()));
  EXPECT_EQ(g.spec(), spec);
  for (std::size_t i = 0; i < spec.point_count(); ++i) EXPECT_DOUBLE_EQ(g.cdf()[i], f.cdf()[i]);
}
