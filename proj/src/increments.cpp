#include "inclab/increments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "inclab/binary_io.hpp"
#include "inclab/errors.hpp"
#include "inclab/parallel.hpp"

namespace inclab {

namespace {

constexpr std::array<char, 8> kFieldMagic = {'I', 'N', 'C', 'L', 'I', 'F', '0', '1'};
constexpr std::size_t kMaxBuckets = std::size_t{1} << 22;

// Uniform bucket grid over [0,1]^d with points sorted by bucket (CSR).
struct BucketGrid {
  int d = 1;
  int per_axis = 1;
  double pitch = 1.0;
  std::vector<std::size_t> start;  // per bucket, plus sentinel
  std::vector<std::size_t> order;  // point indices grouped by bucket

  int bucket_of(double x) const {
    return std::min(per_axis - 1, static_cast<int>(std::floor(x / pitch)));
  }
};

BucketGrid build_buckets(const PointCloud& cloud, std::size_t n_points, double pitch) {
  BucketGrid g;
  g.d = cloud.d;
  g.per_axis = std::max(1, static_cast<int>(std::ceil(1.0 / pitch)));
  const std::size_t cap = std::max(kMaxBuckets, 4 * n_points);
  while (ipow(static_cast<std::size_t>(g.per_axis), g.d) > cap) {
    g.per_axis = std::max(1, g.per_axis / 2);
  }
  g.pitch = 1.0 / g.per_axis;
  const std::size_t total = ipow(static_cast<std::size_t>(g.per_axis), g.d);
  std::vector<std::size_t> id(n_points);
  g.start.assign(total + 1, 0);
  for (std::size_t i = 0; i < n_points; ++i) {
    std::size_t flat = 0;
    for (int k = 0; k < g.d; ++k) {
      flat = flat * static_cast<std::size_t>(g.per_axis) +
             static_cast<std::size_t>(g.bucket_of(cloud.coords[i * g.d + k]));
    }
    id[i] = flat;
    ++g.start[flat + 1];
  }
  for (std::size_t b = 0; b < total; ++b) g.start[b + 1] += g.start[b];
  g.order.resize(n_points);
  auto fill = g.start;
  for (std::size_t i = 0; i < n_points; ++i) g.order[fill[id[i]]++] = i;
  return g;
}

// Smallest j in [1, m] with x <= u + a * (j / m); x must lie in (u, u + a].
int offset_cell(double x, double u, double a, int m) {
  int j = std::clamp(static_cast<int>(std::ceil((x - u) / a * m)), 1, m);
  while (j > 1 && x <= u + a * lattice_coordinate(j - 1, m)) --j;
  while (j < m && x > u + a * lattice_coordinate(j, m)) ++j;
  return j;
}

IncrementField count_first(const PointCloud& cloud, std::size_t n_points, const WindowConfig& config) {
  config.validate();
  const GridSpec& ts = config.t_spec;
  if (cloud.d != ts.d) throw ConfigError("point cloud dimension does not match the offset lattice");
  if (n_points > cloud.size()) throw DomainError("requested more points than the cloud holds");

  const int d = ts.d;
  const int m = ts.m;
  const double a = config.a;
  const auto grid = build_buckets(cloud, n_points, a / m);

  IncrementField field;
  field.config = config;
  field.mode = FieldMode::raw;
  field.n = n_points;
  field.seed = cloud.seed;
  const std::size_t anchors = config.anchor_count();
  const std::size_t P = ts.point_count();
  field.values.assign(anchors * P, 0.0);

  parallel_for(anchors, [&](std::size_t ai) {
    const auto u = config.anchor(ai);
    std::vector<int> b_lo(d), b_hi(d), b(d), cell(d);
    std::size_t box = 1;
    for (int k = 0; k < d; ++k) {
      b_lo[k] = grid.bucket_of(u[k]);
      b_hi[k] = grid.bucket_of(std::min(1.0, u[k] + a));
      box *= static_cast<std::size_t>(b_hi[k] - b_lo[k] + 1);
    }
    std::vector<double> hist(ts.cell_count(), 0.0);
    for (std::size_t o = 0; o < box; ++o) {
      std::size_t rem = o;
      for (int k = d; k-- > 0;) {
        const auto w = static_cast<std::size_t>(b_hi[k] - b_lo[k] + 1);
        b[k] = b_lo[k] + static_cast<int>(rem % w);
        rem /= w;
      }
      const std::size_t bucket = flat_index(b, grid.per_axis);
      for (std::size_t q = grid.start[bucket]; q < grid.start[bucket + 1]; ++q) {
        const auto x = cloud.point(grid.order[q]);
        bool inside = true;
        for (int k = 0; k < d && inside; ++k) inside = x[k] > u[k] && x[k] <= u[k] + a;
        if (!inside) continue;
        for (int k = 0; k < d; ++k) cell[k] = offset_cell(x[k], u[k], a, m) - 1;
        hist[flat_index(cell, m)] += 1.0;
      }
    }
    const auto cdf = cumulate(ts, hist);
    std::ranges::copy(cdf, field.values.begin() + static_cast<std::ptrdiff_t>(ai * P));
  });
  return field;
}

double offset_volume(const GridSpec& ts, std::size_t p, std::vector<int>& idx) {
  unflatten(p, ts.m + 1, idx);
  double vol = 1.0;
  for (int j : idx) vol *= lattice_coordinate(j, ts.m);
  return vol;
}

}  // namespace

void WindowConfig::validate() const {
  if (!(a > 0 && a <= 1)) throw ConfigError("window scale a must lie in (0, 1]");
  if (!(lo >= 0 && lo <= hi)) throw ConfigError("anchor cube needs 0 <= lo <= hi");
  if (hi + a > 1.0) {
    throw ConfigError("windows escape the unit cube: hi + a = " + std::to_string(hi + a) + " > 1");
  }
  if (u_res < 1) throw ConfigError("u_res must be >= 1");
  if (u_res == 1 && lo != hi) throw ConfigError("a single anchor per axis requires lo == hi");
}

std::size_t WindowConfig::anchor_count() const { return ipow(static_cast<std::size_t>(u_res), t_spec.d); }

double WindowConfig::anchor_coordinate(int j) const {
  if (u_res == 1) return lo;
  if (j == u_res - 1) return hi;
  return lo + (hi - lo) * (static_cast<double>(j) / static_cast<double>(u_res - 1));
}

std::vector<double> WindowConfig::anchor(std::size_t flat) const {
  std::vector<int> idx(t_spec.d);
  unflatten(flat, u_res, idx);
  std::vector<double> u(t_spec.d);
  for (int k = 0; k < t_spec.d; ++k) u[k] = anchor_coordinate(idx[k]);
  return u;
}

std::size_t WindowConfig::anchor_index(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != t_spec.d) throw ShapeError("anchor dimension mismatch");
  std::vector<int> idx(t_spec.d);
  for (int k = 0; k < t_spec.d; ++k) {
    const double j = u_res == 1 ? 0.0 : std::round((u[k] - lo) / (hi - lo) * (u_res - 1));
    if (j < 0 || j >= u_res || std::abs(anchor_coordinate(static_cast<int>(j)) - u[k]) > 1e-12) {
      throw DomainError("anchor " + std::to_string(u[k]) + " is not on the anchor lattice");
    }
    idx[k] = static_cast<int>(j);
  }
  return flat_index(idx, u_res);
}

nlohmann::json to_json(const WindowConfig& c) {
  return {{"a", c.a}, {"lo", c.lo}, {"hi", c.hi}, {"u_res", c.u_res}, {"d", c.t_spec.d}, {"m", c.t_spec.m}};
}

WindowConfig window_config_from_json(const nlohmann::json& j, int d) {
  WindowConfig c;
  c.a = j.value("a", c.a);
  c.lo = j.value("lo", c.lo);
  c.hi = j.value("hi", c.hi);
  c.u_res = j.value("u_res", c.u_res);
  c.t_spec = GridSpec(j.value("d", d), j.value("m", c.t_spec.m));
  return c;
}

const char* to_string(FieldMode mode) {
  switch (mode) {
    case FieldMode::raw:
      return "raw";
    case FieldMode::centered:
      return "centered";
    case FieldMode::poissonized:
      return "poissonized";
  }
  return "?";
}

IncrementField count_field(const PointCloud& cloud, const WindowConfig& config) {
  return count_first(cloud, cloud.size(), config);
}

IncrementField normalize(const IncrementField& raw, FieldMode mode, std::uint64_t n) {
  if (raw.mode != FieldMode::raw) throw DomainError("normalize expects a raw count field");
  if (mode == FieldMode::raw) throw DomainError("normalize target must be centered or poissonized");
  if (n == 0) throw DomainError("normalization needs n >= 1");
  const GridSpec& ts = raw.config.t_spec;
  const double window_mass = static_cast<double>(n) * std::pow(raw.config.a, ts.d);
  const double scale = std::sqrt(window_mass);
  IncrementField out = raw;
  out.mode = mode;
  out.n = n;
  if (mode == FieldMode::poissonized) out.eta = raw.n;
  const std::size_t P = ts.point_count();
  std::vector<double> mean(P);
  std::vector<int> idx(ts.d);
  for (std::size_t p = 0; p < P; ++p) mean[p] = window_mass * offset_volume(ts, p, idx);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = (raw.values[i] - mean[i % P]) / scale;
  return out;
}

IncrementField centered_field(const PointCloud& cloud, std::uint64_t n, const WindowConfig& config) {
  return normalize(count_first(cloud, n, config), FieldMode::centered, n);
}

IncrementField poissonized_field(std::uint64_t n, int d, const WindowConfig& config, const SeedStream& seed) {
  const std::uint64_t eta = sample_poisson_count(static_cast<double>(n), seed);
  const auto cloud = sample_uniform(eta, d, seed);
  return normalize(count_field(cloud, config), FieldMode::poissonized, n);
}

GridFunction slice(const IncrementField& field, std::size_t anchor) {
  if (anchor >= field.config.anchor_count()) throw DomainError("anchor index out of range");
  const auto row = field.row(anchor);
  return GridFunction::from_cdf(field.config.t_spec, std::vector<double>(row.begin(), row.end()));
}

GridFunction slice_at(const IncrementField& field, std::span<const double> u) {
  return slice(field, field.config.anchor_index(u));
}

double occupation_fraction(const IncrementField& field, const FunctionalEvent& event) {
  const std::size_t anchors = field.config.anchor_count();
  std::vector<char> hit(anchors, 0);
  parallel_for(anchors, [&](std::size_t i) { hit[i] = holds(event, slice(field, i)) ? 1 : 0; });
  std::size_t count = 0;
  for (char h : hit) count += static_cast<std::size_t>(h);
  return static_cast<double>(count) / static_cast<double>(anchors);
}

GridFunction sample_poissonized_window(std::uint64_t n, double a, const GridSpec& t_spec, RandomEngine& rng) {
  if (n == 0) throw DomainError("poissonized window needs n >= 1");
  const double window_mass = static_cast<double>(n) * std::pow(a, t_spec.d);
  const std::uint64_t k = poisson_variate(rng, window_mass);
  const int m = t_spec.m;
  std::vector<double> hist(t_spec.cell_count(), 0.0);
  std::vector<int> cell(t_spec.d);
  for (std::uint64_t i = 0; i < k; ++i) {
    for (int& c : cell) {
      const double v = 1.0 - rng.uniform();  // (0, 1]
      c = std::clamp(static_cast<int>(std::ceil(v * m)), 1, m) - 1;
    }
    hist[flat_index(cell, m)] += 1.0;
  }
  auto cdf = cumulate(t_spec, hist);
  std::vector<int> idx(t_spec.d);
  const double scale = std::sqrt(window_mass);
  for (std::size_t p = 0; p < cdf.size(); ++p) {
    cdf[p] = (cdf[p] - window_mass * offset_volume(t_spec, p, idx)) / scale;
  }
  return GridFunction::from_cdf(t_spec, std::move(cdf));
}

void write_field(const IncrementField& field, const std::filesystem::path& stem) {
  auto bin = stem;
  bin += ".bin";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw DomainError("cannot open " + bin.string() + " for writing");
  binary::write_magic(out, kFieldMagic);
  const std::size_t anchors = field.config.anchor_count();
  const std::size_t P = field.offsets();
  binary::write_u64(out, anchors);
  binary::write_u64(out, P);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t u = 0; u < anchors; ++u) binary::write_f64(out, field.values[u * P + p]);
  }
  nlohmann::json side{{"config", to_json(field.config)},
                      {"mode", to_string(field.mode)},
                      {"n", field.n},
                      {"seed", to_json(field.seed)}};
  side["eta"] = field.eta ? nlohmann::json(*field.eta) : nlohmann::json(nullptr);
  auto js = stem;
  js += ".json";
  std::ofstream(js) << side.dump(2) << '\n';
}

IncrementField read_field(const std::filesystem::path& stem) {
  auto js = stem;
  js += ".json";
  std::ifstream side_in(js);
  if (!side_in) throw DomainError("cannot open " + js.string());
  const auto side = nlohmann::json::parse(side_in);
  IncrementField field;
  field.config = window_config_from_json(side.at("config"), 1);
  const auto mode = side.at("mode").get<std::string>();
  field.mode = mode == "raw" ? FieldMode::raw : mode == "centered" ? FieldMode::centered : FieldMode::poissonized;
  field.n = side.at("n").get<std::uint64_t>();
  if (!side.at("eta").is_null()) field.eta = side.at("eta").get<std::uint64_t>();
  field.seed = SeedStream(side.at("seed").at("root").get<std::uint64_t>(),
                          side.at("seed").at("path").get<std::vector<std::uint64_t>>());

  auto bin = stem;
  bin += ".bin";
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw DomainError("cannot open " + bin.string());
  binary::expect_magic(in, kFieldMagic, bin);
  const std::uint64_t anchors = binary::read_u64(in);
  const std::uint64_t P = binary::read_u64(in);
  if (anchors != field.config.anchor_count() || P != field.offsets()) {
    throw ShapeError("field file " + bin.string() + " does not match its sidecar");
  }
  field.values.resize(anchors * P);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t u = 0; u < anchors; ++u) field.values[u * P + p] = binary::read_f64(in);
  }
  return field;
}

}  // namespace inclab
