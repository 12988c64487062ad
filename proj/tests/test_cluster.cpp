#include <gtest/gtest.h>

#include <fstream>
#include <optional>

#include "feasibility_oracle.hpp"
#include "inclab/errors.hpp"
#include "inclab/rate.hpp"

using namespace inclab;

namespace {

struct StoredPath {
  std::string name;
  BallSpec ball;
  double eps = 0;
  std::vector<GridFunction> path, targets;
};

std::vector<StoredPath> load_paths() {
  std::ifstream in(INCLAB_TEST_DATA "/cluster_paths.json");
  const auto j = nlohmann::json::parse(in);
  std::vector<StoredPath> out;
  for (const auto& p : j["paths"]) {
    StoredPath s;
    s.name = p["name"];
    s.ball = ball_spec_from_json(p["ball"]);
    s.eps = p["eps"];
    const GridSpec spec(1, p["m"].get<int>());
    for (const auto& g : p["path"]) s.path.push_back(GridFunction::from_density(spec, g.get<std::vector<double>>()));
    for (const auto& g : p["targets"])
      s.targets.push_back(GridFunction::from_density(spec, g.get<std::vector<double>>()));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST(ClusterCheck, MatchesDirectScanOracle) {
  const auto paths = load_paths();
  ASSERT_EQ(paths.size(), 8u);
  for (const auto& p : paths) {
    const auto rep = cluster_check(p.path, p.targets, p.ball, p.eps);
    std::vector<bool> member;
    for (const auto& f : p.path) member.push_back(oracle::exhaustive_r(f, p.ball.kind, p.ball.epsilon) <= p.ball.threshold());
    std::optional<std::size_t> absorbed;
    for (std::size_t j = member.size(); j-- > 0 && member[j];) absorbed = j;
    EXPECT_EQ(rep.absorption_index, absorbed) << p.name;
    std::size_t members = 0;
    for (std::size_t j = 0; j < member.size(); ++j) {
      members += member[j];
      EXPECT_EQ(rep.membership[j] == Membership::member, member[j]) << p.name << " step " << j;
    }
    EXPECT_EQ(rep.member_count, members) << p.name;
    EXPECT_EQ(rep.indeterminate_count, 0u) << p.name;
    for (std::size_t i = 0; i < p.targets.size(); ++i) {
      std::optional<std::size_t> first;
      std::size_t visits = 0;
      for (std::size_t j = 0; j < p.path.size(); ++j) {
        double dist = 0;
        for (std::size_t k = 0; k < p.path[j].cdf().size(); ++k)
          dist = std::max(dist, std::abs(p.path[j].cdf()[k] - p.targets[i].cdf()[k]));
        if (dist <= p.eps) {
          ++visits;
          if (!first) first = j;
        }
      }
      EXPECT_EQ(rep.first_visit[i], first) << p.name;
      EXPECT_EQ(rep.visit_count[i], visits) << p.name;
    }
  }
}

TEST(ClusterCheck, RejectsTargetsOutsideBall) {
  const GridSpec spec(1, 2);
  const std::vector<GridFunction> path{GridFunction::zero(spec)};
  const std::vector<GridFunction> far{GridFunction::from_density(spec, std::vector<double>{3, 3})};
  EXPECT_THROW(cluster_check(path, far, BallSpec::strassen(0.1), 0.1), PreconditionError);
}
