#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "geoextremes/error.hpp"
#include "geoextremes/sampling.hpp"

using namespace geoextremes;

namespace {

std::vector<Point> brute_ball(std::span<const Point> pts, const Point &c, double r)
{
  std::vector<Point> out;
  for (const Point &p : pts) {
    if (distance(p, c) <= r) {
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace

TEST(Seeds, ReproducibleAndDistinct)
{
  const SeedSpec a{42, 3};
  EXPECT_EQ(a.engine(0)(), a.engine(0)());
  EXPECT_NE(a.engine(0)(), a.engine(1)());
  EXPECT_NE(a.engine(0)(), (SeedSpec{42, 4}).engine(0)());
  EXPECT_NE(a.engine(0)(), (SeedSpec{43, 3}).engine(0)());
}

TEST(PoissonSampling, CountMeanAndVariance)
{
  const auto lam = IntensitySpec::constant(5.0);
  const Box box = Box::cube(2, 0.0, 2.0);
  const int reps = 4000;
  double s = 0;
  double s2 = 0;
  for (int j = 0; j < reps; ++j) {
    const double n = static_cast<double>(sample_poisson(lam, box, {1, std::uint64_t(j)}).size());
    s += n;
    s2 += n * n;
  }
  const double mean = s / reps;
  const double var = s2 / reps - mean * mean;
  EXPECT_NEAR(mean, 20.0, 4 * std::sqrt(20.0 / reps));
  EXPECT_NEAR(var / mean, 1.0, 0.1);
}

TEST(PoissonSampling, SameSeedSamePoints)
{
  const auto lam = IntensitySpec::constant(50.0);
  const Box box = Box::cube(2, 0.0, 1.0);
  const auto a = sample_poisson(lam, box, {9, 1});
  const auto b = sample_poisson(lam, box, {9, 1});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
  }
}

TEST(PoissonSampling, ThinningFollowsDensity)
{
  // f(x) = 1 + 1.5 (x - 1/2): E[x] = 1/2 + 1.5/12
  const auto lam = IntensitySpec::scaled_density(1.0, 20000.0, Density::linear_ramp(2, 1.5));
  const auto eta = sample_poisson(lam, Box::cube(2, -0.2, 1.2), {3, 0});
  double sx = 0;
  for (const Point &p : eta.points()) {
    ASSERT_TRUE(p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1);
    sx += p.x;
  }
  EXPECT_NEAR(static_cast<double>(eta.size()), 20000.0, 5 * std::sqrt(20000.0));
  EXPECT_NEAR(sx / eta.size(), 0.5 + 1.5 / 12, 0.01);
}

TEST(PoissonSampling, EnvelopeViolationDetected)
{
  Density bad = Density::uniform(2);
  bad.constant = false;
  bad.f = [](const Point &) { return 2.0; };
  const auto lam = IntensitySpec::scaled_density(1.0, 100.0, bad);
  EXPECT_THROW(sample_poisson(lam, Box::cube(2, 0, 1), {1, 0}), EnvelopeViolation);
}

TEST(PoissonSampling, BallAndShellRegions)
{
  const auto lam = IntensitySpec::constant(2.0, 3);
  Rng rng(1);
  const auto in_ball = sample_poisson_points(lam, Ball{{1, 1, 1}, 2.0, 3}, rng);
  for (const Point &p : in_ball) {
    EXPECT_LE(distance(p, {1, 1, 1}), 2.0);
  }
  const auto in_shell = sample_poisson_points(lam, Shell{{0, 0, 0}, 1.0, 1.5, 3}, rng);
  for (const Point &p : in_shell) {
    EXPECT_GT(norm(p), 1.0);
    EXPECT_LE(norm(p), 1.5);
  }
}

TEST(PointConfiguration, QueryBallMatchesBruteForce)
{
  for (int d : {2, 3}) {
    const auto lam = IntensitySpec::constant(d == 2 ? 300.0 : 100.0, d);
    const Box box = Box::cube(d, 0.0, 2.0);
    const auto eta = sample_poisson(lam, box, {5, std::uint64_t(d)});
    Rng rng(2);
    for (int rep = 0; rep < 50; ++rep) {
      Point c;
      for (int a = 0; a < d; ++a) {
        c[a] = -0.5 + 3 * uniform01(rng);
      }
      const double r = 0.8 * uniform01(rng);
      auto got = eta.query_ball(c, r);
      auto want = brute_ball(eta.points(), c, r);
      std::sort(got.begin(), got.end(), TotalOrderLess{});
      std::sort(want.begin(), want.end(), TotalOrderLess{});
      EXPECT_EQ(got, want);
      EXPECT_EQ(eta.count_in_ball(c, r), want.size());
    }
  }
}

TEST(PointConfiguration, EmptyQueries)
{
  const PointConfiguration empty(2, {}, Box::cube(2, 0, 1));
  EXPECT_TRUE(empty.query_ball({0.5, 0.5}, 1.0).empty());
  const PointConfiguration one(2, {{0.5, 0.5}}, Box::cube(2, 0, 1));
  EXPECT_TRUE(one.query_ball({0, 0}, 0.1).empty());
  EXPECT_EQ(one.query_ball({0, 0}, 1.0).size(), 1u);
}

TEST(PointConfiguration, KnnTotalOrderTies)
{
  const PointConfiguration mu(2, {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}, {2, 2}}, Box::cube(2, -1, 2));
  // equal norms are ranked lexicographically: (-1,0) < (0,-1) < (0,1) < (1,0)
  EXPECT_EQ(mu.knn_query({0, 0}, 1), (Point{-1, 0}));
  EXPECT_EQ(mu.knn_query({0, 0}, 2), (Point{0, -1}));
  EXPECT_EQ(mu.knn_query({0, 0}, 3), (Point{0, 1}));
  EXPECT_EQ(mu.knn_query({0, 0}, 4), (Point{1, 0}));
  EXPECT_EQ(mu.knn_query({0, 0}, 5), (Point{2, 2}));
  EXPECT_THROW(mu.knn_query({0, 0}, 6), InsufficientPoints);
  // a query point outside the configuration counts every point
  EXPECT_EQ(mu.knn_query({5, 5}, 5), (Point{-1, 0}));
  EXPECT_EQ(mu.knn_query({5, 5}, 6), (Point{0, -1}));
}

TEST(PointConfiguration, KnnMatchesSortedBruteForce)
{
  const auto lam = IntensitySpec::constant(200.0);
  const auto eta = sample_poisson(lam, Box::cube(2, 0, 1), {8, 0});
  for (std::size_t i = 0; i < eta.size(); i += 17) {
    std::vector<Point> diffs;
    for (const Point &p : eta.points()) {
      if (!(p == eta[i])) {
        diffs.push_back(p - eta[i]);
      }
    }
    std::sort(diffs.begin(), diffs.end(), TotalOrderLess{});
    for (int k : {1, 2, 5}) {
      EXPECT_EQ(eta.knn_query(eta[i], k), eta[i] + diffs[k - 1]);
      EXPECT_DOUBLE_EQ(eta.kth_neighbor_distance(i, k), norm(diffs[k - 1]));
    }
    // invariant: exactly k - 1 points strictly before the k-th neighbour
    const Point y = eta.knn_query(eta[i], 3);
    int before = 0;
    for (const Point &p : eta.points()) {
      if (!(p == eta[i]) && compare_total_order(p - eta[i], y - eta[i]) < 0) {
        ++before;
      }
    }
    EXPECT_EQ(before, 2);
  }
}

TEST(PointConfiguration, SimpleAfterSampling)
{
  const auto eta = sample_poisson(IntensitySpec::constant(1000.0), Box::cube(2, 0, 1), {4, 4});
  std::vector<Point> p(eta.points().begin(), eta.points().end());
  std::sort(p.begin(), p.end(), TotalOrderLess{});
  EXPECT_EQ(std::adjacent_find(p.begin(), p.end()), p.end());
}

TEST(PointsCsv, RoundTrip)
{
  const auto eta = sample_poisson(IntensitySpec::constant(30.0, 3), Box::cube(3, 0, 1), {2, 2});
  std::stringstream ss;
  write_points_csv(ss, eta.points(), 3);
  const auto back = read_points_csv(ss, 3);
  ASSERT_EQ(back.size(), eta.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i], eta[i]);
  }
}

TEST(Mecke, CountInUnitSquare)
{
  const auto rep = verify_mecke(IntensitySpec::constant(1.0), MeckeFunction::indicator_unit_cube, 0.0, 20000,
                                {1, 0});
  EXPECT_NEAR(rep.rhs_exact, 1.0, 1e-15);
  EXPECT_LE(std::abs(rep.lhs - rep.rhs_exact), 4 * rep.lhs_se);
  EXPECT_LE(std::abs(rep.z_score), 4.0);
}

TEST(Mecke, IsolatedPoints)
{
  const auto rep = verify_mecke(IntensitySpec::constant(1.0), MeckeFunction::isolated_in_unit_cube, 0.1,
                                20000, {2, 0});
  EXPECT_NEAR(rep.rhs_exact, std::exp(-std::numbers::pi * 0.01), 1e-14);
  EXPECT_LE(std::abs(rep.lhs - rep.rhs_exact), 4 * rep.lhs_se);
  EXPECT_LE(std::abs(rep.rhs - rep.rhs_exact), 4 * rep.rhs_se);
}

TEST(Mecke, ClosePairs)
{
  const auto rep = verify_mecke(IntensitySpec::constant(5.0), MeckeFunction::close_pair, 0.25, 20000, {3, 0});
  EXPECT_LE(std::abs(rep.lhs - rep.rhs_exact), 4 * rep.lhs_se);
  EXPECT_LE(std::abs(rep.rhs - rep.rhs_exact), 4 * rep.rhs_se);
  EXPECT_LE(std::abs(rep.z_score), 4.0);
}

TEST(Mecke, InhomogeneousIntensity)
{
  const auto lam = IntensitySpec::scaled_density(1.0, 30.0, Density::linear_ramp(2, 1.0));
  const auto rep = verify_mecke(lam, MeckeFunction::isolated_in_unit_cube, 0.1, 20000, {4, 0});
  EXPECT_TRUE(std::isnan(rep.rhs_exact));
  EXPECT_LE(std::abs(rep.z_score), 4.0);
}
