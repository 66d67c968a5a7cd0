#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "anosov_lab/cache.hpp"
#include "anosov_lab/catalog.hpp"
#include "anosov_lab/hausdorff.hpp"

using namespace alab;

namespace {

std::vector<Eigen::VectorXd> segment(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) pts.push_back(Eigen::VectorXd::Constant(1, u(rng)));
  return pts;
}

// Middle-thirds Cantor set from random ternary digits in {0, 2}.
std::vector<Eigen::VectorXd> cantor(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    double x = 0, scale = 1;
    for (int k = 0; k < 30; ++k) {
      scale /= 3;
      if (rng() & 1U) x += 2 * scale;
    }
    pts.push_back(Eigen::VectorXd::Constant(1, x));
  }
  return pts;
}

}  // namespace

TEST(BoxDim, Calibration) {
  EXPECT_NEAR(box_dim(affine_cloud(segment(10000, 1))).dimension, 1.0, 0.05);
  EXPECT_NEAR(box_dim(affine_cloud(cantor(10000, 2))).dimension, std::log(2.0) / std::log(3.0), 0.05);
}

TEST(BoxDim, GraphInProductMetricTakesTheLargerFactor) {
  auto xs = segment(10000, 3);
  std::vector<Eigen::VectorXd> ys;
  for (const auto& x : xs) ys.push_back(Eigen::VectorXd::Constant(1, x(0) * x(0)));
  MetricPointCloud c;
  c.metric = MetricPointCloud::Metric::product;
  c.factors = {CloudFactor{false, xs}, CloudFactor{false, ys}};
  EXPECT_NEAR(box_dim(c).dimension, 1.0, 0.1);
}

TEST(BoxDim, FitFromExactCounts) {
  std::vector<double> eps;
  std::vector<std::vector<std::size_t>> counts;
  for (int k = 1; k <= 8; ++k) {
    eps.push_back(std::pow(0.25, k));
    counts.push_back({std::size_t{1} << (3 * k)});
  }
  BoxDimResult r = fit_box_counts(eps, counts);
  EXPECT_NEAR(r.dimension, 1.5, 1e-2);
}

TEST(BoxDim, SubsetKeepsRows) {
  MetricPointCloud c = affine_cloud(segment(100, 4));
  std::vector<bool> keep(100, false);
  keep[3] = keep[50] = true;
  MetricPointCloud s = subset(c, keep);
  ASSERT_EQ(s.size(), 2U);
  EXPECT_EQ(s.factors[0].points[1], c.factors[0].points[50]);
}

TEST(Conical, VerdictCountsHitsInWindow) {
  std::vector<double> tau, near, far;
  for (int k = 0; k <= 40; ++k) {
    tau.push_back(k);
    near.push_back(k + 0.5 * std::sin(k));
    far.push_back(2.0 * k);
  }
  ConicalOptions o;
  o.R = 1.0;
  o.window_lo = 10;
  ConicalVerdict v = conical_verdict(tau, near, o);
  EXPECT_TRUE(v.verdict);
  EXPECT_EQ(v.hits.size(), 31U);
  EXPECT_EQ(v.window_hi, 40);
  EXPECT_FALSE(conical_verdict(tau, far, o).verdict);
  o.beta = 0.5;  // |0.5 tau - tau/2| = 0
  std::vector<double> half;
  for (double t : tau) half.push_back(t / 2);
  EXPECT_TRUE(conical_verdict(tau, half, o).verdict);
}

TEST(Conical, DefaultRIsTwiceTheStep) {
  Representation rho = catalog_representation("triangle-334-vinberg(1)");
  Representation bar = dual_rep(rho);
  EXPECT_NEAR(default_conical_R(rho, bar),
              2 * std::max(generator_step_bound(rho), generator_step_bound(bar)), 1e-12);
}

TEST(Ndiff, RefusesIsospectralPairs) {
  Representation rho = catalog_representation("fuchsian-g2-sym2");
  Group g(rho.presentation());
  Ball b = g.ball(4);
  BallSpectra s = evaluate_ball(rho, b);
  NdiffOptions o;
  o.samples = 100;
  o.depth = 8;
  o.iso_radius = 4;
  EXPECT_THROW(ndiff_dimension(g, rho, rho, single_spectra(b, s), o), GapIsospectralError);
  EXPECT_THROW(ndiff_dimension(g, rho, dual_rep(rho), dual_pair_spectra(b, s), o), GapIsospectralError);
}

TEST(Cache, RoundTripAndKeying) {
  Representation rho = catalog_representation("triangle-334-vinberg(1)");
  Group g(rho.presentation());
  CachedBall data;
  data.ball = g.ball(8);
  data.spectra = evaluate_ball(rho, data.ball);
  CacheKey key = make_cache_key(g.presentation(), &rho, 8);
  auto dir = std::filesystem::temp_directory_path() / "anosov_lab_cache_test";
  std::filesystem::create_directories(dir);
  std::string file = (dir / cache_file_name(key)).string();
  save_cache(file, key, data);
  auto back = load_cache(file, key);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->ball.parent, data.ball.parent);
  EXPECT_EQ(back->ball.last, data.ball.last);
  EXPECT_EQ(back->spectra.cartan, data.spectra.cartan);
  CacheKey other = make_cache_key(g.presentation(), &rho, 7);
  EXPECT_FALSE(load_cache(file, other).has_value());
  CacheKey other_rep = make_cache_key(g.presentation(), nullptr, 8);
  EXPECT_FALSE(load_cache(file, other_rep).has_value());
  std::filesystem::resize_file(file, std::filesystem::file_size(file) / 2);
  EXPECT_FALSE(load_cache(file, key).has_value());
  std::filesystem::remove_all(dir);
}
