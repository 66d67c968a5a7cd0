#include <gtest/gtest.h>

#include <cmath>

#include "anosov_lab/anosov.hpp"
#include "anosov_lab/catalog.hpp"
#include "anosov_lab/limitset.hpp"

using namespace alab;

namespace {

// The round conic x^2 + y^2 = z^2; the normalized determinant tends to 1/2 as points collide.
std::vector<FlagPoint> conic_flags(int n) {
  std::vector<FlagPoint> out;
  for (int i = 0; i < n; ++i) {
    double th = 2 * M_PI * i / n;
    Eigen::Vector3d e0 = Eigen::Vector3d(std::cos(th), std::sin(th), 1).normalized();
    Eigen::Vector3d t(-std::sin(th), std::cos(th), 0);
    Eigen::Vector3d e1 = (t - t.dot(e0) * e0).normalized();
    Matrix f(3, 3);
    f.col(0) = e0;
    f.col(1) = e1;
    f.col(2) = e0.cross(e1);
    out.push_back({f, th});
  }
  return out;
}

}  // namespace

TEST(Domination, SlopeIsMonotoneInTheRadius) {
  std::vector<double> minima{0, 0.8, 1.1, 2.0, 2.4, 3.5, 3.9, 4.4, 5.6, 6.0};
  double prev = 1e9;
  for (std::size_t n = 5; n <= minima.size(); ++n) {
    DominationFit f = domination_fit_minima(std::vector<double>(minima.begin(), minima.begin() + n), 1);
    EXPECT_LE(f.mu, prev + 1e-15);
    EXPECT_GE(f.min_margin, -1e-12);
    prev = f.mu;
  }
  std::vector<double> flat(10, 0.0);
  EXPECT_FALSE(domination_fit_minima(flat, 1).verdict);
}

TEST(Domination, FuchsianIsDominated) {
  Representation rho = catalog_representation("fuchsian-g2-sym2");
  Group g(rho.presentation());
  Ball b = g.ball(5);
  BallSpectra s = evaluate_ball(rho, b);
  for (int k = 1; k <= 2; ++k) {
    DominationFit f = domination_fit(b, s, k);
    EXPECT_TRUE(f.verdict);
    for (std::size_t i = 0; i < b.size(); ++i) ASSERT_GE(s.tau(i, k), f.mu * b.length(i) - f.C - 1e-9);
  }
}

TEST(Hyperconvexity, ConicIsHalf) {
  auto flags = conic_flags(400);
  HyperconvexityReport r = hyperconvexity_check(flags, 2);
  EXPECT_TRUE(r.verdict);
  EXPECT_GT(r.min_det, 0.5 - 1e-3);
  EXPECT_LT(r.min_det, 0.51);
  EXPECT_GT(r.triples_tested, 1000U);
}

TEST(Hyperconvexity, DegenerateConfigurationFails) {
  // all lines in one plane, with xi^2 = that plane: det vanishes identically
  std::vector<FlagPoint> flags;
  for (int i = 0; i < 200; ++i) {
    double th = M_PI * i / 200;
    Matrix f(3, 3);
    f.col(0) = Eigen::Vector3d(std::cos(th), std::sin(th), 0);
    f.col(1) = Eigen::Vector3d(-std::sin(th), std::cos(th), 0);
    f.col(2) = Eigen::Vector3d(0, 0, 1);
    flags.push_back({f, th});
  }
  HyperconvexityReport r = hyperconvexity_check(flags, 2);
  EXPECT_FALSE(r.verdict);
  EXPECT_LT(r.min_det, 1e-12);
}

TEST(Isospectral, SelfAndDualOfSym2AreIsospectral) {
  Representation rho = catalog_representation("fuchsian-g2-sym2");
  Group g(rho.presentation());
  EXPECT_TRUE(gap_isospectral_check(g, rho, rho, 4).isospectral());
  EXPECT_TRUE(gap_isospectral_check(g, rho, dual_rep(rho), 4).isospectral());
  Representation v = catalog_representation("triangle-334-vinberg(1)");
  Group gt(v.presentation());
  IsospectralReport r = gap_isospectral_check(gt, v, dual_rep(v), 8);
  EXPECT_FALSE(r.isospectral());
  EXPECT_GT(r.max_deviation, 0.01);
}

TEST(Isospectral, TwistDeformationIsDetected) {
  Representation a = catalog_representation("fuchsian-g2-sym2");
  Representation b = catalog_representation("fuchsian-g2-twist(0.3)-sym2");
  Group g(a.presentation());
  IsospectralReport r = gap_isospectral_check(g, a, b, 5);
  EXPECT_GT(r.max_deviation, 0.01);
  EXPECT_TRUE(gap_isospectral_check(g, b, dual_rep(b), 5).isospectral());
}

TEST(LimitCone, PointsInWeylChamber) {
  Representation v = catalog_representation("triangle-334-vinberg(1)");
  Group g(v.presentation());
  std::vector<Vector> lambdas;
  for (const Word& w : g.conjugacy_reps(8)) lambdas.push_back(spectrum_of(v, w).jordan);
  LimitConeSample c = limit_cone(lambdas);
  ASSERT_FALSE(c.points.empty());
  for (const Vector& p : c.points) {
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    for (int k = 0; k + 1 < p.size(); ++k) EXPECT_GE(p(k), p(k + 1) - 1e-12);
  }
  EXPECT_LE(c.angle_min, c.angle_max);
  EXPECT_GT(c.hull_area, 0);
}

TEST(LocalConformality, Sym2IsConformalAtP2) {
  Representation rho = catalog_representation("fuchsian-g2-sym2");
  Group g(rho.presentation());
  Ball b = g.ball(3);
  BallSpectra s = evaluate_ball(rho, b);
  EXPECT_EQ(local_conformal_check(s, 2), 0.0);
  // a = (t, 0, -t): a_2 - a_3 is the full gap
  EXPECT_GT(local_conformal_check(s, 3), 1.0);
}
