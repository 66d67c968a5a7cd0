#include <gtest/gtest.h>

#include <cmath>

#include "anosov_lab/catalog.hpp"
#include "anosov_lab/exponents.hpp"
#include "anosov_lab/group.hpp"

using namespace alab;

namespace {

struct Synthetic {
  Ball ball;
  std::vector<double> length_values(double c) const {
    std::vector<double> v(ball.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * ball.length(i);
    return v;
  }
};

Synthetic free_ball(int n) { return Synthetic{Group(free_presentation(2)).ball(n)}; }

}  // namespace

TEST(CriticalExponent, LinearFunctionalOnFreeGroup) {
  // #{g : c|g| <= t} grows like 3^{t/c}
  Synthetic s = free_ball(12);
  for (double c : {0.5, 1.0, 2.0}) {
    const double h = std::log(3.0) / c;
    ExponentOptions slope;
    EXPECT_NEAR(critical_exponent(s.length_values(c), s.ball.level_start, slope).value, h, 0.03 * h) << c;
    ExponentOptions root;
    root.method = ExponentMethod::poincare_root;
    EXPECT_NEAR(critical_exponent(s.length_values(c), s.ball.level_start, root).value, h, 1e-6) << c;
  }
}

TEST(CriticalExponent, ScalingIsInverse) {
  Synthetic s = free_ball(11);
  std::vector<double> v = s.length_values(1.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += 0.3 * std::sin(static_cast<double>(i));
  std::vector<double> w = v;
  for (double& x : w) x *= 2.5;
  ExponentOptions root;
  root.method = ExponentMethod::poincare_root;
  EXPECT_NEAR(critical_exponent(w, s.ball.level_start, root).value * 2.5,
              critical_exponent(v, s.ball.level_start, root).value, 1e-9);
}

TEST(CriticalExponent, RejectsNonPositiveFunctionals) {
  Synthetic s = free_ball(8);
  std::vector<double> v = s.length_values(-1.0);
  EXPECT_THROW(critical_exponent(v, s.ball.level_start), PositivityError);
  EXPECT_THROW(critical_exponent(v, Group(free_presentation(2)).ball(3).level_start), InputError);
}

TEST(QCurve, IsospectralPairGivesStraightSegment) {
  Representation rho = catalog_representation("triangle-334-vinberg(0)");
  Group g(rho.presentation());
  Ball b = g.ball(30);
  PairSpectra p = single_spectra(b, evaluate_ball(rho, b));
  ExponentOptions opts;
  opts.method = ExponentMethod::poincare_root;
  QCurveSampler sampler(p, opts);
  const double h_tau = critical_exponent(p.tau, p.level_start, opts).value;
  QCurvePoint axis = sampler.point(0.0);
  ASSERT_TRUE(axis.ok) << axis.reason;
  // the point on the tau axis is (h_tau, 0)
  EXPECT_NEAR(axis.s, h_tau, 1e-9);
  EXPECT_NEAR(axis.u, 0.0, 1e-12);
  auto pts = qcurve(sampler, default_angles(9));
  for (const auto& q : pts) {
    ASSERT_TRUE(q.ok);
    EXPECT_NEAR(q.s + q.u, h_tau, 1e-6);  // Q = {s + u = h_tau}
    EXPECT_NEAR(q.h_scaled, 1.0, 1e-6);
  }
  QCurveShape shape = qcurve_shape(pts);
  EXPECT_TRUE(shape.convex(1e-6));
  EXPECT_LT(shape.symmetry_deviation, 1e-6);
}

TEST(Intersection, IdentityAndHomogeneity) {
  std::vector<double> tau{1.0, 2.0, 2.5, 3.1, 4.0}, taubar{1.5, 1.9, 3.0, 2.2, 5.5};
  EXPECT_EQ(intersection(tau, tau, 3.5).value, 1.0);
  const double base = intersection(tau, taubar, 3.5).value;
  for (double s : {0.1, 2.0, 7.5}) {
    std::vector<double> sb = taubar;
    for (double& x : sb) x *= s;
    EXPECT_NEAR(intersection(tau, sb, 3.5).value, s * base, 1e-12 * s);
    std::vector<double> st = tau;
    for (double& x : st) x *= s;
    EXPECT_NEAR(intersection(st, taubar, 3.5 * s).value, base / s, 1e-12 / s);
  }
  EXPECT_THROW(intersection(tau, taubar, 0.5), InputError);
}

TEST(Intersection, SelfPairFromClasses) {
  Representation rho = catalog_representation("triangle-334-vinberg(1)");
  Group g(rho.presentation());
  ClassSpectra cs = class_spectra(g, rho, rho, 8);
  EXPECT_EQ(intersection(cs.tau, cs.taubar, 1e9).value, 1.0);
}

TEST(Guards, IsospectralRefusal) {
  EXPECT_THROW(require_not_isospectral(1e-9), GapIsospectralError);
  EXPECT_NO_THROW(require_not_isospectral(0.2));
  try {
    require_not_isospectral(0);
  } catch (const Error& e) {
    EXPECT_EQ(exit_code(e.kind()), 2);
  }
}

TEST(TheoremB, ChainChecksUseTolerances) {
  auto est = [](double v) {
    CrossValidatedExponent c;
    c.slope.value = c.root.value = v;
    c.slope.residual = 0.01;
    return c;
  };
  TheoremBInputs in;
  in.h_tau = est(1.0);
  in.h_taubar = est(1.0);
  in.h_inf = est(0.8);
  in.ext_dim = ChainValue{"Hff(Ext)", 0.82, 0.03, true};
  in.curve_dim = ChainValue{"Hff(Xi)", 1.0, 0.03, true};
  TheoremBReport r = theoremB_report(in, 1.0, 0.5);
  EXPECT_TRUE(r.all_pass()) << r.text();
  in.ext_dim->value = 0.2;
  EXPECT_FALSE(theoremB_report(in, 1.0, 0.5).all_pass());
  EXPECT_THROW(theoremB_report(in, 1.0, 1e-9), GapIsospectralError);
}
