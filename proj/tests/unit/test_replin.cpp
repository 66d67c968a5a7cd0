#include <gtest/gtest.h>

#include <random>

#include "anosov_lab/catalog.hpp"
#include "anosov_lab/group.hpp"
#include "anosov_lab/replin.hpp"
#include "spectral.hpp"

using namespace alab;

namespace {

std::vector<Word> sample_ball(const Group& g, int radius, std::size_t count, std::uint64_t seed) {
  Ball b = g.ball(radius);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
  std::vector<Word> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(b.word(pick(rng)));
  return out;
}

}  // namespace

TEST(Spectra, CartanMatchesGramEigenOracle) {
  for (const std::string name : {"triangle-334-vinberg(1)", "triangle-334-vinberg(0)", "f2-schottky"}) {
    Representation rho = catalog_representation(name);
    Group g(rho.presentation());
    for (const Word& w : sample_ball(g, 10, 1000, 7)) {
      SpectrumSample s = spectrum_of(rho, w);
      std::vector<double> o = oracle::cartan(rho, w);
      for (int k = 0; k < rho.dim(); ++k) ASSERT_NEAR(s.cartan(k), o[static_cast<std::size_t>(k)], 1e-10) << name;
    }
  }
}

TEST(Spectra, BallEvaluationMatchesPerElement) {
  Representation rho = catalog_representation("triangle-334-vinberg(1)");
  Group g(rho.presentation());
  Ball b = g.ball(9);
  BallSpectra one = evaluate_ball(rho, b, SpectraOptions{true, false, 1});
  BallSpectra four = evaluate_ball(rho, b, SpectraOptions{true, false, 4});
  EXPECT_EQ(one.cartan, four.cartan);
  EXPECT_EQ(one.jordan, four.jordan);
  for (std::size_t i = 0; i < b.size(); i += 37) {
    std::vector<double> o = oracle::cartan(rho, b.word(i));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(one.a(i)[k], o[static_cast<std::size_t>(k)], 1e-10);
  }
}

TEST(Spectra, JordanPowerAndConjugation) {
  Representation rho = catalog_representation("triangle-334-vinberg(1)");
  const Presentation& p = rho.presentation();
  Group g(p);
  std::mt19937_64 rng(2);
  for (const Word& w : g.conjugacy_reps(7)) {
    Vector l = spectrum_of(rho, w).jordan;
    for (int n : {2, 5}) {
      Word wn;
      for (int k = 0; k < n; ++k) wn = wn * w;
      Vector ln = spectrum_of(rho, wn).jordan;
      EXPECT_LT((ln - n * l).cwiseAbs().maxCoeff(), 1e-6);
    }
    for (const Word& h : sample_ball(g, 5, 3, rng())) {
      Vector lc = spectrum_of(rho, h * w * p.invert(h)).jordan;
      EXPECT_LT((lc - l).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(Spectra, NormalizedProductsStayNormalized) {
  Representation rho = catalog_representation("fuchsian-g2-sym2");
  Group g(rho.presentation());
  Ray r = g.directed_ray(0.7, 60);
  NormalizedMatrix m = evaluate(rho, r.word);
  EXPECT_NEAR(m.m.norm(), 1.0, 1e-12);
  EXPECT_GT(m.log_scale, 100);
  Vector a = cartan_projection(m);
  EXPECT_NEAR(a.sum(), 0.0, 1e-9);
  for (int k = 0; k + 1 < a.size(); ++k) EXPECT_GE(a(k), a(k + 1));
}

TEST(Representations, ChecksAndDual) {
  for (const std::string& name : catalog_names()) {
    std::string n = name;
    if (auto pos = n.find("(t)"); pos != std::string::npos) n.replace(pos, 3, "(0.5)");
    if (auto pos = n.find("(s)"); pos != std::string::npos) n.replace(pos, 3, "(0.3)");
    Representation rho = catalog_representation(n);
    EXPECT_TRUE(rho.check().ok()) << n;
    Representation dual = dual_rep(rho);
    EXPECT_TRUE(dual.check().ok()) << n;
    Group g(rho.presentation());
    for (const Word& w : g.conjugacy_reps(4)) {
      Vector a = spectrum_of(rho, w).jordan_gaps(), b = spectrum_of(dual, w).jordan_gaps();
      EXPECT_NEAR(a(0), b(b.size() - 1), 1e-8);
    }
  }
}

TEST(Representations, FileRoundTrip) {
  Representation rho = catalog_representation("triangle-334-vinberg(1)");
  RepresentationDocument doc = parse_representation_document(rho.to_text());
  Representation back = representation_from_document(doc, rho.presentation(), "copy");
  for (std::size_t s = 0; s < rho.matrices().size(); ++s)
    EXPECT_EQ(rho.matrix(static_cast<Letter>(s)), back.matrix(static_cast<Letter>(s)));
  EXPECT_EQ(back.to_text(), rho.to_text());
}

TEST(Representations, RejectsBrokenRelators) {
  Representation rho = catalog_representation("fuchsian-g2-sl2");
  std::vector<Matrix> mats = rho.matrices();
  mats[0](0, 1) += 1e-3;
  mats[1] = mats[0].inverse();
  EXPECT_THROW(Representation(rho.presentation(), mats, "broken"), InputError);
  EXPECT_THROW(parse_representation_document("dim 2\nfield C\n"), InputError);
}

TEST(Representations, Sym2MatchesSquaredSpectrum) {
  Representation rho2 = catalog_representation("fuchsian-g2-sl2");
  Representation rho3 = sym2_lift(rho2);
  Group g(rho2.presentation());
  for (const Word& w : g.conjugacy_reps(4)) {
    double t2 = spectrum_of(rho2, w).jordan_gaps()(0);
    Vector t3 = spectrum_of(rho3, w).jordan_gaps();
    EXPECT_NEAR(t3(0), t2, 1e-8);
    EXPECT_NEAR(t3(1), t2, 1e-8);
  }
}

TEST(Geometry, AttractorAndGromovProduct) {
  NormalizedMatrix m = identity_normalized(3);
  m.m << 5, 0, 0, 0, 1, 0, 0, 0, 0.2;
  renormalize(m);
  ProjectivePoint u = cartan_attractor(m);
  EXPECT_NEAR(std::abs(u.v(0)), 1.0, 1e-14);
  EXPECT_THROW(cartan_attractor(identity_normalized(3)), AmbiguousAttractor);
  HyperplanePoint V{Vector::Unit(3, 0)};
  EXPECT_NEAR(gromov_product(V, u), 0.0, 1e-14);
  EXPECT_NEAR(proj_dist(u, make_projective(-u.v)), 0.0, 1e-15);
}
