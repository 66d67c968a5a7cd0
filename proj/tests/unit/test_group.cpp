#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <random>
#include <set>

#include "anosov_lab/catalog.hpp"
#include "anosov_lab/group.hpp"
#include "bfs.hpp"
#include "dehn.hpp"

using namespace alab;

namespace {

Word random_word(const Presentation& p, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, static_cast<int>(p.generator_count()) - 1);
  Word w;
  for (std::size_t i = 0; i < n; ++i) w.letters.push_back(static_cast<Letter>(u(rng)));
  return w;
}

}  // namespace

TEST(FreeGroup, SphereSizes) {
  Group g(free_presentation(2));
  Ball b = g.ball(12);
  EXPECT_EQ(b.sphere_size(0), 1U);
  for (int n = 1; n <= 12; ++n) EXPECT_EQ(b.sphere_size(n), 4 * static_cast<std::size_t>(std::pow(3, n - 1))) << n;
}

TEST(SurfaceGroup, BallMatchesDehnBfs) {
  Presentation p = surface_presentation(2);
  Group g(p);
  Ball b = g.ball(5);
  oracle::BfsBall o = oracle::bfs_ball(fuchsian_surface_sl2(2), 5);
  oracle::Dehn dehn(p);
  for (int n = 0; n <= 5; ++n) {
    ASSERT_EQ(b.sphere_size(n), o.spheres[static_cast<std::size_t>(n)].size()) << n;
  }
  // every normal form is Dehn-reduced to a word of no greater length and is a distinct element
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    EXPECT_FALSE(dehn.equal(b.word(i).letters, b.word(j).letters));
  }
}

TEST(SurfaceGroup, NormalFormsAreGeodesic) {
  Presentation p = surface_presentation(2);
  Group g(p);
  oracle::BfsBall o = oracle::bfs_ball(fuchsian_surface_sl2(2), 4);
  oracle::Dehn dehn(p);
  std::mt19937_64 rng(5);
  // a reduced word of length n is equal to some oracle element of length n, and to none shorter
  for (int trial = 0; trial < 60; ++trial) {
    Word w = random_word(p, 7, rng);
    Word r = g.reduce(w);
    ASSERT_TRUE(dehn.equal(w.letters, r.letters));
    if (r.size() > 4) continue;
    bool found = false;
    for (std::size_t n = 0; n < r.size(); ++n)
      for (const auto& v : o.spheres[n]) EXPECT_FALSE(dehn.equal(v, r.letters));
    for (const auto& v : o.spheres[r.size()]) found = found || dehn.equal(v, r.letters);
    EXPECT_TRUE(found);
  }
}

TEST(SurfaceGroup, LongWordsAgreeWithDehn) {
  // long geodesics need the widest working precision
  Presentation p = surface_presentation(2);
  Group g(p);
  oracle::Dehn dehn(p);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Word w = random_word(p, 120, rng);
    Word r = g.reduce(w);
    EXPECT_TRUE(dehn.equal(w.letters, r.letters));
    EXPECT_EQ(g.reduce(r), r);
  }
  Word cut;
  Ray ray = g.directed_ray(1.0, 60, &cut);
  EXPECT_TRUE(dehn.equal(g.reduce(cut).letters, cut.letters));
  EXPECT_TRUE(g.is_geodesic(cut));
  EXPECT_EQ(ray.depth(), 60U);
}

class ReduceProperties : public ::testing::TestWithParam<Presentation> {};

TEST_P(ReduceProperties, IdempotentAndConsistent) {
  const Presentation& p = GetParam();
  Group g(p);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Word w = random_word(p, 1 + trial % 24, rng);
    Word r = g.reduce(w);
    EXPECT_LE(r.size(), w.size());
    EXPECT_EQ(g.reduce(r), r);
    EXPECT_TRUE(g.reduce(w * p.invert(r)).empty());
    EXPECT_EQ(g.reduce(p.invert(w)).size(), r.size());
  }
}

TEST_P(ReduceProperties, BallIsPrefixClosedAndShortlexSorted) {
  const Presentation& p = GetParam();
  Group g(p);
  const int radius = p.generator_count() > 8 ? 4 : 6;
  Ball b = g.ball(radius);
  for (int n = 1; n <= radius; ++n) {
    auto words = b.sphere_words(n);
    for (std::size_t i = 0; i < words.size(); ++i) {
      EXPECT_TRUE(g.is_normal_form(words[i]));
      EXPECT_TRUE(g.is_normal_form(words[i].prefix(words[i].size() - 1)));
      if (i > 0) EXPECT_LT(words[i - 1], words[i]);
    }
  }
}

TEST_P(ReduceProperties, EnumerationIndependentOfRepeatAndCap) {
  const Presentation& p = GetParam();
  Group g(p);
  Ball a = g.ball(5), b = g.ball(5);
  EXPECT_EQ(a.parent, b.parent);
  EXPECT_EQ(a.last, b.last);
  try {
    g.ball(30, EnumerationLimits{a.size()});
    FAIL() << "cap not enforced";
  } catch (const ResourceError& e) {
    EXPECT_GE(e.completed_radius(), 4);
  }
}

namespace alab {
void PrintTo(const Presentation& p, std::ostream* os) { *os << p.label(); }
}  // namespace alab

INSTANTIATE_TEST_SUITE_P(Groups, ReduceProperties,
                         ::testing::Values(free_presentation(2), surface_presentation(2), surface_presentation(3),
                                           triangle_presentation(3, 3, 4), triangle_presentation(2, 3, 7)),
                         [](const ::testing::TestParamInfo<Presentation>& info) {
                           std::string n = info.param.label();
                           for (char& c : n)
                             if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
                           return n;
                         });

TEST(TriangleGroup, InvolutionsAndRelators) {
  Presentation p = triangle_presentation(3, 3, 4);
  Group g(p);
  for (const auto& r : p.relators) EXPECT_TRUE(g.reduce(r).empty());
  EXPECT_EQ(g.reduce(Word{0, 1, 0}).size(), 3U);
  // (r1 r2)^3 = 1 means r1 r2 r1 = r2 r1 r2
  EXPECT_EQ(g.reduce(Word{1, 0, 1}), g.reduce(Word{0, 1, 0}));
}

TEST(Rays, DirectedRayPrefixesAreNormalForms) {
  for (const Presentation& p : {surface_presentation(2), triangle_presentation(3, 3, 4)}) {
    Group g(p);
    const int depth = std::min(20, g.max_ray_depth());
    for (double angle : {0.1, 1.3, 2.9, 4.4, 6.0}) {
      Word cut;
      Ray r = g.directed_ray(angle, depth, &cut);
      ASSERT_GE(r.depth(), static_cast<std::size_t>(depth));
      for (std::size_t n = 0; n <= r.depth(); n += 3) EXPECT_TRUE(g.is_normal_form(r.prefix(n)));
      EXPECT_TRUE(g.is_geodesic(cut));
    }
  }
}

TEST(Rays, CertifiedDepths) {
  EXPECT_EQ(Group(free_presentation(2)).max_ray_depth(), 0);
  EXPECT_GE(Group(triangle_presentation(3, 3, 4)).max_ray_depth(), 60);
  EXPECT_GE(Group(surface_presentation(2)).max_ray_depth(), 8);
}

TEST(Presentation, ParseRoundTrip) {
  for (const Presentation& p : {free_presentation(3), surface_presentation(2), triangle_presentation(2, 3, 7)}) {
    Presentation q = parse_presentation(p.label());
    EXPECT_EQ(q.label(), p.label());
    EXPECT_EQ(q.names, p.names);
  }
  Presentation q = parse_presentation("kind surface\ngenus 2\n# comment\n");
  EXPECT_EQ(q.label(), "surface genus=2");
  EXPECT_THROW(parse_presentation("kind torus\n"), InputError);
  Word w = q.parse_word("a1.B2.A1");
  EXPECT_EQ(q.format_word(w, "."), "a1.B2.A1");
}

TEST(ConeTypes, RegistryInterns) {
  Group g(surface_presentation(2));
  Ball b3 = g.ball(2);
  ConeTypeRegistry reg;
  std::set<int> ids;
  for (const Word& w : g.ball(2).sphere_words(2)) ids.insert(reg.intern(g.cone_witness(w, b3)).id);
  EXPECT_EQ(reg.count(), ids.size());
  EXPECT_GT(reg.count(), 1U);
}
