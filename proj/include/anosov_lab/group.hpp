#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "anosov_lab/presentation.hpp"
#include "anosov_lab/tiling.hpp"

namespace alab {

// All elements of word length <= radius, one shortlex normal form each. Index 0 is the identity;
// indices are grouped by length and shortlex-sorted within each sphere. Words are stored as a
// prefix tree: word(i) = word(parent[i]) followed by last[i].
struct Ball {
  int radius = -1;
  std::vector<std::size_t> level_start;     // radius + 2 entries
  std::vector<std::uint32_t> parent;        // parent[0] == 0
  std::vector<Letter> last;                 // last[0] unused
  std::vector<std::uint32_t> first_child;   // children of i: [first_child[i], first_child[i+1])

  std::size_t size() const { return parent.size(); }
  std::size_t sphere_size(int n) const { return level_start[n + 1] - level_start[n]; }
  int length(std::size_t index) const;
  Word word(std::size_t index) const;
  std::vector<Word> sphere_words(int n) const;
};

struct EnumerationLimits {
  std::size_t max_elements = 120'000'000;
};

struct Ray {
  Word word;  // normal form of the deepest prefix; alpha_n = word.prefix(n)
  std::size_t depth() const { return word.size(); }
  Word prefix(std::size_t n) const { return word.prefix(n); }
};

// Depth-k approximation of the cone type of an element: the extension set
// {h in ball(k) : |gamma h| = |gamma| + |h|} as a bitmap over ball(k) indices.
struct ConeTypeId {
  int id = -1;
  std::vector<bool> witness;
};

class ConeTypeRegistry {
 public:
  ConeTypeId intern(std::vector<bool> witness);
  std::size_t count() const { return ids_.size(); }

 private:
  std::unordered_map<std::vector<bool>, int> ids_;
};

class Group {
 public:
  explicit Group(Presentation p);

  const Presentation& presentation() const { return pres_; }
  // Reference hyperbolic model; null for free groups.
  const TilingModel* tiling() const { return tiling_.get(); }

  // Shortlex geodesic normal form. Long inputs are reduced in halves; throws NumericError only when
  // a geodesic is too long for the widest working precision (a few hundred hyperbolic units).
  Word reduce(const Word& w) const;
  std::size_t length(const Word& w) const { return reduce(w).size(); }
  bool is_geodesic(const Word& w) const { return length(w) == w.size(); }
  bool is_normal_form(const Word& w) const { return reduce(w) == w; }
  // For a normal form u, whether u.s is again a normal form (of length |u| + 1).
  bool extends_normal_form(const Word& u, Letter s) const;
  // Generators t with |t^{-1} g| < |g|, as a bitmask.
  std::uint64_t left_descents(const Word& w) const;

  Ball ball(int n, const EnumerationLimits& limits = {}) const;
  std::vector<Word> sphere(int n, const EnumerationLimits& limits = {}) const;

  // Extension bitmap over the elements of `ball_k` (which must be this group's ball).
  std::vector<bool> cone_witness(const Word& gamma, const Ball& ball_k) const;

  // Representatives (shortlex-minimal normal forms) of the classes of cyclically reduced
  // elements of length 1..n under cyclic rotation; optionally identifying g with g^{-1}.
  std::vector<Word> conjugacy_reps(int n, bool identify_inverse = false) const;

  // Seeded random normal-form rays; every prefix is a normal form.
  std::vector<Ray> geodesic_rays(int depth, int count, std::uint64_t seed) const;

  // Ray toward the boundary point at the given angle of the reference model, obtained from the
  // cutting sequence of a hyperbolic geodesic (circle-boundary groups only). Also returns the
  // raw cutting-sequence word, a geodesic word to the same endpoint.
  Ray directed_ray(double angle, int depth, Word* cutting_word = nullptr) const;
  // Deepest directed ray whose normal form quad precision can certify (0 for free groups).
  int max_ray_depth() const;

  // Boundary angle in the reference model of the reference point g.o (circle groups only).
  double reference_angle(const Word& w) const;

 private:
  template <class T>
  Word reduce_geometric(const Word& w, double peak) const;
  template <class T>
  Ball enumerate_geometric(int n, const EnumerationLimits& limits) const;
  Ball enumerate_free(int n, const EnumerationLimits& limits) const;

  Presentation pres_;
  std::shared_ptr<const TilingModel> tiling_;
};

}  // namespace alab
