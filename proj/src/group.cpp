#include "anosov_lab/group.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "anosov_lab/errors.hpp"

namespace alab {

int Ball::length(std::size_t index) const {
  auto it = std::upper_bound(level_start.begin(), level_start.end(), index);
  return static_cast<int>(it - level_start.begin()) - 1;
}

Word Ball::word(std::size_t index) const {
  Word w;
  while (index != 0) {
    w.letters.push_back(last[index]);
    index = parent[index];
  }
  std::reverse(w.letters.begin(), w.letters.end());
  return w;
}

std::vector<Word> Ball::sphere_words(int n) const {
  std::vector<Word> out;
  for (std::size_t i = level_start[n]; i < level_start[n + 1]; ++i) out.push_back(word(i));
  return out;
}

ConeTypeId ConeTypeRegistry::intern(std::vector<bool> witness) {
  auto [it, inserted] = ids_.try_emplace(witness, static_cast<int>(ids_.size()));
  return ConeTypeId{it->second, std::move(witness)};
}

Group::Group(Presentation p) : pres_(std::move(p)) {
  if (pres_.kind != GroupKind::free_group) tiling_ = std::make_shared<TilingModel>(pres_);
}

// ---------------------------------------------------------------------------------------------
// Word problem

namespace {

// Calls f(std::type_identity<T>{}) with the working type for `p`.
template <class F>
decltype(auto) with_precision(Precision p, F&& f) {
  switch (p) {
    case Precision::extended: return f(std::type_identity<long double>{});
    case Precision::quad_precision: return f(std::type_identity<quad>{});
    default: return f(std::type_identity<wide>{});
  }
}

}  // namespace


template <class T>
Word Group::reduce_geometric(const Word& w, double peak) const {
  const auto& gens = tiling_->generators<T>();
  Vec3<T> p = tiling_->orbit_point<T>(w);
  Word out;
  std::size_t steps = w.size();
  for (std::size_t guard = 0; guard <= w.size(); ++guard) {
    std::uint64_t mask = tiling_->descents(p, steps, peak);
    int t = TilingModel::first_bit(mask);
    if (t < 0) return out;
    out.letters.push_back(static_cast<Letter>(t));
    p = act(gens[pres_.inverse[t]], p);
    ++steps;
  }
  throw NumericError("reduce did not terminate; reference tiling inconsistent");
}

Word Group::reduce(const Word& w) const {
  if (!tiling_) {
    Word out;
    for (Letter l : w.letters) {
      if (!out.empty() && out.letters.back() == pres_.inverse[l]) {
        out.letters.pop_back();
      } else {
        out.letters.push_back(l);
      }
    }
    return out;
  }
  Precision prec;
  double peak = 0;
  try {
    // Largest norm along the right-to-left evaluation; w need not be geodesic.
    const auto& gens = tiling_->generators<long double>();
    Vec3<long double> q = tiling_->base_point<long double>();
    for (std::size_t k = w.size(); k-- > 0;) {
      q = act(gens[w[k]], q);
      peak = std::max(peak, static_cast<double>(std::fabs(q[0]) + std::fabs(q[1]) + std::fabs(q[2])));
    }
    prec = tiling_->precision_for_return(w.size(), peak);
  } catch (const NumericError&) {
    // Reduce halves first so intermediate points stay as short as the geodesics allow.
    std::size_t h = w.size() / 2;
    Word left = reduce(w.prefix(h));
    Word right = reduce(w.suffix_from(h));
    Word joined = left * right;
    if (joined.size() == w.size()) throw;
    return reduce(joined);
  }
  return with_precision(prec, [&](auto t) { return reduce_geometric<typename decltype(t)::type>(w, peak); });
}

std::uint64_t Group::left_descents(const Word& w) const {
  if (!tiling_) {
    Word r = reduce(w);
    return r.empty() ? 0 : (std::uint64_t{1} << r[0]);
  }
  return with_precision(tiling_->precision_for_length(w.size()), [&](auto t) {
    return tiling_->descents(tiling_->orbit_point<typename decltype(t)::type>(w), w.size());
  });
}

namespace {

// Checks that every suffix chain step of u.s is a normal form, walking from the right.
template <class T>
bool extends_geometric(const TilingModel& tm, const Word& u, Letter s) {
  const auto& gens = tm.generators<T>();
  Vec3<T> q = act(gens[s], tm.base_point<T>());
  std::size_t steps = 1;
  for (std::size_t k = u.size(); k-- > 0;) {
    q = act(gens[u[k]], q);
    ++steps;
    if (TilingModel::first_bit(tm.descents(q, steps)) != u[k]) return false;
  }
  return true;
}

}  // namespace

bool Group::extends_normal_form(const Word& u, Letter s) const {
  if (!tiling_) return u.empty() || u.letters.back() != pres_.inverse[s];
  return with_precision(tiling_->precision_for_length(u.size() + 1), [&](auto t) {
    return extends_geometric<typename decltype(t)::type>(*tiling_, u, s);
  });
}

// ---------------------------------------------------------------------------------------------
// Enumeration

namespace {

[[noreturn]] void cap_exceeded(std::size_t cap, int completed) {
  throw ResourceError("ball enumeration exceeded the element cap of " + std::to_string(cap) +
                          " after completing radius " + std::to_string(completed),
                      completed);
}

void start_ball(Ball& b) {
  b.radius = 0;
  b.level_start = {0, 1};
  b.parent = {0};
  b.last = {0};
  b.first_child = {};
}

}  // namespace

Ball Group::enumerate_free(int n, const EnumerationLimits& limits) const {
  Ball b;
  start_ball(b);
  const std::size_t ngen = pres_.generator_count();
  for (int level = 0; level < n; ++level) {
    std::size_t lo = b.level_start[level], hi = b.level_start[level + 1];
    for (std::size_t u = lo; u < hi; ++u) {
      b.first_child.push_back(static_cast<std::uint32_t>(b.size()));
      for (std::size_t s = 0; s < ngen; ++s) {
        if (u != 0 && pres_.inverse[b.last[u]] == s) continue;
        if (b.size() >= limits.max_elements) cap_exceeded(limits.max_elements, level);
        b.parent.push_back(static_cast<std::uint32_t>(u));
        b.last.push_back(static_cast<Letter>(s));
      }
    }
    b.level_start.push_back(b.size());
    b.radius = level + 1;
  }
  while (b.first_child.size() <= b.size()) b.first_child.push_back(static_cast<std::uint32_t>(b.size()));
  return b;
}

namespace {

template <class T>
struct Level {
  std::vector<Letter> first;          // first letter of the normal form
  std::vector<std::uint32_t> suffix;  // local index of word[1..] in the previous level
  std::vector<Vec3<T>> point;         // g.o
  std::vector<std::int32_t> ext;      // ext[i*ngen + s]: local index of (word i).s in the next level
};

}  // namespace

// u.s is a normal form iff suffix(u).s is one (looked up in the previous extension table) and
// first(u) is the least left descent of u.s; the latter is a sign test in the reference model.
template <class T>
Ball Group::enumerate_geometric(int n, const EnumerationLimits& limits) const {
  const std::size_t ngen = pres_.generator_count();
  const auto& gens = tiling_->generators<T>();
  Ball b;
  start_ball(b);
  Level<T> prev, cur;
  prev.first = {0};
  prev.suffix = {0};
  prev.point = {tiling_->base_point<T>()};
  prev.ext.assign(ngen, -1);
  if (n >= 1) {
    b.first_child.push_back(1);
    for (std::size_t s = 0; s < ngen; ++s) {
      cur.first.push_back(static_cast<Letter>(s));
      cur.suffix.push_back(0);
      cur.point.push_back(act(gens[s], prev.point[0]));
      prev.ext[s] = static_cast<std::int32_t>(s);
      b.parent.push_back(0);
      b.last.push_back(static_cast<Letter>(s));
    }
    b.level_start.push_back(b.size());
    b.radius = 1;
  }
  for (int level = 1; level < n; ++level) {
    Level<T> next;
    cur.ext.assign(cur.first.size() * ngen, -1);
    const std::size_t base = b.level_start[level];
    for (std::size_t i = 0; i < cur.first.size(); ++i) {
      b.first_child.push_back(static_cast<std::uint32_t>(b.size()));
      const Letter f = cur.first[i];
      const std::uint32_t v = cur.suffix[i];
      for (std::size_t s = 0; s < ngen; ++s) {
        std::int32_t w = prev.ext[v * ngen + s];
        if (w < 0) continue;
        Vec3<T> p = act(gens[f], cur.point[static_cast<std::size_t>(w)]);
        if (TilingModel::first_bit(tiling_->descents(p, static_cast<std::size_t>(level) + 1)) != f) continue;
        if (b.size() >= limits.max_elements) cap_exceeded(limits.max_elements, level);
        cur.ext[i * ngen + s] = static_cast<std::int32_t>(next.first.size());
        next.first.push_back(f);
        next.suffix.push_back(static_cast<std::uint32_t>(w));
        next.point.push_back(p);
        b.parent.push_back(static_cast<std::uint32_t>(base + i));
        b.last.push_back(static_cast<Letter>(s));
      }
    }
    b.level_start.push_back(b.size());
    b.radius = level + 1;
    prev = std::move(cur);
    cur = std::move(next);
  }
  while (b.first_child.size() <= b.size()) b.first_child.push_back(static_cast<std::uint32_t>(b.size()));
  return b;
}

Ball Group::ball(int n, const EnumerationLimits& limits) const {
  if (n < 0) throw InputError("ball radius must be >= 0");
  if (!tiling_) return enumerate_free(n, limits);
  return with_precision(tiling_->precision_for_length(static_cast<std::size_t>(n)), [&](auto t) {
    return enumerate_geometric<typename decltype(t)::type>(n, limits);
  });
}

std::vector<Word> Group::sphere(int n, const EnumerationLimits& limits) const {
  return ball(n, limits).sphere_words(n);
}

// ---------------------------------------------------------------------------------------------
// Cone types

namespace {

template <class T>
std::vector<bool> geometric_witness(const TilingModel& tm, const Presentation& pres, const Word& gamma,
                                    const Ball& bk) {
  const auto& gens = tm.generators<T>();
  std::vector<bool> wit(bk.size(), false);
  std::vector<Vec3<T>> q(bk.size());
  q[0] = tm.orbit_point<T>(pres.invert(gamma));  // gamma^{-1}.o
  wit[0] = true;
  std::vector<std::uint64_t> desc(bk.size(), 0);
  desc[0] = tm.descents(q[0], gamma.size());
  for (std::size_t h = 1; h < bk.size(); ++h) {
    std::size_t par = bk.parent[h];
    Letter s = bk.last[h];
    // |g s| > |g| iff the side line of s does not separate o from g^{-1}.o
    if (!wit[par] || (desc[par] >> s) & 1U) continue;
    wit[h] = true;
    q[h] = act(gens[pres.inverse[s]], q[par]);
    desc[h] = tm.descents(q[h], gamma.size() + static_cast<std::size_t>(bk.length(h)));
  }
  return wit;
}

}  // namespace

std::vector<bool> Group::cone_witness(const Word& gamma_in, const Ball& bk) const {
  Word gamma = reduce(gamma_in);
  if (!tiling_) {
    std::vector<bool> wit(bk.size(), false);
    wit[0] = true;
    for (std::size_t h = 1; h < bk.size(); ++h) {
      std::size_t par = bk.parent[h];
      if (par == 0) {
        wit[h] = gamma.empty() || bk.last[h] != pres_.inverse[gamma.letters.back()];
      } else {
        wit[h] = wit[par];
      }
    }
    return wit;
  }
  std::size_t total = gamma.size() + static_cast<std::size_t>(std::max(bk.radius, 0));
  return with_precision(tiling_->precision_for_length(total), [&](auto t) {
    return geometric_witness<typename decltype(t)::type>(*tiling_, pres_, gamma, bk);
  });
}

// ---------------------------------------------------------------------------------------------
// Conjugacy classes

namespace {

struct UnionFind {
  std::vector<std::size_t> up;
  explicit UnionFind(std::size_t n) : up(n) { std::iota(up.begin(), up.end(), 0); }
  std::size_t find(std::size_t x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    up[b] = a;  // the smaller index (shortlex-smaller word) stays the root
  }
};

Word rotate(const Word& w, std::size_t k) {
  Word out;
  for (std::size_t i = 0; i < w.size(); ++i) out.letters.push_back(w[(i + k) % w.size()]);
  return out;
}

}  // namespace

std::vector<Word> Group::conjugacy_reps(int n, bool identify_inverse) const {
  if (n < 1) throw InputError("conjugacy_reps needs n >= 1");
  Ball b = ball(n);
  std::vector<Word> reps;
  for (int len = 1; len <= n; ++len) {
    std::vector<Word> members;
    for (std::size_t i = b.level_start[len]; i < b.level_start[len + 1]; ++i) {
      Word w = b.word(i);
      bool cyclic = true;
      for (std::size_t k = 1; k < w.size() && cyclic; ++k) cyclic = is_geodesic(rotate(w, k));
      if (cyclic) members.push_back(std::move(w));
    }
    // members are shortlex sorted, so index order is shortlex order
    auto index_of = [&](const Word& nf) -> std::ptrdiff_t {
      auto it = std::lower_bound(members.begin(), members.end(), nf);
      return (it != members.end() && *it == nf) ? it - members.begin() : -1;
    };
    UnionFind uf(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      const Word& w = members[i];
      for (std::size_t k = 1; k < w.size(); ++k) {
        std::ptrdiff_t j = index_of(reduce(rotate(w, k)));
        if (j >= 0) uf.unite(i, static_cast<std::size_t>(j));
      }
      // rotations through other geodesic spellings: conjugate by each left descent
      std::uint64_t desc = left_descents(w);
      for (std::size_t t = 0; t < pres_.generator_count(); ++t) {
        if (!((desc >> t) & 1U)) continue;
        Word c = reduce(Word{pres_.inverse[t]} * w * Word{static_cast<Letter>(t)});
        if (c.size() != w.size()) continue;
        std::ptrdiff_t j = index_of(c);
        if (j >= 0) uf.unite(i, static_cast<std::size_t>(j));
      }
      if (identify_inverse) {
        std::ptrdiff_t j = index_of(reduce(pres_.invert(w)));
        if (j >= 0) uf.unite(i, static_cast<std::size_t>(j));
      }
    }
    for (std::size_t i = 0; i < members.size(); ++i)
      if (uf.find(i) == i) reps.push_back(members[i]);
  }
  return reps;
}

// ---------------------------------------------------------------------------------------------
// Rays

std::vector<Ray> Group::geodesic_rays(int depth, int count, std::uint64_t seed) const {
  if (depth < 1) throw InputError("ray depth must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(std::max(count, 0)));
  const std::size_t ngen = pres_.generator_count();
  for (int r = 0; r < count; ++r) {
    Word u;
    // options[k]: untried extensions at depth k, in the random order drawn for that depth
    std::vector<std::vector<Letter>> options;
    auto draw = [&](const Word& w) {
      std::vector<Letter> ok;
      for (std::size_t s = 0; s < ngen; ++s)
        if (extends_normal_form(w, static_cast<Letter>(s))) ok.push_back(static_cast<Letter>(s));
      std::shuffle(ok.begin(), ok.end(), rng);
      return ok;
    };
    options.push_back(draw(u));
    while (static_cast<int>(u.size()) < depth) {
      if (options.back().empty()) {
        if (u.empty()) throw Error(ErrorKind::internal, "no geodesic extension from the identity");
        options.pop_back();
        u.letters.pop_back();
        continue;
      }
      Letter s = options.back().back();
      options.back().pop_back();
      u.letters.push_back(s);
      if (static_cast<int>(u.size()) < depth) options.push_back(draw(u));
    }
    rays.push_back(Ray{u});
  }
  return rays;
}

namespace {

// Orthonormal frame (e1, e2) of the tangent plane at the base point o, in the Lorentz form.
template <class T>
std::pair<Vec3<T>, Vec3<T>> tangent_frame(const Vec3<T>& o) {
  auto orth = [&](Vec3<T> v, const std::vector<Vec3<T>>& basis, const std::vector<T>& signs) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      T c = lorentz(v, basis[i]) / signs[i];
      for (int k = 0; k < 3; ++k) v[k] -= c * basis[i][k];
    }
    T nrm = tsqrt(lorentz(v, v));
    for (auto& x : v) x /= nrm;
    return v;
  };
  Vec3<T> e1 = orth({1, 0, 0}, {o}, {T(-1)});
  Vec3<T> e2 = orth({0, 1, 0}, {o, e1}, {T(-1), T(1)});
  return {e1, e2};
}

}  // namespace

namespace {
int ray_overshoot(const TilingModel& tm) { return std::max(3, static_cast<int>(std::ceil(5.2 / tm.max_step()))); }
}  // namespace

int Group::max_ray_depth() const {
  if (!tiling_) return 0;
  const int extra = ray_overshoot(*tiling_);
  int depth = 0;
  for (int d = 1; d < 100000; ++d) {
    const int total = d + extra;
    const double log_peak = std::log(2.0) + total * tiling_->max_step();
    if (log_peak > 700) break;
    try {
      tiling_->precision_for_return(static_cast<std::size_t>(total), std::exp(log_peak));
    } catch (const NumericError&) {
      break;
    }
    depth = d;
  }
  return depth;
}

namespace {

// Cutting sequence of the geodesic from the base point in direction `angle`. Rounding in the
// forward endpoint grows by e^{step} per crossing, hence the length-dependent working type.
template <class T>
Word cutting_sequence(const TilingModel& tm, const Presentation& pres, double angle, int total) {
  const auto& gens = tm.template generators<T>();
  const auto& normals = tm.template normals<T>();
  Vec3<T> o = tm.template base_point<T>();
  auto [e1, e2] = tangent_frame(o);
  T c = tcos(static_cast<T>(angle)), s = tsin(static_cast<T>(angle));
  Vec3<T> fwd, back;
  for (int k = 0; k < 3; ++k) {
    fwd[k] = o[k] + c * e1[k] + s * e2[k];
    back[k] = o[k] - c * e1[k] - s * e2[k];
  }
  Word cut;
  int entered = -1;
  for (int step = 0; step < total; ++step) {
    int exit = -1;
    T best = 0;
    for (std::size_t k = 0; k < normals.size(); ++k) {
      if (static_cast<int>(k) == entered) continue;
      T a = lorentz(normals[k], fwd), bb = lorentz(normals[k], back);
      if (!(a > 0 && bb < 0)) continue;
      T t = -bb / a;  // e^{2t} at the crossing; smallest crossing exits first
      if (exit < 0 || t < best) exit = static_cast<int>(k), best = t;
    }
    if (exit < 0) throw NumericError("cutting sequence lost the geodesic");
    Letter l = static_cast<Letter>(exit);
    cut.letters.push_back(l);
    const auto& ginv = gens[pres.inverse[l]];
    fwd = act(ginv, fwd);
    back = act(ginv, back);
    for (auto* v : {&fwd, &back}) {
      T scale = (*v)[2];
      for (auto& x : *v) x /= scale;
    }
    entered = pres.inverse[l];
  }
  return cut;
}

}  // namespace

Ray Group::directed_ray(double angle, int depth, Word* cutting_word) const {
  if (!tiling_) throw InputError("directed rays need a circle-boundary presentation");
  // Extra letters past the requested depth so the normal-form prefix fellow-travels the geodesic
  // (about 5 units of hyperbolic distance).
  const int total = depth + ray_overshoot(*tiling_);
  // Crossing tests near tile vertices need quad precision even for short rays.
  Precision prec = tiling_->precision_for_length(static_cast<std::size_t>(total));
  if (prec == Precision::extended) prec = Precision::quad_precision;
  Word cut = with_precision(prec, [&](auto t) {
    return cutting_sequence<typename decltype(t)::type>(*tiling_, pres_, angle, total);
  });
  if (cutting_word) *cutting_word = cut;
  Word nf = reduce(cut);
  return Ray{nf.prefix(static_cast<std::size_t>(depth))};
}

double Group::reference_angle(const Word& w) const {
  if (!tiling_) throw InputError("reference angles need a circle-boundary presentation");
  return with_precision(tiling_->precision_for_length(w.size()), [&](auto t) {
    auto p = tiling_->orbit_point<typename decltype(t)::type>(w);
    return TilingModel::angle(Vec3<long double>{to_ld(p[0]), to_ld(p[1]), to_ld(p[2])});
  });
}

}  // namespace alab
