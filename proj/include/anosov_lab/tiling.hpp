#pragma once

// Reference hyperbolic model for surface and triangle presentations: each generator maps the
// fundamental polygon F to the tile adjacent across one side, so word length equals the number
// of tiling lines separating the base point o from g.o. Works in the hyperboloid model with the
// form <x,y> = x0*y0 + x1*y1 - x2*y2.

#include <quadmath.h>

#include <array>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

#include "anosov_lab/presentation.hpp"

namespace alab {

using quad = __float128;
// Last-resort tier for long words; the tiling is built at this precision and rounded down.
using wide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<1024, boost::multiprecision::digit_base_2>,
                                           boost::multiprecision::et_off>;

// Elementary functions over the three working types.
inline long double tsqrt(long double x) { return std::sqrt(x); }
inline quad tsqrt(quad x) { return sqrtq(x); }
inline wide tsqrt(const wide& x) { return boost::multiprecision::sqrt(x); }
inline long double tcos(long double x) { return std::cos(x); }
inline quad tcos(quad x) { return cosq(x); }
inline wide tcos(const wide& x) { return boost::multiprecision::cos(x); }
inline long double tsin(long double x) { return std::sin(x); }
inline quad tsin(quad x) { return sinq(x); }
inline wide tsin(const wide& x) { return boost::multiprecision::sin(x); }
inline long double to_ld(long double x) { return x; }
inline long double to_ld(quad x) { return static_cast<long double>(x); }
inline long double to_ld(const wide& x) { return static_cast<long double>(x); }
inline long double to_ld(double x) { return x; }

template <class T>
using Vec3 = std::array<T, 3>;
template <class T>
using Mat3 = std::array<T, 9>;  // row-major

template <class T>
inline T lorentz(const Vec3<T>& a, const Vec3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] - a[2] * b[2];
}

template <class T>
inline Vec3<T> act(const Mat3<T>& m, const Vec3<T>& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2], m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

template <class T>
inline Mat3<T> multiply(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      T s = 0;
      for (int k = 0; k < 3; ++k) s += a[3 * i + k] * b[3 * k + j];
      c[3 * i + j] = s;
    }
  return c;
}

enum class Precision { extended, quad_precision, wide_precision };

class TilingModel {
 public:
  // Throws InputError for free presentations (no reference tiling).
  explicit TilingModel(const Presentation& p);

  std::size_t generator_count() const { return gens_q_.size(); }
  const Presentation& presentation() const { return pres_; }

  template <class T>
  const std::vector<Mat3<T>>& generators() const;
  template <class T>
  const std::vector<Vec3<T>>& normals() const;
  template <class T>
  Vec3<T> base_point() const;

  // Lower bound for |<n_s, g.o>| over all g and s (sinh of the inradius at o).
  double margin() const { return margin_; }
  // Largest hyperbolic displacement d(o, s.o) over generators.
  double max_step() const { return max_step_; }

  // Cheapest precision that keeps descent tests exact for points at word distance <= length.
  // Throws NumericError past the widest tier.
  Precision precision_for_length(std::size_t length) const;
  // Same, for walking a point of 1-norm `peak` back to o: rounding made at the far end is
  // amplified by the return path, so the error scales with peak^2.
  Precision precision_for_return(std::size_t length, double peak) const;

  // Bitmask of generators s whose side line separates o from p (s is a left descent of g when
  // p = g.o). Throws NumericError when rounding could flip a sign. `peak` is the largest norm
  // the point had before being carried back (0 when p was only computed forward).
  template <class T>
  std::uint64_t descents(const Vec3<T>& p, std::size_t steps, double peak = 0) const;

  // Lowest-index set bit, or -1.
  static int first_bit(std::uint64_t mask) { return mask ? __builtin_ctzll(mask) : -1; }

  // g.o for a word g (evaluated right to left).
  template <class T>
  Vec3<T> orbit_point(const Word& w) const;

  // Boundary angle of the reference point g.o, in [0, 2 pi).
  static double angle(const Vec3<long double>& p);

 private:
  void build_surface();
  void build_triangle();
  void finish();

  Presentation pres_;
  std::vector<Mat3<wide>> gens_w_;
  std::vector<Vec3<wide>> normals_w_;
  Vec3<wide> o_w_{};
  std::vector<Mat3<quad>> gens_q_;
  std::vector<Vec3<quad>> normals_q_;
  Vec3<quad> o_q_{};
  std::vector<Mat3<long double>> gens_l_;
  std::vector<Vec3<long double>> normals_l_;
  Vec3<long double> o_l_{};
  std::vector<Mat3<double>> gens_d_;
  std::vector<Vec3<double>> normals_d_;
  Vec3<double> o_d_{};
  double margin_ = 0;
  double max_step_ = 0;
  double normal_max_ = 0;
};

template <class T>
Vec3<T> TilingModel::orbit_point(const Word& w) const {
  Vec3<T> p = base_point<T>();
  const auto& g = generators<T>();
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) p = act(g[*it], p);
  return p;
}

}  // namespace alab
