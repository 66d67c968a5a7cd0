#include "anosov_lab/tiling.hpp"

#include <quadmath.h>

#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <string>
#include <type_traits>

#include "anosov_lab/errors.hpp"

namespace alab {

namespace {

// log of the unit roundoff of each working type
constexpr double kLogEpsDouble = -53 * 0.69314718055994531;
constexpr double kLogEpsExtended = -64 * 0.69314718055994531;
constexpr double kLogEpsQuad = -113 * 0.69314718055994531;
constexpr double kLogEpsWide = -1023 * 0.69314718055994531;

Mat3<wide> identity3() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

// x -> x - 2<n,x> n, as a matrix: I - 2 n n^T J.
Mat3<wide> reflection(const Vec3<wide>& n) {
  Mat3<wide> m = identity3();
  const wide j[3] = {1, 1, -1};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) m[3 * i + k] -= 2 * n[i] * n[k] * j[k];
  return m;
}

wide max_abs_diff(const Mat3<wide>& a, const Mat3<wide>& b) {
  wide d = 0;
  for (int i = 0; i < 9; ++i) d = std::max(d, wide(abs(a[i] - b[i])));
  return d;
}

Vec3<wide> solve3(Mat3<wide> a, Vec3<wide> b) {
  // Cramer's rule; the systems here are small and well conditioned.
  auto det = [](const Mat3<wide>& m) {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  };
  wide d = det(a);
  Vec3<wide> x{};
  for (int c = 0; c < 3; ++c) {
    Mat3<wide> t = a;
    for (int r = 0; r < 3; ++r) t[3 * r + c] = b[r];
    x[c] = det(t) / d;
  }
  return x;
}

}  // namespace

TilingModel::TilingModel(const Presentation& p) : pres_(p) {
  if (p.kind == GroupKind::surface) {
    build_surface();
  } else if (p.kind == GroupKind::triangle) {
    build_triangle();
  } else {
    throw InputError("no reference tiling for free presentations");
  }
  finish();
}

void TilingModel::build_surface() {
  const int n_sides = 4 * pres_.genus;
  const wide pi = boost::math::constants::pi<wide>();
  const wide alpha = pi / (2 * pres_.genus);  // interior angle: 4g angles sum to 2 pi
  const wide ch = tcos(alpha / 2) / tsin(pi / n_sides);
  const wide sh = tsqrt(ch * ch - 1);
  std::vector<Vec3<wide>> side(n_sides);
  for (int k = 0; k < n_sides; ++k) {
    wide th = 2 * pi * k / n_sides;
    side[k] = {ch * tcos(th), ch * tsin(th), sh};
  }
  o_w_ = {0, 0, 1};
  const Word& rel = pres_.relators.front();
  const std::size_t ngen = pres_.generator_count();

  // Labelling conventions (reading direction, label vs inverse, pairing type, b vs B); keep the
  // first whose side pairings satisfy the relator.
  for (int variant = 0; variant < 16; ++variant) {
    std::vector<int> side_of(ngen, -1);
    for (int k = 0; k < n_sides; ++k) {
      Letter l = (variant & 1) ? rel[(n_sides - k) % n_sides] : rel[k];
      if (variant & 2) l = pres_.inverse[l];
      side_of[l] = k;
    }
    std::vector<Mat3<wide>> gens(ngen);
    std::vector<Vec3<wide>> normals(ngen);
    for (std::size_t s = 0; s < ngen; ++s) {
      int j = side_of[s], jp = side_of[pres_.inverse[s]];
      if (variant & 4) {
        // rotation taking side jp to side j, then the half-turn about the midpoint of side j
        wide th = 2 * pi * (j - jp) / n_sides, thj = 2 * pi * j / n_sides;
        Mat3<wide> rot{tcos(th), -tsin(th), 0, tsin(th), tcos(th), 0, 0, 0, 1};
        Vec3<wide> radial{-tsin(thj), tcos(thj), 0};
        gens[s] = multiply(multiply(reflection(side[j]), reflection(radial)), rot);
      } else {
        wide psi = pi * (j + jp) / n_sides;  // bisector of the two side directions
        Vec3<wide> m{-tsin(psi), tcos(psi), 0};
        gens[s] = multiply(reflection(side[j]), reflection(m));
      }
      normals[s] = side[j];
    }
    if (variant & 8) {
      // exchange b_i and B_i: the regular polygon's vertex cycle reads [a, b^{-1}] otherwise
      for (std::size_t s = 2; s < ngen; s += 4) {
        std::swap(gens[s], gens[s + 1]);
        std::swap(normals[s], normals[s + 1]);
      }
    }
    Mat3<wide> prod = identity3();
    for (Letter l : rel.letters) prod = multiply(prod, gens[l]);
    if (max_abs_diff(prod, identity3()) < wide(1e-25)) {
      gens_w_ = gens;
      normals_w_ = normals;
      return;
    }
  }
  throw NumericError("could not realize surface relator by octagon side pairings");
}

void TilingModel::build_triangle() {
  const wide pi = boost::math::constants::pi<wide>();
  const auto& m = pres_.orders;  // angle pi/m[0] between sides 1,2; pi/m[1] between 2,3; pi/m[2] between 3,1
  Vec3<wide> n1{0, -1, 0};
  Vec3<wide> n2{-tsin(pi / m[0]), tcos(pi / m[0]), 0};
  wide b = tcos(pi / m[2]);
  wide a = (b * tcos(pi / m[0]) + tcos(pi / m[1])) / tsin(pi / m[0]);
  wide c = tsqrt(a * a + b * b - 1);
  Vec3<wide> n3{a, b, c};
  // Incenter: <n_i, x> equal for all i, then normalized to the upper sheet.
  Mat3<wide> rows{n1[0], n1[1], -n1[2], n2[0], n2[1], -n2[2], n3[0], n3[1], -n3[2]};
  Vec3<wide> x = solve3(rows, {-1, -1, -1});
  wide norm = tsqrt(-lorentz(x, x));
  for (auto& v : x) v /= norm;
  if (x[2] < 0)
    for (auto& v : x) v = -v;
  o_w_ = x;
  normals_w_ = {n1, n2, n3};
  for (auto& n : normals_w_)
    if (lorentz(n, o_w_) > 0)
      for (auto& v : n) v = -v;
  gens_w_.clear();
  for (const auto& n : normals_w_) gens_w_.push_back(reflection(n));
}

namespace {

quad to_quad(const wide& x) {
  long double hi = static_cast<long double>(x);
  long double lo = static_cast<long double>(x - wide(hi));
  return static_cast<quad>(hi) + static_cast<quad>(lo);
}

template <class T>
T round_to(const wide& x) {
  if constexpr (std::is_same_v<T, quad>) {
    return to_quad(x);
  } else {
    return static_cast<T>(x);
  }
}

template <class T, std::size_t N>
std::vector<std::array<T, N>> round_all(const std::vector<std::array<wide, N>>& src) {
  std::vector<std::array<T, N>> dst(src.size());
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t k = 0; k < N; ++k) dst[i][k] = round_to<T>(src[i][k]);
  return dst;
}

template <class T>
Vec3<T> round_vec(const Vec3<wide>& v) {
  return {round_to<T>(v[0]), round_to<T>(v[1]), round_to<T>(v[2])};
}

}  // namespace

void TilingModel::finish() {
  margin_ = 1e300;
  for (const auto& n : normals_w_) margin_ = std::min(margin_, static_cast<double>(-lorentz(n, o_w_)));
  max_step_ = 0;
  for (const auto& g : gens_w_) {
    Vec3<wide> so = act(g, o_w_);
    double ch = static_cast<double>(-lorentz(so, o_w_));
    max_step_ = std::max(max_step_, std::acosh(std::max(1.0, ch)));
  }
  for (const auto& n : normals_w_)
    for (const wide& v : n) normal_max_ = std::max(normal_max_, static_cast<double>(abs(v)));
  gens_q_ = round_all<quad>(gens_w_);
  gens_l_ = round_all<long double>(gens_w_);
  gens_d_ = round_all<double>(gens_w_);
  normals_q_ = round_all<quad>(normals_w_);
  normals_l_ = round_all<long double>(normals_w_);
  normals_d_ = round_all<double>(normals_w_);
  o_q_ = round_vec<quad>(o_w_);
  o_l_ = round_vec<long double>(o_w_);
  o_d_ = round_vec<double>(o_w_);
}

template <>
const std::vector<Mat3<wide>>& TilingModel::generators<wide>() const { return gens_w_; }
template <>
const std::vector<Mat3<quad>>& TilingModel::generators<quad>() const { return gens_q_; }
template <>
const std::vector<Mat3<long double>>& TilingModel::generators<long double>() const { return gens_l_; }
template <>
const std::vector<Mat3<double>>& TilingModel::generators<double>() const { return gens_d_; }
template <>
const std::vector<Vec3<wide>>& TilingModel::normals<wide>() const { return normals_w_; }
template <>
const std::vector<Vec3<quad>>& TilingModel::normals<quad>() const { return normals_q_; }
template <>
const std::vector<Vec3<long double>>& TilingModel::normals<long double>() const { return normals_l_; }
template <>
const std::vector<Vec3<double>>& TilingModel::normals<double>() const { return normals_d_; }
template <>
Vec3<wide> TilingModel::base_point<wide>() const { return o_w_; }
template <>
Vec3<quad> TilingModel::base_point<quad>() const { return o_q_; }
template <>
Vec3<long double> TilingModel::base_point<long double>() const { return o_l_; }
template <>
Vec3<double> TilingModel::base_point<double>() const { return o_d_; }

namespace {
template <class T>
double log_eps_of();
template <>
double log_eps_of<double>() { return kLogEpsDouble; }
template <>
double log_eps_of<long double>() { return kLogEpsExtended; }
template <>
double log_eps_of<quad>() { return kLogEpsQuad; }
template <>
double log_eps_of<wide>() { return kLogEpsWide; }
}  // namespace

namespace {
template <class F>
Precision cheapest(const F& log_err, double budget) {
  if (log_err(kLogEpsExtended) < budget) return Precision::extended;
  if (log_err(kLogEpsQuad) < budget) return Precision::quad_precision;
  if (log_err(kLogEpsWide) < budget) return Precision::wide_precision;
  throw NumericError("");
}
}  // namespace

Precision TilingModel::precision_for_length(std::size_t length) const {
  const double budget = std::log(0.25 * margin_);
  auto log_err = [&](double log_eps) {
    return std::log(8.0 * (static_cast<double>(length) + 2) * 9.0 * normal_max_) + log_eps +
           static_cast<double>(length) * max_step_;
  };
  try {
    return cheapest(log_err, budget);
  } catch (const NumericError&) {
    throw NumericError("word length " + std::to_string(length) + " exceeds the reference tiling's working precision");
  }
}

namespace {
// Rounding at norm `peak` carried back to norm `size` grows by roughly peak/size.
constexpr double kReturnSlack = 16.0;
double log_effective_size(double log_size, double peak) {
  const double log_peak = std::log(std::max(peak, 1.0));
  return log_peak > log_size ? std::log(kReturnSlack) + 2 * log_peak - log_size : log_size;
}
}  // namespace

Precision TilingModel::precision_for_return(std::size_t length, double peak) const {
  const double budget = std::log(0.25 * margin_);
  auto log_err = [&](double log_eps) {
    return std::log(8.0 * (static_cast<double>(2 * length) + 2) * normal_max_) + log_eps + std::log(kReturnSlack) +
           2.0 * std::log(std::max(peak, 1.0));
  };
  try {
    return cheapest(log_err, budget);
  } catch (const NumericError&) {
    throw NumericError("word of length " + std::to_string(length) +
                       " reaches too far for the reference tiling's working precision");
  }
}

template <class T>
std::uint64_t TilingModel::descents(const Vec3<T>& p, std::size_t steps, double peak) const {
  const auto& ns = normals<T>();
  using std::abs;
  long double size = std::fabs(to_ld(p[0])) + std::fabs(to_ld(p[1])) + std::fabs(to_ld(p[2]));
  const double log_size = log_effective_size(static_cast<double>(std::log(size)), peak);
  const double log_err =
      std::log(8.0 * (static_cast<double>(steps) + 2) * normal_max_) + log_eps_of<T>() + log_size;
  if (!(log_err < std::log(0.25 * margin_))) {
    throw NumericError("reference tiling precision exhausted (log point norm " + std::to_string(log_size) + ")");
  }
  std::uint64_t mask = 0;
  for (std::size_t s = 0; s < ns.size(); ++s) {
    T v = lorentz(ns[s], p);
    if (v > 0) mask |= (std::uint64_t{1} << s);
  }
  return mask;
}

template std::uint64_t TilingModel::descents<long double>(const Vec3<long double>&, std::size_t, double) const;
template std::uint64_t TilingModel::descents<quad>(const Vec3<quad>&, std::size_t, double) const;
template std::uint64_t TilingModel::descents<wide>(const Vec3<wide>&, std::size_t, double) const;
template std::uint64_t TilingModel::descents<double>(const Vec3<double>&, std::size_t, double) const;

double TilingModel::angle(const Vec3<long double>& p) {
  double a = std::atan2(static_cast<double>(p[1]), static_cast<double>(p[0]));
  if (a < 0) a += 2 * M_PI;
  return a;
}

}  // namespace alab
