#pragma once

#include <string>
#include <vector>

#include "anosov_lab/group.hpp"
#include "anosov_lab/replin.hpp"

namespace alab {

// tau_k(a(rho g)) >= mu |g| - C over the enumerated ball. The slope is the smallest chord slope
// of the sphere minima over stretches of at least `min_span` lengths, so adding deeper spheres
// can only lower it; C is the smallest nonnegative intercept making the line support every minimum.
struct DominationFit {
  int k = 1;
  int radius = 0;
  double mu = 0;
  double C = 0;
  double min_margin = 0;  // min_n (m_n - (mu n - C))
  bool verdict = false;
  std::vector<double> sphere_minima;  // index = word length
};

struct DominationOptions {
  double mu_min = 1e-3;
  int min_span = 4;
  int window_start = 0;
};

DominationFit domination_fit_minima(const std::vector<double>& minima, int k, const DominationOptions& opts = {});
DominationFit domination_fit(const std::vector<SpectrumSample>& spectra, int k, const DominationOptions& opts = {});
DominationFit domination_fit(const Ball& ball, const BallSpectra& spectra, int k, const DominationOptions& opts = {});
// Sphere minima of arbitrary per-element values over a ball.
std::vector<double> sphere_minima(const Ball& ball, const std::vector<double>& values);

// Boundary data needed by the hyperconvexity test: the left-singular frame of a deep prefix
// (column 0 spans xi^1, the first j columns span xi^j) and a cyclic order key.
struct FlagPoint {
  Matrix frame;
  double order_key = 0;
};

struct HyperconvexityOptions {
  double threshold = 1e-6;
  int triples = 10000;
  int strata = 8;  // pairwise-distance strata, halving the distance each time
  double resolution = 1e-6;  // points closer than this (sine) count as coincident
  std::uint64_t seed = 1;
};

struct HyperconvexityReport {
  int p = 2;
  double min_det = 0;      // scale-free: raw determinant over the pairwise sines
  double min_raw_det = 0;  // column-normalized determinant only
  std::size_t triples_tested = 0;
  std::size_t triples_excluded = 0;
  std::array<std::size_t, 3> argmin{0, 0, 0};
  bool verdict = false;
  std::string caveat = "sampled, not proven";
};

// |det| of unit bases of xi^1(x), xi^1(y), xi^{d-p}(z) over sampled pairwise distinct triples
// (the spanned volume when p > 2), divided by triple_separation. The raw value vanishes as
// the points collide even on a conic; the quotient does not.
HyperconvexityReport hyperconvexity_check(const std::vector<FlagPoint>& samples, int p,
                                          const HyperconvexityOptions& opts = {});
double triple_determinant(const Matrix& fx, const Matrix& fy, const Matrix& fz, int p);
// sin(x, y) * sin(x, Z) * sin(y, Z) with Z = xi^{d-p}(z).
double triple_separation(const Matrix& fx, const Matrix& fy, const Matrix& fz, int p);

struct IsospectralRow {
  Word word;
  int length = 0;
  double tau1_rho = 0;
  double tau1_rhobar = 0;
  double deviation = 0;
};

struct IsospectralReport {
  double max_deviation = 0;
  Word witness;
  int radius = 0;
  std::vector<IsospectralRow> rows;
  bool isospectral(double tol = 1e-6) const { return max_deviation < tol; }
};

IsospectralReport gap_isospectral_check(const Group& g, const Representation& rho, const Representation& rhobar,
                                        int n);
void write_isospectral_csv(std::ostream& os, const IsospectralReport& r, const Presentation& p);

struct LimitConeSample {
  std::vector<Vector> points;               // lambda / |lambda|
  std::vector<std::array<double, 2>> gaps;  // (tau1, tau2) of the unit points
  double hull_area = 0;                     // hull of the origin and the unit gap points
  double angle_min = 0, angle_max = 0;      // polar angles of the gap points
};

LimitConeSample limit_cone(const std::vector<Vector>& jordan);
// max |a_2 - a_p| over the samples; 0 when p = 2.
double local_conformal_check(const BallSpectra& spectra, int p);

}  // namespace alab
