#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "anosov_lab/group.hpp"
#include "anosov_lab/replin.hpp"

namespace alab {

// U_1(rho(alpha_n)) along a ray, with d_P(U_1(alpha_{n-1}), U_1(alpha_n)) as convergence.
struct XiEstimate {
  ProjectivePoint xi;
  Matrix frame;  // left-singular frame of rho(alpha_n)
  double convergence = 0;
};

XiEstimate xi(const Representation& rho, const Word& ray, int depth);

// Per-depth data along a ray: tau_1(a(rho(alpha_k))) and the attractor step
// d_P(U_1(alpha_{k-1}), U_1(alpha_k)) (0 at k = 0, NaN when the attractor is ambiguous).
struct RayProfile {
  std::vector<double> tau;
  std::vector<double> step;
};
RayProfile ray_profile(const Representation& rho, const Word& ray, int depth);

struct BoundarySample {
  Ray ray;
  double order_key = 0;
  ProjectivePoint xi, xibar;
  Matrix frame, frame_bar;
  double convergence = 0, convergence_bar = 0;
  bool converged = false;
  std::vector<double> tau, taubar;  // tau_1 along the ray prefixes, k = 0..depth
};

struct FlagSampleOptions {
  int depth = 60;
  double tolerance = 1e-6;
  std::uint64_t seed = 1;
  bool adaptive = true;  // refine where consecutive samples are far apart in the product metric
  int workers = 1;
};

BoundarySample boundary_sample(const Representation& rho, const Representation& rhobar, const Ray& ray,
                               double order_key, int depth, double tolerance);

// Samples ordered by cyclic order key: the reference-model angle for circle-boundary groups,
// the planar cyclic order of the Cayley tree for free groups. Unconverged samples are kept.
std::vector<BoundarySample> flag_samples(const Group& g, const Representation& rho, const Representation& rhobar,
                                         int count, const FlagSampleOptions& opts = {});

// Cyclic order key in [0, 1) of a free-group word, from the rotation system (a, b, ..., A, B, ...).
double free_cyclic_key(const Presentation& p, const Word& w);

// max(d_P(xi), d_P(xibar)) between two samples.
double product_distance(const BoundarySample& a, const BoundarySample& b);

struct ConeImageStat {
  Word gamma;
  int depth = 0;
  double tau1 = 0;
  double diameter = 0;
  double ratio = 0;  // diameter * exp(tau1)
  std::size_t members = 0;
  bool skipped = false;
  std::string reason;
};

struct ConeImageOptions {
  int coarse_constant = 2;
  int probe_extra = 8;  // sample prefixes are probed at |alpha_n| + probe_extra letters
};

// For each prefix alpha_n (n in [n_lo, n_hi]) of `ray`, the samples whose ray passes within the
// coarse constant of alpha_n, and the projective diameter of their xi-images.
std::vector<ConeImageStat> cone_image_stats(const Group& g, const Representation& rho, const Ray& ray,
                                            const std::vector<BoundarySample>& pool, int n_lo, int n_hi,
                                            const ConeImageOptions& opts = {});

struct NondiffScan {
  double threshold = 0;
  std::vector<double> log_ratio;  // largest |log(slope_1 / slope_4)| over available sides
  std::vector<bool> evaluated;
  std::vector<bool> flagged;
  std::size_t flagged_count = 0;
  std::size_t evaluated_count = 0;
  double fraction() const { return evaluated_count ? double(flagged_count) / double(evaluated_count) : 0.0; }
};

// Two-scale secant test on a graph (x_i, y_i) with increasing x: one-sided secant slopes to the
// nearest and the 4-apart neighbours; flags i when their log-ratio exceeds the threshold.
NondiffScan nondiff_scan(const std::vector<double>& x, const std::vector<double>& y, double threshold,
                         bool cyclic = false);
// Arc-length coordinates of the xi and xibar curves of cyclically ordered samples.
NondiffScan nondiff_scan(const std::vector<BoundarySample>& samples, double threshold);

void write_flag_csv(std::ostream& os, const std::vector<BoundarySample>& samples, const Presentation& p,
                    const std::vector<std::string>& flags = {});
// xi-curve in the affine chart of largest margin; flagged samples are marked.
std::string flag_curve_svg(const std::vector<BoundarySample>& samples, const std::vector<bool>& flagged,
                           const std::string& comment = {});

}  // namespace alab
