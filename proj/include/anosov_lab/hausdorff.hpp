#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anosov_lab/anosov.hpp"
#include "anosov_lab/exponents.hpp"
#include "anosov_lab/limitset.hpp"

namespace alab {

// One factor of a point cloud: projective points (unit vectors, charted before counting) or
// affine coordinates used as they are.
struct CloudFactor {
  bool projective = true;
  std::vector<Eigen::VectorXd> points;
};

struct MetricPointCloud {
  enum class Metric { single, product };  // product: L-infinity over the factors
  Metric metric = Metric::single;
  std::vector<CloudFactor> factors;
  std::size_t size() const { return factors.empty() ? 0 : factors[0].points.size(); }
};

MetricPointCloud affine_cloud(const std::vector<Eigen::VectorXd>& points);
MetricPointCloud xi_cloud(const std::vector<BoundarySample>& samples, bool bar = false);
MetricPointCloud flag_cloud(const std::vector<BoundarySample>& samples);  // (xi, xibar), product metric
MetricPointCloud subset(const MetricPointCloud& c, const std::vector<bool>& keep);

// Counting coordinates (n x D): each projective factor in its best affine chart, factors side by
// side, so that boxes are L-infinity product boxes.
Eigen::MatrixXd chart_coordinates(const MetricPointCloud& c, int chart_variant = 0);
// Occupied boxes of side eps on the grid offset by `shift`, over rows with mask[i] (all if empty).
std::size_t count_boxes(const Eigen::MatrixXd& coords, double eps, const Eigen::VectorXd& shift,
                        const std::vector<bool>& mask = {});

struct BoxDimOptions {
  std::optional<std::pair<double, double>> eps_range;  // [eps_min, eps_max]
  int eps_count = 16;
  int grid_shifts = 8;
  std::uint64_t seed = 1;
  int chart_variant = 0;
  double max_occupancy = 0.1;  // drop eps with N(eps) above this fraction of the point count
  std::size_t min_points = 1000;
};

struct BoxDimResult {
  double dimension = 0;
  double stderr_slope = 0;
  std::vector<double> eps;
  std::vector<std::vector<std::size_t>> counts;  // [eps][shift]
  std::vector<double> mean_log_count;
  std::vector<double> local_slopes;  // -d log N / d log eps between consecutive eps
  bool trimmed = false;
  std::string warning;
};

BoxDimResult box_dim(const MetricPointCloud& cloud, const BoxDimOptions& opts = {});
// Least-squares dimension from given log-counts.
BoxDimResult fit_box_counts(std::vector<double> eps, std::vector<std::vector<std::size_t>> counts);
void write_box_csv(std::ostream& os, const BoxDimResult& r);
std::string box_dim_svg(const BoxDimResult& r, const std::string& comment = {});

struct ConicalOptions {
  double beta = 1;
  double R = 1;
  int window_lo = 10;
  int window_hi = -1;  // -1: the ray depth
  int min_hits = 3;
};

struct ConicalVerdict {
  std::size_t sample = 0;
  double beta = 1, R = 0;
  int window_lo = 0, window_hi = 0;
  std::vector<int> hits;
  bool verdict = false;
};

// Hits are depths k in the window with |beta tau_k - taubar_k| <= R.
ConicalVerdict conical_verdict(const std::vector<double>& tau, const std::vector<double>& taubar,
                               const ConicalOptions& opts, std::size_t id = 0);
std::vector<ConicalVerdict> conical_points(const std::vector<BoundarySample>& samples, const ConicalOptions& opts);
// Twice the largest single-generator spectral step of either representation.
double default_conical_R(const Representation& rho, const Representation& rhobar);

struct CoverEstimate {
  double value = 0;
  double bracket_lo = 0, bracket_hi = 0;
  std::size_t qualifying = 0;
  std::vector<std::pair<int, double>> by_depth;  // (top sphere, estimate) for the last three depths
  bool inconclusive = false;
  std::string reason;
};

// Critical exponent of the cover by radii exp(-max{beta tau, taubar}) restricted to elements with
// |beta tau - taubar| <= R, by the ratio test across the last depths.
CoverEstimate cover_dim_upper(const PairSpectra& pairs, double beta, double R);

struct NdiffOptions {
  int samples = 20000;
  int depth = 60;
  double beta = 1;
  double R = -1;            // -1: default_conical_R
  double band = -1;         // scale matching half-width; -1: half the generator step bound
  double iso_tol = 1e-6;
  int iso_radius = 6;
  double agreement = 0.2;
  double scan_threshold = 0.5;
  int hyperconvexity_triples = 4000;
  BoxDimOptions box;
  ExponentOptions exponent;
  ConicalOptions conical;
  int workers = 1;
  std::uint64_t seed = 1;
};

struct NdiffReport {
  double iso_deviation = 0;
  HyperconvexityReport hyper_rho, hyper_rhobar;
  BoxDimResult box;                // samples with a 1-conical verdict over the window
  BoxDimResult box_scale_matched;  // box counted only where a hit sits at the box's own scale
  ExponentEstimate hinf_slope, hinf_root;
  double R = 0, band = 0;
  std::size_t sample_count = 0;
  std::size_t conical_count = 0;  // samples with a conical verdict over the window
  std::size_t scan_flagged = 0;
  double overlap_fraction = 0;    // conical samples also flagged by the two-scale scan
  bool verdict = false;
  std::string text() const;
};

// Refuses (GapIsospectralError) on gap-isospectral pairs and (HypothesisError) when either
// representation fails the sampled hyperconvexity check or the group boundary is not a circle.
NdiffReport ndiff_dimension(const Group& g, const Representation& rho, const Representation& rhobar,
                            const PairSpectra& ball_pairs, const NdiffOptions& opts = {},
                            std::vector<BoundarySample>* samples_out = nullptr);

}  // namespace alab
