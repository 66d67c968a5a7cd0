#include "anosov_lab/hausdorff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "anosov_lab/chart.hpp"
#include "anosov_lab/io.hpp"

namespace alab {

MetricPointCloud affine_cloud(const std::vector<Eigen::VectorXd>& points) {
  MetricPointCloud c;
  c.factors.push_back(CloudFactor{false, points});
  return c;
}

MetricPointCloud xi_cloud(const std::vector<BoundarySample>& samples, bool bar) {
  MetricPointCloud c;
  CloudFactor f;
  for (const auto& s : samples) f.points.emplace_back(bar ? s.xibar.v : s.xi.v);
  c.factors.push_back(std::move(f));
  return c;
}

MetricPointCloud flag_cloud(const std::vector<BoundarySample>& samples) {
  MetricPointCloud c;
  c.metric = MetricPointCloud::Metric::product;
  c.factors.push_back(xi_cloud(samples, false).factors[0]);
  c.factors.push_back(xi_cloud(samples, true).factors[0]);
  return c;
}

MetricPointCloud subset(const MetricPointCloud& c, const std::vector<bool>& keep) {
  MetricPointCloud out;
  out.metric = c.metric;
  for (const auto& f : c.factors) {
    CloudFactor g{f.projective, {}};
    for (std::size_t i = 0; i < f.points.size(); ++i)
      if (keep[i]) g.points.push_back(f.points[i]);
    out.factors.push_back(std::move(g));
  }
  return out;
}

Eigen::MatrixXd chart_coordinates(const MetricPointCloud& c, int chart_variant) {
  const std::size_t n = c.size();
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index cols = 0;
  for (const auto& f : c.factors) {
    if (f.points.size() != n) throw InputError("point cloud factors differ in size");
    if (n == 0) continue;
    if (f.projective) {
      AffineChart ch = best_affine_chart(f.points, chart_variant);
      Eigen::MatrixXd b(n, ch.basis.cols());
      for (std::size_t i = 0; i < n; ++i) b.row(static_cast<Eigen::Index>(i)) = ch.coords(f.points[i]).transpose();
      blocks.push_back(std::move(b));
    } else {
      Eigen::MatrixXd b(n, f.points[0].size());
      for (std::size_t i = 0; i < n; ++i) b.row(static_cast<Eigen::Index>(i)) = f.points[i].transpose();
      blocks.push_back(std::move(b));
    }
    cols += blocks.back().cols();
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

std::size_t count_boxes(const Eigen::MatrixXd& coords, double eps, const Eigen::VectorXd& shift,
                        const std::vector<bool>& mask) {
  std::vector<std::uint64_t> keys;
  keys.reserve(static_cast<std::size_t>(coords.rows()));
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    if (!mask.empty() && !mask[static_cast<std::size_t>(i)]) continue;
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Eigen::Index j = 0; j < coords.cols(); ++j) {
      auto cell = static_cast<std::int64_t>(std::floor((coords(i, j) - shift(j)) / eps));
      std::uint64_t z = static_cast<std::uint64_t>(cell) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      h ^= z ^ (z >> 31);
    }
    keys.push_back(h);
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

BoxDimResult fit_box_counts(std::vector<double> eps, std::vector<std::vector<std::size_t>> counts) {
  BoxDimResult r;
  r.eps = std::move(eps);
  r.counts = std::move(counts);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < r.eps.size(); ++i) {
    double acc = 0;
    int m = 0;
    for (std::size_t c : r.counts[i])
      if (c > 0) acc += std::log(static_cast<double>(c)), ++m;
    r.mean_log_count.push_back(m ? acc / m : -std::numeric_limits<double>::infinity());
    if (m) {
      xs.push_back(std::log(r.eps[i]));
      ys.push_back(r.mean_log_count.back());
    }
  }
  if (xs.size() < 3) throw NumericError("box dimension: fewer than 3 usable scales");
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) sxx += (xs[i] - mx) * (xs[i] - mx), sxy += (xs[i] - mx) * (ys[i] - my);
  double slope = sxy / sxx, ssr = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - (my + slope * (xs[i] - mx));
    ssr += e * e;
  }
  r.dimension = -slope;
  r.stderr_slope = std::sqrt(ssr / std::max<std::size_t>(1, xs.size() - 2) / sxx);
  for (std::size_t i = 1; i < r.eps.size(); ++i)
    r.local_slopes.push_back(-(r.mean_log_count[i] - r.mean_log_count[i - 1]) /
                             (std::log(r.eps[i]) - std::log(r.eps[i - 1])));
  return r;
}

namespace {

std::vector<Eigen::VectorXd> grid_shifts(int count, Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  for (int s = 0; s < std::max(1, count); ++s) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    if (s > 0)
      for (Eigen::Index j = 0; j < dim; ++j) v(j) = u(rng);
    out.push_back(v);
  }
  return out;
}

// eps values (descending) from eps_max down to the smallest eps whose occupancy stays below the cap.
std::vector<double> choose_scales(const Eigen::MatrixXd& coords, const BoxDimOptions& opts, bool& trimmed,
                                  std::string& warning) {
  const double n = static_cast<double>(coords.rows());
  double extent = 0;
  for (Eigen::Index j = 0; j < coords.cols(); ++j)
    extent = std::max(extent, coords.col(j).maxCoeff() - coords.col(j).minCoeff());
  if (!(extent > 0)) throw NumericError("box dimension: degenerate cloud");
  double hi = opts.eps_range ? opts.eps_range->second : extent / 4;
  double lo = opts.eps_range ? opts.eps_range->first : 0;
  if (opts.eps_range && !(hi > lo && lo > 0)) throw InputError("box dimension: invalid eps range");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(coords.cols());
  double floor_eps = hi;
  for (double e = hi; e > (lo > 0 ? lo * 0.999 : 0); e *= std::pow(2.0, -0.25)) {
    if (static_cast<double>(count_boxes(coords, e, zero)) > opts.max_occupancy * n) break;
    floor_eps = e;
    if (e < extent * 1e-9) break;
  }
  if (lo > 0 && floor_eps > lo * 1.0001) {
    trimmed = true;
    warning = "eps range trimmed to " + format_double(floor_eps) + ": cloud too sparse below";
  }
  lo = lo > 0 ? std::max(lo, floor_eps) : floor_eps;
  if (hi / lo < 10) {
    warning += (warning.empty() ? "" : "; ");
    warning += "eps range spans less than a decade";
  }
  std::vector<double> eps;
  const int m = std::max(3, opts.eps_count);
  for (int i = 0; i < m; ++i) eps.push_back(hi * std::pow(lo / hi, static_cast<double>(i) / (m - 1)));
  return eps;
}

}  // namespace

BoxDimResult box_dim(const MetricPointCloud& cloud, const BoxDimOptions& opts) {
  if (cloud.size() < opts.min_points)
    throw InputError("box dimension needs at least " + std::to_string(opts.min_points) + " points");
  Eigen::MatrixXd coords = chart_coordinates(cloud, opts.chart_variant);
  bool trimmed = false;
  std::string warning;
  std::vector<double> eps = choose_scales(coords, opts, trimmed, warning);
  auto shifts = grid_shifts(opts.grid_shifts, coords.cols(), opts.seed);
  std::vector<std::vector<std::size_t>> counts;
  for (double e : eps) {
    std::vector<std::size_t> row;
    for (const auto& sh : shifts) row.push_back(count_boxes(coords, e, sh * e));
    counts.push_back(std::move(row));
  }
  BoxDimResult r = fit_box_counts(eps, counts);
  r.trimmed = trimmed;
  r.warning = warning;
  return r;
}

void write_box_csv(std::ostream& os, const BoxDimResult& r) {
  CsvWriter w(os, {"eps", "N_eps", "shift_id"});
  for (std::size_t i = 0; i < r.eps.size(); ++i)
    for (std::size_t s = 0; s < r.counts[i].size(); ++s) {
      w.cell(r.eps[i]).cell(r.counts[i][s]).cell(s);
      w.end_row();
    }
}

std::string box_dim_svg(const BoxDimResult& r, const std::string& comment) {
  const double W = 640, H = 480, pad = 50;
  SvgPlot plot(W, H);
  std::vector<std::pair<double, double>> pts;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (std::size_t i = 0; i < r.eps.size(); ++i) {
    if (!std::isfinite(r.mean_log_count[i])) continue;
    double x = -std::log(r.eps[i]), y = r.mean_log_count[i];
    pts.emplace_back(x, y);
    x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  auto map = [&](double x, double y) {
    return std::make_pair(pad + (x - x0) / std::max(x1 - x0, 1e-12) * (W - 2 * pad),
                          H - pad - (y - y0) / std::max(y1 - y0, 1e-12) * (H - 2 * pad));
  };
  std::vector<std::pair<double, double>> poly;
  for (auto [x, y] : pts) {
    auto p = map(x, y);
    poly.push_back(p);
    plot.circle(p.first, p.second, 3, "#1f4e79");
  }
  plot.polyline(poly, "#1f4e79", 1.0);
  plot.text(pad, 25, "log N(eps) vs log(1/eps), slope " + format_double(r.dimension));
  plot.line(pad, H - pad, W - pad, H - pad, "#000000");
  plot.line(pad, pad, pad, H - pad, "#000000");
  return plot.str(comment);
}

ConicalVerdict conical_verdict(const std::vector<double>& tau, const std::vector<double>& taubar,
                               const ConicalOptions& opts, std::size_t id) {
  ConicalVerdict v;
  v.sample = id;
  v.beta = opts.beta;
  v.R = opts.R;
  const int depth = static_cast<int>(std::min(tau.size(), taubar.size())) - 1;
  v.window_lo = std::max(0, opts.window_lo);
  v.window_hi = opts.window_hi < 0 ? depth : std::min(opts.window_hi, depth);
  for (int k = v.window_lo; k <= v.window_hi; ++k)
    if (std::abs(opts.beta * tau[k] - taubar[k]) <= opts.R) v.hits.push_back(k);
  v.verdict = static_cast<int>(v.hits.size()) >= opts.min_hits;
  return v;
}

std::vector<ConicalVerdict> conical_points(const std::vector<BoundarySample>& samples, const ConicalOptions& opts) {
  std::vector<ConicalVerdict> out;
  for (std::size_t i = 0; i < samples.size(); ++i) out.push_back(conical_verdict(samples[i].tau, samples[i].taubar, opts, i));
  return out;
}

double default_conical_R(const Representation& rho, const Representation& rhobar) {
  return 2 * std::max(generator_step_bound(rho), generator_step_bound(rhobar));
}

CoverEstimate cover_dim_upper(const PairSpectra& pairs, double beta, double R) {
  CoverEstimate est;
  std::vector<double> vals;
  std::vector<std::size_t> ls{0};
  for (int n = 0; n <= pairs.radius; ++n) {
    for (std::size_t i = pairs.level_start[n]; i < pairs.level_start[n + 1]; ++i)
      if (std::abs(beta * pairs.tau[i] - pairs.taubar[i]) <= R) vals.push_back(std::max(beta * pairs.tau[i], pairs.taubar[i]));
    ls.push_back(vals.size());
  }
  est.qualifying = vals.size();
  if (est.qualifying < 50) {
    est.inconclusive = true;
    est.reason = "fewer than 50 qualifying elements";
    return est;
  }
  try {
    for (int top = pairs.radius; top >= std::max(3, pairs.radius - 2); --top) {
      auto [lo, hi] = poincare_root(vals, ls, top);
      est.by_depth.emplace_back(top, 0.5 * (lo + hi));
      if (top == pairs.radius) {
        est.bracket_lo = lo;
        est.bracket_hi = hi;
        est.value = 0.5 * (lo + hi);
      }
    }
  } catch (const NumericError& e) {
    est.inconclusive = true;
    est.reason = e.what();
  }
  return est;
}

std::string NdiffReport::text() const {
  std::ostringstream os;
  os << "gap-isospectral deviation: " << format_double(iso_deviation) << "\n";
  os << "hyperconvexity rho: min det " << format_double(hyper_rho.min_det) << " (" << hyper_rho.caveat << ")\n";
  os << "hyperconvexity rhobar: min det " << format_double(hyper_rhobar.min_det) << "\n";
  os << "R: " << format_double(R) << ", scale band: " << format_double(band) << "\n";
  os << "samples: " << sample_count << ", conical over window: " << conical_count << "\n";
  os << "box dimension of conical samples: " << format_double(box.dimension) << " +- "
     << format_double(box.stderr_slope) << "\n";
  if (!box.warning.empty()) os << "box warning: " << box.warning << "\n";
  os << "scale-matched box dimension: " << format_double(box_scale_matched.dimension) << " +- "
     << format_double(box_scale_matched.stderr_slope) << "\n";
  if (!box_scale_matched.warning.empty()) os << "scale-matched warning: " << box_scale_matched.warning << "\n";
  os << "h_inf,1 (slope-fit): " << format_double(hinf_slope.value) << " +- " << format_double(hinf_slope.residual)
     << "\n";
  os << "h_inf,1 (poincare-root): " << format_double(hinf_root.value) << "\n";
  os << "two-scale scan flags: " << scan_flagged << ", conical samples also flagged: "
     << format_double(overlap_fraction) << "\n";
  os << "verdict: " << (verdict ? "PASS" : "FAIL") << " (finite-depth proxy, not a proof)\n";
  return os.str();
}

NdiffReport ndiff_dimension(const Group& g, const Representation& rho, const Representation& rhobar,
                            const PairSpectra& ball_pairs, const NdiffOptions& opts,
                            std::vector<BoundarySample>* samples_out) {
  if (!g.presentation().has_circle_boundary())
    throw HypothesisError("non-differentiability dimension needs a circle-boundary group");
  NdiffReport rep;
  rep.iso_deviation = gap_isospectral_check(g, rho, rhobar, opts.iso_radius).max_deviation;
  require_not_isospectral(rep.iso_deviation, opts.iso_tol);

  FlagSampleOptions fo;
  fo.depth = opts.depth;
  fo.seed = opts.seed;
  fo.workers = opts.workers;
  std::vector<BoundarySample> samples = flag_samples(g, rho, rhobar, opts.samples, fo);
  rep.sample_count = samples.size();

  HyperconvexityOptions ho;
  ho.triples = opts.hyperconvexity_triples;
  ho.seed = opts.seed;
  std::vector<FlagPoint> fa, fb;
  for (const auto& s : samples) {
    fa.push_back({s.frame, s.order_key});
    fb.push_back({s.frame_bar, s.order_key});
  }
  rep.hyper_rho = hyperconvexity_check(fa, 2, ho);
  rep.hyper_rhobar = hyperconvexity_check(fb, 2, ho);
  if (!rep.hyper_rho.verdict || !rep.hyper_rhobar.verdict)
    throw HypothesisError("representations are not (1,1,2)-hyperconvex on the sampled triples");

  const double step = std::max(generator_step_bound(rho), generator_step_bound(rhobar));
  rep.R = opts.R > 0 ? opts.R : 2 * step;
  rep.band = opts.band > 0 ? opts.band : 0.5 * step;

  ConicalOptions co = opts.conical;
  co.beta = opts.beta;
  co.R = rep.R;
  std::vector<ConicalVerdict> verdicts = conical_points(samples, co);
  std::vector<bool> conical(samples.size(), false);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    conical[i] = verdicts[i].verdict;
    rep.conical_count += conical[i];
  }

  MetricPointCloud cloud = flag_cloud(samples);
  if (rep.conical_count >= 2) {
    BoxDimOptions bo = opts.box;
    bo.min_points = std::min<std::size_t>(bo.min_points, rep.conical_count);
    rep.box = box_dim(subset(cloud, conical), bo);
  } else {
    rep.box.warning = "fewer than 2 conical samples";
    rep.box.dimension = std::numeric_limits<double>::quiet_NaN();
  }

  // Scale-matched counting: at box size eps a sample counts when its ray has a hit at a depth
  // where max{beta tau, taubar} is within the band of log(1/eps).
  Eigen::MatrixXd coords = chart_coordinates(cloud, opts.box.chart_variant);
  bool trimmed = false;
  std::string warning;
  std::vector<double> eps = choose_scales(coords, opts.box, trimmed, warning);
  double reach = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) reach = std::min(reach, std::max(opts.beta * s.tau.back(), s.taubar.back()));
  std::vector<double> kept;
  for (double e : eps)
    if (std::log(1 / e) + rep.band <= reach) kept.push_back(e);
  if (kept.size() < eps.size()) {
    trimmed = true;
    warning += (warning.empty() ? "" : "; ");
    warning += "scales below exp(-" + format_double(reach - rep.band) + ") unreachable at ray depth";
  }
  auto shifts = grid_shifts(opts.box.grid_shifts, coords.cols(), opts.box.seed);
  std::vector<std::vector<std::size_t>> counts;
  for (double e : kept) {
    const double L = std::log(1 / e);
    std::vector<bool> mask(samples.size(), false);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      for (std::size_t k = 1; k < s.tau.size(); ++k) {
        double bt = opts.beta * s.tau[k], tb = s.taubar[k];
        if (std::abs(bt - tb) <= rep.R && std::abs(std::max(bt, tb) - L) <= rep.band) {
          mask[i] = true;
          break;
        }
      }
    }
    std::vector<std::size_t> row;
    for (const auto& sh : shifts) row.push_back(count_boxes(coords, e, sh * e, mask));
    counts.push_back(std::move(row));
  }
  if (kept.size() >= 2) {
    rep.box_scale_matched = fit_box_counts(kept, counts);
  } else {
    rep.box_scale_matched.dimension = std::numeric_limits<double>::quiet_NaN();
  }
  rep.box_scale_matched.trimmed = trimmed;
  rep.box_scale_matched.warning = warning;

  ExponentOptions eo = opts.exponent;
  eo.method = ExponentMethod::slope_fit;
  rep.hinf_slope = hinf(opts.beta, ball_pairs, eo);
  eo.method = ExponentMethod::poincare_root;
  rep.hinf_root = hinf(opts.beta, ball_pairs, eo);

  NondiffScan scan = nondiff_scan(samples, opts.scan_threshold);
  rep.scan_flagged = scan.flagged_count;
  std::size_t both = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) both += conical[i] && scan.flagged[i];
  rep.overlap_fraction = rep.conical_count ? double(both) / double(rep.conical_count) : 0.0;

  rep.verdict = std::isfinite(rep.box.dimension) && std::abs(rep.box.dimension - rep.hinf_slope.value) <= opts.agreement && rep.box.dimension < 1 &&
                rep.hinf_slope.value < 1;
  if (samples_out) *samples_out = std::move(samples);
  return rep;
}

}  // namespace alab
