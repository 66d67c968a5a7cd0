#include "anosov_lab/limitset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "anosov_lab/chart.hpp"
#include "anosov_lab/io.hpp"
#include "anosov_lab/parallel.hpp"

namespace alab {

namespace {

// rho(alpha_k) and its inverse, advanced one letter at a time.
struct PrefixProduct {
  const Representation& rho;
  NormalizedMatrix m, inv;
  explicit PrefixProduct(const Representation& r) : rho(r), m(identity_normalized(r.dim())), inv(m) {}
  void push(Letter s) {
    m.m = m.m * rho.matrix(s);
    renormalize(m);
    inv.m = rho.matrix(rho.presentation().inverse[s]) * inv.m;
    renormalize(inv);
  }
  double tau1() const {
    Vector a = cartan_projection(m, &inv);
    return a(0) - a(1);
  }
};

}  // namespace

XiEstimate xi(const Representation& rho, const Word& ray, int depth) {
  if (depth < 1 || static_cast<std::size_t>(depth) > ray.size()) throw InputError("xi: depth exceeds the ray");
  PrefixProduct pp(rho);
  ProjectivePoint prev;
  XiEstimate out;
  for (int k = 1; k <= depth; ++k) {
    pp.push(ray[static_cast<std::size_t>(k - 1)]);
    if (k == depth - 1) prev = cartan_attractor(pp.m);
  }
  out.xi = cartan_attractor(pp.m);
  out.frame = left_singular_frame(pp.m);
  out.convergence = depth >= 2 ? proj_dist(prev, out.xi) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

RayProfile ray_profile(const Representation& rho, const Word& ray, int depth) {
  PrefixProduct pp(rho);
  RayProfile rp;
  rp.tau.push_back(0.0);
  rp.step.push_back(0.0);
  std::optional<ProjectivePoint> prev;
  for (int k = 1; k <= depth; ++k) {
    pp.push(ray[static_cast<std::size_t>(k - 1)]);
    rp.tau.push_back(pp.tau1());
    try {
      ProjectivePoint cur = cartan_attractor(pp.m);
      rp.step.push_back(prev ? proj_dist(*prev, cur) : std::numeric_limits<double>::quiet_NaN());
      prev = cur;
    } catch (const AmbiguousAttractor&) {
      rp.step.push_back(std::numeric_limits<double>::quiet_NaN());
      prev.reset();
    }
  }
  return rp;
}

BoundarySample boundary_sample(const Representation& rho, const Representation& rhobar, const Ray& ray,
                               double order_key, int depth, double tolerance) {
  BoundarySample s;
  s.ray = ray;
  s.order_key = order_key;
  PrefixProduct a(rho), b(rhobar);
  s.tau.assign(1, 0.0);
  s.taubar.assign(1, 0.0);
  Matrix fa_prev, fb_prev;
  for (int k = 1; k <= depth; ++k) {
    Letter l = ray.word[static_cast<std::size_t>(k - 1)];
    a.push(l);
    b.push(l);
    s.tau.push_back(a.tau1());
    s.taubar.push_back(b.tau1());
    if (k == depth - 1) {
      fa_prev = left_singular_frame(a.m);
      fb_prev = left_singular_frame(b.m);
    }
  }
  s.frame = left_singular_frame(a.m);
  s.frame_bar = left_singular_frame(b.m);
  s.xi = make_projective(s.frame.col(0));
  s.xibar = make_projective(s.frame_bar.col(0));
  if (depth >= 2) {
    s.convergence = proj_dist(make_projective(fa_prev.col(0)), s.xi);
    s.convergence_bar = proj_dist(make_projective(fb_prev.col(0)), s.xibar);
  } else {
    s.convergence = s.convergence_bar = std::numeric_limits<double>::infinity();
  }
  const double gap_tol = 1e-6;
  bool ambiguous = s.tau.back() <= gap_tol || s.taubar.back() <= gap_tol;
  s.converged = !ambiguous && s.convergence < tolerance && s.convergence_bar < tolerance;
  return s;
}

double free_cyclic_key(const Presentation& p, const Word& w) {
  const int k = static_cast<int>(p.rank);
  auto pos = [&](Letter l) { return (l % 2 == 0) ? l / 2 : k + l / 2; };
  double key = 0, scale = 1.0 / (2 * k);
  for (std::size_t i = 0; i < w.size(); ++i) {
    int digit;
    if (i == 0) {
      digit = pos(w[0]);
    } else {
      digit = ((pos(w[i]) - pos(p.inverse[w[i - 1]]) - 1) % (2 * k) + 2 * k) % (2 * k);
      scale /= (2 * k - 1);
    }
    key += digit * scale;
    if (i == 0) scale = 1.0 / (2 * k);
  }
  return key;
}

double product_distance(const BoundarySample& a, const BoundarySample& b) {
  return std::max(proj_dist(a.xi, b.xi), proj_dist(a.xibar, b.xibar));
}

std::vector<BoundarySample> flag_samples(const Group& g, const Representation& rho, const Representation& rhobar,
                                         int count, const FlagSampleOptions& opts) {
  if (rho.presentation().label() != rhobar.presentation().label())
    throw InputError("flag samples: representations do not share the presentation");
  if (count < 1) throw InputError("flag samples: count must be positive");
  const Presentation& p = g.presentation();
  if (p.has_circle_boundary() && opts.depth > g.max_ray_depth())
    throw InputError("flag samples: depth " + std::to_string(opts.depth) + " exceeds the certified ray depth " +
                     std::to_string(g.max_ray_depth()) + " for this presentation");
  std::vector<BoundarySample> out;
  auto compute = [&](const std::vector<double>& angles) {
    std::vector<BoundarySample> s(angles.size());
    parallel_for(angles.size(), opts.workers, [&](std::size_t i) {
      Ray r = g.directed_ray(angles[i], opts.depth);
      s[i] = boundary_sample(rho, rhobar, r, angles[i], opts.depth, opts.tolerance);
    });
    return s;
  };

  if (!p.has_circle_boundary()) {
    std::vector<Ray> rays = g.geodesic_rays(opts.depth, count, opts.seed);
    out.resize(rays.size());
    parallel_for(rays.size(), opts.workers, [&](std::size_t i) {
      out[i] = boundary_sample(rho, rhobar, rays[i], free_cyclic_key(p, rays[i].word), opts.depth, opts.tolerance);
    });
    std::stable_sort(out.begin(), out.end(),
                     [](const BoundarySample& a, const BoundarySample& b) { return a.order_key < b.order_key; });
    return out;
  }

  const int initial = opts.adaptive ? std::min(count, std::max(8, count / 8)) : count;
  std::mt19937_64 rng(opts.seed);
  const double offset = std::uniform_real_distribution<double>(0.0, 2 * M_PI / initial)(rng);
  std::vector<double> angles;
  for (int i = 0; i < initial; ++i) angles.push_back(offset + 2 * M_PI * i / initial);
  out = compute(angles);
  while (static_cast<int>(out.size()) < count) {
    const std::size_t n = out.size();
    std::vector<std::pair<double, std::size_t>> gaps(n);
    for (std::size_t i = 0; i < n; ++i) gaps[i] = {product_distance(out[i], out[(i + 1) % n]), i};
    const std::size_t batch = std::min<std::size_t>(64, static_cast<std::size_t>(count) - n);
    std::partial_sort(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(batch), gaps.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    std::vector<double> mids;
    for (std::size_t j = 0; j < batch; ++j) {
      std::size_t i = gaps[j].second;
      double a0 = out[i].order_key, a1 = out[(i + 1) % n].order_key;
      if (i + 1 == n) a1 += 2 * M_PI;
      double m = 0.5 * (a0 + a1);
      if (m >= offset + 2 * M_PI) m -= 2 * M_PI;
      mids.push_back(m);
    }
    std::vector<BoundarySample> fresh = compute(mids);
    for (auto& s : fresh) out.push_back(std::move(s));
    std::stable_sort(out.begin(), out.end(),
                     [](const BoundarySample& a, const BoundarySample& b) { return a.order_key < b.order_key; });
  }
  return out;
}

std::vector<ConeImageStat> cone_image_stats(const Group& g, const Representation& rho, const Ray& ray,
                                            const std::vector<BoundarySample>& pool, int n_lo, int n_hi,
                                            const ConeImageOptions& opts) {
  std::vector<ConeImageStat> stats;
  for (int n = std::max(0, n_lo); n <= n_hi && static_cast<std::size_t>(n) <= ray.depth(); ++n) {
    ConeImageStat st;
    st.gamma = ray.prefix(static_cast<std::size_t>(n));
    st.depth = n;
    {
      SpectrumSample sp = spectrum_of(rho, st.gamma);
      st.tau1 = sp.cartan(0) - sp.cartan(1);
    }
    const Word ginv = g.presentation().invert(st.gamma);
    std::vector<const BoundarySample*> members;
    for (const auto& s : pool) {
      std::size_t len = std::min(s.ray.depth(), static_cast<std::size_t>(n + opts.probe_extra));
      Word beta = s.ray.prefix(len);
      std::size_t rest = g.length(ginv * beta);
      if (static_cast<std::size_t>(n) + rest <= beta.size() + static_cast<std::size_t>(opts.coarse_constant))
        members.push_back(&s);
    }
    st.members = members.size();
    if (members.size() < 2) {
      st.skipped = true;
      st.reason = "fewer than 2 member samples";
      stats.push_back(st);
      continue;
    }
    double diam = 0;
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j)
        diam = std::max(diam, proj_dist(members[i]->xi, members[j]->xi));
    st.diameter = diam;
    st.ratio = diam * std::exp(st.tau1);
    stats.push_back(st);
  }
  return stats;
}

namespace {

NondiffScan scan_impl(const std::vector<double>& x, const std::vector<double>& y, double threshold, bool cyclic,
                      double period_x, double period_y) {
  const std::size_t n = x.size();
  NondiffScan sc;
  sc.threshold = threshold;
  sc.log_ratio.assign(n, 0.0);
  sc.evaluated.assign(n, false);
  sc.flagged.assign(n, false);
  auto at = [&](long j, double& xx, double& yy) {
    long nn = static_cast<long>(n);
    if (!cyclic && (j < 0 || j >= nn)) return false;
    long wraps = j >= 0 ? j / nn : -((-j + nn - 1) / nn);
    long r = j - wraps * nn;
    xx = x[static_cast<std::size_t>(r)] + static_cast<double>(wraps) * period_x;
    yy = y[static_cast<std::size_t>(r)] + static_cast<double>(wraps) * period_y;
    return true;
  };
  for (std::size_t i = 0; i < n; ++i) {
    double best = -1;
    for (int side : {1, -1}) {
      double x0, y0, x1, y1, x4, y4;
      long ii = static_cast<long>(i);
      if (!at(ii, x0, y0) || !at(ii + side, x1, y1) || !at(ii + 4 * side, x4, y4)) continue;
      double s1 = (y1 - y0) / (x1 - x0), s4 = (y4 - y0) / (x4 - x0);
      double lr = (s1 > 0 && s4 > 0 && std::isfinite(s1) && std::isfinite(s4))
                      ? std::abs(std::log(s1 / s4))
                      : std::numeric_limits<double>::infinity();
      best = std::max(best, lr);
    }
    if (best < 0) continue;
    sc.evaluated[i] = true;
    ++sc.evaluated_count;
    sc.log_ratio[i] = best;
    if (best > threshold) {
      sc.flagged[i] = true;
      ++sc.flagged_count;
    }
  }
  return sc;
}

}  // namespace

NondiffScan nondiff_scan(const std::vector<double>& x, const std::vector<double>& y, double threshold, bool cyclic) {
  if (x.size() != y.size()) throw InputError("nondiff scan: coordinate lengths differ");
  if (x.size() < 5) throw InputError("nondiff scan: insufficient neighbours (need at least 5 samples)");
  double px = 0, py = 0;
  if (cyclic) {
    px = x.back() - x.front() + (x.back() - x[x.size() - 2]);
    py = y.back() - y.front() + (y.back() - y[y.size() - 2]);
  }
  return scan_impl(x, y, threshold, cyclic, px, py);
}

NondiffScan nondiff_scan(const std::vector<BoundarySample>& s, double threshold) {
  if (s.size() < 5) throw InputError("nondiff scan: insufficient neighbours (need at least 5 samples)");
  std::vector<double> x(s.size(), 0.0), y(s.size(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    x[i] = x[i - 1] + proj_dist(s[i - 1].xi, s[i].xi);
    y[i] = y[i - 1] + proj_dist(s[i - 1].xibar, s[i].xibar);
  }
  double px = x.back() + proj_dist(s.back().xi, s.front().xi);
  double py = y.back() + proj_dist(s.back().xibar, s.front().xibar);
  return scan_impl(x, y, threshold, true, px, py);
}

void write_flag_csv(std::ostream& os, const std::vector<BoundarySample>& samples, const Presentation& p,
                    const std::vector<std::string>& flags) {
  if (samples.empty()) return;
  const int d = static_cast<int>(samples[0].xi.v.size()), db = static_cast<int>(samples[0].xibar.v.size());
  std::vector<std::string> header{"orderKey", "rayPrefix"};
  for (int i = 0; i < d; ++i) header.push_back("xi_" + std::to_string(i));
  for (int i = 0; i < db; ++i) header.push_back("xibar_" + std::to_string(i));
  header.push_back("convergence");
  header.push_back("flags");
  CsvWriter w(os, header);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    w.cell(s.order_key).cell(p.format_word(s.ray.word));
    for (int k = 0; k < d; ++k) w.cell(s.xi.v(k));
    for (int k = 0; k < db; ++k) w.cell(s.xibar.v(k));
    w.cell(std::max(s.convergence, s.convergence_bar));
    std::string f = s.converged ? "" : "unconverged";
    if (i < flags.size() && !flags[i].empty()) f += (f.empty() ? "" : ";") + flags[i];
    w.cell(f);
    w.end_row();
  }
}

std::string flag_curve_svg(const std::vector<BoundarySample>& samples, const std::vector<bool>& flagged,
                           const std::string& comment) {
  const double W = 800, H = 800, pad = 40;
  SvgPlot plot(W, H);
  if (samples.empty()) return plot.str(comment);
  std::vector<Eigen::VectorXd> pts;
  for (const auto& s : samples) pts.push_back(Eigen::VectorXd(s.xi.v));
  AffineChart chart = best_affine_chart(pts);
  std::vector<std::pair<double, double>> xy;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : pts) {
    Eigen::VectorXd c = chart.coords(p);
    double a = c(0), b = c.size() > 1 ? c(1) : 0.0;
    xy.emplace_back(a, b);
    x0 = std::min(x0, a), x1 = std::max(x1, a), y0 = std::min(y0, b), y1 = std::max(y1, b);
  }
  double scale = (W - 2 * pad) / std::max({x1 - x0, y1 - y0, 1e-12});
  for (auto& [a, b] : xy) {
    a = pad + (a - x0) * scale;
    b = H - pad - (b - y0) * scale;
  }
  auto closed = xy;
  closed.push_back(xy.front());
  plot.polyline(closed, "#1f4e79", 1.0);
  for (std::size_t i = 0; i < xy.size() && i < flagged.size(); ++i)
    if (flagged[i]) plot.circle(xy[i].first, xy[i].second, 2.0, "#c0392b");
  return plot.str(comment);
}

}  // namespace alab
