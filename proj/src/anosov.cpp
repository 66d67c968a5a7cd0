#include "anosov_lab/anosov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "anosov_lab/io.hpp"

namespace alab {

DominationFit domination_fit_minima(const std::vector<double>& minima, int k, const DominationOptions& opts) {
  const int N = static_cast<int>(minima.size()) - 1;
  const int n0 = std::max(0, opts.window_start);
  if (N - n0 < opts.min_span) throw InputError("domination fit: window shorter than the minimum span");
  DominationFit f;
  f.k = k;
  f.radius = N;
  f.sphere_minima = minima;
  double mu = std::numeric_limits<double>::infinity();
  for (int a = n0; a <= N; ++a)
    for (int b = a + opts.min_span; b <= N; ++b) mu = std::min(mu, (minima[b] - minima[a]) / (b - a));
  f.mu = mu;
  double C = 0;
  for (int n = n0; n <= N; ++n) C = std::max(C, mu * n - minima[n]);
  f.C = C;
  double margin = std::numeric_limits<double>::infinity();
  for (int n = n0; n <= N; ++n) margin = std::min(margin, minima[n] - (mu * n - C));
  f.min_margin = margin;
  f.verdict = mu >= opts.mu_min;
  return f;
}

DominationFit domination_fit(const std::vector<SpectrumSample>& spectra, int k, const DominationOptions& opts) {
  if (spectra.empty()) throw InputError("domination fit: no spectra");
  int N = 0;
  for (const auto& s : spectra) N = std::max(N, s.length);
  std::vector<double> m(static_cast<std::size_t>(N) + 1, std::numeric_limits<double>::infinity());
  for (const auto& s : spectra) m[s.length] = std::min(m[s.length], s.cartan(k - 1) - s.cartan(k));
  for (int n = 0; n <= N; ++n)
    if (!std::isfinite(m[n])) throw InputError("domination fit: missing sphere " + std::to_string(n));
  return domination_fit_minima(m, k, opts);
}

std::vector<double> sphere_minima(const Ball& ball, const std::vector<double>& values) {
  std::vector<double> m(static_cast<std::size_t>(ball.radius) + 1, std::numeric_limits<double>::infinity());
  for (int n = 0; n <= ball.radius; ++n)
    for (std::size_t i = ball.level_start[n]; i < ball.level_start[n + 1]; ++i) m[n] = std::min(m[n], values[i]);
  return m;
}

DominationFit domination_fit(const Ball& ball, const BallSpectra& spectra, int k, const DominationOptions& opts) {
  std::vector<double> v(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) v[i] = spectra.tau(i, k);
  return domination_fit_minima(sphere_minima(ball, v), k, opts);
}

double triple_determinant(const Matrix& fx, const Matrix& fy, const Matrix& fz, int p) {
  const int d = static_cast<int>(fx.rows());
  const int c = 2 + d - p;
  Eigen::MatrixXd m(d, c);
  m.col(0) = fx.col(0).normalized();
  m.col(1) = fy.col(0).normalized();
  for (int j = 0; j < d - p; ++j) m.col(2 + j) = fz.col(j).normalized();
  if (c == d) return std::abs(m.determinant());
  // volume of the spanned parallelotope
  return std::sqrt(std::max(0.0, (m.transpose() * m).determinant()));
}

namespace {
std::array<double, 3> pair_sines(const Matrix& fx, const Matrix& fy, const Matrix& fz, int p) {
  const int d = static_cast<int>(fx.rows());
  Vector x = fx.col(0).normalized(), y = fy.col(0).normalized();
  const double sxy = (x - x.dot(y) * y).norm();
  if (d == p) return {sxy, 1.0, 1.0};  // xi^0(z) = {0}
  Eigen::HouseholderQR<Matrix> qr(fz.leftCols(d - p));
  Matrix q = qr.householderQ() * Matrix::Identity(d, d - p);
  auto sin_to_z = [&](const Vector& v) { return (v - q * (q.transpose() * v)).norm(); };
  return {sxy, sin_to_z(x), sin_to_z(y)};
}
}  // namespace

double triple_separation(const Matrix& fx, const Matrix& fy, const Matrix& fz, int p) {
  auto s = pair_sines(fx, fy, fz, p);
  return s[0] * s[1] * s[2];
}

HyperconvexityReport hyperconvexity_check(const std::vector<FlagPoint>& samples, int p,
                                          const HyperconvexityOptions& opts) {
  HyperconvexityReport rep;
  rep.p = p;
  const std::size_t n = samples.size();
  if (n < 3) throw InputError("hyperconvexity check needs at least 3 samples");
  const int d = static_cast<int>(samples[0].frame.rows());
  if (p < 2 || p > d) throw InputError("hyperconvexity check: need 2 <= p <= d");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return samples[a].order_key < samples[b].order_key; });

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  rep.min_det = rep.min_raw_det = std::numeric_limits<double>::infinity();
  auto test = [&](std::size_t x, std::size_t y, std::size_t z) {
    if (x == y || y == z || x == z) {
      ++rep.triples_excluded;
      return;
    }
    const Matrix &fx = samples[x].frame, &fy = samples[y].frame, &fz = samples[z].frame;
    const auto sines = pair_sines(fx, fy, fz, p);
    if (std::min({sines[0], sines[1], sines[2]}) < opts.resolution) {
      ++rep.triples_excluded;
      return;
    }
    const double sep = sines[0] * sines[1] * sines[2];
    const double raw = triple_determinant(fx, fy, fz, p);
    const double det = raw / sep;
    ++rep.triples_tested;
    rep.min_raw_det = std::min(rep.min_raw_det, raw);
    if (det < rep.min_det) {
      rep.min_det = det;
      rep.argmin = {x, y, z};
    }
  };
  // Stratum j pairs x with a neighbour about n / 2^(j+1) places away in the cyclic order.
  const int per = std::max(1, opts.triples / (opts.strata + 1));
  for (int j = 0; j <= opts.strata; ++j) {
    std::size_t span = std::max<std::size_t>(1, n >> (j + 1));
    std::uniform_int_distribution<std::size_t> off(1, span);
    for (int t = 0; t < per; ++t) {
      std::size_t ix = pick(rng);
      std::size_t x = order[ix];
      std::size_t y = j == opts.strata ? pick(rng) : order[(ix + off(rng)) % n];
      std::size_t z = pick(rng);
      test(x, y, z);
      // near-collision of the hyperplane point with a line point
      if (j < opts.strata) test(x, z, y);
    }
  }
  rep.verdict = rep.triples_tested > 0 && rep.min_det > opts.threshold;
  return rep;
}

IsospectralReport gap_isospectral_check(const Group& g, const Representation& rho, const Representation& rhobar,
                                        int n) {
  IsospectralReport rep;
  rep.radius = n;
  for (const Word& w : g.conjugacy_reps(n)) {
    IsospectralRow row;
    row.word = w;
    row.length = static_cast<int>(w.size());
    Vector l = spectrum_of(rho, w).jordan;
    Vector lb = spectrum_of(rhobar, w).jordan;
    row.tau1_rho = l(0) - l(1);
    row.tau1_rhobar = lb(0) - lb(1);
    row.deviation = std::abs(row.tau1_rho - row.tau1_rhobar);
    if (rep.rows.empty() || row.deviation > rep.max_deviation) {
      rep.max_deviation = row.deviation;
      rep.witness = w;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

void write_isospectral_csv(std::ostream& os, const IsospectralReport& r, const Presentation& p) {
  CsvWriter w(os, {"class", "len", "tau1_rho", "tau1_rhobar", "deviation"});
  for (const auto& row : r.rows) {
    w.cell(p.format_word(row.word)).cell(row.length).cell(row.tau1_rho).cell(row.tau1_rhobar).cell(row.deviation);
    w.end_row();
  }
}

LimitConeSample limit_cone(const std::vector<Vector>& jordan) {
  LimitConeSample out;
  std::vector<std::array<double, 2>> pts{{0.0, 0.0}};
  out.angle_min = std::numeric_limits<double>::infinity();
  out.angle_max = -std::numeric_limits<double>::infinity();
  for (const Vector& l : jordan) {
    double nrm = l.norm();
    if (nrm <= 1e-12) continue;
    Vector u = l / nrm;
    out.points.push_back(u);
    std::array<double, 2> g{u.size() > 1 ? u(0) - u(1) : 0.0, u.size() > 2 ? u(1) - u(2) : 0.0};
    out.gaps.push_back(g);
    pts.push_back(g);
    double ang = std::atan2(g[1], g[0]);
    out.angle_min = std::min(out.angle_min, ang);
    out.angle_max = std::max(out.angle_max, ang);
  }
  if (out.points.empty()) {
    out.angle_min = out.angle_max = 0;
    return out;
  }
  // monotone chain hull
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<std::array<double, 2>> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  double area = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a[0] * b[1] - a[1] * b[0];
  }
  out.hull_area = std::abs(area) / 2;
  return out;
}

double local_conformal_check(const BallSpectra& spectra, int p) {
  if (p == 2) return 0.0;
  double dev = 0;
  for (std::size_t i = 0; i < spectra.count; ++i) dev = std::max(dev, std::abs(spectra.a(i)[1] - spectra.a(i)[p - 1]));
  return dev;
}

}  // namespace alab
