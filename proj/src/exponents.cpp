#include "anosov_lab/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "anosov_lab/io.hpp"

namespace alab {

PairSpectra pair_spectra(const Ball& ball, const BallSpectra& rho, const BallSpectra& rhobar) {
  PairSpectra p;
  p.radius = ball.radius;
  p.level_start = ball.level_start;
  p.tau.resize(ball.size());
  p.taubar.resize(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) {
    p.tau[i] = rho.tau(i, 1);
    p.taubar[i] = rhobar.tau(i, 1);
  }
  return p;
}

PairSpectra dual_pair_spectra(const Ball& ball, const BallSpectra& rho) {
  PairSpectra p;
  p.radius = ball.radius;
  p.level_start = ball.level_start;
  p.tau.resize(ball.size());
  p.taubar.resize(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) {
    p.tau[i] = rho.tau(i, 1);
    p.taubar[i] = rho.tau(i, rho.dim - 1);
  }
  return p;
}

PairSpectra single_spectra(const Ball& ball, const BallSpectra& rho) {
  PairSpectra p;
  p.radius = ball.radius;
  p.level_start = ball.level_start;
  p.tau.resize(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) p.tau[i] = rho.tau(i, 1);
  p.taubar = p.tau;
  return p;
}

std::vector<double> functional_values(const PairSpectra& p, const Functional2D& phi) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = phi(p.tau[i], p.taubar[i]);
  return v;
}

std::vector<double> max_values(const PairSpectra& p, double beta) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(beta * p.tau[i], p.taubar[i]);
  return v;
}

std::string to_string(ExponentMethod m) { return m == ExponentMethod::slope_fit ? "slope-fit" : "poincare-root"; }

ExponentMethod parse_method(const std::string& s) {
  if (s == "slope-fit" || s == "slope") return ExponentMethod::slope_fit;
  if (s == "poincare-root" || s == "poincare" || s == "root") return ExponentMethod::poincare_root;
  throw InputError("unknown exponent method '" + s + "'");
}

namespace {

void check_positivity(const std::vector<double>& values, const std::vector<std::size_t>& level_start) {
  const int N = static_cast<int>(level_start.size()) - 2;
  for (int n = std::max(1, N - 1); n <= N; ++n) {
    std::size_t bad = 0;
    for (std::size_t i = level_start[n]; i < level_start[n + 1]; ++i)
      if (!(values[i] > 0)) ++bad;
    if (bad > 0)
      throw PositivityError("functional is not positive: " + std::to_string(bad) + " elements of length " +
                            std::to_string(n) + " have value <= 0");
  }
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

double sphere_log_sum(const std::vector<double>& values, const std::vector<std::size_t>& ls, int n, double s) {
  if (ls[n] == ls[n + 1]) return -std::numeric_limits<double>::infinity();
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = ls[n]; i < ls[n + 1]; ++i) mn = std::min(mn, values[i]);
  double acc = 0;
  for (std::size_t i = ls[n]; i < ls[n + 1]; ++i) acc += std::exp(-s * (values[i] - mn));
  return std::log(acc) - s * mn;
}

}  // namespace

std::pair<double, double> poincare_root(const std::vector<double>& values, const std::vector<std::size_t>& ls,
                                        int top) {
  if (top < 3) throw InputError("poincare-root: need at least 4 sphere levels");
  auto f = [&](double s) {
    double hi = log_add(sphere_log_sum(values, ls, top, s), sphere_log_sum(values, ls, top - 1, s));
    double lo = log_add(sphere_log_sum(values, ls, top - 2, s), sphere_log_sum(values, ls, top - 3, s));
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw NumericError("poincare-root: empty sphere levels");
    return hi - lo;
  };
  double lo = 0, hi = 1;
  if (!(f(lo) > 0)) throw NumericError("poincare-root: spheres do not grow");
  int guard = 0;
  while (f(hi) > 0) {
    lo = hi;
    hi *= 2;
    if (++guard > 60) throw NumericError("poincare-root: no sign change in the ratio test");
  }
  for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return {lo, hi};
}

ExponentEstimate critical_exponent(const std::vector<double>& values, const std::vector<std::size_t>& level_start,
                                   const ExponentOptions& opts) {
  const int N = static_cast<int>(level_start.size()) - 2;
  if (N < 4) throw InputError("critical exponent: radius must be at least 4");
  check_positivity(values, level_start);
  ExponentEstimate est;
  est.method = opts.method;
  est.radius = N;

  std::vector<double> minima(static_cast<std::size_t>(N) + 1, std::numeric_limits<double>::infinity());
  for (int n = 0; n <= N; ++n)
    for (std::size_t i = level_start[n]; i < level_start[n + 1]; ++i) minima[n] = std::min(minima[n], values[i]);
  DominationOptions dopts = opts.domination;
  dopts.window_start = opts.domination_start >= 0 ? opts.domination_start : N / 2;
  if (N - dopts.window_start < dopts.min_span) dopts.window_start = std::max(0, N - dopts.min_span);
  DominationFit dom = domination_fit_minima(minima, 1, dopts);
  est.t_max = dom.mu * (N + 1) - dom.C;

  if (opts.method == ExponentMethod::poincare_root) {
    auto [lo, hi] = poincare_root(values, level_start, N);
    est.bracket_lo = lo;
    est.bracket_hi = hi;
    est.value = 0.5 * (lo + hi);
    if (N >= 5) {
      auto [lo1, hi1] = poincare_root(values, level_start, N - 1);
      est.residual = std::abs(est.value - 0.5 * (lo1 + hi1));
    }
    return est;
  }

  if (opts.window) {
    est.t0 = opts.window->first;
    est.t1 = opts.window->second;
  } else {
    if (!dom.verdict || est.t_max <= 0)
      throw PositivityError("functional is not dominated by word length at radius " + std::to_string(N));
    est.t0 = opts.window_lo * est.t_max;
    est.t1 = opts.window_hi * est.t_max;
  }
  const double rate = minima[N] / N;
  if (!(est.t1 > est.t0) || !(rate > 0) || (est.t1 - est.t0) / rate < opts.min_levels)
    throw InputError("critical exponent: window [" + format_double(est.t0) + ", " + format_double(est.t1) +
                     "] spans fewer than " + std::to_string(opts.min_levels) + " sphere levels");

  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const int G = std::max(3, opts.grid);
  std::vector<double> xs, ys;
  for (int j = 0; j < G; ++j) {
    double t = est.t0 + (est.t1 - est.t0) * j / (G - 1);
    auto cnt = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    if (cnt < 1) continue;
    xs.push_back(t);
    ys.push_back(std::log(cnt));
  }
  if (xs.size() < 3) throw InputError("critical exponent: window contains no elements");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0, sxy = 0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    sxx += (xs[j] - mx) * (xs[j] - mx);
    sxy += (xs[j] - mx) * (ys[j] - my);
  }
  est.value = sxy / sxx;
  double ssr = 0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    double r = ys[j] - (my + est.value * (xs[j] - mx));
    ssr += r * r;
  }
  est.residual = std::sqrt(ssr / (xs.size() - 2) / sxx);
  est.count = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), est.t1) -
                                       std::upper_bound(sorted.begin(), sorted.end(), est.t0));
  if (!(est.value > 0)) throw NumericError("critical exponent: non-positive slope");
  return est;
}

CrossValidatedExponent cross_validated_exponent(const std::vector<double>& values,
                                                const std::vector<std::size_t>& level_start,
                                                const ExponentOptions& opts) {
  CrossValidatedExponent out;
  ExponentOptions o = opts;
  o.method = ExponentMethod::slope_fit;
  out.slope = critical_exponent(values, level_start, o);
  o.method = ExponentMethod::poincare_root;
  out.root = critical_exponent(values, level_start, o);
  return out;
}

ExponentEstimate hinf(double beta, const PairSpectra& p, const ExponentOptions& opts) {
  if (!(beta > 0 && beta <= 1)) throw InputError("beta must lie in (0, 1]");
  return critical_exponent(max_values(p, beta), p.level_start, opts);
}

ExponentEstimate hilbert_entropy(const Ball& ball, const BallSpectra& rho, const ExponentOptions& opts) {
  if (rho.dim != 3) throw InputError("Hilbert entropy needs a 3-dimensional representation");
  std::vector<double> v(ball.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (rho.a(i)[0] - rho.a(i)[2]);
  return critical_exponent(v, ball.level_start, opts);
}

QCurvePoint QCurveSampler::point(double theta) const {
  QCurvePoint q;
  q.theta = theta;
  Functional2D phi{std::cos(theta), std::sin(theta)};
  try {
    std::vector<double> v = functional_values(p_, phi);
    q.h_raw = critical_exponent(v, p_.level_start, opts_).value;
    for (double& x : v) x *= q.h_raw;
    q.h_scaled = critical_exponent(v, p_.level_start, opts_).value;
    q.s = q.h_raw * phi.s;
    q.u = q.h_raw * phi.u;
  } catch (const PositivityError& e) {
    q.ok = false;
    q.reason = e.what();
  }
  return q;
}

std::vector<double> default_angles(int count) {
  std::vector<double> a;
  for (int i = 0; i < count; ++i) a.push_back(M_PI / 2 * i / (count - 1));
  return a;
}

namespace {

void set_tangent(QCurvePoint& q, double ds, double du) {
  double n = std::hypot(ds, du);
  if (n == 0) return;
  q.tangent_s = ds / n;
  q.tangent_u = du / n;
  q.normal_s = q.tangent_u;
  q.normal_u = -q.tangent_s;
  if (q.normal_s * q.s + q.normal_u * q.u < 0) {
    q.normal_s = -q.normal_s;
    q.normal_u = -q.normal_u;
  }
}

}  // namespace

std::vector<QCurvePoint> qcurve(const QCurveSampler& sampler, const std::vector<double>& angles) {
  std::vector<QCurvePoint> pts;
  for (double th : angles) pts.push_back(sampler.point(th));
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].ok) good.push_back(i);
  for (std::size_t j = 0; j < good.size() && good.size() >= 2; ++j) {
    const QCurvePoint& a = pts[good[j == 0 ? 0 : j - 1]];
    const QCurvePoint& b = pts[good[j + 1 == good.size() ? j : j + 1]];
    set_tangent(pts[good[j]], b.s - a.s, b.u - a.u);
  }
  return pts;
}

QCurveShape qcurve_shape(const std::vector<QCurvePoint>& pts) {
  QCurveShape sh;
  std::vector<const QCurvePoint*> g;
  for (const auto& p : pts)
    if (p.ok) g.push_back(&p);
  sh.max_cross = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    double e1s = g[i]->s - g[i - 1]->s, e1u = g[i]->u - g[i - 1]->u;
    double e2s = g[i + 1]->s - g[i]->s, e2u = g[i + 1]->u - g[i]->u;
    sh.max_cross = std::max(sh.max_cross, e1s * e2u - e1u * e2s);
  }
  if (g.size() < 3) sh.max_cross = 0;
  for (const auto* p : g)
    for (const auto* q : g)
      if (std::abs(p->theta + q->theta - M_PI / 2) < 1e-9)
        sh.symmetry_deviation = std::max(sh.symmetry_deviation, std::hypot(p->s - q->u, p->u - q->s));
  return sh;
}

PhiInfinity phi_infinity(const QCurveSampler& sampler, double beta, const std::vector<double>& angles) {
  if (!(beta > 0 && beta <= 1)) throw InputError("beta must lie in (0, 1]");
  std::vector<QCurvePoint> pts;
  for (double th : angles) {
    QCurvePoint q = sampler.point(th);
    if (q.ok) pts.push_back(q);
  }
  if (pts.size() < 8) throw InputError("phi_infinity needs at least 8 valid Q-curve points");
  auto norm = [&](const QCurvePoint& q) { return std::abs(q.s) / beta + std::abs(q.u); };
  std::size_t imin = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (norm(pts[i]) < norm(pts[imin])) imin = i;
  const double fmin = norm(pts[imin]);
  const double tie = 1e-9 * fmin + 1e-12;
  std::size_t first = pts.size(), last = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (norm(pts[i]) <= fmin + tie) {
      first = std::min(first, i);
      last = std::max(last, i);
    }

  PhiInfinity out;
  QCurvePoint best;
  double lo_th, hi_th;
  if (last > first) {
    best = sampler.point(0.5 * (pts[first].theta + pts[last].theta));
    lo_th = pts[first].theta;
    hi_th = pts[last].theta;
  } else if (imin == 0 || imin + 1 == pts.size()) {
    best = pts[imin];
    out.inconclusive = true;
    out.reason = "minimizer at an endpoint of the sampled arc";
    lo_th = pts[imin == 0 ? 0 : imin - 1].theta;
    hi_th = pts[imin == 0 ? 1 : imin].theta;
  } else {
    double a = pts[imin - 1].theta, b = pts[imin + 1].theta;
    lo_th = a;
    hi_th = b;
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    QCurvePoint qc = sampler.point(c), qd = sampler.point(d);
    auto val = [&](const QCurvePoint& q) { return q.ok ? norm(q) : std::numeric_limits<double>::infinity(); };
    for (int it = 0; it < 40 && b - a > 1e-7; ++it) {
      if (val(qc) < val(qd)) {
        b = d;
        d = c;
        qd = qc;
        c = b - gr * (b - a);
        qc = sampler.point(c);
      } else {
        a = c;
        c = d;
        qc = qd;
        d = a + gr * (b - a);
        qd = sampler.point(d);
      }
    }
    best = val(qc) < val(qd) ? qc : qd;
    if (val(pts[imin]) < val(best)) best = pts[imin];
  }
  out.s = best.s;
  out.u = best.u;
  out.theta = best.theta;
  out.norm = norm(best);
  double delta = 0.5 * std::max(1e-3, std::min(best.theta - lo_th, hi_th - best.theta));
  if (!(delta > 0)) delta = 1e-2;
  QCurvePoint l = sampler.point(best.theta - delta), r = sampler.point(best.theta + delta);
  if (l.ok && r.ok) {
    QCurvePoint t = best;
    set_tangent(t, r.s - l.s, r.u - l.u);
    out.tangent_s = t.tangent_s;
    out.tangent_u = t.tangent_u;
  }
  return out;
}

ClassSpectra class_spectra(const Group& g, const Representation& rho, const Representation& rhobar, int n) {
  ClassSpectra cs;
  cs.words = g.conjugacy_reps(n);
  for (const Word& w : cs.words) {
    Vector l = spectrum_of(rho, w).jordan;
    Vector lb = spectrum_of(rhobar, w).jordan;
    cs.tau.push_back(l(0) - l(1));
    cs.taubar.push_back(lb(0) - lb(1));
  }
  return cs;
}

IntersectionEstimate intersection(const std::vector<double>& tau, const std::vector<double>& taubar, double t) {
  IntersectionEstimate est;
  est.t = t;
  double acc = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!(tau[i] > 0) || tau[i] > t) continue;
    acc += taubar[i] / tau[i];
    ++est.count;
  }
  if (est.count == 0) throw InputError("intersection: no classes with period <= " + format_double(t));
  est.value = acc / static_cast<double>(est.count);
  return est;
}

void require_not_isospectral(double max_deviation, double tol) {
  if (max_deviation < 10 * tol) throw GapIsospectralError(max_deviation);
}

bool TheoremBReport::all_pass() const {
  for (const auto& c : checks)
    if (c.evaluated && !c.pass) return false;
  return true;
}

std::string TheoremBReport::text() const {
  std::ostringstream os;
  os << "beta: " << format_double(beta) << "\n";
  os << "gap-isospectral deviation: " << format_double(isospectral_deviation) << "\n";
  for (const auto& v : values)
    if (v.available) os << v.name << " = " << format_double(v.value) << " +- " << format_double(v.err) << "\n";
  for (const auto& c : checks) {
    os << c.relation << ": ";
    if (!c.evaluated) {
      os << "not evaluated\n";
      continue;
    }
    os << (c.pass ? "PASS" : "FAIL") << " (lhs " << format_double(c.lhs) << ", rhs " << format_double(c.rhs)
       << ", margin " << format_double(c.margin()) << ", tol " << format_double(c.tol) << ")\n";
  }
  os << "finite-depth estimates; inequalities certified as <= within tolerance only\n";
  return os.str();
}

TheoremBReport theoremB_report(const TheoremBInputs& in, double beta, double isospectral_deviation, double iso_tol) {
  if (!(beta > 0 && beta <= 1)) throw InputError("beta must lie in (0, 1]");
  require_not_isospectral(isospectral_deviation, iso_tol);
  TheoremBReport r;
  r.beta = beta;
  r.isospectral_deviation = isospectral_deviation;
  auto val = [](const std::string& name, const CrossValidatedExponent& e) {
    return ChainValue{name, e.value(), e.uncertainty(), true};
  };
  ChainValue ht = val("h_tau", in.h_tau), hb = val("h_taubar", in.h_taubar), hi = val("h_inf", in.h_inf);
  ChainValue bhi{"beta*h_inf", beta * hi.value, beta * hi.err, true};
  ChainValue upper = hi.value <= beta * hi.value + 1 - beta ? ChainValue{"min{h_inf, beta*h_inf+1-beta}", hi.value, hi.err, true}
                                                            : ChainValue{"min{h_inf, beta*h_inf+1-beta}", beta * hi.value + 1 - beta, beta * hi.err, true};
  ChainValue mn = hb.value <= ht.value / beta ? ChainValue{"min{h_taubar, h_tau/beta}", hb.value, hb.err, true}
                                              : ChainValue{"min{h_taubar, h_tau/beta}", ht.value / beta, ht.err / beta, true};
  ChainValue mx = ht.value >= hb.value ? ChainValue{"max{h_tau, h_taubar}", ht.value, ht.err, true}
                                       : ChainValue{"max{h_tau, h_taubar}", hb.value, hb.err, true};
  ChainValue ext = in.ext_dim.value_or(ChainValue{"Hff(Ext)", 0, 0, false});
  ChainValue curve = in.curve_dim.value_or(ChainValue{"Hff(Xi)", 0, 0, false});
  r.values = {ht, hb, hi, bhi, upper, mn, mx, ext, curve};
  if (in.h_hilbert) r.values.push_back(*in.h_hilbert);

  auto le = [&](const ChainValue& a, const ChainValue& b) {
    ChainCheck c;
    c.relation = a.name + " <= " + b.name;
    c.evaluated = a.available && b.available;
    c.lhs = a.value;
    c.rhs = b.value;
    c.tol = a.err + b.err;
    c.pass = c.evaluated && a.value <= b.value + c.tol;
    return c;
  };
  r.checks.push_back(le(bhi, ext));
  r.checks.push_back(le(ext, upper));
  r.checks.push_back(le(upper, mn));
  r.checks.push_back(le(hi, mn));
  r.checks.push_back(le(mn, curve));
  ChainCheck eq = le(curve, mx);
  eq.relation = curve.name + " = " + mx.name;
  eq.pass = eq.evaluated && std::abs(curve.value - mx.value) <= eq.tol;
  r.checks.push_back(eq);
  if (in.h_hilbert) r.checks.push_back(le(*in.h_hilbert, ChainValue{"1", 1.0, 0.0, true}));
  return r;
}

void write_chain_csv(std::ostream& os, const TheoremBReport& r) {
  CsvWriter w(os, {"relation", "lhs", "rhs", "margin", "tol", "evaluated", "pass"});
  for (const auto& c : r.checks) {
    w.cell(c.relation).cell(c.lhs).cell(c.rhs).cell(c.margin()).cell(c.tol);
    w.cell(std::string(c.evaluated ? "1" : "0")).cell(std::string(c.pass ? "1" : "0"));
    w.end_row();
  }
}

}  // namespace alab
