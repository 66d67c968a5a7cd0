#include "anosov_lab/chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alab {

Eigen::VectorXd AffineChart::coords(const Eigen::VectorXd& x) const {
  double t = x.dot(normal);
  return basis.transpose() * (x / t);
}

namespace {

double chart_margin(const std::vector<Eigen::VectorXd>& pts, const Eigen::VectorXd& n) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) m = std::min(m, std::abs(p.dot(n)));
  return m;
}

}  // namespace

AffineChart best_affine_chart(const std::vector<Eigen::VectorXd>& pts, int variant) {
  if (pts.empty()) throw InputError("affine chart of an empty point set");
  const auto d = pts[0].size();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (const auto& p : pts) S += p * p.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  Eigen::VectorXd n = es.eigenvectors().col(d - 1);
  double best = chart_margin(pts, n);
  // subgradient ascent on the margin: push n toward the worst point (sign-aligned)
  double step = 0.1;
  for (int it = 0; it < 200; ++it) {
    std::size_t worst = 0;
    double wv = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double v = std::abs(pts[i].dot(n));
      if (v < wv) wv = v, worst = i;
    }
    double sgn = pts[worst].dot(n) >= 0 ? 1.0 : -1.0;
    Eigen::VectorXd cand = (n + step * sgn * pts[worst]).normalized();
    double m = chart_margin(pts, cand);
    if (m > best) {
      n = cand;
      best = m;
    } else {
      step *= 0.5;
      if (step < 1e-6) break;
    }
  }
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(d, d);
  Q.col(0) = n;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
  Eigen::MatrixXd full = qr.householderQ();
  if (variant > 0 && d > 1) {
    int j = 1 + (variant - 1) % static_cast<int>(d - 1);
    double ang = 0.15 * variant;
    Eigen::VectorXd tilted = (std::cos(ang) * full.col(0) + std::sin(ang) * full.col(j)).normalized();
    if (chart_margin(pts, tilted) > 0.05 * best) n = tilted;
    Q.col(0) = n;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr2(Q);
    full = qr2.householderQ();
  }
  AffineChart c;
  c.normal = full.col(0);
  c.basis = full.rightCols(d - 1);
  c.margin = chart_margin(pts, c.normal);
  return c;
}

}  // namespace alab
