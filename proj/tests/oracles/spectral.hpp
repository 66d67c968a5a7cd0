#pragma once
// Cartan projection from the eigenvalues of g g^T and g^-1 g^-T, computed from the plain
// long double product (no renormalization).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "anosov_lab/replin.hpp"

namespace oracle {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

inline LMatrix product(const alab::Representation& rho, const alab::Word& w, bool inverse = false) {
  const alab::Presentation& p = rho.presentation();
  LMatrix m = LMatrix::Identity(rho.dim(), rho.dim());
  if (!inverse) {
    for (auto s : w.letters) m = m * rho.matrix(s).cast<long double>();
  } else {
    for (std::size_t i = w.size(); i-- > 0;) m = m * rho.matrix(p.inverse[w[i]]).cast<long double>();
  }
  return m;
}

inline std::vector<long double> log_sv_desc(const LMatrix& m) {
  Eigen::SelfAdjointEigenSolver<LMatrix> es(m * m.transpose());
  std::vector<long double> v;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) v.push_back(0.5L * std::log(std::abs(es.eigenvalues()(i))));
  std::sort(v.rbegin(), v.rend());
  return v;
}

// Largest half from g, smallest half from g^-1 (as minus its largest), middle (odd d) from
// log|det g|, which is summed over the letters.
inline std::vector<double> cartan(const alab::Representation& rho, const alab::Word& w) {
  const int d = rho.dim();
  auto top = log_sv_desc(product(rho, w));
  auto bot = log_sv_desc(product(rho, w, true));
  long double logdet = 0;
  for (auto s : w.letters) logdet += std::log(std::abs(rho.matrix(s).cast<long double>().determinant()));
  std::vector<long double> a(static_cast<std::size_t>(d));
  long double known = 0;
  for (int i = 0; i < d / 2; ++i) {
    a[static_cast<std::size_t>(i)] = top[static_cast<std::size_t>(i)];
    a[static_cast<std::size_t>(d - 1 - i)] = -bot[static_cast<std::size_t>(i)];
    known += a[static_cast<std::size_t>(i)] + a[static_cast<std::size_t>(d - 1 - i)];
  }
  if (d % 2 == 1) a[static_cast<std::size_t>(d / 2)] = logdet - known;
  const long double mean = logdet / d;
  std::vector<double> out;
  for (auto x : a) out.push_back(static_cast<double>(x - mean));
  return out;
}

}  // namespace oracle
