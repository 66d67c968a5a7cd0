#include "anosov_lab/catalog.hpp"

#include <cmath>
#include <regex>

#include "anosov_lab/tiling.hpp"

namespace alab {

Matrix adjoint_preimage(const Matrix& A) {
  using M2 = Eigen::Matrix2d;
  M2 X[3];
  X[0] << 1, 0, 0, -1;
  X[1] << 0, 1, 1, 0;
  X[2] << 0, 1, -1, 0;
  // g X_j - (sum_i A_ij X_i) g = 0, linear in the entries of g
  Eigen::Matrix<double, 12, 4> L = Eigen::Matrix<double, 12, 4>::Zero();
  for (int j = 0; j < 3; ++j) {
    M2 Y = A(0, j) * X[0] + A(1, j) * X[1] + A(2, j) * X[2];
    for (int e = 0; e < 4; ++e) {
      M2 E = M2::Zero();
      E(e / 2, e % 2) = 1;
      M2 r = E * X[j] - Y * E;
      for (int k = 0; k < 4; ++k) L(4 * j + k, e) = r(k / 2, k % 2);
    }
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 12, 4>> svd(L, Eigen::ComputeFullV);
  Eigen::Vector4d v = svd.matrixV().col(3);
  Matrix g(2, 2);
  g << v(0), v(1), v(2), v(3);
  double det = g.determinant();
  if (det < 0) throw NumericError("adjoint preimage: matrix is not in the identity component");
  g /= std::sqrt(det);
  return g;
}

Representation fuchsian_surface_sl2(int genus) {
  Presentation p = surface_presentation(genus);
  TilingModel tm(p);
  std::vector<Matrix> mats;
  for (const auto& G : tm.generators<double>()) {
    Matrix A(3, 3);
    for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = G[static_cast<std::size_t>(i)];
    mats.push_back(adjoint_preimage(A));
  }
  // make the inverse letters exact inverses of their partners
  for (std::size_t s = 0; s < mats.size(); s += 2) {
    Matrix& g = mats[s];
    Matrix& h = mats[s + 1];
    if ((g * h + Matrix::Identity(2, 2)).norm() < 1e-6) h = -h;
    h = g.inverse();
  }
  return Representation(p, std::move(mats), "fuchsian-g" + std::to_string(genus) + "-sl2");
}

Representation fuchsian_twist_sl2(int genus, double s) {
  Representation base = fuchsian_surface_sl2(genus);
  std::vector<Matrix> mats = base.matrices();
  // a1^s through the eigendecomposition; a1 is hyperbolic with positive trace or its negative.
  const Matrix& a = mats[0];
  const double sign = a.trace() < 0 ? -1.0 : 1.0;
  Eigen::EigenSolver<Matrix> es(sign * a);
  Eigen::Matrix2cd V = es.eigenvectors();
  Eigen::Vector2cd lam = es.eigenvalues();
  Eigen::Matrix2cd D = Eigen::Matrix2cd::Zero();
  for (int i = 0; i < 2; ++i) D(i, i) = std::exp(s * std::log(lam(i).real()));
  Matrix power = (V * D * V.inverse()).real();
  // b1 -> b1 a1^s keeps [a1, b1] since a1^s commutes with a1
  mats[2] = mats[2] * power;
  mats[3] = mats[2].inverse();
  char buf[64];
  std::snprintf(buf, sizeof buf, "fuchsian-g%d-twist(%g)-sl2", genus, s);
  return Representation(base.presentation(), std::move(mats), buf);
}

Representation triangle_vinberg(int p, int q, int r, double t) {
  Presentation pres = triangle_presentation(p, q, r);
  auto cartan = [&](double tt) {
    Eigen::Matrix3d A;
    const double c12 = -2 * std::cos(M_PI / p), c23 = -2 * std::cos(M_PI / q), c31 = -2 * std::cos(M_PI / r);
    A << 2, c12 * std::exp(tt), c31,
         c12 * std::exp(-tt), 2, c23,
         c31, c23, 2;
    return A;
  };
  // Frame: B = A_0 is the invariant form at t = 0; write B = P^T J P, then boost the incenter
  // to (0,0,1).
  Eigen::Matrix3d B = cartan(0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(B);
  Eigen::Vector3d d = es.eigenvalues();  // ascending; exactly one negative for hyperbolic triangles
  Eigen::Matrix3d U = es.eigenvectors();
  Eigen::Matrix3d P;
  P.row(0) = std::sqrt(d(1)) * U.col(1).transpose();
  P.row(1) = std::sqrt(d(2)) * U.col(2).transpose();
  P.row(2) = std::sqrt(-d(0)) * U.col(0).transpose();
  const Eigen::Matrix3d J = Eigen::Vector3d(1, 1, -1).asDiagonal();
  Eigen::Vector3d x = P * B.inverse() * Eigen::Vector3d::Ones();
  double nrm = std::sqrt(-(x.transpose() * J * x)(0));
  x /= nrm;
  if (x(2) < 0) x = -x;
  Eigen::Vector2d u = x.head<2>();
  double gam = x(2);
  Eigen::Matrix3d L;
  L.topLeftCorner<2, 2>() = Eigen::Matrix2d::Identity() + u * u.transpose() / (1 + gam);
  L.topRightCorner<2, 1>() = u;
  L.bottomLeftCorner<1, 2>() = u.transpose();
  L(2, 2) = gam;
  Eigen::Matrix3d C = (J * L.transpose() * J) * P;  // L^{-1} P
  Eigen::Matrix3d Cinv = C.inverse();

  Eigen::Matrix3d A = cartan(t);
  std::vector<Matrix> mats;
  for (int i = 0; i < 3; ++i) {
    Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
    s.row(i) -= A.row(i);
    mats.push_back(Matrix(C * s * Cinv));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "triangle-%d%d%d-vinberg(%g)", p, q, r, t);
  return Representation(pres, std::move(mats), buf);
}

Representation f2_schottky_sl2() {
  Presentation p = free_presentation(2);
  Matrix a(2, 2), m(2, 2);
  a << std::exp(2.0), 0, 0, std::exp(-2.0);
  m << 4, 1, 1, 1;
  m /= std::sqrt(3.0);
  Matrix b = m * a * m.inverse();
  return Representation(p, {a, a.inverse(), b, b.inverse()}, "f2-schottky-sl2");
}

namespace {

const std::regex kFuchsian(R"(fuchsian-g(\d+)(-twist\(([-+0-9.eE]+)\))?-(sym2|sl2))");
const std::regex kVinberg(R"(triangle-(\d)(\d)(\d)-vinberg(\(([-+0-9.eE]+)\))?)");

}  // namespace

bool is_catalog_name(const std::string& name) {
  return std::regex_match(name, kFuchsian) || std::regex_match(name, kVinberg) || name == "f2-schottky" ||
         name == "f2-schottky-sl2";
}

Representation catalog_representation(const std::string& name) {
  std::smatch m;
  if (std::regex_match(name, m, kFuchsian)) {
    const int genus = std::stoi(m[1]);
    Representation r2 = m[3].matched ? fuchsian_twist_sl2(genus, std::stod(m[3])) : fuchsian_surface_sl2(genus);
    if (m[4] == "sl2") return Representation(r2.presentation(), r2.matrices(), name);
    Representation r3 = sym2_lift(r2);
    return Representation(r3.presentation(), r3.matrices(), name);
  }
  if (std::regex_match(name, m, kVinberg)) {
    double t = m[5].matched ? std::stod(m[5]) : 0.0;
    Representation r = triangle_vinberg(std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3]), t);
    return Representation(r.presentation(), r.matrices(), name);
  }
  if (name == "f2-schottky-sl2") return f2_schottky_sl2();
  if (name == "f2-schottky") {
    Representation r3 = sym2_lift(f2_schottky_sl2());
    return Representation(r3.presentation(), r3.matrices(), name);
  }
  throw InputError("unknown catalog representation '" + name + "'");
}

std::vector<std::string> catalog_names() {
  return {"fuchsian-g2-sym2",          "fuchsian-g2-sl2", "fuchsian-g2-twist(s)-sym2", "triangle-334-vinberg(t)",
          "f2-schottky", "f2-schottky-sl2"};
}

}  // namespace alab
