#include "anosov_lab/replin.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "anosov_lab/io.hpp"
#include "anosov_lab/parallel.hpp"

namespace alab {

namespace {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

double relator_residual(const Representation& rho, const Word& r) {
  const int d = rho.dim();
  LMatrix prod = LMatrix::Identity(d, d);
  for (Letter l : r.letters) prod = prod * rho.matrix(l).cast<long double>();
  LMatrix id = LMatrix::Identity(d, d);
  long double plus = (prod - id).cwiseAbs().maxCoeff();
  long double minus = (prod + id).cwiseAbs().maxCoeff();
  return static_cast<double>(std::min(plus, minus));
}

}  // namespace

Representation::Representation(Presentation p, std::vector<Matrix> matrices, std::string name, bool validate)
    : pres_(std::move(p)), mats_(std::move(matrices)), name_(std::move(name)) {
  if (mats_.size() != pres_.generator_count())
    throw InputError("representation '" + name_ + "' needs one matrix per generator");
  dim_ = static_cast<int>(mats_.front().rows());
  if (dim_ < 1 || dim_ > kMaxDim) throw InputError("representation dimension must be in [1, 4]");
  for (const auto& m : mats_)
    if (m.rows() != dim_ || m.cols() != dim_) throw InputError("representation '" + name_ + "': inconsistent matrix sizes");
  if (validate) {
    RepresentationCheck c = check();
    if (!c.ok()) {
      std::ostringstream os;
      os << "representation '" << name_ << "' fails relation checks: inverse error " << c.inverse_error
         << ", det error " << c.det_error << ", relator error " << c.relator_error;
      throw InputError(os.str());
    }
  }
}

RepresentationCheck Representation::check() const {
  RepresentationCheck c;
  const Matrix id = Matrix::Identity(dim_, dim_);
  for (std::size_t s = 0; s < mats_.size(); ++s) {
    c.inverse_error = std::max(c.inverse_error, (mats_[s] * mats_[pres_.inverse[s]] - id).cwiseAbs().maxCoeff());
    c.det_error = std::max(c.det_error, std::abs(std::abs(mats_[s].determinant()) - 1.0));
  }
  for (const Word& r : pres_.relators) c.relator_error = std::max(c.relator_error, relator_residual(*this, r));
  return c;
}

std::string Representation::to_text() const {
  std::ostringstream os;
  os << "dim " << dim_ << "\nfield R\npresentation " << pres_.label() << "\n";
  for (std::size_t s = 0; s < mats_.size(); ++s) {
    os << pres_.names[s];
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) os << ' ' << format_double(mats_[s](i, j));
    os << '\n';
  }
  return os.str();
}

RepresentationDocument parse_representation_document(std::string_view text) {
  RepresentationDocument doc;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "dim") {
      if (!(ls >> doc.dim) || doc.dim < 1 || doc.dim > kMaxDim) throw InputError("malformed representation: bad dim");
    } else if (key == "field") {
      ls >> doc.field;
      if (doc.field != "R") throw InputError("unsupported field '" + doc.field + "' (only R)");
    } else if (key == "presentation") {
      std::string rest;
      std::getline(ls, rest);
      auto b = rest.find_first_not_of(" \t");
      doc.presentation_ref = b == std::string::npos ? std::string() : rest.substr(b);
    } else {
      if (doc.dim == 0) throw InputError("malformed representation: generator row before `dim`");
      Matrix m(doc.dim, doc.dim);
      for (int i = 0; i < doc.dim; ++i)
        for (int j = 0; j < doc.dim; ++j) {
          std::string tok;
          if (!(ls >> tok)) throw InputError("malformed representation: row '" + key + "' has too few entries");
          try {
            m(i, j) = std::stod(tok);
          } catch (const std::exception&) {
            throw InputError("malformed representation: bad number '" + tok + "'");
          }
        }
      std::string extra;
      if (ls >> extra) throw InputError("malformed representation: row '" + key + "' has too many entries");
      doc.rows.emplace_back(key, m);
    }
  }
  if (doc.dim == 0) throw InputError("malformed representation: missing `dim`");
  return doc;
}

Representation representation_from_document(const RepresentationDocument& doc, const Presentation& p,
                                             const std::string& name) {
  std::vector<std::optional<Matrix>> mats(p.generator_count());
  for (const auto& [gen, m] : doc.rows) {
    auto it = std::find(p.names.begin(), p.names.end(), gen);
    if (it == p.names.end()) throw InputError("representation row for unknown generator '" + gen + "'");
    mats[static_cast<std::size_t>(it - p.names.begin())] = m;
  }
  std::vector<Matrix> out(p.generator_count());
  for (std::size_t s = 0; s < mats.size(); ++s) {
    if (mats[s]) {
      out[s] = *mats[s];
    } else if (mats[p.inverse[s]]) {
      out[s] = mats[p.inverse[s]]->inverse();
    } else {
      throw InputError("representation is missing generator '" + p.names[s] + "'");
    }
  }
  return Representation(p, std::move(out), name);
}

// ---------------------------------------------------------------------------------------------

NormalizedMatrix identity_normalized(int d) {
  NormalizedMatrix nm;
  nm.m = Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d));
  nm.log_scale = 0.5 * std::log(static_cast<double>(d));
  return nm;
}

void renormalize(NormalizedMatrix& nm, const std::string& context) {
  double f = nm.m.norm();
  if (!std::isfinite(f) || f == 0.0)
    throw NumericError("non-finite or vanishing product" + (context.empty() ? std::string() : " for word " + context));
  nm.m /= f;
  nm.log_scale += std::log(f);
}

NormalizedMatrix multiply(const NormalizedMatrix& a, const NormalizedMatrix& b) {
  NormalizedMatrix c{a.m * b.m, a.log_scale + b.log_scale};
  renormalize(c);
  return c;
}

namespace {

NormalizedMatrix evaluate_extended(const Representation& rho, const Word& w, bool inverse) {
  const int d = rho.dim();
  using QM = std::vector<quad>;
  QM acc(static_cast<std::size_t>(d * d), 0);
  for (int i = 0; i < d; ++i) acc[static_cast<std::size_t>(i * d + i)] = 1;
  double log_scale = 0;
  const Presentation& p = rho.presentation();
  auto step = [&](Letter l) {
    const Matrix& g = rho.matrix(l);
    QM next(acc.size(), 0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        quad s = 0;
        for (int k = 0; k < d; ++k)
          s += inverse ? static_cast<quad>(g(i, k)) * acc[static_cast<std::size_t>(k * d + j)]
                       : acc[static_cast<std::size_t>(i * d + k)] * static_cast<quad>(g(k, j));
        next[static_cast<std::size_t>(i * d + j)] = s;
      }
    quad f = 0;
    for (quad v : next) f += v * v;
    f = sqrtq(f);
    for (quad& v : next) v /= f;
    log_scale += static_cast<double>(logq(f));
    acc = next;
  };
  for (Letter l : w.letters) step(inverse ? p.inverse[l] : l);
  NormalizedMatrix nm;
  nm.m.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) nm.m(i, j) = static_cast<double>(acc[static_cast<std::size_t>(i * d + j)]);
  nm.log_scale = log_scale;
  renormalize(nm, p.format_word(w));
  return nm;
}

}  // namespace

NormalizedMatrix evaluate(const Representation& rho, const Word& w, EvalPrecision prec) {
  if (prec == EvalPrecision::extended) return evaluate_extended(rho, w, false);
  NormalizedMatrix nm = identity_normalized(rho.dim());
  for (Letter l : w.letters) {
    nm.m = nm.m * rho.matrix(l);
    double f = nm.m.norm();
    if (!std::isfinite(f) || f == 0.0)
      throw NumericError("non-finite product for word " + rho.presentation().format_word(w));
    nm.m /= f;
    nm.log_scale += std::log(f);
  }
  return nm;
}

NormalizedMatrix evaluate_inverse(const Representation& rho, const Word& w, EvalPrecision prec) {
  if (prec == EvalPrecision::extended) return evaluate_extended(rho, w, true);
  // rho(w)^{-1} = rho(w_n^{-1}) ... rho(w_1^{-1}); accumulate by left multiplication
  NormalizedMatrix nm = identity_normalized(rho.dim());
  const Presentation& p = rho.presentation();
  for (Letter l : w.letters) {
    nm.m = rho.matrix(p.inverse[l]) * nm.m;
    double f = nm.m.norm();
    if (!std::isfinite(f) || f == 0.0) throw NumericError("non-finite product for word " + p.format_word(w));
    nm.m /= f;
    nm.log_scale += std::log(f);
  }
  return nm;
}

// ---------------------------------------------------------------------------------------------
// Spectra

namespace {

// Largest k log singular values of m (without log_scale), descending.
void top_log_singular(const Matrix& m, int k, double* out) {
  const auto d = m.rows();
  if (k == 1 && d == 2) {
    double f = m.squaredNorm();
    double det = m.determinant();
    double disc = std::sqrt(std::max(0.0, f * f - 4 * det * det));
    out[0] = 0.5 * std::log(0.5 * (f + disc));
    return;
  }
  if (k == 1 && d == 3) {
    Eigen::Matrix3d a = (m.transpose() * m);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.computeDirect(a, Eigen::EigenvaluesOnly);
    out[0] = 0.5 * std::log(es.eigenvalues()(2));
    return;
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  for (int i = 0; i < k; ++i) out[i] = std::log(svd.singularValues()(i));
}

void top_log_moduli(const Matrix& m, int k, double* out) {
  const auto d = m.rows();
  if (d == 1) {
    out[0] = std::log(std::abs(m(0, 0)));
    return;
  }
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue iteration did not converge");
  std::vector<double> mod;
  for (int i = 0; i < d; ++i) mod.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mod.begin(), mod.end(), std::greater<>());
  for (int i = 0; i < k; ++i) out[i] = std::log(mod[static_cast<std::size_t>(i)]);
}

NormalizedMatrix numeric_inverse(const NormalizedMatrix& m) {
  NormalizedMatrix inv{m.m.inverse(), -m.log_scale};
  renormalize(inv);
  return inv;
}

template <class TopFn>
Vector projection(const NormalizedMatrix& m, const NormalizedMatrix* inverse, TopFn top) {
  const int d = m.dim();
  Vector out(d);
  if (d == 1) {
    out(0) = 0;
    return out;
  }
  NormalizedMatrix tmp;
  if (!inverse) {
    tmp = numeric_inverse(m);
    inverse = &tmp;
  }
  const int h = d / 2;
  double buf[kMaxDim];
  top(m.m, h, buf);
  for (int i = 0; i < h; ++i) out(i) = buf[i] + m.log_scale;
  top(inverse->m, h, buf);
  for (int i = 0; i < h; ++i) out(d - 1 - i) = -(buf[i] + inverse->log_scale);
  if (d % 2 == 1) {
    double s = 0;
    for (int i = 0; i < d; ++i)
      if (i != h) s += out(i);
    out(h) = -s;
  }
  out.array() -= out.mean();
  // guard the ordering against rounding in near-degenerate cases
  std::sort(out.data(), out.data() + d, std::greater<>());
  return out;
}

}  // namespace

Vector cartan_projection(const NormalizedMatrix& m, const NormalizedMatrix* inverse) {
  Vector a = projection(m, inverse, top_log_singular);
  if (!a.allFinite()) throw NumericError("singular values not finite");
  return a;
}

Vector jordan_projection(const NormalizedMatrix& m, const NormalizedMatrix* inverse) {
  Vector l = projection(m, inverse, top_log_moduli);
  if (!l.allFinite()) throw NumericError("eigenvalue moduli not finite");
  return l;
}

Vector root_gaps(const Vector& v) {
  Vector g(std::max<Eigen::Index>(v.size() - 1, 0));
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) g(i) = v(i) - v(i + 1);
  return g;
}

SpectrumSample spectral(const NormalizedMatrix& m, const NormalizedMatrix* inverse) {
  SpectrumSample s;
  s.cartan = cartan_projection(m, inverse);
  s.jordan = jordan_projection(m, inverse);
  return s;
}

SpectrumSample spectrum_of(const Representation& rho, const Word& w) {
  NormalizedMatrix f = evaluate(rho, w), b = evaluate_inverse(rho, w);
  SpectrumSample s = spectral(f, &b);
  // eigenvalues of a conjugate computed from the long product lose ~ eps |g|^2
  Word c = rho.presentation().cyclic_free_reduce(w);
  if (c.size() < w.size()) {
    NormalizedMatrix cf = evaluate(rho, c), cb = evaluate_inverse(rho, c);
    s.jordan = jordan_projection(cf, &cb);
  }
  s.word = w;
  s.length = static_cast<int>(w.size());
  return s;
}

// ---------------------------------------------------------------------------------------------
// Projective geometry

ProjectivePoint make_projective(const Vector& v) {
  ProjectivePoint p{v.normalized()};
  double dot = 0, w = 1.0;
  for (Eigen::Index i = 0; i < p.v.size(); ++i, w *= 0.61803398874989) dot += w * p.v(i);
  if (std::abs(dot) < 1e-12) {
    for (Eigen::Index i = 0; i < p.v.size(); ++i)
      if (std::abs(p.v(i)) > 1e-12) {
        dot = p.v(i);
        break;
      }
  }
  if (dot < 0) p.v = -p.v;
  return p;
}

namespace {

Eigen::JacobiSVD<Matrix> full_svd(const NormalizedMatrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd;
}

double top_gap(const Eigen::JacobiSVD<Matrix>& svd) {
  const auto& s = svd.singularValues();
  if (s.size() < 2) return 0;
  if (s(1) <= 0) return std::numeric_limits<double>::infinity();
  return std::log(s(0)) - std::log(s(1));
}

}  // namespace

ProjectivePoint cartan_attractor(const NormalizedMatrix& m, double gap_tol) {
  auto svd = full_svd(m);
  double gap = top_gap(svd);
  if (!(gap > gap_tol)) throw AmbiguousAttractor(gap);
  return make_projective(svd.matrixU().col(0));
}

HyperplanePoint cartan_repeller(const NormalizedMatrix& m, double gap_tol) {
  auto svd = full_svd(m);
  double gap = top_gap(svd);
  if (!(gap > gap_tol)) throw AmbiguousAttractor(gap);
  return HyperplanePoint{make_projective(svd.matrixV().col(0)).v};
}

Matrix left_singular_frame(const NormalizedMatrix& m) { return full_svd(m).matrixU(); }

double proj_dist(const ProjectivePoint& a, const ProjectivePoint& b) {
  double c = a.v.dot(b.v);
  return std::min(1.0, (a.v - c * b.v).norm());
}

double gromov_product(const HyperplanePoint& V, const ProjectivePoint& l, double floor) {
  double x = std::abs(V.covector.normalized().dot(l.v.normalized()));
  if (x <= 0) return floor;
  return std::max(floor, std::log(x));
}

Representation dual_rep(const Representation& rho) {
  std::vector<Matrix> mats;
  const Presentation& p = rho.presentation();
  for (std::size_t s = 0; s < p.generator_count(); ++s) mats.push_back(rho.matrix(p.inverse[s]).transpose());
  return Representation(p, std::move(mats), rho.name() + "*", false);
}

Matrix sym2_matrix(const Matrix& g0) {
  if (g0.rows() != 2) throw InputError("sym2 needs a 2-dimensional matrix");
  double det = g0.determinant();
  Matrix g = g0 / std::sqrt(std::abs(det));
  double a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
  Matrix s(3, 3);
  // columns: images of x^2, xy, y^2 where g e1 = a e1 + c e2, g e2 = b e1 + d e2
  s << a * a, a * b, b * b,
       2 * a * c, a * d + b * c, 2 * b * d,
       c * c, c * d, d * d;
  return s;
}

Representation sym2_lift(const Representation& rho2) {
  if (rho2.dim() != 2) throw InputError("sym2_lift needs a 2-dimensional representation");
  std::vector<Matrix> mats;
  for (const auto& m : rho2.matrices()) mats.push_back(sym2_matrix(m));
  return Representation(rho2.presentation(), std::move(mats), "sym2(" + rho2.name() + ")");
}

// ---------------------------------------------------------------------------------------------

BallSpectra evaluate_ball(const Representation& rho, const Ball& ball, const SpectraOptions& opts) {
  const int d = rho.dim();
  const auto du = static_cast<std::size_t>(d);
  const Presentation& p = rho.presentation();
  BallSpectra out;
  out.dim = d;
  out.count = ball.size();
  out.cartan.assign(ball.size() * du, 0.0);
  if (opts.jordan) out.jordan.assign(ball.size() * du, 0.0);
  if (opts.attractors) out.attractor.assign(ball.size() * du, 0.0);

  auto record = [&](std::size_t i, const NormalizedMatrix& f, const NormalizedMatrix& b) {
    Vector a = cartan_projection(f, &b);
    std::copy(a.data(), a.data() + d, out.cartan.begin() + static_cast<std::ptrdiff_t>(i * du));
    if (opts.jordan) {
      Vector l = jordan_projection(f, &b);
      std::copy(l.data(), l.data() + d, out.jordan.begin() + static_cast<std::ptrdiff_t>(i * du));
    }
    if (opts.attractors) {
      try {
        ProjectivePoint u = cartan_attractor(f);
        std::copy(u.v.data(), u.v.data() + d, out.attractor.begin() + static_cast<std::ptrdiff_t>(i * du));
      } catch (const AmbiguousAttractor&) {
      }
    }
  };
  NormalizedMatrix id = identity_normalized(d);
  record(0, id, id);
  if (ball.radius < 1) return out;

  struct Frame {
    std::size_t index;
    NormalizedMatrix fwd, inv;
  };
  const std::size_t roots = ball.level_start[2] - ball.level_start[1];
  parallel_for(roots, opts.workers, [&](std::size_t r) {
    std::vector<Frame> stack;
    std::size_t root = ball.level_start[1] + r;
    Letter s = ball.last[root];
    NormalizedMatrix f{rho.matrix(s), 0.0}, b{rho.matrix(p.inverse[s]), 0.0};
    renormalize(f);
    renormalize(b);
    stack.push_back({root, f, b});
    while (!stack.empty()) {
      Frame fr = std::move(stack.back());
      stack.pop_back();
      record(fr.index, fr.fwd, fr.inv);
      for (std::size_t c = ball.first_child[fr.index]; c < ball.first_child[fr.index + 1]; ++c) {
        Letter l = ball.last[c];
        Frame ch{c, {fr.fwd.m * rho.matrix(l), fr.fwd.log_scale}, {rho.matrix(p.inverse[l]) * fr.inv.m, fr.inv.log_scale}};
        for (NormalizedMatrix* nm : {&ch.fwd, &ch.inv}) {
          double nrm = nm->m.norm();
          if (!std::isfinite(nrm) || nrm == 0.0) renormalize(*nm, p.format_word(ball.word(c)));
          nm->m /= nrm;
          nm->log_scale += std::log(nrm);
        }
        stack.push_back(std::move(ch));
      }
    }
  });
  return out;
}

double generator_step_bound(const Representation& rho) {
  double best = 0;
  const Presentation& p = rho.presentation();
  for (std::size_t s = 0; s < p.generator_count(); ++s) {
    Word w{static_cast<Letter>(s)}, wi{p.inverse[s]};
    double a1 = spectrum_of(rho, w).cartan(0), a1i = spectrum_of(rho, wi).cartan(0);
    best = std::max(best, a1 + a1i);
  }
  return best;
}

}  // namespace alab
