#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "anosov_lab/errors.hpp"
#include "anosov_lab/group.hpp"
#include "anosov_lab/presentation.hpp"

namespace alab {

inline constexpr int kMaxDim = 4;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

struct RepresentationCheck {
  double inverse_error = 0;   // max |M(s) M(s^-1) - I|
  double det_error = 0;       // max ||det M(s)| - 1|
  double relator_error = 0;   // max over relators of min(|R - I|, |R + I|), long double products
  bool ok(double inv_tol = 1e-10, double det_tol = 1e-10, double rel_tol = 1e-8) const {
    return inverse_error <= inv_tol && det_error <= det_tol && relator_error <= rel_tol;
  }
};

class Representation {
 public:
  // One matrix per generator of `p` (inverse letters included). Throws InputError when the
  // relation checks fail and `validate` is set.
  Representation(Presentation p, std::vector<Matrix> matrices, std::string name, bool validate = true);

  int dim() const { return dim_; }
  const Presentation& presentation() const { return pres_; }
  const std::string& name() const { return name_; }
  const Matrix& matrix(Letter s) const { return mats_[s]; }
  const std::vector<Matrix>& matrices() const { return mats_; }
  RepresentationCheck check() const;
  // Text form in the representation-file grammar (17 significant digits).
  std::string to_text() const;

 private:
  Presentation pres_;
  std::vector<Matrix> mats_;
  std::string name_;
  int dim_;
};

struct RepresentationDocument {
  int dim = 0;
  std::string field = "R";
  std::optional<std::string> presentation_ref;
  std::vector<std::pair<std::string, Matrix>> rows;
};

// Grammar: `dim d`, `field R`, optional `presentation <ref>`, then `name m11 ... mdd` rows.
RepresentationDocument parse_representation_document(std::string_view text);
// Builds the representation over `p`; missing inverse generators are filled by inversion.
Representation representation_from_document(const RepresentationDocument& doc, const Presentation& p,
                                             const std::string& name);

struct NormalizedMatrix {
  Matrix m;               // Frobenius norm 1
  double log_scale = 0;   // true matrix = exp(log_scale) * m
  Matrix true_matrix() const { return std::exp(log_scale) * m; }
  int dim() const { return static_cast<int>(m.rows()); }
};

NormalizedMatrix identity_normalized(int d);
// Renormalizes in place; throws NumericError (naming `context`) on non-finite entries.
void renormalize(NormalizedMatrix& nm, const std::string& context = {});
NormalizedMatrix multiply(const NormalizedMatrix& a, const NormalizedMatrix& b);

enum class EvalPrecision { standard, extended };

// Product of generator matrices with per-step Frobenius renormalization.
NormalizedMatrix evaluate(const Representation& rho, const Word& w, EvalPrecision prec = EvalPrecision::standard);
// rho(w)^{-1}, evaluated as the product of inverse generators.
NormalizedMatrix evaluate_inverse(const Representation& rho, const Word& w,
                                  EvalPrecision prec = EvalPrecision::standard);

// Sorted log singular values (resp. log eigenvalue moduli), recentred to sum 0. With the tracked
// inverse the bottom half is read off the inverse, so small singular values keep full relative
// accuracy; without it the inverse is formed numerically.
Vector cartan_projection(const NormalizedMatrix& m, const NormalizedMatrix* inverse = nullptr);
Vector jordan_projection(const NormalizedMatrix& m, const NormalizedMatrix* inverse = nullptr);
Vector root_gaps(const Vector& v);  // tau_i = v_i - v_{i+1}

struct SpectrumSample {
  Word word;
  int length = 0;
  Vector cartan;
  Vector jordan;
  Vector cartan_gaps() const { return root_gaps(cartan); }
  Vector jordan_gaps() const { return root_gaps(jordan); }
};

SpectrumSample spectral(const NormalizedMatrix& m, const NormalizedMatrix* inverse = nullptr);
SpectrumSample spectrum_of(const Representation& rho, const Word& w);

struct ProjectivePoint {
  Vector v;  // unit vector, sign-canonicalized
};
struct HyperplanePoint {
  Vector covector;  // unit covector; the hyperplane is its kernel
};

ProjectivePoint make_projective(const Vector& v);

class AmbiguousAttractor : public NumericError {
 public:
  explicit AmbiguousAttractor(double gap)
      : NumericError("ambiguous Cartan attractor: top singular gap " + std::to_string(gap)), gap_(gap) {}
  double gap() const { return gap_; }

 private:
  double gap_;
};

// Top left-singular direction; throws AmbiguousAttractor when tau_1 <= gap_tol.
ProjectivePoint cartan_attractor(const NormalizedMatrix& m, double gap_tol = 1e-6);
// Kernel covector of the attracting hyperplane of m^{-1} (top right-singular direction of m).
HyperplanePoint cartan_repeller(const NormalizedMatrix& m, double gap_tol = 1e-6);
// Left-singular vectors as columns, by decreasing singular value.
Matrix left_singular_frame(const NormalizedMatrix& m);

// Sine of the angle between two lines (computed from the perpendicular component).
double proj_dist(const ProjectivePoint& a, const ProjectivePoint& b);
// log |phi(v)| for unit phi, v, clamped below at `floor`.
double gromov_product(const HyperplanePoint& V, const ProjectivePoint& l, double floor = -745.0);

Representation dual_rep(const Representation& rho);
// Symmetric square on the monomial basis (x^2, xy, y^2), determinant normalized to +-1.
Representation sym2_lift(const Representation& rho2);
Matrix sym2_matrix(const Matrix& g);

// Per-element spectra over a ball, evaluated depth-first along the prefix tree so that every
// element costs one product (forward and inverse). Subtrees under the depth-1 prefixes are
// distributed across workers; results do not depend on the worker count.
struct SpectraOptions {
  bool jordan = false;
  bool attractors = false;
  int workers = 1;
};

struct BallSpectra {
  int dim = 0;
  std::size_t count = 0;
  std::vector<double> cartan;     // count * dim
  std::vector<double> jordan;     // count * dim, when requested
  std::vector<double> attractor;  // count * dim, when requested (zero vector if ambiguous)

  const double* a(std::size_t i) const { return cartan.data() + i * static_cast<std::size_t>(dim); }
  double tau(std::size_t i, int k) const { return a(i)[k - 1] - a(i)[k]; }
};

BallSpectra evaluate_ball(const Representation& rho, const Ball& ball, const SpectraOptions& opts = {});

// Largest single-generator step max_s (a_1(s) + a_1(s^{-1})): bounds |a(s g) - a(g)|_inf.
double generator_step_bound(const Representation& rho);

}  // namespace alab
