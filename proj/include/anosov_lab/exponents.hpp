#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anosov_lab/anosov.hpp"
#include "anosov_lab/group.hpp"
#include "anosov_lab/replin.hpp"

namespace alab {

// phi = s * tau + u * taubar on pairs (tau(a(rho g)), taubar(a(rhobar g))).
struct Functional2D {
  double s = 1;
  double u = 0;
  double operator()(double tau, double taubar) const { return s * tau + u * taubar; }
};

// Paired per-element data over a ball (index = ball index).
struct PairSpectra {
  int radius = 0;
  std::vector<std::size_t> level_start;
  std::vector<double> tau;
  std::vector<double> taubar;
  std::size_t size() const { return tau.size(); }
};

PairSpectra pair_spectra(const Ball& ball, const BallSpectra& rho, const BallSpectra& rhobar);
// rhobar = dual(rho): tau_1 of the dual is tau_{d-1} of rho.
PairSpectra dual_pair_spectra(const Ball& ball, const BallSpectra& rho);
PairSpectra single_spectra(const Ball& ball, const BallSpectra& rho);  // taubar = tau
std::vector<double> functional_values(const PairSpectra& p, const Functional2D& phi);
std::vector<double> max_values(const PairSpectra& p, double beta);  // max{beta tau, taubar}

enum class ExponentMethod { slope_fit, poincare_root };
std::string to_string(ExponentMethod m);
ExponentMethod parse_method(const std::string& s);

class PositivityError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

struct ExponentOptions {
  ExponentMethod method = ExponentMethod::slope_fit;
  double window_lo = 0.3;  // fractions of the truncation-safe t_max
  double window_hi = 0.9;
  std::optional<std::pair<double, double>> window;  // explicit [t0, t1]
  int grid = 200;
  int min_levels = 5;
  // The truncation-safe bound comes from a domination fit over the lengths
  // [domination_start, N]; -1 selects N / 2, away from the short-word transient.
  int domination_start = -1;
  DominationOptions domination;
};

struct ExponentEstimate {
  double value = 0;
  ExponentMethod method = ExponentMethod::slope_fit;
  int radius = 0;
  double t0 = 0, t1 = 0;        // slope-fit window
  double t_max = 0;             // truncation-safe bound mu (N+1) - C
  double residual = 0;          // slope-fit: standard error; root: |root(N) - root(N-1)|
  double bracket_lo = 0, bracket_hi = 0;  // poincare-root bracket
  std::size_t count = 0;        // elements inside the window (slope-fit)
};

// Critical exponent of the per-element values over a ball enumerated to `level_start.size() - 2`.
ExponentEstimate critical_exponent(const std::vector<double>& values, const std::vector<std::size_t>& level_start,
                                   const ExponentOptions& opts = {});

// Bracket [lo, hi] of the root in s of log(Z_top + Z_{top-1}) - log(Z_{top-2} + Z_{top-3}), where
// Z_n(s) sums exp(-s * value) over sphere n.
std::pair<double, double> poincare_root(const std::vector<double>& values, const std::vector<std::size_t>& level_start,
                                        int top);

// Both estimators; the headline is slope-fit with the discrepancy as systematic error.
struct CrossValidatedExponent {
  ExponentEstimate slope;
  ExponentEstimate root;
  double value() const { return slope.value; }
  double systematic() const { return std::abs(slope.value - root.value); }
  double uncertainty() const { return slope.residual + systematic(); }
};
CrossValidatedExponent cross_validated_exponent(const std::vector<double>& values,
                                                const std::vector<std::size_t>& level_start,
                                                const ExponentOptions& opts = {});

ExponentEstimate hinf(double beta, const PairSpectra& p, const ExponentOptions& opts = {});
// Critical exponent of H = (tau_1 + tau_2) / 2 for a 3-dimensional representation.
ExponentEstimate hilbert_entropy(const Ball& ball, const BallSpectra& rho, const ExponentOptions& opts = {});

struct QCurvePoint {
  double theta = 0;
  double s = 0, u = 0;   // phi_theta scaled so that h = 1
  double h_raw = 0;      // exponent of cos(theta) tau + sin(theta) taubar
  double h_scaled = 0;   // re-estimated exponent of the scaled functional
  double tangent_s = 0, tangent_u = 0;  // unit tangent (central differences)
  double normal_s = 0, normal_u = 0;    // unit normal pointing away from the origin
  bool ok = true;
  std::string reason;
};

class QCurveSampler {
 public:
  QCurveSampler(const PairSpectra& p, ExponentOptions opts = {}) : p_(p), opts_(std::move(opts)) {}
  // Scaled point without tangent data; ok = false with a reason on positivity failure.
  QCurvePoint point(double theta) const;
  const ExponentOptions& options() const { return opts_; }

 private:
  const PairSpectra& p_;
  ExponentOptions opts_;
};

std::vector<QCurvePoint> qcurve(const QCurveSampler& sampler, const std::vector<double>& angles);
std::vector<double> default_angles(int count = 17);  // uniform on [0, pi/2]

struct QCurveShape {
  double max_cross = 0;          // largest left turn; <= tol means convex towards the origin
  double symmetry_deviation = 0; // max |p(theta) - swap(p(pi/2 - theta))| over mirrored pairs
  bool convex(double tol) const { return max_cross <= tol; }
};
QCurveShape qcurve_shape(const std::vector<QCurvePoint>& pts);

struct PhiInfinity {
  double s = 0, u = 0;
  double theta = 0;
  double norm = 0;                      // |s| / beta + |u|
  double tangent_s = 0, tangent_u = 0;  // tangent of Q at the minimizer
  bool inconclusive = false;
  std::string reason;
};

// Minimizes the dual norm |s|/beta + |u| over Q: grid search over the sampled curve, then golden
// section on the bracketing arc. Near-flat minima resolve to the centre of the tie set.
PhiInfinity phi_infinity(const QCurveSampler& sampler, double beta, const std::vector<double>& angles);

struct ClassSpectra {
  std::vector<Word> words;
  std::vector<double> tau;     // tau(lambda(rho g))
  std::vector<double> taubar;  // taubar(lambda(rhobar g))
};
ClassSpectra class_spectra(const Group& g, const Representation& rho, const Representation& rhobar, int n);

struct IntersectionEstimate {
  double value = 0;
  std::size_t count = 0;
  double t = 0;
};
// Mean of taubar / tau over classes with tau <= t (g and g^{-1} counted separately).
IntersectionEstimate intersection(const std::vector<double>& tau, const std::vector<double>& taubar, double t);

class GapIsospectralError : public HypothesisError {
 public:
  explicit GapIsospectralError(double deviation)
      : HypothesisError("pair is gap-isospectral (max deviation " + std::to_string(deviation) + ")"),
        deviation_(deviation) {}
  double deviation() const { return deviation_; }

 private:
  double deviation_;
};

// Throws GapIsospectralError when deviation < 10 * tol.
void require_not_isospectral(double max_deviation, double tol = 1e-6);

struct ChainValue {
  std::string name;
  double value = 0;
  double err = 0;
  bool available = false;
};

struct ChainCheck {
  std::string relation;  // e.g. "beta*h_inf <= Hff(Ext)"
  double lhs = 0, rhs = 0;
  double tol = 0;
  bool evaluated = false;
  bool pass = false;
  double margin() const { return rhs - lhs; }
};

struct TheoremBInputs {
  CrossValidatedExponent h_tau, h_taubar, h_inf;
  std::optional<ChainValue> ext_dim;    // dimension of the beta-conical image
  std::optional<ChainValue> curve_dim;  // dimension of the full flag curve
  std::optional<ChainValue> h_hilbert;  // d = 3 and rhobar = dual
};

struct TheoremBReport {
  double beta = 1;
  double isospectral_deviation = 0;
  std::vector<ChainValue> values;
  std::vector<ChainCheck> checks;
  bool all_pass() const;
  std::string text() const;
};

TheoremBReport theoremB_report(const TheoremBInputs& in, double beta, double isospectral_deviation,
                               double iso_tol = 1e-6);
void write_chain_csv(std::ostream& os, const TheoremBReport& r);

}  // namespace alab
