// anosov-lab command-line driver.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "anosov_lab/anosov.hpp"
#include "anosov_lab/cache.hpp"
#include "anosov_lab/catalog.hpp"
#include "anosov_lab/exponents.hpp"
#include "anosov_lab/hausdorff.hpp"
#include "anosov_lab/io.hpp"
#include "anosov_lab/limitset.hpp"

namespace fs = std::filesystem;
using namespace alab;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string rep;
  std::string repbar;
  std::string presentation;
  int depth = 10;
  int samples = 2000;
  int ray_depth = 60;
  double beta = 1.0;
  double R = -1;
  std::string phi = "tau1";
  std::string method = "both";
  std::vector<double> window;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string cache = ".anosov_lab_cache";
  bool no_cache = false;
  std::size_t max_elements = 20'000'000;
  bool strict_cap = false;
  int workers = 0;
  double iso_tol = 1e-6;
  int iso_radius = 6;
  double threshold = 1e-6;
  int hyper_p = 2;
  int angles = 17;
  int classes = 8;
  double t = -1;
  double scan_threshold = 0.5;
  std::string cloud;
  std::string synthetic;
  int points = 10000;
  int chart = 0;
  int window_lo = 10;
  int min_hits = 3;
};

// ---------------------------------------------------------------------------------------------
// Inputs

struct Inputs {
  std::optional<Representation> rho, rhobar;
  std::optional<Presentation> pres;
  bool bar_is_dual = false;
  std::string rho_text_hash, rhobar_text_hash;
};

Presentation load_presentation_ref(const std::string& ref, const fs::path& base) {
  for (const fs::path& candidate : {fs::path(ref), base / ref})
    if (!ref.empty() && fs::is_regular_file(candidate)) return parse_presentation(read_file(candidate.string()));
  return parse_presentation(ref);
}

Representation load_rep(const std::string& ref, const Options& o) {
  if (is_catalog_name(ref)) return catalog_representation(ref);
  if (!fs::is_regular_file(ref)) throw InputError("'" + ref + "' is neither a catalog name nor a readable file");
  RepresentationDocument doc = parse_representation_document(read_file(ref));
  std::optional<Presentation> p;
  if (!o.presentation.empty()) {
    p = load_presentation_ref(o.presentation, fs::current_path());
  } else if (doc.presentation_ref) {
    p = load_presentation_ref(*doc.presentation_ref, fs::path(ref).parent_path());
  } else {
    throw InputError("representation file '" + ref + "' names no presentation; pass --presentation");
  }
  return representation_from_document(doc, *p, fs::path(ref).stem().string());
}

Inputs load_inputs(const Options& o, bool need_rep, bool need_bar) {
  Inputs in;
  if (!o.rep.empty()) {
    in.rho = load_rep(o.rep, o);
    in.pres = in.rho->presentation();
    in.rho_text_hash = content_hash(in.rho->to_text());
  } else if (!o.presentation.empty()) {
    in.pres = load_presentation_ref(o.presentation, fs::current_path());
  }
  if (need_rep && !in.rho) throw InputError("this command needs --rep");
  if (!in.pres) throw InputError("this command needs --rep or --presentation");
  if (!o.repbar.empty()) {
    if (!in.rho) throw InputError("--repbar needs --rep");
    if (o.repbar == "dual") {
      in.rhobar = dual_rep(*in.rho);
      in.bar_is_dual = true;
    } else {
      in.rhobar = load_rep(o.repbar, o);
      if (in.rhobar->presentation().label() != in.pres->label())
        throw InputError("--rep and --repbar use different presentations");
    }
    in.rhobar_text_hash = content_hash(in.rhobar->to_text());
  }
  if (need_bar && !in.rhobar) throw InputError("this command needs --repbar (a file, a catalog name, or 'dual')");
  return in;
}

void validate(const Options& o) {
  if (!(o.beta > 0 && o.beta <= 1)) throw InputError("--beta must lie in (0, 1]");
  if (o.depth < 4) throw InputError("--depth must be >= 4");
  if (!o.window.empty() && (o.window.size() != 2 || !(o.window[0] < o.window[1])))
    throw InputError("--window takes two increasing values t0,t1");
  if (o.samples < 0 || o.points < 0) throw InputError("sample counts must be nonnegative");
}

int workers(const Options& o) {
  if (o.workers > 0) return o.workers;
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

// ---------------------------------------------------------------------------------------------
// Artifacts

class Run {
 public:
  Run(std::string command, const Options& o, const Inputs& in) : command_(std::move(command)), o_(o) {
    meta_.add("tool", std::string("anosov-lab ") + kVersion);
    meta_.add("command", command_);
    if (in.pres) {
      meta_.add("presentation", in.pres->label());
      meta_.add("presentation_hash", content_hash(in.pres->label()));
    }
    if (in.rho) {
      meta_.add("rep", in.rho->name());
      meta_.add("rep_hash", in.rho_text_hash);
    }
    if (in.rhobar) {
      meta_.add("repbar", in.bar_is_dual ? std::string("dual") : in.rhobar->name());
      meta_.add("repbar_hash", in.rhobar_text_hash);
    }
    meta_.add("seed", std::to_string(o.seed));
  }

  Metadata& meta() { return meta_; }

  fs::path path(const std::string& name) const { return fs::path(o_.out) / name; }

  // CSV with the metadata block on top.
  void write_csv(const std::string& name, const std::string& body) {
    std::ostringstream os;
    meta_.write(os);
    os << body;
    write_file_atomic(path(name).string(), os.str());
    written_.push_back(name);
  }

  void write_text(const std::string& name, const std::string& body) {
    std::ostringstream os;
    meta_.write(os);
    os << body;
    write_file_atomic(path(name).string(), os.str());
    written_.push_back(name);
  }

  void write_svg(const std::string& name, const std::string& svg) {
    write_file_atomic(path(name).string(), svg);
    written_.push_back(name);
  }

  std::string meta_comment() const {
    std::ostringstream os;
    meta_.write(os, "");
    return os.str();
  }

  void finish(const std::string& report) {
    std::cout << report;
    for (const auto& w : written_) std::cout << "wrote " << path(w).string() << "\n";
  }

 private:
  std::string command_;
  const Options& o_;
  Metadata meta_;
  std::vector<std::string> written_;
};

// ---------------------------------------------------------------------------------------------
// Enumeration with cache and element cap

struct BallData {
  Ball ball;
  BallSpectra spectra, spectra_bar;
  int requested = 0;
  bool truncated = false;
  bool from_cache = false;
};

CachedBall compute_or_load(const Group& g, const Representation* rho, int depth, const SpectraOptions& so,
                           const Options& o, bool& from_cache) {
  CacheKey key = make_cache_key(g.presentation(), rho, depth, so);
  std::string file = (fs::path(o.cache) / cache_file_name(key)).string();
  if (!o.no_cache) {
    if (auto hit = load_cache(file, key)) {
      from_cache = true;
      return std::move(*hit);
    }
  }
  CachedBall data;
  data.ball = g.ball(depth, EnumerationLimits{o.max_elements});
  if (rho) data.spectra = evaluate_ball(*rho, data.ball, so);
  if (!o.no_cache) save_cache(file, key, data);
  return data;
}

BallData load_ball(const Group& g, const Inputs& in, int depth, const Options& o, Run& run, SpectraOptions so = {}) {
  so.workers = workers(o);
  BallData bd;
  bd.requested = depth;
  int radius = depth;
  CachedBall main;
  try {
    main = compute_or_load(g, in.rho ? &*in.rho : nullptr, radius, so, o, bd.from_cache);
  } catch (const ResourceError& e) {
    if (o.strict_cap || e.completed_radius() < 4) throw;
    radius = e.completed_radius();
    bd.truncated = true;
    std::cerr << "warning: " << e.what() << "; continuing at radius " << radius << "\n";
    main = compute_or_load(g, in.rho ? &*in.rho : nullptr, radius, so, o, bd.from_cache);
  }
  bd.ball = std::move(main.ball);
  bd.spectra = std::move(main.spectra);
  if (in.rhobar && !in.bar_is_dual) bd.spectra_bar = evaluate_ball(*in.rhobar, bd.ball, so);
  run.meta().add("depth_requested", std::to_string(depth));
  run.meta().add("depth", std::to_string(radius));
  run.meta().add("elements", std::to_string(bd.ball.size()));
  run.meta().add("max_elements", std::to_string(o.max_elements));
  if (bd.truncated) run.meta().add("truncated", "element cap reached; radius lowered");
  return bd;
}

PairSpectra pairs_of(const BallData& bd, const Inputs& in) {
  if (!in.rhobar) return single_spectra(bd.ball, bd.spectra);
  if (in.bar_is_dual) return dual_pair_spectra(bd.ball, bd.spectra);
  return pair_spectra(bd.ball, bd.spectra, bd.spectra_bar);
}

ExponentOptions exponent_options(const Options& o) {
  ExponentOptions eo;
  if (!o.window.empty()) eo.window = std::make_pair(o.window[0], o.window[1]);
  return eo;
}

// ---------------------------------------------------------------------------------------------
// Shared report pieces

std::string exponent_csv_rows(const std::string& label, const std::vector<std::pair<std::string, ExponentEstimate>>& rows,
                              const std::vector<std::pair<std::string, std::string>>& failures) {
  std::ostringstream os;
  CsvWriter w(os, {"phi", "method", "value", "radius", "t0", "t1", "t_max", "residual", "bracket_lo", "bracket_hi",
                   "count", "status"});
  for (const auto& [m, e] : rows) {
    w.cell(label).cell(m).cell(e.value).cell(e.radius).cell(e.t0).cell(e.t1).cell(e.t_max).cell(e.residual);
    w.cell(e.bracket_lo).cell(e.bracket_hi).cell(e.count).cell(std::string("ok"));
    w.end_row();
  }
  for (const auto& [m, why] : failures) {
    w.cell(label).cell(m);
    for (int i = 0; i < 9; ++i) w.cell(std::string(""));
    w.cell("failed: " + why);
    w.end_row();
  }
  return os.str();
}

// Both estimators; either may fail on its own (e.g. a too-short slope window).
struct BothMethods {
  std::optional<ExponentEstimate> slope, root;
  std::vector<std::pair<std::string, std::string>> failures;
  const ExponentEstimate& headline() const {
    if (slope) return *slope;
    if (root) return *root;
    throw NumericError("no exponent estimator succeeded: " + failures.front().second);
  }
  double uncertainty() const {
    double u = slope ? slope->residual : root->residual;
    if (slope && root) u += std::abs(slope->value - root->value);
    return u;
  }
};

BothMethods estimate_both(const std::vector<double>& values, const std::vector<std::size_t>& ls, const Options& o) {
  BothMethods b;
  for (ExponentMethod m : {ExponentMethod::slope_fit, ExponentMethod::poincare_root}) {
    if (o.method != "both" && parse_method(o.method) != m) continue;
    ExponentOptions eo = exponent_options(o);
    eo.method = m;
    try {
      ExponentEstimate e = critical_exponent(values, ls, eo);
      (m == ExponentMethod::slope_fit ? b.slope : b.root) = e;
    } catch (const PositivityError&) {
      throw;
    } catch (const Error& e) {
      b.failures.emplace_back(to_string(m), e.what());
    }
  }
  if (!b.slope && !b.root) throw NumericError("no exponent estimator succeeded: " + b.failures.front().second);
  return b;
}

std::vector<double> phi_values(const std::string& phi, const BallData& bd, const PairSpectra& pairs, const Inputs& in,
                               double beta) {
  const int d = bd.spectra.dim;
  std::vector<double> v(bd.ball.size());
  auto need_bar = [&] {
    if (!in.rhobar) throw InputError("--phi " + phi + " needs --repbar");
  };
  if (phi.size() >= 4 && phi.rfind("tau", 0) == 0) {
    int k = 0;
    try {
      k = std::stoi(phi.substr(3));
    } catch (...) {
      throw InputError("unknown --phi '" + phi + "'");
    }
    if (k < 1 || k >= d) throw InputError("--phi " + phi + ": need 1 <= k < dim");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = bd.spectra.tau(i, k);
  } else if (phi == "H" || phi == "hilbert") {
    if (d != 3) throw InputError("--phi H needs a 3-dimensional representation");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (bd.spectra.tau(i, 1) + bd.spectra.tau(i, 2));
  } else if (phi == "taubar") {
    need_bar();
    v = pairs.taubar;
  } else if (phi == "hinf") {
    need_bar();
    v = max_values(pairs, beta);
  } else if (phi == "min") {
    need_bar();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::min(pairs.tau[i], pairs.taubar[i]);
  } else if (phi.find(',') != std::string::npos) {
    need_bar();
    Functional2D f;
    std::istringstream is(phi);
    char comma = 0;
    if (!(is >> f.s >> comma >> f.u) || comma != ',') throw InputError("--phi s,u expects two numbers");
    v = functional_values(pairs, f);
  } else {
    throw InputError("unknown --phi '" + phi + "' (tau<k>, H, taubar, hinf, min, or s,u)");
  }
  return v;
}

std::vector<BoundarySample> sample_flags(const Group& g, const Representation& rho, const Representation& rhobar,
                                         const Options& o, Run& run) {
  FlagSampleOptions fo;
  fo.depth = o.ray_depth;
  fo.seed = o.seed;
  fo.workers = workers(o);
  if (g.presentation().has_circle_boundary()) {
    const int cap = g.max_ray_depth();
    if (fo.depth > cap) {
      std::cerr << "warning: ray depth " << fo.depth << " exceeds the certified depth " << cap << "; using " << cap
                << "\n";
      fo.depth = cap;
    }
  }
  run.meta().add("ray_depth", std::to_string(fo.depth));
  run.meta().add("samples", std::to_string(o.samples));
  return flag_samples(g, rho, rhobar, o.samples, fo);
}

std::string summarize_box(const BoxDimResult& b) {
  std::ostringstream os;
  os << "box dimension: " << format_double(b.dimension) << " +- " << format_double(b.stderr_slope) << "\n";
  if (!b.eps.empty())
    os << "eps range: [" << format_double(b.eps.back()) << ", " << format_double(b.eps.front()) << "], " << b.eps.size()
       << " scales\n";
  os << "local slopes:";
  for (double s : b.local_slopes) os << " " << format_double(s);
  os << "\n";
  if (!b.warning.empty()) os << "warning: " << b.warning << "\n";
  return os.str();
}

std::string box_csv(const BoxDimResult& b) {
  std::ostringstream os;
  write_box_csv(os, b);
  return os.str();
}

// ---------------------------------------------------------------------------------------------
// Commands

int cmd_catalog(const Options& o) {
  if (o.rep.empty()) {
    for (const auto& n : catalog_names()) std::cout << n << "\n";
    return 0;
  }
  Representation r = load_rep(o.rep, o);
  std::string text = r.to_text();
  if (o.out == "-") {
    std::cout << text;
  } else {
    write_file_atomic(o.out, text);
    std::cout << "wrote " << o.out << "\n";
  }
  return 0;
}

int cmd_ball(const Options& o) {
  Inputs in = load_inputs(o, false, false);
  Group g(*in.pres);
  Run run("ball", o, in);
  BallData bd = load_ball(g, in, o.depth, o, run);
  const int radius = bd.ball.radius;
  {
    std::ostringstream os;
    std::vector<std::string> header{"n", "sphere_size", "ball_size"};
    if (in.rho) header.push_back("min_tau1");
    CsvWriter w(os, header);
    std::vector<double> mins;
    if (in.rho) {
      std::vector<double> t1(bd.ball.size());
      for (std::size_t i = 0; i < t1.size(); ++i) t1[i] = bd.spectra.tau(i, 1);
      mins = sphere_minima(bd.ball, t1);
    }
    for (int n = 0; n <= radius; ++n) {
      w.cell(n).cell(bd.ball.sphere_size(n)).cell(bd.ball.level_start[static_cast<std::size_t>(n) + 1]);
      if (in.rho) w.cell(mins[static_cast<std::size_t>(n)]);
      w.end_row();
    }
    run.write_csv("spheres.csv", os.str());
  }
  {
    std::ostringstream os;
    std::vector<std::string> header{"index", "length", "word"};
    const int d = in.rho ? in.rho->dim() : 0;
    for (int i = 1; i <= d; ++i) header.push_back("a_" + std::to_string(i));
    for (int i = 1; i < d; ++i) header.push_back("tau_" + std::to_string(i));
    CsvWriter w(os, header);
    for (std::size_t i = 0; i < bd.ball.size(); ++i) {
      w.cell(i).cell(bd.ball.length(i)).cell(in.pres->format_word(bd.ball.word(i), "."));
      for (int k = 0; k < d; ++k) w.cell(bd.spectra.a(i)[k]);
      for (int k = 1; k < d; ++k) w.cell(bd.spectra.tau(i, k));
      w.end_row();
    }
    run.write_csv("ball.csv", os.str());
  }
  std::ostringstream rep;
  rep << "ball radius " << radius << ": " << bd.ball.size() << " elements" << (bd.from_cache ? " (cached)" : "")
      << "\n";
  run.finish(rep.str());
  return 0;
}

int cmd_verify(const Options& o) {
  Inputs in = load_inputs(o, true, false);
  Group g(*in.pres);
  Run run("verify", o, in);
  run.meta().add("mu_min", DominationOptions{}.mu_min);
  run.meta().add("hyperconvexity_threshold", o.threshold);
  run.meta().add("iso_tol", o.iso_tol);
  std::ostringstream rep;
  RepresentationCheck chk = in.rho->check();
  rep << "relation check: inverse " << format_double(chk.inverse_error) << ", det " << format_double(chk.det_error)
      << ", relators " << format_double(chk.relator_error) << (chk.ok() ? " (ok)" : " (FAILED)") << "\n";

  BallData bd = load_ball(g, in, o.depth, o, run);
  const int d = in.rho->dim();
  std::ostringstream dom;
  CsvWriter dw(dom, {"k", "radius", "mu", "C", "min_margin", "verdict"});
  for (int k = 1; k < d; ++k) {
    DominationFit f = domination_fit(bd.ball, bd.spectra, k);
    dw.cell(k).cell(f.radius).cell(f.mu).cell(f.C).cell(f.min_margin).cell(std::string(f.verdict ? "1" : "0"));
    dw.end_row();
    rep << "tau_" << k << " domination over radius " << f.radius << ": mu " << format_double(f.mu) << ", C "
        << format_double(f.C) << " -> " << (f.verdict ? "dominated" : "not dominated") << " (finite radius)\n";
  }
  run.write_csv("domination.csv", dom.str());
  if (o.hyper_p >= 3 && o.hyper_p <= d)
    rep << "local conformality |a_2 - a_" << o.hyper_p << "| max: "
        << format_double(local_conformal_check(bd.spectra, o.hyper_p)) << "\n";

  // limit cone from conjugacy classes
  {
    const int n = std::min(o.classes, o.depth);
    std::vector<Vector> lambdas;
    for (const Word& w : g.conjugacy_reps(n)) lambdas.push_back(spectrum_of(*in.rho, w).jordan);
    LimitConeSample cone = limit_cone(lambdas);
    std::ostringstream os;
    CsvWriter cw(os, {"tau1", "tau2"});
    for (const auto& gp : cone.gaps) {
      cw.cell(gp[0]).cell(gp[1]);
      cw.end_row();
    }
    if (d >= 3) run.write_csv("limitcone.csv", os.str());
    rep << "limit cone from " << lambdas.size() << " classes up to length " << n;
    if (d >= 3)
      rep << ": gap-angle range [" << format_double(cone.angle_min) << ", " << format_double(cone.angle_max)
          << "], hull area " << format_double(cone.hull_area);
    rep << "\n";
  }

  if (in.pres->has_circle_boundary() && d >= 3 && o.samples >= 3) {
    auto samples = sample_flags(g, *in.rho, *in.rho, o, run);
    std::vector<FlagPoint> pts;
    for (const auto& s : samples) pts.push_back({s.frame, s.order_key});
    HyperconvexityOptions ho;
    ho.threshold = o.threshold;
    ho.seed = o.seed;
    HyperconvexityReport h = hyperconvexity_check(pts, o.hyper_p, ho);
    rep << "(1,1," << o.hyper_p << ")-hyperconvexity over " << h.triples_tested << " triples: min det "
        << format_double(h.min_det) << " (raw " << format_double(h.min_raw_det) << ") -> "
        << (h.verdict ? "pass" : "fail") << " [" << h.caveat << "]\n";
  }

  if (in.rhobar) {
    IsospectralReport iso = gap_isospectral_check(g, *in.rho, *in.rhobar, o.iso_radius);
    std::ostringstream os;
    write_isospectral_csv(os, iso, *in.pres);
    run.write_csv("isospectral.csv", os.str());
    rep << "gap-isospectral check to length " << o.iso_radius << ": max deviation " << format_double(iso.max_deviation)
        << " at " << in.pres->format_word(iso.witness, ".") << " -> "
        << (iso.isospectral(o.iso_tol) ? "gap-isospectral" : "not gap-isospectral") << "\n";
  }
  run.write_text("verify.txt", rep.str());
  run.finish(rep.str());
  return 0;
}

std::string limitset_csv(const std::vector<BoundarySample>& s, const Presentation& p, bool with_bar,
                         const std::vector<std::string>& flags) {
  std::ostringstream os;
  if (with_bar) {
    write_flag_csv(os, s, p, flags);
    return os.str();
  }
  const int d = s.empty() ? 0 : static_cast<int>(s[0].xi.v.size());
  std::vector<std::string> header{"orderKey", "rayPrefix"};
  for (int i = 0; i < d; ++i) header.push_back("xi_" + std::to_string(i));
  header.push_back("convergence");
  header.push_back("flags");
  CsvWriter w(os, header);
  for (std::size_t i = 0; i < s.size(); ++i) {
    w.cell(s[i].order_key).cell(p.format_word(s[i].ray.word.prefix(std::min<std::size_t>(12, s[i].ray.depth())), "."));
    for (int k = 0; k < d; ++k) w.cell(s[i].xi.v(k));
    w.cell(s[i].convergence);
    std::string f = s[i].converged ? "" : "unconverged";
    if (i < flags.size() && !flags[i].empty()) f += (f.empty() ? "" : "|") + flags[i];
    w.cell(f);
    w.end_row();
  }
  return os.str();
}

int cmd_limitset(const Options& o, bool flagcurve) {
  Inputs in = load_inputs(o, true, flagcurve);
  Group g(*in.pres);
  Run run(flagcurve ? "flagcurve" : "limitset", o, in);
  const Representation& bar = flagcurve ? *in.rhobar : *in.rho;
  auto samples = sample_flags(g, *in.rho, bar, o, run);
  std::size_t converged = 0;
  for (const auto& s : samples) converged += s.converged;
  std::ostringstream rep;
  rep << samples.size() << " boundary samples, " << converged << " converged\n";
  std::vector<std::string> flags(samples.size());
  std::vector<bool> flagged(samples.size(), false);
  if (flagcurve && samples.size() >= 10) {
    run.meta().add("scan_threshold", o.scan_threshold);
    NondiffScan scan = nondiff_scan(samples, o.scan_threshold);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      flagged[i] = scan.flagged[i];
      if (scan.flagged[i]) flags[i] = "scan";
    }
    rep << "two-scale scan (threshold " << format_double(o.scan_threshold) << "): " << scan.flagged_count << " of "
        << scan.evaluated_count << " flagged\n";
    rep << "scan sensitivity:";
    for (double th : {0.25, 0.5, 1.0, 2.0})
      rep << " " << format_double(th) << "->" << format_double(nondiff_scan(samples, th).fraction());
    rep << "\n";
  }
  std::string name = flagcurve ? "flagcurve" : "limitset";
  run.write_csv(name + ".csv", limitset_csv(samples, *in.pres, flagcurve, flags));
  run.write_svg(name + ".svg", flag_curve_svg(samples, flagged, run.meta_comment()));
  run.finish(rep.str());
  return 0;
}

int cmd_entropy(const Options& o) {
  Inputs in = load_inputs(o, true, false);
  Group g(*in.pres);
  Run run("entropy", o, in);
  run.meta().add("phi", o.phi);
  run.meta().add("beta", o.beta);
  run.meta().add("method", o.method);
  BallData bd = load_ball(g, in, o.depth, o, run);
  PairSpectra pairs = pairs_of(bd, in);
  std::vector<double> values = phi_values(o.phi, bd, pairs, in, o.beta);
  BothMethods b = estimate_both(values, bd.ball.level_start, o);
  std::vector<std::pair<std::string, ExponentEstimate>> rows;
  if (b.slope) rows.emplace_back("slope-fit", *b.slope);
  if (b.root) rows.emplace_back("poincare-root", *b.root);
  run.write_csv("entropy.csv", exponent_csv_rows(o.phi, rows, b.failures));
  std::ostringstream rep;
  const ExponentEstimate& h = b.headline();
  rep << "h_" << o.phi << " = " << format_double(h.value) << " +- " << format_double(b.uncertainty()) << " ("
      << to_string(h.method) << ", radius " << h.radius << ")\n";
  if (b.slope && b.root)
    rep << "slope-fit " << format_double(b.slope->value) << ", poincare-root " << format_double(b.root->value)
        << " (systematic " << format_double(std::abs(b.slope->value - b.root->value)) << ")\n";
  for (const auto& [m, why] : b.failures) rep << m << " failed: " << why << "\n";
  run.finish(rep.str());
  return 0;
}

int cmd_qcurve(const Options& o) {
  Inputs in = load_inputs(o, true, true);
  Group g(*in.pres);
  Run run("qcurve", o, in);
  run.meta().add("beta", o.beta);
  run.meta().add("method", o.method == "both" ? std::string("slope-fit") : o.method);
  BallData bd = load_ball(g, in, o.depth, o, run);
  PairSpectra pairs = pairs_of(bd, in);
  ExponentOptions eo = exponent_options(o);
  if (o.method != "both") eo.method = parse_method(o.method);
  QCurveSampler sampler(pairs, eo);
  std::vector<double> angles = default_angles(o.angles);
  std::vector<QCurvePoint> pts = qcurve(sampler, angles);
  std::ostringstream os;
  CsvWriter w(os, {"theta", "s", "u", "h_raw", "h_scaled", "tangent", "status"});
  for (const auto& p : pts) {
    w.cell(p.theta).cell(p.s).cell(p.u).cell(p.h_raw).cell(p.h_scaled);
    w.cell(std::atan2(p.tangent_u, p.tangent_s)).cell(p.ok ? std::string("ok") : "skipped: " + p.reason);
    w.end_row();
  }
  run.write_csv("qcurve.csv", os.str());
  std::ostringstream rep;
  QCurveShape shape = qcurve_shape(pts);
  rep << "Q-curve: " << pts.size() << " directions; max left turn " << format_double(shape.max_cross)
      << ", swap-symmetry deviation " << format_double(shape.symmetry_deviation) << "\n";
  PhiInfinity pi = phi_infinity(sampler, o.beta, angles);
  rep << "phi_inf (beta " << format_double(o.beta) << "): (" << format_double(pi.s) << ", " << format_double(pi.u)
      << "), norm " << format_double(pi.norm) << ", theta " << format_double(pi.theta)
      << (pi.inconclusive ? " [inconclusive: " + pi.reason + "]" : std::string()) << "\n";
  run.write_text("qcurve.txt", rep.str());
  run.finish(rep.str());
  return 0;
}

int cmd_intersection(const Options& o) {
  Inputs in = load_inputs(o, true, true);
  Group g(*in.pres);
  Run run("intersection", o, in);
  run.meta().add("classes_max_length", std::to_string(o.classes));
  ClassSpectra cs = class_spectra(g, *in.rho, *in.rhobar, o.classes);
  if (cs.words.empty()) throw InputError("no conjugacy classes up to the requested length");
  double t = o.t;
  if (t <= 0) {
    // classes with tau below every longest-class period are not cut off by the length bound
    t = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cs.words.size(); ++i)
      if (static_cast<int>(cs.words[i].size()) == o.classes) t = std::min(t, cs.tau[i]);
    if (!std::isfinite(t)) t = *std::max_element(cs.tau.begin(), cs.tau.end());
  }
  run.meta().add("t", t);
  IntersectionEstimate est = intersection(cs.tau, cs.taubar, t);
  std::ostringstream os;
  CsvWriter w(os, {"class", "len", "tau", "taubar", "ratio", "in_window"});
  for (std::size_t i = 0; i < cs.words.size(); ++i) {
    w.cell(in.pres->format_word(cs.words[i], ".")).cell(cs.words[i].size()).cell(cs.tau[i]).cell(cs.taubar[i]);
    w.cell(cs.taubar[i] / cs.tau[i]).cell(std::string(cs.tau[i] <= t ? "1" : "0"));
    w.end_row();
  }
  run.write_csv("classes.csv", os.str());
  std::ostringstream rep;
  rep << "I_tau(taubar) = " << format_double(est.value) << " over " << est.count << " classes with tau <= "
      << format_double(t) << "\n";
  run.write_text("intersection.txt", rep.str());
  run.finish(rep.str());
  return 0;
}

int cmd_conical(const Options& o) {
  Inputs in = load_inputs(o, true, true);
  Group g(*in.pres);
  Run run("conical", o, in);
  const double R = o.R > 0 ? o.R : default_conical_R(*in.rho, *in.rhobar);
  run.meta().add("beta", o.beta);
  run.meta().add("R", R);
  run.meta().add("window_lo", std::to_string(o.window_lo));
  run.meta().add("min_hits", std::to_string(o.min_hits));
  auto samples = sample_flags(g, *in.rho, *in.rhobar, o, run);
  ConicalOptions co;
  co.beta = o.beta;
  co.R = R;
  co.window_lo = o.window_lo;
  co.min_hits = o.min_hits;
  auto verdicts = conical_points(samples, co);
  std::ostringstream os;
  CsvWriter w(os, {"sample", "orderKey", "beta", "R", "window_lo", "window_hi", "hits", "verdict"});
  std::size_t yes = 0;
  for (const auto& v : verdicts) {
    std::string hits;
    for (int k : v.hits) hits += (hits.empty() ? "" : ";") + std::to_string(k);
    w.cell(v.sample).cell(samples[v.sample].order_key).cell(v.beta).cell(v.R).cell(v.window_lo).cell(v.window_hi);
    w.cell(hits).cell(std::string(v.verdict ? "1" : "0"));
    w.end_row();
    yes += v.verdict;
  }
  run.write_csv("conical.csv", os.str());
  std::ostringstream rep;
  rep << yes << " of " << verdicts.size() << " samples are " << format_double(o.beta) << "-conical over the window (R "
      << format_double(R) << ", " << o.min_hits << " hits)\n";
  BallData bd = load_ball(g, in, o.depth, o, run);
  CoverEstimate cov = cover_dim_upper(pairs_of(bd, in), o.beta, R);
  if (cov.inconclusive)
    rep << "cover estimate inconclusive: " << cov.reason << "\n";
  else
    rep << "cover estimate " << format_double(cov.value) << " from " << cov.qualifying << " qualifying elements\n";
  run.write_text("conical.txt", rep.str());
  run.finish(rep.str());
  return 0;
}

// Cloud CSV: xi_* (and optionally xibar_*) columns are projective coordinates; otherwise every
// column named x_* (or, failing that, every numeric column) is an affine coordinate.
MetricPointCloud read_cloud(const std::string& path) {
  CsvTable t = read_csv(read_file(path));
  auto cols = [&](const std::string& prefix) {
    std::vector<int> c;
    for (int i = 0;; ++i) {
      int k = t.column(prefix + std::to_string(i));
      if (k < 0) break;
      c.push_back(k);
    }
    return c;
  };
  auto grab = [&](const std::vector<int>& c) {
    std::vector<Eigen::VectorXd> pts;
    for (const auto& row : t.rows) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(c.size()));
      for (std::size_t j = 0; j < c.size(); ++j) v(static_cast<Eigen::Index>(j)) = std::stod(row[static_cast<std::size_t>(c[j])]);
      pts.push_back(v);
    }
    return pts;
  };
  std::vector<int> xi = cols("xi_"), xb = cols("xibar_");
  MetricPointCloud cloud;
  if (!xi.empty()) {
    cloud.factors.push_back(CloudFactor{true, grab(xi)});
    if (!xb.empty()) {
      cloud.factors.push_back(CloudFactor{true, grab(xb)});
      cloud.metric = MetricPointCloud::Metric::product;
    }
    return cloud;
  }
  std::vector<int> x = cols("x_");
  if (x.empty())
    for (int i = 0; i < static_cast<int>(t.header.size()); ++i) x.push_back(i);
  if (x.empty()) throw InputError("cloud file '" + path + "' has no coordinate columns");
  return affine_cloud(grab(x));
}

std::vector<Eigen::VectorXd> synthetic_points(const std::string& kind, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(1);
    if (kind == "segment") {
      v(0) = u(rng);
    } else if (kind == "cantor") {
      double x = 0, scale = 1;
      for (int k = 0; k < 30; ++k) {
        scale /= 3;
        if (u(rng) < 0.5) x += 2 * scale;
      }
      v(0) = x;
    } else {
      throw InputError("unknown --synthetic '" + kind + "' (segment or cantor)");
    }
    pts.push_back(v);
  }
  return pts;
}

int cmd_hdim(const Options& o) {
  Inputs in;
  if (!o.rep.empty()) in = load_inputs(o, true, false);
  Run run("hdim", o, in);
  run.meta().add("chart_variant", std::to_string(o.chart));
  MetricPointCloud cloud;
  if (!o.cloud.empty()) {
    cloud = read_cloud(o.cloud);
    run.meta().add("cloud", o.cloud);
    run.meta().add("cloud_hash", content_hash(read_file(o.cloud)));
  } else if (!o.synthetic.empty()) {
    auto pts = synthetic_points(o.synthetic, o.points, o.seed);
    cloud = affine_cloud(pts);
    run.meta().add("synthetic", o.synthetic);
    run.meta().add("points", std::to_string(o.points));
    std::ostringstream os;
    CsvWriter w(os, {"x_0"});
    for (const auto& p : pts) {
      w.cell(p(0));
      w.end_row();
    }
    run.write_csv("cloud.csv", os.str());
  } else if (in.rho) {
    Group g(*in.pres);
    const Representation& bar = in.rhobar ? *in.rhobar : *in.rho;
    auto samples = sample_flags(g, *in.rho, bar, o, run);
    cloud = in.rhobar ? flag_cloud(samples) : xi_cloud(samples);
  } else {
    throw InputError("hdim needs --cloud, --synthetic, or --rep");
  }
  BoxDimOptions bo;
  bo.seed = o.seed;
  bo.chart_variant = o.chart;
  BoxDimResult b = box_dim(cloud, bo);
  run.write_csv("box.csv", box_csv(b));
  run.write_svg("box.svg", box_dim_svg(b, run.meta_comment()));
  std::ostringstream rep;
  rep << cloud.size() << " points\n" << summarize_box(b);
  run.write_text("hdim.txt", rep.str());
  run.finish(rep.str());
  return 0;
}

int cmd_ndiff(const Options& o) {
  Inputs in = load_inputs(o, true, true);
  Group g(*in.pres);
  Run run("ndiff", o, in);
  NdiffOptions no;
  no.samples = o.samples;
  no.depth = std::min(o.ray_depth, std::max(1, g.max_ray_depth()));
  no.beta = o.beta;
  no.R = o.R;
  no.iso_tol = o.iso_tol;
  no.iso_radius = o.iso_radius;
  no.scan_threshold = o.scan_threshold;
  no.workers = workers(o);
  no.seed = o.seed;
  no.box.seed = o.seed;
  no.exponent = exponent_options(o);
  no.conical.window_lo = o.window_lo;
  no.conical.min_hits = o.min_hits;
  run.meta().add("beta", o.beta);
  run.meta().add("ray_depth", std::to_string(no.depth));
  run.meta().add("samples", std::to_string(no.samples));
  BallData bd = load_ball(g, in, o.depth, o, run);
  std::vector<BoundarySample> samples;
  NdiffReport r = ndiff_dimension(g, *in.rho, *in.rhobar, pairs_of(bd, in), no, &samples);
  run.write_csv("box.csv", box_csv(r.box));
  run.write_svg("box.svg", box_dim_svg(r.box, run.meta_comment()));
  run.write_text("ndiff.txt", r.text());
  run.finish(r.text());
  return 0;
}

int cmd_theoremB(const Options& o) {
  Inputs in = load_inputs(o, true, true);
  Group g(*in.pres);
  Run run("theoremB", o, in);
  run.meta().add("beta", o.beta);
  run.meta().add("iso_tol", o.iso_tol);
  // hypothesis first: refuse before any expensive estimate
  IsospectralReport iso = gap_isospectral_check(g, *in.rho, *in.rhobar, o.iso_radius);
  require_not_isospectral(iso.max_deviation, o.iso_tol);

  BallData bd = load_ball(g, in, o.depth, o, run);
  PairSpectra pairs = pairs_of(bd, in);
  auto cv = [&](const std::vector<double>& v) {
    BothMethods b = estimate_both(v, bd.ball.level_start, o);
    CrossValidatedExponent c;
    c.slope = b.headline();
    c.root = b.root ? *b.root : b.headline();
    return c;
  };
  TheoremBInputs ti;
  ti.h_tau = cv(pairs.tau);
  ti.h_taubar = cv(pairs.taubar);
  ti.h_inf = cv(max_values(pairs, o.beta));
  if (in.rho->dim() == 3 && in.bar_is_dual) {
    ExponentEstimate h = hilbert_entropy(bd.ball, bd.spectra, exponent_options(o));
    ti.h_hilbert = ChainValue{"h_H", h.value, h.residual, true};
  }
  if (o.samples >= 1000 && in.pres->has_circle_boundary()) {
    auto samples = sample_flags(g, *in.rho, *in.rhobar, o, run);
    ConicalOptions co;
    co.beta = o.beta;
    co.R = o.R > 0 ? o.R : default_conical_R(*in.rho, *in.rhobar);
    co.window_lo = o.window_lo;
    co.min_hits = o.min_hits;
    run.meta().add("R", co.R);
    auto verdicts = conical_points(samples, co);
    std::vector<bool> keep(samples.size());
    std::size_t nk = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) nk += (keep[i] = verdicts[i].verdict);
    MetricPointCloud full = flag_cloud(samples);
    BoxDimOptions bo;
    bo.seed = o.seed;
    BoxDimResult all = box_dim(full, bo);
    // chart-invariance tolerance added to the fit error
    ti.curve_dim = ChainValue{"Hff(Xi)", all.dimension, all.stderr_slope + 0.05, true};
    if (nk >= 2) {
      bo.min_points = std::min<std::size_t>(bo.min_points, nk);
      BoxDimResult ext = box_dim(subset(full, keep), bo);
      ti.ext_dim = ChainValue{"Hff(Ext)", ext.dimension, ext.stderr_slope + 0.05, true};
    }
  }
  TheoremBReport r = theoremB_report(ti, o.beta, iso.max_deviation, o.iso_tol);
  std::ostringstream os;
  write_chain_csv(os, r);
  run.write_csv("chain.csv", os.str());
  run.write_text("theoremB.txt", r.text());
  run.finish(r.text());
  return 0;
}

void write_error(const Options& o, const std::string& command, ErrorKind kind, const std::string& msg) {
  std::cerr << "error (" << to_string(kind) << "): " << msg << "\n";
  try {
    std::ostringstream os;
    Metadata m;
    m.add("tool", std::string("anosov-lab ") + kVersion);
    m.add("command", command);
    m.write(os);
    CsvWriter w(os, {"command", "kind", "exit_code", "message"});
    w.cell(command).cell(std::string(to_string(kind))).cell(exit_code(kind)).cell(msg);
    w.end_row();
    write_file_atomic((fs::path(o.out) / "error.csv").string(), os.str());
  } catch (...) {
    // the error CSV is best effort; the exit code still reports the failure
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anosov-lab: spectral, entropy and dimension data for linear representations of hyperbolic groups"};
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--rep", o.rep, "representation: catalog name or file");
  app.add_option("--repbar", o.repbar, "second representation: catalog name, file, or 'dual'");
  app.add_option("--presentation", o.presentation, "presentation file or inline text (e.g. 'surface genus=2')");
  app.add_option("--depth", o.depth, "ball radius N")->capture_default_str();
  app.add_option("--samples", o.samples, "boundary sample count")->capture_default_str();
  app.add_option("--ray-depth", o.ray_depth, "boundary ray depth")->capture_default_str();
  app.add_option("--beta", o.beta, "beta in (0, 1]")->capture_default_str();
  app.add_option("--R", o.R, "conical gap bound (default: 2 x generator step bound)");
  app.add_option("--phi", o.phi, "functional: tau<k>, H, taubar, hinf, min, or s,u")->capture_default_str();
  app.add_option("--method", o.method, "slope-fit, poincare-root, or both")->capture_default_str();
  app.add_option("--window", o.window, "explicit counting window t0,t1")->delimiter(',')->expected(2);
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--cache", o.cache, "enumeration cache directory")->capture_default_str();
  app.add_flag("--no-cache", o.no_cache, "do not read or write the enumeration cache");
  app.add_option("--max-elements", o.max_elements, "element cap for ball enumeration")->capture_default_str();
  app.add_flag("--strict-cap", o.strict_cap, "exit with code 4 instead of lowering the radius at the cap");
  app.add_option("--workers", o.workers, "worker threads (0: hardware concurrency)")->capture_default_str();
  app.add_option("--iso-tol", o.iso_tol, "gap-isospectrality tolerance")->capture_default_str();
  app.add_option("--iso-radius", o.iso_radius, "class length for the isospectrality check")->capture_default_str();
  app.add_option("--threshold", o.threshold, "hyperconvexity determinant floor")->capture_default_str();
  app.add_option("--p", o.hyper_p, "hyperconvexity / local conformality index p")->capture_default_str();
  app.add_option("--angles", o.angles, "Q-curve directions on [0, pi/2]")->capture_default_str();
  app.add_option("--classes", o.classes, "maximal conjugacy class length")->capture_default_str();
  app.add_option("--t", o.t, "intersection period bound (default: truncation-safe)");
  app.add_option("--scan-threshold", o.scan_threshold, "two-scale scan log-ratio threshold")->capture_default_str();
  app.add_option("--cloud", o.cloud, "point cloud CSV for hdim");
  app.add_option("--synthetic", o.synthetic, "synthetic cloud for hdim: segment or cantor");
  app.add_option("--points", o.points, "synthetic cloud size")->capture_default_str();
  app.add_option("--chart", o.chart, "affine chart variant for box counting")->capture_default_str();
  app.add_option("--window-lo", o.window_lo, "first depth of the conical window")->capture_default_str();
  app.add_option("--min-hits", o.min_hits, "conical hits required in the window")->capture_default_str();

  std::map<std::string, std::function<int()>> commands = {
      {"catalog", [&] { return cmd_catalog(o); }},
      {"ball", [&] { return cmd_ball(o); }},
      {"verify", [&] { return cmd_verify(o); }},
      {"limitset", [&] { return cmd_limitset(o, false); }},
      {"flagcurve", [&] { return cmd_limitset(o, true); }},
      {"qcurve", [&] { return cmd_qcurve(o); }},
      {"entropy", [&] { return cmd_entropy(o); }},
      {"intersection", [&] { return cmd_intersection(o); }},
      {"conical", [&] { return cmd_conical(o); }},
      {"hdim", [&] { return cmd_hdim(o); }},
      {"ndiff", [&] { return cmd_ndiff(o); }},
      {"theoremB", [&] { return cmd_theoremB(o); }},
  };
  const std::map<std::string, std::string> help = {
      {"catalog", "list built-in representations, or write one (--rep NAME --out FILE|-)"},
      {"ball", "enumerate a ball with per-element spectra"},
      {"verify", "relation, domination, hyperconvexity and isospectrality reports"},
      {"limitset", "boundary samples of the limit curve"},
      {"flagcurve", "paired boundary samples with the two-scale scan"},
      {"qcurve", "critical curve in span{tau, taubar} and phi_inf"},
      {"entropy", "critical exponent of a functional"},
      {"intersection", "dynamical intersection from conjugacy classes"},
      {"conical", "beta-conical verdicts and the cover estimate"},
      {"hdim", "box-counting dimension of a cloud"},
      {"ndiff", "dimension of the 1-conical flagged set against h_inf,1"},
      {"theoremB", "inequality chain report"},
  };
  for (const auto& [name, text] : help) app.add_subcommand(name, text);

  std::string command;
  try {
    app.parse(argc, argv);
    command = app.get_subcommands().front()->get_name();
    validate(o);
    return commands.at(command)();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const Error& e) {
    write_error(o, command, e.kind(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    write_error(o, command, ErrorKind::internal, e.what());
    return 1;
  }
}
