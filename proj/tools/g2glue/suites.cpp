#include "suites.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "g2glue/cone_spectral.hpp"
#include "g2glue/eguchi_hanson.hpp"
#include "g2glue/errors.hpp"
#include "g2glue/exterior_algebra.hpp"
#include "g2glue/kummer.hpp"
#include "g2glue/torus_solver.hpp"

namespace g2glue::cli {

namespace {

namespace anchor {
constexpr const char* kFixedSets = "fixed-point sets of the elements of Gamma = Z2^3 on T^7";
constexpr const char* kSingular = "singular set of T^7/Gamma: twelve disjoint components, free residual action";
constexpr const char* kInvariantForm = "Gamma preserves the flat G2-structure";
constexpr const char* kTripleClosed = "Eguchi-Hanson hyperkaehler triple is closed";
constexpr const char* kHarmonic = "nu = d lambda is closed and anti-self-dual";
constexpr const char* kTau = "d tau1 = omega1(k) - omega1(0)";
constexpr const char* kAsd = "right-invariant triple is closed and anti-self-dual";
constexpr const char* kAle = "ALE estimate |tau1| <= c k (k^(1/4) + r^(1/2))^-3 with c = 4";
constexpr const char* kNuDecay = "nu decays at rate -4 in the weight w_t";
constexpr const char* kRescaling = "weighted Hoelder norms are invariant under the dilation s_t";
constexpr const char* kConeRates = "critical rates of homogeneous harmonic forms on the cone over SO(3)";
constexpr const char* kLogKernel = "kernel at a critical rate contains no log r terms";
constexpr const char* kIndex = "index of the weighted Laplacian jumps by the kernel dimension at critical rates";
constexpr const char* kSpectrum = "Laplacian spectrum of S^3 and its SO(3) quotient";
constexpr const char* kR4 = "homogeneous harmonic 2-forms of order -2 on R^4 minus the origin";
constexpr const char* kThetaQuadratic = "Theta(phi + chi) = *phi - T(chi) - F(chi) with F quadratic in chi";
constexpr const char* kThetaLinear = "T is linear in chi";
constexpr const char* kMetric = "phi0 induces the Euclidean metric";
constexpr const char* kTorsionLaw = "torsion of the glued structure is O(t^4), also in weighted C0_(beta-2;t)";
constexpr const char* kSupport = "torsion of the glued structure is supported where the cutoff varies";
constexpr const char* kApproxKernel = "approximate kernel has dimension 12 + b2";
constexpr const char* kExistence = "torsion-free perturbation of a small-torsion closed G2-structure";
constexpr const char* kClass = "the torsion-free structure stays in the cohomology class of phi";
constexpr const char* kNaive = "weighted torsion estimate of the glued structure with interpolation parameter B";
constexpr const char* kBestB = "B = -1/5 optimises the glued torsion estimate";
constexpr const char* kFeasible = "existence hypothesis kappa > 1 - beta + alpha and L-infinity exponent kappa + beta - 1";
constexpr const char* kRefined = "optimal torsion estimate of the corrected structure";
constexpr const char* kLinearEstimate = "t-uniform weighted estimate for the inverse Laplacian on the resolution";
}  // namespace anchor

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

cone::LinkSpectrum make_link(const ConeSettings& s) {
  const cone::Rational ceiling = cone::parse_rational(s.ceiling);
  return s.link == "s3" ? cone::LinkSpectrum::s3(ceiling) : cone::LinkSpectrum::so3(ceiling);
}

cone::EpsRational parse_eps(const std::string& v, const std::string& symbolic) {
  if (v == symbolic) return symbolic.front() == '-' ? -cone::EpsRational::eps() : cone::EpsRational::eps();
  return cone::EpsRational(cone::parse_rational(v));
}

json rate_list(const std::vector<std::pair<cone::Surd, long>>& dims) {
  json out = json::object();
  for (const auto& [lambda, d] : dims) out[lambda.str()] = d;
  return out;
}

// ---------------------------------------------------------------- Eguchi-Hanson

struct EhIdentities {
  double closed = 0.0, dlambda = 0.0, dnu = 0.0, tau = 0.0, star_nu = 0.0, asd_closed = 0.0, asd_star = 0.0;
};

double anti_self_duality(const eh::RadialForm& f, double r) {
  const ext::Form o = f.orthonormal(r);
  return (eh::hodge_star_at(f, r) + o).max_abs() / o.max_abs();
}

EhIdentities eh_identities(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lk(-4.0, 0.0), lr(-3.0, 3.0);
  EhIdentities w;
  for (std::size_t i = 0; i < samples; ++i) {
    const double k = std::pow(10.0, lk(rng));
    const double r = std::pow(10.0, lr(rng));
    const eh::ChartPtr chart = eh::make_chart(k);
    const eh::Triple t = eh::hyperkaehler_triple(chart);
    const eh::HarmonicForms h = eh::harmonic_forms(chart);
    for (const eh::RadialForm* f : {&t.w1, &t.w2, &t.w3})
      w.closed = std::max(w.closed, eh::relative_residual(eh::exterior_derivative(*f), r));
    w.dlambda = std::max(w.dlambda, eh::relative_residual(eh::exterior_derivative(h.lambda) - h.nu, r));
    w.dnu = std::max(w.dnu, eh::relative_residual(eh::exterior_derivative(h.nu), r));
    w.tau = std::max(w.tau,
                     eh::relative_residual(eh::exterior_derivative(h.tau1) - (t.w1 - eh::flat_w1(chart)), r));
    w.star_nu = std::max(w.star_nu, anti_self_duality(h.nu, r));
    const eh::Triple hat = eh::asd_triple(k);
    for (const eh::RadialForm* f : {&hat.w1, &hat.w2, &hat.w3}) {
      w.asd_closed = std::max(w.asd_closed, eh::relative_residual(eh::exterior_derivative(*f), r));
      w.asd_star = std::max(w.asd_star, anti_self_duality(*f, r));
    }
  }
  return w;
}

double rescaling_discrepancy(double t) {
  const auto grid = eh::geometric_grid(1e-3, 1e3, 120);
  const eh::HarmonicForms h = eh::harmonic_forms(std::pow(t, 4));
  double worst = eh::rescaling_invariance_check(h.nu, -4.0, t, grid).discrepancy;
  eh::RadialForm c(eh::make_chart(std::pow(t, 4)), 2);
  c.add("12", eh::RadialFunction(1.0, 1.0, -0.5));
  worst = std::max(worst, eh::rescaling_invariance_check(c, 0.0, t, grid).discrepancy);
  return worst;
}

// ---------------------------------------------------------------- Theta expansion

Report theta_expansion() {
  Report rep;
  rep.suite = "theta expansion";
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  auto random_unit = [&] {
    ext::Form f(7, 3);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = n01(rng);
    return (1.0 / f.norm()) * f;
  };
  const std::vector<double> s_list{1e-1, 1e-2, 1e-3, 1e-4};
  const ext::Form phi = ext::phi0();
  double min_slope = std::numeric_limits<double>::infinity(), max_slope = -min_slope, linearity = 0.0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ext::Form previous = random_unit();
  for (int trial = 0; trial < 20; ++trial) {
    const ext::Form chi = random_unit();
    std::vector<double> f_norm;
    for (double s : s_list) f_norm.push_back(ext::theta_split(phi, s * chi).f_of_chi.norm());
    const double slope = eh::log_log_slope(s_list, f_norm);
    min_slope = std::min(min_slope, slope);
    max_slope = std::max(max_slope, slope);
    const double a = u(rng), b = u(rng);
    const ext::Form lhs = ext::theta_linear(phi, a * chi + b * previous);
    const ext::Form rhs = a * ext::theta_linear(phi, chi) + b * ext::theta_linear(phi, previous);
    linearity = std::max(linearity, (lhs - rhs).max_abs());
    for (double s : s_list)
      linearity = std::max(linearity, (ext::theta_linear(phi, s * chi) - s * ext::theta_linear(phi, chi)).max_abs());
    previous = chi;
  }
  const double dev = std::max(std::abs(min_slope - 2.0), std::abs(max_slope - 2.0));
  rep.add(verdict("|F(s chi)| log-log slope over 20 random chi, s in 1e-1..1e-4", dev <= 0.05,
                  {{"min", min_slope}, {"max", max_slope}}, 2.0, 0.05, anchor::kThetaQuadratic));
  rep.add(verdict("T linearity defect", linearity <= 1e-10, linearity, 0.0, 1e-10, anchor::kThetaLinear));
  const ext::G2Metric m = ext::metric_from_g2(phi);
  const double id_err = (m.g.matrix() - ext::Matrix::Identity(7, 7)).cwiseAbs().maxCoeff();
  rep.add(verdict("metric_from_g2(phi0) - identity", id_err <= 1e-12 && m.orientation == 1, id_err, 0.0, 1e-12,
                  anchor::kMetric));
  return rep;
}

// ---------------------------------------------------------------- cone criterion

Report cone_criterion() {
  using cone::Interval;
  using cone::Rational;
  Report rep;
  rep.suite = "cone critical rates";
  const auto so3 = cone::LinkSpectrum::so3(400);
  const auto deg1 = cone::rate_dimensions(cone::critical_rates(so3, 1, Interval::half_open(-2, 0)));
  rep.add(verdict("degree-1 rates in [-2, 0)", deg1.empty(), rate_list(deg1), json::object(), 0, anchor::kConeRates));
  const Rational delta = Rational(1) / 10;
  const auto deg2 = cone::rate_dimensions(cone::critical_rates(so3, 2, Interval::half_open(-4 + delta, 0)));
  const bool deg2_ok = deg2.size() == 1 && deg2[0].first == cone::Surd(-2) && deg2[0].second == 6;
  rep.add(verdict("degree-2 rates in [-4 + 1/10, 0)", deg2_ok, rate_list(deg2), {{"-2", 6}}, 0, anchor::kConeRates));
  const bool log_ok = cone::log_kernel_check(so3, cone::Surd(-2), 2);
  rep.add(verdict("log-kernel check at -2", log_ok, log_ok, true, 0, anchor::kLogKernel));
  const long jump = cone::index_change(so3, 2, Rational(-5) / 2, Rational(-3) / 2);
  rep.add(verdict("index jump across -2 (from -5/2 to -3/2)", jump == 6, jump, 6, 0, anchor::kIndex));
  return rep;
}

// ---------------------------------------------------------------- Kummer torsion

double support_violation(const std::vector<double>& t_list, json& detail) {
  const double z = kummer::kZeta;
  double worst = 0.0;
  detail = json::array();
  for (double t : t_list) {
    const kummer::GluingModel model(t);
    double sup = 0.0;
    for (double s : {z / 32, z / 16, z / 8, 3 * z / 16, 0.249 * z, 0.501 * z, 5 * z / 8, 3 * z / 4, 7 * z / 8, z}) {
      double v;
      try {
        v = model.torsion_norm(kummer::radius_at_distance(s));
      } catch (const NotG2Error&) {
        v = std::numeric_limits<double>::infinity();
      }
      sup = std::max(sup, v);
    }
    detail.push_back({{"t", t}, {"sup_outside_annulus", finite_or_null(sup)}});
    worst = std::max(worst, sup);
  }
  return worst;
}

json fit_json(const kummer::TorsionFit& fit) {
  json rows = json::array();
  for (const auto& r : fit.rows)
    rows.push_back({{"t", r.t},
                    {"admissible", r.admissible},
                    {"first_failure_s", r.first_failure},
                    {"sup_psi", r.sup_psi},
                    {"sup_grad_psi", r.sup_grad_psi},
                    {"weighted_c0", r.weighted},
                    {"sup_ale", r.sup_ale}});
  auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  return {{"rows", rows},
          {"t0", opt(fit.t0)},
          {"slope", opt(fit.slope)},
          {"weighted_slope", opt(fit.weighted_slope)},
          {"ale_slope", opt(fit.ale_slope)}};
}

// ---------------------------------------------------------------- acceptance helpers

struct Criterion {
  int number;
  std::string title;
  double budget_s;
  std::string anchor;
};

/// Folds a sub-report into one criterion line: pass iff no sub-check fails and the budget holds.
Check fold(const Criterion& c, const Report& sub, double seconds) {
  json measured = json::object(), expected = json::object(), tolerance = json::object();
  std::vector<std::string> failing;
  for (const auto& chk : sub.checks) {
    if (chk.status == Status::Reported) continue;
    measured[chk.name] = chk.measured;
    expected[chk.name] = chk.expected;
    tolerance[chk.name] = chk.tolerance;
    if (chk.status == Status::Fail) failing.push_back(chk.name);
  }
  tolerance["time_budget_s"] = c.budget_s;
  const bool in_budget = seconds <= c.budget_s;
  if (!in_budget) failing.push_back("time budget");
  if (!failing.empty()) measured["failing"] = failing;
  Check out{"criterion " + std::to_string(c.number) + ": " + c.title,
            failing.empty() ? Status::Pass : Status::Fail,
            std::move(measured),
            std::move(expected),
            std::move(tolerance),
            c.anchor};
  return out;
}

json sub_report_json(const Report& sub) {
  json j = to_json(sub);
  j.erase("environment");
  j.erase("schema");
  j.erase("timing");
  return j;
}

}  // namespace

// ---------------------------------------------------------------- suites

Report eh_verify(const RunConfig& cfg) {
  Report rep;
  rep.suite = "eh verify";
  const auto start = Clock::now();
  const EhIdentities w = eh_identities(cfg.eh.samples, cfg.eh.seed);
  const std::string at = " at " + std::to_string(cfg.eh.samples) + " random (k, r)";
  rep.add(verdict("d omega_i = 0" + at, w.closed <= 1e-10, w.closed, 0.0, 1e-10, anchor::kTripleClosed));
  rep.add(verdict("d lambda = nu" + at, w.dlambda <= 1e-10, w.dlambda, 0.0, 1e-10, anchor::kHarmonic));
  rep.add(verdict("d nu = 0" + at, w.dnu <= 1e-10, w.dnu, 0.0, 1e-10, anchor::kHarmonic));
  rep.add(verdict("d tau1 = omega1(k) - omega1(0)" + at, w.tau <= 1e-10, w.tau, 0.0, 1e-10, anchor::kTau));
  rep.add(verdict("*nu = -nu" + at, w.star_nu <= 1e-10, w.star_nu, 0.0, 1e-10, anchor::kHarmonic));
  rep.add(verdict("*hat omega_i = -hat omega_i" + at, w.asd_star <= 1e-10, w.asd_star, 0.0, 1e-10, anchor::kAsd));
  rep.add(verdict("d hat omega_i = 0" + at, w.asd_closed <= 1e-10, w.asd_closed, 0.0, 1e-10, anchor::kAsd));

  rep.add(reported("rank of the six-form Gram matrix at (k, r) = (1, 2)", eh::six_form_rank(1.0, 2.0), anchor::kAsd));
  const eh::SphereGeometry sphere = eh::sphere_geometry(1.0);
  rep.add(reported("exceptional sphere at k = 1", {{"diameter", sphere.diameter}, {"area", sphere.volume}},
                   "exceptional sphere of the Eguchi-Hanson metric has size proportional to k^(1/4)"));
  rep.add(reported("radial distance constant d(r) / sqrt(r) at k = 1, r = 1e6",
                   eh::radial_distance(1.0, 1e6) / std::sqrt(1e6), "distance to the exceptional sphere"));
  rep.add(reported("dilation pullback error g(16) vs g(1) at r = 2", eh::scaling_pullback_check(16.0, 1.0, 2.0),
                   anchor::kRescaling));
  rep.add(reported("rescaling invariance discrepancy at t = " + fmt(cfg.eh.t), rescaling_discrepancy(cfg.eh.t),
                   anchor::kRescaling));
  rep.data = {{"samples", cfg.eh.samples}, {"seed", cfg.eh.seed}};
  rep.timing["total"] = seconds_since(start);
  return rep;
}

Report eh_decay(const RunConfig& cfg) {
  Report rep;
  rep.suite = "eh decay";
  const auto start = Clock::now();
  std::ostringstream ale, nu;
  ale << std::setprecision(17) << "k,r,value,bound,ratio\n";
  nu << std::setprecision(17) << "k,r,w,nu_norm\n";
  json sups = json::object(), slopes = json::object();
  bool ale_ok = true, slope_ok = true;
  const auto radii = eh::geometric_grid(cfg.eh.r_min, cfg.eh.r_max, cfg.eh.grid);
  const auto far = eh::geometric_grid(1e2, 1e6, 60);
  for (double k : cfg.eh.k_list) {
    double sup = 0.0;
    for (double r : radii) {
      const double ratio = eh::ale_decay_ratio(k, r);
      const double bound = k * std::pow(std::pow(k, 0.25) + std::sqrt(r), -3.0);
      sup = std::max(sup, ratio);
      ale << k << ',' << r << ',' << ratio * bound << ',' << bound << ',' << ratio << '\n';
    }
    sups[fmt(k)] = sup;
    ale_ok = ale_ok && sup <= 4.0;

    const eh::HarmonicForms h = eh::harmonic_forms(k);
    const double t = std::pow(k, 0.25);
    std::vector<double> w, v;
    for (double r : far) {
      w.push_back(t + eh::radial_distance(k, r));
      v.push_back(h.nu.pointwise_norm(r));
      nu << k << ',' << r << ',' << w.back() << ',' << v.back() << '\n';
    }
    const double slope = eh::log_log_slope(w, v);
    slopes[fmt(k)] = slope;
    slope_ok = slope_ok && std::abs(slope + 4.0) <= 0.05;
  }
  rep.add(verdict("sup over k and r in [" + fmt(cfg.eh.r_min) + ", " + fmt(cfg.eh.r_max) +
                      "] of |tau1| / (k (k^(1/4) + sqrt r)^-3)",
                  ale_ok, sups, "<= 4", 0, anchor::kAle));
  rep.add(verdict("|nu_k| log-slope against w = k^(1/4) + d(r), r in [1e2, 1e6]", slope_ok, slopes, -4.0, 0.05,
                  anchor::kNuDecay));
  rep.tables.push_back({"ale", "g2glue.ale/1", ale.str()});
  rep.tables.push_back({"nu", "g2glue.nu/1", nu.str()});
  rep.data = {{"k_list", cfg.eh.k_list}, {"grid", cfg.eh.grid}};
  rep.timing["total"] = seconds_since(start);
  return rep;
}

Report cone_rates(const RunConfig& cfg) {
  Report rep;
  rep.suite = "cone rates";
  const auto start = Clock::now();
  const auto link = make_link(cfg.cone);
  const auto from = cone::parse_rational(cfg.cone.from), to = cone::parse_rational(cfg.cone.to);
  const auto rates = cone::critical_rates(link, cfg.cone.degree, cone::Interval::open(from, to));
  const auto dims = cone::rate_dimensions(rates);
  std::ostringstream csv;
  csv << "lambda,degree,case,eigenvalue,dimension\n";
  json cases = json::array();
  for (const auto& r : rates) {
    cases.push_back({{"lambda", r.lambda.str()},
                     {"case", cone::to_string(r.tag)},
                     {"eigenvalue", cone::to_string(r.eigenvalue)},
                     {"dimension", r.dimension}});
    csv << csv_field(r.lambda.str()) << ',' << r.degree << ',' << cone::to_string(r.tag) << ','
        << cone::to_string(r.eigenvalue) << ',' << r.dimension << '\n';
  }
  rep.add(reported("degree-" + std::to_string(cfg.cone.degree) + " critical rates in (" + cfg.cone.from + ", " +
                       cfg.cone.to + ") on the cone over " + link.name,
                   rate_list(dims), anchor::kConeRates));
  for (const auto& [lambda, d] : dims) {
    const bool ok = cone::log_kernel_check(link, lambda, cfg.cone.degree);
    rep.add(verdict("log-kernel check at " + lambda.str(), ok, ok, true, 0, anchor::kLogKernel));
  }
  rep.tables.push_back({"rates", "g2glue.rates/1", csv.str()});
  rep.data = {{"link", link.name},
              {"degree", cfg.cone.degree},
              {"window", {cfg.cone.from, cfg.cone.to}},
              {"rates", rate_list(dims)},
              {"cases", cases}};
  rep.timing["total"] = seconds_since(start);
  return rep;
}

Report cone_index(const RunConfig& cfg) {
  Report rep;
  rep.suite = "cone index";
  const auto start = Clock::now();
  const auto link = make_link(cfg.cone);
  const auto a = cone::parse_rational(cfg.cone.index_from), b = cone::parse_rational(cfg.cone.index_to);
  const long jump = cone::index_change(link, cfg.cone.degree, a, b);
  const auto dims = cone::rate_dimensions(cone::critical_rates(link, cfg.cone.degree, cone::Interval::open(a, b)));
  long enclosed = 0;
  for (const auto& [lambda, d] : dims) enclosed += d;
  rep.add(verdict("index change from " + cfg.cone.index_from + " to " + cfg.cone.index_to +
                      " equals the enclosed kernel dimension",
                  jump == enclosed, jump, enclosed, 0, anchor::kIndex));
  for (const auto& [lambda, d] : dims) {
    const bool ok = cone::log_kernel_check(link, lambda, cfg.cone.degree);
    rep.add(verdict("log-kernel check at " + lambda.str(), ok, ok, true, 0, anchor::kLogKernel));
  }
  rep.data = {{"link", link.name},
              {"degree", cfg.cone.degree},
              {"from", cfg.cone.index_from},
              {"to", cfg.cone.index_to},
              {"index_change", jump},
              {"rates", rate_list(dims)}};
  rep.timing["total"] = seconds_since(start);
  return rep;
}

Report cone_oracle(const RunConfig&) {
  Report rep;
  rep.suite = "cone oracle";
  const auto start = Clock::now();
  json spectrum = json::array();
  bool spectrum_ok = true;
  std::set<cone::Rational> even;
  for (int m = 0; m <= 8; ++m) {
    const auto r = cone::s3_function_spectrum_check(m);
    spectrum_ok = spectrum_ok && r.eigenvalue == m * (m + 2) && r.residual == 0.0 && r.harmonic &&
                  r.parity == (m % 2 == 0 ? 1 : -1);
    spectrum.push_back({{"m", m}, {"eigenvalue", cone::to_string(r.eigenvalue)}, {"parity", r.parity},
                        {"residual", r.residual}});
    if (r.parity == 1 && r.eigenvalue <= 24) even.insert(r.eigenvalue);
  }
  rep.add(verdict("S^3 eigenvalues m(m+2), m <= 8, zero polynomial residual", spectrum_ok, spectrum,
                  "m(m+2)", 0, anchor::kSpectrum));
  std::set<cone::Rational> table;
  for (const auto& e : cone::LinkSpectrum::so3(25).entries(0))
    if (e.eigenvalue <= 24) table.insert(e.eigenvalue);
  const std::set<cone::Rational> want{0, 8, 24};
  json got = json::array();
  for (const auto& q : even) got.push_back(cone::to_string(q));
  rep.add(verdict("even-parity eigenvalues <= 24 (SO(3) functions)", even == want && table == want, got,
                  json::array({"0", "8", "24"}), 0, anchor::kSpectrum));

  const auto six = cone::order_minus_two_candidates();
  json residuals = json::object();
  bool six_ok = six.size() == 6;
  for (const auto& c : six) {
    const auto r = cone::harmonic_oracle_r4(c);
    residuals[c.name] = r.residual;
    six_ok = six_ok && r.residual == 0.0 && r.order == -2;
  }
  rep.add(verdict("six order -2 2-forms harmonic on R^4 minus 0", six_ok, residuals, 0.0, 0, anchor::kR4));
  const auto neg = cone::harmonic_oracle_r4(cone::perturbed_candidate());
  rep.add(verdict("perturbed candidate is rejected", neg.residual > 0.0, neg.residual, "> 0", 0, anchor::kR4));
  const auto nu = cone::harmonic_oracle_r4(cone::nu_flat_limit());
  rep.add(reported("flat limit of nu", {{"residual", nu.residual}, {"order", cone::to_string(nu.order)}},
                   anchor::kR4));
  rep.timing["total"] = seconds_since(start);
  return rep;
}

Report rates_jk(const RunConfig& cfg) {
  using cone::EpsRational;
  using cone::Rational;
  Report rep;
  rep.suite = "rates jk";
  const auto start = Clock::now();
  const EpsRational beta = parse_eps(cfg.rates.beta, "-eps");
  const EpsRational alpha = parse_eps(cfg.rates.alpha, "eps");
  const Rational b = cone::parse_rational(cfg.rates.b);
  const EpsRational weight = EpsRational(2) - beta;
  auto str = [](const std::optional<EpsRational>& x) { return x ? json(x->str()) : json(nullptr); };

  const auto naive = cone::jk_rate_bound(cone::naive_jk_table(b), weight);
  const EpsRational naive_expected = EpsRational(Rational(4) / 5) * weight;
  if (b == Rational(-1) / 5)
    rep.add(verdict("naive table weighted torsion exponent at B = -1/5", naive.exponent == naive_expected,
                    str(naive.exponent), naive_expected.str(), 0, anchor::kNaive));
  else
    rep.add(reported("naive table weighted torsion exponent at B = " + cfg.rates.b, str(naive.exponent),
                     anchor::kNaive));

  std::vector<Rational> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(Rational(-i) / 20);
  const auto best = cone::best_interpolation_parameter(grid, weight);
  rep.add(verdict("optimal B over the grid -1, -19/20, ..., 0", best.first == Rational(-1) / 5,
                  {{"B", cone::to_string(best.first)}, {"exponent", best.second.str()}}, "-1/5", 0,
                  anchor::kBestB));

  const EpsRational kappa(Rational(8) / 5);
  const bool admissible = cone::kappa_admissible(kappa, beta, alpha);
  const EpsRational linf = cone::l_infinity_exponent(kappa, beta);
  const EpsRational linf_expected = EpsRational(Rational(3) / 5) + beta;
  rep.add(verdict("kappa = 8/5 satisfies kappa > 1 - beta + alpha", admissible, admissible, true, 0,
                  anchor::kFeasible));
  rep.add(verdict("L-infinity exponent at kappa = 8/5", linf == linf_expected, linf.str(), linf_expected.str(), 0,
                  anchor::kFeasible));

  const auto refined = cone::jk_rate_bound(cone::refined_jk_table(), weight);
  const EpsRational stated(Rational(13) / 5);
  rep.add(verdict("refined table weighted torsion exponent", refined.exponent == stated, str(refined.exponent),
                  stated.str(), 0, anchor::kRefined));
  const EpsRational refined_linf_expected = EpsRational(Rational(8) / 5) + beta;
  const auto refined_linf =
      refined.exponent ? std::optional<EpsRational>(cone::l_infinity_exponent(*refined.exponent, beta)) : std::nullopt;
  rep.add(verdict("L-infinity exponent from the refined table", refined_linf == refined_linf_expected,
                  str(refined_linf), refined_linf_expected.str(), 0, anchor::kRefined));
  rep.add(reported("refined table dominant region", refined.dominant_region, anchor::kRefined));
  rep.data = {{"beta", beta.str()},
              {"alpha", alpha.str()},
              {"B", cone::to_string(b)},
              {"naive", {{"exponent", str(naive.exponent)}, {"dominant_region", naive.dominant_region}}},
              {"refined", {{"exponent", str(refined.exponent)}, {"dominant_region", refined.dominant_region}}}};
  rep.timing["total"] = seconds_since(start);
  return rep;
}

Report kummer_fixed_points(const RunConfig&) {
  Report rep;
  rep.suite = "kummer fixed-points";
  const auto start = Clock::now();
  json counts = json::object(), expected = json::object();
  bool counts_ok = true;
  for (const auto& g : kummer::gamma_elements()) {
    if (g.is_identity()) continue;
    const kummer::FixedSet f = kummer::fixed_point_tori(g);
    const long n = f.whole_torus ? -1 : static_cast<long>(f.tori.size());
    const long want = g.name.find('*') == std::string::npos ? 16 : 0;
    counts[g.name] = n;
    expected[g.name] = want;
    counts_ok = counts_ok && n == want;
  }
  rep.add(verdict("fixed 3-tori per group element", counts_ok, counts, expected, 0, anchor::kFixedSets));
  const kummer::SingularSet s = kummer::singular_components();
  bool orbits_ok = true;
  json components = json::array();
  for (const auto& c : s.components) {
    orbits_ok = orbits_ok && c.orbit.size() == 4;
    json tori = json::array();
    for (const auto& t : c.orbit) tori.push_back(t.str());
    components.push_back({{"id", c.id}, {"generator", c.generator}, {"tori", tori}});
  }
  const long n_components = static_cast<long>(s.components.size());
  rep.add(verdict("singular components", n_components == 12, n_components, 12, 0, anchor::kSingular));
  rep.add(verdict("free orbits of size 4", orbits_ok && s.free_action, orbits_ok && s.free_action, true, 0,
                  anchor::kSingular));
  rep.add(verdict("each generator stabilises its own tori", s.stabilised, s.stabilised, true, 0, anchor::kSingular));
  rep.add(verdict("the 48 fixed tori are pairwise disjoint", s.disjoint, s.disjoint, true, 0, anchor::kSingular));
  double invariance = 0.0;
  const ext::Form phi = kummer::invariant_three_form();
  for (const auto& g : kummer::gamma_elements())
    invariance = std::max(invariance, (kummer::pullback(g, phi) - phi).max_abs());
  rep.add(verdict("group preserves the invariant 3-form", invariance == 0.0, invariance, 0.0, 0,
                  anchor::kInvariantForm));
  json betti = json::array();
  for (int p = 0; p <= 7; ++p) betti.push_back(kummer::invariant_betti(p));
  rep.add(reported("Betti numbers of T^7/Gamma", betti, "invariant cohomology of the orbifold"));
  rep.data = {{"counts", counts}, {"components", components}, {"betti", betti}};
  rep.timing["total"] = seconds_since(start);
  return rep;
}

Report kummer_torsion(const RunConfig& cfg) {
  Report rep;
  rep.suite = "kummer torsion";
  const auto start = Clock::now();
  kummer::TorsionFitSpec spec;
  spec.t_list = cfg.kummer.t_list;
  spec.samples = cfg.kummer.samples;
  spec.beta = cfg.kummer.beta;
  spec.alpha = cfg.kummer.alpha;
  spec.seed = cfg.kummer.seed;
  const kummer::TorsionFit fit = kummer::torsion_decay_fit(spec);
  auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  std::size_t admissible = 0;
  for (const auto& r : fit.rows) admissible += r.admissible ? 1 : 0;
  rep.add(verdict("sup|psi^t| log-log slope", fit.slope && *fit.slope >= 3.9 && *fit.slope <= 4.1, opt(fit.slope),
                  "[3.9, 4.1]", nullptr, anchor::kTorsionLaw));
  rep.add(verdict("weighted C0_(beta-2;t) slope, beta = " + fmt(cfg.kummer.beta),
                  fit.weighted_slope && *fit.weighted_slope >= 3.9, opt(fit.weighted_slope), ">= 3.9", nullptr,
                  anchor::kTorsionLaw));
  json detail;
  const double outside = support_violation(cfg.kummer.t_list, detail);
  rep.add(verdict("|psi^t| outside zeta/4 < s < zeta/2", outside <= 1e-14, finite_or_null(outside), 0.0, 1e-14,
                  anchor::kSupport));
  const double t_min = *std::min_element(cfg.kummer.t_list.begin(), cfg.kummer.t_list.end());
  const int dim = kummer::ApproximateKernel(t_min, cfg.kummer.b2).span_dimension();
  rep.add(verdict("approximate kernel dimension", dim == 12 + cfg.kummer.b2, dim, 12 + cfg.kummer.b2, 0,
                  anchor::kApproxKernel));
  rep.add(reported("admissible rows (phi^t positive on the annulus)",
                   {{"admissible", admissible}, {"rows", fit.rows.size()}, {"t0", opt(fit.t0)}},
                   "the glued 3-form is a G2-structure for t small"));
  rep.add(reported("|d tau1| log-log slope on the annulus", opt(fit.ale_slope), anchor::kAle));
  rep.tables.push_back({"torsion", "g2glue.torsion/1", fit.csv()});
  rep.data = fit_json(fit);
  rep.data["support"] = detail;
  rep.data["samples"] = cfg.kummer.samples;
  rep.data["beta"] = cfg.kummer.beta;
  rep.data["b2"] = cfg.kummer.b2;
  rep.timing["total"] = seconds_since(start);
  return rep;
}

Report torus_solve(const RunConfig& cfg) {
  Report rep;
  rep.suite = "torus solve";
  const auto start = Clock::now();
  const torus::SolverConfig& sc = cfg.torus;
  const torus::Solution sol = torus::solve(sc);
  const torus::SolveReport& r = sol.report;
  rep.add(verdict("|d Theta(phi~)|_inf (converged within max_iter = " + std::to_string(sc.max_iter) + ")",
                  r.converged && r.residual <= sc.tol, r.residual, 0.0, sc.tol, anchor::kExistence));
  rep.add(verdict("|phi~ - phi0|_inf", r.distance_to_flat <= sc.tol, r.distance_to_flat, 0.0, sc.tol,
                  anchor::kExistence));
  rep.add(verdict("zero mode of phi~ - phi0", r.zero_mode_error == 0.0, r.zero_mode_error, 0.0, 0,
                  anchor::kClass));
  rep.add(reported("iterations", r.iterations, anchor::kExistence));
  if (r.flat_iterations > 0)
    rep.add(reported("flat-background stage",
                     {{"iterations", r.flat_iterations},
                      {"residual", r.flat_residual},
                      {"distance_to_flat", r.flat_distance},
                      {"fell_back", r.fell_back}},
                     anchor::kExistence));
  if (!r.failure.empty()) rep.add(reported("failure", r.failure, anchor::kExistence));

  json history = json::array();
  std::ostringstream csv;
  csv << std::setprecision(17) << "iteration,mode,step,residual\n";
  for (const auto& h : r.history) {
    history.push_back({{"iteration", h.iteration}, {"mode", h.mode}, {"step", h.step}, {"residual", h.residual}});
    csv << h.iteration << ',' << h.mode << ',' << h.step << ',' << h.residual << '\n';
  }
  rep.tables.push_back({"history", "g2glue.history/1", csv.str()});
  rep.data = {{"config",
               {{"n", sc.n},
                {"eps", sc.eps},
                {"seed", sc.seed},
                {"tol", sc.tol},
                {"max_iter", sc.max_iter},
                {"mode", torus::to_string(sc.mode)},
                {"fallback", sc.fallback}}},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"residual", r.residual},
              {"distance_to_flat", r.distance_to_flat},
              {"contraction_factors", r.contraction_factors},
              {"zero_mode_error", r.zero_mode_error},
              {"grid_mean_error", r.grid_mean_error},
              {"compatibility_gap", r.compatibility_gap},
              {"max_sigma_zero_mode", r.max_sigma_zero_mode},
              {"flat_iterations", r.flat_iterations},
              {"flat_residual", r.flat_residual},
              {"flat_distance", r.flat_distance},
              {"fell_back", r.fell_back},
              {"final_mode", r.final_mode},
              {"failure", r.failure},
              {"history", history}};

  if (!cfg.torus_dump.empty()) {
    const torus::ModelProblem problem = torus::make_model_problem(sc);
    const torus::GridField phi_tilde = problem.phi + torus::inverse(torus::exterior_derivative(sol.eta));
    std::ostringstream os(std::ios::binary);
    torus::write_field(os, phi_tilde);
    write_atomic(cfg.torus_dump, os.str());
    rep.data["dump"] = cfg.torus_dump;
  }
  rep.timing["total"] = seconds_since(start);
  return rep;
}

// ---------------------------------------------------------------- acceptance

Report acceptance(const CheckSink& sink) {
  Report rep;
  rep.suite = "all";
  const auto total = Clock::now();
  json criteria = json::object();
  bool c7_pass = false, c8_pass = false;

  auto run = [&](const Criterion& c, auto&& make) {
    const auto start = Clock::now();
    Report sub = make();
    const double seconds = seconds_since(start);
    const Check& line = rep.add(fold(c, sub, seconds));
    rep.timing["criterion " + std::to_string(c.number)] = seconds;
    criteria[std::to_string(c.number)] = sub_report_json(sub);
    for (auto& t : sub.tables) rep.tables.push_back({"c" + std::to_string(c.number) + "_" + t.name, t.schema, t.csv});
    if (sink) sink(line, seconds);
    return line.status == Status::Pass;
  };
  auto note = [&](Check c) {
    const Check& added = rep.add(std::move(c));
    if (sink) sink(added, 0.0);
  };

  const RunConfig defaults = default_config();

  run({1, "Gamma combinatorics", 1.0,
       std::string(anchor::kFixedSets) + "; " + anchor::kSingular},
      [&] { return kummer_fixed_points(defaults); });

  run({2, "Eguchi-Hanson identities", 10.0, std::string(anchor::kTripleClosed) + "; " + anchor::kHarmonic},
      [&] {
        RunConfig c = defaults;
        c.eh.samples = 1000;
        c.eh.seed = 1;
        Report sub = eh_verify(c);
        std::erase_if(sub.checks, [](const Check& x) { return x.status == Status::Reported; });
        return sub;
      });

  run({3, "ALE decay", 10.0, std::string(anchor::kAle) + "; " + anchor::kNuDecay}, [&] { return eh_decay(defaults); });

  run({4, "cone critical rates", 1.0, std::string(anchor::kConeRates) + "; " + anchor::kIndex},
      [&] { return cone_criterion(); });

  run({5, "S^3 / SO(3) spectrum oracle", 10.0, std::string(anchor::kSpectrum) + "; " + anchor::kR4},
      [&] { return cone_oracle(defaults); });

  run({6, "Theta expansion", 30.0, anchor::kThetaQuadratic}, [&] { return theta_expansion(); });

  c7_pass = run({7, "Kummer torsion law", 300.0, anchor::kTorsionLaw}, [&] { return kummer_torsion(defaults); });
  {
    kummer::TorsionFitSpec spec;
    spec.t_list = {0.008, 0.004, 0.002, 0.001};
    spec.samples = 20000;
    spec.beta = defaults.kummer.beta;
    const kummer::TorsionFit fit = kummer::torsion_decay_fit(spec);
    note(reported("criterion 7 supplement: t in {0.008, 0.004, 0.002, 0.001}",
                  {{"slope", fit.slope ? json(*fit.slope) : json(nullptr)},
                   {"weighted_slope", fit.weighted_slope ? json(*fit.weighted_slope) : json(nullptr)},
                   {"t0", fit.t0 ? json(*fit.t0) : json(nullptr)}},
                  anchor::kTorsionLaw));
  }

  json c8_flat;
  c8_pass = run({8, "existence iteration on the flat torus (N = 6, eps = 1e-2)", 600.0,
                 std::string(anchor::kExistence) + "; " + anchor::kClass},
                [&] {
                  RunConfig c = defaults;
                  c.torus = torus::SolverConfig{};
                  c.torus.n = 6;
                  c.torus.eps = 1e-2;
                  c.torus.seed = 7;
                  c.torus.tol = 1e-8;
                  c.torus.max_iter = 50;
                  Report sub = torus_solve(c);
                  const int iterations = sub.data["iterations"].get<int>();
                  sub.add(verdict("iterations <= 50", iterations <= 50, iterations, "<= 50", 0, anchor::kExistence));
                  c8_flat = {{"iterations", sub.data["flat_iterations"]},
                             {"residual", sub.data["flat_residual"]},
                             {"distance_to_flat", sub.data["flat_distance"]},
                             {"final_mode", sub.data["final_mode"]}};
                  return sub;
                });
  note(reported("criterion 8 supplement: flat-background stage before the fallback", c8_flat, anchor::kExistence));

  run({9, "rate calculator", 1.0, std::string(anchor::kNaive) + "; " + anchor::kFeasible + "; " + anchor::kRefined},
      [&] { return rates_jk(defaults); });
  {
    using cone::EpsRational;
    const EpsRational weight = EpsRational(2) + EpsRational::eps();
    const auto refined = cone::jk_rate_bound(cone::refined_jk_table(), weight);
    note(reported("criterion 9 supplement: sharp refined exponent (8/9)(3 - beta) at beta = -eps",
                  {{"exponent", refined.exponent ? json(refined.exponent->str()) : json(nullptr)},
                   {"dominant_region", refined.dominant_region}},
                  anchor::kRefined));
  }

  run({10, "substitute for the weighted inverse-Laplacian estimate", 10.0, anchor::kLinearEstimate}, [&] {
    Report sub;
    sub.suite = "linear estimate substitute";
    double worst = 0.0;
    json per_t = json::object();
    for (double t : {0.3, 0.1, 0.01}) {
      const double d = rescaling_discrepancy(t);
      per_t[fmt(t)] = d;
      worst = std::max(worst, d);
    }
    sub.add(verdict("rescaling invariance discrepancy", worst <= 1e-8, per_t, 0.0, 1e-8, anchor::kRescaling));
    sub.add(verdict("criterion 7 passes", c7_pass, c7_pass, true, 0, anchor::kTorsionLaw));
    sub.add(verdict("criterion 8 passes", c8_pass, c8_pass, true, 0, anchor::kExistence));
    return sub;
  });

  rep.data = {{"criteria", criteria}};
  rep.timing["total"] = seconds_since(total);
  return rep;
}

const std::vector<SuiteEntry>& suites() {
  static const std::vector<SuiteEntry> s = {
      {"eh verify", &eh_verify},         {"eh decay", &eh_decay},
      {"cone rates", &cone_rates},       {"cone index", &cone_index},
      {"cone oracle", &cone_oracle},     {"rates jk", &rates_jk},
      {"kummer fixed-points", &kummer_fixed_points}, {"kummer torsion", &kummer_torsion},
      {"torus solve", &torus_solve},
  };
  return s;
}

}  // namespace g2glue::cli
