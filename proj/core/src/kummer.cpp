#include "g2glue/kummer.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "g2glue/errors.hpp"

namespace g2glue::kummer {

using eh::RadialForm;
using eh::RadialFunction;
using ext::Form;

bool TorusIsometry::is_identity() const {
  return std::all_of(signs.begin(), signs.end(), [](int s) { return s == 1; }) &&
         std::all_of(half_shift.begin(), half_shift.end(), [](int h) { return h == 0; });
}

int TorusIsometry::determinant() const {
  int d = 1;
  for (int s : signs) d *= s;
  return d;
}

std::array<int, 7> TorusIsometry::apply_quarters(const std::array<int, 7>& q) const {
  std::array<int, 7> out{};
  for (int i = 0; i < 7; ++i) out[i] = (((signs[i] * q[i] + 2 * half_shift[i]) % 4) + 4) % 4;
  return out;
}

std::array<double, 7> TorusIsometry::apply(const std::array<double, 7>& x) const {
  std::array<double, 7> out{};
  for (int i = 0; i < 7; ++i) {
    const double y = signs[i] * x[i] + 0.5 * half_shift[i];
    out[i] = y - std::floor(y);
  }
  return out;
}

TorusIsometry compose(const TorusIsometry& a, const TorusIsometry& b) {
  TorusIsometry c;
  c.name = a.name + "*" + b.name;
  for (int i = 0; i < 7; ++i) {
    c.signs[i] = a.signs[i] * b.signs[i];
    c.half_shift[i] = (a.half_shift[i] + b.half_shift[i]) % 2;
  }
  return c;
}

TorusIsometry alpha() { return {"alpha", {-1, -1, -1, -1, 1, 1, 1}, {0, 0, 0, 0, 0, 0, 0}}; }
TorusIsometry beta() { return {"beta", {-1, -1, 1, 1, -1, -1, 1}, {0, 1, 0, 0, 0, 0, 0}}; }
TorusIsometry gamma() { return {"gamma", {-1, 1, -1, 1, -1, 1, -1}, {1, 0, 1, 0, 0, 0, 0}}; }

std::vector<TorusIsometry> gamma_elements() {
  const TorusIsometry a = alpha(), b = beta(), c = gamma();
  TorusIsometry id{"id", {1, 1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0, 0}};
  TorusIsometry bc = compose(b, c), ca = compose(c, a), ab = compose(a, b), abc = compose(ab, c);
  bc.name = "beta*gamma";
  ca.name = "gamma*alpha";
  ab.name = "alpha*beta";
  abc.name = "alpha*beta*gamma";
  return {id, a, b, c, bc, ca, ab, abc};
}

Form invariant_three_form() {
  ext::Matrix reverse = ext::Matrix::Zero(7, 7);
  for (int i = 0; i < 7; ++i) reverse(i, 6 - i) = 1.0;
  return ext::pullback(reverse, ext::phi0());
}

Form pullback(const TorusIsometry& g, const Form& f) {
  ext::Matrix a = ext::Matrix::Zero(7, 7);
  for (int i = 0; i < 7; ++i) a(i, i) = g.signs[i];
  return ext::pullback(a, f);
}

std::vector<int> FixedTorus::free_indices() const {
  std::vector<int> out;
  for (int i = 0; i < 7; ++i)
    if (pinned[i] < 0) out.push_back(i + 1);
  return out;
}

std::string FixedTorus::str() const {
  static const char* quarter[] = {"0", "1/4", "1/2", "3/4"};
  std::string s = "(";
  for (int i = 0; i < 7; ++i) {
    if (i) s += ",";
    s += pinned[i] < 0 ? std::string("x") + std::to_string(i + 1) : quarter[pinned[i]];
  }
  return s + ")";
}

FixedTorus image(const TorusIsometry& g, const FixedTorus& f) {
  FixedTorus out = f;
  for (int i = 0; i < 7; ++i)
    if (f.pinned[i] >= 0) out.pinned[i] = (((g.signs[i] * f.pinned[i] + 2 * g.half_shift[i]) % 4) + 4) % 4;
  return out;
}

bool intersects(const FixedTorus& a, const FixedTorus& b) {
  for (int i = 0; i < 7; ++i)
    if (a.pinned[i] >= 0 && b.pinned[i] >= 0 && a.pinned[i] != b.pinned[i]) return false;
  return true;
}

FixedSet fixed_point_tori(const TorusIsometry& g) {
  FixedSet out;
  if (g.is_identity()) {
    out.whole_torus = true;
    return out;
  }
  // Per coordinate: s = +1 needs no shift and leaves x free; s = -1 solves 2x = shift mod 1.
  std::vector<std::vector<int>> choices(7);
  for (int i = 0; i < 7; ++i) {
    if (g.signs[i] == 1) {
      if (g.half_shift[i] != 0) return out;
      choices[i] = {-1};
    } else {
      choices[i] = {g.half_shift[i], g.half_shift[i] + 2};
    }
  }
  FixedTorus cur;
  auto rec = [&](auto&& self, int i) -> void {
    if (i == 7) {
      out.tori.push_back(cur);
      return;
    }
    for (int v : choices[i]) {
      cur.pinned[i] = v;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  return out;
}

SingularSet singular_components() {
  const auto elements = gamma_elements();
  const std::array<TorusIsometry, 3> gens{alpha(), beta(), gamma()};
  SingularSet out;
  out.free_action = true;
  out.stabilised = true;
  std::vector<FixedTorus> all;
  int id = 1;
  for (int g = 0; g < 3; ++g) {
    const auto tori = fixed_point_tori(gens[g]).tori;
    all.insert(all.end(), tori.begin(), tori.end());
    const TorusIsometry& x = gens[(g + 1) % 3];
    const TorusIsometry& y = gens[(g + 2) % 3];
    const std::array<TorusIsometry, 4> sub{elements[0], x, y, compose(x, y)};
    std::set<FixedTorus> seen;
    for (const auto& f : tori) {
      if (!(image(gens[g], f) == f)) out.stabilised = false;
      if (seen.count(f)) continue;
      std::set<FixedTorus> orbit;
      for (const auto& h : sub) orbit.insert(image(h, f));
      if (orbit.size() != 4) out.free_action = false;
      seen.insert(orbit.begin(), orbit.end());
      out.components.push_back({id++, gens[g].name, std::vector<FixedTorus>(orbit.begin(), orbit.end())});
    }
  }
  out.disjoint = true;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (intersects(all[i], all[j])) out.disjoint = false;
  return out;
}

int invariant_betti(int p) {
  if (p < 0 || p > 7) return 0;
  const auto elements = gamma_elements();
  int count = 0;
  for (unsigned mask = 0; mask < 128u; ++mask) {
    if (__builtin_popcount(mask) != p) continue;
    bool invariant = true;
    for (const auto& g : elements) {
      int s = 1;
      for (int i = 0; i < 7; ++i)
        if (mask & (1u << i)) s *= g.signs[i];
      if (s != 1) invariant = false;
    }
    if (invariant) ++count;
  }
  return count;
}

namespace {

double unit_parameter(double s, double zeta) { return std::clamp((s - zeta / 4.0) / (zeta / 4.0), 0.0, 1.0); }

// chi as a radial function of r, valid on the annulus.
RadialFunction cutoff_profile(double zeta) {
  const RadialFunction u = RadialFunction(8.0 / zeta, 0.5) + RadialFunction(-1.0);
  const RadialFunction u3 = u * u * u;
  return u3 * (RadialFunction(10.0) + RadialFunction(-15.0) * u + RadialFunction(6.0) * u * u);
}

eh::ChartPtr gluing_chart(double k) {
  auto chart = std::make_shared<eh::FrameChart>();
  chart->dim = 7;
  chart->radial = 3;
  chart->k = k;
  chart->structure = {Form(7, 2), Form(7, 2), Form(7, 2), Form(7, 2),
                      Form::basis(7, "67", eh::kLeftSign), Form::basis(7, "75", eh::kLeftSign),
                      Form::basis(7, "56", eh::kLeftSign)};
  chart->scale = {RadialFunction(1.0), RadialFunction(1.0), RadialFunction(1.0),
                  RadialFunction(1.0, 0.0, -0.25), RadialFunction(1.0, 1.0, -0.25),
                  RadialFunction(1.0, 0.0, 0.25), RadialFunction(1.0, 0.0, 0.25)};
  chart->labels = {"delta1", "delta2", "delta3", "dr", "eta1", "eta2", "eta3"};
  return chart;
}

RadialForm generator(const eh::ChartPtr& chart, std::string_view digits) {
  RadialForm f(chart, static_cast<int>(digits.size()));
  f.add(digits, RadialFunction(1.0));
  return f;
}

}  // namespace

double cutoff(double s, double zeta) {
  const double u = unit_parameter(s, zeta);
  return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double cutoff_derivative(double s, double zeta) {
  const double u = unit_parameter(s, zeta);
  return 30.0 * u * u * (1.0 - u) * (1.0 - u) * 4.0 / zeta;
}

double flat_distance(double r) { return eh::radial_distance(0.0, r); }
double radius_at_distance(double s) { return s * s / 4.0; }

GluingModel::GluingModel(double t, double zeta) : t_(t), k_(std::pow(t, 4)), zeta_(zeta) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("gluing parameter t must lie in (0, 1)");
  chart_ = gluing_chart(k_);
  const eh::ChartPtr base = eh::make_chart(k_);
  const eh::Triple w = eh::hyperkaehler_triple(base);
  const RadialForm w1 = w.w1.lifted(chart_, 3);
  const RadialForm w2 = w.w2.lifted(chart_, 3);
  const RadialForm w3 = w.w3.lifted(chart_, 3);
  const RadialForm tau1 = eh::harmonic_forms(base).tau1.lifted(chart_, 3);
  dtau1_ = eh::exterior_derivative(tau1);

  const RadialForm d1 = generator(chart_, "1"), d2 = generator(chart_, "2"), d3 = generator(chart_, "3");
  const RadialForm d123 = generator(chart_, "123");
  const RadialForm d23 = generator(chart_, "23"), d31 = generator(chart_, "31"), d12 = generator(chart_, "12");
  const std::array<RadialFunction, 3> chi{RadialFunction::zero(), cutoff_profile(zeta_), RadialFunction(1.0)};
  for (const auto& c : chi) {
    RadialForm wt = w1 - eh::exterior_derivative(c * tau1);
    RadialForm phi = d123 - (eh::wedge(wt, d1) + eh::wedge(w2, d2) + eh::wedge(w3, d3));
    RadialForm vt = 0.5 * eh::wedge(wt, wt) - (eh::wedge(wt, d23) + eh::wedge(w2, d31) + eh::wedge(w3, d12));
    dphi_.push_back(eh::exterior_derivative(phi));
    dvartheta_.push_back(eh::exterior_derivative(vt));
    w1_.push_back(std::move(wt));
    phi_.push_back(std::move(phi));
    vartheta_.push_back(std::move(vt));
  }
}

Region GluingModel::region(double r) const {
  if (!(r > 0.0)) throw DomainError("chart radius must be positive");
  const double s = flat_distance(r);
  if (s <= zeta_ / 4.0) return Region::Inner;
  if (s >= zeta_ / 2.0) return Region::Outer;
  return Region::Annulus;
}

GluedStructure GluingModel::at(double r) const {
  const Region g = region(r);
  return {phi(g).orthonormal(r), vartheta(g).orthonormal(r)};
}

double GluingModel::closedness_residual(double r) const {
  const std::size_t i = index(region(r));
  return std::max(eh::relative_residual(dphi_[i], r), eh::relative_residual(dvartheta_[i], r));
}

Form GluingModel::torsion(double r) const {
  const GluedStructure s = at(r);
  const ext::G2Metric m = ext::metric_from_g2(s.phi);
  return ext::hodge_star(m.g, ext::theta(s.phi) - s.vartheta, m.orientation);
}

double GluingModel::torsion_norm(double r) const {
  const GluedStructure s = at(r);
  const ext::G2Metric m = ext::metric_from_g2(s.phi);
  const Form psi = ext::hodge_star(m.g, ext::theta(s.phi) - s.vartheta, m.orientation);
  return std::sqrt(std::max(0.0, ext::inner(m.g, psi, psi)));
}

double GluingModel::product_metric_error(double r) const {
  const Region g = region(r);
  if (g == Region::Annulus) throw DomainError("product metric is only defined on the cutoff plateaus");
  const ext::G2Metric m = ext::metric_from_g2(phi(g).orthonormal(r));
  std::array<double, 7> expected{1, 1, 1, 1, 1, 1, 1};
  if (g == Region::Outer) {
    // g_(0) written in the g_(k) coframe.
    const double f2 = std::sqrt(k_ + r * r);
    expected = {1, 1, 1, f2 / r, f2 / r, r / f2, r / f2};
  }
  double err = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) err = std::max(err, std::abs(m.g.matrix()(i, j) - (i == j ? expected[i] : 0.0)));
  return err;
}

double GluingModel::ale_difference_norm(double r) const { return dtau1_->orthonormal(r).norm(); }

std::string TorsionFit::csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "t,admissible,first_failure_s,sup_psi,sup_grad_psi,weighted_c0,sup_ale\n";
  for (const auto& r : rows)
    os << r.t << ',' << (r.admissible ? 1 : 0) << ',' << r.first_failure << ',' << r.sup_psi << ','
       << r.sup_grad_psi << ',' << r.weighted << ',' << r.sup_ale << '\n';
  return os.str();
}

namespace {

struct SampleValue {
  bool positive = false;
  double psi = 0.0;
  double grad = 0.0;
  double ale = 0.0;
  std::vector<double> comps;
};

}  // namespace

TorsionFit torsion_decay_fit(const TorsionFitSpec& spec) {
  if (spec.t_list.empty()) throw DomainError("torsion fit needs at least one t");
  if (spec.samples < 2) throw DomainError("torsion fit needs at least two samples");
  for (double t : spec.t_list)
    if (!(t > 0.0 && t <= 0.3)) throw DomainError("torsion fit: t must lie in (0, 0.3]");
  TorsionFit fit;
  const double lo = spec.zeta / 4.0, width = spec.zeta / 4.0;
  const std::size_t n = spec.samples;
  for (double t : spec.t_list) {
    const GluingModel model(t, spec.zeta);
    std::vector<SampleValue> values(n);
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& range) {
      for (std::size_t i = range.begin(); i != range.end(); ++i) {
        SampleValue& v = values[i];
        const double s = lo + width * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double r = radius_at_distance(s);
        v.ale = model.ale_difference_norm(r);
        try {
          const Form psi = model.torsion(r);
          v.psi = model.torsion_norm(r);
          v.comps.assign(psi.coeffs().begin(), psi.coeffs().end());
          const double h = 1e-6 * s;
          const Form plus = model.torsion(radius_at_distance(s + h));
          const Form minus = model.torsion(radius_at_distance(s - h));
          v.grad = ((plus - minus) * (1.0 / (2.0 * h))).norm();
          v.positive = true;
        } catch (const NotG2Error&) {
          v.positive = false;
        }
      }
    });
    TorsionRow row;
    row.t = t;
    row.admissible = true;
    std::vector<eh::FieldSample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const SampleValue& v = values[i];
      const double s = lo + width * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      row.sup_ale = std::max(row.sup_ale, v.ale);
      if (!v.positive) {
        if (row.admissible) row.first_failure = s;
        row.admissible = false;
        continue;
      }
      row.sup_psi = std::max(row.sup_psi, v.psi);
      row.sup_grad_psi = std::max(row.sup_grad_psi, v.grad);
      eh::FieldSample fs;
      fs.position = eh::radial_distance(model.k(), radius_at_distance(s));
      fs.weight = t + fs.position;
      fs.jets.push_back(v.comps);
      samples.push_back(std::move(fs));
    }
    if (row.admissible) {
      eh::WeightedNormSpec ws;
      ws.k_derivs = 0;
      ws.alpha = spec.alpha;
      ws.beta = spec.beta - 2.0;
      ws.t = t;
      ws.seed = spec.seed;
      row.weighted = eh::weighted_norm(samples, ws).total;
    }
    fit.rows.push_back(row);
  }
  std::vector<double> ts, sups, weighted, all_t, ales;
  for (const auto& r : fit.rows) {
    all_t.push_back(r.t);
    ales.push_back(r.sup_ale);
    if (!r.admissible) continue;
    if (!fit.t0 || r.t > *fit.t0) fit.t0 = r.t;
    ts.push_back(r.t);
    sups.push_back(r.sup_psi);
    weighted.push_back(r.weighted);
  }
  if (ts.size() >= 3) {
    fit.slope = eh::log_log_slope(ts, sups);
    fit.weighted_slope = eh::log_log_slope(ts, weighted);
  }
  if (all_t.size() >= 3) fit.ale_slope = eh::log_log_slope(all_t, ales);
  return fit;
}

ApproximateKernel::ApproximateKernel(double t, int b2, double zeta)
    : t_(t), k_(std::pow(t, 4)), zeta_(zeta), b2_(b2), nu_(eh::harmonic_forms(std::pow(t, 4)).nu) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("gluing parameter t must lie in (0, 1)");
  if (b2 < 0) throw DomainError("b2 must be non-negative");
}

Form ApproximateKernel::field(double r) const { return cutoff(flat_distance(r), zeta_) * nu_.orthonormal(r); }

double ApproximateKernel::jump(double s) const {
  constexpr double delta = 1e-12;
  return (field(radius_at_distance(s * (1.0 - delta))) - field(radius_at_distance(s * (1.0 + delta)))).norm();
}

std::vector<std::vector<double>> ApproximateKernel::gram() const {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto integrand = [&](double r) {
    const double n = field(r).norm();
    return n * n * r;
  };
  const double r0 = radius_at_distance(zeta_ / 4.0), r1 = radius_at_distance(zeta_ / 2.0);
  const double r2 = radius_at_distance(zeta_);
  const double diag = GK::integrate(integrand, r0, r1, 10, 1e-12) + GK::integrate(integrand, r1, r2, 10, 1e-12);
  std::vector<std::vector<double>> g(12, std::vector<double>(12, 0.0));
  for (int i = 0; i < 12; ++i) g[i][i] = diag;
  return g;
}

int ApproximateKernel::span_dimension() const {
  const auto g = gram();
  Eigen::MatrixXd m(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) m(i, j) = g[i][j];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-12);
  return static_cast<int>(lu.rank()) + b2_;
}

}  // namespace g2glue::kummer
