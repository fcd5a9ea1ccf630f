#include "g2glue/eguchi_hanson.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace g2glue::eh {

using ext::Form;

double f_k(double k, double r) { return std::pow(k + r * r, 0.25); }

ChartPtr make_chart(double k, int structure_sign) {
  if (k < 0.0) throw DomainError("Eguchi-Hanson parameter k must be non-negative");
  auto chart = std::make_shared<FrameChart>();
  chart->dim = 4;
  chart->radial = 0;
  chart->k = k;
  const double s = structure_sign;
  chart->structure = {Form(4, 2), Form::basis(4, "34", s), Form::basis(4, "42", s), Form::basis(4, "23", s)};
  chart->scale = {RadialFunction(1.0, 0.0, -0.25), RadialFunction(1.0, 1.0, -0.25),
                  RadialFunction(1.0, 0.0, 0.25), RadialFunction(1.0, 0.0, 0.25)};
  chart->labels = {"dr", "eta1", "eta2", "eta3"};
  return chart;
}

Triple hyperkaehler_triple(const ChartPtr& chart) {
  RadialForm w1(chart, 2), w2(chart, 2), w3(chart, 2);
  w1.add("12", RadialFunction(1.0, 1.0, -0.5)).add("34", RadialFunction(1.0, 0.0, 0.5));
  w2.add("13", RadialFunction(1.0)).add("42", RadialFunction(1.0, 1.0));
  w3.add("14", RadialFunction(1.0)).add("23", RadialFunction(1.0, 1.0));
  return {w1, w2, w3};
}

Triple hyperkaehler_triple(double k) { return hyperkaehler_triple(make_chart(k)); }

HarmonicForms harmonic_forms(const ChartPtr& chart) {
  RadialForm nu(chart, 2), lambda(chart, 1), tau1(chart, 1);
  nu.add("12", RadialFunction(1.0, 1.0, -1.5)).add("34", RadialFunction(-1.0, 0.0, -0.5));
  lambda.add("2", RadialFunction(-1.0, 0.0, -0.5));
  tau1.add("2", RadialFunction(1.0, 0.0, 0.5) - RadialFunction(1.0, 1.0));
  return {nu, lambda, tau1};
}

HarmonicForms harmonic_forms(double k) { return harmonic_forms(make_chart(k)); }

RadialForm flat_w1(const ChartPtr& chart) {
  RadialForm w(chart, 2);
  w.add("12", RadialFunction(1.0)).add("34", RadialFunction(1.0, 1.0));
  return w;
}

Triple asd_triple(double k) {
  ChartPtr hat = make_chart(k, kRightSign);
  RadialForm w1(hat, 2), p2(hat, 1), p3(hat, 1);
  w1.add("12", RadialFunction(1.0, 1.0, -0.5)).add("34", RadialFunction(-1.0, 0.0, 0.5));
  p2.add("3", RadialFunction(1.0, 1.0));
  p3.add("4", RadialFunction(1.0, 1.0));
  return {w1, exterior_derivative(p2), exterior_derivative(p3)};
}

int six_form_rank(double k, double r) {
  Triple w = hyperkaehler_triple(k);
  Triple h = asd_triple(k);
  std::array<Form, 6> forms{w.w1.orthonormal(r), w.w2.orthonormal(r), w.w3.orthonormal(r),
                            h.w1.orthonormal(r), h.w2.orthonormal(r), h.w3.orthonormal(r)};
  Eigen::Matrix<double, 6, 6> gram;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < forms[i].size(); ++c) s += forms[i][c] * forms[j][c];
      gram(i, j) = s;
    }
  Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(gram);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

double radial_distance(double k, double r) {
  if (r < 0.0 || k < 0.0) throw DomainError("radial_distance needs r >= 0 and k >= 0");
  if (r == 0.0) return 0.0;
  // Substituting s = u^2 removes the s^{-1/2} endpoint behaviour at k = 0.
  auto integrand = [k](double u) {
    if (u == 0.0) return k > 0.0 ? 0.0 : 2.0;
    return 2.0 * u / std::pow(k + u * u * u * u, 0.25);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  using G = boost::math::quadrature::gauss<double, 30>;
  const double upper = std::sqrt(r);
  // Split at the transition u = k^(1/4) so that each piece is smooth on its scale.
  const double knee = std::min(upper, std::pow(k, 0.25));
  double value = 0.0, error = 0.0, e = 0.0, check = 0.0;
  if (knee > 0.0) {
    value += GK::integrate(integrand, 0.0, knee, 12, 1e-12, &e);
    check += G::integrate(integrand, 0.0, knee);
    error += e;
  }
  if (upper > knee) {
    value += GK::integrate(integrand, knee, upper, 12, 1e-12, &e);
    check += G::integrate(integrand, knee, upper);
    error += e;
  }
  // The Kronrod estimate is pessimistic for nearly polynomial pieces; an independent Gauss rule decides then.
  if (error > 1e-9 * std::abs(value) && std::abs(check - value) > 1e-12 * std::abs(value))
    throw ConvergenceError("radial_distance quadrature did not converge");
  return value;
}

namespace {

using Mat3 = Eigen::Matrix3d;

Mat3 rot_x(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

Mat3 rot_z(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

Mat3 gen_x() {
  Mat3 m;
  m << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  return m;
}

Mat3 gen_y() {
  Mat3 m;
  m << 0, 0, 1, 0, 0, 0, -1, 0, 0;
  return m;
}

Mat3 gen_z() {
  Mat3 m;
  m << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  return m;
}

// Components of X in the basis A1 = -Lx, A2 = -Ly, A3 = Lz, whose brackets have
// unit structure constants; A1 generates the stabilizer of e1.
Eigen::Vector3d so3_components(const Mat3& x) {
  const std::array<Mat3, 3> basis{-gen_x(), -gen_y(), gen_z()};
  Eigen::Vector3d c;
  for (int i = 0; i < 3; ++i) c[i] = (x.cwiseProduct(basis[i])).sum() / 2.0;
  return c;
}

// Induced metric on S^2 = SO(3)/U(1) from f^2 (eta2^2 + eta3^2), in the
// coordinates (theta, phi) of u = Rx(phi) Rz(theta), u e1 = point on S^2.
Eigen::Matrix2d sphere_metric(double f2, double theta, double phi) {
  const Mat3 u = rot_x(phi) * rot_z(theta);
  const Mat3 du_theta = rot_x(phi) * rot_z(theta) * gen_z();
  const Mat3 du_phi = gen_x() * rot_x(phi) * rot_z(theta);
  const Mat3 uinv = u.transpose();
  Eigen::Vector3d a = so3_components(uinv * du_theta);
  Eigen::Vector3d b = so3_components(uinv * du_phi);
  Eigen::Matrix2d g;
  g(0, 0) = f2 * (a[1] * a[1] + a[2] * a[2]);
  g(1, 1) = f2 * (b[1] * b[1] + b[2] * b[2]);
  g(0, 1) = g(1, 0) = f2 * (a[1] * b[1] + a[2] * b[2]);
  return g;
}

}  // namespace

SphereGeometry sphere_geometry(double k) {
  if (k <= 0.0) throw DomainError("sphere_geometry needs k > 0");
  const double pi = boost::math::constants::pi<double>();
  const double f2 = std::sqrt(k);  // f_k(0)^2
  using Quad = boost::math::quadrature::gauss<double, 30>;
  const double length = Quad::integrate(
      [&](double theta) { return std::sqrt(sphere_metric(f2, theta, 0.3)(0, 0)); }, 0.0, pi);
  const double area = Quad::integrate(
      [&](double theta) {
        return Quad::integrate([&](double phi) { return std::sqrt(sphere_metric(f2, theta, phi).determinant()); },
                               0.0, 2.0 * pi);
      },
      0.0, pi);
  return {length, area};
}

double ale_decay_ratio(double k, double r) {
  if (!(k > 0.0 && k <= 1.0)) throw DomainError("ale_decay_ratio needs k in (0,1]");
  if (!(r > 1.0)) throw DomainError("ale_decay_ratio needs r > 1");
  // |eta1|_{g_(0)} = r^{-1/2}; f_k^2 - r = k / (f_k^2 + r) avoids cancellation.
  const double tau = k / (std::sqrt(k + r * r) + r) / std::sqrt(r);
  const double bound = k * std::pow(std::pow(k, 0.25) + std::sqrt(r), -3.0);
  return tau / bound;
}

double scaling_pullback_check(double k, double kp, double r) {
  if (k <= 0.0 || kp <= 0.0) throw DomainError("scaling_pullback_check needs k, k' > 0");
  const double lambda = std::pow(k / kp, 0.25);
  const double l2 = lambda * lambda;
  const double rr = l2 * r;
  const double fk = f_k(k, rr);
  const double fp = f_k(kp, r);
  // Diagonal metric components in (dr, eta1, eta2, eta3).
  const std::array<double, 4> pulled{l2 * l2 / (fk * fk), rr * rr / (fk * fk), fk * fk, fk * fk};
  const std::array<double, 4> target{l2 / (fp * fp), l2 * r * r / (fp * fp), l2 * fp * fp, l2 * fp * fp};
  double err = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double scale = std::max(std::abs(target[i]), 1e-300);
    if (target[i] == 0.0 && pulled[i] == 0.0) continue;
    err = std::max(err, std::abs(pulled[i] - target[i]) / scale);
  }
  return err;
}

RadialForm dilation_pullback(const RadialForm& a, double t, const ChartPtr& unit_chart) {
  const double k = a.chart()->k;
  const double expected = std::pow(t, 4) * unit_chart->k;
  if (std::abs(k - expected) > 1e-12 * std::max(1.0, expected))
    throw DomainError("dilation_pullback: chart parameter is not t^4 times the target");
  RadialForm out(unit_chart, a.degree());
  const auto& masks = ext::basis_masks(a.dim(), a.degree());
  const ext::Mask dr = static_cast<ext::Mask>(1u << a.chart()->radial);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    RadialFunction c = a.coeff(i).rescaled(t * t);
    if (masks[i] & dr) c *= t * t;
    out.coeff(i) = c;
  }
  return out;
}

WeightedNormParts weighted_norm(const std::vector<FieldSample>& samples, const WeightedNormSpec& spec) {
  if (samples.empty()) throw DomainError("weighted_norm needs at least one sample");
  WeightedNormParts out{0.0, std::vector<double>(spec.k_derivs + 1, 0.0), 0.0, 0};
  auto norm_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  for (const auto& s : samples) {
    if (static_cast<int>(s.jets.size()) < spec.k_derivs + 1)
      throw DomainError("weighted_norm: sample lacks derivative data");
    for (int j = 0; j <= spec.k_derivs; ++j) {
      const double v = std::pow(s.weight, j - spec.beta) * norm_of(s.jets[j]);
      out.sup_parts[j] = std::max(out.sup_parts[j], v);
    }
  }
  const std::size_t n = samples.size();
  const std::size_t all_pairs = n * (n - 1) / 2;
  auto visit = [&](std::size_t i, std::size_t j) {
    const auto& x = samples[i];
    const auto& y = samples[j];
    if (x.fiber != y.fiber) return;
    const double d = std::abs(x.position - y.position);
    const double w = std::min(x.weight, y.weight);
    if (d <= 0.0 || d > w) return;
    ++out.admissible_pairs;
    const auto& fx = x.jets[spec.k_derivs];
    const auto& fy = y.jets[spec.k_derivs];
    double diff = 0.0;
    for (std::size_t c = 0; c < fx.size(); ++c) diff += (fx[c] - fy[c]) * (fx[c] - fy[c]);
    const double q = std::pow(w, spec.k_derivs + spec.alpha - spec.beta) * std::sqrt(diff) / std::pow(d, spec.alpha);
    out.hoelder = std::max(out.hoelder, q);
  };
  if (all_pairs <= spec.max_pairs) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
  } else {
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t p = 0; p < spec.max_pairs; ++p) {
      std::size_t i = pick(rng), j = pick(rng);
      if (i != j) visit(std::min(i, j), std::max(i, j));
    }
  }
  out.total = out.hoelder;
  for (double v : out.sup_parts) out.total += v;
  return out;
}

std::vector<FieldSample> sample_form(const RadialForm& a, double t, const std::vector<double>& radii) {
  std::vector<FieldSample> out;
  out.reserve(radii.size());
  const double k = a.chart()->k;
  for (double r : radii) {
    FieldSample s;
    s.position = radial_distance(k, r);
    s.weight = t + s.position;
    Form f = a.orthonormal(r);
    s.jets.push_back(std::vector<double>(f.coeffs().begin(), f.coeffs().end()));
    out.push_back(std::move(s));
  }
  return out;
}

RescalingReport rescaling_invariance_check(const RadialForm& a, double beta, double t,
                                           const std::vector<double>& unit_radii) {
  auto unit_chart = std::make_shared<FrameChart>(*a.chart());
  unit_chart->k = 1.0;
  ChartPtr unit = unit_chart;
  RadialForm sigma = dilation_pullback(a, t, unit);
  sigma *= std::pow(t, -beta - a.degree());
  const double k = a.chart()->k;
  double lhs = 0.0, rhs = 0.0;
  for (double y : unit_radii) {
    const double w1 = 1.0 + radial_distance(1.0, y);
    lhs = std::max(lhs, std::pow(w1, -beta) * sigma.pointwise_norm(y));
    const double x = t * t * y;
    const double wt = t + radial_distance(k, x);
    rhs = std::max(rhs, std::pow(wt, -beta) * a.pointwise_norm(x));
  }
  double disc = 0.0;
  if (lhs != 0.0 || rhs != 0.0) disc = std::abs(lhs - rhs) / std::max(std::abs(rhs), std::abs(lhs));
  return {lhs, rhs, disc};
}

std::vector<double> geometric_grid(double r0, double r1, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = r0 * std::pow(r1 / r0, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("log_log_slope needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace g2glue::eh
