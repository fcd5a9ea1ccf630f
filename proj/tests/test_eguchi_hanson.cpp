#include "doctest.h"

#include "g2glue/eguchi_hanson.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

using namespace g2glue;
using namespace g2glue::eh;
using ext::Form;

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

struct Point {
  double k, r;
};

std::vector<Point> random_points(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lk(-4.0, 1.0), lr(-3.0, 3.0);
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) out.push_back({std::pow(10.0, lk(rng)), std::pow(10.0, lr(rng))});
  return out;
}

double max_diff(const Form& a, const Form& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("hyperkaehler triple is closed at random (k, r)") {
  double worst = 0.0;
  for (auto [k, r] : random_points(1000, 1)) {
    Triple w = hyperkaehler_triple(k);
    for (const RadialForm* f : {&w.w1, &w.w2, &w.w3})
      worst = std::max(worst, relative_residual(exterior_derivative(*f), r));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("the opposite left-invariant structure sign breaks closedness") {
  ChartPtr wrong = make_chart(1.0, -kLeftSign);
  Triple w = hyperkaehler_triple(wrong);
  CHECK(relative_residual(exterior_derivative(w.w1), 0.7) > 0.1);
  CHECK(relative_residual(exterior_derivative(w.w2), 0.7) > 0.1);
  // The right-invariant sign is the one that makes the hatted family closed.
  ChartPtr hat_wrong = make_chart(1.0, kLeftSign);
  RadialForm w1hat(hat_wrong, 2);
  w1hat.add("12", RadialFunction(1.0, 1.0, -0.5)).add("34", RadialFunction(-1.0, 0.0, 0.5));
  CHECK(relative_residual(exterior_derivative(w1hat), 0.7) > 0.1);
}

TEST_CASE("hyperkaehler orthonormality w_i ^ w_j = 2 delta_ij vol") {
  for (auto [k, r] : random_points(50, 2)) {
    Triple w = hyperkaehler_triple(k);
    std::array<Form, 3> o{w.w1.orthonormal(r), w.w2.orthonormal(r), w.w3.orthonormal(r)};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Form top = ext::wedge(o[i], o[j]);
        CHECK(top[0] == doctest::Approx(i == j ? 2.0 : 0.0).epsilon(1e-12));
      }
  }
}

TEST_CASE("at k = 0 the triple is the flat triple on the cone") {
  Triple w = hyperkaehler_triple(0.0);
  const double r = 1.9;
  CHECK(max_diff(w.w1.orthonormal(r), Form::basis(4, "12") + Form::basis(4, "34")) < 1e-15);
  CHECK(max_diff(w.w2.orthonormal(r), Form::basis(4, "13") + Form::basis(4, "42")) < 1e-15);
  CHECK(max_diff(w.w3.orthonormal(r), Form::basis(4, "14") + Form::basis(4, "23")) < 1e-15);
  CHECK(max_diff(w.w1.eval(r), flat_w1(make_chart(0.0)).eval(r)) < 1e-15);
  // Each is self-dual for the flat metric.
  for (const RadialForm* f : {&w.w1, &w.w2, &w.w3}) CHECK(max_diff(hodge_star_at(*f, r), f->orthonormal(r)) < 1e-15);
}

TEST_CASE("nu at k = 1, r = 1") {
  HarmonicForms h = harmonic_forms(1.0);
  Form expected = Form::basis(4, "12", std::pow(2.0, -1.5)) - Form::basis(4, "34", std::pow(2.0, -0.5));
  CHECK(max_diff(h.nu.eval(1.0), expected) < 1e-15);
}

TEST_CASE("harmonic form identities at random (k, r)") {
  double worst = 0.0;
  for (auto [k, r] : random_points(1000, 3)) {
    ChartPtr chart = make_chart(k);
    HarmonicForms h = harmonic_forms(chart);
    worst = std::max(worst, relative_residual(exterior_derivative(h.lambda) - h.nu, r));
    worst = std::max(worst, relative_residual(exterior_derivative(h.nu), r));
    Triple w = hyperkaehler_triple(chart);
    worst = std::max(worst, relative_residual(exterior_derivative(h.tau1) - (w.w1 - flat_w1(chart)), r));
    Form o = h.nu.orthonormal(r);
    worst = std::max(worst, (hodge_star_at(h.nu, r) + o).max_abs() / o.max_abs());
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("tau1 vanishes identically at k = 0") {
  HarmonicForms h = harmonic_forms(0.0);
  for (double r : {0.1, 1.0, 10.0}) CHECK(h.tau1.eval(r).max_abs() == 0.0);
}

TEST_CASE("the hatted triple is closed and anti-self-dual") {
  double worst = 0.0;
  for (auto [k, r] : random_points(1000, 4)) {
    Triple h = asd_triple(k);
    for (const RadialForm* f : {&h.w1, &h.w2, &h.w3}) {
      worst = std::max(worst, relative_residual(exterior_derivative(*f), r));
      Form o = f->orthonormal(r);
      worst = std::max(worst, (hodge_star_at(*f, r) + o).max_abs() / o.max_abs());
    }
  }
  CHECK(worst <= 1e-12);
  CHECK(six_form_rank(1.0, 2.0) == 6);
}

TEST_CASE("d squared vanishes on generated forms") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ChartPtr chart = make_chart(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    RadialForm a(chart, 1 + trial % 2);
    const auto& masks = ext::basis_masks(4, a.degree());
    for (std::size_t i = 0; i < masks.size(); ++i)
      a.coeff(i) = RadialFunction(u(rng), std::round(4 * u(rng)), 0.25 * std::round(4 * u(rng)));
    RadialForm dd = exterior_derivative(exterior_derivative(a));
    for (double r : {0.2, 1.0, 5.0}) CHECK(relative_residual(dd, r) <= 1e-12);
  }
}

TEST_CASE("radial distance") {
  for (double r : {0.01, 1.0, 37.0}) CHECK(radial_distance(0.0, r) == doctest::Approx(2.0 * std::sqrt(r)).epsilon(1e-12));
  CHECK(radial_distance(1.0, 1e-4) == doctest::Approx(1e-4).epsilon(1e-6));
  double prev = 0.0;
  for (double r : geometric_grid(1e-3, 1e3, 40)) {
    const double d = radial_distance(0.5, r);
    CHECK(d > prev);
    prev = d;
  }
  // The large-r constant d / sqrt(r) tends to 2 for every k.
  CHECK(radial_distance(1.0, 1e6) / std::sqrt(1e6) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("exceptional sphere scaling and constants") {
  SphereGeometry a = sphere_geometry(0.3);
  SphereGeometry b = sphere_geometry(16 * 0.3);
  CHECK(b.volume / a.volume == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(b.diameter / a.diameter == doctest::Approx(2.0).epsilon(1e-12));
  SphereGeometry one = sphere_geometry(1.0);
  CHECK(one.diameter == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(one.volume == doctest::Approx(4.0 * kPi).epsilon(1e-12));
}

TEST_CASE("ALE decay ratio") {
  for (double k : {1.0, 1e-2, 1e-4}) {
    double sup = 0.0;
    for (double r : geometric_grid(1.01, 1e4, 400)) sup = std::max(sup, ale_decay_ratio(k, r));
    CHECK(sup <= 4.0);
  }
  CHECK(ale_decay_ratio(1.0, 1e6) <= ale_decay_ratio(1.0, 1e2));
  CHECK_THROWS_AS(ale_decay_ratio(1.0, 0.5), DomainError);
}

TEST_CASE("scaling pullback") {
  CHECK(scaling_pullback_check(2.0, 2.0, 0.7) == 0.0);
  CHECK(scaling_pullback_check(16.0, 1.0, 2.0) <= 1e-12);
  const double lambda2 = std::sqrt(std::pow(16.0 / 1.0, 0.5));
  CHECK(lambda2 * 0.0 == 0.0);  // r = 0 is fixed: the map restricts to the identity on the sphere
}

TEST_CASE("weighted norm basics") {
  WeightedNormSpec spec;
  spec.beta = 0.0;
  std::vector<FieldSample> ones;
  for (int i = 0; i < 20; ++i) ones.push_back({0, 0.1 * i, 0.5 + 0.1 * i, {{1.0}}});
  CHECK(weighted_norm(ones, spec).sup_parts[0] == doctest::Approx(1.0));
  CHECK(weighted_norm(ones, spec).hoelder == 0.0);

  spec.beta = -2.0;
  std::vector<FieldSample> power;
  for (int i = 0; i < 20; ++i) {
    const double w = 0.5 + 0.3 * i;
    power.push_back({0, w, w, {{std::pow(w, spec.beta)}}});
  }
  CHECK(weighted_norm(power, spec).sup_parts[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(weighted_norm({}, spec), DomainError);
}

TEST_CASE("weighted norm is monotone in the sample set") {
  const double t = 0.5;
  HarmonicForms h = harmonic_forms(std::pow(t, 4));
  WeightedNormSpec spec;
  spec.beta = -4.0;
  spec.t = t;
  auto small = sample_form(h.nu, t, geometric_grid(1e-2, 1e2, 20));
  auto large = small;
  auto extra = sample_form(h.nu, t, geometric_grid(1.3e-2, 0.9e2, 25));
  large.insert(large.end(), extra.begin(), extra.end());
  const double a = weighted_norm(small, spec).total;
  const double b = weighted_norm(large, spec).total;
  CHECK(b >= a);
  CHECK(std::isfinite(b));
}

TEST_CASE("nu has a finite weighted C0 norm of rate -4") {
  for (double t : {1.0, 0.3, 0.1}) {
    HarmonicForms h = harmonic_forms(std::pow(t, 4));
    WeightedNormSpec spec;
    spec.beta = -4.0;
    spec.t = t;
    auto samples = sample_form(h.nu, t, geometric_grid(1e-6, 1e6, 200));
    const double n = weighted_norm(samples, spec).sup_parts[0];
    CHECK(n < 100.0);
    CHECK(n > 0.1);
  }
}

TEST_CASE("rescaling invariance of weighted norms") {
  const double t = 0.3;
  const auto grid = geometric_grid(1e-3, 1e3, 120);
  HarmonicForms h = harmonic_forms(std::pow(t, 4));
  CHECK(rescaling_invariance_check(h.nu, -4.0, t, grid).discrepancy <= 1e-8);
  RadialForm zero(make_chart(std::pow(t, 4)), 2);
  RescalingReport z = rescaling_invariance_check(zero, -4.0, t, grid);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  // dt ^ e1 written in the generators.
  RadialForm c(make_chart(std::pow(t, 4)), 2);
  c.add("12", RadialFunction(1.0, 1.0, -0.5));
  CHECK(rescaling_invariance_check(c, 0.0, t, grid).discrepancy <= 1e-8);
}

TEST_CASE("nu is square integrable with a small tail") {
  const double k = 1.0;
  auto density = [k](double r) { return 2.0 * r / std::pow(k + r * r, 2.0); };  // |nu|^2 dvol, angular factor dropped
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double inner = GK::integrate(density, 0.0, 1e3, 20, 1e-14);
  const double tail = GK::integrate(density, 1e3, std::numeric_limits<double>::infinity(), 20, 1e-14);
  CHECK(tail / (inner + tail) < 1e-6);
}

TEST_CASE("nu decays with rate -4 in the weight") {
  const double k = 1.0, t = 1.0;
  HarmonicForms h = harmonic_forms(k);
  std::vector<double> w, v;
  for (double r : geometric_grid(1e2, 1e6, 60)) {
    w.push_back(t + radial_distance(k, r));
    v.push_back(h.nu.pointwise_norm(r));
  }
  CHECK(log_log_slope(w, v) == doctest::Approx(-4.0).epsilon(0.05 / 4.0));
}
