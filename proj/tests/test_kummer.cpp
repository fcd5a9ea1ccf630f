#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "g2glue/errors.hpp"
#include "g2glue/kummer.hpp"

using namespace g2glue;
using namespace g2glue::kummer;

namespace {

bool contains(const std::vector<TorusIsometry>& g, const TorusIsometry& x) {
  for (const auto& e : g)
    if (e == x) return true;
  return false;
}

double max_abs(const ext::Form& f) {
  double m = 0.0;
  for (double c : f.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

TEST_CASE("group is Z2 cubed") {
  const auto g = gamma_elements();
  REQUIRE(g.size() == 8);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j) CHECK_FALSE(g[i] == g[j]);
  for (const auto& a : g) {
    CHECK(compose(a, a).is_identity());
    CHECK(a.determinant() == 1);
    for (const auto& b : g) {
      CHECK(contains(g, compose(a, b)));
      CHECK(compose(a, b) == compose(b, a));
    }
  }
  CHECK(compose(alpha(), beta()) == compose(beta(), alpha()));
  CHECK(compose(alpha(), alpha()).is_identity());
}

TEST_CASE("group maps act on points as affine involutions") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& g : gamma_elements()) {
    std::array<double, 7> x{};
    for (double& c : x) c = u(rng);
    const auto y = g.apply(g.apply(x));
    for (int i = 0; i < 7; ++i) {
      const double d = std::abs(y[i] - x[i]);
      CHECK(std::min(d, 1.0 - d) < 1e-15);
    }
  }
  const auto b = beta().apply({0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1});
  CHECK(b[1] == doctest::Approx(0.4));
  CHECK(b[6] == doctest::Approx(0.1));
}

TEST_CASE("group preserves the reversed standard 3-form") {
  const ext::Form phi = invariant_three_form();
  // Reversing seven coordinates is an odd permutation.
  CHECK(ext::metric_from_g2(phi).orientation == -1);
  for (const auto& g : gamma_elements()) CHECK(max_abs(pullback(g, phi) - phi) == 0.0);
  CHECK(max_abs(pullback(alpha(), ext::phi0()) - ext::phi0()) > 0.0);
}

TEST_CASE("five-flip variant of beta cannot preserve a G2 structure") {
  TorusIsometry variant = beta();
  variant.signs[6] = -1;
  CHECK(variant.determinant() == -1);
  const FixedSet f = fixed_point_tori(variant);
  CHECK(f.tori.size() == 32);
  CHECK(f.tori.front().free_indices().size() == 2);
  const ext::Form phi = invariant_three_form();
  CHECK(max_abs(pullback(variant, phi) + phi) > 0.0);
  CHECK(max_abs(pullback(variant, phi) - phi) > 0.0);
}

TEST_CASE("fixed point sets") {
  const auto g = gamma_elements();
  CHECK(fixed_point_tori(g[0]).whole_torus);
  CHECK(fixed_point_tori(g[0]).tori.empty());
  const std::array<std::vector<int>, 3> free{std::vector<int>{5, 6, 7}, {3, 4, 7}, {2, 4, 6}};
  for (int i = 1; i <= 3; ++i) {
    const FixedSet f = fixed_point_tori(g[i]);
    CHECK_FALSE(f.whole_torus);
    REQUIRE(f.tori.size() == 16);
    std::set<FixedTorus> distinct(f.tori.begin(), f.tori.end());
    CHECK(distinct.size() == 16);
    for (const auto& t : f.tori) {
      CHECK(t.free_indices() == free[i - 1]);
      CHECK(image(g[i], t) == t);
    }
  }
  for (int i = 4; i < 8; ++i) {
    INFO(g[i].name);
    CHECK(fixed_point_tori(g[i]).tori.empty());
    CHECK_FALSE(fixed_point_tori(g[i]).whole_torus);
  }
}

TEST_CASE("fixed tori consist of fixed points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& g : gamma_elements()) {
    for (const auto& t : fixed_point_tori(g).tori) {
      std::array<double, 7> x{};
      for (int i = 0; i < 7; ++i) x[i] = t.pinned[i] < 0 ? u(rng) : t.pinned[i] / 4.0;
      const auto y = g.apply(x);
      for (int i = 0; i < 7; ++i) {
        const double d = std::abs(y[i] - x[i]);
        CHECK(std::min(d, 1.0 - d) < 1e-15);
      }
    }
  }
  CHECK(fixed_point_tori(beta()).tori.front().str() == "(0,1/4,x3,x4,0,0,x7)");
}

TEST_CASE("singular set has twelve disjoint components") {
  const SingularSet s = singular_components();
  REQUIRE(s.components.size() == 12);
  CHECK(s.free_action);
  CHECK(s.stabilised);
  CHECK(s.disjoint);
  std::set<FixedTorus> all;
  int per[3] = {0, 0, 0};
  for (std::size_t i = 0; i < s.components.size(); ++i) {
    const auto& c = s.components[i];
    CHECK(c.id == static_cast<int>(i) + 1);
    CHECK(c.orbit.size() == 4);
    all.insert(c.orbit.begin(), c.orbit.end());
    per[c.generator == "alpha" ? 0 : c.generator == "beta" ? 1 : 2]++;
    for (const auto& g : gamma_elements())
      for (const auto& t : c.orbit) {
        bool found = false;
        for (const auto& o : c.orbit) found = found || image(g, t) == o;
        CHECK(found);
      }
  }
  CHECK(all.size() == 48);
  CHECK(per[0] == 4);
  CHECK(per[1] == 4);
  CHECK(per[2] == 4);
}

TEST_CASE("invariant cohomology of the orbifold") {
  CHECK(invariant_betti(0) == 1);
  CHECK(invariant_betti(1) == 0);
  CHECK(invariant_betti(2) == 0);
  CHECK(invariant_betti(3) == 7);
  for (int p = 0; p <= 7; ++p) CHECK(invariant_betti(p) == invariant_betti(7 - p));
}

TEST_CASE("cutoff profile") {
  const double z = kZeta;
  CHECK(cutoff(z / 8) == 0.0);
  CHECK(cutoff(z / 4) == 0.0);
  CHECK(cutoff(z / 2) == 1.0);
  CHECK(cutoff(z) == 1.0);
  CHECK(cutoff(3 * z / 8) == doctest::Approx(0.5));
  CHECK(cutoff_derivative(z / 4) == 0.0);
  CHECK(cutoff_derivative(z / 2) == 0.0);
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double s = z / 4 + z / 4 * i / 1000.0;
    CHECK(cutoff(s) >= prev);
    prev = cutoff(s);
    const double h = 1e-7;
    if (i > 0 && i < 1000)
      CHECK(cutoff_derivative(s) == doctest::Approx((cutoff(s + h) - cutoff(s - h)) / (2 * h)).epsilon(1e-5));
  }
  // Second derivative vanishes at both ends.
  const double h = 1e-9;
  CHECK(std::abs(cutoff_derivative(z / 4 + h) / h) < 1e-2);
  CHECK(std::abs(cutoff_derivative(z / 2 - h) / h) < 1e-2);
}

TEST_CASE("flat distance and regions") {
  for (double r : {1e-6, 1e-4, 3e-4, 1e-2}) {
    CHECK(flat_distance(r) == doctest::Approx(2 * std::sqrt(r)).epsilon(1e-12));
    CHECK(radius_at_distance(flat_distance(r)) == doctest::Approx(r).epsilon(1e-12));
  }
  const GluingModel m(0.01);
  CHECK(m.region(radius_at_distance(kZeta / 8)) == Region::Inner);
  CHECK(m.region(radius_at_distance(3 * kZeta / 8)) == Region::Annulus);
  CHECK(m.region(radius_at_distance(3 * kZeta / 4)) == Region::Outer);
  CHECK_THROWS_AS(m.region(0.0), DomainError);
  CHECK_THROWS_AS(GluingModel(0.0), DomainError);
  CHECK_THROWS_AS(GluingModel(1.0), DomainError);
}

TEST_CASE("inner plateau is the Eguchi-Hanson product structure") {
  for (double t : {0.2, 0.05, 0.005}) {
    const GluingModel m(t);
    for (double s : {kZeta / 40, kZeta / 8, 0.99 * kZeta / 4}) {
      const double r = radius_at_distance(s);
      const GluedStructure g = m.at(r);
      ext::Form flipped = ext::phi0();
      // The EH triple is the standard triple with delta1, delta2 reversed.
      ext::Matrix p = ext::Matrix::Identity(7, 7);
      p(0, 0) = -1;
      p(1, 1) = -1;
      flipped = ext::pullback(p, flipped);
      CHECK(max_abs(g.phi - flipped) < 1e-14);
      CHECK(max_abs(ext::theta(g.phi) - g.vartheta) < 1e-14);
      CHECK(m.product_metric_error(r) < 1e-12);
      CHECK(m.torsion_norm(r) < 1e-14);
    }
  }
}

TEST_CASE("outer plateau is the flat product structure") {
  for (double t : {0.1, 0.005}) {
    const GluingModel m(t);
    const eh::RadialForm flat = eh::flat_w1(eh::make_chart(m.k())).lifted(m.chart(), 3);
    for (double s : {0.51 * kZeta, 3 * kZeta / 4, kZeta}) {
      const double r = radius_at_distance(s);
      const eh::RadialForm diff = m.omega1(Region::Outer) - flat;
      CHECK(eh::relative_residual(diff, r) < 1e-12);
      CHECK(m.product_metric_error(r) < 1e-12);
      CHECK(m.torsion_norm(r) < 1e-14);
    }
  }
  const GluingModel m(0.1);
  CHECK_THROWS_AS(m.product_metric_error(radius_at_distance(3 * kZeta / 8)), DomainError);
}

TEST_CASE("glued forms are closed") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(kZeta / 4, kZeta / 2);
  for (double t : {0.1, 0.01}) {
    const GluingModel m(t);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) worst = std::max(worst, m.closedness_residual(radius_at_distance(u(rng))));
    CHECK(worst <= 1e-10);
    CHECK(m.closedness_residual(radius_at_distance(kZeta / 8)) <= 1e-10);
    CHECK(m.closedness_residual(radius_at_distance(3 * kZeta / 4)) <= 1e-10);
  }
}

TEST_CASE("torsion support and size") {
  for (double t : {0.1, 0.005}) {
    const GluingModel m(t);
    CHECK(m.torsion_norm(radius_at_distance(kZeta / 8)) <= 1e-14);
    CHECK(m.torsion_norm(radius_at_distance(3 * kZeta / 4)) <= 1e-14);
  }
  // The Eguchi-Hanson core reaches the annulus for t = 0.1.
  CHECK_THROWS_AS(GluingModel(0.1).torsion(radius_at_distance(3 * kZeta / 8)), NotG2Error);
  const double t = 0.005;
  const double psi = GluingModel(t).torsion_norm(radius_at_distance(3 * kZeta / 8));
  CHECK(psi > 0.0);
  CHECK(psi <= 6e6 * std::pow(t, 4));
}

TEST_CASE("torsion decays like t^4 once the core is inside the annulus") {
  TorsionFitSpec spec;
  spec.t_list = {0.008, 0.004, 0.002, 0.001};
  spec.samples = 2000;
  const TorsionFit fit = torsion_decay_fit(spec);
  REQUIRE(fit.slope);
  CHECK(*fit.slope >= 3.9);
  CHECK(*fit.slope <= 4.1);
  REQUIRE(fit.weighted_slope);
  CHECK(*fit.weighted_slope >= 3.9);
  REQUIRE(fit.ale_slope);
  CHECK(*fit.ale_slope == doctest::Approx(4.0).epsilon(0.025));
  REQUIRE(fit.t0);
  CHECK(*fit.t0 == 0.008);
  const double ratio = fit.rows[1].sup_psi / fit.rows[2].sup_psi;
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.1));
  for (const auto& r : fit.rows) CHECK(r.admissible);
  CHECK(fit.csv().rfind("t,admissible,first_failure_s,sup_psi", 0) == 0);
}

TEST_CASE("large gluing parameters leave the positive cone") {
  TorsionFitSpec spec;
  spec.t_list = {0.2, 0.1, 0.05, 0.025};
  spec.samples = 200;
  const TorsionFit fit = torsion_decay_fit(spec);
  for (const auto& r : fit.rows) {
    CHECK_FALSE(r.admissible);
    CHECK(r.first_failure > kZeta / 4);
    CHECK(r.first_failure < kZeta / 2);
  }
  CHECK_FALSE(fit.t0);
  CHECK_FALSE(fit.slope);
  spec.t_list = {0.5};
  CHECK_THROWS_AS(torsion_decay_fit(spec), DomainError);
}

TEST_CASE("approximate kernel") {
  const int b2 = invariant_betti(2);
  const ApproximateKernel kernel(0.005, b2);
  CHECK(kernel.jump(kZeta / 4) <= 1e-12);
  CHECK(kernel.jump(kZeta / 2) <= 1e-10 * kernel.field(radius_at_distance(kZeta / 2)).norm());
  CHECK(kernel.field(radius_at_distance(kZeta / 8)).norm() == 0.0);
  CHECK(kernel.field(radius_at_distance(3 * kZeta / 4)).norm() > 0.0);
  const auto g = kernel.gram();
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      if (i == j)
        CHECK(g[i][j] > 0.0);
      else
        CHECK(g[i][j] == 0.0);
    }
  CHECK(kernel.span_dimension() == 12 + b2);
  CHECK(ApproximateKernel(0.005, 3).span_dimension() == 15);
  CHECK_THROWS_AS(ApproximateKernel(0.005, -1), DomainError);
}
