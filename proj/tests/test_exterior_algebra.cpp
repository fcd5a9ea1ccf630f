#include "doctest.h"

#include "g2glue/exterior_algebra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

using namespace g2glue;
using namespace g2glue::ext;

namespace {

Form random_form(std::mt19937_64& rng, int dim, int degree, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Form f(dim, degree);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = n(rng);
  return f;
}

Form unit(Form f) { return f * (1.0 / f.norm()); }

double max_diff(const Form& a, const Form& b) { return (a - b).max_abs(); }

int perm_sign(const std::array<int, 7>& p) {
  int s = 1;
  for (int i = 0; i < 7; ++i)
    for (int j = i + 1; j < 7; ++j)
      if (p[i] > p[j]) s = -s;
  return s;
}

// Independent oracle: sum over all permutations of the top-form evaluation
// (a ^ b)(e_1..e_7) = 1/(3! 4!) sum_sigma sgn(sigma) a(e_s1,e_s2,e_s3) b(e_s4..e_s7).
double top_pairing_bruteforce(const Form& a3, const Form& b4) {
  std::array<int, 7> p{};
  std::iota(p.begin(), p.end(), 0);
  double acc = 0.0;
  do {
    const std::array<int, 3> i{p[0], p[1], p[2]};
    const std::array<int, 4> j{p[3], p[4], p[5], p[6]};
    acc += perm_sign(p) * a3.at(i) * b4.at(j);
  } while (std::next_permutation(p.begin(), p.end()));
  return acc / (6.0 * 24.0);
}

}  // namespace

TEST_CASE("wedge of basis 1-forms") {
  Form e1 = Form::basis(7, "1");
  Form e2 = Form::basis(7, "2");
  CHECK(max_diff(wedge(e1, e2), Form::basis(7, "12")) == 0.0);
  CHECK(max_diff(wedge(e2, e1), Form::basis(7, "12", -1.0)) == 0.0);
}

TEST_CASE("phi0 wedge its flat dual is seven volume forms") {
  Form top = wedge(phi0(), psi0());
  CHECK(top.size() == 1);
  CHECK(top[0] == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(top_pairing_bruteforce(phi0(), psi0()) == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("graded commutativity on random inputs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = static_cast<int>(rng() % 4), q = static_cast<int>(rng() % 4);
    Form a = random_form(rng, 7, p), b = random_form(rng, 7, q);
    const double sign = ((p * q) % 2 == 0) ? 1.0 : -1.0;
    CHECK(max_diff(wedge(a, b), sign * wedge(b, a)) < 1e-12);
  }
  Form odd = random_form(rng, 7, 3);
  CHECK(wedge(odd, odd).max_abs() < 1e-12);
}

TEST_CASE("wedge is associative") {
  std::mt19937_64 rng(3);
  Form a = random_form(rng, 7, 1), b = random_form(rng, 7, 2), c = random_form(rng, 7, 2);
  CHECK(max_diff(wedge(wedge(a, b), c), wedge(a, wedge(b, c))) < 1e-12);
}

TEST_CASE("wedge rejects mismatched operands") {
  CHECK_THROWS_AS(wedge(Form::basis(7, "1"), Form::basis(6, "1")), DimensionError);
  CHECK_THROWS_AS(wedge(Form(7, 4), Form(7, 4)), DimensionError);
}

TEST_CASE("unsorted index access returns the signed value") {
  Form f = Form::basis(7, "135", 2.0);
  const std::array<int, 3> idx{4, 0, 2};
  CHECK(f.at(idx) == doctest::Approx(2.0));  // (5,1,3) is an even permutation of (1,3,5)
  const std::array<int, 3> odd{2, 0, 4};
  CHECK(f.at(odd) == doctest::Approx(-2.0));
}

TEST_CASE("hodge star examples") {
  Metric g0 = Metric::identity(7);
  CHECK(max_diff(hodge_star(g0, Form::basis(7, "123")), Form::basis(7, "4567")) == 0.0);

  // *phi0 = vol_H - sum omega_i ^ dx_jk in the R^3 + H splitting.
  Form w1 = -(Form::basis(7, "45") + Form::basis(7, "67"));
  Form w2 = Form::basis(7, "57") - Form::basis(7, "46");
  Form w3 = Form::basis(7, "47") + Form::basis(7, "56");
  Form expected = Form::basis(7, "4567") - wedge(w1, Form::basis(7, "23")) -
                  wedge(w2, Form::basis(7, "31")) - wedge(w3, Form::basis(7, "12"));
  CHECK(max_diff(hodge_star(g0, phi0()), expected) < 1e-15);
  Form product = Form::basis(7, "123") - wedge(Form::basis(7, "1"), w1) -
                 wedge(Form::basis(7, "2"), w2) - wedge(Form::basis(7, "3"), w3);
  CHECK(max_diff(product, phi0()) == 0.0);

  const double c = 1.7;
  Form scaled = hodge_star(Metric::scaled(7, c * c), Form::basis(7, "123"));
  CHECK(max_diff(scaled, Form::basis(7, "4567", c)) < 1e-14);
}

TEST_CASE("conformal scaling law against a direct Gram computation") {
  std::mt19937_64 rng(5);
  for (int p = 0; p <= 7; ++p) {
    Form a = random_form(rng, 7, p);
    const double c = 1.3;
    Form lhs = hodge_star(Metric::scaled(7, c * c), a);
    Form rhs = std::pow(c, 7 - 2 * p) * hodge_star(Metric::identity(7), a);
    CHECK(max_diff(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("star is an involution in dimension 7 and realizes the inner product") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    Matrix m = Matrix::Random(7, 7);
    Matrix g = m * m.transpose() + 0.5 * Matrix::Identity(7, 7);
    Metric metric(g);
    for (int p = 0; p <= 7; ++p) {
      Form a = random_form(rng, 7, p);
      CHECK(max_diff(hodge_star(metric, hodge_star(metric, a)), a) < 1e-10);
      Form top = wedge(a, hodge_star(metric, a));
      CHECK(top[0] == doctest::Approx(inner(metric, a, a) * std::sqrt(metric.det())).epsilon(1e-10));
    }
  }
}

TEST_CASE("non-SPD metrics are rejected") {
  Matrix g = Matrix::Identity(7, 7);
  g(3, 3) = -1.0;
  CHECK_THROWS_AS(Metric{g}, NotSpdError);
}

TEST_CASE("interior product examples") {
  Vector e1 = Vector::Unit(7, 0), e2 = Vector::Unit(7, 1);
  CHECK(max_diff(interior_product(e1, Form::basis(7, "12")), Form::basis(7, "2")) == 0.0);
  CHECK(max_diff(interior_product(e2, Form::basis(7, "12")), Form::basis(7, "1", -1.0)) == 0.0);
  Form expected = Form::basis(7, "23") + Form::basis(7, "45") + Form::basis(7, "67");
  CHECK(max_diff(interior_product(e1, phi0()), expected) == 0.0);
  CHECK_THROWS_AS(interior_product(e1, Form(7, 0)), DimensionError);
}

TEST_CASE("interior product is a nilpotent antiderivation") {
  std::mt19937_64 rng(23);
  Vector v = Vector::Random(7);
  Form a = random_form(rng, 7, 2), b = random_form(rng, 7, 3);
  CHECK(interior_product(v, interior_product(v, b)).max_abs() < 1e-12);
  Form lhs = interior_product(v, wedge(a, b));
  Form rhs = wedge(interior_product(v, a), b) + wedge(a, interior_product(v, b));
  CHECK(max_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("metric from the standard 3-form is the identity") {
  G2Metric m = metric_from_g2(phi0());
  CHECK((m.g.matrix() - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.volume == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.orientation == 1);
}

TEST_CASE("metric reconstruction is homogeneous under dilation") {
  const double c = 1.6;
  Matrix a = c * Matrix::Identity(7, 7);
  G2Metric m = metric_from_g2(pullback(a, phi0()));
  CHECK((m.g.matrix() - c * c * Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(max_diff(pullback(a, phi0()), std::pow(c, 3) * phi0()) < 1e-12);
}

TEST_CASE("small perturbations keep the metric close to flat") {
  std::mt19937_64 rng(31);
  Form chi = unit(random_form(rng, 7, 3)) * 1e-3;
  G2Metric m = metric_from_g2(phi0() + chi);
  CHECK((m.g.matrix() - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("a degenerate 3-form is rejected") {
  CHECK_THROWS_AS(metric_from_g2(Form::basis(7, "123")), NotG2Error);
}

TEST_CASE("metric for a general linear change of frame") {
  std::mt19937_64 rng(41);
  Matrix a = Matrix::Identity(7, 7) + 0.3 * Matrix::Random(7, 7);
  REQUIRE(a.determinant() > 0.0);
  G2Metric m = metric_from_g2(pullback(a, phi0()));
  CHECK((m.g.matrix() - a.transpose() * a).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("cross product examples") {
  Metric g0 = Metric::identity(7);
  auto e = [](int i) { return Vector::Unit(7, i - 1); };
  CHECK((cross_product(phi0(), g0, e(1), e(2)) - e(3)).norm() < 1e-15);
  CHECK(cross_product(phi0(), g0, e(1), e(1)).norm() == 0.0);
  CHECK((cross_product(phi0(), g0, e(1), e(4)) - e(5)).norm() < 1e-15);
  Vector u = Vector::Random(7), v = Vector::Random(7);
  Vector w = cross_product(phi0(), g0, u, v);
  CHECK(std::abs(w.dot(u)) < 1e-12);
  CHECK(std::abs(w.dot(v)) < 1e-12);
  CHECK((w + cross_product(phi0(), g0, v, u)).norm() < 1e-12);
  CHECK(w.squaredNorm() == doctest::Approx(u.squaredNorm() * v.squaredNorm() - std::pow(u.dot(v), 2)));
}

TEST_CASE("theta examples") {
  CHECK(max_diff(theta(phi0()), psi0()) < 1e-14);
  const double l = 2.0;
  CHECK(max_diff(theta(std::pow(l, 3) * phi0()), std::pow(l, 4) * psi0()) < 1e-12);
}

TEST_CASE("theta is equivariant under linear changes of frame") {
  Matrix a = Matrix::Identity(7, 7) + 0.25 * Matrix::Random(7, 7);
  REQUIRE(a.determinant() > 0.0);
  CHECK(max_diff(theta(pullback(a, phi0())), pullback(a, theta(phi0()))) < 1e-11);
  // Orientation-reversing reflection x1 -> -x1.
  Matrix r = Matrix::Identity(7, 7);
  r(0, 0) = -1.0;
  G2Metric m = metric_from_g2(pullback(r, phi0()));
  CHECK(m.orientation == -1);
  CHECK(max_diff(theta(pullback(r, phi0())), pullback(r, theta(phi0()))) < 1e-12);
}

TEST_CASE("theta commutes with G2-preserving signed permutations") {
  // Signed coordinate permutations fixing phi0, found by exhaustive search over sign flips.
  int found = 0;
  for (int signs = 0; signs < 128; ++signs) {
    Matrix a = Matrix::Identity(7, 7);
    for (int i = 0; i < 7; ++i)
      if (signs & (1 << i)) a(i, i) = -1.0;
    if (max_diff(pullback(a, phi0()), phi0()) > 0.0) continue;
    ++found;
    Form phi = phi0() + 0.01 * Form::basis(7, "124");
    CHECK(max_diff(theta(pullback(a, phi)), pullback(a, theta(phi))) < 1e-12);
  }
  CHECK(found == 8);
}

TEST_CASE("theta split at zero and linearity of T") {
  ThetaSplit zero = theta_split(phi0(), Form(7, 3));
  CHECK(zero.t_of_chi.max_abs() == 0.0);
  CHECK(zero.f_of_chi.max_abs() == 0.0);
  std::mt19937_64 rng(7);
  Form chi = unit(random_form(rng, 7, 3));
  for (double s : {1e-1, 1e-3}) {
    Form lhs = theta_linear(phi0(), s * chi);
    Form rhs = s * theta_linear(phi0(), chi);
    CHECK(max_diff(lhs, rhs) < 1e-10);
  }
}

TEST_CASE("F is quadratic in the perturbation") {
  std::mt19937_64 rng(13);
  Form chi = unit(random_form(rng, 7, 3));
  const double f2 = theta_split(phi0(), 1e-2 * chi).f_of_chi.norm();
  const double f3 = theta_split(phi0(), 1e-3 * chi).f_of_chi.norm();
  CHECK(std::log10(f2 / f3) == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("T matches the known linearization at phi0") {
  // DTheta(chi) = *((4/3) pi1 + pi7 - pi27) chi at the flat structure, checked on the
  // three type components separately.
  Metric g0 = Metric::identity(7);
  Form p1 = phi0();
  Form p7 = interior_product(Vector::Unit(7, 2), psi0());
  // Traceless diagonal matrices act on phi0 with values in the 27-dimensional summand.
  Matrix h = Matrix::Zero(7, 7);
  h(0, 0) = 1.0;
  h(1, 1) = -1.0;
  Form p27(7, 3);
  for (int i = 0; i < 7; ++i) {
    if (h(i, i) == 0.0) continue;
    p27 += h(i, i) * wedge(Form::basis(7, std::string(1, static_cast<char>('1' + i))),
                           interior_product(Vector::Unit(7, i), phi0()));
  }
  CHECK(max_diff(-theta_linear(phi0(), p1), (4.0 / 3.0) * hodge_star(g0, p1)) < 1e-9);
  CHECK(max_diff(-theta_linear(phi0(), p7), hodge_star(g0, p7)) < 1e-9);
  CHECK(max_diff(-theta_linear(phi0(), p27), -1.0 * hodge_star(g0, p27)) < 1e-9);
}

TEST_CASE("pi1 projection") {
  CHECK(max_diff(pi1_project(phi0(), phi0()), phi0()) < 1e-14);
  CHECK(pi1_project(phi0(), Form::basis(7, "124")).max_abs() == 0.0);
  std::mt19937_64 rng(19);
  Form chi = random_form(rng, 7, 3);
  Form p = pi1_project(phi0(), chi);
  CHECK(max_diff(pi1_project(phi0(), p), p) < 1e-12);
  Form phi = phi0() + 0.05 * random_form(rng, 7, 3);
  CHECK(max_diff(pi1_project(phi, phi), phi) < 1e-12);
}

TEST_CASE("form json round trip") {
  std::mt19937_64 rng(2);
  Form f = random_form(rng, 7, 3);
  Form g = form_from_json(to_json(f));
  CHECK(max_diff(f, g) == 0.0);
  CHECK(to_json(Form::basis(7, "123", 2.5)) == R"({"dim":7,"degree":3,"coeffs":{"123":2.5}})");
}
