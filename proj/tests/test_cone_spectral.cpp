#include "doctest.h"

#include "g2glue/cone_spectral.hpp"
#include "g2glue/errors.hpp"

using namespace g2glue;
using namespace g2glue::cone;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

const LinkSpectrum& so3() {
  static const LinkSpectrum s = LinkSpectrum::so3(400);
  return s;
}

}  // namespace

TEST_CASE("surd arithmetic and ordering") {
  Surd r2 = Surd::sqrt(2);
  CHECK(r2 * r2 == Surd(2));
  CHECK(Surd::sqrt(q(9, 4)) == Surd(q(3, 2)));
  CHECK(Surd::sqrt(8) == Surd(2) * r2);
  CHECK(r2 > Surd(q(141, 100)));
  CHECK(r2 < Surd(q(142, 100)));
  CHECK((Surd(1) - r2).sign() == -1);
  CHECK((Surd(1) + r2).inverse() * (Surd(1) + r2) == Surd(1));
  CHECK_THROWS_AS(Surd::sqrt(2) + Surd::sqrt(3), DomainError);
  CHECK(parse_rational("-19/10") == q(-19, 10));
  CHECK(parse_rational("0.05") == q(1, 20));
  CHECK(parse_rational("-3") == q(-3));
  CHECK_THROWS_AS(parse_rational("1/0"), DomainError);
  CHECK_THROWS_AS(parse_rational("abc"), DomainError);
}

TEST_CASE("link spectra") {
  const auto s3 = LinkSpectrum::s3(40);
  const auto f = s3.entries(0);
  REQUIRE(f.size() >= 4);
  CHECK(f[0].eigenvalue == 0);
  CHECK(f[1].eigenvalue == 3);
  CHECK(f[1].multiplicity == 4);
  CHECK(f[1].parity == -1);

  std::vector<Rational> so3_functions;
  for (const auto& e : so3().entries(0))
    if (e.eigenvalue <= 24) so3_functions.push_back(e.eigenvalue);
  CHECK(so3_functions == std::vector<Rational>{0, 8, 24});

  const auto one = so3().entries(1);
  REQUIRE(!one.empty());
  CHECK(one[0].eigenvalue == 4);
  CHECK(one[0].multiplicity == 6);
  CHECK(one[0].kind == FormKind::Coexact);
  for (int deg = 0; deg <= 3; ++deg)
    for (const auto& e : so3().entries(deg)) {
      CHECK(e.eigenvalue >= 0);
      CHECK(e.parity == 1);
    }
  // Eigenvalues ascend.
  for (int deg = 0; deg <= 1; ++deg) {
    auto v = so3().entries(deg);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i - 1].eigenvalue <= v[i].eigenvalue);
  }
}

TEST_CASE("cone Laplacian algebra") {
  // j = 0 with a generic pair reproduces the defining combinations.
  LinkBlock blk{BlockKind::Pair, 4, Surd(3), Surd(5)};
  const Surd lam(q(-1, 2));
  auto r = cone_laplacian_apply(lam, 2, 4, 0, {blk});
  const Surd P = (lam + Surd(0)) * (lam + Surd(2));
  const Surd Q = (lam + Surd(0)) * (lam + Surd(2));
  CHECK(r.by_power[0][0][0] == Surd(4) * Surd(3) - P * Surd(3) - Surd(2) * Surd(4) * Surd(5));
  CHECK(r.by_power[0][0][1] == Surd(4) * Surd(5) - Q * Surd(5) - Surd(2) * Surd(3));

  // j = 1, case-(iii) pair at lambda = -2: only the log-descent terms 2 alpha, 2 beta survive.
  LinkBlock kern{BlockKind::Pair, 4, Surd(2), Surd(1)};
  auto l = cone_laplacian_apply(Surd(-2), 2, 4, 1, {kern});
  CHECK(l.by_power[1][0][0].is_zero());
  CHECK(l.by_power[1][0][1].is_zero());
  CHECK(l.by_power[0][0][0] == Surd(4));
  CHECK(l.by_power[0][0][1] == Surd(2));

  CHECK(cone_laplacian_apply(Surd(-2), 2, 4, 2, {LinkBlock{BlockKind::Pair, 4, Surd(), Surd()}}).is_zero());
  CHECK_THROWS_AS(cone_laplacian_apply(Surd(-2), 2, 4, 0, {LinkBlock{BlockKind::Pair, -1, Surd(1), Surd()}}),
                  DomainError);
  CHECK_THROWS_AS(cone_laplacian_apply(Surd(-2), 2, 4, 0, {LinkBlock{BlockKind::Pair, 0, Surd(1), Surd()}}),
                  DomainError);
  CHECK_THROWS_AS(
      cone_laplacian_apply(Surd(-2), 2, 4, 0, {LinkBlock{BlockKind::ClosedAlpha, 0, Surd(1), Surd(1)}}),
      DomainError);
}

TEST_CASE("critical rates on the cone over SO(3)") {
  CHECK(critical_rates(so3(), 1, Interval::half_open(-2, 0)).empty());
  CHECK(critical_rates(so3(), 2, Interval::open(-2, 0)).empty());

  auto at2 = critical_rates(so3(), 2, Interval::point(-2));
  REQUIRE(at2.size() == 1);
  CHECK(at2[0].tag == CaseTag::III);
  CHECK(at2[0].dimension == 6);
  CHECK(at2[0].eigenvalue == 4);

  auto window = rate_dimensions(critical_rates(so3(), 2, Interval::half_open(q(-39, 10), 0)));
  REQUIRE(window.size() == 1);
  CHECK(window[0].first == Surd(-2));
  CHECK(window[0].second == 6);

  // Harmonic functions: constants and rho^-2.
  auto fun = rate_dimensions(critical_rates(so3(), 0, Interval::closed(-2, 0)));
  REQUIRE(fun.size() == 2);
  CHECK(fun[0].first == Surd(-2));
  CHECK(fun[1].first == Surd(0));

  // On S^3 the order -2 exact 1-form eigenvalue 3 produces a degree-1 rate the quotient lacks.
  CHECK(!critical_rates(LinkSpectrum::s3(100), 1, Interval::half_open(-2, 0)).empty());

  CHECK_THROWS_AS(critical_rates(LinkSpectrum::so3(3), 2, Interval::half_open(-10, 0)), DomainError);
}

TEST_CASE("irrational critical rates are exact") {
  // Synthetic link with a non-square eigenvalue: (lambda + 1)(lambda + 3) = 5 gives -2 +- sqrt(6).
  LinkSpectrum link;
  link.name = "synthetic";
  link.ceiling = 200;
  link.low[0] = {{0, 1, FormKind::Harmonic, 1}, {5, 2, FormKind::Coexact, 1}};
  auto rates = critical_rates(link, 1, Interval::open(-8, 8));
  bool found = false;
  for (const auto& r : rates) {
    if (!r.lambda.is_rational()) {
      found = true;
      CHECK(log_kernel_check(link, r.lambda, 1));
    }
    // Substitution back into the cone Laplacian gives zero.
    const auto h = block_operator(r.tag == CaseTag::I    ? BlockKind::ClosedAlpha
                                  : r.tag == CaseTag::IV ? BlockKind::CoclosedBeta
                                                         : BlockKind::Pair,
                                  r.eigenvalue, r.lambda, 1, 4);
    if (h.size() == 1) {
      CHECK(h[0][0].is_zero());
    } else {
      CHECK((h[0][0] * h[1][1] - h[0][1] * h[1][0]).is_zero());
    }
  }
  CHECK(found);
  auto m = rate_dimensions(critical_rates(link, 1, Interval::open(-5, 0)));
  // Case (ii) gives -2 - sqrt(6), case (i) gives -3, case (iii) gives -sqrt(6).
  REQUIRE(m.size() == 3);
  CHECK(m[0].first == Surd(-2) - Surd::sqrt(6));
  CHECK(m[1].first == Surd(-3));
  CHECK(m[2].first == -Surd::sqrt(6));
  // Every rate on the S^3 and SO(3) tables is rational.
  for (int p = 0; p <= 4; ++p)
    for (const auto& r : critical_rates(LinkSpectrum::s3(400), p, Interval::closed(-12, 10)))
      CHECK(r.lambda.is_rational());
}

TEST_CASE("every produced rate annihilates its block") {
  for (int p = 0; p <= 4; ++p) {
    for (const auto& r : critical_rates(so3(), p, Interval::closed(-6, 4))) {
      CHECK(r.dimension > 0);
      LinkBlock blk;
      blk.mu = r.eigenvalue;
      if (r.tag == CaseTag::I) {
        blk.kind = BlockKind::ClosedAlpha;
        blk.a = Surd(1);
      } else if (r.tag == CaseTag::IV) {
        blk.kind = BlockKind::CoclosedBeta;
        blk.b = Surd(1);
      } else {
        // Kernel vector of [[mu - P, -2 mu], [-2, mu - Q]]: (2 mu, mu - P).
        blk.kind = BlockKind::Pair;
        auto h = block_operator(BlockKind::Pair, r.eigenvalue, r.lambda, p, 4);
        blk.a = Surd(2) * Surd(r.eigenvalue);
        blk.b = h[0][0];
      }
      CHECK(cone_laplacian_apply(r.lambda, p, 4, 0, {blk}).is_zero());
    }
  }
}

TEST_CASE("degree swap symmetry between functions and top forms") {
  auto f = rate_dimensions(critical_rates(so3(), 0, Interval::closed(-8, 6)));
  auto t = rate_dimensions(critical_rates(so3(), 4, Interval::closed(-8, 6)));
  REQUIRE(f.size() == t.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f[i].first == t[i].first);
    CHECK(f[i].second == t[i].second);
  }
}

TEST_CASE("log kernel check") {
  CHECK(log_kernel_check(so3(), Surd(-2), 2));
  CHECK(log_kernel_check(so3(), Surd(q(-3, 2)), 2));  // no kernel: vacuous
  // A nilpotent block admits (log r) gamma_1 + gamma_0 solutions.
  std::vector<std::vector<Surd>> nil{{Surd(0), Surd(1)}, {Surd(0), Surd(0)}};
  CHECK_FALSE(log_kernel_check_block(nil, Surd(-2), 4));
  // At the coincidence rate the first-order descent term vanishes.
  CHECK(log_kernel_check(so3(), Surd(-1), 2));
}

TEST_CASE("index change") {
  CHECK(index_change(so3(), 2, -3, -1) == 6);
  CHECK(index_change(so3(), 1, q(-19, 10), q(-1, 10)) == 0);
  CHECK(index_change(so3(), 2, q(-19, 10), q(-1, 10)) == 0);
  CHECK_THROWS_AS(index_change(so3(), 2, -2, -1), DomainError);
  CHECK_THROWS_AS(index_change(so3(), 2, -1, -3), DomainError);
}

TEST_CASE("harmonic oracle on R^4") {
  auto six = order_minus_two_candidates();
  REQUIRE(six.size() == 6);
  for (const auto& c : six) {
    auto r = harmonic_oracle_r4(c);
    CHECK(r.residual == 0.0);
    CHECK(r.order == -2);
  }
  auto nu = harmonic_oracle_r4(nu_flat_limit());
  CHECK(nu.residual == 0.0);
  CHECK(nu.order == -4);
  CHECK(harmonic_oracle_r4(hatted_flat_limit()).residual == 0.0);
  CHECK(harmonic_oracle_r4(perturbed_candidate()).residual > 0.0);

  CartesianTwoForm mixed{"mixed", {}};
  mixed.comp[0] = RhoPolynomial::monomial(1, {0, 0, 0, 0}, -1) + RhoPolynomial::monomial(1, {0, 0, 0, 0}, -2);
  CHECK_THROWS_AS(harmonic_oracle_r4(mixed), DomainError);
}

TEST_CASE("rho polynomial canonical form") {
  // x1^2 + x2^2 + x3^2 + x4^2 - rho^2 = 0.
  RhoPolynomial p = RhoPolynomial::monomial(-1, {0, 0, 0, 0}, 1);
  for (int i = 0; i < 4; ++i) p += RhoPolynomial::coordinate(i) * RhoPolynomial::coordinate(i);
  CHECK(p.is_zero());
  // rho^-2 is harmonic on R^4, rho^-1 is not.
  CHECK(RhoPolynomial::monomial(1, {0, 0, 0, 0}, -1).laplacian().is_zero());
  CHECK_FALSE(RhoPolynomial::monomial(1, {0, 0, 0, 0}, q(-1, 2)).laplacian().is_zero());
}

TEST_CASE("S^3 function spectrum") {
  for (int m = 0; m <= 8; ++m) {
    auto r = s3_function_spectrum_check(m);
    CHECK(r.eigenvalue == m * (m + 2));
    CHECK(r.residual == 0.0);
    CHECK(r.parity == (m % 2 == 0 ? 1 : -1));
  }
  CHECK(s3_function_spectrum_check(2).eigenvalue == 8);
  CHECK(s3_function_spectrum_check(1).eigenvalue == 3);
  CHECK_THROWS_AS(s3_function_spectrum_check(9), DomainError);
}

TEST_CASE("weighted torsion exponent of the naive table") {
  for (const Rational& beta : {q(-1, 20), q(-1), q(-3), q(-39, 10)}) {
    auto r = jk_rate_bound(naive_jk_table(q(-1, 5)), EpsRational(2 - beta));
    REQUIRE(r.exponent);
    CHECK(*r.exponent == EpsRational(q(4, 5) * (2 - beta)));
  }
  const EpsRational beta = -EpsRational::eps();
  auto r = jk_rate_bound(naive_jk_table(q(-1, 5)), EpsRational(2) - beta);
  CHECK(*r.exponent == EpsRational(q(8, 5), q(4, 5)));

  std::vector<Rational> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(q(-i, 20));
  auto best = best_interpolation_parameter(grid, EpsRational(2));
  CHECK(best.first == q(-1, 5));
  CHECK(best.second == EpsRational(q(8, 5)));
}

TEST_CASE("refined table") {
  auto r = jk_rate_bound(refined_jk_table(), EpsRational(2) + EpsRational::eps());
  REQUIRE(r.exponent);
  CHECK(*r.exponent == EpsRational(q(8, 3), q(8, 9)));
  // The sharp exponent dominates the stated 13/5 for every beta < 0.
  for (const Rational& beta : {q(-1, 100), q(-1, 2), q(-1)}) {
    auto s = jk_rate_bound(refined_jk_table(), EpsRational(2 - beta));
    CHECK(*s.exponent == EpsRational(q(8, 9) * (3 - beta)));
    CHECK(*s.exponent > EpsRational(q(13, 5)));
  }
}

TEST_CASE("rate calculator edge cases") {
  std::vector<RatePiece> none{{"all", std::nullopt, 0, {}}};
  CHECK_FALSE(jk_rate_bound(none, EpsRational(2)).exponent.has_value());
  std::vector<RatePiece> gap{{"a", std::nullopt, 0, {{0, 0}}}, {"b", q(-1, 2), q(-1), {{0, 0}}}};
  CHECK_THROWS_AS(jk_rate_bound(gap, EpsRational(2)), DomainError);
  std::vector<RatePiece> singular{{"a", std::nullopt, 0, {{0, -1}}}};
  CHECK_THROWS_AS(jk_rate_bound(singular, EpsRational(2)), DomainError);
  CHECK_THROWS_AS(naive_jk_table(q(1, 2)), DomainError);
}

TEST_CASE("existence hypothesis feasibility") {
  const EpsRational eps = EpsRational::eps();
  const EpsRational beta = -eps, alpha = eps;
  CHECK(kappa_admissible(q(8, 5), beta, alpha));
  CHECK(l_infinity_exponent(q(8, 5), beta) == EpsRational(q(3, 5), -1));
  CHECK(kappa_admissible(q(13, 5), beta, alpha));
  CHECK(l_infinity_exponent(q(13, 5), beta) == EpsRational(q(8, 5), -1));
  CHECK(kappa_admissible(4, beta, alpha));
  CHECK_FALSE(kappa_admissible(1, beta, alpha));
}
