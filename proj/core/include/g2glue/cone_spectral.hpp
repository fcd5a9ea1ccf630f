#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace g2glue::cone {

using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
                                               boost::multiprecision::et_off>;

std::string to_string(const Rational& q);
Rational parse_rational(const std::string& text);  ///< "p", "p/q" or a finite decimal

/// Element a + b sqrt(d) of a real quadratic field; d is square-free and positive.
///
/// d = 1 denotes the rationals (b is then always 0). Mixing two different
/// fields is an error unless one operand is rational.
class Surd {
 public:
  Surd() = default;
  Surd(Rational a) : a_(std::move(a)) {}  // NOLINT: rationals embed implicitly
  Surd(int a) : a_(a) {}                  // NOLINT
  static Surd make(Rational a, Rational b, Integer d);
  /// Square root of a non-negative rational.
  static Surd sqrt(const Rational& q);

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  const Integer& d() const { return d_; }
  bool is_rational() const { return b_ == 0; }
  bool is_zero() const { return a_ == 0 && b_ == 0; }
  int sign() const;
  double to_double() const;
  std::string str() const;

  Surd conjugate() const { return make(a_, -b_, d_); }
  Surd inverse() const;

  Surd& operator+=(const Surd& o);
  Surd& operator-=(const Surd& o);
  Surd& operator*=(const Surd& o);
  Surd& operator/=(const Surd& o) { return *this *= o.inverse(); }
  friend Surd operator+(Surd x, const Surd& y) { return x += y; }
  friend Surd operator-(Surd x, const Surd& y) { return x -= y; }
  friend Surd operator*(Surd x, const Surd& y) { return x *= y; }
  friend Surd operator/(Surd x, const Surd& y) { return x /= y; }
  friend Surd operator-(const Surd& x) { return make(-x.a_, -x.b_, x.d_); }

  friend bool operator==(const Surd& x, const Surd& y) { return (x - y).is_zero(); }
  friend bool operator<(const Surd& x, const Surd& y) { return (x - y).sign() < 0; }
  friend bool operator<=(const Surd& x, const Surd& y) { return (x - y).sign() <= 0; }
  friend bool operator>(const Surd& x, const Surd& y) { return (x - y).sign() > 0; }
  friend bool operator>=(const Surd& x, const Surd& y) { return (x - y).sign() >= 0; }

 private:
  void unify(const Surd& o);
  Rational a_{0}, b_{0};
  Integer d_{1};
};

// ---------------------------------------------------------------- link data

enum class FormKind { Exact, Coexact, Harmonic };
const char* to_string(FormKind k);

struct SpectrumEntry {
  Rational eigenvalue;
  long multiplicity = 0;
  FormKind kind = FormKind::Coexact;
  int parity = 1;  ///< +1 even, -1 odd under the antipodal map of S^3
};

/// Hodge-Laplacian spectrum of a 3-dimensional link, complete up to `ceiling`.
struct LinkSpectrum {
  std::string name;
  Rational ceiling;
  std::array<std::vector<SpectrumEntry>, 2> low;  ///< degrees 0 and 1

  /// Entries for link degree q in 0..3; degrees 2 and 3 by Hodge duality.
  std::vector<SpectrumEntry> entries(int q) const;

  static LinkSpectrum s3(const Rational& ceiling);
  /// Even-parity part of the S^3 data.
  static LinkSpectrum so3(const Rational& ceiling);
};

// ---------------------------------------------------- cone Laplacian algebra

/// Symbolic link datum of one eigen-block.
///
/// Pair: alpha = a e, beta = b de with e coexact and Delta e = mu e.
/// ClosedAlpha: alpha = a g with dg = 0, Delta g = mu g, beta = 0.
/// CoclosedBeta: alpha = 0, beta = b h with d*h = 0, Delta h = mu h.
enum class BlockKind { Pair, ClosedAlpha, CoclosedBeta };

struct LinkBlock {
  BlockKind kind = BlockKind::Pair;
  Rational mu;
  Surd a, b;
};

/// Coefficients (A on the alpha generator, B on the beta generator) per power of log r.
struct LogCoefficients {
  std::vector<std::vector<std::array<Surd, 2>>> by_power;  ///< [power][block] -> {A, B}
  bool is_zero() const;
};

/// Delta((log r)^j gamma) for gamma = r^(lambda+k) (dr/r ^ alpha + beta) on the cone
/// of dimension n, with alpha, beta given block by block.
LogCoefficients cone_laplacian_apply(const Surd& lambda, int k, int n, int j, const std::vector<LinkBlock>& data);

/// The u-coefficient matrix of one block at rate lambda (1x1 or 2x2).
std::vector<std::vector<Surd>> block_operator(BlockKind kind, const Rational& mu, const Surd& lambda, int k, int n);

// ---------------------------------------------------------- critical rates

enum class CaseTag { I, II, III, IV, II_III };
const char* to_string(CaseTag c);

struct HomogeneousRate {
  Surd lambda;
  int degree = 0;
  CaseTag tag = CaseTag::I;
  Rational eigenvalue;
  long dimension = 0;
};

struct Interval {
  Rational lo, hi;
  bool lo_closed = true, hi_closed = false;
  bool contains(const Surd& x) const;
  static Interval closed(Rational lo, Rational hi) { return {std::move(lo), std::move(hi), true, true}; }
  static Interval open(Rational lo, Rational hi) { return {std::move(lo), std::move(hi), false, false}; }
  static Interval half_open(Rational lo, Rational hi) { return {std::move(lo), std::move(hi), true, false}; }
  static Interval point(const Rational& x) { return closed(x, x); }
};

/// All homogeneous harmonic p-forms of order lambda in the interval on the
/// n-dimensional cone over the link, grouped by (lambda, case).
std::vector<HomogeneousRate> critical_rates(const LinkSpectrum& link, int p, const Interval& range, int n = 4);

/// Total homogeneous dimension at each distinct rate, ascending.
std::vector<std::pair<Surd, long>> rate_dimensions(const std::vector<HomogeneousRate>& rates);

/// True iff the log-polynomial kernel at lambda consists of homogeneous solutions only.
bool log_kernel_check(const LinkSpectrum& link, const Surd& lambda, int p, int n = 4);

/// The same descent for one explicit block operator H.
bool log_kernel_check_block(const std::vector<std::vector<Surd>>& h, const Surd& lambda, int n, int max_log_power = 4);

/// Sum of kernel dimensions at the critical rates strictly between lambda1 and lambda2.
long index_change(const LinkSpectrum& link, int p, const Rational& lambda1, const Rational& lambda2, int n = 4);

// ------------------------------------------------------ polynomial oracles

/// Term c x^a (rho^2)^s on R^4.
struct MonomialKey {
  std::array<int, 4> a{};
  Rational s;
  friend bool operator<(const MonomialKey& x, const MonomialKey& y) {
    return x.a != y.a ? x.a < y.a : x.s < y.s;
  }
};

class RhoPolynomial {
 public:
  RhoPolynomial() = default;
  static RhoPolynomial monomial(const Rational& c, std::array<int, 4> a, const Rational& s = 0);
  static RhoPolynomial coordinate(int i);

  const std::map<MonomialKey, Rational>& terms() const { return terms_; }
  RhoPolynomial derivative(int i) const;
  RhoPolynomial laplacian() const;  ///< sum_i d_i^2 (analyst's sign)
  RhoPolynomial euler() const;      ///< sum_i x_i d_i
  RhoPolynomial antipode() const;   ///< p(-x)
  /// Brings every term to the lowest rho power in its class and expands rho^2.
  RhoPolynomial canonical() const;
  bool is_zero() const { return canonical().terms_.empty(); }
  double max_abs_coefficient() const;
  /// Common order of homogeneity, if all terms share it.
  std::optional<Rational> order() const;

  RhoPolynomial& operator+=(const RhoPolynomial& o);
  RhoPolynomial& operator-=(const RhoPolynomial& o);
  RhoPolynomial& operator*=(const Rational& c);
  friend RhoPolynomial operator+(RhoPolynomial x, const RhoPolynomial& y) { return x += y; }
  friend RhoPolynomial operator-(RhoPolynomial x, const RhoPolynomial& y) { return x -= y; }
  friend RhoPolynomial operator*(const Rational& c, RhoPolynomial x) { return x *= c; }
  friend RhoPolynomial operator*(const RhoPolynomial& x, const RhoPolynomial& y);

 private:
  void add_term(const MonomialKey& k, const Rational& c);
  std::map<MonomialKey, Rational> terms_;
};

/// Cartesian 2-form on R^4 minus the origin; components in lexicographic dx^{ij} order.
struct CartesianTwoForm {
  std::string name;
  std::array<RhoPolynomial, 6> comp;
};

struct HarmonicOracleResult {
  std::string name;
  double residual;
  Rational order;
};

HarmonicOracleResult harmonic_oracle_r4(const CartesianTwoForm& candidate);

/// rho^-2 times each constant (anti-)self-dual form: the six order -2 solutions.
std::vector<CartesianTwoForm> order_minus_two_candidates();
/// d(rho^-4 iota_x w) for w = dx12 + dx34 (the flat limit of nu) and its anti-self-dual twin.
CartesianTwoForm nu_flat_limit();
CartesianTwoForm hatted_flat_limit();
/// nu_flat_limit with one coefficient deliberately changed.
CartesianTwoForm perturbed_candidate();

struct S3SpectrumResult {
  int m;
  Rational eigenvalue;
  int parity;
  double residual;
  bool harmonic;
};

/// Checks Re(z1^m) (and its companions) restricted to S^3 with exact polynomial algebra.
S3SpectrumResult s3_function_spectrum_check(int m);

// -------------------------------------------------------- rate calculator

/// q0 + q1 * eps for an infinitesimal eps > 0, ordered lexicographically.
struct EpsRational {
  Rational c{0}, e{0};
  EpsRational() = default;
  EpsRational(Rational c_, Rational e_ = 0) : c(std::move(c_)), e(std::move(e_)) {}  // NOLINT
  EpsRational(int c_) : c(c_) {}                                                       // NOLINT
  static EpsRational eps() { return {0, 1}; }
  std::string str() const;
  friend EpsRational operator+(const EpsRational& x, const EpsRational& y) { return {x.c + y.c, x.e + y.e}; }
  friend EpsRational operator-(const EpsRational& x, const EpsRational& y) { return {x.c - y.c, x.e - y.e}; }
  friend EpsRational operator-(const EpsRational& x) { return {-x.c, -x.e}; }
  /// Product with the eps^2 term dropped.
  friend EpsRational operator*(const EpsRational& x, const EpsRational& y) {
    return {x.c * y.c, x.c * y.e + x.e * y.c};
  }
  friend bool operator==(const EpsRational& x, const EpsRational& y) { return x.c == y.c && x.e == y.e; }
  friend bool operator<(const EpsRational& x, const EpsRational& y) { return x.c != y.c ? x.c < y.c : x.e < y.e; }
  friend bool operator>(const EpsRational& x, const EpsRational& y) { return y < x; }
  friend bool operator<=(const EpsRational& x, const EpsRational& y) { return !(y < x); }
};

/// O(t^t_exp * rcheck^r_exp).
struct RateTerm {
  EpsRational t_exp, r_exp;
};

/// Region t^lower >= rcheck >= ... expressed by t-exponents of its ends:
/// rcheck ranges over [t^from, t^to] (from >= to since t < 1); `from` empty means rcheck -> 0.
struct RatePiece {
  std::string label;
  std::optional<Rational> from;
  Rational to;
  std::vector<RateTerm> terms;
};

struct RateBound {
  std::optional<EpsRational> exponent;  ///< empty: no constraint (all pieces vanish)
  std::string dominant_region;
};

/// Smallest t-exponent of sup w_t^weight |piece| with w_t ~ t max(1, rcheck).
RateBound jk_rate_bound(const std::vector<RatePiece>& pieces, const EpsRational& weight_exponent);

/// |nabla theta| table of the glued structure with interpolation parameter B.
std::vector<RatePiece> naive_jk_table(const Rational& B);
/// |nabla theta| table of the corrected structure.
std::vector<RatePiece> refined_jk_table();

/// B on the grid maximizing the weighted exponent of the naive table.
std::pair<Rational, EpsRational> best_interpolation_parameter(const std::vector<Rational>& grid,
                                                              const EpsRational& weight_exponent);

/// kappa > 1 - beta + alpha.
bool kappa_admissible(const EpsRational& kappa, const EpsRational& beta, const EpsRational& alpha);
/// kappa + beta - 1.
EpsRational l_infinity_exponent(const EpsRational& kappa, const EpsRational& beta);

}  // namespace g2glue::cone
