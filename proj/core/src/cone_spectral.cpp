#include "g2glue/cone_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "g2glue/errors.hpp"

namespace g2glue::cone {

namespace {

Integer num(const Rational& q) { return boost::multiprecision::numerator(q); }
Integer den(const Rational& q) { return boost::multiprecision::denominator(q); }

int sgn(const Rational& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

// n = s^2 f with f square-free; returns {s, f}.
std::pair<Integer, Integer> square_free_split(Integer n) {
  Integer s = 1, f = 1;
  for (Integer i = 2; i * i <= n; ++i) {
    while (n % (i * i) == 0) {
      n /= i * i;
      s *= i;
    }
    if (n % i == 0) {
      n /= i;
      f *= i;
    }
  }
  return {s, f * n};
}

Rational floor_of(const Rational& q) {
  Integer n = num(q), d = den(q);
  Integer f = n / d;
  if (n < 0 && f * d != n) f -= 1;
  return Rational(f);
}

}  // namespace

std::string to_string(const Rational& q) {
  if (den(q) == 1) return num(q).str();
  return num(q).str() + "/" + den(q).str();
}

Rational parse_rational(const std::string& text) {
  std::string t = text;
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
  if (t.empty()) throw DomainError("empty rational literal");
  try {
    if (auto slash = t.find('/'); slash != std::string::npos) {
      Integer n(t.substr(0, slash)), d(t.substr(slash + 1));
      if (d == 0) throw DomainError("zero denominator in '" + text + "'");
      return Rational(n, d);
    }
    if (auto dot = t.find('.'); dot != std::string::npos) {
      std::string digits = t.substr(0, dot) + t.substr(dot + 1);
      if (digits == "-" || digits == "+" || digits.empty()) throw DomainError("bad rational '" + text + "'");
      Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(t.size() - dot - 1));
      return Rational(Integer(digits), scale);
    }
    return Rational(Integer(t));
  } catch (const std::runtime_error&) {
    throw DomainError("bad rational '" + text + "'");
  }
}

// ---------------------------------------------------------------- Surd

Surd Surd::make(Rational a, Rational b, Integer d) {
  Surd s;
  if (d <= 0) throw DomainError("Surd: radicand must be positive");
  if (d == 1) {
    s.a_ = a + b;
  } else if (b == 0) {
    s.a_ = std::move(a);
  } else {
    s.a_ = std::move(a);
    s.b_ = std::move(b);
    s.d_ = std::move(d);
  }
  return s;
}

Surd Surd::sqrt(const Rational& q) {
  if (q < 0) throw DomainError("Surd::sqrt of a negative rational");
  if (q == 0) return Surd();
  auto [s, f] = square_free_split(num(q) * den(q));
  return make(0, Rational(s, den(q)), f);
}

void Surd::unify(const Surd& o) {
  if (o.b_ == 0) return;
  if (b_ == 0) {
    d_ = o.d_;
    return;
  }
  if (d_ != o.d_) throw DomainError("Surd: operands from different quadratic fields");
}

int Surd::sign() const {
  const int sa = sgn(a_), sb = sgn(b_);
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  return a_ * a_ > b_ * b_ * Rational(d_) ? sa : sb;
}

double Surd::to_double() const {
  return static_cast<double>(a_) + static_cast<double>(b_) * std::sqrt(static_cast<double>(d_));
}

std::string Surd::str() const {
  if (b_ == 0) return to_string(a_);
  std::string out = a_ == 0 ? "" : to_string(a_) + (b_ > 0 ? " + " : " - ");
  if (a_ == 0 && b_ < 0) out = "-";
  const Rational mag = b_ < 0 ? Rational(-b_) : b_;
  if (mag != 1) out += to_string(mag) + "*";
  return out + "sqrt(" + d_.str() + ")";
}

Surd Surd::inverse() const {
  if (is_zero()) throw DomainError("Surd: division by zero");
  const Rational norm = a_ * a_ - b_ * b_ * Rational(d_);
  return make(a_ / norm, -b_ / norm, d_);
}

Surd& Surd::operator+=(const Surd& o) {
  unify(o);
  *this = make(a_ + o.a_, b_ + o.b_, d_);
  return *this;
}

Surd& Surd::operator-=(const Surd& o) {
  unify(o);
  *this = make(a_ - o.a_, b_ - o.b_, d_);
  return *this;
}

Surd& Surd::operator*=(const Surd& o) {
  unify(o);
  *this = make(a_ * o.a_ + b_ * o.b_ * Rational(d_), a_ * o.b_ + b_ * o.a_, d_);
  return *this;
}

// ---------------------------------------------------------------- spectra

const char* to_string(FormKind k) {
  switch (k) {
    case FormKind::Exact: return "exact";
    case FormKind::Coexact: return "coexact";
    case FormKind::Harmonic: return "closed-coclosed";
  }
  return "?";
}

std::vector<SpectrumEntry> LinkSpectrum::entries(int q) const {
  if (q == 0 || q == 1) return low[q];
  if (q != 2 && q != 3) return {};
  // The Hodge star of the link swaps exact and coexact forms; the antipodal
  // map preserves orientation, so parities carry over.
  std::vector<SpectrumEntry> out = low[3 - q];
  for (auto& e : out) {
    if (e.kind == FormKind::Exact) {
      e.kind = FormKind::Coexact;
    } else if (e.kind == FormKind::Coexact) {
      e.kind = FormKind::Exact;
    }
  }
  return out;
}

LinkSpectrum LinkSpectrum::s3(const Rational& ceiling) {
  LinkSpectrum s;
  s.name = "S3";
  s.ceiling = ceiling;
  s.low[0].push_back({0, 1, FormKind::Harmonic, 1});
  for (long m = 1; Rational(m * (m + 2)) <= ceiling; ++m) {
    const int parity = m % 2 == 0 ? 1 : -1;
    s.low[0].push_back({m * (m + 2), (m + 1) * (m + 1), FormKind::Coexact, parity});
    s.low[1].push_back({m * (m + 2), (m + 1) * (m + 1), FormKind::Exact, parity});
  }
  for (long m = 1; Rational((m + 1) * (m + 1)) <= ceiling; ++m) {
    const int parity = m % 2 == 1 ? 1 : -1;
    s.low[1].push_back({(m + 1) * (m + 1), 2 * m * (m + 2), FormKind::Coexact, parity});
  }
  for (auto& v : s.low)
    std::stable_sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.eigenvalue < y.eigenvalue; });
  return s;
}

LinkSpectrum LinkSpectrum::so3(const Rational& ceiling) {
  LinkSpectrum s = s3(ceiling);
  s.name = "SO3";
  for (auto& v : s.low) std::erase_if(v, [](const SpectrumEntry& e) { return e.parity != 1; });
  return s;
}

// ---------------------------------------------------- cone Laplacian algebra

namespace {

Surd P_of(const Surd& lambda, int k, int n) { return (lambda + Surd(k - 2)) * (lambda + Surd(n - k)); }
Surd Q_of(const Surd& lambda, int k, int n) { return (lambda + Surd(n - k - 2)) * (lambda + Surd(k)); }

void validate_block(const LinkBlock& b, int k, int n) {
  if (b.mu < 0) throw DomainError("link eigenvalue must be non-negative");
  switch (b.kind) {
    case BlockKind::Pair:
      if (b.mu == 0) throw DomainError("a coexact/exact pair needs a positive eigenvalue");
      if (k < 1 || k > n - 1) throw DomainError("pair block needs 1 <= k <= n-1");
      break;
    case BlockKind::ClosedAlpha:
      if (k < 1) throw DomainError("closed alpha block needs k >= 1");
      if (!b.b.is_zero()) throw DomainError("closed alpha block carries no beta part");
      break;
    case BlockKind::CoclosedBeta:
      if (k > n - 1) throw DomainError("coclosed beta block needs k <= n-1");
      if (!b.a.is_zero()) throw DomainError("coclosed beta block carries no alpha part");
      break;
  }
}

}  // namespace

std::vector<std::vector<Surd>> block_operator(BlockKind kind, const Rational& mu, const Surd& lambda, int k, int n) {
  const Surd m(mu);
  switch (kind) {
    case BlockKind::Pair:
      return {{m - P_of(lambda, k, n), Surd(-2) * m}, {Surd(-2), m - Q_of(lambda, k, n)}};
    case BlockKind::ClosedAlpha:
      return {{m - P_of(lambda, k, n)}};
    case BlockKind::CoclosedBeta:
      return {{m - Q_of(lambda, k, n)}};
  }
  return {};
}

bool LogCoefficients::is_zero() const {
  for (const auto& level : by_power)
    for (const auto& ab : level)
      if (!ab[0].is_zero() || !ab[1].is_zero()) return false;
  return true;
}

LogCoefficients cone_laplacian_apply(const Surd& lambda, int k, int n, int j, const std::vector<LinkBlock>& data) {
  if (n < 2) throw DimensionError("cone dimension must be at least 2");
  if (j < 0) throw DomainError("log power must be non-negative");
  LogCoefficients out;
  out.by_power.assign(j + 1, std::vector<std::array<Surd, 2>>(data.size()));
  // u = (log r)^j: r u' = j L^{j-1}, r^2 u'' = j(j-1) L^{j-2} - j L^{j-1}.
  const Surd first = Surd(-j) * (Surd(2) * lambda + Surd(n - 2));
  const Surd second(-j * (j - 1));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const LinkBlock& blk = data[i];
    validate_block(blk, k, n);
    auto h = block_operator(blk.kind, blk.mu, lambda, k, n);
    std::array<Surd, 2> top;
    switch (blk.kind) {
      case BlockKind::Pair:
        top = {h[0][0] * blk.a + h[0][1] * blk.b, h[1][0] * blk.a + h[1][1] * blk.b};
        break;
      case BlockKind::ClosedAlpha:
        top = {h[0][0] * blk.a, Surd()};
        break;
      case BlockKind::CoclosedBeta:
        top = {Surd(), h[0][0] * blk.b};
        break;
    }
    out.by_power[j][i] = top;
    if (j >= 1) out.by_power[j - 1][i] = {first * blk.a, first * blk.b};
    if (j >= 2) out.by_power[j - 2][i] = {second * blk.a, second * blk.b};
  }
  return out;
}

// ---------------------------------------------------------- critical rates

const char* to_string(CaseTag c) {
  switch (c) {
    case CaseTag::I: return "i";
    case CaseTag::II: return "ii";
    case CaseTag::III: return "iii";
    case CaseTag::IV: return "iv";
    case CaseTag::II_III: return "ii=iii";
  }
  return "?";
}

bool Interval::contains(const Surd& x) const {
  const bool above = lo_closed ? x >= Surd(lo) : x > Surd(lo);
  const bool below = hi_closed ? x <= Surd(hi) : x < Surd(hi);
  return above && below;
}

namespace {

// lambda^2 + L lambda + C = mu.
struct Quadratic {
  CaseTag tag;
  Rational L, C;
  Rational at(const Rational& x) const { return x * x + L * x + C; }
};

std::vector<SpectrumEntry> filter(const std::vector<SpectrumEntry>& v, std::initializer_list<FormKind> kinds) {
  std::vector<SpectrumEntry> out;
  for (const auto& e : v)
    if (std::find(kinds.begin(), kinds.end(), e.kind) != kinds.end()) out.push_back(e);
  return out;
}

BlockKind block_of(CaseTag t) {
  switch (t) {
    case CaseTag::I: return BlockKind::ClosedAlpha;
    case CaseTag::IV: return BlockKind::CoclosedBeta;
    default: return BlockKind::Pair;
  }
}

}  // namespace

std::vector<HomogeneousRate> critical_rates(const LinkSpectrum& link, int p, const Interval& range, int n) {
  if (n != 4) throw DimensionError("link tables describe 3-dimensional links (n = 4)");
  if (p < 0 || p > n) throw DimensionError("form degree out of range");
  if (range.hi < range.lo) throw DomainError("empty interval");

  struct Source {
    Quadratic q;
    std::vector<SpectrumEntry> entries;
  };
  std::vector<Source> sources;
  if (p >= 1) {
    sources.push_back({{CaseTag::I, n - 2, Rational((p - 2) * (n - p))},
                       filter(link.entries(p - 1), {FormKind::Harmonic, FormKind::Exact})});
  }
  if (p >= 1 && p <= n - 1) {
    auto coexact = filter(link.entries(p - 1), {FormKind::Coexact});
    sources.push_back({{CaseTag::II, n, Rational(p * (n - p))}, coexact});
    sources.push_back({{CaseTag::III, n - 4, Rational((p - 2) * (n - p - 2))}, coexact});
  }
  if (p <= n - 1) {
    sources.push_back({{CaseTag::IV, n - 2, Rational(p * (n - p - 2))},
                       filter(link.entries(p), {FormKind::Harmonic, FormKind::Coexact})});
  }

  const Rational coincide(-(n - 2), 2);
  std::vector<HomogeneousRate> out;
  for (const auto& src : sources) {
    const Rational needed = std::max(src.q.at(range.lo), src.q.at(range.hi));
    if (needed > link.ceiling)
      throw DomainError("link spectrum covers eigenvalues up to " + to_string(link.ceiling) + " but " +
                        to_string(needed) + " is needed");
    for (const auto& e : src.entries) {
      if (block_of(src.q.tag) == BlockKind::Pair && e.eigenvalue == 0) continue;
      const Rational disc = src.q.L * src.q.L - 4 * (src.q.C - e.eigenvalue);
      if (disc < 0) continue;
      const Surd root = Surd::sqrt(disc);
      std::vector<Surd> lambdas{(Surd(-src.q.L) - root) / Surd(2)};
      if (!root.is_zero()) lambdas.push_back((Surd(-src.q.L) + root) / Surd(2));
      for (const Surd& lam : lambdas) {
        if (!range.contains(lam)) continue;
        CaseTag tag = src.q.tag;
        if (lam == Surd(coincide) && (tag == CaseTag::II || tag == CaseTag::III)) {
          if (tag == CaseTag::III) continue;  // the same forms as case (ii)
          tag = CaseTag::II_III;
        }
        auto it = std::find_if(out.begin(), out.end(), [&](const HomogeneousRate& r) {
          return r.tag == tag && r.lambda == lam && r.eigenvalue == e.eigenvalue;
        });
        if (it != out.end()) {
          it->dimension += e.multiplicity;
        } else {
          out.push_back({lam, p, tag, e.eigenvalue, e.multiplicity});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const HomogeneousRate& x, const HomogeneousRate& y) {
    if (!(x.lambda == y.lambda)) return x.lambda < y.lambda;
    return static_cast<int>(x.tag) < static_cast<int>(y.tag);
  });
  return out;
}

std::vector<std::pair<Surd, long>> rate_dimensions(const std::vector<HomogeneousRate>& rates) {
  std::vector<std::pair<Surd, long>> out;
  for (const auto& r : rates) {
    if (!out.empty() && out.back().first == r.lambda) {
      out.back().second += r.dimension;
    } else {
      out.emplace_back(r.lambda, r.dimension);
    }
  }
  return out;
}

namespace {

// Rank of a matrix over the quadratic field by Gaussian elimination.
std::size_t rank_of(std::vector<std::vector<Surd>> m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][c].is_zero()) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[pivot], m[rank]);
    const Surd inv = m[rank][c].inverse();
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || m[r][c].is_zero()) continue;
      const Surd f = m[r][c] * inv;
      for (std::size_t cc = c; cc < cols; ++cc) m[r][cc] -= f * m[rank][cc];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

bool log_kernel_check_block(const std::vector<std::vector<Surd>>& h, const Surd& lambda, int n, int max_log_power) {
  const std::size_t d = h.size();
  if (d == 0) return true;
  const std::size_t levels = static_cast<std::size_t>(max_log_power) + 1;
  // Unknowns c_0..c_M; the coefficient of (log r)^s in Delta(sum (log r)^j gamma_j) is
  // H c_s - (s+1)(2 lambda + n - 2) c_{s+1} - (s+2)(s+1) c_{s+2}.
  std::vector<std::vector<Surd>> sys(levels * d, std::vector<Surd>(levels * d));
  const Surd slope = Surd(2) * lambda + Surd(n - 2);
  for (std::size_t s = 0; s < levels; ++s) {
    for (std::size_t r = 0; r < d; ++r) {
      auto& row = sys[s * d + r];
      for (std::size_t c = 0; c < d; ++c) row[s * d + c] = h[r][c];
      if (s + 1 < levels) row[(s + 1) * d + r] -= Surd(static_cast<int>(s + 1)) * slope;
      if (s + 2 < levels) row[(s + 2) * d + r] -= Surd(static_cast<int>((s + 2) * (s + 1)));
    }
  }
  const std::size_t nullity_full = levels * d - rank_of(sys);
  const std::size_t nullity_h = d - rank_of(h);
  return nullity_full == nullity_h;
}

bool log_kernel_check(const LinkSpectrum& link, const Surd& lambda, int p, int n) {
  Interval here{lambda.a(), lambda.a(), true, true};
  std::vector<HomogeneousRate> rates;
  if (lambda.is_rational()) {
    rates = critical_rates(link, p, here, n);
  } else {
    // Bracket the surd by rationals and keep the exact matches.
    const double v = lambda.to_double();
    Interval around{Rational(static_cast<long>(std::floor(v))) - 1, Rational(static_cast<long>(std::ceil(v))) + 1,
                    true, true};
    for (auto& r : critical_rates(link, p, around, n))
      if (r.lambda == lambda) rates.push_back(r);
  }
  for (const auto& r : rates) {
    if (!log_kernel_check_block(block_operator(block_of(r.tag), r.eigenvalue, r.lambda, p, n), r.lambda, n))
      return false;
  }
  return true;
}

long index_change(const LinkSpectrum& link, int p, const Rational& lambda1, const Rational& lambda2, int n) {
  if (!(lambda1 < lambda2)) throw DomainError("index_change needs lambda1 < lambda2");
  for (const Rational& end : {lambda1, lambda2}) {
    if (!critical_rates(link, p, Interval::point(end), n).empty())
      throw DomainError("endpoint " + to_string(end) + " is a critical rate");
  }
  long total = 0;
  for (const auto& [lam, dim] : rate_dimensions(critical_rates(link, p, Interval::open(lambda1, lambda2), n))) {
    if (!log_kernel_check(link, lam, p, n))
      throw DomainError("log-polynomial solutions at " + lam.str() + "; homogeneous count does not give the jump");
    total += dim;
  }
  return total;
}

// ------------------------------------------------------ polynomial oracles

void RhoPolynomial::add_term(const MonomialKey& k, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(k, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

RhoPolynomial RhoPolynomial::monomial(const Rational& c, std::array<int, 4> a, const Rational& s) {
  RhoPolynomial p;
  p.add_term({a, s}, c);
  return p;
}

RhoPolynomial RhoPolynomial::coordinate(int i) {
  std::array<int, 4> a{};
  a.at(i) = 1;
  return monomial(1, a);
}

RhoPolynomial RhoPolynomial::derivative(int i) const {
  RhoPolynomial out;
  for (const auto& [k, c] : terms_) {
    if (k.a[i] > 0) {
      MonomialKey m = k;
      m.a[i] -= 1;
      out.add_term(m, c * k.a[i]);
    }
    if (k.s != 0) {
      MonomialKey m = k;
      m.a[i] += 1;
      m.s -= 1;
      out.add_term(m, 2 * k.s * c);
    }
  }
  return out;
}

RhoPolynomial RhoPolynomial::laplacian() const {
  RhoPolynomial out;
  for (int i = 0; i < 4; ++i) out += derivative(i).derivative(i);
  return out;
}

RhoPolynomial RhoPolynomial::euler() const {
  RhoPolynomial out;
  for (int i = 0; i < 4; ++i) out += coordinate(i) * derivative(i);
  return out;
}

RhoPolynomial RhoPolynomial::antipode() const {
  RhoPolynomial out;
  for (const auto& [k, c] : terms_) {
    const int deg = k.a[0] + k.a[1] + k.a[2] + k.a[3];
    out.add_term(k, deg % 2 == 0 ? c : Rational(-c));
  }
  return out;
}

RhoPolynomial RhoPolynomial::canonical() const {
  std::map<Rational, Rational> lowest;  // fractional class -> minimal s
  for (const auto& [k, c] : terms_) {
    const Rational frac = k.s - floor_of(k.s);
    auto it = lowest.find(frac);
    if (it == lowest.end() || k.s < it->second) lowest[frac] = k.s;
  }
  RhoPolynomial sumsq;
  for (int i = 0; i < 4; ++i) {
    std::array<int, 4> a{};
    a[i] = 2;
    sumsq.add_term({a, 0}, 1);
  }
  RhoPolynomial out;
  for (const auto& [k, c] : terms_) {
    const Rational base = lowest[k.s - floor_of(k.s)];
    const Rational steps = k.s - base;
    RhoPolynomial expanded = monomial(c, k.a, base);
    for (Integer i = 0; i < num(steps); ++i) expanded = expanded * sumsq;
    out += expanded;
  }
  return out;
}

double RhoPolynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [k, c] : canonical().terms_) m = std::max(m, std::abs(static_cast<double>(c)));
  return m;
}

std::optional<Rational> RhoPolynomial::order() const {
  std::optional<Rational> out;
  for (const auto& [k, c] : terms_) {
    const Rational deg = Rational(k.a[0] + k.a[1] + k.a[2] + k.a[3]) + 2 * k.s;
    if (out && *out != deg) return std::nullopt;
    out = deg;
  }
  return out;
}

RhoPolynomial& RhoPolynomial::operator+=(const RhoPolynomial& o) {
  for (const auto& [k, c] : o.terms_) add_term(k, c);
  return *this;
}

RhoPolynomial& RhoPolynomial::operator-=(const RhoPolynomial& o) {
  for (const auto& [k, c] : o.terms_) add_term(k, -c);
  return *this;
}

RhoPolynomial& RhoPolynomial::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
  } else {
    for (auto& [k, v] : terms_) v *= c;
  }
  return *this;
}

RhoPolynomial operator*(const RhoPolynomial& x, const RhoPolynomial& y) {
  RhoPolynomial out;
  for (const auto& [kx, cx] : x.terms_)
    for (const auto& [ky, cy] : y.terms_) {
      MonomialKey k;
      for (int i = 0; i < 4; ++i) k.a[i] = kx.a[i] + ky.a[i];
      k.s = kx.s + ky.s;
      out.add_term(k, cx * cy);
    }
  return out;
}

HarmonicOracleResult harmonic_oracle_r4(const CartesianTwoForm& candidate) {
  std::optional<Rational> order;
  for (const auto& c : candidate.comp) {
    if (c.terms().empty()) continue;
    auto o = c.order();
    if (!o || (order && *order != *o)) throw DomainError(candidate.name + ": candidate is not homogeneous");
    order = o;
  }
  if (!order) throw DomainError(candidate.name + ": candidate vanishes identically");
  double residual = 0.0;
  for (const auto& c : candidate.comp) residual = std::max(residual, c.laplacian().max_abs_coefficient());
  return {candidate.name, residual, *order};
}

namespace {

constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Constant 2-form given by (i, j, sign) triples, as coefficients in kPairs order.
std::array<Rational, 6> constant_form(std::initializer_list<std::array<int, 3>> parts) {
  std::array<Rational, 6> out{};
  for (const auto& [i, j, s] : parts) {
    for (std::size_t p = 0; p < 6; ++p) {
      if (kPairs[p][0] == i && kPairs[p][1] == j) out[p] += s;
      if (kPairs[p][0] == j && kPairs[p][1] == i) out[p] -= s;
    }
  }
  return out;
}

Rational entry(const std::array<Rational, 6>& w, int i, int j) {
  for (std::size_t p = 0; p < 6; ++p) {
    if (kPairs[p][0] == i && kPairs[p][1] == j) return w[p];
    if (kPairs[p][0] == j && kPairs[p][1] == i) return -w[p];
  }
  return 0;
}

// d of the 1-form rho^(2s) iota_x w.
CartesianTwoForm d_of_contracted(const std::string& name, const std::array<Rational, 6>& w, const Rational& s) {
  std::array<RhoPolynomial, 4> theta;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      const Rational c = entry(w, i, j);
      if (c == 0) continue;
      std::array<int, 4> a{};
      a[i] = 1;
      theta[j] += RhoPolynomial::monomial(c, a, s);
    }
  CartesianTwoForm out{name, {}};
  for (std::size_t p = 0; p < 6; ++p) {
    const auto [i, j] = kPairs[p];
    out.comp[p] = theta[j].derivative(i) - theta[i].derivative(j);
  }
  return out;
}

const std::array<Rational, 6> kSd1 = constant_form({{0, 1, 1}, {2, 3, 1}});
const std::array<Rational, 6> kAsd1 = constant_form({{0, 1, 1}, {2, 3, -1}});

}  // namespace

std::vector<CartesianTwoForm> order_minus_two_candidates() {
  const std::array<std::pair<const char*, std::array<Rational, 6>>, 6> forms{{
      {"rho^-2 (dx12 + dx34)", constant_form({{0, 1, 1}, {2, 3, 1}})},
      {"rho^-2 (dx13 - dx24)", constant_form({{0, 2, 1}, {1, 3, -1}})},
      {"rho^-2 (dx14 + dx23)", constant_form({{0, 3, 1}, {1, 2, 1}})},
      {"rho^-2 (dx12 - dx34)", constant_form({{0, 1, 1}, {2, 3, -1}})},
      {"rho^-2 (dx13 + dx24)", constant_form({{0, 2, 1}, {1, 3, 1}})},
      {"rho^-2 (dx14 - dx23)", constant_form({{0, 3, 1}, {1, 2, -1}})},
  }};
  std::vector<CartesianTwoForm> out;
  for (const auto& [name, w] : forms) {
    CartesianTwoForm f{name, {}};
    for (std::size_t p = 0; p < 6; ++p)
      if (w[p] != 0) f.comp[p] = RhoPolynomial::monomial(w[p], {0, 0, 0, 0}, -1);
    out.push_back(f);
  }
  return out;
}

CartesianTwoForm nu_flat_limit() { return d_of_contracted("d(rho^-4 iota_x (dx12 + dx34))", kSd1, -2); }

CartesianTwoForm hatted_flat_limit() { return d_of_contracted("d(rho^-4 iota_x (dx12 - dx34))", kAsd1, -2); }

CartesianTwoForm perturbed_candidate() {
  CartesianTwoForm f = nu_flat_limit();
  f.name = "perturbed d(rho^-4 iota_x (dx12 + dx34))";
  // Rescale a single monomial so that the component stops being harmonic.
  RhoPolynomial& c = f.comp[0];
  const auto [key, coeff] = *c.terms().begin();
  c += RhoPolynomial::monomial(coeff / 10, key.a, key.s);
  return f;
}

S3SpectrumResult s3_function_spectrum_check(int m) {
  if (m < 0 || m > 8) throw DomainError("s3_function_spectrum_check supports 0 <= m <= 8");
  // Re(z1^m) with z1 = x1 + i x2.
  RhoPolynomial p;
  Integer binom = 1;
  for (int j = 0; j <= m; ++j) {
    if (j > 0) binom = binom * (m - j + 1) / j;
    if (j % 2 == 1) continue;
    const Rational c = (j / 2) % 2 == 0 ? Rational(binom) : Rational(-binom);
    p += RhoPolynomial::monomial(c, {m - j, j, 0, 0});
  }
  const bool harmonic = p.laplacian().is_zero();
  if (!harmonic) throw DomainError("seed polynomial is not harmonic");
  // Delta_{S^3} = E(E + 2) - rho^2 Delta_{R^4} on functions, with E the Euler operator.
  const RhoPolynomial e = p.euler();
  const RhoPolynomial lap = e.euler() + Rational(2) * e -
                            RhoPolynomial::monomial(1, {0, 0, 0, 0}, 1) * p.laplacian();
  const RhoPolynomial lc = lap.canonical(), pc = p.canonical();
  const auto& lead = *pc.terms().begin();
  Rational eigenvalue = 0;
  if (auto it = lc.terms().find(lead.first); it != lc.terms().end()) eigenvalue = it->second / lead.second;
  const double residual = (lap - Rational(m * (m + 2)) * p).max_abs_coefficient();
  const RhoPolynomial flipped = p.antipode();
  int parity = 0;
  if ((flipped - p).is_zero()) {
    parity = 1;
  } else if ((flipped + p).is_zero()) {
    parity = -1;
  }
  return {m, eigenvalue, parity, residual, harmonic};
}

// -------------------------------------------------------- rate calculator

std::string EpsRational::str() const {
  if (e == 0) return to_string(c);
  std::string out = c == 0 ? "" : to_string(c) + (e > 0 ? " + " : " - ");
  if (c == 0 && e < 0) out = "-";
  const Rational mag = e < 0 ? Rational(-e) : e;
  return out + (mag == 1 ? "" : to_string(mag) + "*") + "eps";
}

namespace {

EpsRational scale(const Rational& s, const EpsRational& x) { return {s * x.c, s * x.e}; }

}  // namespace

RateBound jk_rate_bound(const std::vector<RatePiece>& pieces, const EpsRational& weight_exponent) {
  if (pieces.empty()) throw DomainError("jk_rate_bound: no regions");
  if (pieces.front().from) throw DomainError("jk_rate_bound: first region must start at rcheck = 0");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i > 0 && (!pieces[i].from || *pieces[i].from != pieces[i - 1].to))
      throw DomainError("jk_rate_bound: uncovered region before '" + pieces[i].label + "'");
    if (pieces[i].from && *pieces[i].from < pieces[i].to)
      throw DomainError("jk_rate_bound: region '" + pieces[i].label + "' is reversed");
  }
  RateBound out;
  auto consider = [&](const EpsRational& value, const std::string& label) {
    if (!out.exponent || value < *out.exponent) {
      out.exponent = value;
      out.dominant_region = label;
    }
  };
  for (const auto& piece : pieces) {
    for (const auto& term : piece.terms) {
      // rcheck = t^e; w ~ t for e >= 0 and w ~ t rcheck for e <= 0.
      const EpsRational base = term.t_exp + weight_exponent;
      const EpsRational inner = term.r_exp;
      const EpsRational outer = term.r_exp + weight_exponent;
      // Part with rcheck <= 1.
      if (!piece.from || *piece.from > 0) {
        const Rational lo = std::max(piece.to, Rational(0));
        consider(base + scale(lo, inner), piece.label);
        if (piece.from) {
          consider(base + scale(*piece.from, inner), piece.label);
        } else if (inner < EpsRational(0)) {
          throw DomainError("jk_rate_bound: piece '" + piece.label + "' is unbounded as rcheck -> 0");
        }
      }
      // Part with rcheck >= 1.
      if (piece.to <= 0) {
        const Rational hi = piece.from ? std::min(*piece.from, Rational(0)) : Rational(0);
        consider(base + scale(hi, outer), piece.label);
        consider(base + scale(piece.to, outer), piece.label);
      }
    }
  }
  return out;
}

std::vector<RatePiece> naive_jk_table(const Rational& B) {
  if (B < -1 || B > 0) throw DomainError("interpolation parameter B must lie in [-1, 0]");
  const std::string tb = "t^" + to_string(B);
  return {
      {"rcheck <= " + tb, std::nullopt, B, {{0, 0}}},
      {tb + " <= rcheck <= 2" + tb, B, B, {{-1 - 5 * B, 0}, {0, 0}}},
  };
}

std::vector<RatePiece> refined_jk_table() {
  const Rational a(-1, 9), b(-4, 5);
  return {
      {"rcheck <= 1", std::nullopt, 0, {{1, 0}}},
      {"1 <= rcheck <= t^-1/9", 0, a, {{1, 1}}},
      {"t^-1/9 <= rcheck <= 2t^-1/9", a, a, {{Rational(8, 9), 0}}},
      {"2t^-1/9 <= rcheck <= t^-4/5", a, b, {{1, -3}}},
      {"t^-4/5 <= rcheck <= 2t^-4/5", b, b, {{3, 0}}},
  };
}

std::pair<Rational, EpsRational> best_interpolation_parameter(const std::vector<Rational>& grid,
                                                              const EpsRational& weight_exponent) {
  if (grid.empty()) throw DomainError("empty B grid");
  std::optional<std::pair<Rational, EpsRational>> best;
  for (const auto& B : grid) {
    auto r = jk_rate_bound(naive_jk_table(B), weight_exponent);
    if (!r.exponent) continue;
    if (!best || best->second < *r.exponent) best = std::make_pair(B, *r.exponent);
  }
  if (!best) throw DomainError("no constraint on the grid");
  return *best;
}

bool kappa_admissible(const EpsRational& kappa, const EpsRational& beta, const EpsRational& alpha) {
  return kappa > EpsRational(1) - beta + alpha;
}

EpsRational l_infinity_exponent(const EpsRational& kappa, const EpsRational& beta) {
  return kappa + beta - EpsRational(1);
}

}  // namespace g2glue::cone
