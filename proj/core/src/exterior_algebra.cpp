#include "g2glue/exterior_algebra.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

namespace g2glue::ext {

namespace {

struct Tables {
  std::array<std::array<std::vector<Mask>, kMaxDim + 1>, kMaxDim + 1> masks;
  std::array<std::array<int, 128>, kMaxDim + 1> position{};

  Tables() {
    for (int n = 0; n <= kMaxDim; ++n) {
      position[n].fill(-1);
      std::vector<Mask> all;
      for (int m = 0; m < (1 << n); ++m) all.push_back(static_cast<Mask>(m));
      // Sort by the ascending digit string so that 123 < 124 < ... < 567.
      auto key = [](Mask m) {
        std::string s;
        for (int i = 0; i < kMaxDim; ++i)
          if (m & (1u << i)) s.push_back(static_cast<char>('1' + i));
        return s;
      };
      std::sort(all.begin(), all.end(), [&](Mask a, Mask b) { return key(a) < key(b); });
      for (Mask m : all) {
        int p = std::popcount(static_cast<unsigned>(m));
        position[n][m] = static_cast<int>(masks[n][p].size());
        masks[n][p].push_back(m);
      }
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

void require_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw DimensionError("form dimension must lie in 1..7");
}

Mask full_mask(int dim) { return static_cast<Mask>((1u << dim) - 1u); }

// Tables for the 7-dimensional fast paths.
struct Seven {
  // iota[i]: for each 3-form slot, the 2-form slot of e_i ⌟ dx^I and its sign.
  std::array<std::array<int, 35>, 7> iota_target{};
  std::array<std::array<int, 35>, 7> iota_sign{};
  // Disjoint 2-form pairs (a, b): the 3-form slot completing a ∪ b and the sign
  // of dx^a ^ dx^b ^ dx^R against dx^{1..7}.
  struct Pair {
    int a, b, r, sign;
  };
  std::vector<Pair> pairs;
  // For a 3-form slot, its complementary 4-form slot and sign(I, I^c).
  std::array<int, 35> comp{};
  std::array<int, 35> comp_sign{};
  std::array<std::array<int, 3>, 35> digits{};

  Seven() {
    const auto& m2 = basis_masks(7, 2);
    const auto& m3 = basis_masks(7, 3);
    for (int s = 0; s < 35; ++s) {
      Mask m = m3[s];
      int k = 0;
      for (int i = 0; i < 7; ++i) {
        if (m & (1u << i)) digits[s][k++] = i;
      }
      for (int i = 0; i < 7; ++i) {
        iota_target[i][s] = -1;
        if (!(m & (1u << i))) continue;
        Mask rest = static_cast<Mask>(m & ~(1u << i));
        int before = std::popcount(static_cast<unsigned>(m & ((1u << i) - 1u)));
        iota_target[i][s] = mask_position(7, rest);
        iota_sign[i][s] = (before % 2 == 0) ? 1 : -1;
      }
      Mask c = static_cast<Mask>(0x7F & ~m);
      comp[s] = mask_position(7, c);
      comp_sign[s] = merge_sign(m, c);
    }
    for (int a = 0; a < 21; ++a) {
      for (int b = 0; b < 21; ++b) {
        if (m2[a] & m2[b]) continue;
        Mask ab = static_cast<Mask>(m2[a] | m2[b]);
        Mask r = static_cast<Mask>(0x7F & ~ab);
        int sign = merge_sign(m2[a], m2[b]) * merge_sign(ab, r);
        pairs.push_back({a, b, mask_position(7, r), sign});
      }
    }
  }
};

const Seven& seven() {
  static const Seven s;
  return s;
}

double det3(const Matrix& m, const std::array<int, 3>& r, const std::array<int, 3>& c) {
  return m(r[0], c[0]) * (m(r[1], c[1]) * m(r[2], c[2]) - m(r[1], c[2]) * m(r[2], c[1])) -
         m(r[0], c[1]) * (m(r[1], c[0]) * m(r[2], c[2]) - m(r[1], c[2]) * m(r[2], c[0])) +
         m(r[0], c[2]) * (m(r[1], c[0]) * m(r[2], c[1]) - m(r[1], c[1]) * m(r[2], c[0]));
}

std::vector<int> digits_of(Mask m) {
  std::vector<int> d;
  for (int i = 0; i < kMaxDim; ++i)
    if (m & (1u << i)) d.push_back(i);
  return d;
}

// Minor det(M[rows(I), cols(J)]) for index sets of equal size.
double minor_det(const Matrix& m, Mask rows, Mask cols) {
  std::array<int, kMaxDim> r{}, c{};
  int p = 0, q = 0;
  for (int i = 0; i < kMaxDim; ++i) {
    if (rows & (1u << i)) r[p++] = i;
    if (cols & (1u << i)) c[q++] = i;
  }
  if (p == 0) return 1.0;
  if (p == 1) return m(r[0], c[0]);
  if (p == 2) return m(r[0], c[0]) * m(r[1], c[1]) - m(r[0], c[1]) * m(r[1], c[0]);
  if (p == 3) return det3(m, {r[0], r[1], r[2]}, {c[0], c[1], c[2]});
  Matrix sub(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) sub(i, j) = m(r[i], c[j]);
  return sub.determinant();
}

// Raise all indices of a form: a^I = sum_J det(ginv[I, J]) a_J.
std::vector<double> raise(const Matrix& ginv, const Form& a) {
  const auto& masks = basis_masks(a.dim(), a.degree());
  std::vector<double> up(a.size(), 0.0);
  if (a.dim() == 7 && a.degree() == 3) {
    const auto& s = seven();
    for (int i = 0; i < 35; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 35; ++j) {
        if (a[j] != 0.0) acc += det3(ginv, s.digits[i], s.digits[j]) * a[j];
      }
      up[i] = acc;
    }
    return up;
  }
  for (std::size_t i = 0; i < masks.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < masks.size(); ++j) {
      if (a[j] != 0.0) acc += minor_det(ginv, masks[i], masks[j]) * a[j];
    }
    up[i] = acc;
  }
  return up;
}

// Euclidean star: a signed permutation of components.
Form flat_star(const Form& a) {
  const Mask full = full_mask(a.dim());
  Form out(a.dim(), a.dim() - a.degree());
  const auto& masks = basis_masks(a.dim(), a.degree());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const Mask c = static_cast<Mask>(full & ~masks[i]);
    out.set(c, merge_sign(masks[i], c) * a[i]);
  }
  return out;
}

// Star of a 3-form in dimension 7 by sequential index raising on the full tensor.
Form star3_seven(const Matrix& ginv, double sqrt_det, int orientation, const Form& a) {
  const auto& s = seven();
  double t[7][7][7] = {};
  for (int k = 0; k < 35; ++k) {
    const double v = a[k];
    if (v == 0.0) continue;
    const int i = s.digits[k][0], j = s.digits[k][1], l = s.digits[k][2];
    t[i][j][l] = v;
    t[j][l][i] = v;
    t[l][i][j] = v;
    t[j][i][l] = -v;
    t[i][l][j] = -v;
    t[l][j][i] = -v;
  }
  double u1[7][7][7];
  for (int i = 0; i < 7; ++i)
    for (int b = 0; b < 7; ++b)
      for (int c = 0; c < 7; ++c) {
        double acc = 0.0;
        for (int x = 0; x < 7; ++x) acc += ginv(i, x) * t[x][b][c];
        u1[i][b][c] = acc;
      }
  double u2[7][7][7];
  for (int i = 0; i < 7; ++i)
    for (int j = i + 1; j < 7; ++j)
      for (int c = 0; c < 7; ++c) {
        double acc = 0.0;
        for (int x = 0; x < 7; ++x) acc += ginv(j, x) * u1[i][x][c];
        u2[i][j][c] = acc;
      }
  Form out(7, 4);
  for (int k = 0; k < 35; ++k) {
    const int i = s.digits[k][0], j = s.digits[k][1], l = s.digits[k][2];
    double acc = 0.0;
    for (int x = 0; x < 7; ++x) acc += ginv(l, x) * u2[i][j][x];
    out[s.comp[k]] = orientation * s.comp_sign[k] * sqrt_det * acc;
  }
  return out;
}

}  // namespace

const std::vector<Mask>& basis_masks(int dim, int degree) {
  require_dim(dim);
  if (degree < 0 || degree > dim) throw DimensionError("degree out of range");
  return tables().masks[dim][degree];
}

int mask_position(int dim, Mask m) {
  require_dim(dim);
  return tables().position[dim][m];
}

int merge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int inversions = 0;
  for (int j = 0; j < kMaxDim; ++j) {
    if (b & (1u << j)) inversions += std::popcount(static_cast<unsigned>(a >> (j + 1)));
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

Form::Form(int dim, int degree) : dim_(dim), degree_(degree) {
  coeffs_.assign(basis_masks(dim, degree).size(), 0.0);
}

Form Form::basis(int dim, std::string_view digits, double coeff) {
  std::vector<int> idx;
  for (char c : digits) {
    if (c < '1' || c > '0' + dim) throw DimensionError("basis digit out of range");
    idx.push_back(c - '1');
  }
  Form f(dim, static_cast<int>(idx.size()));
  Mask m = 0;
  for (int i : idx) {
    if (m & (1u << i)) return f;  // repeated index: zero form
    m = static_cast<Mask>(m | (1u << i));
  }
  f.set(m, 0.0);
  std::vector<int> tmp = idx;
  // Sign of the sorting permutation.
  int sign = 1;
  for (std::size_t i = 0; i < tmp.size(); ++i)
    for (std::size_t j = i + 1; j < tmp.size(); ++j)
      if (tmp[i] > tmp[j]) sign = -sign;
  f.set(m, sign * coeff);
  return f;
}

Form Form::basis(int dim, std::initializer_list<int> one_based, double coeff) {
  std::string s;
  for (int i : one_based) s.push_back(static_cast<char>('0' + i));
  return basis(dim, s, coeff);
}

Mask Form::mask_at(std::size_t i) const { return basis_masks(dim_, degree_)[i]; }

double Form::get(Mask m) const {
  int p = mask_position(dim_, m);
  if (p < 0 || std::popcount(static_cast<unsigned>(m)) != degree_) return 0.0;
  return coeffs_[p];
}

void Form::set(Mask m, double v) {
  if (std::popcount(static_cast<unsigned>(m)) != degree_ || (m & ~full_mask(dim_)))
    throw DimensionError("multi-index does not match form degree");
  coeffs_[mask_position(dim_, m)] = v;
}

void Form::add(Mask m, double v) {
  if (std::popcount(static_cast<unsigned>(m)) != degree_ || (m & ~full_mask(dim_)))
    throw DimensionError("multi-index does not match form degree");
  coeffs_[mask_position(dim_, m)] += v;
}

double Form::at(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != degree_) throw DimensionError("index length != degree");
  Mask m = 0;
  int sign = 1;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= dim_) throw DimensionError("index out of range");
    if (m & (1u << index[i])) return 0.0;
    m = static_cast<Mask>(m | (1u << index[i]));
    for (std::size_t j = i + 1; j < index.size(); ++j)
      if (index[i] > index[j]) sign = -sign;
  }
  return sign * coeffs_[mask_position(dim_, m)];
}

Form& Form::operator+=(const Form& o) {
  if (o.dim_ != dim_ || o.degree_ != degree_) throw DimensionError("form shape mismatch in +");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

Form& Form::operator-=(const Form& o) {
  if (o.dim_ != dim_ || o.degree_ != degree_) throw DimensionError("form shape mismatch in -");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

Form& Form::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

double Form::max_abs() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

double Form::norm() const {
  double s = 0.0;
  for (double c : coeffs_) s += c * c;
  return std::sqrt(s);
}

Form operator+(Form a, const Form& b) { return a += b; }
Form operator-(Form a, const Form& b) { return a -= b; }
Form operator-(Form a) { return a *= -1.0; }
Form operator*(double s, Form a) { return a *= s; }
Form operator*(Form a, double s) { return a *= s; }

Metric::Metric(int dim) {
  require_dim(dim);
  g_ = Matrix::Identity(dim, dim);
  ginv_ = g_;
  det_ = 1.0;
}

Metric::Metric(const Matrix& g) : g_(g) {
  if (g.rows() != g.cols()) throw DimensionError("metric must be square");
  require_dim(static_cast<int>(g.rows()));
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NotSpdError("metric is not symmetric");
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw NotSpdError("metric is not positive definite");
  const Matrix l = llt.matrixL();
  det_ = 1.0;
  for (int i = 0; i < g.rows(); ++i) det_ *= l(i, i) * l(i, i);
  ginv_ = llt.solve(Matrix::Identity(g.rows(), g.cols()));
}

Metric Metric::scaled(int dim, double c2) {
  Matrix g = c2 * Matrix::Identity(dim, dim);
  return Metric(g);
}

Form wedge(const Form& a, const Form& b) {
  if (a.dim() != b.dim()) throw DimensionError("wedge: dimension mismatch");
  if (a.degree() + b.degree() > a.dim()) throw DimensionError("wedge: degree overflow");
  Form out(a.dim(), a.degree() + b.degree());
  const auto& ma = basis_masks(a.dim(), a.degree());
  const auto& mb = basis_masks(b.dim(), b.degree());
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < mb.size(); ++j) {
      if (b[j] == 0.0 || (ma[i] & mb[j])) continue;
      out.add(static_cast<Mask>(ma[i] | mb[j]), merge_sign(ma[i], mb[j]) * a[i] * b[j]);
    }
  }
  return out;
}

double inner(const Metric& g, const Form& a, const Form& b) {
  if (a.dim() != g.dim() || b.dim() != g.dim()) throw DimensionError("inner: dimension mismatch");
  if (a.degree() != b.degree()) throw DimensionError("inner: degree mismatch");
  auto up = raise(g.inverse(), a);
  double s = 0.0;
  for (std::size_t i = 0; i < up.size(); ++i) s += up[i] * b[i];
  return s;
}

Form hodge_star(const Metric& g, const Form& a, int orientation) {
  if (a.dim() != g.dim()) throw DimensionError("hodge_star: dimension mismatch");
  const int n = a.dim();
  const double sqrt_det = std::sqrt(g.det());
  if (n == 7 && a.degree() == 3) return star3_seven(g.inverse(), sqrt_det, orientation, a);
  // Complementary minors of g^-1 are minors of g over det g, so above the middle
  // degree the star lowers the flat dual with g.
  if (n == 7 && a.degree() == 4)
    return flat_star(star3_seven(g.matrix(), 1.0 / sqrt_det, orientation, flat_star(a)));
  if (n == 7 && a.degree() > 4) {
    const Form dual = flat_star(a);
    const auto down = raise(g.matrix(), dual);
    Form lowered(n, dual.degree());
    for (std::size_t i = 0; i < down.size(); ++i) lowered[i] = orientation * down[i] / sqrt_det;
    return lowered;
  }
  const Mask full = full_mask(n);
  auto up = raise(g.inverse(), a);
  Form out(n, n - a.degree());
  const auto& masks = basis_masks(n, a.degree());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    Mask c = static_cast<Mask>(full & ~masks[i]);
    out.set(c, orientation * merge_sign(masks[i], c) * sqrt_det * up[i]);
  }
  return out;
}

Form interior_product(const Vector& v, const Form& a) {
  if (v.size() != a.dim()) throw DimensionError("interior_product: dimension mismatch");
  if (a.degree() < 1) throw DimensionError("interior_product: degree-0 input");
  Form out(a.dim(), a.degree() - 1);
  const auto& masks = basis_masks(a.dim(), a.degree());
  for (std::size_t k = 0; k < masks.size(); ++k) {
    if (a[k] == 0.0) continue;
    int pos = 0;
    for (int i = 0; i < a.dim(); ++i) {
      if (!(masks[k] & (1u << i))) continue;
      const double sign = (pos % 2 == 0) ? 1.0 : -1.0;
      out.add(static_cast<Mask>(masks[k] & ~(1u << i)), sign * v[i] * a[k]);
      ++pos;
    }
  }
  return out;
}

Form pullback(const Matrix& a, const Form& f) {
  if (a.rows() != f.dim() || a.cols() != f.dim()) throw DimensionError("pullback: shape mismatch");
  Form out(f.dim(), f.degree());
  const auto& masks = basis_masks(f.dim(), f.degree());
  // (A^* dx^J) = sum_I det(A[J, I]) dx^I.
  for (std::size_t j = 0; j < masks.size(); ++j) {
    if (f[j] == 0.0) continue;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      out[i] += f[j] * minor_det(a, masks[j], masks[i]);
    }
  }
  return out;
}

Form phi0() {
  Form p(7, 3);
  p += Form::basis(7, "123");
  p += Form::basis(7, "145");
  p += Form::basis(7, "167");
  p += Form::basis(7, "246");
  p -= Form::basis(7, "257");
  p -= Form::basis(7, "347");
  p -= Form::basis(7, "356");
  return p;
}

Form psi0() { return hodge_star(Metric::identity(7), phi0()); }

G2Metric metric_from_g2(const Form& phi) {
  if (phi.dim() != 7 || phi.degree() != 3) throw DimensionError("metric_from_g2 needs a 3-form in dimension 7");
  const auto& s = seven();
  // P(a, i): coefficient a of e_i ⌟ phi.
  double p[21][7] = {};
  for (int i = 0; i < 7; ++i)
    for (int k = 0; k < 35; ++k) {
      const int t = s.iota_target[i][k];
      if (t >= 0) p[t][i] += s.iota_sign[i][k] * phi[k];
    }
  // Q(b, i) = sum_a M(a, b) P(a, i) with M(a, b) the dx^a ^ dx^b ^ phi coefficient.
  double q[21][7] = {};
  for (const auto& pr : s.pairs) {
    const double m = pr.sign * phi[pr.r];
    if (m == 0.0) continue;
    for (int i = 0; i < 7; ++i) q[pr.b][i] += m * p[pr.a][i];
  }
  Matrix b(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = i; j < 7; ++j) {
      double acc = 0.0;
      for (int x = 0; x < 21; ++x) acc += p[x][j] * q[x][i];
      b(i, j) = acc;
      b(j, i) = acc;
    }
  int orientation = 1;
  Eigen::LLT<Matrix> llt(b);
  if (llt.info() != Eigen::Success) {
    Eigen::LLT<Matrix> neg(-b);
    if (neg.info() != Eigen::Success) throw NotG2Error("3-form is not a G2-structure");
    orientation = -1;
  }
  const double det_b = b.determinant();
  // det(B) < 0 exactly when orientation is reversed; the real ninth root keeps g positive.
  const double factor = std::pow(6.0, -2.0 / 9.0) / std::cbrt(std::cbrt(det_b));
  Matrix g = factor * b;
  Metric metric(g);
  return G2Metric{metric, std::sqrt(metric.det()), orientation};
}

Vector cross_product(const Form& phi, const Metric& g, const Vector& u, const Vector& v) {
  if (phi.dim() != 7 || phi.degree() != 3) throw DimensionError("cross_product needs a 3-form in dimension 7");
  if (g.dim() != 7 || u.size() != 7 || v.size() != 7) throw DimensionError("cross_product: dimension mismatch");
  Form w = interior_product(v, interior_product(u, phi));
  Vector lowered(7);
  for (int i = 0; i < 7; ++i) lowered[i] = w[i];
  return g.inverse() * lowered;
}

Form theta(const Form& phi) {
  G2Metric m = metric_from_g2(phi);
  return star3_seven(m.g.inverse(), m.volume, m.orientation, phi);
}

Form theta_linear(const Form& phi, const Form& chi) {
  if (chi.dim() != 7 || chi.degree() != 3) throw DimensionError("theta_linear needs a 3-form in dimension 7");
  // DTheta(chi) = *((4/3) pi1 chi + pi7 chi - pi27 chi) in the metric of phi.
  const G2Metric m = metric_from_g2(phi);
  auto star = [&](const Form& f) { return hodge_star(m.g, f, m.orientation); };
  const Form p1 = (inner(m.g, chi, phi) / 7.0) * phi;
  // Lambda^3_7 = {*(phi ^ a)} and *(phi ^ *(phi ^ a)) = -4 a for 1-forms a.
  const Form p7 = -0.25 * star(wedge(phi, star(wedge(phi, chi))));
  const Form p27 = chi - p1 - p7;
  return -1.0 * star((4.0 / 3.0) * p1 + p7 - p27);
}

ThetaSplit theta_split(const Form& phi, const Form& chi) {
  Form t = theta_linear(phi, chi);
  Form f = theta(phi) - t - theta(phi + chi);
  return {t, f};
}

double pi1_coefficient(const Form& phi, const Form& chi) {
  G2Metric m = metric_from_g2(phi);
  return inner(m.g, chi, phi) / 7.0;
}

Form pi1_project(const Form& phi, const Form& chi) { return pi1_coefficient(phi, chi) * phi; }

std::string to_json(const Form& f) {
  nlohmann::ordered_json j;
  j["dim"] = f.dim();
  j["degree"] = f.degree();
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  const auto& masks = basis_masks(f.dim(), f.degree());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (f[i] == 0.0) continue;
    std::string key;
    for (int d : digits_of(masks[i])) key.push_back(static_cast<char>('1' + d));
    c[key] = f[i];
  }
  j["coeffs"] = c;
  return j.dump();
}

Form form_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text);
  const int dim = j.at("dim").get<int>();
  const int degree = j.at("degree").get<int>();
  Form f(dim, degree);
  for (auto& [key, value] : j.at("coeffs").items()) {
    Form b = Form::basis(dim, key, 1.0);
    if (b.degree() != degree) throw DimensionError("coefficient key has wrong degree");
    for (std::size_t i = 0; i < b.size(); ++i) f[i] += b[i] * value.get<double>();
  }
  return f;
}

}  // namespace g2glue::ext
