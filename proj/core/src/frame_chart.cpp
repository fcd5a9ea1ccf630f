#include "g2glue/frame_chart.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace g2glue::eh {

using ext::Form;
using ext::Mask;

RadialFunction::RadialFunction(double c, double a, double b) {
  if (c != 0.0) terms_.push_back({c, a, b});
}

double RadialFunction::eval(double k, double r) const {
  double s = 0.0;
  const double q = k + r * r;
  for (const auto& t : terms_) s += t.c * std::pow(r, t.a) * std::pow(q, t.b);
  return s;
}

double RadialFunction::magnitude(double k, double r) const {
  double s = 0.0;
  const double q = k + r * r;
  for (const auto& t : terms_) s += std::abs(t.c * std::pow(r, t.a) * std::pow(q, t.b));
  return s;
}

RadialFunction RadialFunction::derivative() const {
  RadialFunction out;
  for (const auto& t : terms_) {
    if (t.a != 0.0) out.terms_.push_back({t.c * t.a, t.a - 1.0, t.b});
    if (t.b != 0.0) out.terms_.push_back({2.0 * t.b * t.c, t.a + 1.0, t.b - 1.0});
  }
  out.simplify();
  return out;
}

RadialFunction RadialFunction::rescaled(double lambda2) const {
  RadialFunction out = *this;
  for (auto& t : out.terms_) t.c *= std::pow(lambda2, t.a + 2.0 * t.b);
  return out;
}

RadialFunction& RadialFunction::operator+=(const RadialFunction& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  simplify();
  return *this;
}

RadialFunction& RadialFunction::operator-=(const RadialFunction& o) {
  for (const auto& t : o.terms_) terms_.push_back({-t.c, t.a, t.b});
  simplify();
  return *this;
}

RadialFunction& RadialFunction::operator*=(double s) {
  for (auto& t : terms_) t.c *= s;
  simplify();
  return *this;
}

RadialFunction operator*(const RadialFunction& x, const RadialFunction& y) {
  RadialFunction out;
  for (const auto& a : x.terms_)
    for (const auto& b : y.terms_) out.terms_.push_back({a.c * b.c, a.a + b.a, a.b + b.b});
  out.simplify();
  return out;
}

void RadialFunction::simplify() {
  std::sort(terms_.begin(), terms_.end(), [](const RadialTerm& x, const RadialTerm& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  std::vector<RadialTerm> merged;
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().a == t.a && merged.back().b == t.b) {
      merged.back().c += t.c;
    } else {
      merged.push_back(t);
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const RadialTerm& t) { return t.c == 0.0; }),
               merged.end());
  terms_ = std::move(merged);
}

namespace {

// d of the generator monomial with mask m, as a constant form of degree |m| + 1
// (without the radial-derivative part).
Form monomial_derivative(const FrameChart& chart, Mask m) {
  const int n = chart.dim;
  const int p = std::popcount(static_cast<unsigned>(m));
  Form out(n, p + 1);
  int position = 0;
  for (int i = 0; i < n; ++i) {
    if (!(m & (1u << i))) continue;
    // gen^{i_1} ^ ... ^ d(gen^{i_j}) ^ ... with sign (-1)^(j-1).
    const Form& dg = chart.structure[i];
    if (dg.max_abs() != 0.0) {
      Mask before = static_cast<Mask>(m & ((1u << i) - 1u));
      Mask after = static_cast<Mask>(m & ~((1u << (i + 1)) - 1u));
      Form left(n, std::popcount(static_cast<unsigned>(before)));
      left.set(before, 1.0);
      Form right(n, std::popcount(static_cast<unsigned>(after)));
      right.set(after, 1.0);
      Form term = ext::wedge(ext::wedge(left, dg), right);
      if (position % 2 == 1) term *= -1.0;
      out += term;
    }
    ++position;
  }
  return out;
}

}  // namespace

RadialForm::RadialForm(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
  coeffs_.resize(ext::basis_masks(chart_->dim, degree).size());
}

RadialForm& RadialForm::add(std::string_view digits, const RadialFunction& f) {
  Form b = Form::basis(chart_->dim, digits, 1.0);
  if (b.degree() != degree_) throw DimensionError("RadialForm::add: degree mismatch");
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] != 0.0) coeffs_[i] += b[i] * f;
  }
  return *this;
}

RadialForm& RadialForm::operator+=(const RadialForm& o) {
  if (o.dim() != dim() || o.degree_ != degree_) throw DimensionError("RadialForm: shape mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

RadialForm& RadialForm::operator-=(const RadialForm& o) {
  if (o.dim() != dim() || o.degree_ != degree_) throw DimensionError("RadialForm: shape mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

RadialForm& RadialForm::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

RadialForm operator*(const RadialFunction& f, const RadialForm& a) {
  RadialForm out = a;
  for (auto& c : out.coeffs_) c = f * c;
  return out;
}

Form RadialForm::eval(double r) const {
  Form out(dim(), degree_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] = coeffs_[i].eval(chart_->k, r);
  return out;
}

Form RadialForm::orthonormal(double r) const {
  Form out = eval(r);
  std::vector<double> inv_scale(dim());
  for (int a = 0; a < dim(); ++a) inv_scale[a] = 1.0 / chart_->scale[a].eval(chart_->k, r);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Mask m = out.mask_at(i);
    for (int a = 0; a < dim(); ++a)
      if (m & (1u << a)) out[i] *= inv_scale[a];
  }
  return out;
}

double RadialForm::magnitude(double r) const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, c.magnitude(chart_->k, r));
  return m;
}

RadialForm RadialForm::on_chart(ChartPtr other) const {
  if (other->dim != dim()) throw DimensionError("on_chart: dimension mismatch");
  RadialForm out(std::move(other), degree_);
  out.coeffs_ = coeffs_;
  return out;
}

RadialForm RadialForm::lifted(ChartPtr target, int offset) const {
  if (target->dim < dim() + offset) throw DimensionError("lifted: target chart too small");
  RadialForm out(target, degree_);
  const auto& masks = ext::basis_masks(dim(), degree_);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    Mask shifted = static_cast<Mask>(masks[i] << offset);
    out.coeffs_[ext::mask_position(target->dim, shifted)] = coeffs_[i];
  }
  return out;
}

RadialForm wedge(const RadialForm& a, const RadialForm& b) {
  if (a.chart() != b.chart()) throw DimensionError("wedge: forms live on different charts");
  const int n = a.dim();
  if (a.degree() + b.degree() > n) throw DimensionError("wedge: degree overflow");
  RadialForm out(a.chart(), a.degree() + b.degree());
  const auto& ma = ext::basis_masks(n, a.degree());
  const auto& mb = ext::basis_masks(n, b.degree());
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (a.coeff(i).is_zero()) continue;
    for (std::size_t j = 0; j < mb.size(); ++j) {
      if (b.coeff(j).is_zero() || (ma[i] & mb[j])) continue;
      const int slot = ext::mask_position(n, static_cast<Mask>(ma[i] | mb[j]));
      out.coeff(slot) += static_cast<double>(ext::merge_sign(ma[i], mb[j])) * (a.coeff(i) * b.coeff(j));
    }
  }
  return out;
}

RadialForm exterior_derivative(const RadialForm& a) {
  const FrameChart& chart = *a.chart();
  const int n = chart.dim;
  if (a.degree() + 1 > n) return RadialForm(a.chart(), a.degree());
  RadialForm out(a.chart(), a.degree() + 1);
  const auto& masks = ext::basis_masks(n, a.degree());
  const Mask dr = static_cast<Mask>(1u << chart.radial);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const RadialFunction& f = a.coeff(i);
    if (f.is_zero()) continue;
    if (!(masks[i] & dr)) {
      const int slot = ext::mask_position(n, static_cast<Mask>(masks[i] | dr));
      out.coeff(slot) += static_cast<double>(ext::merge_sign(dr, masks[i])) * f.derivative();
    }
    Form dm = monomial_derivative(chart, masks[i]);
    for (std::size_t j = 0; j < dm.size(); ++j) {
      if (dm[j] != 0.0) out.coeff(j) += dm[j] * f;
    }
  }
  return out;
}

Form hodge_star_at(const RadialForm& a, double r) {
  return ext::hodge_star(ext::Metric::identity(a.dim()), a.orthonormal(r));
}

double relative_residual(const RadialForm& a, double r) {
  const double scale = a.magnitude(r);
  if (scale == 0.0) return 0.0;
  return a.eval(r).max_abs() / scale;
}

}  // namespace g2glue::eh
