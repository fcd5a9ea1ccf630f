#pragma once

#include <memory>
#include <string>
#include <vector>

#include "g2glue/exterior_algebra.hpp"

namespace g2glue::eh {

/// One term c * r^a * (k + r^2)^b.
struct RadialTerm {
  double c;
  double a;
  double b;
};

/// Finite sum of RadialTerm; closed under d/dr and products.
class RadialFunction {
 public:
  RadialFunction() = default;
  RadialFunction(double c, double a = 0.0, double b = 0.0);  // NOLINT: implicit from a constant
  static RadialFunction zero() { return RadialFunction(); }

  const std::vector<RadialTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double eval(double k, double r) const;
  /// Sum of absolute term values; the scale against which cancellation is judged.
  double magnitude(double k, double r) const;
  RadialFunction derivative() const;
  /// f(lambda2 * r) rewritten on the family member k' = k / lambda2^2.
  RadialFunction rescaled(double lambda2) const;

  RadialFunction& operator+=(const RadialFunction& o);
  RadialFunction& operator-=(const RadialFunction& o);
  RadialFunction& operator*=(double s);

  friend RadialFunction operator+(RadialFunction a, const RadialFunction& b) { return a += b; }
  friend RadialFunction operator-(RadialFunction a, const RadialFunction& b) { return a -= b; }
  friend RadialFunction operator*(double s, RadialFunction a) { return a *= s; }
  friend RadialFunction operator*(const RadialFunction& a, const RadialFunction& b);

 private:
  void simplify();
  std::vector<RadialTerm> terms_;
};

/// Coframe with constant structure constants and one radial generator.
///
/// Generator `radial` is dr. Every other generator g satisfies
/// d(g) = structure[g], a constant-coefficient 2-form in the generators.
/// The orthonormal coframe is e^a = scale[a](r) * g^a.
struct FrameChart {
  int dim = 4;
  int radial = 0;
  double k = 0.0;
  std::vector<ext::Form> structure;
  std::vector<RadialFunction> scale;
  std::vector<std::string> labels;
};

using ChartPtr = std::shared_ptr<const FrameChart>;

/// p-form whose coefficients in the chart generators are radial functions.
class RadialForm {
 public:
  RadialForm(ChartPtr chart, int degree);

  const ChartPtr& chart() const { return chart_; }
  int degree() const { return degree_; }
  int dim() const { return chart_->dim; }
  std::size_t size() const { return coeffs_.size(); }

  const RadialFunction& coeff(std::size_t i) const { return coeffs_[i]; }
  RadialFunction& coeff(std::size_t i) { return coeffs_[i]; }
  /// Adds f * (generator monomial given by 1-based digits; unsorted allowed).
  RadialForm& add(std::string_view digits, const RadialFunction& f);

  RadialForm& operator+=(const RadialForm& o);
  RadialForm& operator-=(const RadialForm& o);
  RadialForm& operator*=(double s);
  friend RadialForm operator+(RadialForm a, const RadialForm& b) { return a += b; }
  friend RadialForm operator-(RadialForm a, const RadialForm& b) { return a -= b; }
  friend RadialForm operator*(double s, RadialForm a) { return a *= s; }
  friend RadialForm operator*(const RadialFunction& f, const RadialForm& a);

  /// Coefficients in the chart generators at radius r.
  ext::Form eval(double r) const;
  /// Coefficients in the orthonormal coframe at radius r.
  ext::Form orthonormal(double r) const;
  /// Per-slot magnitude (sum of absolute term values), the cancellation scale.
  double magnitude(double r) const;
  /// Pointwise norm in the chart metric.
  double pointwise_norm(double r) const { return orthonormal(r).norm(); }

  /// Same coefficients on another chart of equal dimension.
  RadialForm on_chart(ChartPtr other) const;
  /// Embeds into a larger chart, generator i mapping to generator i + offset.
  RadialForm lifted(ChartPtr target, int offset) const;

 private:
  ChartPtr chart_;
  int degree_;
  std::vector<RadialFunction> coeffs_;
};

RadialForm wedge(const RadialForm& a, const RadialForm& b);
RadialForm exterior_derivative(const RadialForm& a);

/// Orthonormal-frame Hodge star at radius r (orientation of the ordered generators).
ext::Form hodge_star_at(const RadialForm& a, double r);

/// max_slot |value| / max_slot magnitude; 0 for an identically vanishing expression.
double relative_residual(const RadialForm& a, double r);

}  // namespace g2glue::eh
