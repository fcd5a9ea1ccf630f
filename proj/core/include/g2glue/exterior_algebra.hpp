#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "g2glue/errors.hpp"

namespace g2glue::ext {

inline constexpr int kMaxDim = 7;

/// Bitmask over frame directions; bit i set means direction i (0-based) is present.
using Mask = std::uint8_t;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

/// Sorted multi-indices of a given degree in a given dimension.
///
/// Order is lexicographic in the ascending digit string, so in dimension 7
/// degree 3 the sequence starts 123, 124, ..., 127, 134, ...
const std::vector<Mask>& basis_masks(int dim, int degree);

/// Position of `m` in basis_masks(dim, popcount(m)), or -1.
int mask_position(int dim, Mask m);

/// Sign of the permutation sorting the concatenation of the index sets a and b.
/// Returns 0 when they overlap.
int merge_sign(Mask a, Mask b);

/// Alternating p-form on an n-dimensional frame with dense coefficient storage.
class Form {
 public:
  Form() = default;
  Form(int dim, int degree);

  /// Single basis monomial from 1-based digits, e.g. basis(7, "145").
  static Form basis(int dim, std::string_view digits, double coeff = 1.0);
  static Form basis(int dim, std::initializer_list<int> one_based, double coeff = 1.0);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return coeffs_.size(); }

  double& operator[](std::size_t i) { return coeffs_[i]; }
  double operator[](std::size_t i) const { return coeffs_[i]; }
  std::span<double> coeffs() { return coeffs_; }
  std::span<const double> coeffs() const { return coeffs_; }
  Mask mask_at(std::size_t i) const;

  double get(Mask m) const;
  void set(Mask m, double v);
  void add(Mask m, double v);

  /// Signed coefficient for an arbitrary (possibly unsorted) 0-based index list.
  double at(std::span<const int> index) const;

  Form& operator+=(const Form& o);
  Form& operator-=(const Form& o);
  Form& operator*=(double s);

  /// Largest absolute coefficient.
  double max_abs() const;
  /// Euclidean coefficient norm, equal to the flat-metric norm in orthonormal frames.
  double norm() const;

 private:
  int dim_ = 0;
  int degree_ = 0;
  std::vector<double> coeffs_;
};

Form operator+(Form a, const Form& b);
Form operator-(Form a, const Form& b);
Form operator-(Form a);
Form operator*(double s, Form a);
Form operator*(Form a, double s);

/// Symmetric positive definite bilinear form on a frame.
class Metric {
 public:
  explicit Metric(int dim);
  explicit Metric(const Matrix& g);
  static Metric identity(int dim) { return Metric(dim); }
  static Metric scaled(int dim, double c2);

  int dim() const { return static_cast<int>(g_.rows()); }
  const Matrix& matrix() const { return g_; }
  const Matrix& inverse() const { return ginv_; }
  double det() const { return det_; }

 private:
  Matrix g_;
  Matrix ginv_;
  double det_ = 1.0;
};

Form wedge(const Form& a, const Form& b);

/// Pointwise inner product of two forms of the same degree.
double inner(const Metric& g, const Form& a, const Form& b);

/// Hodge star for the orientation dx_1 ^ ... ^ dx_n (times `orientation`).
Form hodge_star(const Metric& g, const Form& a, int orientation = 1);

Form interior_product(const Vector& v, const Form& a);

/// Pullback of a constant-coefficient form under the linear map x -> A x.
Form pullback(const Matrix& a, const Form& f);

/// Standard positive 3-form in dimension 7 and its flat dual 4-form.
Form phi0();
Form psi0();

struct G2Metric {
  Metric g;
  double volume;     ///< sqrt(det g)
  int orientation;   ///< +1 when phi induces the coordinate orientation
};

/// Metric and orientation induced by a positive 3-form.
G2Metric metric_from_g2(const Form& phi);

/// u x v defined by phi(u, v, w) = g(u x v, w).
Vector cross_product(const Form& phi, const Metric& g, const Vector& u, const Vector& v);

/// Theta(phi) = star of phi taken in the metric and orientation phi induces.
Form theta(const Form& phi);

struct ThetaSplit {
  Form t_of_chi;
  Form f_of_chi;
};

/// Splits Theta(phi + chi) = *phi - T(chi) - F(chi) with T linear and F quadratic.
ThetaSplit theta_split(const Form& phi, const Form& chi);

/// Linear part only: T(chi) = -DTheta|_phi(chi).
Form theta_linear(const Form& phi, const Form& chi);

/// Projection of a 3-form onto the line spanned by phi.
Form pi1_project(const Form& phi, const Form& chi);

/// Scalar c with pi1(chi) = c * phi.
double pi1_coefficient(const Form& phi, const Form& chi);

std::string to_json(const Form& f);
Form form_from_json(std::string_view text);

}  // namespace g2glue::ext
