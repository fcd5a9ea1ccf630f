#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "g2glue/eguchi_hanson.hpp"
#include "g2glue/exterior_algebra.hpp"

namespace g2glue::kummer {

/// x -> signs * x + shift on T^7 = R^7 / Z^7; shifts are stored in halves (0 or 1).
struct TorusIsometry {
  std::string name;
  std::array<int, 7> signs{1, 1, 1, 1, 1, 1, 1};
  std::array<int, 7> half_shift{0, 0, 0, 0, 0, 0, 0};

  bool is_identity() const;
  /// Orientation of the linear part (+1 or -1).
  int determinant() const;
  /// Image of a point whose coordinates are given in quarters (mod 4).
  std::array<int, 7> apply_quarters(const std::array<int, 7>& q) const;
  std::array<double, 7> apply(const std::array<double, 7>& x) const;

  friend bool operator==(const TorusIsometry& a, const TorusIsometry& b) {
    return a.signs == b.signs && a.half_shift == b.half_shift;
  }
};

/// a o b.
TorusIsometry compose(const TorusIsometry& a, const TorusIsometry& b);

TorusIsometry alpha();
TorusIsometry beta();
TorusIsometry gamma();

/// id, alpha, beta, gamma, beta gamma, gamma alpha, alpha beta, alpha beta gamma.
std::vector<TorusIsometry> gamma_elements();

/// Preserved 3-form on T^7 in the coordinates of the group maps: the standard
/// phi0 with the coordinate order reversed.
ext::Form invariant_three_form();

/// Pullback of a constant 3-form under the linear part of g.
ext::Form pullback(const TorusIsometry& g, const ext::Form& f);

/// Component of a fixed-point set: coordinates with pinned[i] < 0 are free,
/// the others are fixed at pinned[i] / 4.
struct FixedTorus {
  std::array<int, 7> pinned{};

  std::vector<int> free_indices() const;
  std::string str() const;
  friend bool operator==(const FixedTorus& a, const FixedTorus& b) { return a.pinned == b.pinned; }
  friend bool operator<(const FixedTorus& a, const FixedTorus& b) { return a.pinned < b.pinned; }
};

FixedTorus image(const TorusIsometry& g, const FixedTorus& f);
bool intersects(const FixedTorus& a, const FixedTorus& b);

struct FixedSet {
  bool whole_torus = false;  ///< identity: every point is fixed
  std::vector<FixedTorus> tori;
};

FixedSet fixed_point_tori(const TorusIsometry& g);

struct SingularComponent {
  int id = 0;                     ///< 1..12
  std::string generator;          ///< alpha, beta or gamma
  std::vector<FixedTorus> orbit;  ///< the four tori identified in the quotient
};

struct SingularSet {
  std::vector<SingularComponent> components;
  bool free_action = false;  ///< every orbit of the complementary Z2^2 has size 4
  bool stabilised = false;   ///< each generator maps its own tori to themselves
  bool disjoint = false;     ///< the 48 fixed tori are pairwise disjoint in T^7
};

SingularSet singular_components();

/// Dimension of the Gamma-invariant constant p-forms on T^7 (the Betti numbers of T^7/Gamma).
int invariant_betti(int p);

inline constexpr double kZeta = 1.0 / 9.0;

/// Quintic smoothstep in u = (s - zeta/4) / (zeta/4): 0 below zeta/4, 1 above zeta/2.
double cutoff(double s, double zeta = kZeta);
double cutoff_derivative(double s, double zeta = kZeta);

/// Flat-model distance from the singular set at chart radius r.
double flat_distance(double r);
double radius_at_distance(double s);

enum class Region { Inner, Annulus, Outer };

struct GluedStructure {
  ext::Form phi;       ///< orthonormal components in the g_(t^4) coframe
  ext::Form vartheta;
};

/// phi^t and vartheta^t on one component chart of the resolution.
///
/// Generators (delta1, delta2, delta3, dr, eta1, eta2, eta3); the EH factor is
/// the member k = t^4 and the cutoff enters through s = flat_distance(r).
class GluingModel {
 public:
  explicit GluingModel(double t, double zeta = kZeta);

  double t() const { return t_; }
  double k() const { return k_; }
  double zeta() const { return zeta_; }
  const eh::ChartPtr& chart() const { return chart_; }
  Region region(double r) const;

  const eh::RadialForm& omega1(Region g) const { return w1_[index(g)]; }
  const eh::RadialForm& phi(Region g) const { return phi_[index(g)]; }
  const eh::RadialForm& vartheta(Region g) const { return vartheta_[index(g)]; }

  GluedStructure at(double r) const;
  /// Largest relative residual of d(phi^t) and d(vartheta^t) at r.
  double closedness_residual(double r) const;
  /// psi^t = *(Theta(phi^t) - vartheta^t) in the metric of phi^t; throws NotG2Error.
  ext::Form torsion(double r) const;
  double torsion_norm(double r) const;
  /// Largest component error between g(phi^t) and the product metric at a plateau.
  double product_metric_error(double r) const;
  /// |d tau1^(t^4)| in g_(t^4) at r.
  double ale_difference_norm(double r) const;

 private:
  static std::size_t index(Region g) { return static_cast<std::size_t>(g); }

  double t_, k_, zeta_;
  eh::ChartPtr chart_;
  std::vector<eh::RadialForm> w1_, phi_, vartheta_, dphi_, dvartheta_;
  std::optional<eh::RadialForm> dtau1_;
};

struct TorsionFitSpec {
  std::vector<double> t_list;
  std::size_t samples = 20000;
  double beta = -0.05;
  double alpha = 0.5;
  double zeta = kZeta;
  std::uint64_t seed = 1;
};

struct TorsionRow {
  double t = 0.0;
  bool admissible = false;   ///< phi^t positive at every annulus sample
  double first_failure = 0.0;  ///< flat distance of the first non-positive sample
  double sup_psi = 0.0;
  double sup_grad_psi = 0.0;
  double weighted = 0.0;     ///< C^0_{beta-2;t} norm of psi^t
  double sup_ale = 0.0;      ///< sup |d tau1| on the annulus
};

struct TorsionFit {
  std::vector<TorsionRow> rows;
  std::optional<double> t0;              ///< largest admissible sampled t
  std::optional<double> slope;           ///< sup|psi| against t over admissible rows
  std::optional<double> weighted_slope;
  std::optional<double> ale_slope;       ///< over all rows
  std::string csv() const;
};

/// Sup and weighted norms of psi^t over a uniform annulus sample, and the log-log slopes.
/// Slopes are left empty when fewer than three rows are admissible.
TorsionFit torsion_decay_fit(const TorsionFitSpec& spec);

/// The cutoff fields chi * nu_(t^4) on the 12 components plus b2 global harmonic forms.
class ApproximateKernel {
 public:
  ApproximateKernel(double t, int b2, double zeta = kZeta);

  int component_count() const { return 12; }
  int b2() const { return b2_; }
  /// Orthonormal components of chi * nu at chart radius r of a component.
  ext::Form field(double r) const;
  /// |chi nu (s - 1e-12 s) - chi nu (s + 1e-12 s)|.
  double jump(double s) const;
  /// Radial L^2 Gram matrix of the 12 cutoff fields (disjoint supports).
  std::vector<std::vector<double>> gram() const;
  int span_dimension() const;

 private:
  double t_, k_, zeta_;
  int b2_;
  eh::RadialForm nu_;
};

}  // namespace g2glue::kummer
