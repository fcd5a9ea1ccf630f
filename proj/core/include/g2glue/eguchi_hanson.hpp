#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "g2glue/frame_chart.hpp"

namespace g2glue::eh {

/// Structure-equation sign s in d(eta^1) = s eta^2 ^ eta^3 (and cyclic).
///
/// The left-invariant coframe needs s = +1 for the hyperkaehler triple to be
/// closed; the right-invariant coframe satisfies the opposite sign.
inline constexpr int kLeftSign = +1;
inline constexpr int kRightSign = -1;

/// f_k(r) = (k + r^2)^(1/4).
double f_k(double k, double r);

/// Chart on R_{>0} x SO(3) with generators (dr, eta1, eta2, eta3) and the
/// g_(k)-orthonormal coframe dt = f^-1 dr, e1 = r f^-1 eta1, e2 = f eta2, e3 = f eta3.
ChartPtr make_chart(double k, int structure_sign = kLeftSign);

struct Triple {
  RadialForm w1, w2, w3;
};

Triple hyperkaehler_triple(const ChartPtr& chart);
Triple hyperkaehler_triple(double k);

struct HarmonicForms {
  RadialForm nu;
  RadialForm lambda;
  RadialForm tau1;  ///< (f_k^2 - f_0^2) eta1, with d tau1 = w1^(k) - w1^(0)
};

HarmonicForms harmonic_forms(const ChartPtr& chart);
HarmonicForms harmonic_forms(double k);

/// w1^(0) written on the chart of g_(k) (same generators, flat coefficients).
RadialForm flat_w1(const ChartPtr& chart);

/// The anti-self-dual triple built from right-invariant forms, on a chart
/// with the right-invariant structure sign. Evaluated on the slice where
/// the right- and left-invariant coframes agree.
Triple asd_triple(double k);

/// Rank of the Gram matrix of {w_i, hat w_i} at (k, r).
int six_form_rank(double k, double r);

/// Distance from the exceptional set along a radial geodesic: int_0^r f_k(s)^-1 ds.
double radial_distance(double k, double r);

struct SphereGeometry {
  double diameter;
  double volume;
};

/// Induced geometry of the exceptional sphere, integrated numerically.
SphereGeometry sphere_geometry(double k);

/// |tau1^(k)|_{g_(0)} / (k (k^{1/4} + r^{1/2})^{-3}); requires k in (0,1], r > 1.
double ale_decay_ratio(double k, double r);

/// Maximal relative component error between phi^* g_(k) and lambda^2 g_(k')
/// for the dilation r -> lambda^2 r, lambda^4 = k / k'.
double scaling_pullback_check(double k, double kp, double r);

/// Pullback of a form on the chart of g_(t^4) under r -> t^2 r, expressed on
/// the chart of g_(1).
RadialForm dilation_pullback(const RadialForm& a, double t, const ChartPtr& unit_chart);

struct WeightedNormSpec {
  int k_derivs = 0;
  double alpha = 0.5;
  double beta = 0.0;
  double t = 1.0;
  std::size_t max_pairs = 10000;
  std::uint64_t seed = 1;
};

/// One evaluation point of a sampled tensor field.
///
/// Samples sharing `fiber` lie on one radial geodesic; `position` is arc length
/// along it. `jets[j]` holds the orthonormal components of the j-th derivative.
struct FieldSample {
  int fiber = 0;
  double position = 0.0;
  double weight = 1.0;
  std::vector<std::vector<double>> jets;
};

struct WeightedNormParts {
  double total;
  std::vector<double> sup_parts;  ///< sup w^{j-beta} |nabla^j f| for j = 0..k
  double hoelder;
  std::size_t admissible_pairs;
};

WeightedNormParts weighted_norm(const std::vector<FieldSample>& samples, const WeightedNormSpec& spec);

/// Samples |a| on a radial grid of the chart of g_(t^4), with w_t = t + distance.
std::vector<FieldSample> sample_form(const RadialForm& a, double t, const std::vector<double>& radii);

struct RescalingReport {
  double lhs;   ///< L-infinity part of || sigma a ||_{beta;1}
  double rhs;   ///< L-infinity part of || a ||_{beta;t}
  double discrepancy;
};

/// Compares both sides of the rescaling identity for weighted norms on matched
/// grids: points y of the unit member against x = t^2 y of the member k = t^4.
RescalingReport rescaling_invariance_check(const RadialForm& a, double beta, double t,
                                           const std::vector<double>& unit_radii);

/// Geometric grid of n radii on [r0, r1].
std::vector<double> geometric_grid(double r0, double r1, int n);

/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace g2glue::eh
