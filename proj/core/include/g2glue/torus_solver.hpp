#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "g2glue/exterior_algebra.hpp"

namespace g2glue::torus {

/// Uniform grid of n^7 points on T^7 = R^7 / Z^7 and its real-to-complex spectrum.
///
/// Points are row-major with axis 0 slowest. The spectrum keeps n^6 (n/2 + 1)
/// modes with the last axis halved. Derivative symbols use the effective
/// wave vector, in which the Nyquist wavenumber n/2 counts as 0.
class Grid {
 public:
  explicit Grid(int n);

  int n() const { return n_; }
  std::size_t points() const { return points_; }
  std::size_t modes() const { return modes_; }
  std::array<int, 7> point_index(std::size_t p) const;
  std::array<double, 7> coordinates(std::size_t p) const;
  std::array<int, 7> wave(std::size_t mode) const;
  std::array<double, 7> effective_wave(std::size_t mode) const;
  /// Multiplicity of a half-spectrum mode in the full spectrum (1 or 2).
  double hermitian_weight(std::size_t mode) const;

  friend bool operator==(const Grid& a, const Grid& b) { return a.n_ == b.n_; }

 private:
  int n_;
  std::size_t points_, modes_;
};

/// Real p-form field sampled on the grid, stored point-major.
class GridField {
 public:
  GridField(const Grid& grid, int degree);

  const Grid& grid() const { return grid_; }
  int degree() const { return degree_; }
  int components() const { return comps_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  ext::Form at(std::size_t p) const;
  void set(std::size_t p, const ext::Form& f);
  double* point(std::size_t p) { return values_.data() + p * comps_; }
  const double* point(std::size_t p) const { return values_.data() + p * comps_; }

  /// max over points of the flat pointwise norm.
  double linf() const;
  /// Mean over points of the squared flat pointwise norm.
  double mean_square() const;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(double s);
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(double s, GridField a) { return a *= s; }

 private:
  Grid grid_;
  int degree_, comps_;
  std::vector<double> values_;
};

/// Fourier coefficients f^(m) = N^-7 sum_x f(x) exp(-2 pi i m.x), stored mode-major.
class SpectralField {
 public:
  SpectralField(const Grid& grid, int degree);

  const Grid& grid() const { return grid_; }
  int degree() const { return degree_; }
  int components() const { return comps_; }
  std::vector<std::complex<double>>& coeffs() { return coeffs_; }
  const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }
  std::complex<double>* mode(std::size_t m) { return coeffs_.data() + m * comps_; }
  const std::complex<double>* mode(std::size_t m) const { return coeffs_.data() + m * comps_; }

  /// Sum over the full spectrum of |f^(m)|^2 (equals the grid mean square).
  double energy() const;
  double zero_mode_norm() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);

 private:
  Grid grid_;
  int degree_, comps_;
  std::vector<std::complex<double>> coeffs_;
};

SpectralField forward(const GridField& f);
GridField inverse(const SpectralField& f);

/// Exterior derivative: multiplication by 2 pi i m ^ .
SpectralField exterior_derivative(const SpectralField& f);
/// Flat Hodge star, pointwise.
GridField hodge_star(const GridField& f);
SpectralField hodge_star(const SpectralField& f);
/// Formal adjoint of d in the flat metric, realised as (-1)^p * d * on p-forms.
SpectralField codifferential(const SpectralField& f);
SpectralField laplacian(const SpectralField& f);
/// Inverse of the Laplacian on the complement of its kernel; throws DomainError
/// when the input has a kernel component above 1e-10 relative.
SpectralField inverse_laplacian(const SpectralField& f);
/// Removes every mode whose effective wave vector vanishes.
void project_off_kernel(SpectralField& f);

GridField exterior_derivative(const GridField& f);
GridField codifferential(const GridField& f);

/// Mean over the grid of the flat inner product.
double l2_inner(const GridField& a, const GridField& b);

enum class OperatorMode { FlatBackground, CurvedCg };

std::string to_string(OperatorMode m);
OperatorMode operator_mode_from_string(const std::string& s);

struct SolverConfig {
  int n = 6;
  double eps = 1e-2;
  std::uint64_t seed = 7;
  double tol = 1e-8;
  int max_iter = 50;
  OperatorMode mode = OperatorMode::FlatBackground;
  /// Switch to the CurvedCg mode when the flat-background iteration stalls above tol.
  bool fallback = true;
};

void validate(const SolverConfig& cfg);

struct ModelProblem {
  Grid grid;
  double eps;
  SpectralField sigma_hat;  ///< band-limited mean-zero 2-form, normalised to |d sigma|_inf = 1
  GridField phi;            ///< phi0 + eps d sigma
  GridField psi;            ///< *psi = Theta(phi) - *phi0, star of g(phi)
  double closedness;        ///< |d phi|_inf
  double compatibility_gap; ///< |d* psi - d* phi|_inf / |d* phi|_inf in g(phi)
};

/// Builds phi = phi0 + eps d sigma and psi; throws DomainError when phi is not
/// positive at some grid point.
ModelProblem make_model_problem(const SolverConfig& cfg);

struct PicardStep {
  SpectralField eta;
  double sigma_zero_mode;  ///< |zero mode of the right-hand side| / |right-hand side|
};

/// eta_{j+1} = Delta^-1 d*(psi + f_j psi + *F(d eta_j)) with f_j phi = (7/3) pi_1(d eta_j).
PicardStep picard_step(const ModelProblem& problem, const SpectralField& eta);

/// Gauss-Newton step for d Theta(phi + d eta) = 0 with the flat Jacobian, gauged
/// so that phi + d eta - phi0 is L^2-orthogonal to every Lie derivative L_X phi0.
SpectralField slice_newton_step(const ModelProblem& problem, const SpectralField& eta);

/// max(|d phi~|_inf, |d Theta(phi~)|_inf) computed spectrally; throws on positivity loss.
double residual(const GridField& phi_tilde);

/// The symbol of D Theta at phi0 as a 35 x 35 matrix from 3-forms to 4-forms.
Eigen::MatrixXd theta_linearisation_at_phi0();

struct IterationRecord {
  int iteration;
  std::string mode;
  double step;      ///< |eta_{j+1} - eta_j|_inf
  double residual;  ///< residual(phi + d eta_{j+1}); only filled for the slice mode
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  double distance_to_flat = 0.0;
  double zero_mode_error = 0.0;      ///< exact spectral zero mode of phi~ - phi0
  double grid_mean_error = 0.0;      ///< zero mode of phi~ - phi0 measured through the FFT
  double compatibility_gap = 0.0;
  double max_sigma_zero_mode = 0.0;
  std::vector<double> contraction_factors;
  std::vector<IterationRecord> history;
  int flat_iterations = 0;
  double flat_residual = 0.0;        ///< residual where the flat-background iteration stopped
  double flat_distance = 0.0;
  bool fell_back = false;
  std::string final_mode;
  std::string failure;
};

struct Solution {
  SpectralField eta;
  SolveReport report;
};

/// Runs the configured iteration from eta_0 = 0. Exceeding max_iter leaves
/// report.converged false with the reason in report.failure; positivity loss
/// throws DomainError.
Solution solve(const SolverConfig& cfg);

/// Little-endian dump: int32 n, int32 degree, then doubles point-major.
void write_field(std::ostream& os, const GridField& f);
GridField read_field(std::istream& is);

}  // namespace g2glue::torus
