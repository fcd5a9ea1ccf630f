#include "g2glue/torus_solver.hpp"

#include <fftw3.h>
#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/parallel_reduce.h>

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>

#include "g2glue/errors.hpp"

namespace g2glue::torus {

using cplx = std::complex<double>;
using ext::Form;

namespace {

constexpr int kDim = 7;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int component_count(int degree) { return static_cast<int>(ext::basis_masks(kDim, degree).size()); }

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

struct WedgeEntry {
  int src, dst, axis, sign;
};

// dx_axis ^ dx_I for every basis monomial I of the given degree.
const std::vector<WedgeEntry>& wedge_table(int degree) {
  static std::once_flag once;
  static std::array<std::vector<WedgeEntry>, kDim + 1> tables;
  std::call_once(once, [] {
    for (int p = 0; p < kDim; ++p) {
      const auto& masks = ext::basis_masks(kDim, p);
      for (std::size_t s = 0; s < masks.size(); ++s)
        for (int k = 0; k < kDim; ++k) {
          const ext::Mask bit = static_cast<ext::Mask>(1u << k);
          const int sign = ext::merge_sign(bit, masks[s]);
          if (sign == 0) continue;
          tables[p].push_back({static_cast<int>(s), ext::mask_position(kDim, masks[s] | bit), k, sign});
        }
    }
  });
  if (degree < 0 || degree >= kDim) throw DimensionError("no exterior derivative out of top degree");
  return tables[degree];
}

struct StarEntry {
  int dst;
  double sign;
};

const std::vector<StarEntry>& star_table(int degree) {
  static std::once_flag once;
  static std::array<std::vector<StarEntry>, kDim + 1> tables;
  std::call_once(once, [] {
    const ext::Metric id = ext::Metric::identity(kDim);
    for (int p = 0; p <= kDim; ++p) {
      const int n = component_count(p);
      for (int s = 0; s < n; ++s) {
        Form e(kDim, p);
        e[s] = 1.0;
        const Form st = ext::hodge_star(id, e);
        for (std::size_t d = 0; d < st.size(); ++d)
          if (st[d] != 0.0) tables[p].push_back({static_cast<int>(d), st[d]});
      }
    }
  });
  return tables[degree];
}

// FFTW plans keyed by (n, components, direction); planning is serialised.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan plan_for(int n, int comps, bool forward_direction) {
  static std::map<std::tuple<int, int, bool>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(plan_mutex());
  const auto key = std::make_tuple(n, comps, forward_direction);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  int dims[kDim];
  std::fill(dims, dims + kDim, n);
  const std::size_t points = ipow(n, kDim);
  const std::size_t modes = ipow(n, kDim - 1) * (n / 2 + 1);
  // Planning with FFTW_ESTIMATE never touches the arrays.
  std::vector<double> real(comps);
  std::vector<fftw_complex> spec(comps);
  (void)points;
  (void)modes;
  fftw_plan p;
  if (forward_direction)
    p = fftw_plan_many_dft_r2c(kDim, dims, comps, real.data(), nullptr, comps, 1, spec.data(), nullptr, comps, 1,
                               FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
  else
    p = fftw_plan_many_dft_c2r(kDim, dims, comps, spec.data(), nullptr, comps, 1, real.data(), nullptr, comps, 1,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p == nullptr) throw DomainError("FFTW could not create a plan");
  plans.emplace(key, p);
  return p;
}

template <class F>
void for_each_index(std::size_t count, F&& body) {
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count, 256), [&](const tbb::blocked_range<std::size_t>& r) {
    for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
  });
}

template <class F>
double max_over(std::size_t count, F&& value) {
  return tbb::parallel_reduce(
      tbb::blocked_range<std::size_t>(0, count, 256), 0.0,
      [&](const tbb::blocked_range<std::size_t>& r, double acc) {
        for (std::size_t i = r.begin(); i != r.end(); ++i) acc = std::max(acc, value(i));
        return acc;
      },
      [](double a, double b) { return std::max(a, b); });
}

bool kernel_mode(const std::array<double, 7>& m) {
  return std::all_of(m.begin(), m.end(), [](double x) { return x == 0.0; });
}

}  // namespace

// Grid ---------------------------------------------------------------------

Grid::Grid(int n) : n_(n) {
  if (n < 2 || n > 16) throw DomainError("grid resolution must lie in [2, 16]");
  points_ = ipow(n, kDim);
  modes_ = ipow(n, kDim - 1) * (n / 2 + 1);
}

std::array<int, 7> Grid::point_index(std::size_t p) const {
  std::array<int, 7> idx{};
  for (int k = kDim - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(p % n_);
    p /= n_;
  }
  return idx;
}

std::array<double, 7> Grid::coordinates(std::size_t p) const {
  const auto idx = point_index(p);
  std::array<double, 7> x{};
  for (int k = 0; k < kDim; ++k) x[k] = static_cast<double>(idx[k]) / n_;
  return x;
}

std::array<int, 7> Grid::wave(std::size_t mode) const {
  std::array<int, 7> m{};
  const int last = n_ / 2 + 1;
  m[6] = static_cast<int>(mode % last);
  mode /= last;
  for (int k = kDim - 2; k >= 0; --k) {
    const int j = static_cast<int>(mode % n_);
    mode /= n_;
    m[k] = j <= n_ / 2 ? j : j - n_;
  }
  return m;
}

std::array<double, 7> Grid::effective_wave(std::size_t mode) const {
  const auto m = wave(mode);
  std::array<double, 7> e{};
  for (int k = 0; k < kDim; ++k) e[k] = (n_ % 2 == 0 && std::abs(m[k]) == n_ / 2) ? 0.0 : m[k];
  return e;
}

double Grid::hermitian_weight(std::size_t mode) const {
  const int j = static_cast<int>(mode % (n_ / 2 + 1));
  if (j == 0) return 1.0;
  if (n_ % 2 == 0 && j == n_ / 2) return 1.0;
  return 2.0;
}

// GridField ------------------------------------------------------------------

GridField::GridField(const Grid& grid, int degree)
    : grid_(grid), degree_(degree), comps_(component_count(degree)), values_(grid.points() * comps_, 0.0) {}

Form GridField::at(std::size_t p) const {
  Form f(kDim, degree_);
  std::copy(point(p), point(p) + comps_, f.coeffs().begin());
  return f;
}

void GridField::set(std::size_t p, const Form& f) {
  if (f.degree() != degree_ || f.dim() != kDim) throw DimensionError("GridField::set: form shape mismatch");
  std::copy(f.coeffs().begin(), f.coeffs().end(), point(p));
}

double GridField::linf() const {
  return max_over(grid_.points(), [&](std::size_t p) {
    double s = 0.0;
    for (int c = 0; c < comps_; ++c) s += point(p)[c] * point(p)[c];
    return std::sqrt(s);
  });
}

double GridField::mean_square() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s / static_cast<double>(grid_.points());
}

GridField& GridField::operator+=(const GridField& o) {
  if (o.degree_ != degree_ || !(o.grid_ == grid_)) throw DimensionError("GridField shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  if (o.degree_ != degree_ || !(o.grid_ == grid_)) throw DimensionError("GridField shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridField& GridField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

// SpectralField --------------------------------------------------------------

SpectralField::SpectralField(const Grid& grid, int degree)
    : grid_(grid), degree_(degree), comps_(component_count(degree)), coeffs_(grid.modes() * comps_) {}

double SpectralField::energy() const {
  double e = 0.0;
  for (std::size_t m = 0; m < grid_.modes(); ++m) {
    double s = 0.0;
    for (int c = 0; c < comps_; ++c) s += std::norm(mode(m)[c]);
    e += grid_.hermitian_weight(m) * s;
  }
  return e;
}

double SpectralField::zero_mode_norm() const {
  double s = 0.0;
  for (int c = 0; c < comps_; ++c) s += std::norm(mode(0)[c]);
  return std::sqrt(s);
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.degree_ != degree_ || !(o.grid_ == grid_)) throw DimensionError("SpectralField shape mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.degree_ != degree_ || !(o.grid_ == grid_)) throw DimensionError("SpectralField shape mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

// Transforms and operators ---------------------------------------------------

SpectralField forward(const GridField& f) {
  SpectralField out(f.grid(), f.degree());
  fftw_plan p = plan_for(f.grid().n(), f.components(), true);
  fftw_execute_dft_r2c(p, const_cast<double*>(f.values().data()),
                       reinterpret_cast<fftw_complex*>(out.coeffs().data()));
  out *= 1.0 / static_cast<double>(f.grid().points());
  return out;
}

GridField inverse(const SpectralField& f) {
  GridField out(f.grid(), f.degree());
  std::vector<cplx> scratch = f.coeffs();
  fftw_plan p = plan_for(f.grid().n(), f.components(), false);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(scratch.data()), out.values().data());
  return out;
}

SpectralField exterior_derivative(const SpectralField& f) {
  const auto& table = wedge_table(f.degree());
  SpectralField out(f.grid(), f.degree() + 1);
  const Grid& g = f.grid();
  for_each_index(g.modes(), [&](std::size_t m) {
    const auto k = g.effective_wave(m);
    const cplx* in = f.mode(m);
    cplx* o = out.mode(m);
    for (const auto& e : table) {
      if (k[e.axis] == 0.0) continue;
      o[e.dst] += cplx(0.0, kTwoPi * k[e.axis] * e.sign) * in[e.src];
    }
  });
  return out;
}

GridField hodge_star(const GridField& f) {
  const auto& table = star_table(f.degree());
  GridField out(f.grid(), kDim - f.degree());
  for_each_index(f.grid().points(), [&](std::size_t p) {
    const double* in = f.point(p);
    double* o = out.point(p);
    for (std::size_t s = 0; s < table.size(); ++s) o[table[s].dst] = table[s].sign * in[s];
  });
  return out;
}

SpectralField hodge_star(const SpectralField& f) {
  const auto& table = star_table(f.degree());
  SpectralField out(f.grid(), kDim - f.degree());
  for_each_index(f.grid().modes(), [&](std::size_t m) {
    const cplx* in = f.mode(m);
    cplx* o = out.mode(m);
    for (std::size_t s = 0; s < table.size(); ++s) o[table[s].dst] = table[s].sign * in[s];
  });
  return out;
}

SpectralField codifferential(const SpectralField& f) {
  if (f.degree() == 0) return SpectralField(f.grid(), 0);
  SpectralField out = hodge_star(exterior_derivative(hodge_star(f)));
  if (f.degree() % 2 == 1) out *= -1.0;
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  SpectralField out = f;
  const Grid& g = f.grid();
  for_each_index(g.modes(), [&](std::size_t m) {
    const auto k = g.effective_wave(m);
    double k2 = 0.0;
    for (double x : k) k2 += x * x;
    cplx* o = out.mode(m);
    for (int c = 0; c < f.components(); ++c) o[c] *= kTwoPi * kTwoPi * k2;
  });
  return out;
}

SpectralField inverse_laplacian(const SpectralField& f) {
  const Grid& g = f.grid();
  double kernel = 0.0;
  for (std::size_t m = 0; m < g.modes(); ++m) {
    if (!kernel_mode(g.effective_wave(m))) continue;
    for (int c = 0; c < f.components(); ++c) kernel += g.hermitian_weight(m) * std::norm(f.mode(m)[c]);
  }
  const double total = f.energy();
  if (kernel > 0.0 && std::sqrt(kernel) > 1e-10 * std::sqrt(total))
    throw DomainError("inverse Laplacian requested on the kernel (constant or Nyquist-only modes)");
  SpectralField out = f;
  for_each_index(g.modes(), [&](std::size_t m) {
    const auto k = g.effective_wave(m);
    double k2 = 0.0;
    for (double x : k) k2 += x * x;
    cplx* o = out.mode(m);
    for (int c = 0; c < f.components(); ++c) o[c] = k2 == 0.0 ? cplx(0.0) : o[c] / (kTwoPi * kTwoPi * k2);
  });
  return out;
}

void project_off_kernel(SpectralField& f) {
  const Grid& g = f.grid();
  for (std::size_t m = 0; m < g.modes(); ++m)
    if (kernel_mode(g.effective_wave(m)))
      for (int c = 0; c < f.components(); ++c) f.mode(m)[c] = 0.0;
}

GridField exterior_derivative(const GridField& f) { return inverse(exterior_derivative(forward(f))); }
GridField codifferential(const GridField& f) { return inverse(codifferential(forward(f))); }

double l2_inner(const GridField& a, const GridField& b) {
  if (a.degree() != b.degree() || !(a.grid() == b.grid())) throw DimensionError("l2_inner: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) s += a.values()[i] * b.values()[i];
  return s / static_cast<double>(a.grid().points());
}

// Solver ---------------------------------------------------------------------

std::string to_string(OperatorMode m) { return m == OperatorMode::FlatBackground ? "flat" : "cg"; }

OperatorMode operator_mode_from_string(const std::string& s) {
  if (s == "flat") return OperatorMode::FlatBackground;
  if (s == "cg") return OperatorMode::CurvedCg;
  throw DomainError("operator mode must be 'flat' or 'cg', got '" + s + "'");
}

void validate(const SolverConfig& cfg) {
  if (cfg.n != 4 && cfg.n != 6 && cfg.n != 8) throw DomainError("torus resolution n must be 4, 6 or 8");
  if (!(cfg.eps >= 0.0) || cfg.eps > 0.5) throw DomainError("torus eps must lie in [0, 0.5]");
  if (!(cfg.tol > 0.0)) throw DomainError("torus tol must be positive");
  if (cfg.max_iter < 1) throw DomainError("torus max_iter must be at least 1");
}

namespace {

Form positive_theta(const Form& phi) {
  try {
    return ext::theta(phi);
  } catch (const NotG2Error&) {
    throw DomainError("3-form left the G2 positivity domain");
  }
}

GridField theta_field(const GridField& phi) {
  GridField out(phi.grid(), 4);
  for_each_index(phi.grid().points(), [&](std::size_t p) { out.set(p, positive_theta(phi.at(p))); });
  return out;
}

GridField constant_field(const Grid& g, const Form& f) {
  GridField out(g, f.degree());
  for (std::size_t p = 0; p < g.points(); ++p) out.set(p, f);
  return out;
}

// phi~ - phi0 in coefficient space.
SpectralField deviation(const ModelProblem& problem, const SpectralField& eta) {
  SpectralField d = exterior_derivative(problem.sigma_hat);
  d *= problem.eps;
  d += exterior_derivative(eta);
  return d;
}

}  // namespace

Eigen::MatrixXd theta_linearisation_at_phi0() {
  const Form phi = ext::phi0();
  const Form psi = ext::psi0();
  const ext::Metric id = ext::Metric::identity(kDim);
  std::vector<Form> seven;
  for (int a = 0; a < kDim; ++a) {
    ext::Vector v = ext::Vector::Zero(kDim);
    v[a] = 1.0;
    seven.push_back(ext::interior_product(v, psi));
  }
  Eigen::MatrixXd out(35, 35);
  for (int j = 0; j < 35; ++j) {
    Form e(kDim, 3);
    e[j] = 1.0;
    const Form p1 = (ext::inner(id, e, phi) / 7.0) * phi;
    Form p7(kDim, 3);
    for (const auto& w : seven) p7 += (ext::inner(id, e, w) / 4.0) * w;
    const Form p27 = e - p1 - p7;
    const Form image = ext::hodge_star(id, (4.0 / 3.0) * p1 + p7 - p27);
    for (int i = 0; i < 35; ++i) out(i, j) = image[i];
  }
  return out;
}

ModelProblem make_model_problem(const SolverConfig& cfg) {
  validate(cfg);
  const Grid grid(cfg.n);
  const int band = cfg.n / 4;
  SpectralField sigma(grid, 2);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t m = 0; m < grid.modes(); ++m) {
    const auto w = grid.wave(m);
    const bool inside = std::all_of(w.begin(), w.end(), [&](int x) { return std::abs(x) <= band; });
    if (!inside || kernel_mode(grid.effective_wave(m))) continue;
    for (int c = 0; c < sigma.components(); ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      sigma.mode(m)[c] = cplx(re, im);
    }
  }
  // Round trip through the grid enforces the Hermitian symmetry of a real field.
  sigma = forward(inverse(sigma));
  const double scale = inverse(exterior_derivative(sigma)).linf();
  if (scale > 0.0) sigma *= 1.0 / scale;

  GridField dsigma = inverse(exterior_derivative(sigma));
  GridField phi = constant_field(grid, ext::phi0()) + cfg.eps * dsigma;
  GridField psi(grid, 3);
  const Form psi0 = ext::psi0();
  GridField theta(grid, 4);
  for_each_index(grid.points(), [&](std::size_t p) {
    const Form f = phi.at(p);
    const ext::G2Metric m = [&] {
      try {
        return ext::metric_from_g2(f);
      } catch (const NotG2Error&) {
        throw DomainError("phi0 + eps d sigma is not a G2-structure at some grid point; decrease eps");
      }
    }();
    const Form th = positive_theta(f);
    theta.set(p, th);
    psi.set(p, ext::hodge_star(m.g, th - psi0, m.orientation));
  });
  const double closedness = exterior_derivative(phi).linf();

  // d* in g(phi) on 3-forms is - * d *; compare d* psi with d* phi.
  GridField d_theta = exterior_derivative(theta);
  GridField star_psi(grid, 4);
  for_each_index(grid.points(), [&](std::size_t p) {
    const ext::G2Metric m = ext::metric_from_g2(phi.at(p));
    star_psi.set(p, ext::hodge_star(m.g, psi.at(p), m.orientation));
  });
  GridField d_star_psi = exterior_derivative(star_psi);
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < grid.points(); ++p) {
    const ext::G2Metric m = ext::metric_from_g2(phi.at(p));
    const Form a = ext::hodge_star(m.g, d_star_psi.at(p), m.orientation);
    const Form b = ext::hodge_star(m.g, d_theta.at(p), m.orientation);
    num = std::max(num, (a - b).norm());
    den = std::max(den, b.norm());
  }
  const double gap = den > 0.0 ? num / den : num;
  return ModelProblem{grid, cfg.eps, std::move(sigma), std::move(phi), std::move(psi), closedness, gap};
}

PicardStep picard_step(const ModelProblem& problem, const SpectralField& eta) {
  const Grid& grid = problem.grid;
  const GridField chi = inverse(exterior_derivative(eta));
  const auto& star3 = star_table(4);
  GridField rhs(grid, 3);
  for_each_index(grid.points(), [&](std::size_t p) {
    const Form phi = problem.phi.at(p);
    const Form x = chi.at(p);
    const Form psi = problem.psi.at(p);
    Form s = psi;
    if (x.norm() > 0.0) {
      try {
        const double f = (7.0 / 3.0) * ext::pi1_coefficient(phi, x);
        const Form F = ext::theta_split(phi, x).f_of_chi;
        s += f * psi;
        for (std::size_t i = 0; i < star3.size(); ++i) s[star3[i].dst] += star3[i].sign * F[i];
      } catch (const NotG2Error&) {
        throw DomainError("phi + d eta left the G2 positivity domain");
      }
    }
    rhs.set(p, s);
  });
  SpectralField sigma = codifferential(forward(rhs));
  const double total = std::sqrt(sigma.energy());
  const double zero = total > 0.0 ? sigma.zero_mode_norm() / total : 0.0;
  return {inverse_laplacian(sigma), zero};
}

SpectralField slice_newton_step(const ModelProblem& problem, const SpectralField& eta) {
  const Grid& grid = problem.grid;
  GridField phi_tilde = problem.phi + inverse(exterior_derivative(eta));
  const SpectralField r = exterior_derivative(forward(theta_field(phi_tilde)));
  phi_tilde = GridField(grid, 0);
  const SpectralField dev = deviation(problem, eta);

  static const Eigen::MatrixXd sa = theta_linearisation_at_phi0();
  // iota_{e_a} phi0 as columns of a 21 x 7 matrix.
  static const Eigen::MatrixXd iphi = [] {
    Eigen::MatrixXd m(21, 7);
    for (int a = 0; a < kDim; ++a) {
      ext::Vector v = ext::Vector::Zero(kDim);
      v[a] = 1.0;
      const Form f = ext::interior_product(v, ext::phi0());
      for (int i = 0; i < 21; ++i) m(i, a) = f[i];
    }
    return m;
  }();
  const auto& w2 = wedge_table(2);
  const auto& w4 = wedge_table(4);

  SpectralField step(grid, 2);
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, grid.modes(), 64), [&](const tbb::blocked_range<std::size_t>& range) {
    Eigen::MatrixXd m3(35, 21), m5(21, 35), system(28, 21), rhs(28, 2);
    for (std::size_t m = range.begin(); m != range.end(); ++m) {
      const auto k = grid.effective_wave(m);
      if (kernel_mode(k)) continue;
      m3.setZero();
      m5.setZero();
      for (const auto& e : w2) m3(e.dst, e.src) += e.sign * k[e.axis];
      for (const auto& e : w4) m5(e.dst, e.src) += e.sign * k[e.axis];
      system.topRows(21) = m5 * sa * m3;
      const Eigen::MatrixXd k3 = m3 * iphi;  // m ^ iota_a phi0
      system.bottomRows(7) = k3.transpose() * m3;
      const cplx* rm = r.mode(m);
      const cplx* dm = dev.mode(m);
      for (int i = 0; i < 21; ++i) {
        const cplx v = rm[i] / (kTwoPi * kTwoPi);
        rhs(i, 0) = v.real();
        rhs(i, 1) = v.imag();
      }
      for (int a = 0; a < 7; ++a) {
        cplx s = 0.0;
        for (int i = 0; i < 35; ++i) s += k3(i, a) * dm[i];
        const cplx v = cplx(0.0, 1.0) * s / kTwoPi;
        rhs(21 + a, 0) = v.real();
        rhs(21 + a, 1) = v.imag();
      }
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(system);
      cod.setThreshold(1e-10);
      const Eigen::MatrixXd x = cod.solve(rhs);
      cplx* o = step.mode(m);
      for (int i = 0; i < 21; ++i) o[i] = cplx(x(i, 0), x(i, 1));
    }
  });
  SpectralField next = eta;
  next += step;
  return next;
}

double residual(const GridField& phi_tilde) {
  const double closed = exterior_derivative(phi_tilde).linf();
  const double coclosed = exterior_derivative(theta_field(phi_tilde)).linf();
  return std::max(closed, coclosed);
}

Solution solve(const SolverConfig& cfg) {
  const ModelProblem problem = make_model_problem(cfg);
  const Grid& grid = problem.grid;
  SolveReport rep;
  rep.compatibility_gap = problem.compatibility_gap;
  SpectralField eta(grid, 2);
  auto finish = [&](Solution& s) {
    const SpectralField dev = deviation(problem, s.eta);
    const GridField dev_grid = inverse(dev);
    s.report.distance_to_flat = dev_grid.linf();
    s.report.zero_mode_error = dev.zero_mode_norm();
    const GridField phi_tilde = problem.phi + inverse(exterior_derivative(s.eta));
    const GridField flat_offset = phi_tilde - constant_field(grid, ext::phi0());
    s.report.grid_mean_error = forward(flat_offset).zero_mode_norm();
    s.report.residual = residual(phi_tilde);
  };
  if (cfg.eps == 0.0) {
    Solution s{eta, rep};
    s.report.converged = true;
    s.report.final_mode = to_string(cfg.mode);
    finish(s);
    return s;
  }

  OperatorMode mode = cfg.mode;
  double previous_step = 0.0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    SpectralField next(grid, 2);
    if (mode == OperatorMode::FlatBackground) {
      PicardStep ps = picard_step(problem, eta);
      rep.max_sigma_zero_mode = std::max(rep.max_sigma_zero_mode, ps.sigma_zero_mode);
      next = std::move(ps.eta);
    } else {
      next = slice_newton_step(problem, eta);
    }
    SpectralField diff = next;
    diff -= eta;
    const double step = inverse(diff).linf();
    eta = std::move(next);
    if (previous_step > 0.0) rep.contraction_factors.push_back(step / previous_step);
    previous_step = step;
    rep.iterations = it;

    IterationRecord rec{it, to_string(mode), step, -1.0};
    const bool diverging = mode == OperatorMode::FlatBackground && rep.contraction_factors.size() >= 3 &&
                           std::all_of(rep.contraction_factors.end() - 3, rep.contraction_factors.end(),
                                       [](double q) { return q >= 1.0; });
    if (step <= cfg.tol || mode == OperatorMode::CurvedCg || diverging) {
      const GridField phi_tilde = problem.phi + inverse(exterior_derivative(eta));
      rec.residual = residual(phi_tilde);
    }
    rep.history.push_back(rec);

    if (mode == OperatorMode::FlatBackground && (step <= cfg.tol || diverging)) {
      rep.flat_iterations = it;
      rep.flat_residual = rec.residual;
      rep.flat_distance = inverse(deviation(problem, eta)).linf();
      if (rec.residual <= cfg.tol && !diverging) {
        rep.converged = true;
        break;
      }
      if (!cfg.fallback) {
        rep.failure = diverging ? "flat-background iteration diverged"
                                : "flat-background iteration stalled above tol";
        break;
      }
      rep.fell_back = true;
      mode = OperatorMode::CurvedCg;
      previous_step = 0.0;
      continue;
    }
    if (mode == OperatorMode::CurvedCg && step <= cfg.tol && rec.residual <= cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged && rep.failure.empty())
    rep.failure = "max_iter = " + std::to_string(cfg.max_iter) + " exceeded";
  rep.final_mode = to_string(mode);
  Solution s{std::move(eta), std::move(rep)};
  finish(s);
  return s;
}

// Binary dump -----------------------------------------------------------------

namespace {

template <class T>
void put(std::ostream& os, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(bytes, sizeof(T));
}

template <class T>
T get(std::istream& is) {
  char bytes[sizeof(T)];
  if (!is.read(bytes, sizeof(T))) throw DomainError("truncated field dump");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

void write_field(std::ostream& os, const GridField& f) {
  put<std::int32_t>(os, f.grid().n());
  put<std::int32_t>(os, f.degree());
  for (double v : f.values()) put<double>(os, v);
}

GridField read_field(std::istream& is) {
  const int n = get<std::int32_t>(is);
  const int degree = get<std::int32_t>(is);
  if (degree < 0 || degree > kDim) throw DomainError("field dump has an invalid degree");
  GridField f(Grid(n), degree);
  for (double& v : f.values()) v = get<double>(is);
  return f;
}

}  // namespace g2glue::torus
