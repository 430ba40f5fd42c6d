#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "wiener/chaos.hpp"

namespace wiener {

using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Fourier symbol a(y) = -a2 y^2 + i a1 y + a0.
struct Symbol {
  double a2 = 0.0;
  double a1 = 0.0;
  double a0 = 0.0;

  [[nodiscard]] Complex at(double y) const { return {-a2 * y * y + a0, a1 * y}; }
};

/// The deterministic operator family A(t) on a coefficient space.
///
/// Either diagonal (a Fourier multiplier, or a scalar coefficient on the
/// scalar space) and piecewise constant in time, or a constant dense matrix.
class OperatorFamily {
 public:
  /// Time-independent multiplier over the space's wavenumbers.
  static OperatorFamily multiplier(const CoefficientSpace& space, Symbol symbol);
  /// Symbol `symbols[i]` applies on [breakpoints[i-1], breakpoints[i]).
  static OperatorFamily piecewise(const CoefficientSpace& space, std::vector<double> breakpoints,
                                  std::vector<Symbol> symbols);
  /// Constant matrix; the semigroup uses Crank-Nicolson with steps no longer than `max_substep`.
  static OperatorFamily matrix(Matrix a, double max_substep);

  [[nodiscard]] bool is_diagonal() const noexcept { return dense_.size() == 0; }
  [[nodiscard]] std::size_t dim() const noexcept;
  [[nodiscard]] std::span<const double> wavenumbers() const noexcept { return wavenumbers_; }
  [[nodiscard]] std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  [[nodiscard]] std::span<const Symbol> symbols() const noexcept { return symbols_; }
  [[nodiscard]] const Matrix& dense() const noexcept { return dense_; }
  [[nodiscard]] double max_substep() const noexcept { return max_substep_; }

  [[nodiscard]] std::size_t segment(double t) const;
  /// Diagonal of A(t).
  [[nodiscard]] Vector diagonal(double t) const;
  /// int_s^t a(r) dr per mode (diagonal families).
  [[nodiscard]] Vector exponent(double s, double t) const;
  [[nodiscard]] Vector apply(double t, const Vector& v) const;

 private:
  std::vector<double> wavenumbers_;
  std::vector<double> breakpoints_;
  std::vector<Symbol> symbols_;
  Matrix dense_;
  double max_substep_ = 0.0;
};

/// Phi_{t,s} v for t >= s.
Vector semigroup_apply(const OperatorFamily& a, double t, double s, const Vector& v);
/// (Phi_{t,s})^* v in the Euclidean coefficient inner product.
Vector semigroup_apply_adjoint(const OperatorFamily& a, double t, double s, const Vector& v);

/// Smallest C with Re a(y) + gamma (1 + y^2) <= C on the grid, or nullopt
/// when the left side grows like y^2 (no bound survives grid refinement).
std::optional<double> coercivity_check(const OperatorFamily& a, double gamma);

enum class NoiseKind { time_white, space_white, space_time, single_variable };

/// Orthonormal basis of the noise space U and the flattening of double indices.
///
/// Time modes on L2((0,T)): m_1 = 1/sqrt(T), m_k = sqrt(2/T) cos((k-1) pi t / T).
/// Space modes on L2((0,L)): h_1 = 1/sqrt(L), h_{2j} = sqrt(2/L) cos(2 pi j x / L),
/// h_{2j+1} = sqrt(2/L) sin(2 pi j x / L). Space-time index (i, j) flattens to
/// (i - 1) * space_modes + j.
class NoiseModel {
 public:
  static NoiseModel time_white(double horizon, unsigned modes);
  static NoiseModel space_white(const CoefficientSpace& grid, unsigned modes);
  static NoiseModel space_time(double horizon, const CoefficientSpace& grid, unsigned time_modes,
                               unsigned space_modes);
  static NoiseModel single_variable();

  [[nodiscard]] NoiseKind kind() const noexcept { return kind_; }
  [[nodiscard]] unsigned mode_count() const noexcept { return time_modes_ * space_modes_; }
  [[nodiscard]] unsigned time_mode_count() const noexcept { return time_modes_; }
  [[nodiscard]] unsigned space_mode_count() const noexcept { return space_modes_; }
  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] bool has_time_modes() const noexcept {
    return kind_ == NoiseKind::time_white || kind_ == NoiseKind::space_time;
  }
  [[nodiscard]] bool has_space_modes() const noexcept {
    return kind_ == NoiseKind::space_white || kind_ == NoiseKind::space_time;
  }

  /// (time index, space index) of flattened mode k, both 1-based.
  [[nodiscard]] std::pair<unsigned, unsigned> split(unsigned k) const;
  /// Scalar time profile c_k(t): m_i(t) for time-dependent noise, 1 otherwise.
  [[nodiscard]] double time_profile(unsigned k, double t) const;
  /// Space mode h_j sampled on the grid.
  [[nodiscard]] std::vector<double> space_mode_on_grid(unsigned j) const;

 private:
  NoiseKind kind_ = NoiseKind::single_variable;
  double horizon_ = 0.0;
  double length_ = 0.0;
  std::size_t nx_ = 0;
  unsigned time_modes_ = 1;
  unsigned space_modes_ = 1;
};

/// m_k(t) on [0, T]; throws when t lies outside.
double time_mode(unsigned k, double t, double horizon);
/// int_0^t m_k(s) ds.
double time_mode_integral(unsigned k, double t, double horizon);
double space_mode(unsigned j, double x, double length);
/// Time mode m_k(t) of a noise model (1 for models without a time component).
double time_modes(const NoiseModel& noise, unsigned k, double t);

/// Normalized Fourier coefficients c_j = (1/n) sum_l u(x_l) exp(-i y_j x_l) of grid values.
Vector grid_to_fourier(std::span<const Complex> values);
/// Grid values u(x_l) = sum_j c_j exp(i y_j x_l).
std::vector<Complex> fourier_to_grid(const Vector& coeffs);

/// Spatial part B_k of a noise operator.
class SpatialAction {
 public:
  /// sigma (i y)^m, diagonal in Fourier; the Nyquist mode is dropped for odd m.
  static std::shared_ptr<const SpatialAction> derivative(const CoefficientSpace& space, double sigma, unsigned m);
  /// v -> sigma * h(x) * d^m v / dx^m, with h given on the grid.
  static std::shared_ptr<const SpatialAction> multiplication(const CoefficientSpace& space, std::vector<double> h,
                                                             double sigma, unsigned m);

  [[nodiscard]] bool is_diagonal() const noexcept { return weight_.empty(); }
  [[nodiscard]] const Vector& diagonal() const noexcept { return symbol_; }
  [[nodiscard]] Vector apply(const Vector& v) const;
  [[nodiscard]] Vector apply_adjoint(const Vector& v) const;

 private:
  Vector symbol_;               // derivative part (i y)^m, scaled by sigma
  std::vector<double> weight_;  // multiplication function on the grid, empty when diagonal
};

/// M_k(t) = c_k(t) B_k for k = 1..K.
class NoiseOperatorFamily {
 public:
  NoiseOperatorFamily(NoiseModel noise, std::vector<std::shared_ptr<const SpatialAction>> actions);

  /// sigma d^m applied through every mode of the noise model: multiplier for
  /// time-white and single-variable noise, multiplication by h_j for noise
  /// with a space component.
  static NoiseOperatorFamily derivative(NoiseModel noise, const CoefficientSpace& space, double sigma, unsigned m);
  static NoiseOperatorFamily zero(NoiseModel noise);

  [[nodiscard]] const NoiseModel& noise() const noexcept { return noise_; }
  [[nodiscard]] unsigned modes() const noexcept { return static_cast<unsigned>(actions_.size()); }
  /// B_k, or nullptr for a zero mode.
  [[nodiscard]] const SpatialAction* action(unsigned k) const { return action_ptr(k).get(); }
  [[nodiscard]] const std::shared_ptr<const SpatialAction>& action_ptr(unsigned k) const;
  [[nodiscard]] double profile(unsigned k, double t) const { return noise_.time_profile(k, t); }
  [[nodiscard]] bool is_zero() const;
  /// The shared diagonal symbol when every B_k is the same diagonal action.
  [[nodiscard]] std::optional<Vector> common_diagonal() const;

  [[nodiscard]] Vector apply(unsigned k, double t, const Vector& v) const;
  [[nodiscard]] Vector apply_adjoint(unsigned k, double t, const Vector& v) const;

 private:
  NoiseModel noise_;
  std::vector<std::shared_ptr<const SpatialAction>> actions_;
};

/// c_k(t) B_k v.
Vector apply_Mk(const NoiseOperatorFamily& m, unsigned k, double t, const Vector& v);

/// Discretized linear stochastic evolution problem
/// u = u0 + int (A u + f + delta(M u)) on a uniform time grid.
struct EvolutionProblem {
  CoefficientSpace space;
  OperatorFamily a;
  NoiseOperatorFamily m;
  ChaosSeries u0;
  std::vector<ChaosSeries> forcing;  ///< empty (f = 0) or one series per grid time
  double horizon = 1.0;
  std::size_t steps = 1;
  TruncationBox box;

  void validate() const;
  [[nodiscard]] double dt() const { return horizon / static_cast<double>(steps); }
  [[nodiscard]] double time(std::size_t j) const { return horizon * static_cast<double>(j) / static_cast<double>(steps); }
  [[nodiscard]] bool deterministic_data() const;
};

struct CkEstimate {
  double value = 0.0;
  unsigned iterations = 0;
  bool converged = false;
};

/// Power-iteration estimate of the norm of v -> int_0^t Phi_{t,s} M_k(s) v(s) ds
/// on L2((0,T); V), discretized by the trapezoid rule on the problem's grid.
CkEstimate estimate_Ck(const EvolutionProblem& problem, unsigned k, std::uint64_t seed = 0,
                       unsigned max_iterations = 20, double tolerance = 1e-6);

/// The discrete Volterra operator used by estimate_Ck and its adjoint in the
/// weighted L2((0,T); V) inner product. Columns are grid times.
Matrix volterra_apply(const EvolutionProblem& problem, unsigned k, const Matrix& v);
Matrix volterra_apply_adjoint(const EvolutionProblem& problem, unsigned k, const Matrix& w);

/// sum_j tau_j ||v(t_j)||_V^2 with trapezoid weights tau_j.
double time_v_norm_sq(const EvolutionProblem& problem, const Matrix& v);

}  // namespace wiener
