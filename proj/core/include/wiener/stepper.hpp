#pragma once

#include <cstddef>
#include <vector>

#include "wiener/operators.hpp"

namespace wiener {

/// phi_k(z) = int_0^1 exp((1 - s) z) s^{k-1} / (k-1)! ds, with phi_0 = exp.
Complex phi_function(unsigned k, Complex z);

/// Time integrator for u' = A(t) u + g(t) on a uniform grid, g known at grid times.
///
/// Diagonal families use exponential quadrature: the semigroup is exact and the
/// forcing is replaced by its cubic interpolant through four neighbouring grid
/// values, giving fourth-order accuracy. Dense matrix families use the
/// exponential trapezoid rule with a Crank-Nicolson semigroup (second order).
class ExponentialStepper {
 public:
  ExponentialStepper(const OperatorFamily& a, double horizon, std::size_t steps);

  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] unsigned order() const noexcept;

  /// Trajectory with one column per grid time. An empty `forcing` means g = 0.
  [[nodiscard]] Matrix integrate(const Vector& u0, const Matrix& forcing) const;
  /// Same, writing into `out` (resized as needed).
  void integrate_into(const Vector& u0, const Matrix& forcing, Matrix& out) const;

 private:
  struct Rule {
    std::size_t propagator;        // index into propagators_
    std::size_t weights;           // index into weights_
    std::ptrdiff_t first_node;     // first grid index of the interpolation stencil, relative to j
  };

  bool diagonal_;
  std::size_t steps_;
  double dt_;
  std::size_t dim_;
  std::vector<Rule> rules_;                 // one per interval
  std::vector<Vector> propagators_;         // diagonal exp(int a)
  std::vector<std::vector<Vector>> weights_;  // per stencil node
  Matrix dense_step_;                       // matrix families
};

}  // namespace wiener
