#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "wiener/operators.hpp"

namespace fixtures {

using namespace wiener;

inline double fact(unsigned n) {
  double f = 1.0;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

// u' = u + u <> xi with u(0) = u0.
inline std::shared_ptr<EvolutionProblem> wick_ode(unsigned order, std::size_t nt, double horizon, double u0 = 1.0) {
  const auto s = CoefficientSpace::scalar();
  std::vector<Complex> v{u0};
  return std::make_shared<EvolutionProblem>(EvolutionProblem{
      s, OperatorFamily::multiplier(s, {0.0, 0.0, 1.0}),
      NoiseOperatorFamily::derivative(NoiseModel::single_variable(), s, 1.0, 0),
      ChaosSeries::deterministic(s, {order, 1}, v), {}, horizon, nt, {order, 1}});
}

// du = a0 u dt + sigma u dW, expanded in K time modes.
inline std::shared_ptr<EvolutionProblem> scalar_ito(double a0, double sigma, unsigned order, unsigned modes,
                                                    std::size_t nt, double horizon) {
  const auto s = CoefficientSpace::scalar();
  std::vector<Complex> v{1.0};
  return std::make_shared<EvolutionProblem>(EvolutionProblem{
      s, OperatorFamily::multiplier(s, {0.0, 0.0, a0}),
      NoiseOperatorFamily::derivative(NoiseModel::time_white(horizon, modes), s, sigma, 0),
      ChaosSeries::deterministic(s, {order, modes}, v), {}, horizon, nt, {order, modes}});
}

inline std::vector<Complex> bump_coefficients(std::size_t nx, double length, double width) {
  const auto space = CoefficientSpace::fourier_modes(nx, length);
  const auto x = space.grid();
  std::vector<Complex> g(nx);
  for (std::size_t l = 0; l < nx; ++l) {
    const double s = (x[l] - 0.5 * length) / width;
    g[l] = std::exp(-s * s);
  }
  const Vector c = grid_to_fourier(g);
  return {c.data(), c.data() + c.size()};
}

// u_t = u_xx + sigma d^m u dW (time-white) on a periodic grid.
inline std::shared_ptr<EvolutionProblem> heat(double sigma, unsigned m, unsigned order, unsigned modes, std::size_t nt,
                                              double horizon = 1.0, std::size_t nx = 32,
                                              double length = 4.0 * std::numbers::pi) {
  const auto space = CoefficientSpace::fourier_modes(nx, length);
  const auto u0 = bump_coefficients(nx, length, 2.0);
  return std::make_shared<EvolutionProblem>(EvolutionProblem{
      space, OperatorFamily::multiplier(space, {1.0, 0.0, 0.0}),
      NoiseOperatorFamily::derivative(NoiseModel::time_white(horizon, modes), space, sigma, m),
      ChaosSeries::deterministic(space, {order, modes}, u0), {}, horizon, nt, {order, modes}});
}

// u_t = u_xx + sigma u_x <> xi with one standard Gaussian xi.
inline std::shared_ptr<EvolutionProblem> heat_gaussian(double sigma, unsigned order, std::size_t nt, double horizon,
                                                       std::size_t nx = 32, double length = 4.0 * std::numbers::pi) {
  const auto space = CoefficientSpace::fourier_modes(nx, length);
  const auto u0 = bump_coefficients(nx, length, 2.0);
  return std::make_shared<EvolutionProblem>(EvolutionProblem{
      space, OperatorFamily::multiplier(space, {1.0, 0.0, 0.0}),
      NoiseOperatorFamily::derivative(NoiseModel::single_variable(), space, sigma, 1),
      ChaosSeries::deterministic(space, {order, 1}, u0), {}, horizon, nt, {order, 1}});
}

}  // namespace fixtures
