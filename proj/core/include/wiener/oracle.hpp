#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "wiener/operators.hpp"

namespace wiener {

/// Independent checks of propagator results: Monte Carlo for Ito equations,
/// closed-form Fourier moments, and the deterministic equation for u_h.

struct McOptions {
  std::size_t paths = 10000;
  /// Euler-Maruyama steps over [0, T]; must be a multiple of the problem's nt.
  /// 0 selects the smallest multiple of nt that is at least 4096.
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t block = 256;
};

/// Sample means with standard errors at every grid time of the problem.
///
/// `mean` is E[Re (u(t), u0)_H] / ||u0||_H and `m2` is E ||u(t)||_H^2.
struct McResult {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> mean_se;
  std::vector<double> m2;
  std::vector<double> m2_se;
};

/// Euler-Maruyama for du = A u dt + sum_k B_k u dW with a single Brownian
/// motion W driving every mode of time-white noise, so the result carries no
/// chaos truncation. Requires diagonal A, a shared diagonal B and a
/// deterministic initial value without forcing.
McResult mc_ito(const EvolutionProblem& problem, const McOptions& options);

/// E |u_hat(y, t)|^2 = |u0_hat|^2 exp((sigma^2 y^{2m} - 2 y^2) t) for
/// du = u_xx dt + sigma d^m u dW(t).
double closed_form_moment(unsigned m, double sigma, double y, double t, Complex u0_hat);

/// Per-mode second moment of the Ito equation dc = a c dt + b c dW:
/// |c0|^2 exp(2 Re(a) t) sum_{n <= N} (|b|^2 t)^n / n!, the full series when N is absent.
double ito_mode_moment(Complex a, Complex b, double t, Complex u0_hat, std::optional<unsigned> max_order = std::nullopt);

/// Per-mode second moment of the Wick equation c' = a c + b c <> xi with a single Gaussian xi:
/// |c0|^2 exp(2 Re(a) t) sum_{n <= N} (|b| t)^{2n} / n!.
double wick_mode_moment(Complex a, Complex b, double t, Complex u0_hat,
                        std::optional<unsigned> max_order = std::nullopt);

enum class Integrability { integrable, boundary, non_integrable };

/// Whether the closed-form second moments stay summable over all wavenumbers.
Integrability classify_ito_moment(unsigned m, double sigma, double rel_tol = 1e-12);

/// E |u_hat(y, t)|^2 = |u0_hat|^2 exp(-2 y^2 t + sigma^2 y^2 t^2) for
/// u_t = u_xx + sigma u_x <> xi with a single standard Gaussian xi.
double wick_space_noise_norm(double t, double y, Complex u0_hat, double sigma = 1.0);

/// Integrable for sigma^2 t < 2, boundary at equality.
Integrability classify_wick_space(double t, double sigma = 1.0, double rel_tol = 1e-12);

/// Deterministic solution of u' = A u + f_h + sum_k h_k M_k u, u(0) = u0_h,
/// where data_h = sum_alpha data_alpha h^alpha / sqrt(alpha!), by an
/// integrating-factor Runge-Kutta method of order four. Columns are grid times.
Matrix solve_deterministic_h(const EvolutionProblem& problem, const DirectionH& h);

}  // namespace wiener
