#include <doctest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "wiener/error.hpp"
#include "wiener/stepper.hpp"

using namespace wiener;

namespace {

double factorial(unsigned n) {
  double f = 1.0;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

// int_0^1 exp((1 - s) z) s^{k-1} / (k-1)! ds by composite Simpson.
Complex phi_quadrature(unsigned k, Complex z) {
  const int n = 20000;
  const double h = 1.0 / n;
  Complex s{};
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp((1.0 - x) * z) * std::pow(x, static_cast<double>(k - 1)) / factorial(k - 1);
  }
  return s * h / 3.0;
}

// Coefficient of xi_{n eps_1} for u' = u + delta(u): e^t t^n / sqrt(n!).
double wick_coefficient(unsigned n, double t) { return std::exp(t) * std::pow(t, n) / std::sqrt(factorial(n)); }

double wick_level_error(unsigned n, std::size_t nt) {
  const auto s = CoefficientSpace::scalar();
  auto a = OperatorFamily::multiplier(s, {0.0, 0.0, 1.0});
  const double horizon = 1.0;
  ExponentialStepper stepper(a, horizon, nt);
  Matrix forcing(1, static_cast<Eigen::Index>(nt + 1));
  for (std::size_t j = 0; j <= nt; ++j) {
    const double t = horizon * static_cast<double>(j) / static_cast<double>(nt);
    forcing(0, static_cast<Eigen::Index>(j)) = std::sqrt(static_cast<double>(n)) * wick_coefficient(n - 1, t);
  }
  Vector u0 = Vector::Zero(1);
  const Matrix u = stepper.integrate(u0, forcing);
  double err = 0.0;
  for (std::size_t j = 0; j <= nt; ++j) {
    const double t = horizon * static_cast<double>(j) / static_cast<double>(nt);
    err = std::max(err, std::abs(u(0, static_cast<Eigen::Index>(j)) - wick_coefficient(n, t)));
  }
  return err;
}

}  // namespace

TEST_CASE("phi functions") {
  for (unsigned k = 1; k <= 4; ++k) {
    for (Complex z : {Complex(0.0), Complex(1e-9), Complex(0.5), Complex(-0.99, 0.1), Complex(-3.0), Complex(2.0, 5.0),
                      Complex(10.0), Complex(-40.0)}) {
      const Complex expected = phi_quadrature(k, z);
      INFO("k=" << k << " z=" << z.real() << "+" << z.imag() << "i");
      CHECK(std::abs(phi_function(k, z) - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
    }
  }
  CHECK(std::abs(phi_function(0, Complex(0.3)) - std::exp(0.3)) < 1e-15);
  CHECK(phi_function(1, 0.0).real() == doctest::Approx(1.0));
  CHECK(phi_function(3, 0.0).real() == doctest::Approx(1.0 / 6.0));
  // Large negative argument: phi_1(z) ~ -1/z.
  CHECK(phi_function(1, Complex(-1e6)).real() == doctest::Approx(1e-6).epsilon(1e-5));
}

TEST_CASE("unforced problems use the exact semigroup") {
  const auto space = CoefficientSpace::fourier_modes(16, 6.0);
  auto a = OperatorFamily::multiplier(space, {1.0, 0.3, -0.2});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  Vector u0(16);
  for (auto& c : u0) c = Complex(d(rng), d(rng));
  ExponentialStepper stepper(a, 2.0, 10);
  const Matrix u = stepper.integrate(u0, Matrix{});
  REQUIRE(u.cols() == 11);
  for (Eigen::Index j = 0; j <= 10; ++j) {
    CHECK((u.col(j) - semigroup_apply(a, 0.2 * static_cast<double>(j), 0.0, u0)).norm() < 1e-13 * u0.norm());
  }
}

TEST_CASE("cubic forcing is integrated exactly") {
  // u = q(t) cubic solves u' = a u + (q' - a q).
  const double c0 = 0.7, c1 = -1.3, c2 = 0.4, c3 = 2.1;
  auto q = [&](double t) { return c0 + t * (c1 + t * (c2 + t * c3)); };
  auto dq = [&](double t) { return c1 + t * (2 * c2 + 3 * t * c3); };
  for (double a0 : {0.0, 1.0, -50.0, -1e4}) {
    const auto s = CoefficientSpace::scalar();
    auto a = OperatorFamily::multiplier(s, {0.0, 0.0, a0});
    for (std::size_t nt : {3u, 7u, 20u}) {
      const double horizon = 1.5;
      ExponentialStepper stepper(a, horizon, nt);
      CHECK(stepper.order() == 4);
      Matrix f(1, static_cast<Eigen::Index>(nt + 1));
      for (std::size_t j = 0; j <= nt; ++j) {
        const double t = horizon * static_cast<double>(j) / static_cast<double>(nt);
        f(0, static_cast<Eigen::Index>(j)) = dq(t) - a0 * q(t);
      }
      Vector u0(1);
      u0[0] = q(0.0);
      const Matrix u = stepper.integrate(u0, f);
      for (std::size_t j = 0; j <= nt; ++j) {
        const double t = horizon * static_cast<double>(j) / static_cast<double>(nt);
        INFO("a0=" << a0 << " nt=" << nt << " j=" << j);
        CHECK(std::abs(u(0, static_cast<Eigen::Index>(j)) - q(t)) < 1e-10 * std::max(1.0, std::abs(a0)));
      }
    }
  }
}

TEST_CASE("few steps reduce the interpolation degree") {
  const auto s = CoefficientSpace::scalar();
  auto a = OperatorFamily::multiplier(s, {0.0, 0.0, -1.0});
  CHECK(ExponentialStepper(a, 1.0, 1).order() == 2);
  CHECK(ExponentialStepper(a, 1.0, 2).order() == 3);
  // Linear forcing is exact with a single step.
  ExponentialStepper one(a, 1.0, 1);
  Matrix f(1, 2);
  f(0, 0) = 1.0;  // q(t) = t: q' + q = 1 + t
  f(0, 1) = 2.0;
  const Matrix u = one.integrate(Vector::Zero(1), f);
  CHECK(u(0, 1).real() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("Wick ODE coefficients converge with the expected order") {
  for (unsigned n : {1u, 2u, 3u}) {
    const double e8 = wick_level_error(n, 8);
    const double e16 = wick_level_error(n, 16);
    const double e32 = wick_level_error(n, 32);
    INFO("n=" << n << " errors " << e8 << " " << e16 << " " << e32);
    CHECK(e8 / e16 >= 3.5);
    CHECK(e16 / e32 >= 3.5);
    CHECK(e16 / e32 > 12.0);
  }
}

TEST_CASE("stiff heat modes stay bounded and accurate") {
  const std::size_t nx = 64;
  const double length = 2.0;
  const auto space = CoefficientSpace::fourier_modes(nx, length);
  auto a = OperatorFamily::multiplier(space, {1.0, 0.0, 0.0});
  const double horizon = 0.5;
  const std::size_t nt = 16;
  ExponentialStepper stepper(a, horizon, nt);
  // Forcing g(t) = cos(t) per mode; exact solution by the variation of constants formula.
  Matrix f(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nt + 1));
  for (std::size_t j = 0; j <= nt; ++j) f.col(static_cast<Eigen::Index>(j)).setConstant(std::cos(horizon * j / nt));
  const Matrix u = stepper.integrate(Vector::Zero(static_cast<Eigen::Index>(nx)), f);
  for (std::size_t i = 0; i < nx; ++i) {
    const double y = space.wavenumbers()[i];
    const double lam = -y * y;
    const double t = horizon;
    // int_0^t e^{lam (t - s)} cos s ds
    const double exact = (std::sin(t) - lam * std::cos(t) + lam * std::exp(lam * t)) / (1.0 + lam * lam);
    CHECK(std::abs(u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nt)).real() - exact) < 1e-7);
    CHECK(std::isfinite(u.col(static_cast<Eigen::Index>(nt)).norm()));
  }
}

TEST_CASE("matrix families are second order") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d;
  Matrix m(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) m(i, j) = 0.5 * d(rng);
  }
  Vector u0(4);
  for (auto& c : u0) c = d(rng);
  const Vector g = Vector::Constant(4, 1.0);
  const double horizon = 1.0;
  // u(T) = e^{MT} u0 + M^{-1}(e^{MT} - I) g
  const Matrix e = m.exp();
  const Vector exact = e * u0 + m.partialPivLu().solve((e - Matrix::Identity(4, 4)) * g);

  auto error = [&](std::size_t nt) {
    auto a = OperatorFamily::matrix(m, 1.0);
    ExponentialStepper stepper(a, horizon, nt);
    CHECK(stepper.order() == 2);
    Matrix f(4, static_cast<Eigen::Index>(nt + 1));
    for (Eigen::Index j = 0; j <= static_cast<Eigen::Index>(nt); ++j) f.col(j) = g;
    return (stepper.integrate(u0, f).col(static_cast<Eigen::Index>(nt)) - exact).norm();
  };
  const double e1 = error(16), e2 = error(32), e3 = error(64);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("piecewise constant families with grid-aligned breakpoints") {
  const auto s = CoefficientSpace::scalar();
  auto a = OperatorFamily::piecewise(s, {0.5}, {{0.0, 0.0, 2.0}, {0.0, 0.0, -1.0}});
  ExponentialStepper stepper(a, 1.0, 8);
  Vector u0(1);
  u0[0] = 1.0;
  const Matrix u = stepper.integrate(u0, Matrix{});
  CHECK(u(0, 4).real() == doctest::Approx(std::exp(1.0)));
  CHECK(u(0, 8).real() == doctest::Approx(std::exp(0.5)));
}

TEST_CASE("stepper argument checks") {
  const auto s = CoefficientSpace::scalar();
  auto a = OperatorFamily::multiplier(s, {0.0, 0.0, 1.0});
  CHECK_THROWS_AS(ExponentialStepper(a, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(ExponentialStepper(a, 0.0, 4), ValidationError);
  ExponentialStepper stepper(a, 1.0, 4);
  CHECK(stepper.dt() == 0.25);
  CHECK_THROWS_AS(stepper.integrate(Vector::Zero(2), Matrix{}), ValidationError);
  CHECK_THROWS_AS(stepper.integrate(Vector::Zero(1), Matrix::Zero(1, 3)), ValidationError);
}
