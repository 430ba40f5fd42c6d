#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "wiener/chaos.hpp"
#include "wiener/oracle.hpp"
#include "wiener/propagator.hpp"

using namespace wiener;
using namespace fixtures;

// Randomized checks that tie several modules together. Every generator is
// seeded, so failures reproduce.

namespace {

ChaosSeries random_scalar(TruncationBox box, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  ChaosSeries f(CoefficientSpace::scalar(), box);
  for (auto& c : f.data()) c = Complex(d(rng), d(rng));
  return f;
}

double max_difference(const ChaosSeries& a, const ChaosSeries& b) {
  double m = 0.0;
  for (const auto& alpha : a.index().indices()) m = std::max(m, std::abs(a.value(alpha) - b.value(alpha)));
  for (const auto& alpha : b.index().indices()) m = std::max(m, std::abs(a.value(alpha) - b.value(alpha)));
  return m;
}

}  // namespace

TEST_CASE("multi-index encodings round-trip") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<unsigned> entry(0, 3);
  std::uniform_int_distribution<unsigned> length(0, 8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<unsigned> dense(length(rng));
    for (auto& v : dense) v = entry(rng);
    const MultiIndex alpha = MultiIndex::from_dense(dense);
    CHECK(MultiIndex::parse(alpha.to_string()) == alpha);
    unsigned order = 0;
    for (unsigned v : dense) order += v;
    CHECK(alpha.order() == order);
    for (std::size_t k = 0; k < dense.size(); ++k) CHECK(alpha[static_cast<MultiIndex::Position>(k + 1)] == dense[k]);
  }
}

TEST_CASE("first-order Wick products are renormalized pointwise products") {
  std::mt19937_64 rng(102);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 20; ++trial) {
    const unsigned modes = 1 + trial % 4;
    const TruncationBox box{1, modes};
    const ChaosSeries f = random_scalar(box, rng);
    const ChaosSeries g = random_scalar(box, rng);
    const ChaosSeries fg = wick_product(f, g, BoxPolicy::extend);
    Complex contraction{};
    for (unsigned k = 1; k <= modes; ++k) {
      contraction += f.value(MultiIndex::unit(k)) * g.value(MultiIndex::unit(k));
    }
    for (int point = 0; point < 5; ++point) {
      std::vector<double> z(modes);
      for (auto& v : z) v = d(rng);
      const Complex expected = evaluate(f, z)[0] * evaluate(g, z)[0] - contraction;
      CHECK(std::abs(evaluate(fg, z)[0] - expected) < 1e-11 * (1.0 + std::abs(expected)));
    }
  }
}

TEST_CASE("the Malliavin derivative obeys the product rule for Wick products") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    const unsigned modes = 1 + trial % 3;
    const TruncationBox box{2, modes};
    const ChaosSeries f = random_scalar(box, rng);
    const ChaosSeries g = random_scalar(box, rng);
    const ChaosSeries fg = wick_product(f, g, BoxPolicy::extend);
    const UChaosSeries d_fg = malliavin(fg, modes);
    const UChaosSeries d_f = malliavin(f, modes);
    const UChaosSeries d_g = malliavin(g, modes);
    for (unsigned k = 1; k <= modes; ++k) {
      const ChaosSeries rhs = wick_product(d_f.component(k), g, BoxPolicy::extend) +
                              wick_product(f, d_g.component(k), BoxPolicy::extend);
      CHECK(max_difference(d_fg.component(k), rhs) < 1e-11);
    }
  }
}

TEST_CASE("the Skorokhod integral of F u_k is the Wick product with xi_k") {
  std::mt19937_64 rng(104);
  for (int trial = 0; trial < 10; ++trial) {
    const unsigned modes = 1 + trial % 4;
    const TruncationBox box{3, modes};
    const ChaosSeries f = random_scalar(box, rng);
    for (unsigned k = 1; k <= modes; ++k) {
      UChaosSeries u(f.space(), f.index_ptr(), modes);
      u.component(k) = f;
      const ChaosSeries lhs = skorokhod(u, BoxPolicy::extend);
      const ChaosSeries rhs = wick_product(f, ChaosSeries::basis(MultiIndex::unit(k), {1, modes}), BoxPolicy::extend);
      CHECK(max_difference(lhs, rhs) < 1e-12);
    }
  }
}

TEST_CASE("weighted norms are monotone in the exponent") {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> q(1.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const unsigned modes = 1 + trial % 4;
    const ChaosSeries f = random_scalar({4, modes}, rng);
    std::vector<double> values(modes);
    for (auto& v : values) v = q(rng);
    const auto w = WeightSequence::list(values, 1.0);
    double prev = 0.0;
    for (double r = -4.0; r <= 1.0; r += 0.5) {
      const double n = weighted_norm_sq(f, w, r);
      CHECK(n >= prev * (1.0 - 1e-14));
      CHECK(n == doctest::Approx(graded_norm_sq(f, w, r)).epsilon(1e-12));
      prev = n;
    }
  }
}

TEST_CASE("scalar Ito equations: chaos energies match the Ito series") {
  // For du = a u dt + sigma u dW the order-n energy at T is
  // e^{2aT} (sigma^2 T)^n / n!, whatever the number of time modes.
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> a_dist(-2.0, 1.0), s_dist(0.1, 1.5), t_dist(0.3, 1.5);
  std::uniform_int_distribution<unsigned> n_dist(2, 6), k_dist(1, 4);
  for (int trial = 0; trial < 12; ++trial) {
    const double a = a_dist(rng), sigma = s_dist(rng), horizon = t_dist(rng);
    const unsigned order = n_dist(rng), modes = k_dist(rng);
    auto p = scalar_ito(a, sigma, order, modes, 64, horizon);
    SolveOptions opts;
    opts.weights = WeightSequence::constant(2.0);
    const auto sol = solve(p, opts);
    const auto& energy = sol.stats().order_energy_end;
    REQUIRE(energy.size() == order + 1);
    const double total = ito_mode_moment(a, sigma, horizon, 1.0, order);
    INFO("a=" << a << " sigma=" << sigma << " T=" << horizon << " N=" << order << " K=" << modes);
    for (unsigned n = 0; n <= order; ++n) {
      const double exact = std::exp(2.0 * a * horizon) * std::pow(sigma * sigma * horizon, n) / fact(n);
      CHECK(std::abs(energy[n] - exact) <= 1e-6 * total);
    }
    CHECK(sol.stats().second_moment.back() == doctest::Approx(total).epsilon(1e-6));
  }
}

TEST_CASE("heat equations: mean and moment monotonicity under random truncations") {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> s_dist(0.0, 1.2);
  std::uniform_int_distribution<unsigned> m_dist(0, 1), n_dist(1, 3), k_dist(1, 3);
  for (int trial = 0; trial < 6; ++trial) {
    const double sigma = s_dist(rng);
    const unsigned m = m_dist(rng), order = n_dist(rng), modes = k_dist(rng);
    auto small = heat(sigma, m, order, modes, 32, 0.5, 16);
    auto large = heat(sigma, m, order + 1, modes, 32, 0.5, 16);
    SolveOptions opts;
    opts.weights = WeightSequence::constant(2.0);
    const auto s1 = solve(small, opts);
    const auto s2 = solve(large, opts);
    INFO("sigma=" << sigma << " m=" << m << " N=" << order << " K=" << modes);
    // The mean is the deterministic solution, independent of the truncation.
    const auto u0 = small->u0.coeff(0);
    const Vector c0 = Eigen::Map<const Vector>(u0.data(), static_cast<Eigen::Index>(u0.size()));
    const Vector exact = semigroup_apply(small->a, small->horizon, 0.0, c0);
    CHECK((s1.mean().col(32) - exact).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s2.mean().col(32) - exact).cwiseAbs().maxCoeff() < 1e-12);
    // Adding a level only adds non-negative energy.
    for (std::size_t j = 0; j <= 32; ++j) {
      CHECK(s2.stats().second_moment[j] >= s1.stats().second_moment[j]);
    }
    // Per-mode second moments never exceed the untruncated Ito moment (m = 0 or 1 is integrable here).
    const auto ys = small->space.wavenumbers();
    for (std::size_t i = 0; i < u0.size(); ++i) {
      const bool nyquist = i == u0.size() / 2;
      const double full = closed_form_moment(nyquist && m == 1 ? 0 : m, nyquist && m == 1 ? 0.0 : sigma, ys[i], 0.5, u0[i]);
      CHECK(s2.stats().mode_second_moment(static_cast<Eigen::Index>(i), 32) <= full * (1.0 + 1e-6) + 1e-300);
    }
  }
}
