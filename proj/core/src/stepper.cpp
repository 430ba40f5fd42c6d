#include "wiener/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "wiener/error.hpp"

namespace wiener {

Complex phi_function(unsigned k, Complex z) {
  if (k == 0) return std::exp(z);
  if (std::abs(z) < 1.0) {
    double inv_fact = 1.0;
    for (unsigned i = 2; i <= k; ++i) inv_fact /= i;
    Complex term = inv_fact;
    Complex sum = term;
    for (unsigned n = 1; n < 40; ++n) {
      term *= z / static_cast<double>(n + k);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  Complex phi = std::exp(z);
  double inv_fact = 1.0;
  for (unsigned i = 0; i < k; ++i) {
    if (i > 0) inv_fact /= i;
    phi = (phi - inv_fact) / z;
  }
  return phi;
}

namespace {

// Monomial coefficients of the Lagrange basis through `nodes`.
std::vector<std::vector<double>> lagrange_coefficients(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<std::vector<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> poly{1.0};
    double denom = 1.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i) continue;
      std::vector<double> next(poly.size() + 1, 0.0);
      for (std::size_t m = 0; m < poly.size(); ++m) {
        next[m + 1] += poly[m];
        next[m] -= nodes[l] * poly[m];
      }
      poly = std::move(next);
      denom *= nodes[i] - nodes[l];
    }
    for (double& c : poly) c /= denom;
    out[i] = std::move(poly);
  }
  return out;
}

}  // namespace

ExponentialStepper::ExponentialStepper(const OperatorFamily& a, double horizon, std::size_t steps)
    : diagonal_(a.is_diagonal()), steps_(steps), dt_(horizon / static_cast<double>(steps)), dim_(a.dim()) {
  if (steps == 0 || !(horizon > 0.0)) throw ValidationError("stepper needs T > 0 and nt > 0");
  if (!diagonal_) {
    const double sub = std::min(a.max_substep(), dt_ / 4.0);
    const auto n = std::max<long>(1, static_cast<long>(std::ceil(dt_ / sub - 1e-12)));
    const double h = dt_ / static_cast<double>(n);
    const auto d = a.dense().rows();
    const Matrix id = Matrix::Identity(d, d);
    const Matrix one = (id - 0.5 * h * a.dense()).partialPivLu().solve(id + 0.5 * h * a.dense());
    dense_step_ = id;
    for (long i = 0; i < n; ++i) dense_step_ = one * dense_step_;
    return;
  }

  const std::size_t degree = std::min<std::size_t>(3, steps);
  const auto ys = a.wavenumbers();
  std::map<std::tuple<std::size_t, std::ptrdiff_t>, std::size_t> weight_cache;
  std::map<std::size_t, std::size_t> propagator_cache;
  rules_.reserve(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    const double t0 = horizon * static_cast<double>(j) / static_cast<double>(steps);
    const double t1 = horizon * static_cast<double>(j + 1) / static_cast<double>(steps);
    const std::size_t seg0 = a.segment(t0);
    const bool straddles = seg0 != a.segment(std::nextafter(t1, t0));

    Rule rule{};
    if (straddles) {
      rule.propagator = propagators_.size();
      propagators_.push_back(a.exponent(t0, t1).array().exp().matrix());
    } else if (auto it = propagator_cache.find(seg0); it != propagator_cache.end()) {
      rule.propagator = it->second;
    } else {
      rule.propagator = propagators_.size();
      propagator_cache.emplace(seg0, rule.propagator);
      propagators_.push_back(a.exponent(t0, t1).array().exp().matrix());
    }

    const auto first = static_cast<std::ptrdiff_t>(
        std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(j) - 1, 0,
                                   static_cast<std::ptrdiff_t>(steps - degree)));
    rule.first_node = first - static_cast<std::ptrdiff_t>(j);
    const std::size_t seg_mid = a.segment(0.5 * (t0 + t1));
    const auto key = std::make_tuple(seg_mid, rule.first_node);
    if (auto it = weight_cache.find(key); it != weight_cache.end()) {
      rule.weights = it->second;
    } else {
      std::vector<double> nodes;
      for (std::size_t i = 0; i <= degree; ++i) nodes.push_back(static_cast<double>(rule.first_node) + i);
      const auto coeffs = lagrange_coefficients(nodes);
      const Symbol& sym = a.symbols()[seg_mid];
      std::vector<Vector> w(nodes.size(), Vector::Zero(static_cast<Eigen::Index>(dim_)));
      for (std::size_t q = 0; q < dim_; ++q) {
        const Complex z = sym.at(ys[q]) * dt_;
        std::vector<Complex> phis(degree + 1);
        double fact = 1.0;
        for (std::size_t m = 0; m <= degree; ++m) {
          if (m > 0) fact *= static_cast<double>(m);
          phis[m] = fact * phi_function(static_cast<unsigned>(m + 1), z);
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          Complex acc = 0.0;
          for (std::size_t m = 0; m < coeffs[i].size(); ++m) acc += coeffs[i][m] * phis[m];
          w[i][static_cast<Eigen::Index>(q)] = dt_ * acc;
        }
      }
      rule.weights = weights_.size();
      weight_cache.emplace(key, rule.weights);
      weights_.push_back(std::move(w));
    }
    rules_.push_back(rule);
  }
}

unsigned ExponentialStepper::order() const noexcept {
  if (!diagonal_) return 2;
  return static_cast<unsigned>(std::min<std::size_t>(3, steps_) + 1);
}

Matrix ExponentialStepper::integrate(const Vector& u0, const Matrix& forcing) const {
  Matrix out;
  integrate_into(u0, forcing, out);
  return out;
}

void ExponentialStepper::integrate_into(const Vector& u0, const Matrix& forcing, Matrix& out) const {
  const auto rows = static_cast<Eigen::Index>(dim_);
  const auto cols = static_cast<Eigen::Index>(steps_ + 1);
  if (u0.size() != rows) throw ValidationError("initial value has the wrong dimension");
  const bool forced = forcing.size() != 0;
  if (forced && (forcing.rows() != rows || forcing.cols() != cols)) {
    throw ValidationError("forcing must have one column per grid time");
  }
  out.resize(rows, cols);
  out.col(0) = u0;
  if (!diagonal_) {
    const double half = 0.5 * dt_;
    for (Eigen::Index j = 0; j + 1 < cols; ++j) {
      if (forced) {
        out.col(j + 1) = dense_step_ * (out.col(j) + half * forcing.col(j)) + half * forcing.col(j + 1);
      } else {
        out.col(j + 1) = dense_step_ * out.col(j);
      }
    }
    return;
  }
  for (std::size_t j = 0; j < steps_; ++j) {
    const Rule& rule = rules_[j];
    const auto jj = static_cast<Eigen::Index>(j);
    auto next = out.col(jj + 1);
    next = propagators_[rule.propagator].cwiseProduct(out.col(jj));
    if (!forced) continue;
    const auto& w = weights_[rule.weights];
    const Eigen::Index base = jj + rule.first_node;
    for (std::size_t i = 0; i < w.size(); ++i) {
      next += w[i].cwiseProduct(forcing.col(base + static_cast<Eigen::Index>(i)));
    }
  }
}

}  // namespace wiener
