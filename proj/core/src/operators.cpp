#include "wiener/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unsupported/Eigen/FFT>

#include "wiener/error.hpp"
#include "wiener/random.hpp"

namespace wiener {

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine = [] {
    Eigen::FFT<double> e;
    e.SetFlag(Eigen::FFT<double>::Unscaled);
    return e;
  }();
  return engine;
}

// Grid values from normalized Fourier coefficients.
std::vector<Complex> to_grid(const Vector& c) {
  std::vector<Complex> in(c.data(), c.data() + c.size());
  std::vector<Complex> out;
  fft_engine().inv(out, in);
  return out;
}

Vector from_grid(const std::vector<Complex>& u) {
  std::vector<Complex> out;
  fft_engine().fwd(out, u);
  Vector c(static_cast<Eigen::Index>(out.size()));
  const double scale = 1.0 / static_cast<double>(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) c[static_cast<Eigen::Index>(i)] = out[i] * scale;
  return c;
}

Matrix crank_nicolson(const Matrix& a, double h, bool adjoint) {
  const auto n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  Matrix step = (id - 0.5 * h * a).partialPivLu().solve(id + 0.5 * h * a);
  if (adjoint) step.adjointInPlace();
  return step;
}

Vector semigroup_dense(const OperatorFamily& a, double t, double s, const Vector& v, bool adjoint) {
  const double span = t - s;
  if (span == 0.0) return v;
  const auto substeps = std::max<long>(1, static_cast<long>(std::ceil(span / a.max_substep() - 1e-12)));
  const Matrix step = crank_nicolson(a.dense(), span / static_cast<double>(substeps), adjoint);
  Vector out = v;
  for (long i = 0; i < substeps; ++i) out = step * out;
  return out;
}

void require_order(double t, double s) {
  if (!(t >= s)) throw ValidationError("semigroup requires t >= s");
}

}  // namespace

Vector grid_to_fourier(std::span<const Complex> values) {
  return from_grid(std::vector<Complex>(values.begin(), values.end()));
}

std::vector<Complex> fourier_to_grid(const Vector& coeffs) { return to_grid(coeffs); }

OperatorFamily OperatorFamily::multiplier(const CoefficientSpace& space, Symbol symbol) {
  return piecewise(space, {}, {symbol});
}

OperatorFamily OperatorFamily::piecewise(const CoefficientSpace& space, std::vector<double> breakpoints,
                                         std::vector<Symbol> symbols) {
  if (symbols.size() != breakpoints.size() + 1) {
    throw ValidationError("piecewise operator needs one more symbol than breakpoints");
  }
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
      std::adjacent_find(breakpoints.begin(), breakpoints.end()) != breakpoints.end()) {
    throw ValidationError("operator breakpoints must be strictly increasing");
  }
  OperatorFamily out;
  out.wavenumbers_.assign(space.wavenumbers().begin(), space.wavenumbers().end());
  out.breakpoints_ = std::move(breakpoints);
  out.symbols_ = std::move(symbols);
  return out;
}

OperatorFamily OperatorFamily::matrix(Matrix a, double max_substep) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ValidationError("operator matrix must be square and non-empty");
  if (!(max_substep > 0.0)) throw ValidationError("max_substep must be positive");
  OperatorFamily out;
  out.dense_ = std::move(a);
  out.max_substep_ = max_substep;
  return out;
}

std::size_t OperatorFamily::dim() const noexcept {
  return is_diagonal() ? wavenumbers_.size() : static_cast<std::size_t>(dense_.rows());
}

std::size_t OperatorFamily::segment(double t) const {
  return static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t) -
                                  breakpoints_.begin());
}

Vector OperatorFamily::diagonal(double t) const {
  if (!is_diagonal()) throw ValidationError("diagonal() requires a diagonal operator family");
  const Symbol& sym = symbols_[segment(t)];
  Vector d(static_cast<Eigen::Index>(wavenumbers_.size()));
  for (std::size_t i = 0; i < wavenumbers_.size(); ++i) d[static_cast<Eigen::Index>(i)] = sym.at(wavenumbers_[i]);
  return d;
}

Vector OperatorFamily::exponent(double s, double t) const {
  if (!is_diagonal()) throw ValidationError("exponent() requires a diagonal operator family");
  Vector e = Vector::Zero(static_cast<Eigen::Index>(wavenumbers_.size()));
  double cur = s;
  while (cur < t) {
    const std::size_t seg = segment(cur);
    const double end = seg < breakpoints_.size() ? std::min(t, breakpoints_[seg]) : t;
    const Symbol& sym = symbols_[seg];
    for (std::size_t i = 0; i < wavenumbers_.size(); ++i) {
      e[static_cast<Eigen::Index>(i)] += (end - cur) * sym.at(wavenumbers_[i]);
    }
    cur = end;
  }
  return e;
}

Vector OperatorFamily::apply(double t, const Vector& v) const {
  if (is_diagonal()) return diagonal(t).cwiseProduct(v);
  return dense_ * v;
}

Vector semigroup_apply(const OperatorFamily& a, double t, double s, const Vector& v) {
  require_order(t, s);
  if (a.is_diagonal()) return a.exponent(s, t).array().exp().matrix().cwiseProduct(v);
  return semigroup_dense(a, t, s, v, false);
}

Vector semigroup_apply_adjoint(const OperatorFamily& a, double t, double s, const Vector& v) {
  require_order(t, s);
  if (a.is_diagonal()) return a.exponent(s, t).array().exp().conjugate().matrix().cwiseProduct(v);
  return semigroup_dense(a, t, s, v, true);
}

std::optional<double> coercivity_check(const OperatorFamily& a, double gamma) {
  if (!a.is_diagonal()) throw ValidationError("coercivity_check requires a diagonal operator family");
  const auto ys = a.wavenumbers();
  const bool flat = std::all_of(ys.begin(), ys.end(), [](double y) { return y == 0.0; });
  double c = -std::numeric_limits<double>::infinity();
  for (const Symbol& sym : a.symbols()) {
    if (!flat && gamma > sym.a2) return std::nullopt;
    for (double y : ys) c = std::max(c, sym.at(y).real() + gamma * (1.0 + y * y));
  }
  return c;
}

NoiseModel NoiseModel::time_white(double horizon, unsigned modes) {
  if (!(horizon > 0.0)) throw ValidationError("noise horizon must be positive");
  if (modes == 0) throw ValidationError("noise needs at least one mode");
  NoiseModel n;
  n.kind_ = NoiseKind::time_white;
  n.horizon_ = horizon;
  n.time_modes_ = modes;
  return n;
}

NoiseModel NoiseModel::space_white(const CoefficientSpace& grid, unsigned modes) {
  if (grid.kind() == SpaceKind::scalar) throw ValidationError("space-white noise needs a spatial grid");
  if (modes == 0) throw ValidationError("noise needs at least one mode");
  NoiseModel n;
  n.kind_ = NoiseKind::space_white;
  n.length_ = grid.length();
  n.nx_ = grid.dim();
  n.space_modes_ = modes;
  return n;
}

NoiseModel NoiseModel::space_time(double horizon, const CoefficientSpace& grid, unsigned time_modes,
                                  unsigned space_modes) {
  NoiseModel n = space_white(grid, space_modes);
  if (!(horizon > 0.0)) throw ValidationError("noise horizon must be positive");
  if (time_modes == 0) throw ValidationError("noise needs at least one time mode");
  n.kind_ = NoiseKind::space_time;
  n.horizon_ = horizon;
  n.time_modes_ = time_modes;
  return n;
}

NoiseModel NoiseModel::single_variable() { return NoiseModel{}; }

std::pair<unsigned, unsigned> NoiseModel::split(unsigned k) const {
  if (k == 0 || k > mode_count()) throw ValidationError("noise mode index out of range: " + std::to_string(k));
  return {(k - 1) / space_modes_ + 1, (k - 1) % space_modes_ + 1};
}

double NoiseModel::time_profile(unsigned k, double t) const {
  const auto [i, j] = split(k);
  (void)j;
  return has_time_modes() ? time_mode(i, t, horizon_) : 1.0;
}

std::vector<double> NoiseModel::space_mode_on_grid(unsigned j) const {
  if (!has_space_modes()) throw ValidationError("noise model has no space modes");
  if (j == 0 || j > space_modes_) throw ValidationError("space mode index out of range: " + std::to_string(j));
  std::vector<double> h(nx_);
  for (std::size_t l = 0; l < nx_; ++l) {
    h[l] = space_mode(j, length_ * static_cast<double>(l) / static_cast<double>(nx_), length_);
  }
  return h;
}

double time_mode(unsigned k, double t, double horizon) {
  if (k == 0) throw ValidationError("time mode index starts at 1");
  if (!(t >= 0.0 && t <= horizon)) throw ValidationError("time mode evaluated outside [0, T]");
  if (k == 1) return 1.0 / std::sqrt(horizon);
  return std::sqrt(2.0 / horizon) * std::cos((k - 1) * std::numbers::pi * t / horizon);
}

double time_mode_integral(unsigned k, double t, double horizon) {
  if (k == 0) throw ValidationError("time mode index starts at 1");
  if (k == 1) return t / std::sqrt(horizon);
  const double w = (k - 1) * std::numbers::pi / horizon;
  return std::sqrt(2.0 / horizon) * std::sin(w * t) / w;
}

double space_mode(unsigned j, double x, double length) {
  if (j == 0) throw ValidationError("space mode index starts at 1");
  if (j == 1) return 1.0 / std::sqrt(length);
  const unsigned freq = j / 2;
  const double arg = 2.0 * std::numbers::pi * freq * x / length;
  return std::sqrt(2.0 / length) * (j % 2 == 0 ? std::cos(arg) : std::sin(arg));
}

double time_modes(const NoiseModel& noise, unsigned k, double t) {
  if (noise.has_time_modes() && !(t >= 0.0 && t <= noise.horizon())) {
    throw ValidationError("time mode evaluated outside [0, T]");
  }
  return noise.time_profile(k, t);
}

std::shared_ptr<const SpatialAction> SpatialAction::derivative(const CoefficientSpace& space, double sigma,
                                                               unsigned m) {
  auto out = std::make_shared<SpatialAction>();
  const auto ys = space.wavenumbers();
  const std::size_t n = ys.size();
  out->symbol_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const bool nyquist = space.kind() == SpaceKind::fourier_modes && n % 2 == 0 && i == n / 2 && m % 2 == 1;
    out->symbol_[static_cast<Eigen::Index>(i)] =
        nyquist ? Complex{} : sigma * std::pow(Complex(0.0, ys[i]), static_cast<int>(m));
  }
  if (m == 0) out->symbol_.setConstant(sigma);
  return out;
}

std::shared_ptr<const SpatialAction> SpatialAction::multiplication(const CoefficientSpace& space,
                                                                   std::vector<double> h, double sigma, unsigned m) {
  if (space.kind() != SpaceKind::fourier_modes) {
    throw ValidationError("multiplication noise requires a Fourier coefficient space");
  }
  if (h.size() != space.dim()) throw ValidationError("multiplier length does not match the grid");
  auto base = derivative(space, sigma, m);
  auto out = std::make_shared<SpatialAction>(*base);
  out->weight_ = std::move(h);
  return out;
}

Vector SpatialAction::apply(const Vector& v) const {
  Vector w = symbol_.cwiseProduct(v);
  if (is_diagonal()) return w;
  auto u = to_grid(w);
  for (std::size_t l = 0; l < u.size(); ++l) u[l] *= weight_[l];
  return from_grid(u);
}

Vector SpatialAction::apply_adjoint(const Vector& v) const {
  if (is_diagonal()) return symbol_.conjugate().cwiseProduct(v);
  auto u = to_grid(v);
  for (std::size_t l = 0; l < u.size(); ++l) u[l] *= weight_[l];
  return symbol_.conjugate().cwiseProduct(from_grid(u));
}

NoiseOperatorFamily::NoiseOperatorFamily(NoiseModel noise, std::vector<std::shared_ptr<const SpatialAction>> actions)
    : noise_(std::move(noise)), actions_(std::move(actions)) {
  if (actions_.size() != noise_.mode_count()) {
    throw ValidationError("noise operator needs one spatial action per noise mode");
  }
}

NoiseOperatorFamily NoiseOperatorFamily::derivative(NoiseModel noise, const CoefficientSpace& space, double sigma,
                                                    unsigned m) {
  std::vector<std::shared_ptr<const SpatialAction>> actions;
  actions.reserve(noise.mode_count());
  if (!noise.has_space_modes()) {
    const auto shared = SpatialAction::derivative(space, sigma, m);
    actions.assign(noise.mode_count(), shared);
  } else {
    std::vector<std::shared_ptr<const SpatialAction>> per_space;
    for (unsigned j = 1; j <= noise.space_mode_count(); ++j) {
      per_space.push_back(SpatialAction::multiplication(space, noise.space_mode_on_grid(j), sigma, m));
    }
    for (unsigned k = 1; k <= noise.mode_count(); ++k) actions.push_back(per_space[noise.split(k).second - 1]);
  }
  return {std::move(noise), std::move(actions)};
}

NoiseOperatorFamily NoiseOperatorFamily::zero(NoiseModel noise) {
  std::vector<std::shared_ptr<const SpatialAction>> actions(noise.mode_count());
  return {std::move(noise), std::move(actions)};
}

const std::shared_ptr<const SpatialAction>& NoiseOperatorFamily::action_ptr(unsigned k) const {
  if (k == 0 || k > actions_.size()) throw ValidationError("noise mode index out of range: " + std::to_string(k));
  return actions_[k - 1];
}

bool NoiseOperatorFamily::is_zero() const {
  return std::all_of(actions_.begin(), actions_.end(), [](const auto& a) { return a == nullptr; });
}

std::optional<Vector> NoiseOperatorFamily::common_diagonal() const {
  if (actions_.empty() || !actions_.front() || !actions_.front()->is_diagonal()) return std::nullopt;
  for (const auto& a : actions_) {
    if (a != actions_.front()) return std::nullopt;
  }
  return actions_.front()->diagonal();
}

Vector NoiseOperatorFamily::apply(unsigned k, double t, const Vector& v) const {
  const SpatialAction* b = action(k);
  if (!b) return Vector::Zero(v.size());
  return profile(k, t) * b->apply(v);
}

Vector NoiseOperatorFamily::apply_adjoint(unsigned k, double t, const Vector& v) const {
  const SpatialAction* b = action(k);
  if (!b) return Vector::Zero(v.size());
  return profile(k, t) * b->apply_adjoint(v);
}

Vector apply_Mk(const NoiseOperatorFamily& m, unsigned k, double t, const Vector& v) { return m.apply(k, t, v); }

void EvolutionProblem::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("T must be positive");
  if (steps == 0) throw ValidationError("nt must be positive");
  if (a.dim() != space.dim()) throw ValidationError("operator dimension does not match the coefficient space");
  if (!(u0.space() == space)) throw ValidationError("u0 lives in a different coefficient space");
  if (!forcing.empty() && forcing.size() != steps + 1) {
    throw ValidationError("forcing must be sampled at every grid time");
  }
  for (const auto& f : forcing) {
    if (!(f.space() == space)) throw ValidationError("forcing lives in a different coefficient space");
  }
  if (m.modes() < box.max_modes) throw ValidationError("chaos_modes exceeds the number of noise modes");
  if (m.noise().has_time_modes() && std::abs(m.noise().horizon() - horizon) > 1e-12 * horizon) {
    throw ValidationError("noise horizon differs from T");
  }
}

bool EvolutionProblem::deterministic_data() const {
  if (!u0.is_deterministic()) return false;
  return std::all_of(forcing.begin(), forcing.end(), [](const ChaosSeries& f) { return f.is_deterministic(); });
}

namespace {

std::vector<double> trapezoid_weights(const EvolutionProblem& p) {
  std::vector<double> tau(p.steps + 1, p.dt());
  tau.front() *= 0.5;
  tau.back() *= 0.5;
  return tau;
}

Eigen::VectorXd v_weights(const CoefficientSpace& space) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(space.dim()));
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const double y = space.wavenumbers()[i];
    w[static_cast<Eigen::Index>(i)] = space.weights()[i] * (1.0 + y * y);
  }
  return w;
}

Vector step_propagate(const EvolutionProblem& p, std::size_t j, const Vector& v, bool adjoint) {
  return adjoint ? semigroup_apply_adjoint(p.a, p.time(j + 1), p.time(j), v)
                 : semigroup_apply(p.a, p.time(j + 1), p.time(j), v);
}

}  // namespace

Matrix volterra_apply(const EvolutionProblem& p, unsigned k, const Matrix& v) {
  const auto cols = static_cast<Eigen::Index>(p.steps + 1);
  const double half = 0.5 * p.dt();
  Matrix z = Matrix::Zero(v.rows(), cols);
  Vector prev_g = p.m.apply(k, p.time(0), v.col(0));
  for (std::size_t j = 0; j < p.steps; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    Vector next_g = p.m.apply(k, p.time(j + 1), v.col(jj + 1));
    z.col(jj + 1) = step_propagate(p, j, z.col(jj) + half * prev_g, false) + half * next_g;
    prev_g = std::move(next_g);
  }
  return z;
}

Matrix volterra_apply_adjoint(const EvolutionProblem& p, unsigned k, const Matrix& w) {
  const auto cols = static_cast<Eigen::Index>(p.steps + 1);
  const auto tau = trapezoid_weights(p);
  const Eigen::VectorXd vw = v_weights(p.space);
  const double half = 0.5 * p.dt();
  Matrix weighted(w.rows(), cols);
  for (Eigen::Index j = 0; j < cols; ++j) weighted.col(j) = tau[static_cast<std::size_t>(j)] * vw.cast<Complex>().cwiseProduct(w.col(j));

  Matrix pg = Matrix::Zero(w.rows(), cols);
  Vector lambda = weighted.col(cols - 1);
  for (std::size_t j = p.steps; j-- > 0;) {
    const auto jj = static_cast<Eigen::Index>(j);
    pg.col(jj + 1) += half * lambda;
    const Vector back = step_propagate(p, j, lambda, true);
    pg.col(jj) += half * back;
    lambda = weighted.col(jj) + back;
  }
  Matrix out(w.rows(), cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    out.col(j) = p.m.apply_adjoint(k, p.time(static_cast<std::size_t>(j)), pg.col(j)).cwiseQuotient(
                     (vw * tau[static_cast<std::size_t>(j)]).cast<Complex>());
  }
  return out;
}

double time_v_norm_sq(const EvolutionProblem& p, const Matrix& v) {
  const auto tau = trapezoid_weights(p);
  const Eigen::VectorXd vw = v_weights(p.space);
  double s = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    s += tau[static_cast<std::size_t>(j)] * (vw.array() * v.col(j).array().abs2()).sum();
  }
  return s;
}

CkEstimate estimate_Ck(const EvolutionProblem& p, unsigned k, std::uint64_t seed, unsigned max_iterations,
                       double tolerance) {
  p.validate();
  if (k == 0 || k > p.m.modes()) throw ValidationError("noise mode index out of range: " + std::to_string(k));
  CkEstimate est;
  if (!p.m.action(k)) {
    est.converged = true;
    return est;
  }
  const auto rows = static_cast<Eigen::Index>(p.space.dim());
  const auto cols = static_cast<Eigen::Index>(p.steps + 1);
  NormalStream rng(seed, k);
  Matrix x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = rng.next();
      x(i, j) = Complex(re, rng.next());
    }
  }
  x /= std::sqrt(time_v_norm_sq(p, x));
  double previous = 0.0;
  for (unsigned it = 1; it <= max_iterations; ++it) {
    const Matrix y = volterra_apply(p, k, x);
    const double value = std::sqrt(time_v_norm_sq(p, y));
    est.value = value;
    est.iterations = it;
    if (value == 0.0) {
      est.converged = true;
      break;
    }
    if (it > 1 && std::abs(value - previous) <= tolerance * value) {
      est.converged = true;
      break;
    }
    previous = value;
    x = volterra_apply_adjoint(p, k, y);
    const double nx = std::sqrt(time_v_norm_sq(p, x));
    if (nx == 0.0) {
      est.converged = true;
      break;
    }
    x /= nx;
  }
  return est;
}

}  // namespace wiener
