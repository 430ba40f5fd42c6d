#include "wiener/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "wiener/error.hpp"
#include "wiener/random.hpp"

namespace wiener {

namespace {

struct BlockSums {
  std::vector<double> mean, mean_sq, m2, m2_sq;
};

// Pairwise reduction in a fixed tree so the result does not depend on workers.
BlockSums reduce(std::vector<BlockSums>& blocks, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return blocks[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  BlockSums a = reduce(blocks, lo, mid);
  const BlockSums b = reduce(blocks, mid, hi);
  for (std::size_t j = 0; j < a.mean.size(); ++j) {
    a.mean[j] += b.mean[j];
    a.mean_sq[j] += b.mean_sq[j];
    a.m2[j] += b.m2[j];
    a.m2_sq[j] += b.m2_sq[j];
  }
  return a;
}

Integrability classify(double value, double limit, double rel_tol) {
  if (std::abs(value - limit) <= rel_tol * std::max(1.0, std::abs(limit))) return Integrability::boundary;
  return value < limit ? Integrability::integrable : Integrability::non_integrable;
}

Eigen::Map<const Vector> as_vector(std::span<const Complex> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

// sum_alpha data_alpha h^alpha / sqrt(alpha!).
Vector project(const ChaosSeries& s, const DirectionH& h) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.index().size(); ++i) {
    const double c = monomial(s.index()[i], h.coords) / std::sqrt(factorial(s.index()[i]));
    if (c != 0.0) out += c * as_vector(s.coeff(i));
  }
  return out;
}

}  // namespace

McResult mc_ito(const EvolutionProblem& p, const McOptions& options) {
  p.validate();
  if (!p.a.is_diagonal()) throw ValidationError("mc_ito requires a diagonal operator family");
  if (p.m.noise().kind() != NoiseKind::time_white) throw ValidationError("mc_ito requires time-white noise");
  const auto b = p.m.common_diagonal();
  if (!b) throw ValidationError("mc_ito requires the same diagonal noise action on every mode");
  if (!p.forcing.empty() || !p.u0.is_deterministic()) {
    throw ValidationError("mc_ito requires a deterministic initial value and no forcing");
  }
  if (options.paths < 2) throw ValidationError("mc_paths must be at least 2");
  const std::size_t steps = options.steps == 0 ? p.steps * ((4096 + p.steps - 1) / p.steps) : options.steps;
  if (steps % p.steps != 0) throw ValidationError("mc_steps must be a multiple of nt");
  const std::size_t stride = steps / p.steps;
  const double dt = p.horizon / static_cast<double>(steps);
  const double sqrt_dt = std::sqrt(dt);
  const std::size_t times = p.steps + 1;

  const Vector c0 = as_vector(p.u0.coeff(0));
  const auto ys = p.space.wavenumbers();
  const std::size_t n = c0.size();
  // Active modes with multiplicities; for real data the conjugate mode is folded in.
  const bool real_data = [&] {
    if (p.space.kind() != SpaceKind::fourier_modes) return false;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(c0[static_cast<Eigen::Index>(i)] - std::conj(c0[static_cast<Eigen::Index>(n - i)])) >
          1e-14 * (1.0 + std::abs(c0[static_cast<Eigen::Index>(i)]))) {
        return false;
      }
    }
    return true;
  }();
  std::vector<std::size_t> active;
  std::vector<double> mult;
  for (std::size_t i = 0; i < n; ++i) {
    if (c0[static_cast<Eigen::Index>(i)] == Complex{}) continue;
    // Real data: fold each conjugate pair onto its positive wavenumber. The
    // Nyquist mode of an even grid is its own partner.
    const bool nyquist = n % 2 == 0 && i == n / 2;
    if (real_data && i > 0 && ys[i] < 0.0 && !nyquist) continue;
    active.push_back(i);
    mult.push_back(real_data && i > 0 && !nyquist ? 2.0 : 1.0);
  }
  const double weight = p.space.weights().front();
  const double u0_norm = std::sqrt(p.space.norm_sq({c0.data(), n}));
  if (u0_norm == 0.0) throw ValidationError("mc_ito requires a non-zero initial value");

  // Per-step amplification exp(a dt) (1 + b dW): exact drift, Euler-Maruyama noise.
  std::vector<std::vector<Complex>> drift_by_segment;
  for (std::size_t s = 0; s < p.a.symbols().size(); ++s) {
    std::vector<Complex> d;
    for (std::size_t i : active) d.push_back(std::exp(p.a.symbols()[s].at(ys[i]) * dt));
    drift_by_segment.push_back(std::move(d));
  }
  std::vector<std::size_t> step_segment(steps);
  for (std::size_t s = 0; s < steps; ++s) step_segment[s] = p.a.segment((static_cast<double>(s) + 0.5) * dt);
  std::vector<Complex> noise;
  for (std::size_t i : active) noise.push_back((*b)[static_cast<Eigen::Index>(i)]);

  const std::size_t blocks = (options.paths + options.block - 1) / options.block;
  std::vector<BlockSums> sums(blocks);
  const auto run_block = [&](std::size_t blk) {
    BlockSums& s = sums[blk];
    s.mean.assign(times, 0.0);
    s.mean_sq.assign(times, 0.0);
    s.m2.assign(times, 0.0);
    s.m2_sq.assign(times, 0.0);
    std::vector<Complex> c(active.size());
    const std::size_t first = blk * options.block;
    const std::size_t last = std::min(options.paths, first + options.block);
    for (std::size_t path = first; path < last; ++path) {
      NormalStream rng(options.seed, path);
      for (std::size_t a = 0; a < active.size(); ++a) c[a] = c0[static_cast<Eigen::Index>(active[a])];
      const auto record = [&](std::size_t j) {
        double proj = 0.0;
        double energy = 0.0;
        for (std::size_t a = 0; a < active.size(); ++a) {
          const Complex ref = c0[static_cast<Eigen::Index>(active[a])];
          proj += mult[a] * (c[a] * std::conj(ref)).real();
          energy += mult[a] * std::norm(c[a]);
        }
        proj *= weight / u0_norm;
        energy *= weight;
        s.mean[j] += proj;
        s.mean_sq[j] += proj * proj;
        s.m2[j] += energy;
        s.m2_sq[j] += energy * energy;
      };
      record(0);
      for (std::size_t step = 0; step < steps; ++step) {
        const double dw = sqrt_dt * rng.next();
        const auto& drift = drift_by_segment[step_segment[step]];
        for (std::size_t a = 0; a < active.size(); ++a) c[a] *= drift[a] * (1.0 + noise[a] * dw);
        if ((step + 1) % stride == 0) record((step + 1) / stride);
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(blocks)));
  if (workers == 1) {
    for (std::size_t blk = 0; blk < blocks; ++blk) run_block(blk);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t blk = w; blk < blocks; blk += workers) run_block(blk);
      });
    }
    for (auto& t : pool) t.join();
  }
  const BlockSums total = reduce(sums, 0, blocks);

  McResult out;
  const double np = static_cast<double>(options.paths);
  for (std::size_t j = 0; j < times; ++j) {
    out.times.push_back(p.time(j));
    const double mean = total.mean[j] / np;
    const double var_mean = std::max(0.0, total.mean_sq[j] / np - mean * mean) * np / (np - 1.0);
    const double m2 = total.m2[j] / np;
    const double var_m2 = std::max(0.0, total.m2_sq[j] / np - m2 * m2) * np / (np - 1.0);
    out.mean.push_back(mean);
    out.mean_se.push_back(std::sqrt(var_mean / np));
    out.m2.push_back(m2);
    out.m2_se.push_back(std::sqrt(var_m2 / np));
  }
  return out;
}

double closed_form_moment(unsigned m, double sigma, double y, double t, Complex u0_hat) {
  return std::norm(u0_hat) * std::exp((sigma * sigma * std::pow(y, 2.0 * m) - 2.0 * y * y) * t);
}

namespace {

double exp_partial_sum(double x, std::optional<unsigned> max_order) {
  if (!max_order) return std::exp(x);
  double term = 1.0;
  double sum = 1.0;
  for (unsigned n = 1; n <= *max_order; ++n) {
    term *= x / n;
    sum += term;
  }
  return sum;
}

}  // namespace

double ito_mode_moment(Complex a, Complex b, double t, Complex u0_hat, std::optional<unsigned> max_order) {
  return std::norm(u0_hat) * std::exp(2.0 * a.real() * t) * exp_partial_sum(std::norm(b) * t, max_order);
}

double wick_mode_moment(Complex a, Complex b, double t, Complex u0_hat, std::optional<unsigned> max_order) {
  return std::norm(u0_hat) * std::exp(2.0 * a.real() * t) * exp_partial_sum(std::norm(b) * t * t, max_order);
}

Integrability classify_ito_moment(unsigned m, double sigma, double rel_tol) {
  switch (m) {
    case 0:
      return Integrability::integrable;
    case 1:
      return classify(sigma * sigma, 2.0, rel_tol);
    case 2:
      return sigma == 0.0 ? Integrability::integrable : Integrability::non_integrable;
    default:
      return sigma == 0.0 ? Integrability::integrable : Integrability::non_integrable;
  }
}

double wick_space_noise_norm(double t, double y, Complex u0_hat, double sigma) {
  return std::norm(u0_hat) * std::exp(-2.0 * y * y * t + sigma * sigma * y * y * t * t);
}

Integrability classify_wick_space(double t, double sigma, double rel_tol) {
  return classify(sigma * sigma * t, 2.0, rel_tol);
}

Matrix solve_deterministic_h(const EvolutionProblem& p, const DirectionH& h) {
  p.validate();
  const std::size_t times = p.steps + 1;
  const double dt = p.dt();
  const auto rows = static_cast<Eigen::Index>(p.space.dim());
  const unsigned modes = std::min<unsigned>(p.m.modes(), static_cast<unsigned>(h.coords.size()));

  std::vector<Vector> f;
  if (!p.forcing.empty()) {
    for (const auto& fj : p.forcing) f.push_back(project(fj, h));
  }
  // Cubic interpolation of the grid forcing at the midpoint of interval j.
  const auto forcing_mid = [&](std::size_t j) -> Vector {
    if (f.empty()) return Vector::Zero(rows);
    if (p.steps < 3) return 0.5 * (f[j] + f[j + 1]);
    const std::size_t first = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(j) - 1, 0,
                                                         static_cast<std::ptrdiff_t>(p.steps - 3));
    const double x = static_cast<double>(j) + 0.5 - static_cast<double>(first);
    Vector acc = Vector::Zero(rows);
    for (int i = 0; i < 4; ++i) {
      double li = 1.0;
      for (int l = 0; l < 4; ++l) {
        if (l != i) li *= (x - l) / static_cast<double>(i - l);
      }
      acc += li * f[first + static_cast<std::size_t>(i)];
    }
    return acc;
  };
  const auto rhs = [&](double t, const Vector& u, const Vector& forcing) {
    Vector out = forcing;
    for (unsigned k = 1; k <= modes; ++k) {
      if (h.coords[k - 1] != 0.0) out += h.coords[k - 1] * p.m.apply(k, t, u);
    }
    return out;
  };

  Matrix traj(rows, static_cast<Eigen::Index>(times));
  traj.col(0) = project(p.u0, h);
  const Vector zero = Vector::Zero(rows);
  for (std::size_t j = 0; j < p.steps; ++j) {
    const double t0 = p.time(j);
    const double t1 = p.time(j + 1);
    const double tm = 0.5 * (t0 + t1);
    const Vector u = traj.col(static_cast<Eigen::Index>(j));
    const Vector f0 = f.empty() ? zero : f[j];
    const Vector f1 = f.empty() ? zero : f[j + 1];
    const Vector fm = forcing_mid(j);
    const auto half = [&](const Vector& v) { return semigroup_apply(p.a, tm, t0, v); };
    const auto rest = [&](const Vector& v) { return semigroup_apply(p.a, t1, tm, v); };
    const auto full = [&](const Vector& v) { return semigroup_apply(p.a, t1, t0, v); };

    const Vector k1 = rhs(t0, u, f0);
    const Vector eu = half(u);
    const Vector k2 = rhs(tm, half(u + 0.5 * dt * k1), fm);
    const Vector k3 = rhs(tm, eu + 0.5 * dt * k2, fm);
    const Vector k4 = rhs(t1, rest(eu + dt * k3), f1);
    traj.col(static_cast<Eigen::Index>(j + 1)) =
        full(u + dt / 6.0 * k1) + dt / 3.0 * rest(k2 + k3) + dt / 6.0 * k4;
  }
  if (!traj.allFinite()) throw DivergenceError("deterministic h-equation produced non-finite values");
  return traj;
}

}  // namespace wiener
