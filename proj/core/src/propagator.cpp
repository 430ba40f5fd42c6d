#include "wiener/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <thread>

#include "wiener/error.hpp"
#include "wiener/stepper.hpp"

namespace wiener {

namespace {

Eigen::Map<const Vector> as_vector(std::span<const Complex> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

// Modes that share a spatial action are summed before the action is applied.
struct ActionGroup {
  const SpatialAction* action;
  std::vector<unsigned> modes;
};

std::vector<ActionGroup> group_modes(const NoiseOperatorFamily& m, unsigned modes) {
  std::vector<ActionGroup> groups;
  std::map<const SpatialAction*, std::size_t> where;
  for (unsigned k = 1; k <= modes; ++k) {
    const SpatialAction* b = m.action(k);
    if (!b) continue;
    auto [it, inserted] = where.emplace(b, groups.size());
    if (inserted) groups.push_back({b, {}});
    groups[it->second].modes.push_back(k);
  }
  return groups;
}

void apply_action(const SpatialAction& b, const Matrix& w, Matrix& out) {
  if (b.is_diagonal()) {
    out += b.diagonal().asDiagonal() * w;
    return;
  }
  for (Eigen::Index j = 0; j < w.cols(); ++j) out.col(j) += b.apply(w.col(j));
}

void run_parallel(std::size_t count, unsigned workers, const auto& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * chunk; i < std::min(count, (w + 1) * chunk); ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double v_norm_col(const CoefficientSpace& space, const Matrix& m, Eigen::Index j) {
  return space.v_norm_sq({m.col(j).data(), static_cast<std::size_t>(m.rows())});
}

double h_norm_col(const CoefficientSpace& space, const Matrix& m, Eigen::Index j) {
  return space.norm_sq({m.col(j).data(), static_cast<std::size_t>(m.rows())});
}

Matrix decimate(const Matrix& full, const std::vector<std::size_t>& keep) {
  Matrix out(full.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = full.col(static_cast<Eigen::Index>(keep[c]));
  return out;
}

}  // namespace

const Matrix& PropagatorSolution::trajectory(const MultiIndex& alpha) const {
  const std::size_t i = index_->find(alpha);
  if (i == IndexSet::npos) throw TruncationError("multi-index outside the truncation box: " + alpha.to_string());
  return trajectories_[i];
}

ChaosSeries PropagatorSolution::snapshot(std::size_t column) const {
  if (column >= stored_.size()) throw ValidationError("snapshot column out of range");
  ChaosSeries out(problem_->space, index_);
  for (std::size_t i = 0; i < index_->size(); ++i) {
    auto dst = out.coeff(i);
    const auto src = trajectories_[i].col(static_cast<Eigen::Index>(column));
    std::copy(src.data(), src.data() + src.size(), dst.begin());
  }
  return out;
}

std::vector<double> estimate_all_Ck(const EvolutionProblem& problem, std::uint64_t seed) {
  std::vector<double> ck;
  std::map<std::pair<const SpatialAction*, unsigned>, double> cache;
  for (unsigned k = 1; k <= problem.box.max_modes; ++k) {
    // Modes with the same action and time profile share C_k.
    const unsigned time_index = problem.m.noise().has_time_modes() ? problem.m.noise().split(k).first : 0;
    const auto key = std::make_pair(problem.m.action(k), time_index);
    if (auto it = cache.find(key); it != cache.end()) {
      ck.push_back(it->second);
      continue;
    }
    const double value = estimate_Ck(problem, k, seed).value;
    cache.emplace(key, value);
    ck.push_back(value);
  }
  return ck;
}

WeightSequence default_weights(const std::vector<double>& ck) {
  for (double c : ck) {
    if (!(c >= 0.0)) throw ValidationError("C_k must be non-negative");
  }
  return WeightSequence::derived(ck);
}

PropagatorSolution solve(std::shared_ptr<const EvolutionProblem> problem, const SolveOptions& options) {
  if (!problem) throw ValidationError("solve needs a problem");
  const EvolutionProblem& p = *problem;
  p.validate();
  if (options.stride == 0) throw ValidationError("stride must be positive");

  PropagatorSolution sol;
  sol.problem_ = problem;
  sol.index_ = IndexSet::make(p.box, options.index_cap);
  const IndexSet& idx = *sol.index_;
  const std::size_t times = p.steps + 1;
  const std::size_t dim = p.space.dim();
  const unsigned modes = p.box.max_modes;

  for (std::size_t j = 0; j < times; j += options.stride) sol.stored_.push_back(j);
  if (sol.stored_.back() != p.steps) sol.stored_.push_back(p.steps);

  std::size_t widest_level = 0;
  for (unsigned n = 0; n <= p.box.max_order; ++n) {
    const auto [b, e] = idx.level(n);
    widest_level = std::max(widest_level, e - b);
  }
  const double full_bytes = static_cast<double>(dim * times * sizeof(Complex));
  const double needed = full_bytes * (2.0 * static_cast<double>(widest_level) + 1.0) +
                        static_cast<double>(idx.size() * dim * sol.stored_.size() * sizeof(Complex));
  if (needed > static_cast<double>(options.memory_cap_bytes)) {
    throw CapExceeded("coefficient storage needs about " + std::to_string(static_cast<long long>(needed / 1048576.0)) +
                      " MiB, above the cap of " + std::to_string(options.memory_cap_bytes >> 20) +
                      " MiB; raise the output stride or shrink the box");
  }

  if (options.weights) {
    sol.ck_ = options.ck;
    sol.weights_ = *options.weights;
  } else {
    sol.ck_ = options.ck.empty() ? estimate_all_Ck(p, options.seed) : options.ck;
    sol.weights_ = default_weights(sol.ck_);
  }
  sol.r_ = options.r_exponent;

  const ExponentialStepper stepper(p.a, p.horizon, p.steps);
  const auto groups = group_modes(p.m, modes);
  Eigen::MatrixXd profile(modes + 1, static_cast<Eigen::Index>(times));
  for (unsigned k = 1; k <= modes; ++k) {
    for (std::size_t j = 0; j < times; ++j) profile(k, static_cast<Eigen::Index>(j)) = p.m.profile(k, p.time(j));
  }

  std::vector<std::size_t> u0_map(idx.size(), IndexSet::npos);
  std::vector<std::size_t> f_map(idx.size(), IndexSet::npos);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    u0_map[i] = p.u0.index().find(idx[i]);
    if (!p.forcing.empty()) f_map[i] = p.forcing.front().index().find(idx[i]);
  }
  // Data outside the box would be silently lost.
  for (std::size_t i = 0; i < p.u0.index().size(); ++i) {
    if (!p.box.contains(p.u0.index()[i]) && as_vector(p.u0.coeff(i)).squaredNorm() > 0.0) {
      throw TruncationError("u0 has mass outside the truncation box at " + p.u0.index()[i].to_string());
    }
  }

  sol.trajectories_.assign(idx.size(), Matrix());
  SolutionStats& st = sol.stats_;
  st.mean_norm.assign(times, 0.0);
  st.second_moment.assign(times, 0.0);
  st.weighted_norm.assign(times, 0.0);
  st.mode_second_moment = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(times));
  st.order_energy_end.assign(p.box.max_order + 1, 0.0);

  const auto integrate_one = [&](std::size_t i) {
    const MultiIndex& alpha = idx[i];
    Matrix g;
    bool forced = false;
    if (f_map[i] != IndexSet::npos) {
      g.setZero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(times));
      for (std::size_t j = 0; j < times; ++j) g.col(static_cast<Eigen::Index>(j)) = as_vector(p.forcing[j].coeff(f_map[i]));
      forced = true;
    }
    for (const auto& group : groups) {
      Matrix w;
      for (unsigned k : group.modes) {
        const unsigned ak = alpha[k];
        if (ak == 0) continue;
        const Matrix& lower = sol.trajectories_[idx.lower(i, k)];
        const Eigen::RowVectorXd c = std::sqrt(static_cast<double>(ak)) * profile.row(k);
        if (w.size() == 0) w.setZero(lower.rows(), lower.cols());
        w += lower * c.asDiagonal();
      }
      if (w.size() == 0) continue;
      if (!forced) {
        g.setZero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(times));
        forced = true;
      }
      apply_action(*group.action, w, g);
    }
    Vector init = Vector::Zero(static_cast<Eigen::Index>(dim));
    if (u0_map[i] != IndexSet::npos) init = as_vector(p.u0.coeff(u0_map[i]));
    stepper.integrate_into(init, forced ? g : Matrix(), sol.trajectories_[i]);
    if (!sol.trajectories_[i].allFinite()) {
      throw DivergenceError("non-finite coefficient for alpha = " + alpha.to_string());
    }
  };

  for (unsigned n = 0; n <= p.box.max_order; ++n) {
    const auto [begin, end] = idx.level(n);
    run_parallel(end - begin, options.workers, [&](std::size_t off) { integrate_one(begin + off); });

    for (std::size_t i = begin; i < end; ++i) {
      const Matrix& u = sol.trajectories_[i];
      const double w = sol.weights_->power(idx[i], 2.0 * sol.r_) / factorial(idx.order(i));
      for (std::size_t j = 0; j < times; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        st.second_moment[j] += h_norm_col(p.space, u, jj);
        st.weighted_norm[j] += w * v_norm_col(p.space, u, jj);
      }
      st.mode_second_moment += u.cwiseAbs2();
      st.order_energy_end[n] += h_norm_col(p.space, u, static_cast<Eigen::Index>(p.steps));
    }
    if (n == 0) {
      sol.mean_ = sol.trajectories_[0];
      for (std::size_t j = 0; j < times; ++j) st.mean_norm[j] = std::sqrt(h_norm_col(p.space, sol.mean_, static_cast<Eigen::Index>(j)));
    }
    if (!sol.full_trajectories() && n > 0) {
      const auto [pb, pe] = idx.level(n - 1);
      for (std::size_t i = pb; i < pe; ++i) sol.trajectories_[i] = decimate(sol.trajectories_[i], sol.stored_);
    }
  }
  if (!sol.full_trajectories()) {
    const auto [lb, le] = idx.level(p.box.max_order);
    for (std::size_t i = lb; i < le; ++i) sol.trajectories_[i] = decimate(sol.trajectories_[i], sol.stored_);
  }
  return sol;
}

double solution_norm_sq(const PropagatorSolution& sol) {
  const auto& w = sol.stats().weighted_norm;
  const double dt = sol.problem().dt();
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += (j == 0 || j + 1 == w.size() ? 0.5 : 1.0) * dt * w[j];
  return s;
}

double solution_norm_sq(const PropagatorSolution& sol, const WeightSequence& q, double r,
                        std::optional<unsigned> max_order) {
  const EvolutionProblem& p = sol.problem();
  const IndexSet& idx = sol.index();
  const auto& cols = sol.stored_steps();
  const unsigned top = std::min(max_order.value_or(p.box.max_order), p.box.max_order);
  std::vector<double> per_time(cols.size(), 0.0);
  const auto [b, e] = idx.level(top);
  (void)b;
  for (std::size_t i = 0; i < e; ++i) {
    const double w = q.power(idx[i], 2.0 * r) / factorial(idx.order(i));
    const Matrix& u = sol.trajectory(i);
    for (std::size_t c = 0; c < cols.size(); ++c) per_time[c] += w * v_norm_col(p.space, u, static_cast<Eigen::Index>(c));
  }
  double s = 0.0;
  for (std::size_t c = 0; c + 1 < cols.size(); ++c) {
    s += 0.5 * (p.time(cols[c + 1]) - p.time(cols[c])) * (per_time[c] + per_time[c + 1]);
  }
  return s;
}

Moments mean_and_moments(const PropagatorSolution& sol) {
  return {sol.mean(), sol.stats().mode_second_moment};
}

KvReport kv_recursion(const PropagatorSolution& sol, const WeightSequence& q, unsigned n_max) {
  const EvolutionProblem& p = sol.problem();
  if (!sol.full_trajectories()) throw ValidationError("kv_recursion needs full coefficient trajectories");
  if (!p.deterministic_data()) throw ValidationError("kv_recursion requires deterministic u0 and forcing");
  if (n_max > p.box.max_order) throw ValidationError("n_max exceeds the chaos order of the solution");
  const IndexSet& idx = sol.index();
  const unsigned modes = p.box.max_modes;
  const std::size_t times = p.steps + 1;
  const auto rows = static_cast<Eigen::Index>(p.space.dim());
  const ExponentialStepper stepper(p.a, p.horizon, p.steps);

  KvReport report;
  const auto compare = [&](unsigned n) {
    const auto [b, e] = idx.level(n);
    double scale = 0.0;
    double dev = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      const double qa = q.power(idx[i], 1.0);
      const Matrix& ref = sol.trajectory(i);
      const Matrix& got = report.levels[n][i - b];
      scale = std::max(scale, qa * ref.cwiseAbs().maxCoeff());
      dev = std::max(dev, (got - qa * ref).cwiseAbs().maxCoeff());
    }
    report.scale.push_back(scale);
    report.max_deviation.push_back(dev / std::max(1.0, scale));
  };

  report.levels.push_back({sol.trajectory(0)});
  compare(0);
  for (unsigned n = 0; n < n_max; ++n) {
    const auto small = IndexSet::make(TruncationBox{n, modes});
    const auto [b, e] = idx.level(n);
    const auto [nb, ne] = idx.level(n + 1);
    std::vector<Matrix> forcing(ne - nb, Matrix::Zero(rows, static_cast<Eigen::Index>(times)));
    for (std::size_t j = 0; j < times; ++j) {
      const double t = p.time(j);
      UChaosSeries mu(p.space, small, modes);
      for (std::size_t i = b; i < e; ++i) {
        const std::size_t slot = small->find(idx[i]);
        const Vector u = report.levels[n][i - b].col(static_cast<Eigen::Index>(j));
        for (unsigned k = 1; k <= modes; ++k) {
          const Vector v = q(k) * p.m.apply(k, t, u);
          auto dst = mu.component(k).coeff(slot);
          std::copy(v.data(), v.data() + v.size(), dst.begin());
        }
      }
      const ChaosSeries d = skorokhod(mu, BoxPolicy::extend);
      for (std::size_t i = nb; i < ne; ++i) {
        forcing[i - nb].col(static_cast<Eigen::Index>(j)) = as_vector(d.coeff(d.index().find(idx[i])));
      }
    }
    std::vector<Matrix> level;
    for (std::size_t i = nb; i < ne; ++i) {
      const double qa = q.power(idx[i], 1.0);
      Matrix& g = forcing[i - nb];
      if (!p.forcing.empty()) {
        const std::size_t fi = p.forcing.front().index().find(idx[i]);
        if (fi != IndexSet::npos) {
          for (std::size_t j = 0; j < times; ++j) g.col(static_cast<Eigen::Index>(j)) += qa * as_vector(p.forcing[j].coeff(fi));
        }
      }
      Vector init = Vector::Zero(rows);
      const std::size_t ui = p.u0.index().find(idx[i]);
      if (ui != IndexSet::npos) init = qa * as_vector(p.u0.coeff(ui));
      level.push_back(stepper.integrate(init, g));
    }
    report.levels.push_back(std::move(level));
    compare(n + 1);
  }
  return report;
}

std::vector<Matrix> u_h_pairing_by_order(const PropagatorSolution& sol, const DirectionH& h) {
  const IndexSet& idx = sol.index();
  const auto rows = static_cast<Eigen::Index>(sol.problem().space.dim());
  const auto cols = static_cast<Eigen::Index>(sol.stored_steps().size());
  std::vector<Matrix> out;
  for (unsigned n = 0; n <= sol.problem().box.max_order; ++n) {
    Matrix acc = Matrix::Zero(rows, cols);
    const auto [b, e] = idx.level(n);
    for (std::size_t i = b; i < e; ++i) {
      const double c = monomial(idx[i], h.coords) / std::sqrt(factorial(idx[i]));
      if (c != 0.0) acc += c * sol.trajectory(i);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

Matrix u_h_pairing(const PropagatorSolution& sol, const DirectionH& h) {
  if (!smallness_radius(h, sol.weights())) {
    throw ValidationError("direction h is too large for the weight sequence (no smallness radius)");
  }
  const auto parts = u_h_pairing_by_order(sol, h);
  Matrix total = parts.front();
  for (std::size_t n = 1; n < parts.size(); ++n) total += parts[n];
  return total;
}

}  // namespace wiener
