#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "wiener/operators.hpp"

namespace wiener {

struct SolveOptions {
  std::size_t index_cap = IndexSet::kDefaultCap;
  /// Upper bound on coefficient storage; larger requests raise CapExceeded.
  std::size_t memory_cap_bytes = std::size_t{3} << 30;
  /// Keep every `stride`-th grid column (and the last) of each coefficient
  /// trajectory once its level is no longer needed. 1 keeps everything.
  std::size_t stride = 1;
  /// Weights for the reported weighted norm; derived from C_k when absent.
  std::optional<WeightSequence> weights;
  /// Precomputed C_k; estimated when empty and weights are absent.
  std::vector<double> ck;
  double r_exponent = -2.5;
  unsigned workers = 1;
  std::uint64_t seed = 0;
};

struct SolutionStats {
  std::vector<double> mean_norm;       ///< ||u_(0)(t)||_H
  std::vector<double> second_moment;   ///< sum_alpha ||u_alpha(t)||_H^2
  std::vector<double> weighted_norm;   ///< sum_alpha q^{2 r alpha} ||u_alpha(t)||_V^2 / |alpha|!
  Eigen::MatrixXd mode_second_moment;  ///< dim x times, sum_alpha |u_alpha,i(t)|^2
  std::vector<double> order_energy_end;  ///< sum_{|alpha| = n} ||u_alpha(T)||_H^2
};

/// Propagator coefficients u_alpha(t) for all alpha in the truncation box.
class PropagatorSolution {
 public:
  [[nodiscard]] const EvolutionProblem& problem() const noexcept { return *problem_; }
  [[nodiscard]] const std::shared_ptr<const EvolutionProblem>& problem_ptr() const noexcept { return problem_; }
  [[nodiscard]] const IndexSet& index() const noexcept { return *index_; }
  [[nodiscard]] const std::shared_ptr<const IndexSet>& index_ptr() const noexcept { return index_; }

  /// Grid indices of the stored trajectory columns.
  [[nodiscard]] const std::vector<std::size_t>& stored_steps() const noexcept { return stored_; }
  [[nodiscard]] bool full_trajectories() const noexcept { return stored_.size() == problem_->steps + 1; }
  /// Coefficient trajectory: dim x stored_steps().size().
  [[nodiscard]] const Matrix& trajectory(std::size_t ordinal) const { return trajectories_.at(ordinal); }
  [[nodiscard]] const Matrix& trajectory(const MultiIndex& alpha) const;
  /// Level-zero trajectory at every grid time (the mean).
  [[nodiscard]] const Matrix& mean() const noexcept { return mean_; }
  /// Chaos series at stored column `column`.
  [[nodiscard]] ChaosSeries snapshot(std::size_t column) const;

  [[nodiscard]] const std::vector<double>& ck() const noexcept { return ck_; }
  [[nodiscard]] const WeightSequence& weights() const noexcept { return *weights_; }
  [[nodiscard]] double r_exponent() const noexcept { return r_; }
  [[nodiscard]] const SolutionStats& stats() const noexcept { return stats_; }

 private:
  friend PropagatorSolution solve(std::shared_ptr<const EvolutionProblem>, const SolveOptions&);

  std::shared_ptr<const EvolutionProblem> problem_;
  std::shared_ptr<const IndexSet> index_;
  std::vector<std::size_t> stored_;
  std::vector<Matrix> trajectories_;
  Matrix mean_;
  std::vector<double> ck_;
  std::optional<WeightSequence> weights_;
  double r_ = -2.5;
  SolutionStats stats_;
};

/// Solve the propagator system level by level in graded order.
PropagatorSolution solve(std::shared_ptr<const EvolutionProblem> problem, const SolveOptions& options = {});

/// C_k estimates for k = 1..K.
std::vector<double> estimate_all_Ck(const EvolutionProblem& problem, std::uint64_t seed = 0);

/// Q = {2k(1 + C_k)} from C_k estimates.
WeightSequence default_weights(const std::vector<double>& ck);

/// int_0^T sum_alpha q^{2 r alpha} ||u_alpha(t)||_V^2 / |alpha|! dt by the
/// trapezoid rule over the stored columns, optionally only up to order `max_order`.
double solution_norm_sq(const PropagatorSolution& sol, const WeightSequence& q, double r,
                        std::optional<unsigned> max_order = std::nullopt);
/// The same with the solution's own weights and exponent, over the full grid.
double solution_norm_sq(const PropagatorSolution& sol);

struct Moments {
  Matrix mean;                  ///< dim x (nt + 1): E u(t) in coefficients
  Eigen::MatrixXd second_moment;  ///< dim x (nt + 1): E |u_i(t)|^2
};
Moments mean_and_moments(const PropagatorSolution& sol);

struct KvReport {
  std::vector<double> max_deviation;     ///< per level, max |U_n - q^alpha u_alpha| / max(1, scale)
  std::vector<double> scale;             ///< per level, max |q^alpha u_alpha|
  std::vector<std::vector<Matrix>> levels;  ///< U_n trajectories, one per alpha of order n
};

/// Rebuild the weighted solution level by level through
/// U_0 = u_(0), U_{n+1} = int Phi (delta(M^Q U_n) + data_{n+1}) with M^Q_k = q_k M_k,
/// and compare with q^alpha u_alpha.
KvReport kv_recursion(const PropagatorSolution& sol, const WeightSequence& q, unsigned n_max);

/// Contribution of each order n to sum_alpha u_alpha h^alpha / sqrt(alpha!), over stored columns.
std::vector<Matrix> u_h_pairing_by_order(const PropagatorSolution& sol, const DirectionH& h);
/// sum_alpha u_alpha h^alpha / sqrt(alpha!); requires smallness_radius(h, weights) to exist.
Matrix u_h_pairing(const PropagatorSolution& sol, const DirectionH& h);

}  // namespace wiener
