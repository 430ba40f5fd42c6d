#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "wiener/multiindex.hpp"

namespace wiener {

using Complex = std::complex<double>;

enum class SpaceKind { scalar, real_grid, fourier_modes };

/// Finite-dimensional coefficient space X with a weighted inner product.
///
/// For `fourier_modes` the entries are the normalized Fourier coefficients
/// c_j of a periodic function u(x) = sum_j c_j exp(i y_j x) on [0, L), so that
/// the weight L realizes the L2 norm through Parseval. The V and V' norms of
/// the spectral triple carry the extra factors (1 + y^2)^{+1} and (1 + y^2)^{-1}.
class CoefficientSpace {
 public:
  static CoefficientSpace scalar();
  static CoefficientSpace real_grid(std::size_t nx, double length);
  static CoefficientSpace fourier_modes(std::size_t nx, double length);

  [[nodiscard]] SpaceKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t dim() const noexcept { return weights_.size(); }
  [[nodiscard]] double length() const noexcept { return length_; }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  /// Wavenumbers y_j in FFT order; all zero for non-Fourier spaces.
  [[nodiscard]] std::span<const double> wavenumbers() const noexcept { return wavenumbers_; }
  /// Uniform grid points x_j = j L / nx (Fourier and real-grid spaces).
  [[nodiscard]] std::vector<double> grid() const;

  [[nodiscard]] double norm_sq(std::span<const Complex> v) const;
  [[nodiscard]] double v_norm_sq(std::span<const Complex> v) const;
  [[nodiscard]] double dual_norm_sq(std::span<const Complex> v) const;
  /// sum_j w_j a_j conj(b_j).
  [[nodiscard]] Complex inner(std::span<const Complex> a, std::span<const Complex> b) const;

  friend bool operator==(const CoefficientSpace& a, const CoefficientSpace& b) {
    return a.kind_ == b.kind_ && a.length_ == b.length_ && a.weights_ == b.weights_;
  }

 private:
  SpaceKind kind_ = SpaceKind::scalar;
  double length_ = 1.0;
  std::vector<double> weights_{1.0};
  std::vector<double> wavenumbers_{0.0};
};

/// What a chaos operation does with mass that falls outside its target box.
enum class BoxPolicy {
  strict,    ///< throw TruncationError if any non-zero coefficient would be dropped
  truncate,  ///< drop it and report the dropped squared norm
  extend,    ///< enlarge the target box so nothing is dropped
};

struct BoxReport {
  double dropped_norm_sq = 0.0;
};

/// Truncated formal series sum_alpha eta_alpha xi_alpha with coefficients in X.
class ChaosSeries {
 public:
  ChaosSeries(CoefficientSpace space, std::shared_ptr<const IndexSet> index);
  ChaosSeries(CoefficientSpace space, TruncationBox box);

  /// Deterministic element: only the (0) coefficient is set.
  static ChaosSeries deterministic(CoefficientSpace space, TruncationBox box, std::span<const Complex> value);
  /// Scalar basis element xi_alpha.
  static ChaosSeries basis(const MultiIndex& alpha, TruncationBox box);
  /// Scalar constant 1.
  static ChaosSeries unit(TruncationBox box);

  [[nodiscard]] const CoefficientSpace& space() const noexcept { return space_; }
  [[nodiscard]] const IndexSet& index() const noexcept { return *index_; }
  [[nodiscard]] const std::shared_ptr<const IndexSet>& index_ptr() const noexcept { return index_; }
  [[nodiscard]] const TruncationBox& box() const noexcept { return index_->box(); }
  [[nodiscard]] std::size_t dim() const noexcept { return space_.dim(); }

  [[nodiscard]] std::span<Complex> coeff(std::size_t ordinal) {
    return {data_.data() + ordinal * dim(), dim()};
  }
  [[nodiscard]] std::span<const Complex> coeff(std::size_t ordinal) const {
    return {data_.data() + ordinal * dim(), dim()};
  }
  /// Coefficient vector of alpha; throws when alpha lies outside the box.
  [[nodiscard]] std::span<Complex> at(const MultiIndex& alpha);
  /// Component of the alpha coefficient, zero when alpha lies outside the box.
  [[nodiscard]] Complex value(const MultiIndex& alpha, std::size_t component = 0) const;

  [[nodiscard]] std::span<const Complex> data() const noexcept { return data_; }
  [[nodiscard]] std::span<Complex> data() noexcept { return data_; }

  /// True when every coefficient except (0) has norm <= tol.
  [[nodiscard]] bool is_deterministic(double tol = 0.0) const;
  /// Highest order carrying a non-zero coefficient (0 for the zero series).
  [[nodiscard]] unsigned support_order() const;

  /// Copy into another box; mass outside the new box follows `policy`
  /// (`extend` is treated as `strict` because the target box is given).
  [[nodiscard]] ChaosSeries reboxed(TruncationBox box, BoxPolicy policy = BoxPolicy::strict,
                                    BoxReport* report = nullptr) const;

  ChaosSeries& operator+=(const ChaosSeries& other);
  ChaosSeries& operator-=(const ChaosSeries& other);
  ChaosSeries& operator*=(Complex s);
  friend ChaosSeries operator+(ChaosSeries a, const ChaosSeries& b) { return a += b; }
  friend ChaosSeries operator-(ChaosSeries a, const ChaosSeries& b) { return a -= b; }
  friend ChaosSeries operator*(Complex s, ChaosSeries a) { return a *= s; }

 private:
  void require_compatible(const ChaosSeries& other) const;

  CoefficientSpace space_;
  std::shared_ptr<const IndexSet> index_;
  std::vector<Complex> data_;
};

/// f = sum_k f_k (x) u_k with each f_k a chaos series over a shared box.
class UChaosSeries {
 public:
  UChaosSeries(CoefficientSpace space, std::shared_ptr<const IndexSet> index, unsigned modes);

  [[nodiscard]] unsigned modes() const noexcept { return static_cast<unsigned>(components_.size()); }
  [[nodiscard]] const IndexSet& index() const noexcept { return components_.front().index(); }
  [[nodiscard]] const CoefficientSpace& space() const noexcept { return components_.front().space(); }
  /// Component k, 1-based.
  [[nodiscard]] ChaosSeries& component(unsigned k) { return components_.at(k - 1); }
  [[nodiscard]] const ChaosSeries& component(unsigned k) const { return components_.at(k - 1); }

 private:
  std::vector<ChaosSeries> components_;
};

/// Weight sequence Q = {q_k >= 1}.
class WeightSequence {
 public:
  static WeightSequence constant(double c);
  /// q_k = values[k-1] for k <= values.size(), `tail` afterwards.
  static WeightSequence list(std::vector<double> values, double tail);
  /// q_k = 2k(1 + C_k), taking C_k = 0 beyond the list.
  static WeightSequence derived(std::vector<double> c);

  [[nodiscard]] double operator()(MultiIndex::Position k) const;
  /// q^{r alpha} = prod_k q_k^{r alpha_k}.
  [[nodiscard]] double power(const MultiIndex& alpha, double r) const;
  [[nodiscard]] std::vector<double> values(std::size_t modes) const;

 private:
  enum class Rule { constant, list, derived };
  WeightSequence(Rule rule, std::vector<double> values, double tail)
      : rule_(rule), values_(std::move(values)), tail_(tail) {}

  Rule rule_;
  std::vector<double> values_;
  double tail_;
};

/// Finitely supported direction h = sum_k h_k u_k in the noise space.
struct DirectionH {
  std::vector<double> coords;

  [[nodiscard]] double norm() const;
  /// ||Lambda_Q^s h|| = sqrt(sum_k q_k^{2s} h_k^2).
  [[nodiscard]] double weighted_norm(const WeightSequence& q, double s) const;
};

/// Probabilists' Hermite polynomial H_n(x) by forward recurrence, n <= 60.
double hermite(unsigned n, double x);
/// xi_alpha(z) = prod_k H_{alpha_k}(z_k) / sqrt(alpha_k!), z[k-1] = z_k.
double xi_eval(const MultiIndex& alpha, std::span<const double> z);
/// sum_alpha eta_alpha xi_alpha(z).
std::vector<Complex> evaluate(const ChaosSeries& eta, std::span<const double> z);

/// (F <> G)_alpha = sum_{beta+gamma=alpha} sqrt(alpha!/(beta! gamma!)) F_beta G_gamma.
///
/// One factor must be scalar-valued, or both must live on the same real grid
/// (pointwise product). With `extend` the result box has order N_F + N_G;
/// otherwise it keeps F's order.
ChaosSeries wick_product(const ChaosSeries& f, const ChaosSeries& g, BoxPolicy policy = BoxPolicy::strict,
                         BoxReport* report = nullptr);

/// (DF)_{k,alpha} = sqrt(alpha_k + 1) F_{alpha + eps_k}, k = 1..modes, over F's box.
UChaosSeries malliavin(const ChaosSeries& f, unsigned modes);

/// (delta f)_alpha = sum_k sqrt(alpha_k) f_{k, alpha - eps_k}.
///
/// With `extend` the result box has order N + 1; otherwise it keeps f's order.
ChaosSeries skorokhod(const UChaosSeries& f, BoxPolicy policy = BoxPolicy::extend, BoxReport* report = nullptr);

/// sum_alpha q^{2 r alpha} ||eta_alpha||_X^2 / |alpha|!.
double weighted_norm_sq(const ChaosSeries& eta, const WeightSequence& q, double r);

/// ||E_alpha||^2 in the Lambda_Q^r-weighted tensor norm: q^{2 r alpha} |alpha|! alpha!.
double tensor_basis_norm_sq(const MultiIndex& alpha, const WeightSequence& q, double r);

/// The same norm computed order by order from the multiple-integral form:
/// ||eta_0||^2 + sum_n ||eta_n||_{Q,r}^2 / (n!)^2 with
/// ||eta_n||_{Q,r}^2 = sum_{|alpha|=n} ||eta_alpha||^2 ||E_alpha||_{Q,r}^2 / alpha!.
double graded_norm_sq(const ChaosSeries& eta, const WeightSequence& q, double r);

/// e_n = sum_{|alpha|=n} ||eta_alpha||_X^2, n = 0..N.
std::vector<double> order_energy(const ChaosSeries& eta);

struct DualPairing {
  std::vector<Complex> value;  ///< sum_alpha eta_alpha zeta_alpha
  double dual_norm_sq = 0.0;   ///< sum_alpha |alpha|! q^{-2 r alpha} |zeta_alpha|^2
};

/// <<eta, zeta>> for scalar zeta, over the common part of both boxes.
DualPairing dual_pairing(const ChaosSeries& eta, const ChaosSeries& zeta, const WeightSequence& q, double r);

/// Stochastic exponential coefficients h^alpha / sqrt(alpha!) over the box.
ChaosSeries stoch_exp(const DirectionH& h, TruncationBox box);

/// Largest s in {0.25, 0.5, 1, 2, 4, 8} with ||Lambda_Q^s h|| < 1.
std::optional<double> smallness_radius(const DirectionH& h, const WeightSequence& q);

/// CSV dump: alpha,component_index,re,im in canonical order.
void write_csv(std::ostream& os, const ChaosSeries& eta);

}  // namespace wiener
