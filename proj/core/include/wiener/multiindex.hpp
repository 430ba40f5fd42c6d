#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wiener {

/// Finitely supported sequence of non-negative integers (alpha_1, alpha_2, ...).
///
/// Stored sparsely as (position, multiplicity) pairs with positions starting
/// at 1, strictly increasing, and every multiplicity >= 1. The empty index is
/// the zero multi-index (0).
class MultiIndex {
 public:
  using Position = std::uint32_t;
  using Entry = std::pair<Position, std::uint32_t>;

  MultiIndex() = default;

  /// n * epsilon_k.
  static MultiIndex unit(Position k, std::uint32_t n = 1);
  /// From the dense prefix (alpha_1, ..., alpha_K).
  static MultiIndex from_dense(std::span<const unsigned> dense);
  /// From a characteristic set; entries need not be sorted.
  static MultiIndex from_characteristic(std::span<const Position> positions);
  /// Parses "0" or a comma separated characteristic set such as "1,3,3".
  static MultiIndex parse(std::string_view text);

  [[nodiscard]] unsigned order() const noexcept { return order_; }
  [[nodiscard]] bool is_zero() const noexcept { return entries_.empty(); }
  [[nodiscard]] std::span<const Entry> entries() const noexcept { return entries_; }
  /// Largest position with a non-zero entry, 0 for (0).
  [[nodiscard]] Position max_position() const noexcept {
    return entries_.empty() ? 0 : entries_.back().first;
  }
  [[nodiscard]] unsigned operator[](Position k) const noexcept;
  [[nodiscard]] std::vector<unsigned> dense(Position modes) const;

  /// "0" or the characteristic set joined by commas.
  [[nodiscard]] std::string to_string() const;
  [[nodiscard]] std::size_t hash() const noexcept;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  friend MultiIndex operator+(const MultiIndex&, const MultiIndex&);
  friend MultiIndex add_one(const MultiIndex&, Position);
  friend std::optional<MultiIndex> sub_one(const MultiIndex&, Position);

  std::vector<Entry> entries_;
  unsigned order_ = 0;
};

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
/// alpha + epsilon_k.
MultiIndex add_one(const MultiIndex& alpha, MultiIndex::Position k);
/// alpha - epsilon_k, or nullopt when alpha_k = 0.
std::optional<MultiIndex> sub_one(const MultiIndex& alpha, MultiIndex::Position k);

/// Canonical order: by |alpha|, then by (alpha_1, alpha_2, ...) with larger
/// leading entries first, so that epsilon_1 precedes epsilon_2.
std::strong_ordering graded_compare(const MultiIndex& a, const MultiIndex& b);
inline bool graded_less(const MultiIndex& a, const MultiIndex& b) {
  return graded_compare(a, b) < 0;
}

inline constexpr unsigned kMaxFactorialOrder = 150;

/// n! in double precision (exact for n <= 22); throws for n > 150.
double factorial(unsigned n);
/// alpha! = prod_k alpha_k!; throws when |alpha| > 150.
double factorial(const MultiIndex& alpha);
/// (alpha + beta)! / (alpha! beta!) as a product of per-position binomials.
double multinomial_ratio(const MultiIndex& alpha, const MultiIndex& beta);
double binomial(unsigned n, unsigned k);

/// Non-decreasing tuple in which k appears alpha_k times. Throws on (0).
std::vector<MultiIndex::Position> characteristic_set(const MultiIndex& alpha);

/// prod_k b_k^{alpha_k} with b[k-1] = b_k. Requires positive bases on the support.
double power(const MultiIndex& alpha, std::span<const double> b);
/// prod_k h_k^{alpha_k} for arbitrary real h (the monomial h^alpha).
double monomial(const MultiIndex& alpha, std::span<const double> h);
/// (2N)^{r alpha} = prod_k (2k)^{r alpha_k}.
double two_n_factor(const MultiIndex& alpha, double r);

struct TruncationBox {
  unsigned max_order = 0;
  unsigned max_modes = 1;

  [[nodiscard]] bool contains(const MultiIndex& alpha) const noexcept {
    return alpha.order() <= max_order && alpha.max_position() <= max_modes;
  }
  /// binomial(N + K, K).
  [[nodiscard]] double cardinality() const { return binomial(max_order + max_modes, max_modes); }
  friend bool operator==(const TruncationBox&, const TruncationBox&) = default;
};

/// All alpha in the box, in canonical graded order; the first entry is (0).
std::vector<MultiIndex> enumerate(const TruncationBox& box);

/// An enumerated truncation box with ordinal lookup and neighbour tables.
///
/// Ordinals follow the canonical enumeration order, so every order level
/// occupies a contiguous ordinal range.
class IndexSet {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  static constexpr std::size_t kDefaultCap = 100000;

  explicit IndexSet(TruncationBox box, std::size_t cap = kDefaultCap);
  static std::shared_ptr<const IndexSet> make(TruncationBox box, std::size_t cap = kDefaultCap);

  [[nodiscard]] const TruncationBox& box() const noexcept { return box_; }
  [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }
  [[nodiscard]] const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  [[nodiscard]] const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
  [[nodiscard]] std::size_t find(const MultiIndex& alpha) const;
  [[nodiscard]] unsigned order(std::size_t i) const { return indices_[i].order(); }

  /// Ordinal of alpha_i - epsilon_k, or npos. k in 1..max_modes.
  [[nodiscard]] std::size_t lower(std::size_t i, MultiIndex::Position k) const {
    return lower_[i * box_.max_modes + (k - 1)];
  }
  /// Ordinal of alpha_i + epsilon_k, or npos when it leaves the box.
  [[nodiscard]] std::size_t raise(std::size_t i, MultiIndex::Position k) const {
    return raise_[i * box_.max_modes + (k - 1)];
  }
  /// Half-open ordinal range [first, last) of indices with |alpha| = n.
  [[nodiscard]] std::pair<std::size_t, std::size_t> level(unsigned n) const;

 private:
  struct Hash {
    std::size_t operator()(const MultiIndex& a) const noexcept { return a.hash(); }
  };

  TruncationBox box_;
  std::vector<MultiIndex> indices_;
  std::unordered_map<MultiIndex, std::size_t, Hash> lookup_;
  std::vector<std::size_t> lower_;
  std::vector<std::size_t> raise_;
  std::vector<std::size_t> level_start_;
};

}  // namespace wiener
