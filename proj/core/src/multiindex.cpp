#include "wiener/multiindex.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>

#include "wiener/error.hpp"

namespace wiener {

namespace {

const std::array<double, kMaxFactorialOrder + 1>& factorial_table() {
  static const auto table = [] {
    std::array<double, kMaxFactorialOrder + 1> t{};
    t[0] = 1.0;
    for (unsigned n = 1; n <= kMaxFactorialOrder; ++n) t[n] = t[n - 1] * n;
    return t;
  }();
  return table;
}

}  // namespace

MultiIndex MultiIndex::unit(Position k, std::uint32_t n) {
  if (k == 0) throw ValidationError("multi-index positions start at 1");
  MultiIndex out;
  if (n > 0) {
    out.entries_.emplace_back(k, n);
    out.order_ = n;
  }
  return out;
}

MultiIndex MultiIndex::from_dense(std::span<const unsigned> dense) {
  MultiIndex out;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] == 0) continue;
    out.entries_.emplace_back(static_cast<Position>(i + 1), dense[i]);
    out.order_ += dense[i];
  }
  return out;
}

MultiIndex MultiIndex::from_characteristic(std::span<const Position> positions) {
  std::vector<Position> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end());
  MultiIndex out;
  for (Position k : sorted) {
    if (k == 0) throw ValidationError("multi-index positions start at 1");
    if (!out.entries_.empty() && out.entries_.back().first == k) {
      ++out.entries_.back().second;
    } else {
      out.entries_.emplace_back(k, 1);
    }
  }
  out.order_ = static_cast<unsigned>(sorted.size());
  return out;
}

MultiIndex MultiIndex::parse(std::string_view text) {
  if (text == "0") return {};
  std::vector<Position> positions;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view token = text.substr(start, comma - start);
    Position k = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), k);
    if (ec != std::errc{} || ptr != token.data() + token.size() || k == 0) {
      throw ValidationError("malformed multi-index '" + std::string(text) + "'");
    }
    positions.push_back(k);
    start = comma + 1;
  }
  if (!std::is_sorted(positions.begin(), positions.end())) {
    throw ValidationError("characteristic set must be non-decreasing: '" + std::string(text) + "'");
  }
  return from_characteristic(positions);
}

unsigned MultiIndex::operator[](Position k) const noexcept {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), k,
                                   [](const Entry& e, Position p) { return e.first < p; });
  return (it != entries_.end() && it->first == k) ? it->second : 0;
}

std::vector<unsigned> MultiIndex::dense(Position modes) const {
  std::vector<unsigned> out(modes, 0);
  for (const auto& [k, n] : entries_) {
    if (k <= modes) out[k - 1] = n;
  }
  return out;
}

std::string MultiIndex::to_string() const {
  if (entries_.empty()) return "0";
  std::string out;
  for (const auto& [k, n] : entries_) {
    for (std::uint32_t i = 0; i < n; ++i) {
      if (!out.empty()) out += ',';
      out += std::to_string(k);
    }
  }
  return out;
}

std::size_t MultiIndex::hash() const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (const auto& [k, n] : entries_) {
    const std::size_t v = (static_cast<std::size_t>(k) << 32) ^ n;
    h ^= std::hash<std::size_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex out;
  out.entries_.reserve(a.entries_.size() + b.entries_.size());
  auto ia = a.entries_.begin();
  auto ib = b.entries_.begin();
  while (ia != a.entries_.end() || ib != b.entries_.end()) {
    if (ib == b.entries_.end() || (ia != a.entries_.end() && ia->first < ib->first)) {
      out.entries_.push_back(*ia++);
    } else if (ia == a.entries_.end() || ib->first < ia->first) {
      out.entries_.push_back(*ib++);
    } else {
      out.entries_.emplace_back(ia->first, ia->second + ib->second);
      ++ia;
      ++ib;
    }
  }
  out.order_ = a.order_ + b.order_;
  return out;
}

MultiIndex add_one(const MultiIndex& alpha, MultiIndex::Position k) {
  return alpha + MultiIndex::unit(k);
}

std::optional<MultiIndex> sub_one(const MultiIndex& alpha, MultiIndex::Position k) {
  auto it = std::lower_bound(alpha.entries_.begin(), alpha.entries_.end(), k,
                             [](const MultiIndex::Entry& e, MultiIndex::Position p) { return e.first < p; });
  if (it == alpha.entries_.end() || it->first != k) return std::nullopt;
  MultiIndex out = alpha;
  auto pos = out.entries_.begin() + (it - alpha.entries_.begin());
  if (--pos->second == 0) out.entries_.erase(pos);
  --out.order_;
  return out;
}

std::strong_ordering graded_compare(const MultiIndex& a, const MultiIndex& b) {
  if (a.order() != b.order()) return a.order() <=> b.order();
  // Same order: the first differing position decides, larger multiplicity first.
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t i = 0;
  for (; i < ea.size() && i < eb.size(); ++i) {
    if (ea[i] == eb[i]) continue;
    if (ea[i].first != eb[i].first) {
      // a has a non-zero entry at a smaller position, where b is zero.
      return ea[i].first < eb[i].first ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return ea[i].second > eb[i].second ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  // Equal orders and a common prefix imply equal lengths.
  return std::strong_ordering::equal;
}

double factorial(unsigned n) {
  if (n > kMaxFactorialOrder) {
    throw ValidationError("factorial overflow guard: order " + std::to_string(n) + " > 150");
  }
  return factorial_table()[n];
}

double factorial(const MultiIndex& alpha) {
  if (alpha.order() > kMaxFactorialOrder) {
    throw ValidationError("factorial overflow guard: |alpha| = " + std::to_string(alpha.order()) + " > 150");
  }
  double out = 1.0;
  for (const auto& [k, n] : alpha.entries()) out *= factorial_table()[n];
  return out;
}

double binomial(unsigned n, unsigned k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (unsigned i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

double multinomial_ratio(const MultiIndex& alpha, const MultiIndex& beta) {
  double out = 1.0;
  for (const auto& [k, n] : alpha.entries()) {
    const unsigned m = beta[k];
    if (m > 0) out *= binomial(n + m, n);
  }
  return out;
}

std::vector<MultiIndex::Position> characteristic_set(const MultiIndex& alpha) {
  if (alpha.is_zero()) throw ValidationError("characteristic set of (0) is undefined");
  std::vector<MultiIndex::Position> out;
  out.reserve(alpha.order());
  for (const auto& [k, n] : alpha.entries()) out.insert(out.end(), n, k);
  return out;
}

double power(const MultiIndex& alpha, std::span<const double> b) {
  double out = 1.0;
  for (const auto& [k, n] : alpha.entries()) {
    if (k > b.size()) throw ValidationError("power: base sequence does not cover position " + std::to_string(k));
    const double base = b[k - 1];
    if (!(base > 0.0)) throw ValidationError("power: non-positive base at position " + std::to_string(k));
    out *= std::pow(base, static_cast<double>(n));
  }
  return out;
}

double monomial(const MultiIndex& alpha, std::span<const double> h) {
  double out = 1.0;
  for (const auto& [k, n] : alpha.entries()) {
    if (k > h.size()) return 0.0;
    out *= std::pow(h[k - 1], static_cast<double>(n));
  }
  return out;
}

double two_n_factor(const MultiIndex& alpha, double r) {
  double out = 1.0;
  for (const auto& [k, n] : alpha.entries()) out *= std::pow(2.0 * k, r * n);
  return out;
}

namespace {

// Compositions of `remaining` into positions pos..K, larger leading entries first.
void compose(unsigned remaining, unsigned pos, unsigned modes, std::vector<unsigned>& dense,
             std::vector<MultiIndex>& out) {
  if (pos == modes) {
    dense[pos - 1] = remaining;
    out.push_back(MultiIndex::from_dense(dense));
    dense[pos - 1] = 0;
    return;
  }
  for (unsigned v = remaining + 1; v-- > 0;) {
    dense[pos - 1] = v;
    compose(remaining - v, pos + 1, modes, dense, out);
  }
  dense[pos - 1] = 0;
}

}  // namespace

std::vector<MultiIndex> enumerate(const TruncationBox& box) {
  if (box.max_modes == 0) throw ValidationError("truncation box needs at least one mode");
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(box.cardinality()));
  std::vector<unsigned> dense(box.max_modes, 0);
  for (unsigned n = 0; n <= box.max_order; ++n) compose(n, 1, box.max_modes, dense, out);
  return out;
}

IndexSet::IndexSet(TruncationBox box, std::size_t cap) : box_(box) {
  if (box.max_modes == 0) throw ValidationError("truncation box needs at least one mode");
  if (box.cardinality() > static_cast<double>(cap)) {
    throw CapExceeded("truncation box N=" + std::to_string(box.max_order) + ", K=" +
                      std::to_string(box.max_modes) + " has " +
                      std::to_string(static_cast<long long>(box.cardinality())) +
                      " indices, above the cap of " + std::to_string(cap));
  }
  indices_ = enumerate(box);
  lookup_.reserve(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) lookup_.emplace(indices_[i], i);

  const std::size_t modes = box.max_modes;
  lower_.assign(indices_.size() * modes, npos);
  raise_.assign(indices_.size() * modes, npos);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    for (MultiIndex::Position k = 1; k <= modes; ++k) {
      if (auto lo = sub_one(indices_[i], k)) lower_[i * modes + (k - 1)] = find(*lo);
      if (indices_[i].order() < box.max_order) raise_[i * modes + (k - 1)] = find(add_one(indices_[i], k));
    }
  }
  level_start_.assign(box.max_order + 2, indices_.size());
  for (std::size_t i = indices_.size(); i-- > 0;) level_start_[indices_[i].order()] = i;
}

std::shared_ptr<const IndexSet> IndexSet::make(TruncationBox box, std::size_t cap) {
  return std::make_shared<const IndexSet>(box, cap);
}

std::size_t IndexSet::find(const MultiIndex& alpha) const {
  const auto it = lookup_.find(alpha);
  return it == lookup_.end() ? npos : it->second;
}

std::pair<std::size_t, std::size_t> IndexSet::level(unsigned n) const {
  if (n > box_.max_order) return {indices_.size(), indices_.size()};
  return {level_start_[n], level_start_[n + 1]};
}

}  // namespace wiener
