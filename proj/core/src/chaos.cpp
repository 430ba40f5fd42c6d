#include "wiener/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "wiener/csv.hpp"
#include "wiener/error.hpp"

namespace wiener {

// ---------------------------------------------------------------------------
// CoefficientSpace

CoefficientSpace CoefficientSpace::scalar() { return {}; }

CoefficientSpace CoefficientSpace::real_grid(std::size_t nx, double length) {
  if (nx == 0 || !(length > 0.0)) throw ValidationError("real grid needs nx >= 1 and L > 0");
  CoefficientSpace s;
  s.kind_ = SpaceKind::real_grid;
  s.length_ = length;
  s.weights_.assign(nx, length / static_cast<double>(nx));
  s.wavenumbers_.assign(nx, 0.0);
  return s;
}

CoefficientSpace CoefficientSpace::fourier_modes(std::size_t nx, double length) {
  if (nx == 0 || !(length > 0.0)) throw ValidationError("Fourier grid needs nx >= 1 and L > 0");
  CoefficientSpace s;
  s.kind_ = SpaceKind::fourier_modes;
  s.length_ = length;
  s.weights_.assign(nx, length);
  s.wavenumbers_.resize(nx);
  const long n = static_cast<long>(nx);
  for (long j = 0; j < n; ++j) {
    const long signed_j = j < (n + 1) / 2 ? j : j - n;
    s.wavenumbers_[static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * static_cast<double>(signed_j) / length;
  }
  return s;
}

std::vector<double> CoefficientSpace::grid() const {
  std::vector<double> x(dim());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = length_ * static_cast<double>(j) / static_cast<double>(dim());
  return x;
}

double CoefficientSpace::norm_sq(std::span<const Complex> v) const {
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) s += weights_[j] * std::norm(v[j]);
  return s;
}

double CoefficientSpace::v_norm_sq(std::span<const Complex> v) const {
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    s += weights_[j] * (1.0 + wavenumbers_[j] * wavenumbers_[j]) * std::norm(v[j]);
  }
  return s;
}

double CoefficientSpace::dual_norm_sq(std::span<const Complex> v) const {
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    s += weights_[j] / (1.0 + wavenumbers_[j] * wavenumbers_[j]) * std::norm(v[j]);
  }
  return s;
}

Complex CoefficientSpace::inner(std::span<const Complex> a, std::span<const Complex> b) const {
  Complex s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += weights_[j] * a[j] * std::conj(b[j]);
  return s;
}

// ---------------------------------------------------------------------------
// ChaosSeries

ChaosSeries::ChaosSeries(CoefficientSpace space, std::shared_ptr<const IndexSet> index)
    : space_(std::move(space)), index_(std::move(index)), data_(index_->size() * space_.dim()) {}

ChaosSeries::ChaosSeries(CoefficientSpace space, TruncationBox box)
    : ChaosSeries(std::move(space), IndexSet::make(box)) {}

ChaosSeries ChaosSeries::deterministic(CoefficientSpace space, TruncationBox box, std::span<const Complex> value) {
  if (value.size() != space.dim()) throw ValidationError("deterministic value has the wrong dimension");
  ChaosSeries out(std::move(space), box);
  std::copy(value.begin(), value.end(), out.coeff(0).begin());
  return out;
}

ChaosSeries ChaosSeries::basis(const MultiIndex& alpha, TruncationBox box) {
  ChaosSeries out(CoefficientSpace::scalar(), box);
  out.at(alpha)[0] = 1.0;
  return out;
}

ChaosSeries ChaosSeries::unit(TruncationBox box) { return basis(MultiIndex{}, box); }

std::span<Complex> ChaosSeries::at(const MultiIndex& alpha) {
  const std::size_t i = index_->find(alpha);
  if (i == IndexSet::npos) throw TruncationError("multi-index " + alpha.to_string() + " lies outside the box");
  return coeff(i);
}

Complex ChaosSeries::value(const MultiIndex& alpha, std::size_t component) const {
  const std::size_t i = index_->find(alpha);
  return i == IndexSet::npos ? Complex{} : coeff(i)[component];
}

bool ChaosSeries::is_deterministic(double tol) const {
  for (std::size_t i = 1; i < index_->size(); ++i) {
    for (const Complex& c : coeff(i)) {
      if (std::abs(c) > tol) return false;
    }
  }
  return true;
}

unsigned ChaosSeries::support_order() const {
  for (std::size_t i = index_->size(); i-- > 0;) {
    for (const Complex& c : coeff(i)) {
      if (c != Complex{}) return index_->order(i);
    }
  }
  return 0;
}

ChaosSeries ChaosSeries::reboxed(TruncationBox box, BoxPolicy policy, BoxReport* report) const {
  ChaosSeries out(space_, box);
  double dropped = 0.0;
  for (std::size_t i = 0; i < index_->size(); ++i) {
    const std::size_t j = out.index().find((*index_)[i]);
    auto src = coeff(i);
    if (j == IndexSet::npos) {
      const double mass = space_.norm_sq(src);
      if (mass > 0.0 && policy != BoxPolicy::truncate) {
        throw TruncationError("coefficient " + (*index_)[i].to_string() + " lies outside the target box");
      }
      dropped += mass;
      continue;
    }
    std::copy(src.begin(), src.end(), out.coeff(j).begin());
  }
  if (report) report->dropped_norm_sq = dropped;
  return out;
}

void ChaosSeries::require_compatible(const ChaosSeries& other) const {
  if (!(space_ == other.space_) || !(box() == other.box())) {
    throw ValidationError("chaos series live in different spaces or boxes");
  }
}

ChaosSeries& ChaosSeries::operator+=(const ChaosSeries& other) {
  require_compatible(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ChaosSeries& ChaosSeries::operator-=(const ChaosSeries& other) {
  require_compatible(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ChaosSeries& ChaosSeries::operator*=(Complex s) {
  for (Complex& c : data_) c *= s;
  return *this;
}

UChaosSeries::UChaosSeries(CoefficientSpace space, std::shared_ptr<const IndexSet> index, unsigned modes) {
  if (modes == 0) throw ValidationError("U-valued series needs at least one mode");
  components_.reserve(modes);
  for (unsigned k = 0; k < modes; ++k) components_.emplace_back(space, index);
}

// ---------------------------------------------------------------------------
// Weights and directions

WeightSequence WeightSequence::constant(double c) {
  if (!(c >= 1.0)) throw ValidationError("weight sequence entries must be >= 1");
  return {Rule::constant, {}, c};
}

WeightSequence WeightSequence::list(std::vector<double> values, double tail) {
  if (!(tail >= 1.0) || std::any_of(values.begin(), values.end(), [](double q) { return !(q >= 1.0); })) {
    throw ValidationError("weight sequence entries must be >= 1");
  }
  return {Rule::list, std::move(values), tail};
}

WeightSequence WeightSequence::derived(std::vector<double> c) {
  if (std::any_of(c.begin(), c.end(), [](double ck) { return !(ck >= 0.0); })) {
    throw ValidationError("derived weights need C_k >= 0");
  }
  return {Rule::derived, std::move(c), 0.0};
}

double WeightSequence::operator()(MultiIndex::Position k) const {
  switch (rule_) {
    case Rule::constant:
      return tail_;
    case Rule::list:
      return k <= values_.size() ? values_[k - 1] : tail_;
    case Rule::derived: {
      const double ck = k <= values_.size() ? values_[k - 1] : 0.0;
      return 2.0 * k * (1.0 + ck);
    }
  }
  return 1.0;
}

double WeightSequence::power(const MultiIndex& alpha, double r) const {
  double out = 1.0;
  for (const auto& [k, n] : alpha.entries()) out *= std::pow((*this)(k), r * n);
  return out;
}

std::vector<double> WeightSequence::values(std::size_t modes) const {
  std::vector<double> out(modes);
  for (std::size_t k = 0; k < modes; ++k) out[k] = (*this)(static_cast<MultiIndex::Position>(k + 1));
  return out;
}

double DirectionH::norm() const {
  double s = 0.0;
  for (double h : coords) s += h * h;
  return std::sqrt(s);
}

double DirectionH::weighted_norm(const WeightSequence& q, double s) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double w = std::pow(q(static_cast<MultiIndex::Position>(k + 1)), s);
    acc += w * w * coords[k] * coords[k];
  }
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Basis evaluation

double hermite(unsigned n, double x) {
  if (n > 60) throw ValidationError("hermite: order " + std::to_string(n) + " > 60");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (unsigned k = 1; k < n; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double xi_eval(const MultiIndex& alpha, std::span<const double> z) {
  double out = 1.0;
  for (const auto& [k, n] : alpha.entries()) {
    if (k > z.size()) throw ValidationError("xi_eval: sample has no coordinate " + std::to_string(k));
    out *= hermite(n, z[k - 1]) / std::sqrt(factorial(n));
  }
  return out;
}

std::vector<Complex> evaluate(const ChaosSeries& eta, std::span<const double> z) {
  std::vector<Complex> out(eta.dim());
  for (std::size_t i = 0; i < eta.index().size(); ++i) {
    const double x = xi_eval(eta.index()[i], z);
    auto c = eta.coeff(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += x * c[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wick calculus

namespace {

bool is_zero(std::span<const Complex> v) {
  return std::all_of(v.begin(), v.end(), [](const Complex& c) { return c == Complex{}; });
}

void deposit(ChaosSeries& out, const MultiIndex& alpha, std::span<const Complex> value, BoxPolicy policy,
             double& dropped) {
  const std::size_t i = out.index().find(alpha);
  if (i == IndexSet::npos) {
    if (is_zero(value)) return;
    if (policy == BoxPolicy::strict) {
      throw TruncationError("result coefficient " + alpha.to_string() + " exceeds the truncation box");
    }
    dropped += out.space().norm_sq(value);
    return;
  }
  auto dst = out.coeff(i);
  for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += value[j];
}

}  // namespace

ChaosSeries wick_product(const ChaosSeries& f, const ChaosSeries& g, BoxPolicy policy, BoxReport* report) {
  const bool f_scalar = f.space().kind() == SpaceKind::scalar;
  const bool g_scalar = g.space().kind() == SpaceKind::scalar;
  const bool same_grid = f.space() == g.space() && f.space().kind() == SpaceKind::real_grid;
  if (!f_scalar && !g_scalar && !same_grid) {
    throw ValidationError("wick_product: incompatible coefficient spaces");
  }
  const CoefficientSpace& out_space = g_scalar ? f.space() : g.space();
  const TruncationBox out_box{
      policy == BoxPolicy::extend ? f.box().max_order + g.box().max_order : f.box().max_order,
      std::max(f.box().max_modes, g.box().max_modes)};
  ChaosSeries out(out_space, out_box);

  const std::size_t dim = out_space.dim();
  std::vector<Complex> term(dim);
  double dropped = 0.0;
  for (std::size_t b = 0; b < f.index().size(); ++b) {
    auto fb = f.coeff(b);
    if (is_zero(fb)) continue;
    const MultiIndex& beta = f.index()[b];
    for (std::size_t c = 0; c < g.index().size(); ++c) {
      auto gc = g.coeff(c);
      if (is_zero(gc)) continue;
      const MultiIndex& gamma = g.index()[c];
      const double scale = std::sqrt(multinomial_ratio(beta, gamma));
      for (std::size_t j = 0; j < dim; ++j) {
        const Complex fv = f_scalar ? fb[0] : fb[j];
        const Complex gv = g_scalar ? gc[0] : gc[j];
        term[j] = scale * fv * gv;
      }
      deposit(out, beta + gamma, term, policy, dropped);
    }
  }
  if (report) report->dropped_norm_sq = dropped;
  return out;
}

UChaosSeries malliavin(const ChaosSeries& f, unsigned modes) {
  UChaosSeries out(f.space(), f.index_ptr(), modes);
  const IndexSet& index = f.index();
  const unsigned box_modes = index.box().max_modes;
  for (unsigned k = 1; k <= std::min(modes, box_modes); ++k) {
    ChaosSeries& dk = out.component(k);
    for (std::size_t i = 0; i < index.size(); ++i) {
      const std::size_t up = index.raise(i, k);
      if (up == IndexSet::npos) continue;
      const double scale = std::sqrt(static_cast<double>(index[i][k] + 1));
      auto src = f.coeff(up);
      auto dst = dk.coeff(i);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = scale * src[j];
    }
  }
  return out;
}

ChaosSeries skorokhod(const UChaosSeries& f, BoxPolicy policy, BoxReport* report) {
  const TruncationBox& in_box = f.index().box();
  const TruncationBox out_box{policy == BoxPolicy::extend ? in_box.max_order + 1 : in_box.max_order,
                              std::max(in_box.max_modes, f.modes())};
  ChaosSeries out(f.space(), out_box);
  std::vector<Complex> term(f.space().dim());
  double dropped = 0.0;
  for (unsigned k = 1; k <= f.modes(); ++k) {
    const ChaosSeries& fk = f.component(k);
    for (std::size_t i = 0; i < fk.index().size(); ++i) {
      auto src = fk.coeff(i);
      if (is_zero(src)) continue;
      const MultiIndex& alpha = fk.index()[i];
      const double scale = std::sqrt(static_cast<double>(alpha[k] + 1));
      for (std::size_t j = 0; j < term.size(); ++j) term[j] = scale * src[j];
      deposit(out, add_one(alpha, k), term, policy, dropped);
    }
  }
  if (report) report->dropped_norm_sq = dropped;
  return out;
}

// ---------------------------------------------------------------------------
// Norms and pairings

double weighted_norm_sq(const ChaosSeries& eta, const WeightSequence& q, double r) {
  double s = 0.0;
  for (std::size_t i = 0; i < eta.index().size(); ++i) {
    const MultiIndex& alpha = eta.index()[i];
    s += q.power(alpha, 2.0 * r) * eta.space().norm_sq(eta.coeff(i)) / factorial(alpha.order());
  }
  return s;
}

double tensor_basis_norm_sq(const MultiIndex& alpha, const WeightSequence& q, double r) {
  return q.power(alpha, 2.0 * r) * factorial(alpha.order()) * factorial(alpha);
}

double graded_norm_sq(const ChaosSeries& eta, const WeightSequence& q, double r) {
  const IndexSet& index = eta.index();
  double total = 0.0;
  for (unsigned n = 0; n <= index.box().max_order; ++n) {
    const auto [first, last] = index.level(n);
    double level = 0.0;
    for (std::size_t i = first; i < last; ++i) {
      level += eta.space().norm_sq(eta.coeff(i)) * tensor_basis_norm_sq(index[i], q, r) / factorial(index[i]);
    }
    const double nf = factorial(n);
    total += level / (nf * nf);
  }
  return total;
}

std::vector<double> order_energy(const ChaosSeries& eta) {
  const IndexSet& index = eta.index();
  std::vector<double> e(index.box().max_order + 1, 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) e[index.order(i)] += eta.space().norm_sq(eta.coeff(i));
  return e;
}

DualPairing dual_pairing(const ChaosSeries& eta, const ChaosSeries& zeta, const WeightSequence& q, double r) {
  if (zeta.space().kind() != SpaceKind::scalar) throw ValidationError("dual_pairing: zeta must be scalar");
  DualPairing out;
  out.value.assign(eta.dim(), Complex{});
  for (std::size_t i = 0; i < zeta.index().size(); ++i) {
    const MultiIndex& alpha = zeta.index()[i];
    const Complex z = zeta.coeff(i)[0];
    out.dual_norm_sq += factorial(alpha.order()) * q.power(alpha, -2.0 * r) * std::norm(z);
    const std::size_t e = eta.index().find(alpha);
    if (e == IndexSet::npos) continue;
    auto c = eta.coeff(e);
    for (std::size_t j = 0; j < out.value.size(); ++j) out.value[j] += c[j] * z;
  }
  return out;
}

ChaosSeries stoch_exp(const DirectionH& h, TruncationBox box) {
  ChaosSeries out(CoefficientSpace::scalar(), box);
  for (std::size_t i = 0; i < out.index().size(); ++i) {
    const MultiIndex& alpha = out.index()[i];
    out.coeff(i)[0] = monomial(alpha, h.coords) / std::sqrt(factorial(alpha));
  }
  return out;
}

std::optional<double> smallness_radius(const DirectionH& h, const WeightSequence& q) {
  static constexpr double kGrid[] = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::optional<double> best;
  for (double s : kGrid) {
    if (h.weighted_norm(q, s) < 1.0) best = s;
  }
  return best;
}

void write_csv(std::ostream& os, const ChaosSeries& eta) {
  csv::Writer w(os, {"alpha", "component_index", "re", "im"});
  for (std::size_t i = 0; i < eta.index().size(); ++i) {
    auto c = eta.coeff(i);
    const std::string alpha = eta.index()[i].to_string();
    for (std::size_t j = 0; j < c.size(); ++j) {
      w.cell(std::string_view(alpha)).cell(static_cast<unsigned long long>(j)).cell(c[j].real()).cell(c[j].imag());
      w.end_row();
    }
  }
}

}  // namespace wiener
