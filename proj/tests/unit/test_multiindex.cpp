#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "wiener/error.hpp"
#include "wiener/multiindex.hpp"

using wiener::MultiIndex;
using wiener::TruncationBox;

namespace {

using Dense = std::vector<unsigned>;

MultiIndex from(std::initializer_list<unsigned> dense) {
  Dense d(dense);
  return MultiIndex::from_dense(d);
}

// Brute-force enumeration by nested loops over dense prefixes.
std::vector<Dense> brute_force(unsigned n, unsigned k) {
  std::vector<Dense> out;
  Dense cur(k, 0);
  std::function<void(unsigned, unsigned)> rec = [&](unsigned pos, unsigned left) {
    if (pos == k) {
      out.push_back(cur);
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      cur[pos] = v;
      rec(pos + 1, left - v);
    }
    cur[pos] = 0;
  };
  rec(0, n);
  return out;
}

double naive_factorial(unsigned n) {
  double f = 1.0;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

TEST_CASE("enumerate small boxes") {
  auto e0 = wiener::enumerate({0, 3});
  REQUIRE(e0.size() == 1);
  CHECK(e0[0].is_zero());

  auto e1 = wiener::enumerate({1, 2});
  REQUIRE(e1.size() == 3);
  CHECK(e1[0] == MultiIndex{});
  CHECK(e1[1] == MultiIndex::unit(1));
  CHECK(e1[2] == MultiIndex::unit(2));

  auto e2 = wiener::enumerate({2, 2});
  CHECK(e2.size() == 6);
  CHECK(e2.size() == static_cast<std::size_t>(wiener::binomial(4, 2)));
}

TEST_CASE("enumerate matches nested loops and is graded") {
  for (unsigned n = 0; n <= 5; ++n) {
    for (unsigned k = 1; k <= 5; ++k) {
      auto list = wiener::enumerate({n, k});
      auto brute = brute_force(n, k);
      REQUIRE(list.size() == brute.size());
      CHECK(static_cast<double>(list.size()) == TruncationBox{n, k}.cardinality());
      std::set<Dense> expected(brute.begin(), brute.end());
      std::set<Dense> got;
      for (const auto& a : list) got.insert(a.dense(k));
      CHECK(got == expected);
      CHECK(list.front().is_zero());
      for (std::size_t i = 1; i < list.size(); ++i) {
        CHECK(list[i - 1].order() <= list[i].order());
        CHECK(wiener::graded_less(list[i - 1], list[i]));
      }
    }
  }
}

TEST_CASE("index set neighbours and levels") {
  wiener::IndexSet set({4, 3});
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(set.find(set[i]) == i);
    for (MultiIndex::Position k = 1; k <= 3; ++k) {
      auto lo = wiener::sub_one(set[i], k);
      if (lo) {
        REQUIRE(set.lower(i, k) != wiener::IndexSet::npos);
        CHECK(set[set.lower(i, k)] == *lo);
      } else {
        CHECK(set.lower(i, k) == wiener::IndexSet::npos);
      }
      auto up = wiener::add_one(set[i], k);
      if (up.order() <= 4) {
        CHECK(set[set.raise(i, k)] == up);
      } else {
        CHECK(set.raise(i, k) == wiener::IndexSet::npos);
      }
    }
  }
  for (unsigned n = 0; n <= 4; ++n) {
    auto [first, last] = set.level(n);
    CHECK(last - first == static_cast<std::size_t>(wiener::binomial(n + 2, 2)));
    for (auto i = first; i < last; ++i) CHECK(set.order(i) == n);
  }
  CHECK(set.find(MultiIndex::unit(4)) == wiener::IndexSet::npos);
}

TEST_CASE("index cap is enforced") {
  CHECK_THROWS_AS(wiener::IndexSet({10, 10}, 1000), wiener::CapExceeded);
  CHECK_NOTHROW(wiener::IndexSet({2, 2}, 6));
  CHECK_THROWS_AS(wiener::IndexSet({2, 2}, 5), wiener::CapExceeded);
}

TEST_CASE("add and sub_one") {
  auto a = from({1, 0, 2});
  CHECK(MultiIndex{} + a == a);
  CHECK(MultiIndex::unit(1) + MultiIndex::unit(1) == MultiIndex::unit(1, 2));
  CHECK(a + from({0, 1, 1}) == from({1, 1, 3}));
  CHECK((a + from({0, 1, 1})).order() == 5);

  CHECK(wiener::sub_one(MultiIndex::unit(1, 2), 1) == MultiIndex::unit(1));
  CHECK_FALSE(wiener::sub_one(MultiIndex::unit(2), 1).has_value());
  CHECK(wiener::sub_one(a, 3) == from({1, 0, 1}));
  CHECK(wiener::sub_one(MultiIndex::unit(1), 1) == MultiIndex{});
  CHECK(wiener::add_one(MultiIndex{}, 4) == MultiIndex::unit(4));
}

TEST_CASE("canonical form") {
  auto a = from({0, 3, 0, 1, 0, 0});
  REQUIRE(a.entries().size() == 2);
  CHECK(a.entries()[0] == MultiIndex::Entry{2, 3});
  CHECK(a.entries()[1] == MultiIndex::Entry{4, 1});
  CHECK(a.order() == 4);
  CHECK(a == from({0, 3, 0, 1}));
  CHECK(a[1] == 0);
  CHECK(a[2] == 3);
  CHECK(a.max_position() == 4);
  CHECK(from({0, 0}).is_zero());
}

TEST_CASE("factorial") {
  CHECK(wiener::factorial(MultiIndex{}) == 1.0);
  CHECK(wiener::factorial(MultiIndex::unit(1, 3)) == 6.0);
  CHECK(wiener::factorial(from({1, 0, 2})) == 2.0);
  for (unsigned n = 0; n <= 22; ++n) CHECK(wiener::factorial(n) == naive_factorial(n));
  CHECK_THROWS_AS(wiener::factorial(151u), wiener::ValidationError);
  CHECK_THROWS_AS(wiener::factorial(MultiIndex::unit(2, 151)), wiener::ValidationError);
  CHECK(std::isfinite(wiener::factorial(150u)));
}

TEST_CASE("characteristic set") {
  auto a = from({1, 0, 2, 0, 0, 1, 0, 3});
  std::vector<MultiIndex::Position> expected{1, 3, 3, 6, 8, 8, 8};
  CHECK(wiener::characteristic_set(a) == expected);
  CHECK(a.to_string() == "1,3,3,6,8,8,8");
  CHECK(wiener::characteristic_set(MultiIndex::unit(5)) == std::vector<MultiIndex::Position>{5});
  CHECK(wiener::characteristic_set(MultiIndex::unit(2, 3)) == std::vector<MultiIndex::Position>{2, 2, 2});
  CHECK_THROWS(wiener::characteristic_set(MultiIndex{}));

  for (const auto& alpha : wiener::enumerate({5, 4})) {
    if (alpha.is_zero()) continue;
    auto ks = wiener::characteristic_set(alpha);
    CHECK(ks.size() == alpha.order());
    CHECK(std::is_sorted(ks.begin(), ks.end()));
    CHECK(MultiIndex::from_characteristic(ks) == alpha);
  }
}

TEST_CASE("text encoding") {
  CHECK(MultiIndex{}.to_string() == "0");
  CHECK(MultiIndex::parse("0").is_zero());
  CHECK(MultiIndex::parse("1,3,3") == from({1, 0, 2}));
  CHECK_THROWS(MultiIndex::parse("3,1,3"));
  for (const auto& alpha : wiener::enumerate({4, 4})) CHECK(MultiIndex::parse(alpha.to_string()) == alpha);
  CHECK_THROWS(MultiIndex::parse(""));
  CHECK_THROWS(MultiIndex::parse("1,,2"));
  CHECK_THROWS(MultiIndex::parse("0,1"));
  CHECK_THROWS(MultiIndex::parse("x"));
}

TEST_CASE("power and two_n_factor") {
  std::vector<double> b{2.0, 3.0};
  CHECK(wiener::power(MultiIndex{}, b) == 1.0);
  CHECK(wiener::power(from({2, 1}), b) == 12.0);

  auto a = from({1, 0, 2, 0, 0, 1, 0, 3});
  std::vector<double> bk{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(wiener::power(a, bk) == 27648.0);
  double over_set = 1.0;
  for (auto k : wiener::characteristic_set(a)) over_set *= bk[k - 1];
  CHECK(over_set == 27648.0);

  std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS(wiener::power(MultiIndex::unit(2), bad));

  CHECK(wiener::two_n_factor(MultiIndex{}, 1.7) == 1.0);
  CHECK(wiener::two_n_factor(MultiIndex::unit(2), 2.0) == doctest::Approx(16.0));
  CHECK(wiener::two_n_factor(MultiIndex::unit(1, 2), -1.0) == doctest::Approx(0.25));
}

TEST_CASE("sum of orders and factorial superadditivity") {
  auto all = wiener::enumerate({4, 3});
  for (const auto& a : all) {
    for (const auto& b : all) {
      auto s = a + b;
      CHECK(s.order() == a.order() + b.order());
      CHECK(wiener::factorial(s) >= wiener::factorial(a) * wiener::factorial(b));
      double ratio = wiener::factorial(s) / (wiener::factorial(a) * wiener::factorial(b));
      CHECK(wiener::multinomial_ratio(a, b) == doctest::Approx(ratio).epsilon(1e-14));
      CHECK(std::abs(ratio - std::round(ratio)) < 1e-9);
    }
  }
}

TEST_CASE("order factorial bounded by weighted index factorial") {
  for (const auto& alpha : wiener::enumerate({8, 8})) {
    double lhs = wiener::factorial(alpha.order());
    double rhs = wiener::factorial(alpha) * wiener::two_n_factor(alpha, 2.0);
    CHECK(lhs <= rhs);
  }
}

TEST_CASE("summability of (2N)^{-r alpha}") {
  auto sum = [](unsigned k, double r) {
    double s = 0.0;
    for (const auto& a : wiener::enumerate({k, k})) s += wiener::two_n_factor(a, -r);
    return s;
  };

  for (unsigned k = 2; k <= 7; ++k) {
    double prev = sum(k, 0.0);
    for (double r : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
      double cur = sum(k, r);
      CHECK(cur <= prev);
      prev = cur;
    }
  }

  // The finite sums approach prod_k 1/(1 - (2k)^{-r}); for large r the tail
  // beyond a few modes is below the third significant digit.
  auto three_digits = [](double x) {
    int e = static_cast<int>(std::floor(std::log10(std::abs(x))));
    double scale = std::pow(10.0, 2 - e);
    return std::round(x * scale) / scale;
  };
  for (double r : {3.0, 4.0}) {
    double s8 = sum(8, r);
    double s9 = sum(9, r);
    CHECK(three_digits(s8) == three_digits(s9));
    CHECK(std::abs(s9 - s8) / s9 < 5e-4);
  }

  // For r <= 1 the sums keep growing by a visible amount.
  double d1 = sum(9, 1.0) - sum(8, 1.0);
  CHECK(d1 / sum(9, 1.0) > 1e-2);
}
