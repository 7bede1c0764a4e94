#pragma once

#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

namespace pirlab {

// Exact rational with arbitrary-precision parts, always in lowest terms with
// a positive denominator.
class Rational {
 public:
  using Int = boost::multiprecision::cpp_int;

  Rational() : num_(0), den_(1) {}
  Rational(Int num, Int den = 1);  // NOLINT: implicit from integers is intended
  Rational(long long v) : num_(v), den_(1) {}  // NOLINT

  const Int& numerator() const noexcept { return num_; }
  const Int& denominator() const noexcept { return den_; }

  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);
  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  // "6/11"; integers render without a denominator.
  std::string str() const;
  // Fixed-point rendering rounded half-to-even.
  std::string decimal(int places) const;
  double to_double() const;

 private:
  void normalize();
  Int num_;
  Int den_;
};

// (1 + R + ... + R^(M-1))^-1; equals 1 for M = 1.
Rational inverse_geometric_sum(const Rational& ratio, int M);

// R = 1 - C(N-T, K) / C(N, K).
Rational rate_scheme(int N, int K, int T, int M);
// (N - K - T + 1) / N.
Rational rate_fgh(int N, int K, int T);
// R = (T + K - 1) / N.
Rational conjectured_capacity(int N, int K, int T, int M);
// Known capacity when K = 1 (R = T/N) or T = 1 (R = K/N). Throws
// NotDegenerateError when K >= 2 and T >= 2.
Rational degenerate_capacity(int N, int K, int T, int M);
// D / (D + d (M - 1)).
Rational rate_sunjafar(int D, int d, int M);
// C(N-T, K) / C(N, K): the limit of rate_scheme as M grows.
Rational scheme_rate_limit(int N, int K, int T);

struct TableRow {
  int M = 0;
  Rational r1;
  Rational r2;
  std::optional<Rational> r3;
  Rational c;
  std::string order;  // e.g. "R3>C>R1>R2"; ties render as "="
};

std::vector<TableRow> compare_table(int N, int K, int T, int M_min, int M_max,
                                    std::optional<std::pair<int, int>> sunjafar_dims = std::nullopt);
// Header "M,R1,R2,R3,C,order" (R3 only when present), values to 4 places.
std::string table_csv(const std::vector<TableRow>& rows);
nlohmann::json table_json(const std::vector<TableRow>& rows);

// Largest M with rate_scheme >= rate_fgh, or nullopt when rate_fgh does not
// exceed the limit C(N-T, K)/C(N, K) and the scheme wins for every M.
std::optional<int> threshold_M(int N, int K, int T);

}  // namespace pirlab
