#include "pirlab/rates.hpp"

#include <algorithm>
#include <sstream>

#include "pirlab/errors.hpp"

namespace pirlab {

namespace {

using Int = Rational::Int;

Int big_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  Int result = 1;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

void check_regime(int N, int K, int T) {
  if (N < 1 || K < 1 || T < 1) throw ParameterError("N, K and T must all be at least 1");
  if (T + K > N) throw UnsupportedRegimeError("rates are defined only for T + K <= N");
}

void check_files(int M) {
  if (M < 1) throw ParameterError("M must be at least 1");
}

}  // namespace

Rational::Rational(Int num, Int den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_ == 0) throw ParameterError("rational with zero denominator");
  normalize();
}

void Rational::normalize() {
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  Int g = boost::multiprecision::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

Rational& Rational::operator+=(const Rational& o) {
  num_ = num_ * o.den_ + o.num_ * den_;
  den_ *= o.den_;
  normalize();
  return *this;
}

Rational& Rational::operator-=(const Rational& o) {
  num_ = num_ * o.den_ - o.num_ * den_;
  den_ *= o.den_;
  normalize();
  return *this;
}

Rational& Rational::operator*=(const Rational& o) {
  num_ *= o.num_;
  den_ *= o.den_;
  normalize();
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.num_ == 0) throw ParameterError("division by zero rational");
  num_ *= o.den_;
  den_ *= o.num_;
  normalize();
  return *this;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const Int lhs = a.num_ * b.den_;
  const Int rhs = b.num_ * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::str() const {
  if (den_ == 1) return num_.str();
  return num_.str() + "/" + den_.str();
}

std::string Rational::decimal(int places) const {
  Int scale = boost::multiprecision::pow(Int(10), static_cast<unsigned>(places));
  Int magnitude = boost::multiprecision::abs(num_) * scale;
  Int quotient = magnitude / den_;
  Int remainder = magnitude % den_;
  const Int twice = remainder * 2;
  if (twice > den_ || (twice == den_ && (quotient % 2) == 1)) quotient += 1;

  std::string digits = quotient.str();
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places)) {
      digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  }
  if (num_ < 0 && quotient != 0) digits.insert(0, "-");
  return digits;
}

double Rational::to_double() const {
  return std::stod(decimal(17));
}

Rational inverse_geometric_sum(const Rational& ratio, int M) {
  check_files(M);
  Rational sum = 0;
  Rational term = 1;
  for (int i = 0; i < M; ++i) {
    sum += term;
    term *= ratio;
  }
  return Rational(1) / sum;
}

Rational scheme_rate_limit(int N, int K, int T) {
  check_regime(N, K, T);
  return Rational(big_binomial(N - T, K), big_binomial(N, K));
}

Rational rate_scheme(int N, int K, int T, int M) {
  check_files(M);
  return inverse_geometric_sum(Rational(1) - scheme_rate_limit(N, K, T), M);
}

Rational rate_fgh(int N, int K, int T) {
  check_regime(N, K, T);
  return Rational(N - K - T + 1, N);
}

Rational conjectured_capacity(int N, int K, int T, int M) {
  check_regime(N, K, T);
  return inverse_geometric_sum(Rational(T + K - 1, N), M);
}

Rational degenerate_capacity(int N, int K, int T, int M) {
  check_regime(N, K, T);
  if (K >= 2 && T >= 2) {
    throw NotDegenerateError("capacity is known only when K = 1 or T = 1");
  }
  // K = 1 gives T/N, T = 1 gives K/N; both give 1/N.
  const int numerator = (K == 1) ? T : K;
  return inverse_geometric_sum(Rational(numerator, N), M);
}

Rational rate_sunjafar(int D, int d, int M) {
  if (D < 1 || d < 1) throw ParameterError("D and d must be at least 1");
  check_files(M);
  return Rational(D, Int(D) + Int(d) * (M - 1));
}

std::vector<TableRow> compare_table(int N, int K, int T, int M_min, int M_max,
                                    std::optional<std::pair<int, int>> sunjafar_dims) {
  check_regime(N, K, T);
  check_files(M_min);
  if (M_max < M_min) throw ParameterError("empty M range");
  std::vector<TableRow> rows;
  const Rational r2 = rate_fgh(N, K, T);
  for (int M = M_min; M <= M_max; ++M) {
    TableRow row;
    row.M = M;
    row.r1 = rate_scheme(N, K, T, M);
    row.r2 = r2;
    if (sunjafar_dims) row.r3 = rate_sunjafar(sunjafar_dims->first, sunjafar_dims->second, M);
    row.c = conjectured_capacity(N, K, T, M);

    std::vector<std::pair<std::string, Rational>> columns = {{"R1", row.r1}, {"R2", row.r2}};
    if (row.r3) columns.emplace_back("R3", *row.r3);
    columns.emplace_back("C", row.c);
    std::stable_sort(columns.begin(), columns.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i > 0) row.order += columns[i - 1].second > columns[i].second ? ">" : "=";
      row.order += columns[i].first;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string table_csv(const std::vector<TableRow>& rows) {
  const bool with_r3 = !rows.empty() && rows.front().r3.has_value();
  std::ostringstream os;
  os << (with_r3 ? "M,R1,R2,R3,C,order\n" : "M,R1,R2,C,order\n");
  for (const auto& r : rows) {
    os << r.M << ',' << r.r1.decimal(4) << ',' << r.r2.decimal(4) << ',';
    if (with_r3) os << r.r3->decimal(4) << ',';
    os << r.c.decimal(4) << ',' << r.order << '\n';
  }
  return os.str();
}

nlohmann::json table_json(const std::vector<TableRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"M", r.M},
                        {"R1", {{"exact", r.r1.str()}, {"decimal", r.r1.decimal(4)}}},
                        {"R2", {{"exact", r.r2.str()}, {"decimal", r.r2.decimal(4)}}},
                        {"C", {{"exact", r.c.str()}, {"decimal", r.c.decimal(4)}}},
                        {"order", r.order}};
    if (r.r3) j["R3"] = {{"exact", r.r3->str()}, {"decimal", r.r3->decimal(4)}};
    out.push_back(std::move(j));
  }
  return out;
}

std::optional<int> threshold_M(int N, int K, int T) {
  const Rational r2 = rate_fgh(N, K, T);
  const Rational limit = scheme_rate_limit(N, K, T);
  if (!(r2 > limit)) return std::nullopt;
  // rate_scheme is strictly decreasing towards `limit` < r2, so the scan ends.
  const Rational ratio = Rational(1) - limit;
  Rational sum = 1;
  Rational term = 1;
  int M = 1;
  while (true) {
    term *= ratio;
    Rational next_sum = sum + term;
    if (Rational(1) / next_sum < r2) return M;
    sum = std::move(next_sum);
    ++M;
  }
}

}  // namespace pirlab
