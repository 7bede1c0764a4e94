#include "pirlab/gf.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "pirlab/errors.hpp"

namespace pirlab {

namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<u128>(a) * b) % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Modular inverse by the extended Euclidean algorithm; a must be nonzero mod m.
std::uint32_t inverse_mod(std::uint32_t a, std::uint32_t m) {
  std::int64_t t = 0, new_t = 1;
  std::int64_t r = m, new_r = a;
  while (new_r != 0) {
    std::int64_t quotient = r / new_r;
    t = std::exchange(new_t, t - quotient * new_t);
    r = std::exchange(new_r, r - quotient * new_r);
  }
  if (t < 0) t += m;
  return static_cast<std::uint32_t>(t);
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases make Miller-Rabin deterministic for n < 3.3 * 10^24.
  for (std::uint64_t a : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

PrimeField::PrimeField(std::uint64_t q) : q_(0) {
  if (q >= (std::uint64_t{1} << 32)) {
    throw ParameterError("field modulus " + std::to_string(q) + " exceeds 2^32");
  }
  if (!is_prime(q)) {
    throw ParameterError("field modulus " + std::to_string(q) + " is not prime");
  }
  q_ = static_cast<std::uint32_t>(q);
}

Residue PrimeField::from_signed(std::int64_t v) const noexcept {
  std::int64_t r = v % static_cast<std::int64_t>(q_);
  if (r < 0) r += q_;
  return static_cast<Residue>(r);
}

Residue PrimeField::pow(Residue base, std::uint64_t exp) const noexcept {
  return static_cast<Residue>(powmod(base, exp, q_));
}

Residue PrimeField::inv(Residue a) const {
  if (a % q_ == 0) throw ParameterError("zero has no multiplicative inverse");
  return inverse_mod(a % q_, q_);
}

std::uint32_t smallest_valid_prime(std::uint64_t servers, std::uint64_t codeword_len) {
  std::uint64_t candidate = std::max(servers, codeword_len) + 1;
  while (!is_prime(candidate)) ++candidate;
  if (candidate >= (std::uint64_t{1} << 32)) {
    throw FieldTooSmallError("no prime below 2^32 exceeds " + std::to_string(candidate - 1));
  }
  return static_cast<std::uint32_t>(candidate);
}

void FieldElement::check_same(const FieldElement& o) const {
  if (q_ != o.q_) {
    throw FieldMismatchError("operands from F_" + std::to_string(q_) + " and F_" +
                             std::to_string(o.q_));
  }
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
  check_same(o);
  return {static_cast<Residue>((std::uint64_t{value_} + o.value_) % q_), q_, 0};
}

FieldElement FieldElement::operator-(const FieldElement& o) const {
  check_same(o);
  return {static_cast<Residue>((std::uint64_t{value_} + q_ - o.value_) % q_), q_, 0};
}

FieldElement FieldElement::operator*(const FieldElement& o) const {
  check_same(o);
  return {static_cast<Residue>((std::uint64_t{value_} * o.value_) % q_), q_, 0};
}

FieldElement FieldElement::operator/(const FieldElement& o) const {
  check_same(o);
  return *this * o.inverse();
}

FieldElement FieldElement::operator-() const {
  return {value_ == 0 ? 0 : q_ - value_, q_, 0};
}

FieldElement FieldElement::inverse() const {
  if (value_ == 0) throw ParameterError("zero has no multiplicative inverse");
  return {inverse_mod(value_, q_), q_, 0};
}

FieldElement FieldElement::pow(std::uint64_t exp) const {
  return {static_cast<Residue>(powmod(value_, exp, q_)), q_, 0};
}

}  // namespace pirlab
