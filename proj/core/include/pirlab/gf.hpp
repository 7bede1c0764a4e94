#pragma once

#include <cstdint>
#include <string>

namespace pirlab {

// Residues are plain machine integers in [0, q). The modulus lives in the
// PrimeField context, never on the element, except for the checked
// FieldElement wrapper below.
using Residue = std::uint32_t;

// Deterministic for all n < 2^32.
bool is_prime(std::uint64_t n);

/// Arithmetic in F_q for a prime q < 2^32 chosen at runtime.
///
/// Immutable after construction; every operation is pure. Products are
/// formed in 64 bits and reduced, so no operation can overflow.
class PrimeField {
 public:
  // Throws ParameterError unless q is a prime below 2^32.
  explicit PrimeField(std::uint64_t q);

  std::uint32_t modulus() const noexcept { return q_; }

  Residue reduce(std::uint64_t v) const noexcept { return static_cast<Residue>(v % q_); }
  Residue from_signed(std::int64_t v) const noexcept;

  Residue add(Residue a, Residue b) const noexcept {
    std::uint64_t s = std::uint64_t{a} + b;
    return static_cast<Residue>(s >= q_ ? s - q_ : s);
  }
  Residue sub(Residue a, Residue b) const noexcept {
    return a >= b ? a - b : static_cast<Residue>(std::uint64_t{a} + q_ - b);
  }
  Residue neg(Residue a) const noexcept { return a == 0 ? 0 : q_ - a; }
  Residue mul(Residue a, Residue b) const noexcept {
    return static_cast<Residue>((std::uint64_t{a} * b) % q_);
  }
  Residue pow(Residue base, std::uint64_t exp) const noexcept;
  // Throws ParameterError for a == 0.
  Residue inv(Residue a) const;

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  std::uint32_t q_;
};

// Factory matching the library's naming for the field constructor.
inline PrimeField field_new(std::uint64_t q) { return PrimeField(q); }

// Smallest prime strictly greater than max(servers, codeword_len). Such a q
// admits distinct nonzero evaluation points for both the (N, K) storage code
// and a Reed-Solomon code of length codeword_len.
std::uint32_t smallest_valid_prime(std::uint64_t servers, std::uint64_t codeword_len);

// Value-carrying element used where operands from different fields could
// meet (user-facing arithmetic, tests). Mixing moduli throws
// FieldMismatchError.
class FieldElement {
 public:
  FieldElement(const PrimeField& field, std::uint64_t value)
      : value_(field.reduce(value)), q_(field.modulus()) {}

  Residue value() const noexcept { return value_; }
  std::uint32_t modulus() const noexcept { return q_; }

  FieldElement operator+(const FieldElement& o) const;
  FieldElement operator-(const FieldElement& o) const;
  FieldElement operator*(const FieldElement& o) const;
  FieldElement operator/(const FieldElement& o) const;
  FieldElement operator-() const;
  FieldElement inverse() const;
  FieldElement pow(std::uint64_t exp) const;

  friend bool operator==(const FieldElement&, const FieldElement&) = default;

 private:
  FieldElement(Residue v, std::uint32_t q, int) : value_(v), q_(q) {}
  void check_same(const FieldElement& o) const;

  Residue value_;
  std::uint32_t q_;
};

}  // namespace pirlab
