#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pirlab/gf.hpp"

namespace pirlab {

// Every randomized routine takes one of these explicitly; nothing in the
// library owns hidden global randomness.
using Rng = std::mt19937_64;

Residue uniform_residue(const PrimeField& field, Rng& rng);

/// Dense row-major matrix over a prime field.
///
/// A value type: copies are deep and operations return new matrices. All
/// entries are kept reduced to [0, q). Binary operations on matrices from
/// different fields throw FieldMismatchError.
class FieldMatrix {
 public:
  FieldMatrix(const PrimeField& field, std::size_t rows, std::size_t cols);

  static FieldMatrix identity(const PrimeField& field, std::size_t n);
  // Entries may be any integers; they are reduced mod q.
  static FieldMatrix from_rows(const PrimeField& field,
                               const std::vector<std::vector<std::int64_t>>& rows);

  const PrimeField& field() const noexcept { return field_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Residue operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  // Stores value mod q.
  void set(std::size_t r, std::size_t c, std::uint64_t value) {
    entries_[r * cols_ + c] = field_.reduce(value);
  }

  std::span<const Residue> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }
  // Callers writing through this span must keep entries below q.
  std::span<Residue> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }
  std::span<const Residue> entries() const { return entries_; }

  FieldMatrix transpose() const;
  FieldMatrix select_rows(std::span<const std::size_t> indices) const;
  FieldMatrix select_cols(std::span<const std::size_t> indices) const;
  FieldMatrix row_block(std::size_t first, std::size_t count) const;
  bool is_zero() const;

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

 private:
  PrimeField field_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Residue> entries_;
};

void require_same_field(const FieldMatrix& a, const FieldMatrix& b);

FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b);
FieldMatrix operator+(const FieldMatrix& a, const FieldMatrix& b);
FieldMatrix operator-(const FieldMatrix& a, const FieldMatrix& b);

// Inner product of two equal-length residue vectors over `field`.
Residue dot(const PrimeField& field, std::span<const Residue> a, std::span<const Residue> b);

std::size_t rank(const FieldMatrix& m);

struct EchelonForm {
  FieldMatrix reduced;                    // reduced row echelon form, zero rows last
  std::vector<std::size_t> pivot_columns;  // one per nonzero row
  std::size_t rank() const { return pivot_columns.size(); }
};

EchelonForm row_reduce(const FieldMatrix& m);

// Returns x with a * x = b. Throws SingularMatrixError if a is singular and
// ShapeError if the shapes do not fit.
FieldMatrix solve(const FieldMatrix& a, const FieldMatrix& b);
FieldMatrix invert(const FieldMatrix& a);

FieldMatrix random_matrix(const PrimeField& field, std::size_t rows, std::size_t cols, Rng& rng);

// Uniform over GL(n, q) by rejection: draw every entry uniformly and accept
// once the draw has full rank. `attempts`, when given, receives the number of
// draws consumed.
FieldMatrix random_full_rank(const PrimeField& field, std::size_t n, Rng& rng,
                             std::size_t* attempts = nullptr);

// {"q": int, "rows": int, "cols": int, "entries": [[...], ...]}
nlohmann::json matrix_to_json(const FieldMatrix& m);
// Throws ShapeError for malformed input and ParameterError for a bad q.
FieldMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace pirlab
