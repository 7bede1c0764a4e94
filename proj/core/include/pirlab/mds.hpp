#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "pirlab/linalg.hpp"

namespace pirlab {

/// The (N, K) code every server uses to store its share of each file.
///
/// Holds the K x N generator whose n-th column g_n is server n's encoding
/// vector. Construction only checks the shape; call verify_mds() before
/// relying on the MDS property (protocol setup does).
class StorageCode {
 public:
  explicit StorageCode(FieldMatrix generator);

  // Generator columns (1, x, ..., x^{K-1})^T at x = 1..N. Needs q > N.
  static StorageCode vandermonde(const PrimeField& field, int K, int N);

  const FieldMatrix& generator() const noexcept { return generator_; }
  const PrimeField& field() const noexcept { return generator_.field(); }
  int K() const noexcept { return static_cast<int>(generator_.rows()); }
  int N() const noexcept { return static_cast<int>(generator_.cols()); }

  // Column g_n for 1-based server n.
  std::vector<Residue> column(int server) const;

 private:
  FieldMatrix generator_;
};

// True iff every K columns of the generator are linearly independent.
// Exhaustive over all C(N, K) column subsets.
bool verify_mds(const StorageCode& code);

// First (lexicographic) set of 1-based columns that is dependent, if any.
std::optional<std::vector<int>> find_dependent_columns(const StorageCode& code);

// Row analogue of verify_mds: every cols()-sized subset of rows is invertible.
bool rows_in_general_position(const FieldMatrix& m);

// {"kind": "storage", "K": int, "N": int, "q", "rows", "cols", "entries"}
nlohmann::json storage_code_to_json(const StorageCode& code);
StorageCode storage_code_from_json(const nlohmann::json& j);

/// Reed-Solomon code used to mix the atoms of one file inside a group.
///
/// Stored as the transpose of the generator: an n_code x k_code Vandermonde
/// matrix whose row i is (x_i^0, ..., x_i^{k_code-1}) at x_i = i + 1. Any
/// k_code rows are invertible.
class MixingCode {
 public:
  std::size_t n_code() const noexcept { return matrix_.rows(); }
  std::size_t k_code() const noexcept { return matrix_.cols(); }
  const FieldMatrix& matrix() const noexcept { return matrix_; }
  const PrimeField& field() const noexcept { return matrix_.field(); }

  // message is k_code x s; each of the n_code returned rows is one symbol.
  FieldMatrix encode(const FieldMatrix& message) const { return matrix_ * message; }

 private:
  friend MixingCode rs_code(std::size_t, std::size_t, const PrimeField&);
  explicit MixingCode(FieldMatrix m) : matrix_(std::move(m)) {}
  FieldMatrix matrix_;
};

// Throws FieldTooSmallError when n_code > q - 1, ParameterError unless
// 1 <= k_code <= n_code.
MixingCode rs_code(std::size_t n_code, std::size_t k_code, const PrimeField& field);

/// Erasure decoder prepared for one fixed set of known positions.
///
/// Precomputes the map from the k_code known symbols to the full codeword,
/// so decoding many codewords with the same erasure pattern costs one
/// matrix product each.
class ErasureDecoder {
 public:
  // positions: k_code distinct 0-based codeword positions. Throws ArityError
  // on wrong count, repeats or out-of-range positions.
  ErasureDecoder(const MixingCode& code, std::vector<std::size_t> positions);

  const std::vector<std::size_t>& positions() const noexcept { return positions_; }

  // known: k_code x s, row i holding the symbol at positions()[i].
  // Returns the full n_code x s codeword.
  FieldMatrix decode(const FieldMatrix& known) const;

 private:
  std::vector<std::size_t> positions_;
  FieldMatrix reconstruct_;  // n_code x k_code
};

struct KnownSymbol {
  std::size_t position;         // 0-based
  std::vector<Residue> symbol;  // one codeword symbol (a vector over F_q)
};

// Recovers the full codeword (n_code x symbol length) from exactly k_code
// known symbols, decoded coordinate-wise.
FieldMatrix erasure_decode(const MixingCode& code, const std::vector<KnownSymbol>& known);

}  // namespace pirlab
