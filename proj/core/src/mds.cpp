#include "pirlab/mds.hpp"

#include <algorithm>
#include <string>

#include "pirlab/combinatorics.hpp"
#include "pirlab/errors.hpp"

namespace pirlab {

StorageCode::StorageCode(FieldMatrix generator) : generator_(std::move(generator)) {
  if (generator_.rows() == 0 || generator_.cols() == 0) {
    throw ShapeError("storage generator must be K x N with K, N >= 1");
  }
  if (generator_.rows() > generator_.cols()) {
    throw ShapeError("storage generator has K > N");
  }
}

StorageCode StorageCode::vandermonde(const PrimeField& field, int K, int N) {
  if (K < 1 || N < K) throw ParameterError("Vandermonde storage code needs 1 <= K <= N");
  if (static_cast<std::uint64_t>(N) >= field.modulus()) {
    throw FieldTooSmallError("Vandermonde storage code needs q > N");
  }
  FieldMatrix g(field, static_cast<std::size_t>(K), static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    Residue power = 1;
    for (int k = 0; k < K; ++k) {
      g.set(static_cast<std::size_t>(k), static_cast<std::size_t>(n), power);
      power = field.mul(power, static_cast<Residue>(n + 1));
    }
  }
  return StorageCode(std::move(g));
}

std::vector<Residue> StorageCode::column(int server) const {
  if (server < 1 || server > N()) throw ParameterError("server index out of range");
  std::vector<Residue> col(generator_.rows());
  for (std::size_t k = 0; k < col.size(); ++k) col[k] = generator_(k, static_cast<std::size_t>(server - 1));
  return col;
}

std::optional<std::vector<int>> find_dependent_columns(const StorageCode& code) {
  const auto& g = code.generator();
  for (const auto& subset : k_subsets(code.N(), code.K())) {
    std::vector<std::size_t> cols;
    for (int s : subset) cols.push_back(static_cast<std::size_t>(s - 1));
    if (rank(g.select_cols(cols)) < cols.size()) return subset;
  }
  return std::nullopt;
}

bool verify_mds(const StorageCode& code) { return !find_dependent_columns(code).has_value(); }

bool rows_in_general_position(const FieldMatrix& m) {
  const auto k = static_cast<int>(m.cols());
  if (m.rows() < m.cols()) return false;
  for (const auto& subset : k_subsets(static_cast<int>(m.rows()), k)) {
    std::vector<std::size_t> rows;
    for (int s : subset) rows.push_back(static_cast<std::size_t>(s - 1));
    if (rank(m.select_rows(rows)) < rows.size()) return false;
  }
  return true;
}

nlohmann::json storage_code_to_json(const StorageCode& code) {
  auto j = matrix_to_json(code.generator());
  j["kind"] = "storage";
  j["K"] = code.K();
  j["N"] = code.N();
  return j;
}

StorageCode storage_code_from_json(const nlohmann::json& j) {
  if (j.contains("kind") && j.at("kind") != "storage") {
    throw ShapeError("expected a storage code, got kind " + j.at("kind").dump());
  }
  FieldMatrix g = matrix_from_json(j);
  if (j.contains("K") && j.at("K").get<std::size_t>() != g.rows()) {
    throw ShapeError("storage code \"K\" disagrees with generator rows");
  }
  if (j.contains("N") && j.at("N").get<std::size_t>() != g.cols()) {
    throw ShapeError("storage code \"N\" disagrees with generator cols");
  }
  return StorageCode(std::move(g));
}

MixingCode rs_code(std::size_t n_code, std::size_t k_code, const PrimeField& field) {
  if (k_code < 1 || k_code > n_code) throw ParameterError("Reed-Solomon code needs 1 <= k <= n");
  if (n_code > field.modulus() - 1) {
    throw FieldTooSmallError("Reed-Solomon length " + std::to_string(n_code) +
                             " needs q > " + std::to_string(n_code) + ", have q = " +
                             std::to_string(field.modulus()));
  }
  FieldMatrix m(field, n_code, k_code);
  for (std::size_t i = 0; i < n_code; ++i) {
    Residue power = 1;
    const auto x = static_cast<Residue>(i + 1);
    for (std::size_t k = 0; k < k_code; ++k) {
      m.set(i, k, power);
      power = field.mul(power, x);
    }
  }
  return MixingCode(std::move(m));
}

ErasureDecoder::ErasureDecoder(const MixingCode& code, std::vector<std::size_t> positions)
    : positions_(std::move(positions)), reconstruct_(code.field(), 0, 0) {
  if (positions_.size() != code.k_code()) {
    throw ArityError("erasure decoding needs exactly " + std::to_string(code.k_code()) +
                     " known positions, got " + std::to_string(positions_.size()));
  }
  auto sorted = positions_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ArityError("erasure decoding positions must be distinct");
  }
  if (!sorted.empty() && sorted.back() >= code.n_code()) {
    throw ArityError("erasure decoding position out of range");
  }
  // Any k_code rows of the mixing matrix are invertible, so this never throws.
  reconstruct_ = code.matrix() * invert(code.matrix().select_rows(positions_));
}

FieldMatrix ErasureDecoder::decode(const FieldMatrix& known) const {
  if (known.rows() != positions_.size()) {
    throw ArityError("known symbol count differs from prepared positions");
  }
  return reconstruct_ * known;
}

FieldMatrix erasure_decode(const MixingCode& code, const std::vector<KnownSymbol>& known) {
  std::vector<std::size_t> positions;
  positions.reserve(known.size());
  for (const auto& k : known) positions.push_back(k.position);
  ErasureDecoder decoder(code, positions);
  const std::size_t width = known.empty() ? 0 : known.front().symbol.size();
  FieldMatrix values(code.field(), known.size(), width);
  for (std::size_t i = 0; i < known.size(); ++i) {
    if (known[i].symbol.size() != width) throw ShapeError("codeword symbols differ in length");
    for (std::size_t c = 0; c < width; ++c) values.set(i, c, known[i].symbol[c]);
  }
  return decoder.decode(values);
}

}  // namespace pirlab
