#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pirlab/gf.hpp"

namespace pirlab {

// Sorted, duplicate-free set of 1-based file indices.
using FileSet = std::vector<int>;
// Sorted set of 1-based server indices; a slot is identified by one of these.
using ServerSet = std::vector<int>;

/// (N, K, T, M, q) and everything derived from it.
///
///   c = C(N, K), p = C(N - T, K)
///   alpha, beta: smallest positive integers with alpha * c = (alpha + beta) * (c - p)
///   L = c * (alpha + beta)^(M - 1)
struct SchemeParams {
  int N = 0;
  int K = 0;
  int T = 0;
  int M = 0;
  std::uint32_t q = 0;
  std::uint64_t c = 0;
  std::uint64_t p = 0;
  std::uint64_t alpha = 0;
  std::uint64_t beta = 0;
  std::uint64_t L = 0;

  PrimeField field() const { return PrimeField(q); }
  // Length and dimension of the mixing code: (alpha + beta) c and alpha c.
  std::uint64_t mixing_length() const { return (alpha + beta) * c; }
  std::uint64_t mixing_dimension() const { return alpha * c; }
  // Slots of one block that involve a given server: C(N - 1, K - 1).
  std::uint64_t slots_per_server() const;
  // Smallest admissible modulus is the next prime above this.
  std::uint64_t field_bound() const;

  friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

// Throws UnsupportedRegimeError when T + K > N and ParameterError for
// non-positive arguments.
std::pair<std::uint64_t, std::uint64_t> compute_alpha_beta(int N, int K, int T);
std::uint64_t compute_L(const SchemeParams& params);

// Validates and derives everything. Without q the smallest valid prime is
// used; an explicit q must be prime (ParameterError) and above field_bound()
// (FieldTooSmallError).
SchemeParams make_params(int N, int K, int T, int M, std::optional<std::uint64_t> q = std::nullopt);

// alpha^(M - t) beta^(t - 1): blocks per label of size t.
std::uint64_t blocks_per_label(const SchemeParams& params, int label_size);
// beta^-1 ((alpha + beta)^M - alpha^M)
std::uint64_t total_blocks(const SchemeParams& params);

nlohmann::json params_to_json(const SchemeParams& params);

struct Block {
  std::size_t index = 0;    // position in canonical order
  FileSet label;
  std::size_t replica = 0;  // 0-based among blocks with this label
};

struct SlotRef {
  std::size_t block = 0;
  std::size_t slot = 0;  // index into QueryPlan::slots()
  friend bool operator==(const SlotRef&, const SlotRef&) = default;
};

/// alpha blocks labelled by base_label plus beta blocks labelled by
/// base_label + {1}. position_map[i] is the (block, slot) holding mixing
/// codeword position i: plain blocks first, then mixed, each by
/// (block index, slot).
struct Group {
  FileSet base_label;
  std::vector<std::size_t> plain_blocks;
  std::vector<std::size_t> mixed_blocks;
  std::vector<SlotRef> position_map;
};

// Canonical label order: larger sets first, then lexicographic.
bool label_precedes(const FileSet& a, const FileSet& b);
// Every nonempty subset of {1..M} in canonical order.
std::vector<FileSet> all_labels(int M);

std::vector<Block> enumerate_blocks(const SchemeParams& params);
std::vector<Group> form_groups(const SchemeParams& params, const std::vector<Block>& blocks);

/// The public, deterministic query structure for a parameter set. The
/// desired file is always internal file 1.
class QueryPlan {
 public:
  explicit QueryPlan(const SchemeParams& params);

  const SchemeParams& params() const noexcept { return params_; }
  // The C(N, K) K-subsets of servers, lexicographic. Every block has one
  // slot per entry.
  const std::vector<ServerSet>& slots() const noexcept { return slots_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const std::vector<Group>& groups() const noexcept { return groups_; }

  std::size_t slot_count() const noexcept { return blocks_.size() * slots_.size(); }
  std::size_t slot_id(std::size_t block, std::size_t slot) const { return block * slots_.size() + slot; }
  SlotRef slot_ref(std::size_t slot_id) const { return {slot_id / slots_.size(), slot_id % slots_.size()}; }

  // Blocks whose label contains file 1, in canonical order. Block
  // desired_blocks()[i] carries desired atoms i*c .. i*c + c - 1.
  const std::vector<std::size_t>& desired_blocks() const noexcept { return desired_blocks_; }
  // Group containing the block, if any. Blocks labelled {1} are in none.
  std::optional<std::size_t> group_of_block(std::size_t block) const;

 private:
  SchemeParams params_;
  std::vector<ServerSet> slots_;
  std::vector<Block> blocks_;
  std::vector<Group> groups_;
  std::vector<std::size_t> desired_blocks_;
  std::vector<std::optional<std::size_t>> group_of_block_;
};

nlohmann::json plan_to_json(const QueryPlan& plan);

/// Display form of the slot structure: a C(N-1, K-1) x N array in which
/// every row partitions the servers and each K-subset appears exactly once.
/// Only possible when K divides N; otherwise `aligned` is false and only the
/// flat subset list is filled.
struct AssistingArray {
  bool aligned = false;
  std::vector<std::vector<int>> rows;  // rows[r][n - 1]: symbol at server n
  std::vector<ServerSet> subsets;      // subsets[s - 1]: servers sharing symbol s
  std::string text() const;
};

AssistingArray render_assisting_array(int N, int K);
nlohmann::json assisting_array_to_json(const AssistingArray& array);

}  // namespace pirlab
