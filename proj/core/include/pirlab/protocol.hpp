#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pirlab/linalg.hpp"
#include "pirlab/mds.hpp"
#include "pirlab/plan.hpp"
#include "pirlab/rates.hpp"

namespace pirlab {

/// M files of shape L x K, stored on N servers through one StorageCode.
///
/// server_contents[n - 1] is y_n: for file m (1-based) and row j (0-based),
/// y_n[(m - 1) L + j] = w_j^[m] . g_n.
struct Database {
  SchemeParams params;
  StorageCode storage;
  std::vector<FieldMatrix> files;  // files[m - 1] = W^[m]
  std::vector<std::vector<Residue>> server_contents;
};

// Throws NotMDSError if the generator fails verify_mds, ShapeError if the
// generator or any file has the wrong shape, FieldMismatchError if fields differ.
Database setup(const SchemeParams& params, StorageCode storage, std::vector<FieldMatrix> files);
// Same, with uniformly random file contents drawn from `rng`.
Database setup(const SchemeParams& params, StorageCode storage, Rng& rng);

enum class RowAllocation {
  kFresh,              // each group takes unused rows of S_m
  kReuseAcrossGroups,  // broken on purpose: every group restarts at row 0
};

struct QueryOptions {
  bool shuffle_rows = false;  // permute each server's rows with fresh randomness
  RowAllocation allocation = RowAllocation::kFresh;
};

/// The user's private randomness and bookkeeping for one retrieval.
struct PrivateTrace {
  std::uint64_t seed = 0;
  int desired_external = 1;
  std::vector<int> external_of_internal;  // [i - 1]: external index of internal file i
  std::vector<FieldMatrix> s_matrices;    // [i - 1]: S_i, L x L, internal order
  // Row j of S_1 is the desired atom carried by slot desired_atom_slots[j].
  std::vector<std::size_t> desired_atom_slots;
  // [g][k]: first row of S_m used by group g for its k-th base-label file m.
  std::vector<std::vector<std::size_t>> group_row_offsets;
  // Rows of S_i consumed by the groups, per internal file.
  std::vector<std::size_t> rows_consumed;
};

/// Everything the user sends, plus the private trace needed to decode.
///
/// Query rows are stored once per slot; the K servers sharing a slot receive
/// the identical row. A row has M L coefficients, file m occupying columns
/// (m - 1) L .. m L - 1 in external numbering.
class QueryBundle {
 public:
  QueryBundle(SchemeParams params, FieldMatrix slot_queries,
              std::vector<std::vector<std::size_t>> server_slots, PrivateTrace trace);

  const SchemeParams& params() const noexcept { return params_; }
  const FieldMatrix& slot_queries() const noexcept { return slot_queries_; }
  // Global slot ids sent to 1-based `server`, in transmission order.
  std::span<const std::size_t> server_slots(int server) const;
  // The query matrix received by `server`: one row per incident slot.
  FieldMatrix server_queries(int server) const;
  const PrivateTrace& trace() const noexcept { return trace_; }
  // Field elements uploaded across all servers.
  std::uint64_t upload_size() const;

 private:
  SchemeParams params_;
  FieldMatrix slot_queries_;
  std::vector<std::vector<std::size_t>> server_slots_;
  PrivateTrace trace_;
};

// Retrieval of external file `desired` (1-based). All randomness is drawn
// from a generator seeded with `seed`.
QueryBundle generate_queries(const QueryPlan& plan, int desired, std::uint64_t seed,
                             const QueryOptions& options = {});

struct AnswerSet {
  std::vector<std::vector<Residue>> per_server;  // [n - 1]: one answer per row sent to n
};

// Server n's deterministic reply: each query row dotted with y_n.
std::vector<Residue> answer(const Database& db, const QueryBundle& bundle, int server);
AnswerSet answer_all(const Database& db, const QueryBundle& bundle);

// Recovers W^[desired]. Throws DecodeError for answers that do not fit the
// bundle.
FieldMatrix decode(const QueryPlan& plan, const StorageCode& storage, const QueryBundle& bundle,
                   const AnswerSet& answers);

struct Accounting {
  std::uint64_t download_total = 0;  // K c (#blocks) field elements
  std::uint64_t upload_ignored = 0;  // query coefficients sent, excluded from rate
  Rational rate;                     // L K / download_total
};

Accounting accounting(const QueryPlan& plan);

/// What the servers collectively see: their query matrices, optionally with
/// the answers they returned. Enough for collusion auditing.
struct Transcript {
  std::uint32_t q = 0;
  int N = 0;
  int M = 0;
  std::uint64_t L = 0;
  std::vector<FieldMatrix> queries;  // [n - 1]
  std::vector<std::vector<Residue>> answers;  // empty or [n - 1]
};

Transcript public_transcript(const QueryBundle& bundle, const AnswerSet* answers = nullptr);
nlohmann::json transcript_to_json(const Transcript& transcript);
Transcript transcript_from_json(const nlohmann::json& j);

}  // namespace pirlab
