#include "pirlab/protocol.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "pirlab/errors.hpp"

namespace pirlab {

namespace {

void check_file_shape(const SchemeParams& params, const FieldMatrix& file, std::size_t m) {
  if (file.rows() != params.L || file.cols() != static_cast<std::size_t>(params.K)) {
    throw ShapeError("file " + std::to_string(m + 1) + " is " + std::to_string(file.rows()) + "x" +
                     std::to_string(file.cols()) + ", expected " + std::to_string(params.L) + "x" +
                     std::to_string(params.K));
  }
}

// Index of `server` inside the sorted K-subset.
std::size_t member_index(const ServerSet& subset, int server) {
  auto it = std::lower_bound(subset.begin(), subset.end(), server);
  return static_cast<std::size_t>(it - subset.begin());
}

}  // namespace

Database setup(const SchemeParams& params, StorageCode storage, std::vector<FieldMatrix> files) {
  const PrimeField field = params.field();
  if (storage.field() != field) {
    throw FieldMismatchError("storage code is over F_" + std::to_string(storage.field().modulus()) +
                             " but the scheme uses F_" + std::to_string(params.q));
  }
  if (storage.K() != params.K || storage.N() != params.N) {
    throw ShapeError("storage generator must be " + std::to_string(params.K) + "x" +
                     std::to_string(params.N));
  }
  if (auto bad = find_dependent_columns(storage)) {
    std::string cols;
    for (int c : *bad) cols += (cols.empty() ? "" : ",") + std::to_string(c);
    throw NotMDSError("generator columns {" + cols + "} are linearly dependent");
  }
  if (files.size() != static_cast<std::size_t>(params.M)) {
    throw ShapeError("expected " + std::to_string(params.M) + " files, got " + std::to_string(files.size()));
  }
  for (std::size_t m = 0; m < files.size(); ++m) {
    require_same_field(files[m], storage.generator());
    check_file_shape(params, files[m], m);
  }

  Database db{params, std::move(storage), std::move(files), {}};
  const std::size_t L = params.L;
  db.server_contents.assign(static_cast<std::size_t>(params.N), std::vector<Residue>(params.M * L));
  for (std::size_t m = 0; m < db.files.size(); ++m) {
    // (L x K) * (K x N): column n - 1 is file m projected onto g_n.
    const FieldMatrix projected = db.files[m] * db.storage.generator();
    for (std::size_t n = 0; n < static_cast<std::size_t>(params.N); ++n) {
      for (std::size_t j = 0; j < L; ++j) db.server_contents[n][m * L + j] = projected(j, n);
    }
  }
  return db;
}

Database setup(const SchemeParams& params, StorageCode storage, Rng& rng) {
  std::vector<FieldMatrix> files;
  for (int m = 0; m < params.M; ++m) {
    files.push_back(random_matrix(params.field(), params.L, static_cast<std::size_t>(params.K), rng));
  }
  return setup(params, std::move(storage), std::move(files));
}

QueryBundle::QueryBundle(SchemeParams params, FieldMatrix slot_queries,
                         std::vector<std::vector<std::size_t>> server_slots, PrivateTrace trace)
    : params_(std::move(params)),
      slot_queries_(std::move(slot_queries)),
      server_slots_(std::move(server_slots)),
      trace_(std::move(trace)) {}

std::span<const std::size_t> QueryBundle::server_slots(int server) const {
  if (server < 1 || server > params_.N) throw ParameterError("server index out of range");
  return server_slots_[static_cast<std::size_t>(server - 1)];
}

FieldMatrix QueryBundle::server_queries(int server) const {
  auto ids = server_slots(server);
  return slot_queries_.select_rows(ids);
}

std::uint64_t QueryBundle::upload_size() const {
  std::uint64_t rows = 0;
  for (const auto& s : server_slots_) rows += s.size();
  return rows * slot_queries_.cols();
}

QueryBundle generate_queries(const QueryPlan& plan, int desired, std::uint64_t seed,
                             const QueryOptions& options) {
  const SchemeParams& params = plan.params();
  if (desired < 1 || desired > params.M) {
    throw ParameterError("desired file " + std::to_string(desired) + " outside 1.." + std::to_string(params.M));
  }
  const PrimeField field = params.field();
  const std::size_t L = params.L;
  const std::size_t c = params.c;
  const auto M = static_cast<std::size_t>(params.M);
  Rng rng(seed);

  PrivateTrace trace;
  trace.seed = seed;
  trace.desired_external = desired;

  // The desired file becomes internal file 1; the rest are placed uniformly.
  std::vector<int> others;
  for (int m = 1; m <= params.M; ++m) {
    if (m != desired) others.push_back(m);
  }
  std::shuffle(others.begin(), others.end(), rng);
  trace.external_of_internal.push_back(desired);
  trace.external_of_internal.insert(trace.external_of_internal.end(), others.begin(), others.end());
  auto region = [&](int internal) {
    return static_cast<std::size_t>(trace.external_of_internal[static_cast<std::size_t>(internal - 1)] - 1) * L;
  };

  for (std::size_t i = 0; i < M; ++i) trace.s_matrices.push_back(random_full_rank(field, L, rng));

  FieldMatrix slot_queries(field, plan.slot_count(), M * L);

  // Desired atoms: consecutive rows of S_1, c per block containing file 1.
  const FieldMatrix& s1 = trace.s_matrices[0];
  std::size_t next_row = 0;
  for (std::size_t b : plan.desired_blocks()) {
    for (std::size_t s = 0; s < c; ++s) {
      const std::size_t id = plan.slot_id(b, s);
      auto src = s1.row(next_row++);
      std::copy(src.begin(), src.end(), slot_queries.row(id).begin() + static_cast<std::ptrdiff_t>(region(1)));
      trace.desired_atom_slots.push_back(id);
    }
  }

  // Group atoms: the mixing code applied to fresh rows of S_m, one codeword
  // per (group, file), laid out by the group's position map.
  const std::size_t dim = params.mixing_dimension();
  const MixingCode mixing = rs_code(params.mixing_length(), dim, field);
  trace.rows_consumed.assign(M, 0);
  for (const auto& group : plan.groups()) {
    std::vector<std::size_t> offsets;
    for (int m : group.base_label) {
      auto& cursor = trace.rows_consumed[static_cast<std::size_t>(m - 1)];
      const std::size_t offset = options.allocation == RowAllocation::kFresh ? cursor : 0;
      offsets.push_back(offset);
      const FieldMatrix atoms = mixing.encode(trace.s_matrices[static_cast<std::size_t>(m - 1)].row_block(offset, dim));
      for (std::size_t pos = 0; pos < group.position_map.size(); ++pos) {
        const auto& ref = group.position_map[pos];
        auto src = atoms.row(pos);
        std::copy(src.begin(), src.end(),
                  slot_queries.row(plan.slot_id(ref.block, ref.slot)).begin() + static_cast<std::ptrdiff_t>(region(m)));
      }
      cursor = std::max(cursor, offset + dim);
    }
    trace.group_row_offsets.push_back(std::move(offsets));
  }

  // Transmission order follows the blocks' external labels so that row
  // positions do not depend on which file is desired.
  std::vector<FileSet> external_labels;
  for (const auto& b : plan.blocks()) {
    FileSet ext;
    for (int f : b.label) ext.push_back(trace.external_of_internal[static_cast<std::size_t>(f - 1)]);
    std::sort(ext.begin(), ext.end());
    external_labels.push_back(std::move(ext));
  }
  std::vector<std::size_t> block_order(plan.blocks().size());
  std::iota(block_order.begin(), block_order.end(), 0);
  std::stable_sort(block_order.begin(), block_order.end(), [&](std::size_t a, std::size_t b) {
    return label_precedes(external_labels[a], external_labels[b]);
  });

  std::vector<std::vector<std::size_t>> server_slots(static_cast<std::size_t>(params.N));
  for (std::size_t b : block_order) {
    for (std::size_t s = 0; s < c; ++s) {
      for (int n : plan.slots()[s]) server_slots[static_cast<std::size_t>(n - 1)].push_back(plan.slot_id(b, s));
    }
  }
  if (options.shuffle_rows) {
    for (auto& rows : server_slots) std::shuffle(rows.begin(), rows.end(), rng);
  }

  return QueryBundle(params, std::move(slot_queries), std::move(server_slots), std::move(trace));
}

std::vector<Residue> answer(const Database& db, const QueryBundle& bundle, int server) {
  auto ids = bundle.server_slots(server);
  const auto& contents = db.server_contents.at(static_cast<std::size_t>(server - 1));
  const PrimeField& field = bundle.slot_queries().field();
  std::vector<Residue> out;
  out.reserve(ids.size());
  for (std::size_t id : ids) out.push_back(dot(field, bundle.slot_queries().row(id), contents));
  return out;
}

AnswerSet answer_all(const Database& db, const QueryBundle& bundle) {
  AnswerSet set;
  for (int n = 1; n <= db.params.N; ++n) set.per_server.push_back(answer(db, bundle, n));
  return set;
}

FieldMatrix decode(const QueryPlan& plan, const StorageCode& storage, const QueryBundle& bundle,
                   const AnswerSet& answers) {
  const SchemeParams& params = plan.params();
  const PrimeField field = params.field();
  const auto K = static_cast<std::size_t>(params.K);

  if (answers.per_server.size() != static_cast<std::size_t>(params.N)) {
    throw DecodeError("expected answers from " + std::to_string(params.N) + " servers");
  }

  // Stage 1: every slot is answered by the K servers of its subset; their
  // encoding vectors are independent, so the K answers pin down the slot's
  // value in F_q^K.
  FieldMatrix rhs(field, plan.slot_count(), K);
  std::vector<std::size_t> received(plan.slot_count(), 0);
  for (int n = 1; n <= params.N; ++n) {
    auto ids = bundle.server_slots(n);
    const auto& values = answers.per_server[static_cast<std::size_t>(n - 1)];
    if (values.size() != ids.size()) {
      throw DecodeError("server " + std::to_string(n) + " returned " + std::to_string(values.size()) +
                        " answers for " + std::to_string(ids.size()) + " queries");
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t slot = plan.slot_ref(ids[i]).slot;
      rhs.set(ids[i], member_index(plan.slots()[slot], n), values[i] % field.modulus());
      ++received[ids[i]];
    }
  }
  if (std::any_of(received.begin(), received.end(), [&](std::size_t r) { return r != K; })) {
    throw DecodeError("some slot was not answered by exactly K servers");
  }

  // For slot subset S, value v satisfies v . g_n = a_n for n in S, i.e.
  // G_S^T v^T = a. Invert each of the c systems once.
  std::vector<FieldMatrix> slot_solvers;
  for (const auto& subset : plan.slots()) {
    std::vector<std::size_t> cols;
    for (int n : subset) cols.push_back(static_cast<std::size_t>(n - 1));
    try {
      slot_solvers.push_back(invert(storage.generator().select_cols(cols).transpose()));
    } catch (const SingularMatrixError&) {
      throw DecodeError("storage generator is not MDS; slot systems are singular");
    }
  }
  FieldMatrix values(field, plan.slot_count(), K);
  for (std::size_t id = 0; id < plan.slot_count(); ++id) {
    const FieldMatrix& solver = slot_solvers[plan.slot_ref(id).slot];
    auto a = rhs.row(id);
    auto v = values.row(id);
    for (std::size_t k = 0; k < K; ++k) v[k] = dot(field, solver.row(k), a);
  }

  // Stage 2: plain slots give alpha c positions of the group's summed
  // codeword; erasure decoding yields the interference in the mixed slots.
  if (!plan.groups().empty()) {
    const std::size_t dim = params.mixing_dimension();
    const MixingCode mixing = rs_code(params.mixing_length(), dim, field);
    std::vector<std::size_t> known(dim);
    std::iota(known.begin(), known.end(), 0);
    const ErasureDecoder decoder(mixing, known);
    for (const auto& group : plan.groups()) {
      FieldMatrix plain(field, dim, K);
      for (std::size_t pos = 0; pos < dim; ++pos) {
        auto src = values.row(plan.slot_id(group.position_map[pos].block, group.position_map[pos].slot));
        std::copy(src.begin(), src.end(), plain.row(pos).begin());
      }
      const FieldMatrix codeword = decoder.decode(plain);
      for (std::size_t pos = dim; pos < group.position_map.size(); ++pos) {
        auto v = values.row(plan.slot_id(group.position_map[pos].block, group.position_map[pos].slot));
        auto interference = codeword.row(pos);
        for (std::size_t k = 0; k < K; ++k) v[k] = field.sub(v[k], interference[k]);
      }
    }
  }

  // Stage 3: the desired atoms are S_1 W; undo S_1.
  const auto& trace = bundle.trace();
  FieldMatrix atoms(field, params.L, K);
  for (std::size_t j = 0; j < trace.desired_atom_slots.size(); ++j) {
    auto src = values.row(trace.desired_atom_slots[j]);
    std::copy(src.begin(), src.end(), atoms.row(j).begin());
  }
  return solve(trace.s_matrices.at(0), atoms);
}

Accounting accounting(const QueryPlan& plan) {
  const SchemeParams& params = plan.params();
  Accounting acc;
  const std::uint64_t answered = static_cast<std::uint64_t>(params.K) * params.c * plan.blocks().size();
  acc.download_total = answered;
  acc.upload_ignored = answered * static_cast<std::uint64_t>(params.M) * params.L;
  acc.rate = Rational(Rational::Int(params.L) * params.K, Rational::Int(acc.download_total));
  return acc;
}

Transcript public_transcript(const QueryBundle& bundle, const AnswerSet* answers) {
  const auto& params = bundle.params();
  Transcript t{params.q, params.N, params.M, params.L, {}, {}};
  for (int n = 1; n <= params.N; ++n) t.queries.push_back(bundle.server_queries(n));
  if (answers) t.answers = answers->per_server;
  return t;
}

nlohmann::json transcript_to_json(const Transcript& transcript) {
  nlohmann::json servers = nlohmann::json::array();
  for (std::size_t n = 0; n < transcript.queries.size(); ++n) {
    nlohmann::json entry = {{"server", n + 1}, {"queries", matrix_to_json(transcript.queries[n])}};
    if (!transcript.answers.empty()) entry["answers"] = transcript.answers[n];
    servers.push_back(std::move(entry));
  }
  return {{"q", transcript.q}, {"N", transcript.N}, {"M", transcript.M}, {"L", transcript.L},
          {"servers", servers}};
}

Transcript transcript_from_json(const nlohmann::json& j) {
  for (const char* key : {"q", "N", "M", "L", "servers"}) {
    if (!j.contains(key)) throw ShapeError(std::string("transcript JSON lacks \"") + key + "\"");
  }
  Transcript t;
  t.q = j.at("q").get<std::uint32_t>();
  t.N = j.at("N").get<int>();
  t.M = j.at("M").get<int>();
  t.L = j.at("L").get<std::uint64_t>();
  const auto& servers = j.at("servers");
  if (!servers.is_array() || servers.size() != static_cast<std::size_t>(t.N)) {
    throw ShapeError("transcript must list exactly N servers");
  }
  for (const auto& entry : servers) {
    FieldMatrix queries = matrix_from_json(entry.at("queries"));
    if (queries.field().modulus() != t.q || queries.cols() != static_cast<std::size_t>(t.M) * t.L) {
      throw ShapeError("transcript query matrix does not match q, M and L");
    }
    t.queries.push_back(std::move(queries));
    if (entry.contains("answers")) t.answers.push_back(entry.at("answers").get<std::vector<Residue>>());
  }
  if (!t.answers.empty() && t.answers.size() != t.queries.size()) {
    throw ShapeError("transcript has answers for only some servers");
  }
  return t;
}

}  // namespace pirlab
