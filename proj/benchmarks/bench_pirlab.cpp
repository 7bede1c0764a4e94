#include <benchmark/benchmark.h>

#include "pirlab/linalg.hpp"
#include "pirlab/mds.hpp"
#include "pirlab/privacy.hpp"
#include "pirlab/protocol.hpp"

using namespace pirlab;

// q = 37 is the field for (4,2,2,M); 65521 forces the 64-bit path.
static void BM_Rank(benchmark::State& state) {
  const PrimeField field(static_cast<std::uint32_t>(state.range(1)));
  Rng rng(1);
  const FieldMatrix m = random_matrix(field, static_cast<std::size_t>(state.range(0)),
                                      static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(rank(m));
}
BENCHMARK(BM_Rank)->ArgsProduct({{64, 216, 512, 1296}, {37}})->Args({512, 65521})->Unit(benchmark::kMillisecond);

static void BM_Solve(benchmark::State& state) {
  const PrimeField field(37);
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const FieldMatrix a = random_full_rank(field, n, rng);
  const FieldMatrix b = random_matrix(field, n, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve(a, b));
}
BENCHMARK(BM_Solve)->Arg(216)->Arg(1296)->Unit(benchmark::kMillisecond);

static void BM_Invert(benchmark::State& state) {
  const PrimeField field(37);
  Rng rng(3);
  const FieldMatrix a = random_full_rank(field, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(invert(a));
}
BENCHMARK(BM_Invert)->Arg(216)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_Product(benchmark::State& state) {
  const PrimeField field(37);
  Rng rng(4);
  const FieldMatrix a = random_matrix(field, 36, 30, rng);
  const FieldMatrix b = random_matrix(field, 30, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_Product)->Arg(216)->Arg(1296);

static void BM_ErasureDecode(benchmark::State& state) {
  const PrimeField field(37);
  const MixingCode code = rs_code(36, 30, field);
  std::vector<std::size_t> positions(30);
  for (std::size_t i = 0; i < 30; ++i) positions[i] = i + 6;
  const ErasureDecoder decoder(code, positions);
  Rng rng(5);
  const FieldMatrix known = random_matrix(field, 30, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(decoder.decode(known));
}
BENCHMARK(BM_ErasureDecode)->Arg(1)->Arg(1296);

struct Fixture {
  SchemeParams params;
  QueryPlan plan;
  Database db;
  explicit Fixture(int m) : params(make_params(4, 2, 2, m)), plan(params), db(make_db(params)) {}
  static Database make_db(const SchemeParams& p) {
    Rng rng(6);
    return setup(p, StorageCode::vandermonde(p.field(), p.K, p.N), rng);
  }
};

static void BM_GenerateQueries(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_queries(f.plan, 1, ++seed));
  state.counters["L"] = static_cast<double>(f.params.L);
}
BENCHMARK(BM_GenerateQueries)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void BM_AnswerAll(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const QueryBundle bundle = generate_queries(f.plan, 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(answer_all(f.db, bundle));
}
BENCHMARK(BM_AnswerAll)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void BM_Decode(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const QueryBundle bundle = generate_queries(f.plan, 2, 1);
  const AnswerSet answers = answer_all(f.db, bundle);
  for (auto _ : state) benchmark::DoNotOptimize(decode(f.plan, f.db.storage, bundle, answers));
}
BENCHMARK(BM_Decode)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void BM_AuditView(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const QueryBundle bundle = generate_queries(f.plan, 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(audit_ranks(extract_view(bundle, {1, 2})));
}
BENCHMARK(BM_AuditView)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
