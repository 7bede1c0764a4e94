#include "pirlab/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "pirlab/combinatorics.hpp"
#include "pirlab/errors.hpp"

namespace pirlab {

namespace {

void check_colluders(const ServerSet& colluders, int N, int T) {
  if (colluders.size() != static_cast<std::size_t>(T)) {
    throw ArityError("expected " + std::to_string(T) + " colluders, got " + std::to_string(colluders.size()));
  }
  ServerSet sorted = colluders;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ArityError("colluding servers must be distinct");
  }
  if (sorted.front() < 1 || sorted.back() > N) {
    throw ArityError("colluding server outside 1.." + std::to_string(N));
  }
}

bool span_less(std::span<const Residue> a, std::span<const Residue> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool span_equal(std::span<const Residue> a, std::span<const Residue> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

// Distinct rows of `rows` in lexicographic order.
FieldMatrix distinct_rows(const FieldMatrix& rows) {
  std::vector<std::size_t> order(rows.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return span_less(rows.row(a), rows.row(b)); });
  auto last = std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) { return span_equal(rows.row(a), rows.row(b)); });
  order.erase(last, order.end());
  return rows.select_rows(order);
}

CollusionView split_by_file(const std::vector<const FieldMatrix*>& received, int M, std::uint64_t L,
                            const ServerSet& colluders) {
  const PrimeField& field = received.front()->field();
  std::size_t total = 0;
  for (const auto* q : received) total += q->rows();

  CollusionView view;
  view.colluders = colluders;
  std::sort(view.colluders.begin(), view.colluders.end());
  for (int m = 0; m < M; ++m) {
    FieldMatrix parts(field, total, L);
    std::size_t kept = 0;
    for (const auto* q : received) {
      for (std::size_t r = 0; r < q->rows(); ++r) {
        auto region = q->row(r).subspan(static_cast<std::size_t>(m) * L, L);
        if (std::all_of(region.begin(), region.end(), [](Residue v) { return v == 0; })) continue;
        std::copy(region.begin(), region.end(), parts.row(kept++).begin());
      }
    }
    view.per_file.push_back(distinct_rows(parts.row_block(0, kept)));
  }
  return view;
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xFF;
    h *= kFnvPrime;
  }
}

// One categorical key per trial.
std::vector<std::uint64_t> statistic_key(const CollusionView& view, ViewStatistic statistic) {
  std::vector<std::uint64_t> key;
  for (const auto& file : view.per_file) {
    switch (statistic) {
      case ViewStatistic::kRankProfile:
        key.push_back(rank(file));
        break;
      case ViewStatistic::kPivotProfile: {
        const EchelonForm ef = row_reduce(file);
        key.push_back(ef.pivot_columns.size());
        key.insert(key.end(), ef.pivot_columns.begin(), ef.pivot_columns.end());
        break;
      }
      case ViewStatistic::kFirstAtomHash: {
        const EchelonForm ef = row_reduce(file);
        key.push_back(ef.rank());
        if (ef.rank() > 0) {
          for (Residue v : ef.reduced.row(0)) key.push_back(v);
        }
        break;
      }
    }
  }
  return key;
}

}  // namespace

CollusionView extract_view(const QueryBundle& bundle, const ServerSet& colluders) {
  const SchemeParams& params = bundle.params();
  check_colluders(colluders, params.N, params.T);
  // Shared slots carry one row; dedup at the slot level before splitting.
  std::vector<std::size_t> ids;
  for (int n : colluders) {
    auto s = bundle.server_slots(n);
    ids.insert(ids.end(), s.begin(), s.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const FieldMatrix rows = bundle.slot_queries().select_rows(ids);
  return split_by_file({&rows}, params.M, params.L, colluders);
}

CollusionView extract_view(const Transcript& transcript, int T, const ServerSet& colluders) {
  check_colluders(colluders, transcript.N, T);
  std::vector<const FieldMatrix*> received;
  for (int n : colluders) received.push_back(&transcript.queries.at(static_cast<std::size_t>(n - 1)));
  return split_by_file(received, transcript.M, transcript.L, colluders);
}

std::vector<FileAudit> audit_ranks(const CollusionView& view) {
  std::vector<FileAudit> out;
  for (const auto& file : view.per_file) {
    FileAudit a;
    a.count = file.rows();
    a.rank = rank(file);
    a.full_rank = a.rank == a.count;
    out.push_back(a);
  }
  return out;
}

std::uint64_t expected_view_dimension(const SchemeParams& params) {
  return (params.c - params.p) * checked_pow(params.alpha + params.beta, static_cast<std::uint64_t>(params.M - 1));
}

bool view_is_private(const SchemeParams& params, const std::vector<FileAudit>& audits) {
  const std::uint64_t expected = expected_view_dimension(params);
  if (audits.size() != static_cast<std::size_t>(params.M)) return false;
  return std::all_of(audits.begin(), audits.end(),
                     [&](const FileAudit& a) { return a.full_rank && a.count == expected; });
}

std::optional<ViewStatistic> parse_statistic(std::string_view name) {
  if (name == "first-atom-vector-hash" || name == "echelon-hash") return ViewStatistic::kFirstAtomHash;
  if (name == "per-file-pivot-profile") return ViewStatistic::kPivotProfile;
  if (name == "rank-profile") return ViewStatistic::kRankProfile;
  return std::nullopt;
}

std::string statistic_name(ViewStatistic statistic) {
  switch (statistic) {
    case ViewStatistic::kFirstAtomHash:
      return "first-atom-vector-hash";
    case ViewStatistic::kPivotProfile:
      return "per-file-pivot-profile";
    case ViewStatistic::kRankProfile:
      return "rank-profile";
  }
  return "unknown";
}

DistributionResult two_sample_chi_square(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                                         std::uint64_t min_count) {
  if (a.size() != b.size()) throw ShapeError("histograms differ in length");
  // Pool every sparse bin into a single remainder bin.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> bins;
  std::pair<std::uint64_t, std::uint64_t> pooled{0, 0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] + b[i] == 0) continue;
    if (a[i] + b[i] < min_count) {
      pooled.first += a[i];
      pooled.second += b[i];
    } else {
      bins.emplace_back(a[i], b[i]);
    }
  }
  if (pooled.first + pooled.second > 0) bins.push_back(pooled);

  DistributionResult result;
  result.bins = bins.size();
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::uint64_t{0}));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::uint64_t{0}));
  if (na == 0 || nb == 0) throw ParameterError("empty histogram");
  // Unequal arm sizes are weighted as in the standard two-sample statistic.
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  for (const auto& [x, y] : bins) {
    const double diff = ka * static_cast<double>(x) - kb * static_cast<double>(y);
    result.chi_square += diff * diff / static_cast<double>(x + y);
  }
  result.dof = static_cast<int>(bins.size()) - 1;
  if (result.dof > 0) {
    const boost::math::chi_squared dist(result.dof);
    result.p_value = boost::math::cdf(boost::math::complement(dist, result.chi_square));
  }
  return result;
}

DistributionResult audit_distribution(const SchemeParams& params, const ServerSet& colluders, int trials,
                                      ViewStatistic statistic, const DistributionOptions& options) {
  check_colluders(colluders, params.N, params.T);
  if (trials < 1000) throw ParameterError("audit_distribution needs at least 1000 trials per arm");
  for (int d : {options.desired_a, options.desired_b}) {
    if (d < 1 || d > params.M) throw ParameterError("desired index " + std::to_string(d) + " outside 1..M");
  }
  if (statistic == ViewStatistic::kFirstAtomHash) {
    if (options.hash_bins < 2) throw ParameterError("need at least 2 hash bins");
    if (static_cast<std::uint64_t>(trials) < 5 * options.hash_bins) {
      throw ParameterError("too few trials for " + std::to_string(options.hash_bins) + " bins");
    }
  }

  const QueryPlan plan(params);
  const auto lo = static_cast<std::uint32_t>(options.seed);
  const auto hi = static_cast<std::uint32_t>(options.seed >> 32);
  std::seed_seq seq_a{lo, hi, 0u};
  std::seed_seq seq_b{lo, hi, options.identical_streams ? 0u : 1u};
  Rng stream_a(seq_a);
  Rng stream_b(seq_b);

  // Categories are numbered in order of first appearance across both arms.
  std::map<std::vector<std::uint64_t>, std::size_t> categories;
  std::vector<std::uint64_t> hist_a;
  std::vector<std::uint64_t> hist_b;
  if (statistic == ViewStatistic::kFirstAtomHash) {
    hist_a.assign(options.hash_bins, 0);
    hist_b.assign(options.hash_bins, 0);
  }
  auto record = [&](const CollusionView& view, std::vector<std::uint64_t>& own, std::vector<std::uint64_t>& other) {
    const auto key = statistic_key(view, statistic);
    if (statistic == ViewStatistic::kFirstAtomHash) {
      std::uint64_t h = kFnvOffset;
      for (std::uint64_t w : key) fnv_mix(h, w);
      // FNV low bits are poorly mixed (the lowest is a parity of the input).
      ++own[(h >> 32) % options.hash_bins];
      return;
    }
    auto [it, inserted] = categories.try_emplace(key, categories.size());
    if (inserted) {
      own.push_back(0);
      other.push_back(0);
    }
    ++own[it->second];
  };

  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed_a = stream_a();
    const std::uint64_t seed_b = stream_b();
    record(extract_view(generate_queries(plan, options.desired_a, seed_a, options.query), colluders), hist_a, hist_b);
    record(extract_view(generate_queries(plan, options.desired_b, seed_b, options.query), colluders), hist_b, hist_a);
  }
  return two_sample_chi_square(hist_a, hist_b);
}

}  // namespace pirlab
