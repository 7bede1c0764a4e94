#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pirlab/linalg.hpp"
#include "pirlab/plan.hpp"
#include "pirlab/protocol.hpp"

namespace pirlab {

/// The pooled knowledge of T colluding servers.
///
/// per_file[m - 1] holds the distinct nonzero coefficient vectors (length L)
/// that external file m contributes to the colluders' query rows, one per
/// row, sorted lexicographically. Rows shared by several colluders count once.
struct CollusionView {
  ServerSet colluders;
  std::vector<FieldMatrix> per_file;
};

// Throws ArityError unless `colluders` is T distinct servers in 1..N.
CollusionView extract_view(const QueryBundle& bundle, const ServerSet& colluders);
CollusionView extract_view(const Transcript& transcript, int T, const ServerSet& colluders);

struct FileAudit {
  std::size_t count = 0;
  std::size_t rank = 0;
  bool full_rank = false;  // rank == count
};

std::vector<FileAudit> audit_ranks(const CollusionView& view);

// (c - p)(alpha + beta)^(M-1): the count and rank every file must show.
std::uint64_t expected_view_dimension(const SchemeParams& params);

// True iff every file has count == rank == expected_view_dimension.
bool view_is_private(const SchemeParams& params, const std::vector<FileAudit>& audits);

enum class ViewStatistic {
  kFirstAtomHash,  // first row of each file's RREF, hashed into a fixed number of bins
  kPivotProfile,   // pivot columns of each file's RREF
  kRankProfile,    // per-file ranks; constant for a correct scheme
};

std::optional<ViewStatistic> parse_statistic(std::string_view name);
std::string statistic_name(ViewStatistic statistic);

struct DistributionOptions {
  std::uint64_t seed = 20240601;
  int desired_a = 1;
  int desired_b = 2;
  // Feed both arms the same per-trial seeds.
  bool identical_streams = false;
  std::size_t hash_bins = 64;
  QueryOptions query;
};

struct DistributionResult {
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t bins = 0;  // after pooling sparse categories
};

// Two-sample chi-square between the colluders' statistic under retrievals
// of desired_a and desired_b. Throws ParameterError for trials < 1000, for
// fewer than 5 trials per hash bin, or for desired indices outside 1..M.
DistributionResult audit_distribution(const SchemeParams& params, const ServerSet& colluders, int trials,
                                      ViewStatistic statistic, const DistributionOptions& options = {});

// Bins with a combined count below `min_count` are merged into one.
DistributionResult two_sample_chi_square(const std::vector<std::uint64_t>& a,
                                         const std::vector<std::uint64_t>& b,
                                         std::uint64_t min_count = 10);

}  // namespace pirlab
