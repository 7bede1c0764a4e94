#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "pirlab/combinatorics.hpp"
#include "pirlab/errors.hpp"
#include "pirlab/plan.hpp"
#include "support/generators.hpp"

namespace pirlab {
namespace {

// Smallest positive (alpha, beta) with alpha c = (alpha + beta)(c - p), by search.
std::pair<std::uint64_t, std::uint64_t> alpha_beta_by_search(std::uint64_t c, std::uint64_t p) {
  for (std::uint64_t a = 1;; ++a) {
    if ((a * p) % (c - p) == 0) return {a, a * p / (c - p)};
  }
}

TEST(AlphaBeta, Examples) {
  EXPECT_EQ(compute_alpha_beta(4, 2, 2), (std::pair<std::uint64_t, std::uint64_t>{5, 1}));
  EXPECT_EQ(compute_alpha_beta(6, 2, 2), (std::pair<std::uint64_t, std::uint64_t>{3, 2}));
  EXPECT_EQ(compute_alpha_beta(3, 1, 1), (std::pair<std::uint64_t, std::uint64_t>{1, 2}));
}

TEST(AlphaBeta, MatchSearchAndAreMinimal) {
  for (auto [n, k, t] : testing::regime_triples(12)) {
    const std::uint64_t c = binomial(n, k), p = binomial(n - t, k);
    const auto [alpha, beta] = compute_alpha_beta(n, k, t);
    EXPECT_EQ(std::make_pair(alpha, beta), alpha_beta_by_search(c, p)) << n << k << t;
    EXPECT_EQ(alpha * c, (alpha + beta) * (c - p));
    EXPECT_EQ(std::gcd(alpha, alpha + beta), 1u);
  }
}

TEST(AlphaBeta, RegimeAndRangeErrors) {
  EXPECT_THROW(compute_alpha_beta(4, 3, 2), UnsupportedRegimeError);
  EXPECT_THROW(compute_alpha_beta(3, 2, 2), UnsupportedRegimeError);
  EXPECT_THROW(compute_alpha_beta(3, 0, 1), ParameterError);
  EXPECT_THROW(compute_alpha_beta(3, 1, 0), ParameterError);
}

TEST(SchemeParams, RowsPerFile) {
  EXPECT_EQ(make_params(4, 2, 2, 2).L, 36u);
  EXPECT_EQ(make_params(4, 2, 2, 3).L, 216u);
  EXPECT_EQ(make_params(3, 1, 1, 2).L, 9u);
  EXPECT_EQ(make_params(4, 2, 2, 1).L, 6u);
}

TEST(SchemeParams, DefaultFieldIsSmallestValidPrime) {
  EXPECT_EQ(make_params(4, 2, 2, 2).q, 37u);
  EXPECT_EQ(make_params(3, 1, 1, 2).q, 11u);  // (alpha + beta) c = 9
  for (auto [n, k, t] : testing::regime_triples(8)) {
    const SchemeParams p = make_params(n, k, t, 3);
    EXPECT_GT(p.q, p.field_bound());
    for (std::uint64_t x = p.field_bound() + 1; x < p.q; ++x) EXPECT_FALSE(testing::naive_prime(x));
  }
}

TEST(SchemeParams, ExplicitFieldIsValidated) {
  EXPECT_EQ(make_params(4, 2, 2, 2, 41).q, 41u);
  EXPECT_THROW(make_params(4, 2, 2, 2, 31), FieldTooSmallError);
  EXPECT_THROW(make_params(4, 2, 2, 2, 39), ParameterError);
  EXPECT_THROW(make_params(4, 2, 2, 0), ParameterError);
}

TEST(SchemeParams, StructuralInvariants) {
  for (auto [n, k, t] : testing::regime_triples(9)) {
    for (int m = 1; m <= 5; ++m) {
      const SchemeParams p = make_params(n, k, t, m);
      EXPECT_EQ(p.alpha * p.c, (p.alpha + p.beta) * (p.c - p.p));
      EXPECT_EQ(p.L, p.c * checked_pow(p.alpha + p.beta, static_cast<std::uint64_t>(m - 1)));
      if (m >= 2) EXPECT_LE(checked_pow(p.alpha + p.beta, static_cast<std::uint64_t>(m - 2)) * p.alpha * p.c, p.L);
      EXPECT_EQ(p.slots_per_server(), binomial(n - 1, k - 1));
    }
  }
}

TEST(Blocks, CountsForTwoAndThreeFiles) {
  const auto b3 = enumerate_blocks(make_params(4, 2, 2, 3));
  EXPECT_EQ(b3.size(), 91u);
  std::map<FileSet, int> per_label;
  for (const auto& b : b3) per_label[b.label]++;
  EXPECT_EQ(per_label[(FileSet{1, 2, 3})], 1);
  for (const FileSet& two : {FileSet{1, 2}, FileSet{1, 3}, FileSet{2, 3}}) EXPECT_EQ(per_label[two], 5);
  for (int f = 1; f <= 3; ++f) EXPECT_EQ(per_label[FileSet{f}], 25);

  const auto b2 = enumerate_blocks(make_params(4, 2, 2, 2));
  EXPECT_EQ(b2.size(), 11u);
  EXPECT_EQ(b2.front().label, (FileSet{1, 2}));

  const auto small = enumerate_blocks(make_params(3, 1, 1, 2));
  ASSERT_EQ(small.size(), 4u);
  EXPECT_EQ(small[0].label, (FileSet{1, 2}));
  EXPECT_EQ(small[1].label, (FileSet{1, 2}));
  EXPECT_EQ(small[1].replica, 1u);
  EXPECT_EQ(small[2].label, (FileSet{1}));
  EXPECT_EQ(small[3].label, (FileSet{2}));
}

TEST(Blocks, CanonicalOrderAndTotals) {
  for (auto [n, k, t] : testing::regime_triples(7)) {
    for (int m = 1; m <= 4; ++m) {
      const SchemeParams p = make_params(n, k, t, m);
      const auto blocks = enumerate_blocks(p);
      ASSERT_EQ(blocks.size(), total_blocks(p));
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        ASSERT_EQ(blocks[i].index, i);
        if (i > 0) ASSERT_FALSE(label_precedes(blocks[i].label, blocks[i - 1].label));
      }
      std::map<FileSet, std::uint64_t> per_label;
      for (const auto& b : blocks) per_label[b.label]++;
      for (const auto& [label, count] : per_label) {
        ASSERT_EQ(count, blocks_per_label(p, static_cast<int>(label.size())));
      }
      // Desired atoms are covered exactly once: c slots per block containing file 1.
      std::uint64_t desired_slots = 0;
      for (const auto& [label, count] : per_label)
        if (label.front() == 1) desired_slots += count * p.c;
      ASSERT_EQ(desired_slots, p.L);
    }
  }
}

TEST(Blocks, NonDesiredFileAppearanceCount) {
  // For each non-desired file, the number of groups it joins sums to (alpha + beta)^(M-2).
  for (auto [n, k, t] : testing::regime_triples(7)) {
    const auto [alpha, beta] = compute_alpha_beta(n, k, t);
    for (std::uint64_t m = 2; m <= 8; ++m) {
      std::uint64_t sum = 0;
      for (std::uint64_t f = 1; f <= m - 1; ++f) {
        sum += checked_pow(alpha, m - f - 1) * checked_pow(beta, f - 1) * binomial(m - 2, f - 1);
      }
      EXPECT_EQ(sum, checked_pow(alpha + beta, m - 2)) << n << k << t << " M=" << m;
    }
  }
}

TEST(Groups, Examples) {
  {
    const QueryPlan plan(make_params(4, 2, 2, 2));
    ASSERT_EQ(plan.groups().size(), 1u);
    const Group& g = plan.groups()[0];
    EXPECT_EQ(g.base_label, (FileSet{2}));
    EXPECT_EQ(g.plain_blocks.size(), 5u);
    EXPECT_EQ(g.mixed_blocks.size(), 1u);
    EXPECT_EQ(g.position_map.size(), 36u);
  }
  {
    const QueryPlan plan(make_params(4, 2, 2, 3));
    int singleton_two = 0;
    for (const auto& g : plan.groups()) {
      if (g.base_label == FileSet{2}) {
        ++singleton_two;
        EXPECT_EQ(g.plain_blocks.size(), 5u);
        EXPECT_EQ(g.mixed_blocks.size(), 1u);
      }
    }
    EXPECT_EQ(singleton_two, 5);
  }
  {
    const QueryPlan plan(make_params(3, 1, 1, 2));
    ASSERT_EQ(plan.groups().size(), 1u);
    EXPECT_EQ(plan.groups()[0].plain_blocks.size(), 1u);
    EXPECT_EQ(plan.groups()[0].mixed_blocks.size(), 2u);
  }
}

TEST(Groups, PartitionAndPositionMaps) {
  for (auto [n, k, t] : testing::regime_triples(6)) {
    for (int m = 1; m <= 4; ++m) {
      const SchemeParams p = make_params(n, k, t, m);
      if (p.L > 3000) continue;
      const QueryPlan plan(p);
      std::vector<int> membership(plan.blocks().size(), 0);
      for (const auto& g : plan.groups()) {
        ASSERT_EQ(g.plain_blocks.size(), p.alpha);
        ASSERT_EQ(g.mixed_blocks.size(), p.beta);
        ASSERT_EQ(g.position_map.size(), p.mixing_length());
        FileSet mixed_label = g.base_label;
        mixed_label.insert(mixed_label.begin(), 1);
        for (std::size_t b : g.plain_blocks) {
          ASSERT_EQ(plan.blocks()[b].label, g.base_label);
          membership[b]++;
        }
        for (std::size_t b : g.mixed_blocks) {
          ASSERT_EQ(plan.blocks()[b].label, mixed_label);
          membership[b]++;
        }
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (std::size_t pos = 0; pos < g.position_map.size(); ++pos) {
          const SlotRef& ref = g.position_map[pos];
          ASSERT_TRUE(seen.insert({ref.block, ref.slot}).second);
          // Plain positions come first.
          const bool plain = pos < p.mixing_dimension();
          ASSERT_EQ(plain, plan.blocks()[ref.block].label == g.base_label);
        }
      }
      for (const auto& b : plan.blocks()) {
        const bool grouped = b.label.front() != 1 || b.label.size() >= 2;
        ASSERT_EQ(membership[b.index], grouped ? 1 : 0) << "block " << b.index;
        ASSERT_EQ(plan.group_of_block(b.index).has_value(), grouped);
      }
      std::uint64_t expected_groups = 0;
      for (const auto& label : all_labels(m))
        if (label.front() != 1)
          expected_groups += checked_pow(p.alpha, static_cast<std::uint64_t>(m) - label.size() - 1) *
                             checked_pow(p.beta, label.size() - 1);
      ASSERT_EQ(plan.groups().size(), expected_groups);
    }
  }
}

TEST(QueryPlan, SlotsAreLexicographicKSubsets) {
  const QueryPlan plan(make_params(5, 2, 2, 2));
  EXPECT_EQ(plan.slots(), k_subsets(5, 2));
  for (int server = 1; server <= 5; ++server) {
    std::size_t incident = 0;
    for (const auto& s : plan.slots()) incident += std::count(s.begin(), s.end(), server);
    EXPECT_EQ(incident, binomial(4, 1));
  }
  const std::size_t id = plan.slot_id(3, 7);
  EXPECT_EQ(plan.slot_ref(id), (SlotRef{3, 7}));
  EXPECT_EQ(plan.slot_count(), plan.blocks().size() * 10);
}

TEST(QueryPlan, SingleFileHasNoGroups) {
  const QueryPlan plan(make_params(4, 2, 2, 1));
  EXPECT_EQ(plan.blocks().size(), 1u);
  EXPECT_TRUE(plan.groups().empty());
  EXPECT_EQ(plan.desired_blocks(), (std::vector<std::size_t>{0}));
}

TEST(PlanJson, ContainsBlocksAndGroups) {
  const QueryPlan plan(make_params(4, 2, 2, 2));
  const auto j = plan_to_json(plan);
  EXPECT_EQ(j.at("params").at("L"), 36);
  EXPECT_EQ(j.at("blocks").size(), 11u);
  EXPECT_EQ(j.at("blocks")[0].at("slots").size(), 6u);
  EXPECT_EQ(j.at("groups").size(), 1u);
  EXPECT_EQ(j.at("groups")[0].at("position_map").size(), 36u);
}

void expect_resolution(const AssistingArray& a, int n, int k) {
  ASSERT_TRUE(a.aligned);
  ASSERT_EQ(a.rows.size(), binomial(n - 1, k - 1));
  ASSERT_EQ(a.subsets.size(), binomial(n, k));
  std::set<ServerSet> distinct(a.subsets.begin(), a.subsets.end());
  ASSERT_EQ(distinct.size(), a.subsets.size());
  for (const auto& row : a.rows) {
    ASSERT_EQ(row.size(), static_cast<std::size_t>(n));
    std::map<int, int> multiplicity;
    for (int symbol : row) multiplicity[symbol]++;
    for (const auto& [symbol, count] : multiplicity) {
      ASSERT_EQ(count, k);
      const ServerSet& s = a.subsets[static_cast<std::size_t>(symbol - 1)];
      for (int server : s) ASSERT_EQ(row[static_cast<std::size_t>(server - 1)], symbol);
    }
  }
}

TEST(AssistingArray, FourTwo) {
  const AssistingArray a = render_assisting_array(4, 2);
  expect_resolution(a, 4, 2);
  EXPECT_EQ(a.text(), "1 1 2 2\n3 4 3 4\n5 6 6 5\n");
}

TEST(AssistingArray, TwoTwoAndNotAligned) {
  EXPECT_EQ(render_assisting_array(2, 2).text(), "1 1\n");
  const AssistingArray a = render_assisting_array(3, 2);
  EXPECT_FALSE(a.aligned);
  EXPECT_EQ(a.subsets, k_subsets(3, 2));
  EXPECT_EQ(a.text(), "NotAligned: 12 13 23\n");
  EXPECT_THROW(render_assisting_array(2, 3), ParameterError);
}

TEST(AssistingArray, ResolutionsForDivisibleCases) {
  for (auto [n, k] : {std::pair{6, 2}, std::pair{6, 3}, std::pair{8, 2}, std::pair{8, 4}, std::pair{5, 1}, std::pair{9, 3},
                        std::pair{10, 5}, std::pair{12, 4}, std::pair{12, 6}}) {
    expect_resolution(render_assisting_array(n, k), n, k);
  }
}

TEST(AssistingArray, Json) {
  const auto j = assisting_array_to_json(render_assisting_array(4, 2));
  EXPECT_TRUE(j.at("aligned"));
  EXPECT_EQ(j.at("rows").size(), 3u);
  EXPECT_FALSE(assisting_array_to_json(render_assisting_array(5, 2)).contains("rows"));
}

}  // namespace
}  // namespace pirlab
