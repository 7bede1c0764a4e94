#include "pirlab/plan.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/edmonds_karp_max_flow.hpp>

#include "pirlab/combinatorics.hpp"
#include "pirlab/errors.hpp"

namespace pirlab {

std::uint64_t SchemeParams::slots_per_server() const {
  return binomial(static_cast<std::uint64_t>(N - 1), static_cast<std::uint64_t>(K - 1));
}

std::uint64_t SchemeParams::field_bound() const {
  return std::max<std::uint64_t>(static_cast<std::uint64_t>(N), mixing_length());
}

std::pair<std::uint64_t, std::uint64_t> compute_alpha_beta(int N, int K, int T) {
  if (N < 1 || K < 1 || T < 1) throw ParameterError("N, K and T must all be at least 1");
  if (T + K > N) {
    throw UnsupportedRegimeError("the scheme requires T + K <= N (got N=" + std::to_string(N) +
                                 ", K=" + std::to_string(K) + ", T=" + std::to_string(T) + ")");
  }
  const std::uint64_t c = binomial(static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(K));
  const std::uint64_t p = binomial(static_cast<std::uint64_t>(N - T), static_cast<std::uint64_t>(K));
  // alpha c = (alpha + beta)(c - p)  <=>  alpha p = beta (c - p).
  const std::uint64_t d = std::gcd(c, p);
  return {(c - p) / d, p / d};
}

std::uint64_t compute_L(const SchemeParams& params) {
  return params.c * checked_pow(params.alpha + params.beta, static_cast<std::uint64_t>(params.M - 1));
}

SchemeParams make_params(int N, int K, int T, int M, std::optional<std::uint64_t> q) {
  if (M < 1) throw ParameterError("M must be at least 1");
  auto [alpha, beta] = compute_alpha_beta(N, K, T);
  SchemeParams params;
  params.N = N;
  params.K = K;
  params.T = T;
  params.M = M;
  params.c = binomial(static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(K));
  params.p = binomial(static_cast<std::uint64_t>(N - T), static_cast<std::uint64_t>(K));
  params.alpha = alpha;
  params.beta = beta;
  params.L = compute_L(params);
  if (q) {
    PrimeField checked(*q);
    if (*q <= params.field_bound()) {
      throw FieldTooSmallError("q = " + std::to_string(*q) + " must exceed max(N, (alpha+beta)c) = " +
                               std::to_string(params.field_bound()));
    }
    params.q = checked.modulus();
  } else {
    params.q = smallest_valid_prime(static_cast<std::uint64_t>(N), params.mixing_length());
  }
  return params;
}

std::uint64_t blocks_per_label(const SchemeParams& params, int label_size) {
  return checked_pow(params.alpha, static_cast<std::uint64_t>(params.M - label_size)) *
         checked_pow(params.beta, static_cast<std::uint64_t>(label_size - 1));
}

std::uint64_t total_blocks(const SchemeParams& params) {
  const auto m = static_cast<std::uint64_t>(params.M);
  return (checked_pow(params.alpha + params.beta, m) - checked_pow(params.alpha, m)) / params.beta;
}

nlohmann::json params_to_json(const SchemeParams& params) {
  return {{"N", params.N},         {"K", params.K},         {"T", params.T},
          {"M", params.M},         {"q", params.q},         {"c", params.c},
          {"p", params.p},         {"alpha", params.alpha}, {"beta", params.beta},
          {"L", params.L}};
}

bool label_precedes(const FileSet& a, const FileSet& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return a < b;
}

std::vector<FileSet> all_labels(int M) {
  std::vector<FileSet> labels;
  for (int t = M; t >= 1; --t) {
    for (auto& subset : k_subsets(M, t)) labels.push_back(std::move(subset));
  }
  return labels;
}

std::vector<Block> enumerate_blocks(const SchemeParams& params) {
  std::vector<Block> blocks;
  blocks.reserve(total_blocks(params));
  for (const auto& label : all_labels(params.M)) {
    const std::uint64_t count = blocks_per_label(params, static_cast<int>(label.size()));
    for (std::uint64_t r = 0; r < count; ++r) {
      blocks.push_back({blocks.size(), label, static_cast<std::size_t>(r)});
    }
  }
  return blocks;
}

std::vector<Group> form_groups(const SchemeParams& params, const std::vector<Block>& blocks) {
  std::map<FileSet, std::vector<std::size_t>> by_label;
  for (const auto& b : blocks) by_label[b.label].push_back(b.index);

  const std::size_t c = params.c;
  std::vector<Group> groups;
  for (const auto& label : all_labels(params.M)) {
    if (label.front() == 1) continue;  // base labels exclude the desired file
    FileSet mixed_label = label;
    mixed_label.insert(mixed_label.begin(), 1);
    const auto& plain_pool = by_label[label];
    const auto& mixed_pool = by_label[mixed_label];
    const auto t = static_cast<std::uint64_t>(label.size());
    const std::uint64_t count = checked_pow(params.alpha, params.M - t - 1) *
                                checked_pow(params.beta, t - 1);
    if (plain_pool.size() != count * params.alpha || mixed_pool.size() != count * params.beta) {
      throw ParameterError("block pools do not split evenly into groups");
    }
    for (std::uint64_t g = 0; g < count; ++g) {
      Group group;
      group.base_label = label;
      group.plain_blocks.assign(plain_pool.begin() + static_cast<std::ptrdiff_t>(g * params.alpha),
                                plain_pool.begin() + static_cast<std::ptrdiff_t>((g + 1) * params.alpha));
      group.mixed_blocks.assign(mixed_pool.begin() + static_cast<std::ptrdiff_t>(g * params.beta),
                                mixed_pool.begin() + static_cast<std::ptrdiff_t>((g + 1) * params.beta));
      for (const auto* part : {&group.plain_blocks, &group.mixed_blocks}) {
        for (std::size_t b : *part) {
          for (std::size_t s = 0; s < c; ++s) group.position_map.push_back({b, s});
        }
      }
      groups.push_back(std::move(group));
    }
  }
  return groups;
}

QueryPlan::QueryPlan(const SchemeParams& params)
    : params_(params),
      slots_(k_subsets(params.N, params.K)),
      blocks_(enumerate_blocks(params)),
      groups_(form_groups(params, blocks_)),
      group_of_block_(blocks_.size()) {
  for (const auto& b : blocks_) {
    if (b.label.front() == 1) desired_blocks_.push_back(b.index);
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (std::size_t b : groups_[g].plain_blocks) group_of_block_[b] = g;
    for (std::size_t b : groups_[g].mixed_blocks) group_of_block_[b] = g;
  }
}

std::optional<std::size_t> QueryPlan::group_of_block(std::size_t block) const {
  return group_of_block_.at(block);
}

nlohmann::json plan_to_json(const QueryPlan& plan) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : plan.blocks()) {
    blocks.push_back({{"index", b.index}, {"label", b.label}, {"replica", b.replica}, {"slots", plan.slots()}});
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : plan.groups()) {
    nlohmann::json positions = nlohmann::json::array();
    for (const auto& ref : g.position_map) positions.push_back({ref.block, ref.slot});
    groups.push_back({{"base_label", g.base_label},
                      {"plain_blocks", g.plain_blocks},
                      {"mixed_blocks", g.mixed_blocks},
                      {"position_map", positions}});
  }
  return {{"params", params_to_json(plan.params())}, {"blocks", blocks}, {"groups", groups}};
}

namespace {

// Exact-cover search for a resolution of the K-subsets into parallel classes.
class ResolutionSearch {
 public:
  ResolutionSearch(int N, int K) : n_(N), subsets_(k_subsets(N, K)), used_(subsets_.size(), false) {
    per_row_ = static_cast<std::size_t>(N / K);
    rows_needed_ = subsets_.size() / per_row_;
  }

  std::optional<std::vector<std::vector<std::size_t>>> run() {
    std::vector<bool> covered(static_cast<std::size_t>(n_), false);
    std::vector<std::size_t> row;
    if (fill(covered, row)) return rows_;
    return std::nullopt;
  }

  const std::vector<std::vector<int>>& subsets() const { return subsets_; }

 private:
  bool fill(std::vector<bool>& covered, std::vector<std::size_t>& row) {
    if (++nodes_ > kNodeBudget) return false;
    if (row.size() == per_row_) {
      rows_.push_back(row);
      if (rows_.size() == rows_needed_) return true;
      std::vector<bool> fresh(static_cast<std::size_t>(n_), false);
      std::vector<std::size_t> next;
      if (fill(fresh, next)) return true;
      rows_.pop_back();
      return false;
    }
    const auto first = static_cast<int>(std::find(covered.begin(), covered.end(), false) - covered.begin()) + 1;
    for (std::size_t s = 0; s < subsets_.size(); ++s) {
      if (used_[s] || subsets_[s].front() != first) continue;
      const auto& members = subsets_[s];
      if (std::any_of(members.begin(), members.end(), [&](int v) { return covered[static_cast<std::size_t>(v - 1)]; })) continue;
      used_[s] = true;
      for (int v : members) covered[static_cast<std::size_t>(v - 1)] = true;
      row.push_back(s);
      if (fill(covered, row)) return true;
      row.pop_back();
      for (int v : members) covered[static_cast<std::size_t>(v - 1)] = false;
      used_[s] = false;
    }
    return false;
  }

  static constexpr std::size_t kNodeBudget = 200'000;
  int n_;
  std::vector<std::vector<int>> subsets_;
  std::vector<bool> used_;
  std::size_t per_row_ = 0;
  std::size_t rows_needed_ = 0;
  std::size_t nodes_ = 0;
  std::vector<std::vector<std::size_t>> rows_;
};

// Baranyai's construction: place servers 1..N one at a time, routing each
// into one part of every parallel class with an integral max flow.
std::vector<std::vector<std::vector<int>>> baranyai(int N, int K) {
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, long,
                      boost::property<boost::edge_residual_capacity_t, long,
                                      boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;
  using Edge = Traits::edge_descriptor;

  const auto classes = static_cast<std::size_t>(binomial(static_cast<std::uint64_t>(N - 1), static_cast<std::uint64_t>(K - 1)));
  const auto parts = static_cast<std::size_t>(N / K);
  std::vector<std::vector<std::vector<int>>> out(classes, std::vector<std::vector<int>>(parts));

  for (int x = 1; x <= N; ++x) {
    std::map<std::vector<int>, std::size_t> set_node;
    for (const auto& cls : out)
      for (const auto& part : cls)
        if (part.size() < static_cast<std::size_t>(K)) set_node.try_emplace(part, 0);
    const std::size_t source = 0;
    const std::size_t sink = 1;
    std::size_t next = 2 + classes;
    for (auto& [set, node] : set_node) node = next++;

    Graph g(next);
    auto capacity = boost::get(boost::edge_capacity, g);
    auto residual = boost::get(boost::edge_residual_capacity, g);
    auto reverse = boost::get(boost::edge_reverse, g);
    auto link = [&](std::size_t u, std::size_t v, long cap) {
      const Edge e = boost::add_edge(u, v, g).first;
      const Edge r = boost::add_edge(v, u, g).first;
      capacity[e] = cap;
      capacity[r] = 0;
      reverse[e] = r;
      reverse[r] = e;
      return e;
    };
    std::vector<std::vector<std::pair<Edge, const std::vector<int>*>>> choices(classes);
    for (std::size_t i = 0; i < classes; ++i) {
      link(source, 2 + i, 1);
      std::vector<const std::vector<int>*> seen;
      for (const auto& part : out[i]) {
        auto it = set_node.find(part);
        if (it == set_node.end()) continue;
        if (std::any_of(seen.begin(), seen.end(), [&](const auto* s) { return *s == part; })) continue;
        seen.push_back(&it->first);
        choices[i].emplace_back(link(2 + i, it->second, 1), &it->first);
      }
    }
    for (const auto& [set, node] : set_node) {
      const int room = K - static_cast<int>(set.size()) - 1;
      link(node, sink, static_cast<long>(binomial(static_cast<std::uint64_t>(N - x), static_cast<std::uint64_t>(room))));
    }
    const long flow = boost::edmonds_karp_max_flow(g, source, sink);
    if (flow != static_cast<long>(classes)) throw Error("Baranyai flow fell short");
    for (std::size_t i = 0; i < classes; ++i) {
      for (const auto& [edge, set] : choices[i]) {
        if (capacity[edge] - residual[edge] != 1) continue;
        auto part = std::find(out[i].begin(), out[i].end(), *set);
        part->push_back(x);
        break;
      }
    }
  }
  for (auto& cls : out) std::sort(cls.begin(), cls.end());
  return out;
}

}  // namespace

AssistingArray render_assisting_array(int N, int K) {
  if (K < 1 || N < K) throw ParameterError("assisting array needs 1 <= K <= N");
  AssistingArray out;
  if (N % K != 0) {
    out.subsets = k_subsets(N, K);
    return out;
  }
  ResolutionSearch search(N, K);
  out.aligned = true;
  auto rows = search.run();
  if (!rows) {
    // Backtracking gave up; fall back to the flow construction.
    for (const auto& cls : baranyai(N, K)) {
      std::vector<int> rendered(static_cast<std::size_t>(N), 0);
      for (const auto& part : cls) {
        out.subsets.push_back(part);
        const int symbol = static_cast<int>(out.subsets.size());
        for (int v : part) rendered[static_cast<std::size_t>(v - 1)] = symbol;
      }
      out.rows.push_back(std::move(rendered));
    }
    return out;
  }
  for (const auto& row : *rows) {
    std::vector<int> rendered(static_cast<std::size_t>(N), 0);
    for (std::size_t s : row) {
      out.subsets.push_back(search.subsets()[s]);
      const int symbol = static_cast<int>(out.subsets.size());
      for (int v : search.subsets()[s]) rendered[static_cast<std::size_t>(v - 1)] = symbol;
    }
    out.rows.push_back(std::move(rendered));
  }
  return out;
}

std::string AssistingArray::text() const {
  std::ostringstream os;
  if (aligned) {
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << row[i];
      os << '\n';
    }
  } else {
    os << "NotAligned:";
    for (const auto& s : subsets) {
      os << ' ';
      for (int v : s) os << v;
    }
    os << '\n';
  }
  return os.str();
}

nlohmann::json assisting_array_to_json(const AssistingArray& array) {
  nlohmann::json j = {{"aligned", array.aligned}, {"subsets", array.subsets}};
  if (array.aligned) j["rows"] = array.rows;
  return j;
}

}  // namespace pirlab
