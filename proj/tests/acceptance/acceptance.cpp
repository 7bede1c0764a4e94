// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   pirlab_acceptance [--max-l L] [--only 3,4] [--verbose]
//
// Criteria 3 and 4 sweep every (N, K, T, M) with T + K <= N, N <= 6, M <= 4.
// Tuples with L above --max-l are not run and count against the criterion.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "pirlab/combinatorics.hpp"
#include "pirlab/errors.hpp"
#include "pirlab/mds.hpp"
#include "pirlab/privacy.hpp"
#include "pirlab/protocol.hpp"
#include "pirlab/rates.hpp"
#include "support/generators.hpp"

namespace {

using namespace pirlab;
using Clock = std::chrono::steady_clock;

struct Tuple {
  int n, k, t, m;
  std::uint64_t L;
};

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Verdict()> run;
};

bool g_verbose = false;

std::vector<Tuple> sweep_tuples() {
  std::vector<Tuple> out;
  for (auto [n, k, t] : testing::regime_triples(6))
    for (int m = 1; m <= 4; ++m) out.push_back({n, k, t, m, make_params(n, k, t, m).L});
  std::stable_sort(out.begin(), out.end(), [](const Tuple& a, const Tuple& b) { return a.L < b.L; });
  return out;
}

std::string label(const Tuple& t) {
  std::ostringstream os;
  os << "(" << t.n << "," << t.k << "," << t.t << ",M=" << t.m << ")";
  return os.str();
}

void note(const std::string& line) {
  if (g_verbose) std::cerr << "  " << line << '\n';
}

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

Verdict worked_rates() {
  Verdict v;
  struct Case {
    const char* m;
    const char* rate;
    int download;
  };
  std::ostringstream detail;
  for (const Case& c : {Case{"2", "6/11", 132}, Case{"3", "36/91", 1092}}) {
    const auto start = Clock::now();
    std::ostringstream out, err;
    const int code = cli::run({"simulate", "--n", "4", "--k", "2", "--t", "2", "--m", c.m, "--desired", "1", "--seed", "7"},
                              out, err);
    const double secs = since(start);
    if (code != 0) {
      v.pass = false;
      detail << "M=" << c.m << " exit " << code << ": " << err.str() << "; ";
      continue;
    }
    const auto j = nlohmann::json::parse(out.str());
    const bool ok = j.at("rate") == c.rate && j.at("download_total") == c.download && j.at("correct") == true &&
                    secs < 1.0;
    v.pass = v.pass && ok;
    detail << "M=" << c.m << " rate " << j.at("rate").get<std::string>() << " download "
           << j.at("download_total").get<int>() << " correct " << j.at("correct") << " " << secs << "s; ";
  }
  v.detail = detail.str();
  return v;
}

Verdict rate_cross_check() {
  Verdict v;
  int checked = 0;
  for (const Tuple& t : sweep_tuples()) {
    const QueryPlan plan(make_params(t.n, t.k, t.t, t.m));
    const Accounting acc = accounting(plan);
    const Rational expect = rate_scheme(t.n, t.k, t.t, t.m);
    ++checked;
    if (acc.rate != expect) {
      v.pass = false;
      v.detail += label(t) + " simulated " + acc.rate.str() + " vs " + expect.str() + "; ";
    }
  }
  v.detail = std::to_string(checked) + " tuples, rates equal exactly" + (v.pass ? "" : "? no: " + v.detail);
  return v;
}

struct Coverage {
  int run = 0;
  std::vector<std::string> skipped;
};

std::string coverage_text(const Coverage& c, std::uint64_t max_l) {
  std::string s = std::to_string(c.run) + " tuples run";
  if (!c.skipped.empty()) {
    s += "; " + std::to_string(c.skipped.size()) + " tuples with L > " + std::to_string(max_l) +
         " not run (infeasible on this machine):";
    for (const auto& x : c.skipped) s += " " + x;
  }
  return s;
}

Verdict correctness_sweep(std::uint64_t max_l) {
  Verdict v;
  Coverage cov;
  int retrievals = 0;
  for (const Tuple& t : sweep_tuples()) {
    if (t.L > max_l) {
      cov.skipped.push_back(label(t) + "[L=" + std::to_string(t.L) + "]");
      continue;
    }
    const auto start = Clock::now();
    const SchemeParams params = make_params(t.n, t.k, t.t, t.m);
    const QueryPlan plan(params);
    const std::uint64_t expected_download = accounting(plan).download_total;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed * 1000003 + static_cast<std::uint64_t>(t.n * 1000 + t.k * 100 + t.t * 10 + t.m));
      const Database db = setup(params, StorageCode::vandermonde(params.field(), t.k, t.n), rng);
      for (int desired = 1; desired <= t.m; ++desired) {
        const QueryBundle bundle = generate_queries(plan, desired, rng());
        const AnswerSet answers = answer_all(db, bundle);
        std::uint64_t downloaded = 0;
        for (const auto& a : answers.per_server) downloaded += a.size();
        const FieldMatrix got = decode(plan, db.storage, bundle, answers);
        ++retrievals;
        if (got != db.files[static_cast<std::size_t>(desired - 1)] || downloaded != expected_download) {
          v.pass = false;
          v.detail += label(t) + " seed " + std::to_string(seed) + " desired " + std::to_string(desired) + " wrong; ";
        }
      }
    }
    ++cov.run;
    note(label(t) + " L=" + std::to_string(t.L) + " " + std::to_string(since(start)) + "s");
  }
  if (!cov.skipped.empty()) v.pass = false;
  v.detail = std::to_string(retrievals) + " retrievals bit-exact" + (v.detail.empty() ? "" : " except: " + v.detail) +
             "; " + coverage_text(cov, max_l);
  return v;
}

Verdict privacy_sweep(std::uint64_t max_l) {
  Verdict v;
  Coverage cov;
  int views = 0;
  // Anchors from the worked examples.
  for (auto [m, anchor] : {std::pair{2, 30u}, std::pair{3, 180u}}) {
    if (expected_view_dimension(make_params(4, 2, 2, m)) != anchor) {
      v.pass = false;
      v.detail += "anchor M=" + std::to_string(m) + " off; ";
    }
  }
  for (const Tuple& t : sweep_tuples()) {
    if (t.L > max_l) {
      cov.skipped.push_back(label(t) + "[L=" + std::to_string(t.L) + "]");
      continue;
    }
    const auto start = Clock::now();
    const SchemeParams params = make_params(t.n, t.k, t.t, t.m);
    const QueryPlan plan(params);
    const auto subsets = k_subsets(t.n, t.t);
    for (int desired = 1; desired <= t.m; ++desired) {
      const QueryBundle bundle = generate_queries(plan, desired, 77 + static_cast<std::uint64_t>(desired));
      for (const auto& subset : subsets) {
        ++views;
        if (!view_is_private(params, audit_ranks(extract_view(bundle, subset)))) {
          v.pass = false;
          v.detail += label(t) + " desired " + std::to_string(desired) + " deficit; ";
        }
      }
    }
    ++cov.run;
    note(label(t) + " L=" + std::to_string(t.L) + " " + std::to_string(since(start)) + "s");
  }
  if (!cov.skipped.empty()) v.pass = false;
  v.detail = std::to_string(views) + " colluder views with count = rank = expected" +
             (v.detail.empty() ? "" : " except: " + v.detail) + "; " + coverage_text(cov, max_l);
  return v;
}

Verdict negative_control() {
  const SchemeParams params = make_params(4, 2, 2, 3);
  const QueryPlan plan(params);
  QueryOptions broken;
  broken.allocation = RowAllocation::kReuseAcrossGroups;
  int caught = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const QueryBundle bundle = generate_queries(plan, 1, seed, broken);
    bool deficit = false;
    for (const auto& subset : k_subsets(4, 2))
      deficit = deficit || !view_is_private(params, audit_ranks(extract_view(bundle, subset)));
    caught += deficit;
  }
  return {caught >= 1, "row reuse detected on " + std::to_string(caught) + " of 20 seeds"};
}

Verdict table_reproduction() {
  const double cells[6][4] = {{0.5454, 0.2500, 0.6000, 0.5714}, {0.3956, 0.2500, 0.4286, 0.4324},
                              {0.3219, 0.2500, 0.3333, 0.3657}, {0.2786, 0.2500, 0.2727, 0.3278},
                              {0.2506, 0.2500, 0.2308, 0.3041}, {0.2312, 0.2500, 0.2000, 0.2885}};
  const char* orders[6] = {"R3>C>R1>R2", "C>R3>R1>R2", "C>R3>R1>R2", "C>R1>R3>R2", "C>R1>R2>R3", "C>R2>R1>R3"};
  const auto rows = compare_table(4, 2, 2, 2, 7, std::pair{3, 2});
  Verdict v;
  int matched = 0;
  int order_ok = 0;
  if (rows.size() != 6) return {false, "expected 6 rows"};
  for (std::size_t i = 0; i < 6; ++i) {
    if (!rows[i].r3) return {false, "missing R3 column"};
    const Rational* vals[4] = {&rows[i].r1, &rows[i].r2, &*rows[i].r3, &rows[i].c};
    for (int j = 0; j < 4; ++j) {
      if (std::abs(vals[j]->to_double() - cells[i][j]) < 1e-4) {
        ++matched;
      } else {
        v.detail += "M=" + std::to_string(i + 2) + " col " + std::to_string(j) + " " + vals[j]->decimal(6) + "; ";
      }
    }
    order_ok += rows[i].order == orders[i];
  }
  v.pass = matched == 24 && order_ok == 6;
  v.detail = std::to_string(matched) + "/24 cells within 1e-4, " + std::to_string(order_ok) + "/6 orderings" +
             (v.detail.empty() ? "" : ": " + v.detail);
  return v;
}

Verdict threshold() {
  const auto m = threshold_M(30, 20, 10);
  const Rational margin = rate_scheme(30, 20, 10, 30) - rate_fgh(30, 20, 10);
  const bool ok = m == 30 && margin > Rational(0) && margin < Rational(1, 10'000'000);
  std::ostringstream os;
  os << "threshold_M(30,20,10) = " << (m ? std::to_string(*m) : "none") << ", margin at M=30 = " << margin.to_double();
  return {ok, os.str()};
}

Verdict degenerate_agreement() {
  int checked = 0;
  for (auto [n, k, t] : testing::regime_triples(10)) {
    if (k != 1 && t != 1) continue;
    for (int m = 1; m <= 6; ++m) {
      ++checked;
      if (rate_scheme(n, k, t, m) != degenerate_capacity(n, k, t, m)) {
        return {false, "mismatch at (" + std::to_string(n) + "," + std::to_string(k) + "," + std::to_string(t) +
                           ",M=" + std::to_string(m) + ")"};
      }
    }
  }
  return {true, std::to_string(checked) + " degenerate tuples equal exactly"};
}

Verdict monte_carlo_privacy() {
  const SchemeParams params = make_params(3, 1, 1, 2);
  const auto statistic = *parse_statistic("echelon-hash");
  Verdict v;
  std::ostringstream os;
  for (int server = 1; server <= 3; ++server) {
    const auto r = audit_distribution(params, {server}, 10'000, statistic);
    v.pass = v.pass && r.p_value > 0.01;
    os << "server " << server << ": chi2 " << r.chi_square << " dof " << r.dof << " p " << r.p_value << "; ";
  }
  v.detail = os.str();
  return v;
}

Verdict mds_machinery() {
  const PrimeField field(11);
  Rng rng(5);
  long round_trips = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      const MixingCode code = rs_code(n, k, field);
      const FieldMatrix message = random_matrix(field, k, 3, rng);
      const FieldMatrix codeword = code.encode(message);
      for (const auto& subset : k_subsets(static_cast<int>(n), static_cast<int>(k))) {
        std::vector<KnownSymbol> known;
        for (int pos : subset) {
          auto row = codeword.row(static_cast<std::size_t>(pos - 1));
          known.push_back({static_cast<std::size_t>(pos - 1), {row.begin(), row.end()}});
        }
        ++round_trips;
        if (erasure_decode(code, known) != codeword) {
          return {false, "erasure decode failed for n=" + std::to_string(n) + " k=" + std::to_string(k)};
        }
      }
    }
  }
  int vandermonde = 0;
  for (int n = 2; n <= 8; ++n)
    for (int k = 1; k <= n; ++k) {
      if (!verify_mds(StorageCode::vandermonde(field, k, n))) return {false, "Vandermonde rejected"};
      ++vandermonde;
    }
  const StorageCode duplicate(FieldMatrix::from_rows(field, {{1, 1, 1, 1}, {2, 2, 3, 4}}));
  if (verify_mds(duplicate)) return {false, "duplicated-column generator accepted"};
  return {true, std::to_string(round_trips) + " erasure round trips, " + std::to_string(vandermonde) +
                    " Vandermonde generators accepted, duplicated column rejected"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::uint64_t max_l = 1296;
  std::vector<int> only;
  app.add_option("--max-l", max_l, "largest L run in the sweeps")->capture_default_str();
  app.add_option("--only", only, "criteria to run, e.g. 3,4")->delimiter(',');
  app.add_flag("--verbose", g_verbose, "per-tuple timings on stderr");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "worked-example rates", 2.0, worked_rates},
      {2, "rate cross-check over the sweep", 30.0, rate_cross_check},
      {3, "correctness sweep", 120.0, [&] { return correctness_sweep(max_l); }},
      {4, "privacy rank audit", 120.0, [&] { return privacy_sweep(max_l); }},
      {5, "negative control", 60.0, negative_control},
      {6, "comparison table", 1.0, table_reproduction},
      {7, "threshold", 1.0, threshold},
      {8, "degenerate agreement", 1.0, degenerate_agreement},
      {9, "Monte-Carlo privacy", 120.0, monte_carlo_privacy},
      {10, "MDS machinery", 10.0, mds_machinery},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = since(start);
    const bool in_time = secs < c.budget_seconds;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::ostringstream time;
    time.precision(3);
    time << std::fixed << secs << "s / budget " << c.budget_seconds << "s" << (in_time ? "" : " EXCEEDED");
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << " [" << time.str() << "]: " << v.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
