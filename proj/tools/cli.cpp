#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pirlab/combinatorics.hpp"
#include "pirlab/errors.hpp"
#include "pirlab/mds.hpp"
#include "pirlab/plan.hpp"
#include "pirlab/privacy.hpp"
#include "pirlab/protocol.hpp"
#include "pirlab/rates.hpp"

namespace pirlab::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 1;

struct SchemeArgs {
  int n = 0;
  int k = 0;
  int t = 0;
  int m = 0;
  std::string q = "auto";
};

void add_scheme_options(CLI::App* cmd, SchemeArgs& a, bool with_m = true) {
  cmd->add_option("--n", a.n, "number of servers N")->required();
  cmd->add_option("--k", a.k, "storage code dimension K")->required();
  cmd->add_option("--t", a.t, "collusion size T")->required();
  if (with_m) cmd->add_option("--m", a.m, "number of files M")->required();
  cmd->add_option("--q", a.q, "field size: a prime, or \"auto\"")->capture_default_str();
}

std::optional<std::uint64_t> parse_q(const std::string& text) {
  if (text == "auto") return std::nullopt;
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ParameterError("--q must be a prime or \"auto\", got \"" + text + "\"");
  }
  return value;
}

SchemeParams scheme_params(const SchemeArgs& a) { return make_params(a.n, a.k, a.t, a.m, parse_q(a.q)); }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path);
  return json::parse(in);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path);
  out << j.dump(2) << '\n';
}

ServerSet parse_servers(const std::string& text) {
  ServerSet servers;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || end != item.data() + item.size()) {
      throw ParameterError("--colluders expects a comma-separated list of servers, got \"" + text + "\"");
    }
    servers.push_back(v);
  }
  std::sort(servers.begin(), servers.end());
  return servers;
}

std::vector<FieldMatrix> read_files(const std::string& path) {
  const json j = read_json(path);
  const json& list = j.is_object() && j.contains("files") ? j.at("files") : j;
  if (!list.is_array()) throw ShapeError("files JSON must be an array of matrices or {\"files\": [...]}");
  std::vector<FieldMatrix> files;
  for (const auto& entry : list) files.push_back(matrix_from_json(entry));
  return files;
}

// plan ---------------------------------------------------------------------

struct PlanArgs {
  SchemeArgs scheme;
};

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  const SchemeParams params = scheme_params(a.scheme);
  const QueryPlan plan(params);
  json j = plan_to_json(plan);
  const AssistingArray array = render_assisting_array(params.N, params.K);
  if (array.aligned) {
    j["assisting_array"] = assisting_array_to_json(array);
    j["assisting_array"]["text"] = array.text();
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

// simulate -----------------------------------------------------------------

struct SimulateArgs {
  SchemeArgs scheme;
  int desired = 1;
  std::uint64_t seed = kDefaultSeed;
  std::string generator;
  std::string files;
  std::string export_path;
  bool shuffle_rows = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const SchemeParams params = scheme_params(a.scheme);
  const QueryPlan plan(params);
  StorageCode storage = a.generator.empty() ? StorageCode::vandermonde(params.field(), params.K, params.N)
                                            : storage_code_from_json(read_json(a.generator));
  // File contents and query randomness come from separate streams so that
  // supplying --files does not change the queries.
  Rng file_rng(a.seed ^ 0x9E3779B97F4A7C15ULL);
  const Database db = a.files.empty() ? setup(params, std::move(storage), file_rng)
                                      : setup(params, std::move(storage), read_files(a.files));

  QueryOptions options;
  options.shuffle_rows = a.shuffle_rows;
  const QueryBundle bundle = generate_queries(plan, a.desired, a.seed, options);
  const AnswerSet answers = answer_all(db, bundle);
  const FieldMatrix decoded = decode(plan, db.storage, bundle, answers);
  const bool correct = decoded == db.files[static_cast<std::size_t>(a.desired - 1)];
  const Accounting acc = accounting(plan);

  if (!a.export_path.empty()) write_json(a.export_path, transcript_to_json(public_transcript(bundle, &answers)));

  json j = {{"params", params_to_json(params)},
            {"q", params.q},
            {"desired", a.desired},
            {"rate", acc.rate.str()},
            {"rate_decimal", acc.rate.decimal(6)},
            {"download_total", acc.download_total},
            {"upload_total", bundle.upload_size()},
            {"correct", correct},
            {"seed", a.seed}};
  out << j.dump(2) << '\n';
  if (!correct) {
    err << "decoded file differs from W^[" << a.desired << "]\n";
    return kExitFailure;
  }
  return kExitOk;
}

// audit --------------------------------------------------------------------

struct AuditArgs {
  SchemeArgs scheme;
  std::string colluders;
  bool all_subsets = false;
  int desired = 1;
  std::uint64_t seed = kDefaultSeed;
  int trials = 0;
  std::string statistic = "first-atom-vector-hash";
  double alpha = 0.01;
  std::string transcript;
  bool reuse_rows = false;
};

int cmd_audit(const AuditArgs& a, std::ostream& out, std::ostream& err) {
  const SchemeParams params = scheme_params(a.scheme);
  if (a.all_subsets == !a.colluders.empty()) {
    throw ParameterError("give exactly one of --colluders and --all-subsets");
  }
  const std::vector<ServerSet> subsets =
      a.all_subsets ? k_subsets(params.N, params.T) : std::vector<ServerSet>{parse_servers(a.colluders)};

  QueryOptions options;
  if (a.reuse_rows) options.allocation = RowAllocation::kReuseAcrossGroups;

  std::optional<QueryBundle> bundle;
  std::optional<Transcript> transcript;
  if (a.transcript.empty()) {
    bundle.emplace(generate_queries(QueryPlan(params), a.desired, a.seed, options));
  } else {
    transcript.emplace(transcript_from_json(read_json(a.transcript)));
    if (transcript->q != params.q || transcript->N != params.N || transcript->M != params.M ||
        transcript->L != params.L) {
      throw ShapeError("transcript does not match the given parameters");
    }
  }

  const std::uint64_t expected = expected_view_dimension(params);
  bool all_ok = true;
  json reports = json::array();
  for (const auto& colluders : subsets) {
    const CollusionView view = bundle ? extract_view(*bundle, colluders)
                                      : extract_view(*transcript, params.T, colluders);
    const auto audits = audit_ranks(view);
    json files = json::array();
    for (std::size_t m = 0; m < audits.size(); ++m) {
      files.push_back({{"file", m + 1},
                       {"count", audits[m].count},
                       {"rank", audits[m].rank},
                       {"full_rank", audits[m].full_rank}});
    }
    const bool ok = view_is_private(params, audits);
    all_ok = all_ok && ok;
    reports.push_back({{"colluders", colluders}, {"files", files}, {"ok", ok}});
  }

  json j = {{"params", params_to_json(params)}, {"expected", expected}, {"views", reports}};
  if (bundle) {
    j["desired"] = a.desired;
    j["seed"] = a.seed;
  }
  if (a.reuse_rows) j["row_allocation"] = "reuse-across-groups";

  bool distribution_ok = true;
  if (a.trials > 0) {
    const auto statistic = parse_statistic(a.statistic);
    if (!statistic) throw ParameterError("unknown statistic \"" + a.statistic + "\"");
    DistributionOptions dist;
    dist.seed = a.seed;
    dist.query = options;
    json tests = json::array();
    for (const auto& colluders : subsets) {
      const DistributionResult r = audit_distribution(params, colluders, a.trials, *statistic, dist);
      const bool pass = r.p_value > a.alpha;
      distribution_ok = distribution_ok && pass;
      tests.push_back({{"colluders", colluders},
                       {"chi_square", r.chi_square},
                       {"dof", r.dof},
                       {"bins", r.bins},
                       {"p_value", r.p_value},
                       {"pass", pass}});
    }
    j["distribution"] = {{"statistic", statistic_name(*statistic)},
                         {"trials", a.trials},
                         {"alpha", a.alpha},
                         {"tests", tests}};
  }
  j["all_ok"] = all_ok && distribution_ok;
  out << j.dump(2) << '\n';

  if (!all_ok) err << "rank audit failed: some view is not " << expected << "-dimensional per file\n";
  if (!distribution_ok) err << "distribution audit rejected at alpha = " << a.alpha << '\n';
  return all_ok && distribution_ok ? kExitOk : kExitFailure;
}

// rates --------------------------------------------------------------------

struct RatesArgs {
  SchemeArgs scheme;
  int m_min = 2;
  int m_max = 0;
  int d3 = 0;
  int dd = 0;
  std::string format = "csv";
};

int cmd_rates(const RatesArgs& a, std::ostream& out) {
  if ((a.d3 == 0) != (a.dd == 0)) throw ParameterError("--d3 and --dd go together");
  std::optional<std::pair<int, int>> dims;
  if (a.d3 != 0) dims = std::make_pair(a.d3, a.dd);
  const auto& s = a.scheme;
  const auto rows = compare_table(s.n, s.k, s.t, a.m_min, a.m_max, dims);
  if (a.format == "csv") {
    out << table_csv(rows);
    return kExitOk;
  }
  json j = {{"N", s.n}, {"K", s.k}, {"T", s.t}, {"rows", table_json(rows)}};
  const auto threshold = threshold_M(s.n, s.k, s.t);
  j["threshold_M"] = threshold ? json(*threshold) : json(nullptr);
  out << j.dump(2) << '\n';
  return kExitOk;
}

// verify-mds ---------------------------------------------------------------

struct VerifyArgs {
  std::string generator;
};

int cmd_verify_mds(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const StorageCode code = storage_code_from_json(read_json(a.generator));
  const auto bad = find_dependent_columns(code);
  json j = {{"K", code.K()}, {"N", code.N()}, {"q", code.field().modulus()}, {"mds", !bad}};
  if (bad) j["dependent_columns"] = *bad;
  out << j.dump(2) << '\n';
  if (bad) {
    err << "not MDS: columns";
    for (int c : *bad) err << ' ' << c;
    err << " are linearly dependent\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Private information retrieval from MDS-coded storage with colluding servers", "pirlab"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "print the block, slot and group structure as JSON");
  add_scheme_options(plan, plan_args.scheme);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "run one retrieval end to end and report rate and correctness");
  add_scheme_options(simulate, sim_args.scheme);
  simulate->add_option("--desired", sim_args.desired, "1-based index of the file to retrieve")->required();
  simulate->add_option("--seed", sim_args.seed, "seed for queries and random file contents")->capture_default_str();
  simulate->add_option("--generator", sim_args.generator, "storage code JSON (default: Vandermonde)");
  simulate->add_option("--files", sim_args.files, "file contents JSON (default: random)");
  simulate->add_option("--export", sim_args.export_path, "write the public transcript JSON here");
  simulate->add_flag("--shuffle-rows", sim_args.shuffle_rows, "permute each server's query rows");

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "check what colluding servers can see");
  add_scheme_options(audit, audit_args.scheme);
  audit->add_option("--colluders", audit_args.colluders, "comma-separated servers, e.g. 1,2");
  audit->add_flag("--all-subsets", audit_args.all_subsets, "audit every T-subset of servers");
  audit->add_option("--desired", audit_args.desired, "file retrieved in the audited session")->capture_default_str();
  audit->add_option("--seed", audit_args.seed, "session seed")->capture_default_str();
  audit->add_option("--trials", audit_args.trials, "Monte-Carlo trials per arm (0: skip)")->capture_default_str();
  audit->add_option("--statistic", audit_args.statistic,
                    "first-atom-vector-hash | per-file-pivot-profile | rank-profile")
      ->capture_default_str();
  audit->add_option("--alpha", audit_args.alpha, "significance level for the distribution test")
      ->capture_default_str();
  audit->add_option("--transcript", audit_args.transcript, "audit an exported transcript instead of a fresh session");
  audit->add_flag("--reuse-rows", audit_args.reuse_rows, "deliberately broken allocation (negative control)");

  RatesArgs rates_args;
  auto* rates = app.add_subcommand("rates", "tabulate R1, R2, R3 and the conjectured capacity");
  add_scheme_options(rates, rates_args.scheme, false);
  rates->add_option("--m-min", rates_args.m_min, "first M")->capture_default_str();
  rates->add_option("--m-max", rates_args.m_max, "last M")->required();
  rates->add_option("--d3", rates_args.d3, "D for the R3 column");
  rates->add_option("--dd", rates_args.dd, "d for the R3 column");
  rates->add_option("--format", rates_args.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify-mds", "check that every K generator columns are independent");
  verify->add_option("--generator", verify_args.generator, "storage code JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (plan->parsed()) return cmd_plan(plan_args, out);
    if (simulate->parsed()) return cmd_simulate(sim_args, out, err);
    if (audit->parsed()) return cmd_audit(audit_args, out, err);
    if (rates->parsed()) return cmd_rates(rates_args, out);
    if (verify->parsed()) return cmd_verify_mds(verify_args, out, err);
  } catch (const NotMDSError& e) {
    err << "not MDS: " << e.what() << '\n';
    return kExitFailure;
  } catch (const DecodeError& e) {
    err << "decode failed: " << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "malformed JSON: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pirlab::cli
