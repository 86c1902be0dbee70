/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vizrec/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vizrec/csv.hpp"
#include "vizrec/error.hpp"
#include "vizrec/experiments.hpp"
#include "vizrec/preprocess.hpp"
#include "vizrec/recommender.hpp"
#include "vizrec/service.hpp"
#include "vizrec/table.hpp"

namespace vizrec {
namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("VIZREC_LOG");
  if (env == nullptr) return Level::Warn;
  const std::string v = env;
  if (v == "error" || v == "0") return Level::Error;
  if (v == "info" || v == "2") return Level::Info;
  if (v == "debug" || v == "3") return Level::Debug;
  return Level::Warn;
}

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err), level_(log_level()) {}
  void operator()(Level level, const std::string& msg) const {
    static constexpr const char* names[] = {"error", "warn", "info", "debug"};
    if (level <= level_) err_ << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
  }

 private:
  std::ostream& err_;
  Level level_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw InvalidArgument("'" + path + "' is not valid JSON");
  return j;
}

// A path to a JSON file, or the JSON text itself.
nlohmann::json json_argument(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg.compare(first, 4, "true") == 0)) {
    auto j = nlohmann::json::parse(arg, nullptr, false);
    if (j.is_discarded()) throw InvalidArgument("inline JSON argument is malformed");
    return j;
  }
  return read_json(arg);
}

std::vector<Op> parse_ops(const std::string& text) {
  std::vector<Op> ops;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(' '));
    tok.erase(tok.find_last_not_of(' ') + 1);
    if (!tok.empty()) ops.push_back(parse_op(tok));
  }
  if (ops.empty()) throw InvalidArgument("operator list is empty");
  return ops;
}

// Writes to --out when given, otherwise to stdout.
void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write '" + out_path + "'");
  f << text;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

struct RecommendArgs {
  std::string csv;
  std::string schema;
  std::string reference;
  std::string group_by;
  double delta = 0.05;
  std::optional<double> eps_v;
  bool one_sample = false;
  std::optional<int> vc_dim;
  std::string ops = "<=";
  std::size_t max_features = 3;
  double c = 0.5;
  std::string log_base = "2";
  std::size_t buckets = 10;
  std::string format = "table";
  std::string out;
  unsigned threads = 1;
  bool no_preprocess = false;
  std::optional<double> eps_rho;
  std::vector<std::string> protect;
  bool baseline = false;
  double alpha = 0.05;
  bool no_bonferroni = false;
};

std::string recommendation_table(const RecommendationResult& r) {
  std::ostringstream ss;
  ss << "reference: " << canonical_string(r.reference.predicate) << " group-by " << r.reference.group_by
     << " (support " << r.reference_pmf.support << ")\n";
  ss << "d=" << r.bounds.vc_dimension << " delta=" << format_number(r.bounds.delta)
     << " gamma_min=" << format_number(r.gamma_min) << " candidates=" << r.stats.emitted << "\n";
  if (!r.recommendations.empty()) {
    ss << std::left << std::setw(5) << "rank" << std::setw(9) << "support" << std::setw(10) << "gamma"
       << std::setw(10) << "dist" << std::setw(10) << "eps_sum" << std::setw(10) << "interest" << "predicate\n";
    std::size_t rank = 1;
    for (const auto& rec : r.recommendations) {
      ss << std::left << std::setw(5) << rank++ << std::setw(9) << rec.support << std::setw(10)
         << fixed(rec.selectivity) << std::setw(10) << fixed(rec.distance) << std::setw(10)
         << fixed(rec.uncertainty) << std::setw(10) << fixed(rec.interest)
         << canonical_string(rec.candidate.predicate) << "\n";
    }
  }
  ss << r.recommendations.size() << " safe recommendations\n";
  return ss.str();
}

std::string recommendation_csv(const RecommendationResult& r) {
  std::ostringstream ss;
  ss << "rank,predicate,support,selectivity,distance,eps_reference,eps_candidate,uncertainty,interest\n";
  std::size_t rank = 1;
  for (const auto& rec : r.recommendations)
    ss << rank++ << "," << csv_escape(canonical_string(rec.candidate.predicate)) << "," << rec.support << ","
       << format_number(rec.selectivity) << "," << format_number(rec.distance) << ","
       << format_number(rec.eps_reference) << "," << format_number(rec.eps_candidate) << ","
       << format_number(rec.uncertainty) << "," << format_number(rec.interest) << "\n";
  return ss.str();
}

std::string baseline_text(const BaselineResult& r, const std::string& format) {
  if (format == "json") return to_json(r).dump(2) + "\n";
  std::ostringstream ss;
  if (format == "csv") {
    ss << "rank,predicate,support,statistic,dof,p_value\n";
    std::size_t rank = 1;
    for (const auto& e : r.discoveries)
      ss << rank++ << "," << csv_escape(canonical_string(e.candidate.predicate)) << "," << e.support << ","
         << format_number(e.test.statistic) << "," << e.test.dof << "," << format_number(e.test.p_value) << "\n";
    return ss.str();
  }
  ss << "M=" << r.hypotheses << " threshold=" << format_number(r.threshold)
     << " uncorrected p<" << format_number(r.alpha) << ": " << r.uncorrected_hits << "\n";
  for (const auto& e : r.discoveries)
    ss << format_number(e.test.p_value) << "  " << canonical_string(e.candidate.predicate) << "\n";
  ss << r.discoveries.size() << " chi-square discoveries\n";
  return ss.str();
}

int do_recommend(const RecommendArgs& a, std::ostream& out, const Log& log) {
  ExplorationConfig config;
  config.delta = a.delta;
  config.eps_v = a.eps_v;
  config.one_sample = a.one_sample;
  config.vc_dimension = a.vc_dim;
  config.operators = parse_ops(a.ops);
  config.max_features = a.max_features;
  config.c = a.c;
  config.log_base = parse_log_base(a.log_base);
  config.buckets = a.buckets;
  config.threads = a.threads;
  config.eps_rho = a.eps_rho;
  config.protect = a.protect;
  config.protect.push_back(a.group_by);
  if (a.no_preprocess) config.drop_constant = config.drop_identifier = false;
  validate(config);

  LoadOptions load;
  load.name = a.csv;
  if (!a.schema.empty()) load.kinds = load_schema_file(a.schema);
  Table table = load_table_file(a.csv, load);
  log(Level::Info, "loaded " + std::to_string(table.row_count()) + " rows, " +
                       std::to_string(table.column_count()) + " columns");

  auto reduced = preprocess(table, config);
  for (const auto& d : reduced.report.dropped)
    log(Level::Info, "dropped " + d.feature + " (" + std::string(to_string(d.reason)) +
                         ", statistic " + format_number(d.statistic) + ")");
  log(Level::Debug, "preprocess report: " + to_json(reduced.report).dump());
  table = std::move(reduced.table);

  const auto pred = a.reference.empty() ? Predicate{} : predicate_from_json(json_argument(a.reference), &table);
  const Visualization reference{pred, a.group_by, a.buckets};

  if (a.baseline) {
    const auto r = baseline_chi2_recommend(reference, table, config, a.alpha, !a.no_bonferroni);
    emit(baseline_text(r, a.format), a.out, out);
    return 0;
  }
  const auto result = vizrec(reference, table, config);
  log(Level::Info, "enumeration: " + to_json(result.stats).dump());
  if (a.format == "json")
    emit(to_json(result).dump(2) + "\n", a.out, out);
  else if (a.format == "csv")
    emit(recommendation_csv(result), a.out, out);
  else
    emit(recommendation_table(result), a.out, out);
  return 0;
}

int do_ingest(const std::string& csv, const std::string& schema, const std::string& format, std::ostream& out) {
  LoadOptions load;
  load.name = csv;
  if (!schema.empty()) load.kinds = load_schema_file(schema);
  const auto table = load_table_file(csv, load);
  auto cols = nlohmann::json::array();
  for (std::size_t i = 0; i < table.column_count(); ++i) {
    const auto& col = table.column(i);
    const auto st = column_stats(table, col.name);
    cols.push_back({{"name", col.name}, {"kind", std::string(to_string(col.kind))}, {"distinct", st.distinct},
                    {"nulls", st.nulls},
                    {"min", std::isnan(st.min) ? nlohmann::json(nullptr) : nlohmann::json(st.min)},
                    {"max", std::isnan(st.max) ? nlohmann::json(nullptr) : nlohmann::json(st.max)}});
  }
  if (format == "json") {
    out << nlohmann::json{{"name", table.name()}, {"n", table.row_count()}, {"columns", cols}}.dump(2) << "\n";
    return 0;
  }
  out << "n=" << table.row_count() << ", " << table.column_count() << " columns\n";
  for (const auto& c : cols) {
    out << std::left << std::setw(20) << c["name"].get<std::string>() << std::setw(12)
        << c["kind"].get<std::string>() << "distinct=" << c["distinct"] << " nulls=" << c["nulls"];
    if (!c["min"].is_null()) out << " min=" << format_number(c["min"]) << " max=" << format_number(c["max"]);
    out << "\n";
  }
  return 0;
}

struct ExperimentArgs {
  std::string name;
  std::uint64_t seed = 1;
  std::string out = "results";
  std::string stamp;
  std::optional<std::size_t> n;
  std::optional<int> vc_dim;
  std::optional<double> delta;
  std::string log_base;
  std::string fixture;
};

ExperimentResult run_named(const ExperimentArgs& a) {
  const auto base = a.log_base.empty() ? LogBase::Two : parse_log_base(a.log_base);
  if (a.name == "random-data") {
    RandomDataParams p;
    p.seed = a.seed;
    p.log_base = base;
    if (a.n) p.n = *a.n;
    if (a.vc_dim) p.vc_dimension = *a.vc_dim;
    if (a.delta) p.delta = *a.delta;
    return run_random_data_experiment(p);
  }
  if (a.name == "chi2-vs-vc") {
    Chi2VcParams p;
    p.log_base = base;
    if (a.vc_dim) p.vc_dimension = *a.vc_dim;
    if (a.delta) p.delta = *a.delta;
    const auto fixture = a.fixture.empty() ? make_chi2_vs_vc_fixture() : chi2_vs_vc_fixture_from_json(read_json(a.fixture));
    return run_chi2_vs_vc_example(fixture, p);
  }
  if (a.name == "min-samples") return run_min_samples_curve();
  if (a.name == "chernoff-vs-vc") {
    ChernoffParams p;
    p.seed = a.seed;
    p.log_base = base;
    if (a.n) p.n_max = *a.n;
    if (a.vc_dim) p.vc_dimension = *a.vc_dim;
    if (a.delta) p.delta = *a.delta;
    return run_chernoff_vs_vc(p);
  }
  if (a.name == "search-space-restriction") {
    RestrictionParams p;
    p.seed = a.seed;
    if (a.n) p.n = *a.n;
    if (a.delta) p.delta = *a.delta;
    return run_search_space_restriction(p);
  }
  throw InvalidArgument("unknown experiment '" + a.name + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Visualization recommendations with VC-dimension error control", "vizrec"};
  app.require_subcommand(1);
  const Log log(err);

  std::string ingest_csv, ingest_schema, ingest_format = "table";
  auto* ingest = app.add_subcommand("ingest", "Load a CSV and report its schema");
  ingest->add_option("csv", ingest_csv, "CSV file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--schema", ingest_schema, "JSON file mapping columns to kinds")->check(CLI::ExistingFile);
  ingest->add_option("--format", ingest_format)->check(CLI::IsMember({"json", "table"}));

  RecommendArgs ra;
  auto* rec = app.add_subcommand("recommend", "Rank safe recommendations for a reference visualization");
  rec->add_option("csv", ra.csv, "CSV file")->required()->check(CLI::ExistingFile);
  rec->add_option("--schema", ra.schema)->check(CLI::ExistingFile);
  rec->add_option("--reference", ra.reference, "Predicate JSON file or inline JSON (default: true)");
  rec->add_option("--group-by", ra.group_by)->required();
  rec->add_option("--delta", ra.delta)->check(CLI::Range(0.0, 1.0));
  rec->add_option("--eps-v", ra.eps_v, "Visual discernibility threshold")->check(CLI::Range(0.0, 1.0));
  rec->add_flag("--one-sample", ra.one_sample, "Treat the reference pmf as exact");
  rec->add_option("--vc-dim", ra.vc_dim, "Override the VC dimension of the query class")->check(CLI::PositiveNumber);
  rec->add_option("--ops", ra.ops, "Comma-separated operators, e.g. \"<=,>=\"");
  rec->add_option("--max-features", ra.max_features);
  rec->add_option("--c", ra.c)->check(CLI::PositiveNumber);
  rec->add_option("--log-base", ra.log_base)->check(CLI::IsMember({"2", "e"}));
  rec->add_option("--buckets", ra.buckets)->check(CLI::Range(2, 100000));
  rec->add_option("--format", ra.format)->check(CLI::IsMember({"json", "csv", "table"}));
  rec->add_option("--out", ra.out, "Output file");
  rec->add_option("--threads", ra.threads)->check(CLI::Range(1, 1024));
  rec->add_flag("--no-preprocess", ra.no_preprocess, "Keep constant and identifier-like columns");
  rec->add_option("--eps-rho", ra.eps_rho, "Drop one of each pair with 1 - rho^2 below this")->check(CLI::NonNegativeNumber);
  rec->add_option("--protect", ra.protect, "Columns never dropped by preprocessing");
  rec->add_flag("--baseline-chi2", ra.baseline, "Run the per-visualization chi-square baseline instead");
  rec->add_option("--alpha", ra.alpha)->check(CLI::Range(0.0, 1.0));
  rec->add_flag("--no-bonferroni", ra.no_bonferroni);

  std::string class_file, vc_format = "text";
  std::optional<std::size_t> vc_support;
  double vc_delta = 0.05;
  auto* vcb = app.add_subcommand("vc-bound", "VC dimension bound of a query class");
  vcb->add_option("--class", class_file, "Query class JSON")->required()->check(CLI::ExistingFile);
  vcb->add_option("--support", vc_support, "Also report epsilon_bar at this support")->check(CLI::PositiveNumber);
  vcb->add_option("--delta", vc_delta)->check(CLI::Range(0.0, 1.0));
  vcb->add_option("--format", vc_format)->check(CLI::IsMember({"json", "text"}));

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Reproducible synthetic experiments");
  exp->require_subcommand(1);
  auto* run = exp->add_subcommand("run", "Run one experiment and write results/<name>/<stamp>.json/.csv");
  run->add_option("name", ea.name)->required()->check(CLI::IsMember(experiment_names()));
  run->add_option("--seed", ea.seed);
  run->add_option("--out", ea.out, "Results root directory");
  run->add_option("--stamp", ea.stamp, "File stem (default: UTC time)");
  run->add_option("--n", ea.n)->check(CLI::PositiveNumber);
  run->add_option("--vc-dim", ea.vc_dim)->check(CLI::PositiveNumber);
  run->add_option("--delta", ea.delta)->check(CLI::Range(0.0, 1.0));
  run->add_option("--log-base", ea.log_base)->check(CLI::IsMember({"2", "e"}));
  run->add_option("--fixture", ea.fixture, "Pmf pair for chi2-vs-vc")->check(CLI::ExistingFile);
  auto* list = exp->add_subcommand("list", "List experiment names");
  std::string fixture_out;
  auto* fixture = exp->add_subcommand("fixture", "Write the chi2-vs-vc pmf pair as JSON");
  fixture->add_option("--out", fixture_out, "Output file (default: stdout)");

  std::string dataset_kind, dataset_out;
  std::size_t dataset_n = 0;
  std::uint64_t dataset_seed = 1;
  auto* dataset = exp->add_subcommand("dataset", "Write a synthetic table as CSV");
  dataset->add_option("kind", dataset_kind)->required()->check(CLI::IsMember({"uniform", "planted", "restriction"}));
  dataset->add_option("--n", dataset_n, "Rows (default depends on the kind)")->check(CLI::PositiveNumber);
  dataset->add_option("--seed", dataset_seed);
  dataset->add_option("--out", dataset_out, "Output file (default: stdout)");

  std::string host = "127.0.0.1", cors = "*";
  int port = 8080;
  std::size_t max_upload_mb = 64;
  unsigned serve_threads = 1;
  auto* serve = app.add_subcommand("serve", "Start the JSON-over-HTTP service");
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--max-upload-mb", max_upload_mb)->check(CLI::PositiveNumber);
  serve->add_option("--threads", serve_threads)->check(CLI::Range(1, 1024));
  serve->add_option("--cors-origin", cors);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (ingest->parsed()) return do_ingest(ingest_csv, ingest_schema, ingest_format, out);
    if (rec->parsed()) return do_recommend(ra, out, log);
    if (vcb->parsed()) {
      const auto spec = query_class_from_json(read_json(class_file));
      const int d = vc_dimension_bound(spec);
      if (vc_format == "json") {
        nlohmann::json j{{"vc_dimension", d}, {"query_class", to_json(spec)}};
        if (vc_support) j["epsilon_bar"] = to_json(epsilon_bar(d, vc_delta, *vc_support));
        out << j.dump(2) << "\n";
      } else {
        out << d << "\n";
        if (vc_support) out << "epsilon_bar=" << format_number(epsilon_bar(d, vc_delta, *vc_support).value) << "\n";
      }
      return 0;
    }
    if (list->parsed()) {
      for (const auto& n : experiment_names()) out << n << "\n";
      return 0;
    }
    if (fixture->parsed()) {
      emit(to_json(make_chi2_vs_vc_fixture()).dump(2) + "\n", fixture_out, out);
      return 0;
    }
    if (dataset->parsed()) {
      Table t;
      if (dataset_kind == "uniform")
        t = gen_uniform_dataset(dataset_n ? dataset_n : 100000, dataset_seed);
      else if (dataset_kind == "planted")
        t = gen_planted_dataset(dataset_n ? dataset_n : 10000, dataset_seed);
      else
        t = gen_restriction_dataset(dataset_n ? dataset_n : 20000, dataset_seed);
      emit(to_csv(t), dataset_out, out);
      return 0;
    }
    if (run->parsed()) {
      const auto result = run_named(ea);
      const auto files = write_experiment(result, ea.out, ea.stamp.empty() ? utc_stamp() : ea.stamp);
      log(Level::Info, "summary: " + result.summary.dump());
      out << files.json.string() << "\n" << files.csv.string() << "\n";
      return 0;
    }
    if (serve->parsed()) {
      ServiceOptions options;
      options.max_upload_bytes = max_upload_mb << 20;
      options.cors_origin = cors;
      options.threads = serve_threads;
      Service service(options);
      log(Level::Warn, "listening on " + host + ":" + std::to_string(port));
      if (!service.serve(host, port)) {
        log(Level::Error, "could not bind " + host + ":" + std::to_string(port));
        return 1;
      }
      return 0;
    }
  } catch (const Error& e) {
    log(Level::Error, e.what());
    return 1;
  } catch (const std::exception& e) {
    log(Level::Error, e.what());
    return 1;
  }
  return 1;
}

}  // namespace vizrec
