#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mimir/classify.hpp"
#include "mimir/codec.hpp"
#include "mimir/corpus.hpp"
#include "mimir/error.hpp"
#include "mimir/extractor.hpp"
#include "mimir/graph.hpp"
#include "mimir/mirror.hpp"
#include "mimir/prohibit.hpp"
#include "mimir/scheduler.hpp"
#include "mimir/seeder.hpp"
#include "mimir/synth.hpp"

namespace fs = std::filesystem;
using namespace mimir;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out << content;
}

std::string file_md5(const fs::path& p) { return to_hex(md5(read_file(p))); }

// A file hashes to its md5. A directory hashes to the md5 of its sorted
// "relative-path md5" lines, skipping manifests.
nlohmann::json hash_tree(const fs::path& p) {
  if (fs::is_regular_file(p)) return file_md5(p);
  if (!fs::is_directory(p)) return nullptr;
  std::vector<std::string> lines;
  for (const auto& e : fs::recursive_directory_iterator(p)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.jsonl") {
      lines.push_back(fs::relative(e.path(), p).generic_string() + " " + file_md5(e.path()));
    }
  }
  std::sort(lines.begin(), lines.end());
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  return nlohmann::json{{"files", lines.size()}, {"md5", to_hex(md5(joined))}};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

// host -> value from a two-column CSV with a header line.
std::map<std::string, std::string> read_pairs_csv(const fs::path& p) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    auto second = line.find(',', comma + 1);
    out[line.substr(0, comma)] = line.substr(comma + 1, second == std::string::npos ? std::string::npos : second - comma - 1);
  }
  return out;
}

struct Options {
  // global
  std::string log_level = "info";
  std::uint64_t seed = 42;
  std::string manifest;

  // seed
  std::string titles, engine_dir, manual, engines = "ahmia,torch,visitor";
  std::size_t k = 10;

  // crawl
  std::string seeds, fixture, transport = "fixture", proxy_endpoint = "127.0.0.1:9050", resume;
  std::size_t workers = 4;
  double timeout = 30.0;
  int max_attempts = kMaxAttempts;

  // dedup / graph / detect / predict
  std::string snapshot, clusters, categories, predictions, lexicon, category, model;
  std::vector<double> weights{0.3, 0.7};
  double threshold = 0.9;

  // classify-train
  std::string train, report, penalty = "l1", mode = "standard";
  double C = 1.0, l1_ratio = 0.5, tolerance = 1e-4;
  std::size_t folds = 10, cap = 200, max_iterations = 1000;
  bool no_grid = false, one_vs_one = false;

  // bench-hash
  std::string pairs, sweep;
  std::size_t max_positive = 1000, max_negative = 1000;

  // synthgen
  std::string spec = "default", topology;
  std::size_t n_uniques = 0;
  double fanout_mean = -1.0, exact_fraction = -1.0, max_magnitude = -1.0, volatility = -1.0;
  bool fixed_fanout = false;

  std::string out;
};

MirrorWeights weights_of(const Options& o) {
  MirrorWeights w;
  w.scheme = o.weights.at(0);
  w.content = o.weights.at(1);
  w.threshold = o.threshold;
  w.validate();
  return w;
}

// ---- subcommands -----------------------------------------------------------

void cmd_seed(const Options& o) {
  std::vector<std::string> titles;
  std::istringstream in(read_file(o.titles));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) titles.push_back(line);
  }
  auto keywords = extract_keywords(titles, o.k);
  for (const auto& kw : keywords) spdlog::info("keyword {} {:.4f}", kw.term, kw.score);
  std::vector<std::shared_ptr<SearchClient>> engines;
  for (const auto& name : split_list(o.engines)) {
    engines.push_back(std::make_shared<FixtureSearchClient>(name, fs::path(o.engine_dir) / name));
  }
  auto found = query_engines(keywords, engines);
  std::vector<std::string> manual;
  if (!o.manual.empty()) {
    std::istringstream m(read_file(o.manual));
    for (std::string line; std::getline(m, line);) {
      if (!line.empty() && line[0] != '#') manual.push_back(line);
    }
  }
  auto seeds = merge_seeds(found.seeds, manual);
  save_seeds(seeds, o.out);
  spdlog::info("{} seeds ({} surface results discarded, {} engine errors)", seeds.size(), found.surface_discarded,
               found.engine_errors);
}

int cmd_crawl(const Options& o) {
  auto seeds = load_seeds(o.seeds);
  std::unique_ptr<FetchTransport> transport;
  CrawlConfig cfg;
  cfg.workers = o.workers;
  cfg.max_attempts = o.max_attempts;
  cfg.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(o.timeout * 1000.0));
  if (o.transport == "fixture") {
    if (o.fixture.empty()) throw Error(ErrorCode::InvalidConfig, "--fixture is required with --transport fixture");
    transport = std::make_unique<FixtureTransport>(o.fixture);
  } else {
    transport = std::make_unique<ProxyTransport>(ProxyTransport::endpoint_from_env(o.proxy_endpoint));
    cfg.clock = [] {
      return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
    };
  }
  std::vector<PageRecord> resume;
  if (!o.resume.empty()) resume = load_snapshot(o.resume);
  auto result = run_crawl(seeds, *transport, cfg, resume);
  save_snapshot(result.records, o.out);
  std::size_t fetched = 0, unreachable = 0;
  for (const auto& r : result.records) {
    fetched += r.status.state == CrawlState::Fetched;
    unreachable += r.status.state == CrawlState::Unreachable;
  }
  spdlog::info("{} hosts: {} fetched, {} unreachable, {} windows", result.records.size(), fetched, unreachable,
               result.windows.size());
  if (result.aborted) {
    spdlog::error("crawl aborted ({}); resume with --resume {}", result.abort_reason, o.out);
    return kExitDomain;
  }
  return 0;
}

std::vector<MirrorCandidate> candidates_of(const std::vector<PageRecord>& records) {
  std::vector<MirrorCandidate> out;
  for (const auto& r : records) {
    if (r.status.state != CrawlState::Fetched || r.html.empty()) continue;
    out.push_back(make_candidate(r, extract_page(r.html, r.url)));
  }
  return out;
}

void cmd_dedup(const Options& o) {
  auto w = weights_of(o);
  auto records = load_snapshot(o.snapshot);
  auto clusters = cluster_mirrors(candidates_of(records), w);
  write_file(o.out, clusters_csv(clusters));
  std::size_t pages = clusters.page_count();
  spdlog::info("{} pages, {} unique, {} mirrors ({:.1f}%)", pages, clusters.uniques.size(),
               pages - clusters.uniques.size(),
               pages ? 100.0 * static_cast<double>(pages - clusters.uniques.size()) / static_cast<double>(pages) : 0.0);
}

void cmd_graph(const Options& o) {
  auto records = load_snapshot(o.snapshot);
  auto clusters = parse_clusters_csv(read_file(o.clusters));
  auto g = build_graph(records, clusters);
  if (!o.categories.empty()) {
    for (const auto& [host, label] : read_pairs_csv(o.categories)) {
      if (auto n = g.resolve(host); n && g.node(*n).category.empty()) g.node(*n).category = label;
    }
  }
  auto report = weakly_connected_components(g);
  fs::path dir(o.out);
  fs::create_directories(dir);
  write_file(dir / "edges.tsv", edge_list(g));
  write_file(dir / "nodes.csv", node_csv(g));
  write_file(dir / "components.csv", components_csv(report));
  if (!o.seeds.empty()) write_file(dir / "contribution.csv", contribution_csv(contribution_table(g, load_seeds(o.seeds))));
  spdlog::info("{} nodes, {} edges, {} components ({} of order 1)", g.size(), g.edge_count(), report.components.size(),
               report.order_one);
}

void cmd_classify_train(const Options& o) {
  ClassifierConfig cfg;
  cfg.penalty = parse_penalty(o.penalty);
  cfg.C = o.C;
  cfg.l1_ratio = o.l1_ratio;
  cfg.folds = o.folds;
  cfg.per_class_cap = o.cap;
  cfg.max_iterations = o.max_iterations;
  cfg.tolerance = o.tolerance;
  cfg.grid_search = !o.no_grid;
  cfg.one_vs_one = o.one_vs_one;
  cfg.mode = parse_tfidf_mode(o.mode);
  cfg.seed = o.seed;
  auto docs = bootstrap_balance(load_labeled_jsonl(o.train), cfg.per_class_cap, cfg.seed);
  auto model = train(cfg, docs);
  save_model(model, o.out);
  if (!o.report.empty()) write_file(o.report, report_csv(model.report));
  spdlog::info("penalty {} C {}: mean fold accuracy {:.4f}, F{} {:.4f}", to_string(model.report.chosen_penalty),
               model.report.chosen_C, model.report.mean_fold_accuracy, cfg.beta, model.report.mean_fold_f_beta);
}

void cmd_classify_predict(const Options& o) {
  auto model = load_model(o.model);
  auto records = load_snapshot(o.snapshot);
  std::string out = "host,label,reliability\n";
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) {
    if (r.status.state != CrawlState::Fetched || r.html.empty()) continue;
    auto p = predict(model, extract_text(r.html));
    ++counts[p.label];
    out += fmt::format("{},{},{:.6f}\n", r.url.host, csv_field(p.label), p.reliability);
  }
  write_file(o.out, out);
  for (const auto& [label, n] : counts) spdlog::info("{}: {}", label, n);
}

void cmd_detect(const Options& o) {
  Lexicon lex = Lexicon::load(o.lexicon);
  auto records = load_snapshot(o.snapshot);
  std::map<std::string, std::string> labels;
  if (!o.predictions.empty()) labels = read_pairs_csv(o.predictions);
  if (!o.category.empty() && o.predictions.empty()) {
    throw Error(ErrorCode::InvalidConfig, "--category needs --predictions");
  }
  std::string out = "host,verdict,rule,sentence\n";
  std::map<Verdict, std::size_t> counts;
  for (const auto& r : records) {
    if (r.status.state != CrawlState::Fetched || r.html.empty()) continue;
    if (!o.category.empty()) {
      auto it = labels.find(r.url.host);
      if (it == labels.end() || it->second != o.category) continue;
    }
    auto v = classify_site(extract_text(r.html), lex);
    ++counts[v.verdict];
    std::string rule, sentence;
    for (const auto& m : v.matched_sentences) {
      if (m.rule || sentence.empty()) {
        rule = m.rule ? std::to_string(*m.rule) : "";
        sentence = m.sentence;
        if (m.rule) break;
      }
    }
    out += fmt::format("{},{},{},{}\n", r.url.host, to_string(v.verdict), rule, csv_field(sentence));
  }
  write_file(o.out, out);
  for (const auto& [verdict, n] : counts) spdlog::info("{}: {}", to_string(verdict), n);
}

void cmd_bench_hash(const Options& o) {
  const fs::path root = fs::path(o.pairs).parent_path();
  std::istringstream in(read_file(o.pairs));
  std::string line;
  std::getline(in, line);
  std::vector<BenchPage> pages;
  std::vector<std::size_t> cluster_of;
  std::vector<bool> is_base;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto a = line.find(','), b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) throw Error(ErrorCode::SchemaError, "bad labels line: " + line);
    std::string host = line.substr(0, a);
    auto page = root / "corpus" / host / "index.html";
    if (!fs::exists(page)) continue;
    pages.push_back(make_bench_page(host, read_file(page)));
    cluster_of.push_back(std::stoul(line.substr(a + 1, b - a - 1)));
    is_base.push_back(line.substr(b + 1) == "base");
  }
  auto pairs = benchmark_pairs(cluster_of, is_base, o.max_positive, o.max_negative, o.seed);
  auto report = bench_dedup(pages, pairs, weights_of(o));
  write_file(o.out, benchmark_csv(report.table));
  if (!o.sweep.empty()) write_file(o.sweep, sweep_csv(report.sweep));
  for (const auto& m : report.table) spdlog::info("{}: F1 {:.3f}, repetitions {}", m.method, m.f1, m.repetitions);
}

SynthSpec synth_spec(const Options& o) {
  SynthSpec s;
  if (o.spec == "small") {
    s.n_uniques = 20;
  } else if (o.spec == "bench") {
    s.n_uniques = 1000;
    s.geometric_fanout = false;
    s.fanout_mean = 1;
    s.exact_fraction = 0.0;
  } else if (o.spec != "default") {
    throw Error(ErrorCode::InvalidConfig, "unknown --spec preset: " + o.spec);
  }
  if (o.n_uniques) s.n_uniques = o.n_uniques;
  if (o.fanout_mean >= 0) s.fanout_mean = o.fanout_mean;
  if (o.fixed_fanout) s.geometric_fanout = false;
  if (o.exact_fraction >= 0) s.exact_fraction = o.exact_fraction;
  if (o.max_magnitude > 0) s.max_magnitude = o.max_magnitude;
  if (o.volatility >= 0) s.volatility = o.volatility;
  if (!o.topology.empty()) s.topology = parse_topology(o.topology);
  s.seed = o.seed;
  return s;
}

void cmd_synthgen(const Options& o) {
  auto corpus = generate(synth_spec(o));
  write_fixture(corpus, o.out);
  spdlog::info("{} pages in {} clusters, mirror fraction {:.3f}", corpus.pages.size(), corpus.cluster_count(),
               corpus.mirror_fraction());
}

// ---- manifest --------------------------------------------------------------

const std::set<std::string>& path_options() {
  static const std::set<std::string> names{"titles",   "engine-dir", "manual", "seeds",     "fixture", "resume",
                                           "snapshot", "clusters",   "categories", "predictions", "lexicon", "model",
                                           "train",    "report",     "pairs",  "sweep",     "out",     "manifest",
                                           "config"};
  return names;
}

void append_manifest(const CLI::App& app, const CLI::App& sub, const Options& o, int status) {
  nlohmann::json inputs = nlohmann::json::object(), settings = nlohmann::json::object();
  for (const CLI::App* scope : {&app, &sub}) {
    for (const CLI::Option* opt : scope->get_options()) {
      std::string name = opt->get_single_name();
      if (name == "help" || opt->get_configurable() == false) continue;
      std::string value;
      for (const auto& r : opt->reduced_results()) value += (value.empty() ? "" : ",") + r;
      if (opt->count() == 0) value = opt->get_default_str();
      if (path_options().contains(name)) {
        if (name != "out" && name != "manifest" && name != "config" && !value.empty() && fs::exists(value)) {
          inputs[name] = hash_tree(value);
        }
        continue;
      }
      settings[name] = value;
    }
  }
  nlohmann::json line{{"command", sub.get_name()},
                      {"version", MIMIR_VERSION},
                      {"config_hash", to_hex(md5(settings.dump()))},
                      {"settings", settings},
                      {"inputs", inputs},
                      {"outputs", hash_tree(o.out)},
                      {"status", status}};
  fs::path manifest = o.manifest;
  if (manifest.empty()) {
    fs::path out(o.out);
    manifest = (fs::is_directory(out) ? out : (out.has_parent_path() ? out.parent_path() : fs::path("."))) / "manifest.jsonl";
  }
  std::ofstream f(manifest, std::ios::app);
  if (!f) throw Error(ErrorCode::IoError, "cannot append to " + manifest.string());
  f << line.dump() << '\n';
}

void log_overrides(const CLI::App& sub) {
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->count() == 0 || opt->get_single_name() == "help") continue;
    std::string value;
    for (const auto& r : opt->reduced_results()) value += (value.empty() ? "" : ",") + r;
    spdlog::info("setting {} = {}", opt->get_single_name(), value);
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Mimir: shallow onion-service crawling, mirror detection, topology and content analysis"};
  app.set_config("--config", "", "INI configuration file; command-line flags override it");
  app.require_subcommand(1);
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error")->capture_default_str();
  app.add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--manifest", o.manifest, "Manifest file (default: manifest.jsonl next to --out)");

  auto* seed = app.add_subcommand("seed", "Extract keywords from titles, query search engines, merge manual seeds");
  seed->add_option("--titles", o.titles, "One title per line")->required()->check(CLI::ExistingFile);
  seed->add_option("-k", o.k, "Number of keywords")->capture_default_str()->check(CLI::PositiveNumber);
  seed->add_option("--engines", o.engines, "Comma-separated engine identifiers")->capture_default_str();
  seed->add_option("--engine-dir", o.engine_dir, "Fixture root holding one directory per engine")->required();
  seed->add_option("--manual", o.manual, "Manual seed URLs, one per line")->check(CLI::ExistingFile);
  seed->add_option("--out", o.out, "Seeds file")->required();

  auto* crawl = app.add_subcommand("crawl", "Crawl landing pages breadth-first in workload windows");
  crawl->add_option("--seeds", o.seeds, "Seeds file")->required()->check(CLI::ExistingFile);
  crawl->add_option("--workers", o.workers, "Window size and worker count")->capture_default_str()->check(CLI::PositiveNumber);
  crawl->add_option("--timeout", o.timeout, "Per-request timeout in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  crawl->add_option("--max-attempts", o.max_attempts, "Attempts before a host is unreachable")->capture_default_str()->check(CLI::PositiveNumber);
  crawl->add_option("--transport", o.transport, "fixture or proxy")->capture_default_str()->check(CLI::IsMember({"fixture", "proxy"}));
  crawl->add_option("--fixture", o.fixture, "Fixture directory (synthgen output)")->check(CLI::ExistingDirectory);
  crawl->add_option("--proxy-endpoint", o.proxy_endpoint, "SOCKS5 host:port or proxy URL; MIMIR_PROXY overrides")->capture_default_str();
  crawl->add_option("--resume", o.resume, "Snapshot of an aborted crawl")->check(CLI::ExistingFile);
  crawl->add_option("--out", o.out, "Snapshot file")->required();

  auto* dedup = app.add_subcommand("dedup", "Cluster mirrors among fetched pages");
  dedup->add_option("--snapshot", o.snapshot, "Crawl snapshot")->required()->check(CLI::ExistingFile);
  dedup->add_option("--weights", o.weights, "Scheme and content weights, summing to 1")->delimiter(',')->expected(2)->capture_default_str();
  dedup->add_option("--threshold", o.threshold, "Mirror threshold in [0,1]")->capture_default_str();
  dedup->add_option("--out", o.out, "Clusters CSV")->required();

  auto* graph = app.add_subcommand("graph", "Build the mirror-collapsed page graph and its reports");
  graph->add_option("--snapshot", o.snapshot, "Crawl snapshot")->required()->check(CLI::ExistingFile);
  graph->add_option("--clusters", o.clusters, "Clusters CSV from dedup")->required()->check(CLI::ExistingFile);
  graph->add_option("--seeds", o.seeds, "Seeds file for the keyword contribution table")->check(CLI::ExistingFile);
  graph->add_option("--categories", o.categories, "host,label CSV from classify-predict")->check(CLI::ExistingFile);
  graph->add_option("--out", o.out, "Output directory")->required();

  auto* ctrain = app.add_subcommand("classify-train", "Train the tf-idf logistic regression classifier");
  ctrain->add_option("--train", o.train, "JSON lines of {label, text}")->required()->check(CLI::ExistingFile);
  ctrain->add_option("--penalty", o.penalty, "none, l2, l1, elasticnet")->capture_default_str();
  ctrain->add_option("--C", o.C, "Inverse regularization strength")->capture_default_str()->check(CLI::PositiveNumber);
  ctrain->add_option("--l1-ratio", o.l1_ratio, "ElasticNet mix")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  ctrain->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 1000));
  ctrain->add_option("--cap", o.cap, "Documents per class after bootstrapping")->capture_default_str()->check(CLI::PositiveNumber);
  ctrain->add_option("--max-iterations", o.max_iterations, "Solver iteration cap")->capture_default_str();
  ctrain->add_option("--tol", o.tolerance, "Solver tolerance")->capture_default_str();
  ctrain->add_option("--mode", o.mode, "standard or paper-literal tf-idf")->capture_default_str();
  ctrain->add_flag("--no-grid", o.no_grid, "Skip the penalty and C grid search");
  ctrain->add_flag("--one-vs-one", o.one_vs_one, "Pairwise binary models instead of one multinomial model");
  ctrain->add_option("--report", o.report, "Training report CSV");
  ctrain->add_option("--out", o.out, "Model file")->required();

  auto* cpredict = app.add_subcommand("classify-predict", "Label every fetched page");
  cpredict->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
  cpredict->add_option("--snapshot", o.snapshot, "Crawl snapshot")->required()->check(CLI::ExistingFile);
  cpredict->add_option("--out", o.out, "Predictions CSV")->required();

  auto* detect = app.add_subcommand("detect", "Find pages that allow or forbid content named by a lexicon");
  detect->add_option("--lexicon", o.lexicon, "Sectioned lexicon file")->required()->check(CLI::ExistingFile);
  detect->add_option("--snapshot", o.snapshot, "Crawl snapshot")->required()->check(CLI::ExistingFile);
  detect->add_option("--predictions", o.predictions, "Predictions CSV from classify-predict")->check(CLI::ExistingFile);
  detect->add_option("--category", o.category, "Only pages predicted as this label");
  detect->add_option("--out", o.out, "Verdicts CSV")->required();

  auto* bench = app.add_subcommand("bench-hash", "Compare the hybrid detector with SimHash and MinHash");
  bench->add_option("--pairs", o.pairs, "labels.csv of a synthgen fixture")->required()->check(CLI::ExistingFile);
  bench->add_option("--max-positive", o.max_positive, "Mirror pairs")->capture_default_str();
  bench->add_option("--max-negative", o.max_negative, "Non-mirror pairs")->capture_default_str();
  bench->add_option("--weights", o.weights, "Scheme and content weights, summing to 1")->delimiter(',')->expected(2)->capture_default_str();
  bench->add_option("--threshold", o.threshold, "Mirror threshold in [0,1]")->capture_default_str();
  bench->add_option("--sweep", o.sweep, "Threshold sweep CSV");
  bench->add_option("--out", o.out, "Benchmark CSV")->required();

  auto* synth = app.add_subcommand("synthgen", "Generate a synthetic fixture corpus");
  synth->add_option("--spec", o.spec, "Preset: default, small, bench")->capture_default_str();
  synth->add_option("--n-uniques", o.n_uniques, "Unique sites");
  synth->add_option("--fanout-mean", o.fanout_mean, "Mean mirrors per site");
  synth->add_flag("--fixed-fanout", o.fixed_fanout, "Exactly round(mean) mirrors per site");
  synth->add_option("--exact-fraction", o.exact_fraction, "Share of mirrors that are byte copies");
  synth->add_option("--max-magnitude", o.max_magnitude, "Largest mutation magnitude");
  synth->add_option("--volatility", o.volatility, "Share of hosts with transient failures");
  synth->add_option("--topology", o.topology, "chain, tree, clusters")->check(CLI::IsMember({"chain", "tree", "clusters"}));
  synth->add_option("--out", o.out, "Fixture directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("mimir"));
  spdlog::set_level(spdlog::level::from_str(o.log_level));
  CLI::App* sub = app.get_subcommands().front();
  log_overrides(*sub);

  int status = 0;
  try {
    const std::string name = sub->get_name();
    if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
    if (name == "seed") cmd_seed(o);
    else if (name == "crawl") status = cmd_crawl(o);
    else if (name == "dedup") cmd_dedup(o);
    else if (name == "graph") cmd_graph(o);
    else if (name == "classify-train") cmd_classify_train(o);
    else if (name == "classify-predict") cmd_classify_predict(o);
    else if (name == "detect") cmd_detect(o);
    else if (name == "bench-hash") cmd_bench_hash(o);
    else if (name == "synthgen") cmd_synthgen(o);
    append_manifest(app, *sub, o, status);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitDomain;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitDomain;
  }
  return status;
}
