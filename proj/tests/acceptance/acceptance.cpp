// Acceptance suite. Prints one line per criterion:
//   criterion N: PASS|FAIL  <measurements>  (<seconds> s)
// Arguments select criteria by number; none runs all nine. Exit status 1 when
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mimir/classify.hpp"
#include "mimir/ctph.hpp"
#include "mimir/extractor.hpp"
#include "mimir/graph.hpp"
#include "mimir/mirror.hpp"
#include "mimir/prohibit.hpp"
#include "mimir/scheduler.hpp"
#include "mimir/synth.hpp"
#include "support/fixtures.hpp"
#include "support/graph_oracles.hpp"
#include "support/pipeline.hpp"

using namespace mimir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "mimir_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<Seed> seeds_of(const SynthCorpus& c) {
  std::vector<Seed> out;
  for (const auto& s : c.seeds) out.push_back({s.host, s.provenance});
  return out;
}

// The default synthetic corpus written as a fixture and crawled through it with
// four workers. Shared by the mirror-recovery and graph criteria.
struct Demo {
  SynthSpec spec;
  SynthCorpus corpus;
  CrawlResult crawl;
  std::vector<MirrorCandidate> candidates;
  MirrorClusters clusters;
};

const Demo& demo() {
  static const Demo d = [] {
    Demo out;
    out.corpus = generate(out.spec);
    auto dir = workdir() / "demo";
    write_fixture(out.corpus, dir);
    FixtureTransport transport(dir);
    out.crawl = run_crawl(seeds_of(out.corpus), transport, {});
    for (const auto& r : out.crawl.records) {
      if (r.status.state == CrawlState::Fetched && !r.html.empty()) {
        out.candidates.push_back(make_candidate(r, extract_page(r.html, r.url)));
      }
    }
    out.clusters = cluster_mirrors(out.candidates);
    return out;
  }();
  return d;
}

// ---- 1 ---------------------------------------------------------------------

Outcome mirror_benchmark() {
  SynthSpec spec;
  spec.n_uniques = 1000;
  spec.geometric_fanout = false;
  spec.fanout_mean = 1;
  spec.exact_fraction = 0.0;
  auto corpus = generate(spec);
  std::vector<BenchPage> pages;
  std::vector<std::size_t> cluster_of;
  std::vector<bool> is_base;
  for (const auto& p : corpus.pages) {
    if (p.surface) continue;
    pages.push_back(make_bench_page(p.host, p.html));
    cluster_of.push_back(p.cluster_id);
    is_base.push_back(p.mutation == "base");
  }
  auto pairs = benchmark_pairs(cluster_of, is_base, 1000, 1000, spec.seed);
  std::size_t positives = std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.is_mirror; });
  auto report = bench_dedup(pages, pairs);
  std::map<std::string, MethodResult> by;
  for (const auto& m : report.table) by[m.method.substr(0, m.method.find('@'))] = m;
  const auto &hybrid = by["Mimir"], &minhash = by["MinHash"], &simhash = by["SimHash"];
  bool ok = positives == 1000 && pairs.size() == 2000 && hybrid.f1 >= 0.95 && hybrid.f1 > minhash.f1 &&
            hybrid.f1 > simhash.f1 && hybrid.repetitions == 0;
  return {ok, fmt::format("pairs {}+{}, F1 hybrid {:.3f} MinHash@0.4 {:.3f} SimHash@0.8 {:.3f}, hybrid repetitions {}",
                          positives, pairs.size() - positives, hybrid.f1, minhash.f1, simhash.f1,
                          hybrid.repetitions)};
}

// ---- 2 ---------------------------------------------------------------------

Outcome mirror_fraction_recovery() {
  const Demo& d = demo();
  std::map<std::string, std::size_t> truth;
  for (const auto& p : d.corpus.pages) truth[p.host] = p.cluster_id;
  std::size_t agree = 0, total = 0;
  const auto& pages = d.candidates;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    for (std::size_t j = i + 1; j < pages.size(); ++j) {
      bool same_truth = truth.at(pages[i].host) == truth.at(pages[j].host);
      bool same_found = d.clusters.representative.at(pages[i].host) == d.clusters.representative.at(pages[j].host);
      agree += same_truth == same_found;
      ++total;
    }
  }
  const double fraction = d.corpus.mirror_fraction();
  const double accuracy = static_cast<double>(agree) / static_cast<double>(total);
  const double found = 1.0 - static_cast<double>(d.clusters.uniques.size()) / static_cast<double>(pages.size());
  bool ok = std::abs(fraction - 0.80) <= 0.02 && accuracy >= 0.95;
  return {ok, fmt::format("generator mirror fraction {:.3f}, recovered {:.3f} over {} fetched pages, pairwise accuracy {:.4f}",
                          fraction, found, pages.size(), accuracy)};
}

// ---- 3 ---------------------------------------------------------------------

std::string random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::string s(n, '\0');
  for (auto& c : s) c = static_cast<char>(rng() & 0xff);
  return s;
}

// Up to three contiguous replace, insert or delete operations whose sizes add
// up to at most 2% of the document.
std::string edit_two_percent(const std::string& doc, std::mt19937_64& rng) {
  std::string out = doc;
  std::size_t budget = doc.size() * 2 / 100;
  const std::size_t ops = 1 + rng() % 3;
  for (std::size_t k = 0; k < ops && budget > 0; ++k) {
    std::size_t len = k + 1 == ops ? budget : 1 + rng() % budget;
    budget -= len;
    std::size_t at = rng() % (out.size() - len);
    std::string fresh;
    for (std::size_t i = 0; i < len; ++i) fresh += static_cast<char>('a' + rng() % 26);
    switch (rng() % 3) {
      case 0: out.replace(at, len, fresh); break;
      case 1: out.insert(at, fresh); break;
      default: out.erase(at, len); break;
    }
  }
  return out;
}

Outcome ctph_properties() {
  std::mt19937_64 rng(2024);
  bool basic = true;
  std::size_t high = 0;
  int lowest = 100;
  for (int i = 0; i < 200; ++i) {
    PageBlueprint bp;
    bp.category = category_tags()[i % category_tags().size()];
    bp.kind = static_cast<PageKind>(i % 3);
    bp.structure_seed = 100 + i;
    bp.content_seed = 900 + i;
    std::string doc = render_page(bp);
    while (doc.size() < 8192) doc += render_page(bp);
    doc.resize(8192);
    auto edited = edit_two_percent(doc, rng);
    auto a = ctph_hash(doc), b = ctph_hash(edited);
    basic = basic && a == ctph_hash(doc) && ctph_compare(a, a) == 100 && ctph_compare(a, b) == ctph_compare(b, a);
    int score = ctph_compare(a, b);
    lowest = std::min(lowest, score);
    high += score >= 90;
  }
  int worst_random = 0;
  for (int i = 0; i < 100; ++i) {
    auto a = ctph_hash(random_bytes(rng, 8192)), b = ctph_hash(random_bytes(rng, 8192));
    basic = basic && ctph_compare(a, b) == ctph_compare(b, a);
    worst_random = std::max(worst_random, ctph_compare(a, b));
  }
  bool ok = basic && high >= 190 && worst_random <= 10;
  return {ok, fmt::format("determinism/identity/symmetry {}, edited >= 90 in {}/200 (lowest {}), random pairs max {}",
                          basic ? "hold" : "BROKEN", high, lowest, worst_random)};
}

// ---- 4 ---------------------------------------------------------------------

std::set<std::string> fetched_hosts(const CrawlResult& r) {
  std::set<std::string> out;
  for (const auto& rec : r.records) {
    if (rec.status.state == CrawlState::Fetched) out.insert(rec.url.host);
  }
  return out;
}

Outcome scheduler_contract() {
  std::size_t barrier_ok = 0, records = 0, unreachable = 0, mismatched = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::mt19937_64 rng(seed);
    auto g = test::random_graph(rng, 15 + rng() % 26, 0.08);
    test::RecordingTransport t(test::transport_for(g, &rng, 0.3), seed);
    CrawlConfig cfg;
    cfg.workers = 1 + rng() % 16;
    auto result = run_crawl({{g.hosts[0], {"manual"}}}, t, cfg);
    barrier_ok += test::barrier_holds(result.windows, t.events());
    for (const auto& r : result.records) {
      ++records;
      bool is_unreachable = r.status.state == CrawlState::Unreachable;
      unreachable += is_unreachable;
      bool scripted_dead = g.failures[g.index.at(r.url.host)] >= kMaxAttempts;
      mismatched += is_unreachable != (r.status.attempts == kMaxAttempts && r.status.state != CrawlState::Fetched) ||
                    is_unreachable != scripted_dead;
    }
  }

  std::size_t same = 0, cases = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(5000 + seed);
    auto g = test::random_graph(rng, 80, 0.03);
    std::optional<std::set<std::string>> reference;
    bool all_same = true;
    for (std::size_t workers : {1, 4, 16}) {
      std::mt19937_64 schedule(seed);
      auto t = test::transport_for(g, &schedule, 0.3);
      CrawlConfig cfg;
      cfg.workers = workers;
      auto got = fetched_hosts(run_crawl({{g.hosts[0], {"manual"}}, {g.hosts[1], {"manual"}}}, *t, cfg));
      if (!reference) reference = got;
      all_same = all_same && got == *reference;
    }
    same += all_same;
    ++cases;
  }
  SynthSpec spec;
  spec.n_uniques = 40;
  spec.volatility = 0.4;
  auto corpus = generate(spec);
  auto dir = workdir() / "volatile";
  write_fixture(corpus, dir);
  std::optional<std::set<std::string>> reference;
  bool fixture_same = true;
  for (std::size_t workers : {1, 4, 16}) {
    FixtureTransport t(dir);
    CrawlConfig cfg;
    cfg.workers = workers;
    auto got = fetched_hosts(run_crawl(seeds_of(corpus), t, cfg));
    if (!reference) reference = got;
    fixture_same = fixture_same && got == *reference;
  }
  same += fixture_same;
  ++cases;

  bool ok = barrier_ok == 1000 && mismatched == 0 && unreachable > 0 && same == cases;
  return {ok, fmt::format("barrier held in {}/1000 schedules, Unreachable<=>5 attempts violated {} times over {} records "
                          "({} unreachable), fetched set equal for 1/4/16 workers in {}/{} corpora",
                          barrier_ok, mismatched, records, unreachable, same, cases)};
}

// ---- 5 ---------------------------------------------------------------------

Outcome graph_oracles() {
  std::mt19937_64 rng(77);
  std::size_t wcc_ok = 0, depth_ok = 0, ablation_ok = 0;
  const std::size_t rounds = 100;
  for (std::size_t round = 0; round < rounds; ++round) {
    const std::size_t n = 2 + rng() % 999;
    auto lg = test::random_graph(rng, n, (0.5 + static_cast<double>(rng() % 200) / 100.0) / static_cast<double>(n));
    auto g = test::from_link_graph(lg);

    auto label = test::oracle_components(lg);
    std::set<std::set<std::size_t>> want, got;
    std::map<std::size_t, std::set<std::size_t>> groups;
    for (std::size_t v = 0; v < n; ++v) groups[label[v]].insert(v);
    for (auto& [l, members] : groups) want.insert(members);
    for (const auto& c : weakly_connected_components(g).components) got.insert({c.nodes.begin(), c.nodes.end()});
    wcc_ok += want == got;

    std::set<std::size_t> sources, surface, keyword, manual;
    std::vector<Seed> seeds;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() % 25 == 0) sources.insert(i);
      if (rng() % 30 == 0) {
        surface.insert(i);
        g.node(i).surface = true;
      }
      Seed s{lg.hosts[i], {}};
      if (rng() % 20 == 0) {
        s.provenance.insert("drugs");
        keyword.insert(i);
      }
      if (rng() % 20 == 0) {
        s.provenance.insert("manual");
        manual.insert(i);
      }
      if (!s.provenance.empty()) seeds.push_back(s);
    }
    if (keyword.empty()) {
      seeds.push_back({lg.hosts[0], {"drugs"}});
      keyword.insert(0);
    }
    assign_graph_depths(g, sources);
    auto want_depth = test::oracle_depths(lg, sources, surface);
    bool depths = true;
    for (std::size_t i = 0; i < n; ++i) depths = depths && g.node(i).depth == want_depth[i];
    depth_ok += depths;

    auto sets = seed_ablation(g, seeds, "drugs");
    auto ks = test::oracle_reach(lg, keyword), mss = test::oracle_reach(lg, manual);
    std::set<std::size_t> sd;
    std::set_difference(ks.begin(), ks.end(), mss.begin(), mss.end(), std::inserter(sd, sd.end()));
    ablation_ok += sets.ks == ks && sets.mss == mss && sets.sd == sd;
  }

  const Demo& d = demo();
  auto graph = build_graph(d.crawl.records, d.clusters);
  auto aks = seed_ablation(graph, seeds_of(d.corpus), kAllKeywords);
  bool subset = std::includes(aks.ks.begin(), aks.ks.end(), aks.mss.begin(), aks.mss.end());
  bool ok = wcc_ok == rounds && depth_ok == rounds && ablation_ok == rounds && subset && !aks.mss.empty();
  return {ok, fmt::format("components {}/{}, depths {}/{}, ablation {}/{} graphs match; demo corpus |MSS| {} |AKS| {}, "
                          "MSS subset of AKS: {}",
                          wcc_ok, rounds, depth_ok, rounds, ablation_ok, rounds, aks.mss.size(), aks.ks.size(),
                          subset ? "yes" : "no")};
}

// ---- 6 ---------------------------------------------------------------------

Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t dim, std::size_t classes) {
  std::normal_distribution<double> normal;
  Dataset d;
  d.dim = dim;
  d.n_classes = classes;
  for (std::size_t i = 0; i < n; ++i) {
    SparseVector row;
    for (std::size_t j = 0; j < dim; ++j) {
      if (rng() % 3) row.emplace_back(j, normal(rng));
    }
    d.rows.push_back(row);
    d.labels.push_back(i % classes);
  }
  return d;
}

LinearModel random_model(std::mt19937_64& rng, std::size_t classes, std::size_t dim, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  LinearModel m(classes, dim);
  for (auto& w : m.w) {
    w = normal(rng);
    if (std::abs(w) < 1e-3) w = 0.1;
  }
  return m;
}

Outcome classifier() {
  ClassifierConfig config;
  auto docs = labeled_texts(200, 0.2, 42);
  auto model = train(config, docs);
  const double accuracy = model.report.mean_fold_accuracy;

  std::mt19937_64 rng(6);
  double worst_gradient = 0.0;
  for (int round = 0; round < 10; ++round) {
    for (Penalty p : {Penalty::None, Penalty::L2, Penalty::L1, Penalty::ElasticNet}) {
      auto d = random_dataset(rng, 8, 5, 3);
      auto m = random_model(rng, 3, 5, 1.0);
      auto r = Regularizer::from(p, 0.5, d.rows.size());
      auto g = objective_gradient(m, d, r);
      for (std::size_t i = 0; i < m.w.size(); ++i) {
        const double h = 1e-6;
        LinearModel plus = m, minus = m;
        plus.w[i] += h;
        minus.w[i] -= h;
        double fd = (objective(plus, d, r) - objective(minus, d, r)) / (2 * h);
        worst_gradient = std::max(worst_gradient, std::abs(g[i] - fd) / std::max(std::abs(fd), 1e-2));
      }
    }
  }

  double worst_sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto m = random_model(rng, 11, 6, i % 2 ? 1.0 : 300.0);
    auto d = random_dataset(rng, 1, 6, 11);
    double sum = 0.0;
    for (double x : m.probabilities(d.rows[0])) sum += x;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  for (int i = 0; i < 200; ++i) {
    double sum = 0.0;
    for (double x : predict(model, docs[static_cast<std::size_t>(i) * 11 % docs.size()].text).probabilities) sum += x;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }

  std::gamma_distribution<double> gamma(0.5);
  std::size_t exact = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> p(2 + rng() % 10);
    double sum = 0.0;
    for (auto& x : p) sum += x = gamma(rng);
    for (auto& x : p) x /= sum;
    auto sorted = p;
    std::sort(sorted.rbegin(), sorted.rend());
    exact += reliability(p) == 1.0 - (sorted[0] - sorted[1]);
  }

  bool ok = accuracy >= 0.90 && worst_gradient <= 1e-5 && worst_sum <= 1e-9 && exact == 1000;
  return {ok, fmt::format("10-fold accuracy {:.4f} (chosen {} C={}), gradient relative error {:.2e}, "
                          "probability sum error {:.2e}, reliability exact on {}/1000",
                          accuracy, to_string(model.report.chosen_penalty), model.report.chosen_C, worst_gradient,
                          worst_sum, exact)};
}

// ---- 7 ---------------------------------------------------------------------

using Tokens = std::vector<std::string>;

// Weight of every (doc, term) pair, computed term by term from raw counts.
std::map<std::pair<std::size_t, std::string>, double> tfidf_oracle(const std::vector<Tokens>& docs, bool literal) {
  std::set<std::string> terms;
  for (const auto& d : docs) terms.insert(d.begin(), d.end());
  const double n = static_cast<double>(docs.size());
  std::map<std::pair<std::size_t, std::string>, double> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    double norm = 0.0;
    for (const auto& t : terms) {
      double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
      double df = 0;
      for (const auto& d : docs) df += std::find(d.begin(), d.end(), t) != d.end();
      double idf = std::log2(n / (df + 1));
      double w = 0.0;
      if (tf > 0 && literal) w = idf > 0 ? tf / idf : 0.0;
      if (tf > 0 && !literal) w = (1 + std::log2(tf)) * std::max(0.0, idf);
      out[{i, t}] = w;
      norm += w * w;
    }
    if (!literal && norm > 0) {
      for (const auto& t : terms) out[{i, t}] /= std::sqrt(norm);
    }
  }
  return out;
}

double tfidf_error(const std::vector<Tokens>& docs) {
  auto vocab = Vocabulary::fit(docs);
  double worst = 0.0;
  for (bool literal : {false, true}) {
    auto want = tfidf_oracle(docs, literal);
    auto rows = tfidf_vectorize(vocab, docs, literal ? TfIdfMode::PaperLiteral : TfIdfMode::Standard);
    for (const auto& [key, w] : want) {
      double got = 0.0;
      for (auto [col, x] : rows[key.first]) {
        if (vocab.terms[col] == key.second) got = x;
      }
      worst = std::max(worst, std::abs(got - w));
    }
  }
  return worst;
}

double metrics_error(const std::vector<std::string>& pred, const std::vector<std::string>& truth, double beta) {
  std::set<std::string> labels(pred.begin(), pred.end());
  labels.insert(truth.begin(), truth.end());
  double p = 0.0, r = 0.0, correct = 0.0;
  for (const auto& l : labels) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      tp += pred[i] == l && truth[i] == l;
      fp += pred[i] == l && truth[i] != l;
      fn += pred[i] != l && truth[i] == l;
    }
    p += tp + fp > 0 ? tp / (tp + fp) : 0.0;
    r += tp + fn > 0 ? tp / (tp + fn) : 0.0;
  }
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
  const double k = static_cast<double>(labels.size());
  p /= k;
  r /= k;
  const double b2 = beta * beta;
  const double f = b2 * p + r > 0 ? (1 + b2) * p * r / (b2 * p + r) : 0.0;
  auto m = compute_metrics(pred, truth, beta);
  return std::max({std::abs(m.accuracy - correct / static_cast<double>(pred.size())), std::abs(m.precision - p),
                   std::abs(m.recall - r), std::abs(m.f_beta - f), std::abs(f_beta(p, r, beta) - f)});
}

Outcome formula_oracles() {
  double tfidf = std::max(tfidf_error({{"a", "a", "b"}, {"b", "c"}}),
                          tfidf_error({{"card", "card", "card", "shop"}, {"card", "vpn"}, {"mail"}, {"mail", "news"}, {"forum"}}));
  double metrics = metrics_error({"a", "b", "b", "b", "a"}, {"a", "a", "b", "b", "c"}, 1.0);
  std::mt19937_64 rng(12);
  const Tokens words{"shop", "card", "vpn", "mail", "news", "forum", "coin"};
  const std::vector<std::string> labels{"x", "y", "z"};
  for (int round = 0; round < 200; ++round) {
    std::vector<Tokens> docs(2 + rng() % 4);
    for (auto& d : docs) {
      for (std::size_t k = 1 + rng() % 8; k > 0; --k) d.push_back(words[rng() % words.size()]);
    }
    tfidf = std::max(tfidf, tfidf_error(docs));
    std::vector<std::string> pred(5), truth(5);
    for (std::size_t i = 0; i < 5; ++i) {
      pred[i] = labels[rng() % 3];
      truth[i] = labels[rng() % 3];
    }
    metrics = std::max(metrics, metrics_error(pred, truth, 0.5 + static_cast<double>(rng() % 4) * 0.5));
  }
  bool ok = tfidf <= 1e-12 && metrics <= 1e-12;
  return {ok, fmt::format("tf-idf max error {:.1e}, metrics max error {:.1e} (hand cases plus 200 random micro-cases)",
                          tfidf, metrics)};
}

// ---- 8 ---------------------------------------------------------------------

Outcome prohibition() {
  Lexicon lex = Lexicon::bundled();
  lex.keywords = {"widget", "placeholder material"};
  Lexicon empty = Lexicon::bundled();
  empty.keywords.clear();
  const std::vector<std::string> table{"widget is not allowed", "widget will be removed", "widget is not welcome",
                                       "widget is censored", "widget is forbidden"};
  const std::vector<std::string> allow{
      "We host widget galleries daily.", "Widget is allowed here.", "Widget is welcome on this board.",
      "New widget uploads every week.", "Post your widget in the section below.",
      "Widget is permitted for verified members.", "The best widget collection online.",
      "Widget is accepted without limits.", "Share widget with other members.", "Fresh widget added today.",
      "Our widget archive keeps growing.", "Widget is legal here.", "Members trade widget freely.",
      "Download widget packs from the mirror.", "Widget will be uploaded tonight.", "Request any widget you like.",
      "Widget is available for everyone.", "Browse the widget gallery.", "Widget sets are sorted by date.",
      "Placeholder material is allowed in the private section."};
  std::size_t forbids = 0, allows = 0, silent = 0, inputs = 0;
  for (const auto& p : table) forbids += classify_site(p, lex).verdict == Verdict::Forbids;
  for (const auto& p : allow) allows += classify_site(p, lex).verdict == Verdict::Allows;
  std::vector<std::string> all = table;
  all.insert(all.end(), allow.begin(), allow.end());
  all.push_back("");
  for (const auto& p : all) {
    silent += classify_site(p, empty).verdict == Verdict::NoSignal;
    ++inputs;
  }
  bool ok = forbids == 5 && allows == 20 && silent == inputs;
  return {ok, fmt::format("table phrases Forbids {}/5, allow phrases Allows {}/20, empty lexicon NoSignal {}/{}",
                          forbids, allows, silent, inputs)};
}

// ---- 9 ---------------------------------------------------------------------

std::size_t count_dirs(const fs::path& p) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(p)) n += e.is_directory();
  return n;
}

Outcome end_to_end() {
  // The grid search is left out; the classifier criterion runs it in full.
  const std::string train = "--no-grid --penalty l2 --C 10 --folds 10";
  auto start = std::chrono::steady_clock::now();
  auto a = test::run_pipeline(MIMIR_CLI, workdir() / "e2e_a", "--spec default --n-uniques 110", train);
  const double first = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto b = test::run_pipeline(MIMIR_CLI, workdir() / "e2e_b", "--spec default --n-uniques 110", train);
  if (a.failed_step >= 0 || b.failed_step >= 0) {
    int step = a.failed_step >= 0 ? a.failed_step : b.failed_step;
    return {false, "pipeline step failed: " + a.steps[static_cast<std::size_t>(step)]};
  }
  const std::size_t hosts = count_dirs(workdir() / "e2e_a" / "fx" / "corpus");
  std::size_t lines = static_cast<std::size_t>(std::count(a.manifests.begin(), a.manifests.end(), '\n'));
  bool ok = a.manifests == b.manifests && !a.manifests.empty() && first <= 300.0 && hosts >= 500;
  return {ok, fmt::format("{} hosts, {} steps, manifests identical across runs: {} ({} lines), one run {:.1f} s",
                          hosts, a.steps.size(), a.manifests == b.manifests ? "yes" : "no", lines, first)};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"mirror benchmark separation", mirror_benchmark},
      {"mirror-fraction recovery", mirror_fraction_recovery},
      {"CTPH properties", ctph_properties},
      {"scheduler contract", scheduler_contract},
      {"graph oracle equivalence", graph_oracles},
      {"classifier at desk scale", classifier},
      {"F_beta and tf-idf oracles", formula_oracles},
      {"prohibition detector", prohibition},
      {"end-to-end pipeline", end_to_end},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));
  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.contains(i + 1)) continue;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all_pass = all_pass && o.pass;
    std::printf("criterion %zu: %s  %s: %s  (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
