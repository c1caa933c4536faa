#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mimir/error.hpp"
#include "mimir/mirror.hpp"
#include "mimir/synth.hpp"

using namespace mimir;

namespace {

PageBlueprint blueprint(std::uint64_t structure, std::uint64_t content, PageKind kind = PageKind::Market) {
  PageBlueprint bp;
  bp.title = "Site " + std::to_string(content);
  bp.category = "drugs";
  bp.kind = kind;
  bp.structure_seed = structure;
  bp.content_seed = content;
  return bp;
}

MirrorCandidate candidate(const std::string& tag, const std::string& html, std::int64_t when = 0) {
  auto c = make_candidate(tag + ".onion", html);
  c.first_crawl = when;
  return c;
}

double weighted(const MirrorCandidate& a, const MirrorCandidate& b, const MirrorWeights& w = {}) {
  return (w.scheme * ctph_compare(a.scheme_hash, b.scheme_hash) + w.content * ctph_compare(a.content_hash, b.content_hash)) /
         100.0;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (const auto& s : sa) inter += sb.count(s);
  std::size_t uni = sa.size() + sb.size() - inter;
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
}

std::string word_soup(std::mt19937_64& rng, const std::string& prefix, std::size_t vocabulary, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += prefix + std::to_string(rng() % vocabulary) + " ";
  return s;
}

}  // namespace

TEST(DetectMirror, ByteIdenticalPagesAreExactCopies) {
  auto html = render_page(blueprint(1, 1));
  auto v = detect_mirror(candidate("a", html), candidate("b", html));
  EXPECT_EQ(v.kind, VerdictKind::ExactCopy);
  EXPECT_EQ(v.branch, DecisionBranch::Digest);
  EXPECT_EQ(v.score, 1.0);
}

TEST(DetectMirror, ExactCopyHoldsUnderEveryThreshold) {
  auto html = render_page(blueprint(2, 2));
  for (double t : {0.0, 0.5, 0.9, 1.0}) {
    MirrorWeights w;
    w.threshold = t;
    EXPECT_TRUE(detect_mirror(candidate("a", html), candidate("b", html), w).is_mirror());
  }
}

TEST(DetectMirror, CurrencyChangeIsANearMirror) {
  SynthRng rng(3);
  auto base = render_page(blueprint(3, 3));
  auto copy = mutate(base, {MutationKind::CurrencyChange, {}}, 0.02, rng);
  ASSERT_NE(base, copy);
  auto a = candidate("a", base), b = candidate("b", copy);
  EXPECT_EQ(ctph_compare(a.scheme_hash, b.scheme_hash), 100) << "prices live in text only";
  EXPECT_GE(weighted(a, b), 0.90);
  auto v = detect_mirror(a, b);
  EXPECT_EQ(v.kind, VerdictKind::NearMirror);
  EXPECT_GE(v.score, 0.90);
}

TEST(DetectMirror, SharedTemplateWithDisjointContentIsDistinct) {
  auto a = candidate("a", render_page(blueprint(4, 100, PageKind::Blog)));
  auto b = candidate("b", render_page(blueprint(4, 200, PageKind::Blog)));
  ASSERT_EQ(a.scheme, b.scheme);
  auto v = detect_mirror(a, b);
  EXPECT_EQ(v.kind, VerdictKind::Distinct);
  EXPECT_EQ(v.branch, DecisionBranch::WeightedSplit);
  EXPECT_LE(v.score, 0.3 + 0.7 * 0.10 + 1e-12);
  EXPECT_NEAR(v.score, weighted(a, b), 1e-9);
}

TEST(DetectMirror, TranslatedMirrorTakesTheSchemeBranch) {
  SynthRng rng(5);
  auto base = render_page(blueprint(5, 5, PageKind::Blog));
  auto german = mutate(base, {MutationKind::Translate, "de"}, 0.05, rng);
  auto a = candidate("a", base), b = candidate("b", german);
  ASSERT_EQ(a.language, "en");
  ASSERT_EQ(b.language, "de");
  auto v = detect_mirror(a, b);
  EXPECT_EQ(v.branch, DecisionBranch::CrossLanguageScheme);
  EXPECT_EQ(v.kind, VerdictKind::NearMirror);
  EXPECT_EQ(v.score, ctph_compare(a.scheme_hash, b.scheme_hash) / 100.0);
}

TEST(DetectMirror, VerdictInvariantsAndSymmetryOverMutations) {
  SynthRng rng(6);
  const std::vector<Mutation> kinds{{MutationKind::SchemeChange, {}},  {MutationKind::LinkChange, {}},
                                    {MutationKind::ContentChange, {}}, {MutationKind::FiatChange, {}},
                                    {MutationKind::CryptowalletChange, {}}, {MutationKind::Translate, "fr"}};
  std::set<DecisionBranch> seen;
  for (std::uint64_t s = 1; s <= 12; ++s) {
    PageBlueprint bp = blueprint(s, s * 7, static_cast<PageKind>(s % 3));
    bp.onion_links = {random_onion_host(rng), random_onion_host(rng), random_onion_host(rng)};
    auto base = render_page(bp);
    for (const auto& m : kinds) {
      for (double magnitude : {0.01, 0.1, 0.5}) {
        std::string copy;
        try {
          copy = mutate(base, m, magnitude, rng);
        } catch (const Error& e) {
          ASSERT_EQ(e.code(), ErrorCode::RegionMissing);
          continue;
        }
        auto a = candidate("a", base), b = candidate("b", copy);
        auto ab = detect_mirror(a, b), ba = detect_mirror(b, a);
        EXPECT_EQ(ab.kind, ba.kind);
        EXPECT_EQ(ab.score, ba.score);
        EXPECT_EQ(ab.branch, ba.branch);
        seen.insert(ab.branch);
        if (ab.kind == VerdictKind::ExactCopy) EXPECT_EQ(ab.score, 1.0);
        if (ab.kind == VerdictKind::NearMirror) EXPECT_GE(ab.score, 0.90);
        if (ab.kind == VerdictKind::Distinct) EXPECT_LT(ab.score, 0.90);
      }
    }
  }
  EXPECT_TRUE(seen.contains(DecisionBranch::FullHtmlFuzzy));
  EXPECT_TRUE(seen.contains(DecisionBranch::WeightedSplit));
  EXPECT_TRUE(seen.contains(DecisionBranch::CrossLanguageScheme));
}

// A ladder shares one rng seed, so each rung rewrites a superset of the words
// the previous rung rewrote. The CTPH score normalizes by signature length,
// and a rung that lengthens the signature can lift the score by a few points.
// Rungs 15% apart never rise.
TEST(DetectMirror, WeightedScoreFallsAlongAContentLadder) {
  for (std::uint64_t s = 1; s <= 40; ++s) {
    auto base = render_page(blueprint(s, s + 50, PageKind::Blog));
    auto a = candidate("a", base);
    std::vector<double> ladder{weighted(a, a)};
    for (int step = 1; step <= 10; ++step) {
      SynthRng rng(s);
      ladder.push_back(weighted(a, candidate("b", mutate(base, {MutationKind::ContentChange, {}}, step * 0.05, rng))));
    }
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
      EXPECT_LE(ladder[i + 1], ladder[i] + 0.05) << "seed " << s << " rung " << i + 1;
      if (i + 3 < ladder.size()) EXPECT_LE(ladder[i + 3], ladder[i]) << "seed " << s << " rung " << i + 3;
    }
    EXPECT_LT(ladder.back(), ladder[1]);
  }
}

TEST(DetectMirror, EmptyHtmlIsRejected) {
  MirrorCandidate empty;
  auto full = candidate("a", render_page(blueprint(7, 7)));
  try {
    detect_mirror(empty, full);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyPage);
  }
}

TEST(DetectMirror, ShortDocumentsUseStringEquality) {
  auto a = candidate("a", "<p>hello there</p>");
  auto b = candidate("b", "<p>hello there</p> ");
  auto c = candidate("c", "<div>hello there</div>");
  auto same = detect_mirror(a, b);
  EXPECT_EQ(same.branch, DecisionBranch::WeightedSplit);
  EXPECT_EQ(same.score, 1.0);
  auto differ = detect_mirror(a, c);
  EXPECT_NEAR(differ.score, 0.7, 1e-12) << "text equal, scheme not";
  EXPECT_EQ(differ.kind, VerdictKind::Distinct);
}

TEST(MirrorWeights, Validation) {
  EXPECT_NO_THROW(MirrorWeights{}.validate());
  for (auto w : {MirrorWeights{0.5, 0.6, 0.9}, MirrorWeights{-0.1, 1.1, 0.9}, MirrorWeights{0.3, 0.7, 1.5}}) {
    try {
      w.validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
  }
}

TEST(ClusterMirrors, EmptyInput) {
  auto c = cluster_mirrors({});
  EXPECT_TRUE(c.uniques.empty());
  EXPECT_TRUE(c.mirrors.empty());
}

TEST(ClusterMirrors, IdenticalPagesFormOneCluster) {
  auto html = render_page(blueprint(8, 8));
  std::vector<MirrorCandidate> pages;
  for (int i = 0; i < 6; ++i) pages.push_back(candidate("h" + std::to_string(i), html, 100 - i));
  auto c = cluster_mirrors(pages);
  ASSERT_EQ(c.uniques.size(), 1u);
  EXPECT_EQ(c.uniques[0], "h5.onion") << "earliest crawl is the representative";
  EXPECT_EQ(c.mirrors.at("h5.onion").size(), 5u);
}

TEST(ClusterMirrors, RecoversGeneratorClustersAsAPartition) {
  SynthSpec spec;
  spec.n_uniques = 25;
  spec.seed = 9;
  auto corpus = generate(spec);
  std::vector<MirrorCandidate> pages;
  std::vector<std::size_t> truth;
  std::int64_t clock = 0;
  for (const auto& p : corpus.pages) {
    if (p.surface) continue;
    pages.push_back(candidate(p.host.substr(0, p.host.find('.')), p.html, clock++));
    truth.push_back(p.cluster_id);
  }
  auto c = cluster_mirrors(pages);

  std::multiset<std::string> members(c.uniques.begin(), c.uniques.end());
  for (const auto& [rep, list] : c.mirrors) members.insert(list.begin(), list.end());
  ASSERT_EQ(members.size(), pages.size());
  for (const auto& p : pages) EXPECT_EQ(members.count(p.host), 1u) << p.host;

  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    for (std::size_t j = i + 1; j < pages.size(); ++j) {
      bool same_truth = truth[i] == truth[j];
      bool same_found = c.representative.at(pages[i].host) == c.representative.at(pages[j].host);
      agree += same_truth == same_found;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(total), 0.97);
}

TEST(ClustersCsv, RoundTrip) {
  MirrorClusters c;
  c.uniques = {"a.onion", "d.onion"};
  c.mirrors = {{"a.onion", {"b.onion", "c.onion"}}, {"d.onion", {}}};
  c.representative = {{"a.onion", "a.onion"}, {"b.onion", "a.onion"}, {"c.onion", "a.onion"}, {"d.onion", "d.onion"}};
  auto back = parse_clusters_csv(clusters_csv(c));
  EXPECT_EQ(back.uniques, c.uniques);
  EXPECT_EQ(back.representative, c.representative);
  EXPECT_EQ(back.mirrors.at("a.onion"), c.mirrors.at("a.onion"));
  EXPECT_THROW(parse_clusters_csv("host,representative\nb.onion,a.onion\n"), Error);
  EXPECT_THROW(parse_clusters_csv("nocomma\n"), Error);
}

TEST(Baselines, IdenticalTextsAreFullySimilar) {
  const std::string t = "the market sells many things at fair prices to all buyers";
  EXPECT_EQ(simhash_sim(simhash(t), simhash(t)), 1.0);
  EXPECT_EQ(minhash_sim(minhash(t), minhash(t)), 1.0);
}

TEST(Baselines, DisjointVocabulariesDoNotMatch) {
  std::mt19937_64 rng(10);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    auto a = word_soup(rng, "x", 500, 200), b = word_soup(rng, "y", 500, 200);
    ASSERT_EQ(jaccard(shingles(a), shingles(b)), 0.0);
    worst = std::max(worst, minhash_sim(minhash(a), minhash(b)));
  }
  EXPECT_LE(worst, 0.05);
}

TEST(Baselines, MinHashTracksExactJaccard) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    auto words = word_soup(rng, "w", 2000, 300);
    std::string other;
    std::size_t cut = 30 + rng() % 240;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < cut; ++k) pos = words.find(' ', pos) + 1;
    other = words.substr(0, pos) + word_soup(rng, "v", 2000, 300 - cut);
    double exact = jaccard(shingles(words), shingles(other));
    EXPECT_NEAR(minhash_sim(minhash(words), minhash(other)), exact, 0.1) << "pair " << i;
  }
}

TEST(Baselines, ShinglesAndTokens) {
  EXPECT_EQ(word_tokens("Hello, World-42!"), (std::vector<std::string>{"hello", "world", "42"}));
  EXPECT_EQ(shingles("a b c d e"), (std::vector<std::string>{"a b c d", "b c d e"}));
  EXPECT_EQ(shingles("a b"), (std::vector<std::string>{"a b"}));
  EXPECT_TRUE(shingles("").empty());
  EXPECT_EQ(simhash_sim(0, ~std::uint64_t{0}), 0.0);
}

TEST(BenchDedup, IdenticalPositivesArePerfectForEveryMethod) {
  std::vector<BenchPage> pages;
  for (int i = 0; i < 4; ++i) {
    pages.push_back(make_bench_page("p" + std::to_string(i) + ".onion", render_page(blueprint(12, i / 2))));
  }
  std::vector<LabeledPair> pairs{{0, 1, true}, {2, 3, true}};
  auto report = bench_dedup(pages, pairs);
  ASSERT_EQ(report.table.size(), 3u);
  for (const auto& r : report.table) {
    EXPECT_EQ(r.precision, 1.0) << r.method;
    EXPECT_EQ(r.fn, 0u) << r.method;
    EXPECT_EQ(r.repetitions, 0u) << r.method;
  }
  EXPECT_EQ(report.sweep.size(), 33u);
}

TEST(BenchDedup, RepetitionsCountExtraRepresentatives) {
  auto html = render_page(blueprint(13, 1));
  std::vector<BenchPage> pages;
  for (int i = 0; i < 3; ++i) pages.push_back(make_bench_page("p" + std::to_string(i) + ".onion", html));
  auto report = bench_dedup(pages, {{0, 2, true}, {1, 2, false}});
  EXPECT_EQ(report.table[0].repetitions, 1u);
  EXPECT_EQ(report.table[0].fp, 1u);
}

TEST(BenchDedup, EmptyBenchmark) {
  try {
    bench_dedup({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyBenchmark);
  }
}

TEST(BenchDedup, CsvColumnOrder) {
  MethodResult r{"Mimir", 0.9, 9, 1, 0, 5, 0.9, 1.0, 0.947368421, 0};
  EXPECT_EQ(benchmark_csv({r}), "Method,TP,FP,FN,Precision,Recall,F1,Repetitions\nMimir,9,1,0,0.9000,1.0000,0.9474,0\n");
  EXPECT_EQ(sweep_csv({r}).substr(0, 16), "Method,Threshold");
}

TEST(BenchmarkPairs, LabelsFollowClusters) {
  std::vector<std::size_t> cluster_of{0, 0, 0, 1, 1, 2, 2, 2, 2};
  std::vector<bool> is_base{true, false, false, true, false, true, false, false, false};
  auto pairs = benchmark_pairs(cluster_of, is_base, 100, 100, 1);
  std::size_t pos = 0, neg = 0;
  for (const auto& p : pairs) {
    EXPECT_TRUE(is_base[p.representative]);
    EXPECT_FALSE(is_base[p.page]);
    EXPECT_EQ(p.is_mirror, cluster_of[p.representative] == cluster_of[p.page]);
    (p.is_mirror ? pos : neg)++;
  }
  EXPECT_EQ(pos, 6u);
  EXPECT_EQ(neg, 6u);
  EXPECT_EQ(benchmark_pairs(cluster_of, is_base, 2, 3, 1).size(), 5u);
  auto again = benchmark_pairs(cluster_of, is_base, 100, 100, 1);
  ASSERT_EQ(again.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(again[i].representative, pairs[i].representative);
    EXPECT_EQ(again[i].page, pairs[i].page);
  }
}
