#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "mimir/codec.hpp"
#include "mimir/error.hpp"
#include "mimir/extractor.hpp"
#include "mimir/synth.hpp"

using namespace mimir;
namespace fs = std::filesystem;

namespace {

PageBlueprint market(std::uint64_t seed) {
  PageBlueprint bp;
  bp.title = "Shop";
  bp.category = "drugs";
  bp.kind = PageKind::Market;
  bp.structure_seed = seed;
  bp.content_seed = seed + 1000;
  return bp;
}

std::string blank_out(const std::string& html, const std::regex& re) { return std::regex_replace(html, re, "#"); }

std::map<std::string, std::string> tree_digests(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = to_hex(md5(ss.str()));
  }
  return out;
}

fs::path fresh(const std::string& name) {
  auto dir = fs::temp_directory_path() / "mimir_unit" / name;
  fs::remove_all(dir);
  return dir;
}

const std::regex kCrypto(R"(\d+\.\d+ (BTC|XMR))");
const std::regex kFiat(R"((USD|EUR) \d+\.\d{2})");
const std::regex kWallet(R"(\b[13][1-9A-HJ-NP-Za-km-z]{25,34}\b)");
const std::regex kOnion(R"([a-z2-7]{16,56}\.onion)");

}  // namespace

TEST(Generate, SingleUniqueWithoutMirrors) {
  SynthSpec spec;
  spec.n_uniques = 1;
  spec.fanout_mean = 0;
  spec.surface_seeds = 0;
  auto c = generate(spec);
  ASSERT_EQ(c.pages.size(), 1u);
  EXPECT_EQ(c.cluster_count(), 1u);
  EXPECT_EQ(c.mirror_fraction(), 0.0);
}

TEST(Generate, LabelsPartitionThePages) {
  SynthSpec spec;
  spec.n_uniques = 100;
  auto c = generate(spec);
  auto dir = fresh("labels");
  write_fixture(c, dir);
  std::ifstream in(dir / "labels.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "host,cluster_id,mutation_kind");
  std::map<std::string, std::size_t> sizes;
  std::size_t rows = 0, bases = 0;
  while (std::getline(in, line)) {
    auto a = line.find(','), b = line.find(',', a + 1);
    ++sizes[line.substr(a + 1, b - a - 1)];
    bases += line.substr(b + 1) == "base";
    ++rows;
  }
  std::size_t onion = 0;
  for (const auto& p : c.pages) onion += !p.surface;
  std::size_t sum = 0;
  for (const auto& [id, n] : sizes) sum += n;
  EXPECT_EQ(sum, onion);
  EXPECT_EQ(rows, onion);
  EXPECT_EQ(sizes.size(), 100u);
  EXPECT_EQ(bases, 100u);
  EXPECT_NEAR(c.mirror_fraction(), 1.0 - 100.0 / static_cast<double>(onion), 1e-12);
}

TEST(Generate, SameSeedSameBytes) {
  SynthSpec spec;
  spec.n_uniques = 20;
  auto a = fresh("same_a"), b = fresh("same_b");
  write_fixture(generate(spec), a);
  write_fixture(generate(spec), b);
  EXPECT_EQ(tree_digests(a), tree_digests(b));
  spec.seed = 43;
  auto c = fresh("same_c");
  write_fixture(generate(spec), c);
  EXPECT_NE(tree_digests(a), tree_digests(c));
}

TEST(Generate, EveryOnionPageIsReachableFromTheSeeds) {
  SynthSpec spec;
  spec.n_uniques = 40;
  spec.dead_fraction = 0;
  for (auto topology : {Topology::Chain, Topology::Tree, Topology::Clusters}) {
    spec.topology = topology;
    auto c = generate(spec);
    std::map<std::string, const SynthPage*> by_host;
    for (const auto& p : c.pages) by_host[p.host] = &p;
    std::set<std::string> seen;
    std::vector<std::string> stack;
    for (const auto& s : c.seeds) {
      if (by_host.contains(s.host) && seen.insert(s.host).second) stack.push_back(s.host);
    }
    while (!stack.empty()) {
      auto h = stack.back();
      stack.pop_back();
      const std::string& html = by_host.at(h)->html;
      for (std::sregex_iterator it(html.begin(), html.end(), kOnion), end; it != end; ++it) {
        auto target = it->str();
        if (by_host.contains(target) && seen.insert(target).second) stack.push_back(target);
      }
    }
    for (const auto& p : c.pages) {
      if (!p.surface) EXPECT_TRUE(seen.contains(p.host)) << to_string(topology) << " " << p.host << " " << p.mutation;
    }
  }
}

TEST(Generate, RejectsInvalidSpecs) {
  SynthSpec spec;
  spec.n_uniques = 0;
  EXPECT_THROW(generate(spec), Error);
  spec = {};
  spec.max_magnitude = 0.7;
  EXPECT_THROW(spec.validate(), Error);
  spec = {};
  spec.volatility = 1.5;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(RenderPage, SizesStayInTheReliableRange) {
  for (std::uint64_t s = 1; s <= 60; ++s) {
    PageBlueprint bp = market(s);
    bp.kind = static_cast<PageKind>(s % 3);
    auto html = render_page(bp);
    EXPECT_GE(html.size(), 4096u) << s;
    EXPECT_LE(html.size(), 16384u) << s;
  }
}

TEST(RenderPage, ContentSeedLeavesTheSchemeAlone) {
  PageBlueprint a = market(5), b = market(5);
  b.content_seed = 77;
  b.title = "Other";
  EXPECT_NE(render_page(a), render_page(b));
  EXPECT_EQ(extract_scheme(render_page(a)), extract_scheme(render_page(b)));
}

TEST(Mutate, CurrencyChangeRewritesOnlyPrices) {
  SynthRng rng(1);
  auto html = render_page(market(1));
  auto count = std::distance(std::sregex_iterator(html.begin(), html.end(), kCrypto), std::sregex_iterator());
  ASSERT_GT(count, 0);
  auto out = mutate(html, {MutationKind::CurrencyChange, {}}, 0.1, rng);
  EXPECT_EQ(std::distance(std::sregex_iterator(out.begin(), out.end(), kCrypto), std::sregex_iterator()), count);
  EXPECT_EQ(blank_out(html, kCrypto), blank_out(out, kCrypto));
  EXPECT_EQ(extract_scheme(html), extract_scheme(out));
  std::size_t changed = 0;
  std::sregex_iterator x(html.begin(), html.end(), kCrypto), y(out.begin(), out.end(), kCrypto), end;
  for (; x != end && y != end; ++x, ++y) changed += x->str() != y->str();
  EXPECT_EQ(changed, static_cast<std::size_t>(count));
}

TEST(Mutate, FiatAndWalletChangesStayInTheirRegions) {
  SynthRng rng(2);
  auto html = render_page(market(2));
  auto fiat = mutate(html, {MutationKind::FiatChange, {}}, 0.1, rng);
  EXPECT_NE(fiat, html);
  EXPECT_EQ(blank_out(html, kFiat), blank_out(fiat, kFiat));
  auto wallet = mutate(html, {MutationKind::CryptowalletChange, {}}, 0.1, rng);
  EXPECT_NE(wallet, html);
  EXPECT_EQ(blank_out(html, kWallet), blank_out(wallet, kWallet));
}

TEST(Mutate, TranslateKeepsTheScheme) {
  SynthRng rng(3);
  PageBlueprint bp = market(3);
  bp.kind = PageKind::Blog;
  auto html = render_page(bp);
  for (const char* lang : {"de", "fr", "it"}) {
    auto out = mutate(html, {MutationKind::Translate, lang}, 0.1, rng);
    EXPECT_NE(out, html);
    EXPECT_EQ(extract_scheme(html), extract_scheme(out)) << lang;
  }
}

TEST(Mutate, ContentAndSchemeChangesTouchOnlyTheirLayer) {
  SynthRng rng(4);
  auto html = render_page(market(4));
  auto content = mutate(html, {MutationKind::ContentChange, {}}, 0.05, rng);
  EXPECT_EQ(extract_scheme(content), extract_scheme(html));
  EXPECT_NE(extract_text(content), extract_text(html));
  auto scheme = mutate(html, {MutationKind::SchemeChange, {}}, 0.05, rng);
  EXPECT_EQ(extract_text(scheme), extract_text(html));
  EXPECT_NE(extract_scheme(scheme), extract_scheme(html));
}

TEST(Mutate, LinkChangeSwapsHostsOnly) {
  SynthRng rng(5);
  PageBlueprint bp = market(5);
  for (int i = 0; i < 6; ++i) bp.onion_links.push_back(random_onion_host(rng));
  auto html = render_page(bp);
  auto out = mutate(html, {MutationKind::LinkChange, {}}, 0.5, rng);
  EXPECT_NE(out, html);
  EXPECT_EQ(blank_out(html, kOnion), blank_out(out, kOnion));
  EXPECT_EQ(extract_scheme(html), extract_scheme(out));
}

TEST(Mutate, DeterministicUnderAFixedSeed) {
  auto html = render_page(market(6));
  for (auto kind : {MutationKind::ContentChange, MutationKind::SchemeChange, MutationKind::CryptowalletChange}) {
    SynthRng a(9), b(9);
    EXPECT_EQ(mutate(html, {kind, {}}, 0.1, a), mutate(html, {kind, {}}, 0.1, b));
  }
}

TEST(Mutate, Errors) {
  SynthRng rng(7);
  try {
    mutate("<p>no prices here at all</p>", {MutationKind::CurrencyChange, {}}, 0.1, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RegionMissing);
  }
  for (double bad : {0.0, 0.6, -1.0}) {
    try {
      mutate(render_page(market(7)), {MutationKind::ContentChange, {}}, bad, rng);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidSpec);
    }
  }
}

TEST(MutationNames, RoundTrip) {
  for (const Mutation& m : {Mutation{MutationKind::SchemeChange, {}}, Mutation{MutationKind::Translate, "de"},
                            Mutation{MutationKind::FiatChange, {}}}) {
    EXPECT_EQ(parse_mutation(to_string(m)), m);
  }
  EXPECT_EQ(to_string(Mutation{MutationKind::Translate, "it"}), "Translate(it)");
  EXPECT_THROW(parse_mutation("Nope"), Error);
}

TEST(LabeledTexts, BalancedAcrossTheClasses) {
  auto docs = labeled_texts(20, 0.2, 1);
  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs) ++counts[d.label];
  EXPECT_EQ(counts.size(), 11u);
  for (const auto& [label, n] : counts) EXPECT_EQ(n, 20u) << label;
}
