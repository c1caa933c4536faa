#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mimir/classify.hpp"
#include "mimir/corpus.hpp"

namespace mimir {

using SynthRng = std::mt19937_64;

enum class MutationKind {
  SchemeChange,
  LinkChange,
  ContentChange,
  CurrencyChange,
  CryptowalletChange,
  FiatChange,
  Translate,
};

struct Mutation {
  MutationKind kind = MutationKind::ContentChange;
  std::string language;  // Translate only: "de", "fr" or "it"
  friend bool operator==(const Mutation&, const Mutation&) = default;
};

std::string to_string(const Mutation& m);  // "ContentChange", "Translate(de)"
Mutation parse_mutation(std::string_view s);

// Rewrites one region of a generated page and leaves every other byte alone.
//   ContentChange      a run of consecutive words, `magnitude` of the text bytes
//   SchemeChange       extra attributes on a run of consecutive tags, `magnitude` of the tag bytes
//   LinkChange         max(1, magnitude * n) of the n distinct onion hosts, swapped for fresh ones
//   CurrencyChange     every crypto price converted between BTC and XMR
//   FiatChange         every fiat price converted between USD and EUR
//   CryptowalletChange every wallet address regenerated
//   Translate          every dictionary word in the text
// The last four ignore `magnitude`. Throws Error(RegionMissing) when the page
// has nothing to rewrite and Error(InvalidSpec) for a magnitude outside (0, 0.5].
std::string mutate(std::string_view html, const Mutation& m, double magnitude, SynthRng& rng);

std::string random_onion_host(SynthRng& rng, OnionVersion version = OnionVersion::V3);
std::string random_wallet(SynthRng& rng);

enum class PageKind { Market, Blog, Directory };

struct PageBlueprint {
  std::string title;
  std::string category;  // dictionary tag, e.g. "drugs"
  PageKind kind = PageKind::Blog;
  std::vector<std::string> onion_links;  // hosts for the link list
  std::vector<std::string> surface_links;
  std::string policy;  // optional house-rules sentence
  std::uint64_t structure_seed = 1;  // tags, attributes, block sizes
  std::uint64_t content_seed = 1;    // words, prices, wallets
};

// Pages land between 4 and 16 KiB. Two blueprints that differ only in
// content_seed (and title) render to the same scheme.
std::string render_page(const PageBlueprint& bp);

// Neutral placeholder keyword carried by house-rules sentences on "porn"
// pages, and the sentences themselves: the first five forbid it, the rest
// allow it.
inline constexpr std::string_view kPolicyKeyword = "placeholder material";
const std::vector<std::string>& policy_sentences();
inline constexpr std::size_t kForbiddingPolicies = 5;

// Dictionary tag -> classifier label ("social" -> "Soc.-Network").
std::string category_label(std::string_view tag);
const std::vector<std::string>& category_tags();

enum class Topology { Chain, Tree, Clusters };
std::string_view to_string(Topology t);
Topology parse_topology(std::string_view s);

struct SynthSpec {
  std::size_t n_uniques = 100;
  bool geometric_fanout = true;
  double fanout_mean = 4.0;  // mirrors per unique
  // Weights over mutation kinds for mirrors that are not exact copies.
  std::map<MutationKind, double> mutation_mix{
      {MutationKind::SchemeChange, 4}, {MutationKind::LinkChange, 3},         {MutationKind::ContentChange, 3},
      {MutationKind::CurrencyChange, 2}, {MutationKind::CryptowalletChange, 2}, {MutationKind::FiatChange, 1},
      {MutationKind::Translate, 1}};
  double exact_fraction = 0.5;
  double min_magnitude = 0.01;
  double max_magnitude = 0.10;
  Topology topology = Topology::Tree;
  std::size_t branching = 3;      // Tree
  std::size_t cluster_size = 8;   // Clusters
  double extra_seed_fraction = 0.05;
  double manual_seed_fraction = 0.3;  // of the keyword seeds, also tagged manual
  double dead_seed_fraction = 0.2;    // extra engine hits that do not resolve
  double surface_link_fraction = 0.4;
  std::size_t surface_seeds = 1;
  double volatility = 0.1;      // hosts with transient failures
  double dead_fraction = 0.02;  // hosts that never answer
  std::size_t labeled_per_class = 200;
  double label_noise = 0.2;
  std::uint64_t seed = 42;

  // Throws Error(InvalidSpec).
  void validate() const;
};

struct SynthPage {
  std::string host;
  std::string html;
  std::size_t cluster_id = 0;
  std::string mutation;  // "base", "exact", or to_string(Mutation)
  std::string category;  // classifier label
  std::vector<std::string> schedule;  // fixture failure schedule
  bool surface = false;               // a surface-web seed page
};

struct SynthSeed {
  std::string host;
  std::set<std::string> provenance;
};

struct SynthCorpus {
  std::vector<SynthPage> pages;  // each cluster's base first, then its mirrors
  std::vector<std::pair<std::string, std::string>> topology;  // base -> base
  std::vector<SynthSeed> seeds;
  std::vector<std::string> titles;  // titles of the sites search engines index
  std::map<std::string, std::map<std::string, std::vector<std::string>>> engines;  // engine -> term -> urls
  std::vector<LabeledDoc> training;

  std::size_t cluster_count() const;
  double mirror_fraction() const;  // onion pages that are not their cluster's base
};

SynthCorpus generate(const SynthSpec& spec);

// corpus/<host>/index.html, corpus/<host>.schedule, labels.csv, categories.csv,
// seeds.tsv, manual.txt, titles.txt, engines/<engine>/<term>, train.jsonl, lexicon.txt
void write_fixture(const SynthCorpus& corpus, const std::filesystem::path& dir);

// Texts drawn from each category's own vocabulary, with `noise` of the words
// taken from a vocabulary shared by every category.
std::vector<LabeledDoc> labeled_texts(std::size_t per_class, double noise, std::uint64_t seed);

}  // namespace mimir
