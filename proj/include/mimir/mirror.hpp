#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mimir/codec.hpp"
#include "mimir/corpus.hpp"
#include "mimir/ctph.hpp"
#include "mimir/extractor.hpp"

namespace mimir {

struct ExactDigest {
  Md5Digest bytes{};
  std::string algorithm = "md5";
  friend bool operator==(const ExactDigest&, const ExactDigest&) = default;
};

ExactDigest exact_digest(std::string_view raw_html);

struct MirrorWeights {
  double scheme = 0.3;
  double content = 0.7;
  double threshold = 0.90;

  // Throws Error(InvalidConfig) unless both weights lie in [0,1] and sum to 1
  // and the threshold lies in [0,1].
  void validate() const;
};

enum class VerdictKind { ExactCopy, NearMirror, Distinct };
enum class DecisionBranch { Digest, CrossLanguageScheme, FullHtmlFuzzy, WeightedSplit };

std::string_view to_string(VerdictKind k);
std::string_view to_string(DecisionBranch b);

struct MirrorVerdict {
  VerdictKind kind = VerdictKind::Distinct;
  double score = 0.0;
  DecisionBranch branch = DecisionBranch::Digest;

  bool is_mirror() const { return kind != VerdictKind::Distinct; }
};

// Everything detect_mirror needs from one page, computed once.
struct MirrorCandidate {
  std::string host;
  std::int64_t first_crawl = 0;  // epoch seconds; clustering order
  ExactDigest digest;
  std::size_t html_size = 0;
  FuzzyHash html_hash;
  FuzzyHash scheme_hash;
  FuzzyHash content_hash;
  std::string scheme;
  std::string text;
  std::string language;  // top detected language, "und" if unknown
};

inline constexpr std::size_t kShortDocumentBytes = 256;

MirrorCandidate make_candidate(const PageRecord& record, const ExtractedPage& page);
MirrorCandidate make_candidate(std::string host, std::string_view html,
                               const LanguageDetector& detector = TrigramLanguageDetector::bundled());

// Exact digest, then a language split: pages in different languages are
// compared by scheme only; same-language pages by the full HTML hash and, when
// that falls short, by the weighted scheme/content hashes. Throws
// Error(EmptyPage) if either page has no HTML.
MirrorVerdict detect_mirror(const MirrorCandidate& a, const MirrorCandidate& b, const MirrorWeights& weights = {});
MirrorVerdict detect_mirror(const PageRecord& ra, const ExtractedPage& pa, const PageRecord& rb,
                            const ExtractedPage& pb, const MirrorWeights& weights = {});

struct MirrorClusters {
  std::vector<std::string> uniques;                         // earliest-crawled member of each cluster
  std::map<std::string, std::vector<std::string>> mirrors;  // representative -> members after it
  std::map<std::string, std::string> representative;        // every host -> its representative

  std::size_t page_count() const { return representative.size(); }
};

// Single pass in first-crawl order (ties keep input order). A page joins the
// best-scoring representative it mirrors, or founds a new cluster.
MirrorClusters cluster_mirrors(const std::vector<MirrorCandidate>& pages, const MirrorWeights& weights = {});

// "host,representative" per page, representatives first within each cluster.
std::string clusters_csv(const MirrorClusters& clusters);
// Throws Error(SchemaError) on a malformed line.
MirrorClusters parse_clusters_csv(std::string_view text);

// ---- baselines -------------------------------------------------------------

// Lowercased alphanumeric runs; bytes >= 0x80 count as word characters.
std::vector<std::string> word_tokens(std::string_view text);

std::uint64_t simhash(std::string_view text);
double simhash_sim(std::uint64_t a, std::uint64_t b);

inline constexpr std::size_t kMinHashPermutations = 128;
inline constexpr std::size_t kShingleWords = 4;
using MinHashSignature = std::array<std::uint64_t, kMinHashPermutations>;

std::vector<std::string> shingles(std::string_view text, std::size_t width = kShingleWords);
MinHashSignature minhash(std::string_view text);
double minhash_sim(const MinHashSignature& a, const MinHashSignature& b);

// ---- benchmark -------------------------------------------------------------

struct BenchPage {
  MirrorCandidate candidate;
  std::uint64_t simhash = 0;
  MinHashSignature minhash{};
};

// Baselines see the raw HTML as text.
BenchPage make_bench_page(std::string host, std::string_view html,
                          const LanguageDetector& detector = TrigramLanguageDetector::bundled());

struct LabeledPair {
  std::size_t representative = 0;  // index into the page list
  std::size_t page = 0;
  bool is_mirror = false;
};

struct MethodResult {
  std::string method;
  double threshold = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  // Sum over pages of (representatives that claimed the page - 1).
  std::size_t repetitions = 0;
};

struct BenchmarkReport {
  std::vector<MethodResult> table;  // Mimir, SimHash@0.8, MinHash@0.4
  std::vector<MethodResult> sweep;  // every method at 0.0, 0.1, ..., 1.0
};

inline constexpr double kSimHashThreshold = 0.8;
inline constexpr double kMinHashThreshold = 0.4;

// Positives pair each cluster's base page with its other members; negatives
// pair a member with the base of a different, randomly drawn cluster. Each
// side is shuffled and cut to its cap.
std::vector<LabeledPair> benchmark_pairs(const std::vector<std::size_t>& cluster_of, const std::vector<bool>& is_base,
                                         std::size_t max_positive, std::size_t max_negative, std::uint64_t seed);

// Throws Error(EmptyBenchmark) when there are no pairs.
BenchmarkReport bench_dedup(const std::vector<BenchPage>& pages, const std::vector<LabeledPair>& pairs,
                            const MirrorWeights& weights = {});

// Method,TP,FP,FN,Precision,Recall,F1,Repetitions
std::string benchmark_csv(const std::vector<MethodResult>& rows);
// Method,Threshold,TP,FP,FN,Precision,Recall,F1,Repetitions
std::string sweep_csv(const std::vector<MethodResult>& rows);

}  // namespace mimir
