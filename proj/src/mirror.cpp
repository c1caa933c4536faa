#include "mimir/mirror.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "mimir/error.hpp"

namespace mimir {

ExactDigest exact_digest(std::string_view raw_html) { return ExactDigest{md5(raw_html), "md5"}; }

void MirrorWeights::validate() const {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(scheme) || !in_unit(content)) throw Error(ErrorCode::InvalidConfig, "mirror weights must lie in [0,1]");
  if (std::abs(scheme + content - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("W_s + W_c must equal 1 (got {} + {})", scheme, content));
  }
  if (!in_unit(threshold)) throw Error(ErrorCode::InvalidConfig, "mirror threshold must lie in [0,1]");
}

std::string_view to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::ExactCopy: return "ExactCopy";
    case VerdictKind::NearMirror: return "NearMirror";
    case VerdictKind::Distinct: return "Distinct";
  }
  return "?";
}

std::string_view to_string(DecisionBranch b) {
  switch (b) {
    case DecisionBranch::Digest: return "Digest";
    case DecisionBranch::CrossLanguageScheme: return "CrossLanguageScheme";
    case DecisionBranch::FullHtmlFuzzy: return "FullHtmlFuzzy";
    case DecisionBranch::WeightedSplit: return "WeightedSplit";
  }
  return "?";
}

namespace {

MirrorCandidate candidate_from(std::string host, std::string_view html, std::string scheme, std::string text,
                               std::string language) {
  MirrorCandidate c;
  c.host = std::move(host);
  c.digest = exact_digest(html);
  c.html_size = html.size();
  c.html_hash = ctph_hash(html);
  c.scheme_hash = ctph_hash(scheme);
  c.content_hash = ctph_hash(text);
  c.scheme = std::move(scheme);
  c.text = std::move(text);
  c.language = language.empty() ? "und" : std::move(language);
  return c;
}

// Scores are rounded so that threshold comparisons do not depend on the last
// bit of a floating-point sum.
double tidy(double score) { return std::round(score * 1e9) / 1e9; }

MirrorVerdict decide(double score, double threshold, DecisionBranch branch) {
  score = tidy(score);
  return {score >= threshold ? VerdictKind::NearMirror : VerdictKind::Distinct, score, branch};
}

bool languages_differ(const std::string& a, const std::string& b) {
  return a != b && a != "und" && b != "und";
}

}  // namespace

MirrorCandidate make_candidate(const PageRecord& record, const ExtractedPage& page) {
  MirrorCandidate c = candidate_from(record.url.host, record.html, page.scheme, page.text, page.top_language());
  if (!record.timestamps.empty()) c.first_crawl = parse_timestamp(record.timestamps.front());
  return c;
}

MirrorCandidate make_candidate(std::string host, std::string_view html, const LanguageDetector& detector) {
  OnionAddress self{host, classify_onion_label(host.substr(0, host.find('.')))};
  ExtractedPage page = extract_page(html, self, detector);
  return candidate_from(std::move(host), html, std::move(page.scheme), std::move(page.text), page.top_language());
}

MirrorVerdict detect_mirror(const MirrorCandidate& a, const MirrorCandidate& b, const MirrorWeights& w) {
  if (a.html_size == 0 || b.html_size == 0) throw Error(ErrorCode::EmptyPage, "cannot compare a page without HTML");
  if (a.digest == b.digest) return {VerdictKind::ExactCopy, 1.0, DecisionBranch::Digest};

  if (a.html_size < kShortDocumentBytes || b.html_size < kShortDocumentBytes) {
    double s = (a.scheme == b.scheme ? 1.0 : 0.0), c = (a.text == b.text ? 1.0 : 0.0);
    return decide(w.scheme * s + w.content * c, w.threshold, DecisionBranch::WeightedSplit);
  }

  if (languages_differ(a.language, b.language)) {
    return decide(ctph_compare(a.scheme_hash, b.scheme_hash) / 100.0, w.threshold, DecisionBranch::CrossLanguageScheme);
  }

  const int full = ctph_compare(a.html_hash, b.html_hash);
  if (full >= w.threshold * 100.0) return decide(full / 100.0, w.threshold, DecisionBranch::FullHtmlFuzzy);

  const int s = ctph_compare(a.scheme_hash, b.scheme_hash);
  const int c = ctph_compare(a.content_hash, b.content_hash);
  return decide((w.scheme * s + w.content * c) / 100.0, w.threshold, DecisionBranch::WeightedSplit);
}

MirrorVerdict detect_mirror(const PageRecord& ra, const ExtractedPage& pa, const PageRecord& rb,
                            const ExtractedPage& pb, const MirrorWeights& weights) {
  return detect_mirror(make_candidate(ra, pa), make_candidate(rb, pb), weights);
}

MirrorClusters cluster_mirrors(const std::vector<MirrorCandidate>& pages, const MirrorWeights& weights) {
  std::vector<std::size_t> order(pages.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return pages[x].first_crawl < pages[y].first_crawl; });

  MirrorClusters out;
  std::vector<std::size_t> reps;
  std::unordered_map<std::string, std::size_t> rep_by_digest;  // hex digest -> page index
  for (std::size_t idx : order) {
    const MirrorCandidate& page = pages[idx];
    if (out.representative.contains(page.host)) continue;  // duplicate host in the input

    std::optional<std::size_t> home;
    if (auto it = rep_by_digest.find(to_hex(page.digest.bytes)); it != rep_by_digest.end()) {
      home = it->second;
    } else {
      double best = -1.0;
      for (std::size_t r : reps) {
        MirrorVerdict v = detect_mirror(pages[r], page, weights);
        if (v.is_mirror() && v.score > best) {
          best = v.score;
          home = r;
        }
      }
    }

    if (home) {
      const std::string& rep = pages[*home].host;
      out.mirrors[rep].push_back(page.host);
      out.representative[page.host] = rep;
    } else {
      reps.push_back(idx);
      rep_by_digest.emplace(to_hex(page.digest.bytes), idx);
      out.uniques.push_back(page.host);
      out.mirrors[page.host];
      out.representative[page.host] = page.host;
    }
  }
  return out;
}

// ---- baselines -------------------------------------------------------------

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    bool word_char = c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (word_char) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : ch);
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::uint64_t simhash(std::string_view text) {
  std::unordered_map<std::string, int> counts;
  for (auto& w : word_tokens(text)) ++counts[std::move(w)];
  std::array<std::int64_t, 64> v{};
  for (const auto& [word, n] : counts) {
    std::uint64_t h = mix64(fnv1a64(word));
    for (int bit = 0; bit < 64; ++bit) v[bit] += ((h >> bit) & 1U) ? n : -n;
  }
  std::uint64_t fp = 0;
  for (int bit = 0; bit < 64; ++bit) {
    if (v[bit] > 0) fp |= std::uint64_t{1} << bit;
  }
  return fp;
}

double simhash_sim(std::uint64_t a, std::uint64_t b) { return 1.0 - std::popcount(a ^ b) / 64.0; }

std::vector<std::string> shingles(std::string_view text, std::size_t width) {
  auto words = word_tokens(text);
  std::vector<std::string> out;
  if (words.empty()) return out;
  if (words.size() < width) width = words.size();
  for (std::size_t i = 0; i + width <= words.size(); ++i) {
    std::string s = words[i];
    for (std::size_t k = 1; k < width; ++k) {
      s.push_back(' ');
      s += words[i + k];
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

struct Permutation {
  std::uint64_t a, b;
};

const std::array<Permutation, kMinHashPermutations>& permutations() {
  static const auto perms = [] {
    std::array<Permutation, kMinHashPermutations> p{};
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i].a = mix64(0x9e3779b97f4a7c15ULL * (2 * i + 1)) % (kMersenne61 - 1) + 1;
      p[i].b = mix64(0x9e3779b97f4a7c15ULL * (2 * i + 2)) % kMersenne61;
    }
    return p;
  }();
  return perms;
}

std::uint64_t mod_mersenne61(unsigned __int128 x) {
  std::uint64_t r = static_cast<std::uint64_t>(x & kMersenne61) + static_cast<std::uint64_t>(x >> 61);
  r = (r & kMersenne61) + (r >> 61);
  return r >= kMersenne61 ? r - kMersenne61 : r;
}

}  // namespace

MinHashSignature minhash(std::string_view text) {
  MinHashSignature sig;
  sig.fill(kMersenne61);
  std::set<std::uint64_t> hashed;
  for (const auto& s : shingles(text)) hashed.insert(mix64(fnv1a64(s)) % kMersenne61);
  const auto& perms = permutations();
  for (std::uint64_t h : hashed) {
    for (std::size_t i = 0; i < kMinHashPermutations; ++i) {
      auto v = mod_mersenne61(static_cast<unsigned __int128>(perms[i].a) * h + perms[i].b);
      sig[i] = std::min(sig[i], v);
    }
  }
  return sig;
}

double minhash_sim(const MinHashSignature& a, const MinHashSignature& b) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < kMinHashPermutations; ++i) same += a[i] == b[i];
  return static_cast<double>(same) / kMinHashPermutations;
}

// ---- benchmark -------------------------------------------------------------

BenchPage make_bench_page(std::string host, std::string_view html, const LanguageDetector& detector) {
  BenchPage p;
  p.simhash = simhash(html);
  p.minhash = minhash(html);
  p.candidate = make_candidate(std::move(host), html, detector);
  return p;
}

namespace {

template <class Decide>
MethodResult score_method(std::string method, double threshold, const std::vector<LabeledPair>& pairs,
                          Decide&& decide_pair) {
  MethodResult r;
  r.method = std::move(method);
  r.threshold = threshold;
  std::map<std::size_t, std::set<std::size_t>> claimed;  // page -> representatives matching it
  for (const auto& pair : pairs) {
    bool predicted = decide_pair(pair);
    if (predicted) claimed[pair.page].insert(pair.representative);
    if (predicted && pair.is_mirror) ++r.tp;
    else if (predicted) ++r.fp;
    else if (pair.is_mirror) ++r.fn;
    else ++r.tn;
  }
  for (const auto& [page, reps] : claimed) r.repetitions += reps.size() - 1;
  r.precision = r.tp + r.fp ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace

std::string clusters_csv(const MirrorClusters& clusters) {
  std::string out = "host,representative\n";
  for (const auto& rep : clusters.uniques) {
    out += rep + "," + rep + "\n";
    if (auto it = clusters.mirrors.find(rep); it != clusters.mirrors.end()) {
      for (const auto& m : it->second) out += m + "," + rep + "\n";
    }
  }
  return out;
}

MirrorClusters parse_clusters_csv(std::string_view text) {
  MirrorClusters out;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (n == 1 && line == "host,representative")) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == line.size()) {
      throw Error(ErrorCode::SchemaError, "clusters line " + std::to_string(n) + ": expected host,representative");
    }
    std::string host = line.substr(0, comma), rep = line.substr(comma + 1);
    if (!out.representative.contains(rep)) {
      if (host != rep) throw Error(ErrorCode::SchemaError, "clusters line " + std::to_string(n) + ": mirror before its representative");
      out.uniques.push_back(rep);
      out.representative[rep] = rep;
      continue;
    }
    if (out.representative.contains(host)) continue;
    out.representative[host] = rep;
    out.mirrors[rep].push_back(host);
  }
  return out;
}

std::vector<LabeledPair> benchmark_pairs(const std::vector<std::size_t>& cluster_of, const std::vector<bool>& is_base,
                                         std::size_t max_positive, std::size_t max_negative, std::uint64_t seed) {
  if (cluster_of.size() != is_base.size()) throw Error(ErrorCode::LengthMismatch, "cluster ids and base flags differ in length");
  std::map<std::size_t, std::size_t> base_of;
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    if (is_base[i]) base_of.emplace(cluster_of[i], i);
  }
  std::vector<std::size_t> bases;
  for (const auto& [c, i] : base_of) bases.push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<LabeledPair> positives, negatives;
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    if (is_base[i]) continue;
    auto home = base_of.find(cluster_of[i]);
    if (home != base_of.end()) positives.push_back({home->second, i, true});
    if (bases.size() < 2) continue;
    std::size_t other;
    do {
      other = bases[std::uniform_int_distribution<std::size_t>(0, bases.size() - 1)(rng)];
    } while (cluster_of[other] == cluster_of[i]);
    negatives.push_back({other, i, false});
  }
  std::shuffle(positives.begin(), positives.end(), rng);
  std::shuffle(negatives.begin(), negatives.end(), rng);
  if (positives.size() > max_positive) positives.resize(max_positive);
  if (negatives.size() > max_negative) negatives.resize(max_negative);
  positives.insert(positives.end(), negatives.begin(), negatives.end());
  return positives;
}

BenchmarkReport bench_dedup(const std::vector<BenchPage>& pages, const std::vector<LabeledPair>& pairs,
                            const MirrorWeights& weights) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyBenchmark, "no labeled pairs");
  for (const auto& p : pairs) {
    if (p.representative >= pages.size() || p.page >= pages.size()) {
      throw Error(ErrorCode::EmptyBenchmark, "pair references a page outside the page list");
    }
  }
  weights.validate();

  std::vector<double> sim_scores, min_scores;
  for (const auto& p : pairs) {
    sim_scores.push_back(simhash_sim(pages[p.representative].simhash, pages[p.page].simhash));
    min_scores.push_back(minhash_sim(pages[p.representative].minhash, pages[p.page].minhash));
  }

  auto mimir_at = [&](double threshold) {
    MirrorWeights w = weights;
    w.threshold = threshold;
    return score_method("Mimir", threshold, pairs, [&](const LabeledPair& p) {
      return detect_mirror(pages[p.representative].candidate, pages[p.page].candidate, w).is_mirror();
    });
  };
  auto baseline_at = [&](std::string name, const std::vector<double>& scores, double threshold) {
    std::size_t i = 0;
    return score_method(std::move(name), threshold, pairs,
                        [&](const LabeledPair&) { return scores[i++] >= threshold - 1e-12; });
  };

  BenchmarkReport report;
  report.table.push_back(mimir_at(weights.threshold));
  report.table.push_back(baseline_at("SimHash", sim_scores, kSimHashThreshold));
  report.table.push_back(baseline_at("MinHash", min_scores, kMinHashThreshold));
  for (int step = 0; step <= 10; ++step) {
    double t = step / 10.0;
    report.sweep.push_back(mimir_at(t));
    report.sweep.push_back(baseline_at("SimHash", sim_scores, t));
    report.sweep.push_back(baseline_at("MinHash", min_scores, t));
  }
  return report;
}

std::string benchmark_csv(const std::vector<MethodResult>& rows) {
  std::string out = "Method,TP,FP,FN,Precision,Recall,F1,Repetitions\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{:.4f},{:.4f},{:.4f},{}\n", r.method, r.tp, r.fp, r.fn, r.precision, r.recall,
                       r.f1, r.repetitions);
  }
  return out;
}

std::string sweep_csv(const std::vector<MethodResult>& rows) {
  std::string out = "Method,Threshold,TP,FP,FN,Precision,Recall,F1,Repetitions\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{:.1f},{},{},{},{:.4f},{:.4f},{:.4f},{}\n", r.method, r.threshold, r.tp, r.fp, r.fn,
                       r.precision, r.recall, r.f1, r.repetitions);
  }
  return out;
}

}  // namespace mimir
