#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mimir/corpus.hpp"

namespace mimir {

struct LanguageScore {
  std::string code;         // ISO-639-1 or "und"
  double confidence = 0.0;  // [0, 1]
  friend bool operator==(const LanguageScore&, const LanguageScore&) = default;
};

struct ExtractedPage {
  std::string text;    // visible text, tags stripped, whitespace collapsed
  std::string scheme;  // tag tokens only, attribute values dropped
  std::vector<Link> links;
  std::string title;
  std::vector<LanguageScore> languages;
  std::map<std::string, std::string> metadata;  // <meta> name/content pairs plus "title"

  std::string top_language() const { return languages.empty() ? "und" : languages.front().code; }
};

std::string extract_text(std::string_view html);
std::string extract_scheme(std::string_view html);
std::string extract_title(std::string_view html);
std::map<std::string, std::string> extract_metadata(std::string_view html);

// Onion addresses anywhere in the raw HTML plus href targets. Own links keep
// their path ("host/about"); external onion links are reduced to the host;
// surface links keep the raw href. Order of first occurrence, no duplicates.
std::vector<Link> extract_links(std::string_view html, const OnionAddress& self);

// The document as an ordered sequence of tag tokens and text slots. Tag items
// concatenate to extract_scheme(). Joining the text items with a space at
// every non-inline tag and collapsing whitespace gives extract_text().
struct LayoutItem {
  bool is_tag = false;
  std::string value;
};
std::vector<LayoutItem> extract_layout(std::string_view html);

class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  // Ranked by descending confidence. Never empty.
  virtual std::vector<LanguageScore> detect(std::string_view text) const = 0;
};

// Character-trigram classifier over fixed frequency-ranked profiles. Text is
// cut into ~sentence-sized chunks; each chunk votes for its best-matching
// profile and a language's confidence is its length-weighted vote share.
// Languages scoring at least `inclusion_ratio` of the top score are reported.
class TrigramLanguageDetector final : public LanguageDetector {
 public:
  static constexpr std::size_t kMinTextLength = 20;
  static constexpr double kDefaultInclusionRatio = 0.2;

  // Profiles: ISO code -> trigrams, most frequent first.
  explicit TrigramLanguageDetector(std::map<std::string, std::vector<std::string>> profiles,
                                   double inclusion_ratio = kDefaultInclusionRatio);

  static const TrigramLanguageDetector& bundled();
  // Reads every "<code>.txt" file in `dir`, one trigram per line.
  static TrigramLanguageDetector from_directory(const std::filesystem::path& dir);

  std::vector<LanguageScore> detect(std::string_view text) const override;

  // Best profile for one chunk, or "und" when nothing matches.
  std::string classify_chunk(std::string_view chunk) const;

 private:
  std::vector<std::string> codes_;
  // trigram -> per-language weight (0 when absent)
  std::unordered_map<std::u32string, std::vector<double>> weights_;
  double inclusion_ratio_;
};

std::vector<LanguageScore> detect_language(std::string_view text);

ExtractedPage extract_page(std::string_view html, const OnionAddress& self,
                           const LanguageDetector& detector = TrigramLanguageDetector::bundled());

// Lowercased UTF-8 words (letters only) as code point strings. Shared by the
// language detector and pseudo-translation.
std::vector<std::u32string> split_letter_words(std::string_view utf8);
std::u32string utf8_to_u32(std::string_view utf8);
std::string u32_to_utf8(std::u32string_view text);

}  // namespace mimir
