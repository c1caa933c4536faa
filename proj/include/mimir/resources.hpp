#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace mimir::resources {

// Raw bundled files.
std::string_view stopwords_text();
std::string_view stemmer_rules_text();
std::string_view irregular_participles_text();
std::string_view default_lexicon_text();
std::string_view dictionary_text();
// Trigram profile for an ISO code among language_codes(); empty if unknown.
std::string_view profile_text(std::string_view code);
const std::vector<std::string>& language_codes();

const std::unordered_set<std::string>& english_stopwords();

struct DictionaryEntry {
  std::string en, de, fr, it;
  std::string tag;  // "function", "common", or a category name
};
const std::vector<DictionaryEntry>& dictionary();

// Non-empty, non-comment lines of a bundled text file.
std::vector<std::string> lines_of(std::string_view text);

}  // namespace mimir::resources
