#include "mimir/resources.hpp"

#include <sstream>

namespace mimir::resources {

namespace embedded {
extern const std::string_view stopwords_en;
extern const std::string_view stemmer_rules;
extern const std::string_view irregular_participles;
extern const std::string_view lexicon_default;
extern const std::string_view dictionary;
extern const std::string_view profile_en;
extern const std::string_view profile_de;
extern const std::string_view profile_fr;
extern const std::string_view profile_it;
extern const std::string_view profile_es;
extern const std::string_view profile_ru;
extern const std::string_view profile_pt;
extern const std::string_view profile_nl;
extern const std::string_view profile_zh;
extern const std::string_view profile_tr;
}  // namespace embedded

std::string_view stopwords_text() { return embedded::stopwords_en; }
std::string_view stemmer_rules_text() { return embedded::stemmer_rules; }
std::string_view irregular_participles_text() { return embedded::irregular_participles; }
std::string_view default_lexicon_text() { return embedded::lexicon_default; }
std::string_view dictionary_text() { return embedded::dictionary; }

const std::vector<std::string>& language_codes() {
  static const std::vector<std::string> codes{"en", "de", "fr", "it", "es", "ru", "pt", "nl", "zh", "tr"};
  return codes;
}

std::string_view profile_text(std::string_view code) {
  if (code == "en") return embedded::profile_en;
  if (code == "de") return embedded::profile_de;
  if (code == "fr") return embedded::profile_fr;
  if (code == "it") return embedded::profile_it;
  if (code == "es") return embedded::profile_es;
  if (code == "ru") return embedded::profile_ru;
  if (code == "pt") return embedded::profile_pt;
  if (code == "nl") return embedded::profile_nl;
  if (code == "zh") return embedded::profile_zh;
  if (code == "tr") return embedded::profile_tr;
  return {};
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.push_back(std::move(line));
  }
  return out;
}

const std::unordered_set<std::string>& english_stopwords() {
  static const std::unordered_set<std::string> words = [] {
    auto lines = lines_of(stopwords_text());
    return std::unordered_set<std::string>(lines.begin(), lines.end());
  }();
  return words;
}

const std::vector<DictionaryEntry>& dictionary() {
  static const std::vector<DictionaryEntry> entries = [] {
    std::vector<DictionaryEntry> out;
    for (const auto& line : lines_of(dictionary_text())) {
      std::vector<std::string> cols;
      std::stringstream ss(line);
      std::string col;
      while (std::getline(ss, col, '\t')) cols.push_back(col);
      if (cols.size() != 5) continue;
      out.push_back({cols[0], cols[1], cols[2], cols[3], cols[4]});
    }
    return out;
  }();
  return entries;
}

}  // namespace mimir::resources
