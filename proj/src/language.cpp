#include <algorithm>
#include <fstream>
#include <numeric>

#include "mimir/error.hpp"
#include "mimir/extractor.hpp"
#include "mimir/resources.hpp"

namespace mimir {

std::u32string utf8_to_u32(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    char32_t cp;
    std::size_t len;
    if (c < 0x80) { cp = c; len = 1; }
    else if ((c >> 5) == 0x6) { cp = c & 0x1F; len = 2; }
    else if ((c >> 4) == 0xE) { cp = c & 0x0F; len = 3; }
    else if ((c >> 3) == 0x1E) { cp = c & 0x07; len = 4; }
    else { out.push_back(0xFFFD); ++i; continue; }
    if (i + len > s.size()) { out.push_back(0xFFFD); break; }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) { ok = false; break; }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) { out.push_back(0xFFFD); ++i; continue; }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string u32_to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

namespace {

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;                 // Latin-1
  if (c >= 0x100 && c <= 0x17F && (c % 2) == 0) return c + 1;              // Latin Extended-A (mostly)
  if (c >= 0x410 && c <= 0x42F) return c + 32;                             // Cyrillic
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  return c;
}

bool is_letter(char32_t c) {
  if (c < 0x80) return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  if (c == 0xD7 || c == 0xF7) return false;
  if (c < 0xC0) return false;                                              // Latin-1 punctuation
  if (c >= 0x2000 && c <= 0x2BFF) return false;                            // punctuation, symbols
  if (c >= 0x3000 && c <= 0x303F) return false;                            // CJK punctuation
  if (c >= 0xFF00 && c <= 0xFF20) return false;                            // fullwidth punctuation
  if (c == 0xFFFD) return false;
  return true;
}

}  // namespace

std::vector<std::u32string> split_letter_words(std::string_view utf8) {
  std::vector<std::u32string> words;
  std::u32string cur;
  for (char32_t c : utf8_to_u32(utf8)) {
    if (is_letter(c)) {
      cur.push_back(to_lower(c));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

TrigramLanguageDetector::TrigramLanguageDetector(std::map<std::string, std::vector<std::string>> profiles,
                                                 double inclusion_ratio)
    : inclusion_ratio_(inclusion_ratio) {
  for (const auto& [code, grams] : profiles) codes_.push_back(code);
  for (std::size_t li = 0; li < codes_.size(); ++li) {
    const auto& grams = profiles.at(codes_[li]);
    for (std::size_t rank = 0; rank < grams.size(); ++rank) {
      auto gram = utf8_to_u32(grams[rank]);
      if (gram.size() != 3) continue;
      auto& w = weights_[gram];
      if (w.empty()) w.assign(codes_.size(), 0.0);
      // Rank-weighted presence: 2 for the most frequent trigram, tending to 1.
      w[li] = std::max(w[li], 1.0 + static_cast<double>(grams.size() - rank) / static_cast<double>(grams.size()));
    }
  }
}

const TrigramLanguageDetector& TrigramLanguageDetector::bundled() {
  static const TrigramLanguageDetector detector = [] {
    std::map<std::string, std::vector<std::string>> profiles;
    for (const auto& code : resources::language_codes()) {
      std::vector<std::string> grams;
      std::string_view text = resources::profile_text(code);
      std::size_t pos = 0;
      while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        grams.emplace_back(text.substr(pos, end - pos));
        pos = end + 1;
      }
      profiles.emplace(code, std::move(grams));
    }
    return TrigramLanguageDetector(std::move(profiles));
  }();
  return detector;
}

TrigramLanguageDetector TrigramLanguageDetector::from_directory(const std::filesystem::path& dir) {
  std::map<std::string, std::vector<std::string>> profiles;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::vector<std::string> grams;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) grams.push_back(line);
    }
    profiles.emplace(entry.path().stem().string(), std::move(grams));
  }
  if (ec || profiles.empty()) throw Error(ErrorCode::IoError, "no language profiles in " + dir.string());
  return TrigramLanguageDetector(std::move(profiles));
}

std::string TrigramLanguageDetector::classify_chunk(std::string_view chunk) const {
  std::vector<double> score(codes_.size(), 0.0);
  std::u32string gram(3, U' ');
  for (const auto& word : split_letter_words(chunk)) {
    std::u32string padded = U" " + word + U" ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      gram.assign(padded, i, 3);
      auto it = weights_.find(gram);
      if (it == weights_.end()) continue;
      for (std::size_t li = 0; li < codes_.size(); ++li) score[li] += it->second[li];
    }
  }
  auto best = std::max_element(score.begin(), score.end());
  if (best == score.end() || *best <= 0.0) return "und";
  return codes_[static_cast<std::size_t>(best - score.begin())];
}

namespace {

// Sentences merged until each chunk holds at least kChunkChars code points.
std::vector<std::string> chunk_text(std::string_view text) {
  constexpr std::size_t kChunkChars = 120;
  std::vector<std::string> sentences;
  std::string cur;
  for (char c : text) {
    cur.push_back(c);
    if (c == '.' || c == '!' || c == '?' || c == '\n') {
      sentences.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) sentences.push_back(std::move(cur));

  std::vector<std::string> chunks;
  std::string acc;
  for (auto& s : sentences) {
    acc += s;
    if (utf8_to_u32(acc).size() >= kChunkChars) {
      chunks.push_back(std::move(acc));
      acc.clear();
    }
  }
  if (!acc.empty()) {
    if (!chunks.empty() && utf8_to_u32(acc).size() < kChunkChars / 3) chunks.back() += acc;
    else chunks.push_back(std::move(acc));
  }
  return chunks;
}

}  // namespace

std::vector<LanguageScore> TrigramLanguageDetector::detect(std::string_view text) const {
  const std::vector<LanguageScore> undetermined{{"und", 0.0}};
  std::size_t letters = 0;
  for (char32_t c : utf8_to_u32(text)) letters += c != U' ' && c != U'\t' && c != U'\n' && c != U'\r';
  if (letters < kMinTextLength) return undetermined;

  std::map<std::string, double> votes;
  double total = 0.0;
  for (const auto& chunk : chunk_text(text)) {
    auto code = classify_chunk(chunk);
    if (code == "und") continue;
    double weight = static_cast<double>(utf8_to_u32(chunk).size());
    votes[code] += weight;
    total += weight;
  }
  if (total <= 0.0) return undetermined;

  std::vector<LanguageScore> ranked;
  for (const auto& [code, w] : votes) ranked.push_back({code, w / total});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.confidence != b.confidence ? a.confidence > b.confidence : a.code < b.code;
  });
  const double cutoff = ranked.front().confidence * inclusion_ratio_;
  std::erase_if(ranked, [cutoff](const auto& s) { return s.confidence < cutoff; });
  return ranked;
}

std::vector<LanguageScore> detect_language(std::string_view text) {
  return TrigramLanguageDetector::bundled().detect(text);
}

}  // namespace mimir
