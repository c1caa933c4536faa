#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mimir/classify.hpp"
#include "mimir/error.hpp"
#include "mimir/resources.hpp"

namespace mimir {

Stemmer Stemmer::parse(std::string_view text) {
  std::vector<Rule> rules;
  for (const auto& line : resources::lines_of(text)) {
    std::stringstream ss(line);
    std::string suffix, replacement;
    std::size_t min_stem = 1;
    if (!(ss >> suffix >> replacement >> min_stem)) {
      throw Error(ErrorCode::SchemaError, "bad stemmer rule: " + line);
    }
    Rule r{suffix, replacement, min_stem, false};
    if (r.replacement.starts_with("-")) {
      r.undouble = r.replacement == "-+undouble";
      r.replacement.clear();
    }
    rules.push_back(std::move(r));
  }
  return Stemmer(std::move(rules));
}

const Stemmer& Stemmer::bundled() {
  static const Stemmer stemmer = parse(resources::stemmer_rules_text());
  return stemmer;
}

std::string Stemmer::stem(std::string_view word) const {
  for (const auto& r : rules_) {
    if (!word.ends_with(r.suffix)) continue;
    std::size_t stem_len = word.size() - r.suffix.size();
    if (stem_len < r.min_stem) continue;
    std::string out(word.substr(0, stem_len));
    if (r.undouble && out.size() >= 2) {
      char last = out.back();
      bool vowel = std::string_view("aeiou").find(last) != std::string_view::npos;
      if (last == out[out.size() - 2] && !vowel && last != 'l' && last != 's' && last != 'z') out.pop_back();
    }
    return out + r.replacement;
  }
  return std::string(word);
}

namespace {

bool is_word_byte(unsigned char c) {
  return c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool has_letter(std::string_view w) {
  return std::any_of(w.begin(), w.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return c >= 0x80 || (c >= 'a' && c <= 'z');
  });
}

}  // namespace

std::vector<std::string> preprocess(std::string_view text, const std::unordered_set<std::string>& stopwords,
                                    const Stemmer& stemmer) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 && has_letter(cur) && !stopwords.contains(cur)) tokens.push_back(stemmer.stem(cur));
    cur.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : ch);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> preprocess(std::string_view text) {
  return preprocess(text, resources::english_stopwords(), Stemmer::bundled());
}

std::string_view to_string(TfIdfMode m) { return m == TfIdfMode::Standard ? "standard" : "paper-literal"; }

TfIdfMode parse_tfidf_mode(std::string_view s) {
  if (s == "standard") return TfIdfMode::Standard;
  if (s == "paper-literal") return TfIdfMode::PaperLiteral;
  throw Error(ErrorCode::InvalidConfig, "unknown tf-idf mode: " + std::string(s));
}

Vocabulary Vocabulary::fit(const std::vector<std::vector<std::string>>& docs) {
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::vector<std::string> uniq(doc);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[std::move(t)];
  }
  std::vector<std::string> terms;
  std::vector<std::size_t> counts;
  for (auto& [t, n] : df) {
    terms.push_back(t);
    counts.push_back(n);
  }
  return from_parts(std::move(terms), std::move(counts), docs.size());
}

Vocabulary Vocabulary::from_parts(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t n_docs) {
  if (terms.size() != df.size()) throw Error(ErrorCode::LengthMismatch, "vocabulary terms and df differ in length");
  Vocabulary v;
  v.terms = std::move(terms);
  v.df = std::move(df);
  v.n_docs = n_docs;
  for (std::size_t i = 0; i < v.terms.size(); ++i) v.index.emplace(v.terms[i], i);
  return v;
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
  auto it = index.find(std::string(term));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::idf(std::size_t column, TfIdfMode mode) const {
  double v = std::log2(static_cast<double>(n_docs) / static_cast<double>(df.at(column) + 1));
  return mode == TfIdfMode::Standard ? std::max(0.0, v) : v;
}

SparseVector tfidf_row(const Vocabulary& vocab, const std::vector<std::string>& tokens, TfIdfMode mode) {
  std::map<std::size_t, std::size_t> tf;
  for (const auto& t : tokens) {
    if (auto col = vocab.find(t)) ++tf[*col];
  }
  SparseVector row;
  for (auto [col, count] : tf) {
    double w = 0.0;
    if (mode == TfIdfMode::Standard) {
      w = (1.0 + std::log2(static_cast<double>(count))) * vocab.idf(col, mode);
    } else {
      double denom = vocab.idf(col, mode);
      w = denom > 0.0 ? static_cast<double>(count) / denom : 0.0;
    }
    if (w != 0.0) row.emplace_back(col, w);
  }
  if (mode == TfIdfMode::Standard) {
    double norm = 0.0;
    for (auto& [c, w] : row) norm += w * w;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (auto& [c, w] : row) w /= norm;
    }
  }
  return row;
}

std::vector<SparseVector> tfidf_vectorize(const Vocabulary& vocab, const std::vector<std::vector<std::string>>& docs,
                                          TfIdfMode mode) {
  if (vocab.size() == 0) throw Error(ErrorCode::EmptyVocabulary, "vocabulary has no terms");
  std::vector<SparseVector> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(tfidf_row(vocab, d, mode));
  return rows;
}

}  // namespace mimir
