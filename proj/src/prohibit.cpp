#include "mimir/prohibit.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "mimir/error.hpp"
#include "mimir/resources.hpp"

namespace mimir {

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  const std::map<std::string, std::set<std::string>*> sections{
      {"keywords", &lex.keywords},
      {"negative_verbs", &lex.negative_verbs},
      {"positive_verbs", &lex.positive_verbs},
      {"negative_adjectives", &lex.negative_adjectives},
      {"positive_adjectives", &lex.positive_adjectives},
  };
  std::set<std::string>* current = nullptr;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    line = line.substr(begin, line.find_last_not_of(" \t\r") - begin + 1);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::SchemaError, "line " + std::to_string(n) + ": bad section header");
      auto it = sections.find(line.substr(1, line.size() - 2));
      if (it == sections.end()) throw Error(ErrorCode::SchemaError, "line " + std::to_string(n) + ": unknown section " + line);
      current = it->second;
      continue;
    }
    if (!current) throw Error(ErrorCode::SchemaError, "line " + std::to_string(n) + ": term outside a section");
    std::transform(line.begin(), line.end(), line.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    current->insert(line);
  }
  auto disjoint = [](const std::set<std::string>& a, const std::set<std::string>& b, const char* what) {
    for (const auto& t : a) {
      if (b.contains(t)) throw Error(ErrorCode::SchemaError, std::string(what) + " listed with both polarities: " + t);
    }
  };
  disjoint(lex.negative_verbs, lex.positive_verbs, "verb");
  disjoint(lex.negative_adjectives, lex.positive_adjectives, "adjective");
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read lexicon " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Lexicon& Lexicon::bundled() {
  static const Lexicon lex = parse(resources::default_lexicon_text());
  return lex;
}

std::string_view to_string(PosTag t) {
  static constexpr std::array<std::string_view, 8> names{"KEY", "VBZ", "VB", "VBN", "JJ", "WILL", "NOT", "OTHER"};
  return names[static_cast<std::size_t>(t)];
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Allows: return "Allows";
    case Verdict::Forbids: return "Forbids";
    case Verdict::NoSignal: return "NoSignal";
  }
  return "?";
}

std::vector<std::string> word_split(std::string_view sentence) {
  std::string normalized;
  // Typographic apostrophe (U+2019) becomes ASCII.
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (sentence.substr(i, 3) == "\xE2\x80\x99") {
      normalized.push_back('\'');
      i += 2;
    } else {
      normalized.push_back(sentence[i]);
    }
  }
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.front() == '\'') cur.erase(cur.begin());
    while (!cur.empty() && cur.back() == '\'') cur.pop_back();
    if (cur.empty()) return;
    if (cur.size() > 3 && cur.ends_with("n't")) {
      std::string base = cur.substr(0, cur.size() - 3);
      if (base == "wo") base = "will";
      else if (base == "ca") base = "can";
      else if (base == "sha") base = "shall";
      words.push_back(base);
      words.push_back("n't");
    } else if (cur == "cannot") {
      words.push_back("can");
      words.push_back("not");
    } else {
      words.push_back(cur);
    }
    cur.clear();
  };
  for (char ch : normalized) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80 || c == '\'') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return words;
}

namespace {

const std::unordered_set<std::string>& irregular_participles() {
  static const std::unordered_set<std::string> words = [] {
    std::unordered_set<std::string> s;
    for (const auto& w : resources::lines_of(resources::irregular_participles_text())) s.insert(w);
    return s;
  }();
  return words;
}

bool is_linking_verb(const std::string& w) {
  static const std::unordered_set<std::string> verbs{"is", "are", "was", "were", "be", "am", "gets", "becomes", "remains", "stays"};
  return verbs.contains(w);
}

bool looks_like_s_verb(const std::string& w) {
  return w.size() > 3 && w.back() == 's' && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is");
}

}  // namespace

std::vector<TaggedToken> tag_tokens(std::string_view sentence, const Lexicon& lex) {
  const auto words = word_split(sentence);
  std::vector<std::vector<std::string>> phrases;
  for (const auto& k : lex.keywords) {
    auto p = word_split(k);
    if (!p.empty()) phrases.push_back(std::move(p));
  }
  std::sort(phrases.begin(), phrases.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });

  std::vector<TaggedToken> out;
  for (std::size_t i = 0; i < words.size();) {
    std::size_t matched = 0;
    for (const auto& p : phrases) {
      if (i + p.size() <= words.size() && std::equal(p.begin(), p.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
        matched = p.size();
        break;
      }
    }
    if (matched) {
      std::string text = words[i];
      for (std::size_t k = 1; k < matched; ++k) text += " " + words[i + k];
      out.push_back({text, PosTag::KEY, Polarity::Neutral});
      i += matched;
      continue;
    }

    const std::string& w = words[i];
    TaggedToken t{w, PosTag::OTHER, Polarity::Neutral};
    const bool after_will = !out.empty() && (out.back().tag == PosTag::WILL ||
                                             (out.back().tag == PosTag::NOT && out.size() >= 2 &&
                                              out[out.size() - 2].tag == PosTag::WILL));
    if (w == "not" || w == "n't") {
      t.tag = PosTag::NOT;
    } else if (w == "will" || w == "shall") {
      t.tag = PosTag::WILL;
    } else if (lex.negative_adjectives.contains(w) || lex.positive_adjectives.contains(w)) {
      t.tag = PosTag::JJ;
      t.polarity = lex.negative_adjectives.contains(w) ? Polarity::Negative : Polarity::Positive;
    } else if (lex.negative_verbs.contains(w) || lex.positive_verbs.contains(w)) {
      t.tag = PosTag::VBN;
      t.polarity = lex.negative_verbs.contains(w) ? Polarity::Negative : Polarity::Positive;
    } else if (after_will) {
      t.tag = PosTag::VB;
    } else if (is_linking_verb(w)) {
      t.tag = PosTag::VBZ;
    } else if (irregular_participles().contains(w) || (w.size() > 3 && (w.ends_with("ed") || w.ends_with("en")))) {
      t.tag = PosTag::VBN;
    } else if (looks_like_s_verb(w)) {
      t.tag = PosTag::VBZ;
    }
    out.push_back(std::move(t));
    ++i;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto b = cur.find_first_not_of(" \t\r");
    if (b != std::string::npos) out.push_back(cur.substr(b, cur.find_last_not_of(" \t\r") - b + 1));
    cur.clear();
  };
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?' || c == '\n') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

namespace {

struct Slot {
  PosTag tag;
  Polarity polarity = Polarity::Neutral;  // Neutral: any polarity
};

const std::array<std::vector<Slot>, 5>& rules() {
  static const std::array<std::vector<Slot>, 5> r{{
      {{PosTag::VBZ}, {PosTag::NOT}, {PosTag::VBN, Polarity::Positive}},
      {{PosTag::WILL}, {PosTag::VB}, {PosTag::VBN, Polarity::Negative}},
      {{PosTag::VBZ}, {PosTag::NOT}, {PosTag::JJ, Polarity::Positive}},
      {{PosTag::VBZ}, {PosTag::VBN, Polarity::Negative}},
      {{PosTag::VBZ}, {PosTag::JJ, Polarity::Negative}},
  }};
  return r;
}

}  // namespace

std::optional<int> match_rules(const std::vector<TaggedToken>& tokens, std::size_t key) {
  if (key >= tokens.size() || tokens[key].tag != PosTag::KEY) return std::nullopt;
  const std::size_t end = std::min(tokens.size(), key + 1 + kRuleWindow);
  for (std::size_t r = 0; r < rules().size(); ++r) {
    const auto& slots = rules()[r];
    std::size_t s = 0;
    for (std::size_t i = key + 1; i < end && s < slots.size(); ++i) {
      const TaggedToken& t = tokens[i];
      if (t.tag == PosTag::OTHER) continue;  // fillers such as adverbs
      const Slot& want = slots[s];
      if (t.tag != want.tag || (want.polarity != Polarity::Neutral && t.polarity != want.polarity)) break;
      ++s;
    }
    if (s == slots.size()) return static_cast<int>(r) + 1;
  }
  return std::nullopt;
}

SiteVerdict classify_site(std::string_view text, const Lexicon& lex) {
  SiteVerdict v;
  if (lex.keywords.empty()) {
    spdlog::warn("prohibition lexicon has no keywords; every verdict is NoSignal");
    return v;
  }
  bool keyword_seen = false, forbids = false;
  for (const auto& sentence : split_sentences(text)) {
    auto tokens = tag_tokens(sentence, lex);
    std::optional<int> rule;
    bool has_key = false;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].tag != PosTag::KEY) continue;
      has_key = true;
      if (!rule) rule = match_rules(tokens, i);
    }
    if (!has_key) continue;
    keyword_seen = true;
    forbids = forbids || rule.has_value();
    v.matched_sentences.push_back({sentence, rule});
  }
  v.verdict = forbids ? Verdict::Forbids : (keyword_seen ? Verdict::Allows : Verdict::NoSignal);
  return v;
}

}  // namespace mimir
