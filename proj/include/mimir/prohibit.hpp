#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mimir {

struct Lexicon {
  std::set<std::string> keywords;  // may hold multi-word phrases
  std::set<std::string> negative_verbs, positive_verbs;
  std::set<std::string> negative_adjectives, positive_adjectives;

  // Sectioned text: [keywords], [negative_verbs], [positive_verbs],
  // [negative_adjectives], [positive_adjectives]. Throws Error(SchemaError) on
  // an unknown section, a term outside any section, or a term listed with
  // both polarities.
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::string& path);
  // Bundled verbs and adjectives with no keywords.
  static const Lexicon& bundled();
};

enum class PosTag { KEY, VBZ, VB, VBN, JJ, WILL, NOT, OTHER };
enum class Polarity { Neutral, Positive, Negative };

std::string_view to_string(PosTag t);

struct TaggedToken {
  std::string text;
  PosTag tag = PosTag::OTHER;
  Polarity polarity = Polarity::Neutral;
  friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};

// Lowercased word tokens; "n't" splits off its verb ("won't" -> will n't).
std::vector<std::string> word_split(std::string_view sentence);

// Keyword phrases collapse into a single KEY token.
std::vector<TaggedToken> tag_tokens(std::string_view sentence, const Lexicon& lexicon);

// Sentences end at '.', '!', '?' and line breaks.
std::vector<std::string> split_sentences(std::string_view text);

enum class Verdict { Allows, Forbids, NoSignal };
std::string_view to_string(Verdict v);

struct SentenceMatch {
  std::string sentence;
  std::optional<int> rule;  // 1..5 in the order of the structure table
};

struct SiteVerdict {
  Verdict verdict = Verdict::NoSignal;
  std::vector<SentenceMatch> matched_sentences;  // sentences holding a keyword
};

inline constexpr std::size_t kRuleWindow = 5;

// Rule id matched right after the KEY at `key`, if any.
std::optional<int> match_rules(const std::vector<TaggedToken>& tokens, std::size_t key);

SiteVerdict classify_site(std::string_view text, const Lexicon& lexicon);

}  // namespace mimir
