#include "mimir/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <unordered_map>

#include <fmt/format.h>

#include "mimir/codec.hpp"
#include "mimir/error.hpp"
#include "mimir/html.hpp"
#include "mimir/resources.hpp"

namespace mimir {

namespace {

// ---- word pools ------------------------------------------------------------

struct Lexicon {
  std::vector<std::string> function_words;
  std::vector<std::string> common;
  std::map<std::string, std::vector<std::string>> by_tag;
  std::map<std::string, std::unordered_map<std::string, std::string>> translation;  // lang -> en -> word
  double mean_word_bytes = 6.0;
};

const Lexicon& lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    std::size_t bytes = 0, words = 0;
    for (const auto& e : resources::dictionary()) {
      if ((e.en + e.de + e.fr + e.it).find('_') != std::string::npos) continue;
      if (e.tag == "function") l.function_words.push_back(e.en);
      else if (e.tag == "common") l.common.push_back(e.en);
      else l.by_tag[e.tag].push_back(e.en);
      l.translation["de"].emplace(e.en, e.de);
      l.translation["fr"].emplace(e.en, e.fr);
      l.translation["it"].emplace(e.en, e.it);
      bytes += e.en.size();
      ++words;
    }
    l.mean_word_bytes = words ? static_cast<double>(bytes) / static_cast<double>(words) + 1.0 : 6.0;
    return l;
  }();
  return lex;
}

template <class T>
const T& pick(const std::vector<T>& v, SynthRng& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

int between(SynthRng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double unit(SynthRng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
bool chance(SynthRng& rng, double p) { return unit(rng) < p; }

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 32);
  return w;
}

constexpr std::string_view kBase32 = "abcdefghijklmnopqrstuvwxyz234567";
constexpr std::string_view kBase58 = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
constexpr double kXmrPerBtc = 150.0;
constexpr double kEurPerUsd = 0.92;
constexpr double kUsdPerBtc = 30000.0;

// ---- content writer --------------------------------------------------------

// Produces running English prose: function words, shared vocabulary and the
// page category's terms, with sentence punctuation.
class Writer {
 public:
  Writer(std::string tag, std::uint64_t seed) : tag_(std::move(tag)), rng_(seed) {}

  std::string word() {
    const auto& lex = lexicon();
    double r = unit(rng_);
    if (r < 0.40) return pick(lex.function_words, rng_);
    if (r < 0.72 || !lex.by_tag.contains(tag_)) return pick(lex.common, rng_);
    return pick(lex.by_tag.at(tag_), rng_);
  }

  std::string topic_word() {
    const auto& lex = lexicon();
    if (lex.by_tag.contains(tag_) && chance(rng_, 0.6)) return pick(lex.by_tag.at(tag_), rng_);
    return pick(lex.common, rng_);
  }

  // n words of flowing prose.
  std::string prose(int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
      if (remaining_ == 0) remaining_ = between(rng_, 6, 14);
      std::string w = word();
      if (at_sentence_start_) w = capitalize(w);
      if (!out.empty()) out.push_back(' ');
      out += w;
      at_sentence_start_ = --remaining_ == 0;
      if (at_sentence_start_) out.push_back('.');
    }
    return out;
  }

  // A short title-cased label.
  std::string label(int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
      if (i) out.push_back(' ');
      out += capitalize(i == 0 ? topic_word() : word());
    }
    return out;
  }

  SynthRng& rng() { return rng_; }

 private:
  std::string tag_;
  SynthRng rng_;
  int remaining_ = 0;
  bool at_sentence_start_ = true;
};

// ---- structure -------------------------------------------------------------

class Layout {
 public:
  explicit Layout(std::uint64_t seed) : rng_(seed) {
    static const std::vector<std::string> containers{"div", "section", "article", "aside", "main", "figure", "span"};
    static const std::vector<std::string> attrs{"class", "id",        "style",  "data-id", "data-role", "data-ref",
                                                "role",  "aria-label", "title", "dir",     "tabindex",  "data-track"};
    std::vector<std::string> c = containers;
    std::shuffle(c.begin(), c.end(), rng_);
    containers_.assign(c.begin(), c.begin() + between(rng_, 2, 4));
    std::vector<std::string> a = attrs;
    std::shuffle(a.begin(), a.end(), rng_);
    attrs_.assign(a.begin(), a.begin() + between(rng_, 2, 6));
    attr_rate_ = 0.15 + 0.6 * unit(rng_);
    para_tag_ = chance(rng_, 0.75) ? "p" : "div";
    list_tag_ = chance(rng_, 0.7) ? "ul" : "ol";
    heading_ = chance(rng_, 0.5) ? "h2" : "h3";
    inline_tags_ = {"b", "em", "strong", "span", "i", "small"};
    std::shuffle(inline_tags_.begin(), inline_tags_.end(), rng_);
    inline_tags_.resize(between(rng_, 1, 3));
  }

  SynthRng& rng() { return rng_; }

  std::string open(std::string_view tag) {
    std::string s = "<" + std::string(tag);
    for (const auto& a : attrs_) {
      if (!chance(rng_, attr_rate_)) continue;
      s += fmt::format(" {}=\"{}{}\"", a, kBase32[between(rng_, 0, 25)], between(rng_, 0, 999));
    }
    return s + ">";
  }
  static std::string close(std::string_view tag) { return "</" + std::string(tag) + ">"; }

  const std::string& container() { return pick(containers_, rng_); }
  const std::string& para_tag() const { return para_tag_; }
  const std::string& list_tag() const { return list_tag_; }
  const std::string& heading() const { return heading_; }
  const std::string& inline_tag() { return pick(inline_tags_, rng_); }

 private:
  SynthRng rng_;
  std::vector<std::string> containers_, attrs_, inline_tags_;
  double attr_rate_ = 0.3;
  std::string para_tag_, list_tag_, heading_;
};

class PageBuilder {
 public:
  PageBuilder(const PageBlueprint& bp) : bp_(bp), layout_(bp.structure_seed), writer_(bp.category, bp.content_seed) {}

  std::string build() {
    auto& S = layout_.rng();
    const double target = 5000 + 7000 * unit(S);
    if (chance(S, 0.8)) emit_tag("<!DOCTYPE html>\n");
    emit_tag(chance(S, 0.6) ? "<html lang=\"en\">" : "<html>");
    emit_tag("\n<head>\n<meta charset=\"utf-8\">\n<title>");
    emit_text(bp_.title.empty() ? writer_.label(3) : bp_.title);
    emit_tag("</title>\n");
    if (chance(S, 0.7)) {
      emit_tag("<meta name=\"description\" content=\"");
      emit_text(writer_.prose(between(S, 6, 12)));
      emit_tag("\">\n");
    }
    if (chance(S, 0.5)) emit_tag("<meta name=\"viewport\" content=\"width=device-width\">\n");
    if (chance(S, 0.4)) emit_tag("<link rel=\"stylesheet\" href=\"/style.css\">\n");
    emit_tag("</head>\n");
    emit_tag(layout_.open("body") + "\n");

    std::vector<std::string> wrappers;
    for (int d = between(S, 0, 2); d > 0; --d) {
      wrappers.push_back(layout_.container());
      emit_tag(layout_.open(wrappers.back()) + "\n");
    }

    header();
    nav();
    // Fixed-size blocks first so that filler paragraphs can top up to target.
    const double reserved = link_list_estimate() + 400;
    if (bp_.kind == PageKind::Market) {
      paragraph();
      products();
      wallets();
    } else if (bp_.kind == PageKind::Directory) {
      paragraph();
      directory();
    }
    while (estimate_ + reserved < target) {
      if (bp_.kind == PageKind::Blog && chance(S, 0.4)) heading();
      paragraph();
    }
    if (!bp_.policy.empty()) {
      emit_tag(layout_.open(layout_.para_tag()));
      emit_text(bp_.policy);
      estimate_ += static_cast<double>(bp_.policy.size());
      emit_tag(Layout::close(layout_.para_tag()) + "\n");
    }
    link_list();
    footer();

    for (auto it = wrappers.rbegin(); it != wrappers.rend(); ++it) emit_tag(Layout::close(*it) + "\n");
    emit_tag("</body>\n</html>\n");
    return out_;
  }

 private:
  void emit_tag(const std::string& s) {
    out_ += s;
    estimate_ += static_cast<double>(s.size());
  }
  void emit_text(const std::string& s) { out_ += s; }
  void words(int n) {
    emit_text(writer_.prose(n));
    estimate_ += n * lexicon().mean_word_bytes;
  }
  void label(int n) {
    emit_text(writer_.label(n));
    estimate_ += n * lexicon().mean_word_bytes;
  }

  void header() {
    auto& S = layout_.rng();
    std::string c = layout_.container();
    emit_tag(layout_.open(c) + layout_.open("h1"));
    label(between(S, 2, 4));
    emit_tag("</h1>");
    if (chance(S, 0.5)) {
      emit_tag(layout_.open(layout_.para_tag()));
      words(between(S, 5, 12));
      emit_tag(Layout::close(layout_.para_tag()));
    }
    emit_tag(Layout::close(c) + "\n");
  }

  void nav() {
    static const std::vector<std::string> paths{"/about", "/faq", "/contact", "/rules", "/login", "/news", "/help", "/shop"};
    auto& S = layout_.rng();
    const std::string& list = layout_.list_tag();
    emit_tag(layout_.open("nav") + layout_.open(list));
    for (int n = between(S, 2, 6); n > 0; --n) {
      emit_tag(layout_.open("li") + "<a href=\"" + pick(paths, S) + "\">");
      label(1);
      emit_tag("</a></li>");
    }
    emit_tag(Layout::close(list) + "</nav>\n");
  }

  void heading() {
    emit_tag(layout_.open(layout_.heading()));
    label(between(layout_.rng(), 2, 5));
    emit_tag(Layout::close(layout_.heading()) + "\n");
  }

  void paragraph() {
    auto& S = layout_.rng();
    const std::string& p = layout_.para_tag();
    emit_tag(layout_.open(p));
    for (int seg = between(S, 1, 3); seg > 0; --seg) {
      words(between(S, 10, 30));
      if (chance(S, 0.5)) {
        const std::string& t = layout_.inline_tag();
        emit_tag(" " + layout_.open(t));
        words(between(S, 1, 3));
        emit_tag(Layout::close(t) + " ");
      } else {
        emit_text(" ");
      }
    }
    emit_tag(Layout::close(p) + "\n");
  }

  void products() {
    auto& S = layout_.rng();
    auto& C = writer_.rng();
    const int rows = between(S, 3, 5);
    const bool table = chance(S, 0.6);
    auto row = [&](const std::string& cell) {
      double usd = std::round(std::uniform_real_distribution<double>(10.0, 900.0)(C) * 100.0) / 100.0;
      emit_tag(table ? "<tr>" + layout_.open(cell) : layout_.open("div") + layout_.open("span"));
      label(between(S, 2, 3));
      emit_tag(table ? Layout::close(cell) + layout_.open(cell) : "</span>" + layout_.open("span"));
      emit_text(fmt::format("USD {:.2f}", usd));
      emit_tag(table ? Layout::close(cell) + layout_.open(cell) : "</span>" + layout_.open("span"));
      emit_text(fmt::format("{:.6f} BTC", usd / kUsdPerBtc));
      emit_tag(table ? Layout::close(cell) + "</tr>\n" : "</span></div>\n");
      estimate_ += 24;
    };
    emit_tag(table ? layout_.open("table") + "\n" : layout_.open("div") + "\n");
    for (int r = 0; r < rows; ++r) row("td");
    emit_tag(table ? "</table>\n" : "</div>\n");
  }

  void wallets() {
    auto& S = layout_.rng();
    std::string c = layout_.container();
    emit_tag(layout_.open(c) + layout_.open(layout_.para_tag()));
    words(between(S, 4, 9));
    emit_tag(Layout::close(layout_.para_tag()));
    for (int n = between(S, 1, 2); n > 0; --n) {
      emit_tag(layout_.open("code"));
      emit_text(random_wallet(writer_.rng()));
      emit_tag("</code>");
      estimate_ += 34;
    }
    emit_tag(Layout::close(c) + "\n");
  }

  void directory() {
    auto& S = layout_.rng();
    emit_tag(layout_.open("dl") + "\n");
    for (int n = between(S, 3, 8); n > 0; --n) {
      emit_tag(layout_.open("dt"));
      label(between(S, 1, 2));
      emit_tag("</dt>" + layout_.open("dd"));
      words(between(S, 4, 10));
      emit_tag("</dd>\n");
    }
    emit_tag("</dl>\n");
  }

  double link_list_estimate() const {
    return static_cast<double>(bp_.onion_links.size()) * 140.0 + static_cast<double>(bp_.surface_links.size()) * 90.0;
  }

  void link_list() {
    auto& S = layout_.rng();
    const bool describe = chance(S, 0.5);
    const int desc_words = between(S, 2, 5);
    const std::string& list = layout_.list_tag();
    std::string c = layout_.container();
    emit_tag(layout_.open(c) + layout_.open(layout_.heading()));
    label(2);
    emit_tag(Layout::close(layout_.heading()) + layout_.open(list) + "\n");
    auto item = [&](const std::string& href, const std::string& text) {
      emit_tag(layout_.open("li") + "<a href=\"" + href + "\">");
      emit_text(text);
      emit_tag("</a>");
      if (describe) {
        emit_tag(" " + layout_.open("span"));
        words(desc_words);
        emit_tag("</span>");
      }
      emit_tag("</li>\n");
    };
    for (const auto& host : bp_.onion_links) item("http://" + host + "/", host);
    for (const auto& url : bp_.surface_links) item(url, "mirror list");
    emit_tag(Layout::close(list) + Layout::close(c) + "\n");
  }

  void footer() {
    auto& S = layout_.rng();
    std::string tag = chance(S, 0.6) ? "footer" : layout_.container();
    emit_tag(layout_.open(tag) + layout_.open(layout_.para_tag()));
    words(between(S, 4, 10));
    emit_tag(Layout::close(layout_.para_tag()) + Layout::close(tag) + "\n");
  }

  const PageBlueprint& bp_;
  Layout layout_;
  Writer writer_;
  std::string out_;
  double estimate_ = 0.0;
};

// ---- mutation helpers ------------------------------------------------------

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_alnum(char c) { return is_letter(c) || (c >= '0' && c <= '9'); }
bool is_base32(char c) { return (c >= 'a' && c <= 'z') || (c >= '2' && c <= '7'); }

struct Span {
  std::size_t begin, end;
};

// Plain words inside text nodes: letter runs not glued to digits, dots or
// other word characters (so hosts, prices and wallets are never touched).
std::vector<Span> text_words(std::string_view html, std::size_t* text_bytes) {
  std::vector<Span> words;
  std::size_t total = 0;
  for (const auto& tok : tokenize_html(html)) {
    if (tok.kind != HtmlTokenKind::Text) continue;
    total += tok.end - tok.begin;
    std::size_t i = tok.begin;
    while (i < tok.end) {
      if (!is_letter(html[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < tok.end && is_letter(html[j])) ++j;
      bool glued_left = i > tok.begin && (is_alnum(html[i - 1]) || html[i - 1] == '.' || html[i - 1] == '@');
      bool glued_right = j < tok.end && (is_alnum(html[j]) || (html[j] == '.' && j + 1 < tok.end && is_alnum(html[j + 1])) ||
                                         html[j] == '@');
      bool all_caps = std::all_of(html.begin() + static_cast<std::ptrdiff_t>(i), html.begin() + static_cast<std::ptrdiff_t>(j),
                                  [](char c) { return c >= 'A' && c <= 'Z'; });
      if (!glued_left && !glued_right && !(all_caps && j - i == 3)) words.push_back({i, j});
      i = j;
    }
  }
  if (text_bytes) *text_bytes = total;
  return words;
}

std::string apply_replacements(std::string_view html, std::vector<std::pair<Span, std::string>> edits) {
  std::sort(edits.begin(), edits.end(), [](const auto& a, const auto& b) { return a.first.begin < b.first.begin; });
  std::string out;
  out.reserve(html.size() + 64);
  std::size_t pos = 0;
  for (auto& [span, text] : edits) {
    out.append(html.substr(pos, span.begin - pos));
    out += text;
    pos = span.end;
  }
  out.append(html.substr(pos));
  return out;
}

std::string match_case(const std::string& original, std::string replacement) {
  if (!original.empty() && original[0] >= 'A' && original[0] <= 'Z') return capitalize(std::move(replacement));
  return replacement;
}

// Region mutations start at a uniform anchor and run forward, wrapping past
// the last item. A larger budget under the same rng state therefore rewrites
// a superset of the smaller one, with the same replacements on the overlap.
std::size_t pick_start(std::size_t items, SynthRng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, items - 1)(rng);
}

std::string content_change(std::string_view html, double magnitude, SynthRng& rng) {
  std::size_t text_bytes = 0;
  auto words = text_words(html, &text_bytes);
  if (words.empty()) throw Error(ErrorCode::RegionMissing, "page has no text words");
  const double budget = std::max(1.0, magnitude * static_cast<double>(text_bytes));
  std::vector<double> w;
  for (const auto& s : words) w.push_back(static_cast<double>(s.end - s.begin + 1));
  const std::size_t start = pick_start(words.size(), rng);

  const auto& lex = lexicon();
  std::vector<std::pair<Span, std::string>> edits;
  double changed = 0.0;
  for (std::size_t k = 0; k < words.size() && changed < budget; ++k) {
    const std::size_t i = (start + k) % words.size();
    std::string original(html.substr(words[i].begin, words[i].end - words[i].begin));
    std::string lower = original;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string repl;
    do {
      repl = pick(lex.common, rng);
    } while (repl == lower);
    edits.push_back({words[i], match_case(original, repl)});
    changed += w[i];
  }
  return apply_replacements(html, std::move(edits));
}

std::string scheme_change(std::string_view html, double magnitude, SynthRng& rng) {
  static const std::vector<std::string> extra{"data-rev", "data-theme", "data-layout", "data-build", "data-v"};
  std::vector<const HtmlToken*> tags;
  auto tokens = tokenize_html(html);
  std::size_t tag_bytes = 0;
  for (const auto& t : tokens) {
    if (t.kind == HtmlTokenKind::StartTag || t.kind == HtmlTokenKind::EndTag) tag_bytes += t.end - t.begin;
    if (t.kind == HtmlTokenKind::StartTag) tags.push_back(&t);
  }
  if (tags.empty()) throw Error(ErrorCode::RegionMissing, "page has no tags");
  const double budget = std::max(1.0, magnitude * static_cast<double>(tag_bytes));
  const std::size_t start = pick_start(tags.size(), rng);

  std::vector<std::pair<Span, std::string>> edits;
  double added = 0.0;
  for (std::size_t k = 0; k < tags.size() && added < budget; ++k) {
    const HtmlToken& t = *tags[(start + k) % tags.size()];
    std::vector<std::string> free;
    for (const auto& name : extra) {
      if (!t.attribute(name)) free.push_back(name);
    }
    if (free.empty()) continue;
    std::string attr = fmt::format(" {}=\"{}\"", pick(free, rng), between(rng, 1, 99));
    std::size_t at = t.begin + 1 + t.name.size();
    edits.push_back({{at, at}, attr});
    added += static_cast<double>(attr.size());
  }
  return apply_replacements(html, std::move(edits));
}

std::vector<std::string> onion_hosts_in(std::string_view html) {
  std::vector<std::string> hosts;
  std::size_t pos = 0;
  while ((pos = html.find(".onion", pos)) != std::string_view::npos) {
    std::size_t start = pos;
    while (start > 0 && is_base32(html[start - 1])) --start;
    std::size_t len = pos - start;
    bool clean_left = start == 0 || !is_alnum(html[start - 1]);
    if ((len == 16 || len == 56) && clean_left) {
      std::string h(html.substr(start, len + 6));
      if (std::find(hosts.begin(), hosts.end(), h) == hosts.end()) hosts.push_back(h);
    }
    pos += 6;
  }
  return hosts;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
  return s;
}

std::string link_change(std::string_view html, double magnitude, SynthRng& rng) {
  auto hosts = onion_hosts_in(html);
  if (hosts.empty()) throw Error(ErrorCode::RegionMissing, "page links no onion hosts");
  auto k = static_cast<std::size_t>(std::max<long long>(1, std::llround(magnitude * static_cast<double>(hosts.size()))));
  k = std::min(k, hosts.size());
  std::size_t start = std::uniform_int_distribution<std::size_t>(0, hosts.size() - k)(rng);
  std::string out(html);
  for (std::size_t i = start; i < start + k; ++i) {
    OnionVersion v = hosts[i].size() == 16 + 6 ? OnionVersion::V2 : OnionVersion::V3;
    out = replace_all(std::move(out), hosts[i], random_onion_host(rng, v));
  }
  return out;
}

template <class Rewrite>
std::string regex_rewrite(std::string_view html, const std::regex& re, Rewrite&& rewrite, const char* what) {
  std::string in(html), out;
  std::size_t last = 0, count = 0;
  for (auto it = std::sregex_iterator(in.begin(), in.end(), re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(in, last, static_cast<std::size_t>(m.position(0)) - last);
    out += rewrite(m);
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::RegionMissing, std::string("page has no ") + what);
  out.append(in, last);
  return out;
}

std::string translate(std::string_view html, const std::string& lang) {
  const auto& lex = lexicon();
  auto dict = lex.translation.find(lang);
  if (dict == lex.translation.end()) throw Error(ErrorCode::InvalidSpec, "no dictionary for language " + lang);
  std::vector<std::pair<Span, std::string>> edits;
  for (const auto& span : text_words(html, nullptr)) {
    std::string original(html.substr(span.begin, span.end - span.begin));
    std::string lower = original;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto it = dict->second.find(lower);
    if (it == dict->second.end() || it->second == original) continue;
    edits.push_back({span, match_case(original, it->second)});
  }
  if (edits.empty()) throw Error(ErrorCode::RegionMissing, "page has no translatable words");
  return apply_replacements(html, std::move(edits));
}

}  // namespace

std::string to_string(const Mutation& m) {
  switch (m.kind) {
    case MutationKind::SchemeChange: return "SchemeChange";
    case MutationKind::LinkChange: return "LinkChange";
    case MutationKind::ContentChange: return "ContentChange";
    case MutationKind::CurrencyChange: return "CurrencyChange";
    case MutationKind::CryptowalletChange: return "CryptowalletChange";
    case MutationKind::FiatChange: return "FiatChange";
    case MutationKind::Translate: return "Translate(" + m.language + ")";
  }
  return "?";
}

Mutation parse_mutation(std::string_view s) {
  static const std::map<std::string_view, MutationKind> kinds{
      {"SchemeChange", MutationKind::SchemeChange},     {"LinkChange", MutationKind::LinkChange},
      {"ContentChange", MutationKind::ContentChange},   {"CurrencyChange", MutationKind::CurrencyChange},
      {"CryptowalletChange", MutationKind::CryptowalletChange}, {"FiatChange", MutationKind::FiatChange}};
  if (auto it = kinds.find(s); it != kinds.end()) return {it->second, {}};
  if (s.starts_with("Translate(") && s.ends_with(")")) {
    return {MutationKind::Translate, std::string(s.substr(10, s.size() - 11))};
  }
  throw Error(ErrorCode::InvalidSpec, "unknown mutation: " + std::string(s));
}

std::string mutate(std::string_view html, const Mutation& m, double magnitude, SynthRng& rng) {
  if (!(magnitude > 0.0 && magnitude <= 0.5)) {
    throw Error(ErrorCode::InvalidSpec, fmt::format("mutation magnitude {} outside (0, 0.5]", magnitude));
  }
  switch (m.kind) {
    case MutationKind::ContentChange: return content_change(html, magnitude, rng);
    case MutationKind::SchemeChange: return scheme_change(html, magnitude, rng);
    case MutationKind::LinkChange: return link_change(html, magnitude, rng);
    case MutationKind::CurrencyChange: {
      static const std::regex re(R"((\d+\.\d+) (BTC|XMR))");
      return regex_rewrite(html, re, [](const std::smatch& mt) {
        double v = std::stod(mt[1].str());
        return mt[2] == "BTC" ? fmt::format("{:.4f} XMR", v * kXmrPerBtc) : fmt::format("{:.6f} BTC", v / kXmrPerBtc);
      }, "crypto prices");
    }
    case MutationKind::FiatChange: {
      static const std::regex re(R"((USD|EUR) (\d+\.\d{2}))");
      return regex_rewrite(html, re, [](const std::smatch& mt) {
        double v = std::stod(mt[2].str());
        return mt[1] == "USD" ? fmt::format("EUR {:.2f}", v * kEurPerUsd) : fmt::format("USD {:.2f}", v / kEurPerUsd);
      }, "fiat prices");
    }
    case MutationKind::CryptowalletChange: {
      static const std::regex re(R"(\b[13][1-9A-HJ-NP-Za-km-z]{25,34}\b)");
      return regex_rewrite(html, re, [&rng](const std::smatch& mt) {
        std::string w = mt.str();
        for (std::size_t i = 1; i < w.size(); ++i) w[i] = kBase58[std::uniform_int_distribution<std::size_t>(0, 57)(rng)];
        return w;
      }, "wallet addresses");
    }
    case MutationKind::Translate: return translate(html, m.language);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown mutation kind");
}

std::string random_onion_host(SynthRng& rng, OnionVersion version) {
  std::size_t len = version == OnionVersion::V2 ? 16 : 56;
  std::string label(len, 'a');
  for (auto& c : label) c = kBase32[std::uniform_int_distribution<std::size_t>(0, 31)(rng)];
  return label + ".onion";
}

std::string random_wallet(SynthRng& rng) {
  std::string w = "1";
  for (int i = 0; i < 33; ++i) w.push_back(kBase58[std::uniform_int_distribution<std::size_t>(0, 57)(rng)]);
  return w;
}

const std::vector<std::string>& policy_sentences() {
  static const std::vector<std::string> s{
      "Placeholder material is not allowed on this board.",
      "Placeholder material will be removed by the staff.",
      "Placeholder material is not welcome here.",
      "Placeholder material is strictly banned.",
      "Placeholder material is illegal and unacceptable.",
      "Placeholder material is allowed in the private section.",
      "We share placeholder material every day.",
      "Placeholder material is welcome here.",
      "Fresh placeholder material gets uploaded weekly.",
      "Members trade placeholder material freely.",
  };
  return s;
}

std::string render_page(const PageBlueprint& bp) { return PageBuilder(bp).build(); }

const std::vector<std::string>& category_tags() {
  static const std::vector<std::string> tags{"counterfeit", "crypto", "drugs", "forum",  "hacking", "locked",
                                             "down",        "market", "porn",  "social", "hosting"};
  return tags;
}

std::string category_label(std::string_view tag) {
  if (tag == "social") return "Soc.-Network";
  return capitalize(std::string(tag));
}

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::Chain: return "chain";
    case Topology::Tree: return "tree";
    case Topology::Clusters: return "clusters";
  }
  return "?";
}

Topology parse_topology(std::string_view s) {
  if (s == "chain") return Topology::Chain;
  if (s == "tree") return Topology::Tree;
  if (s == "clusters") return Topology::Clusters;
  throw Error(ErrorCode::InvalidSpec, "unknown topology: " + std::string(s));
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
  auto fraction = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) fail(fmt::format("{} must lie in [0,1]", name));
  };
  if (n_uniques < 1) fail("n_uniques must be at least 1");
  if (!(fanout_mean >= 0.0)) fail("fanout mean must be non-negative");
  if (!(min_magnitude > 0.0 && min_magnitude <= max_magnitude && max_magnitude <= 0.5)) {
    fail("magnitudes must satisfy 0 < min <= max <= 0.5");
  }
  double total = 0.0;
  for (const auto& [k, w] : mutation_mix) {
    if (w < 0.0) fail("mutation weights must be non-negative");
    total += w;
  }
  if (total <= 0.0 && exact_fraction < 1.0 && fanout_mean > 0.0) fail("mutation mix is empty");
  if (topology == Topology::Tree && branching < 1) fail("tree branching must be at least 1");
  if (topology == Topology::Clusters && cluster_size < 1) fail("cluster size must be at least 1");
  fraction(exact_fraction, "exact_fraction");
  fraction(extra_seed_fraction, "extra_seed_fraction");
  fraction(manual_seed_fraction, "manual_seed_fraction");
  fraction(dead_seed_fraction, "dead_seed_fraction");
  fraction(surface_link_fraction, "surface_link_fraction");
  fraction(volatility, "volatility");
  fraction(dead_fraction, "dead_fraction");
  fraction(label_noise, "label_noise");
}

std::size_t SynthCorpus::cluster_count() const {
  std::set<std::size_t> ids;
  for (const auto& p : pages) {
    if (!p.surface) ids.insert(p.cluster_id);
  }
  return ids.size();
}

double SynthCorpus::mirror_fraction() const {
  std::size_t onion = 0, mirrors = 0;
  for (const auto& p : pages) {
    if (p.surface) continue;
    ++onion;
    mirrors += p.mutation != "base";
  }
  return onion ? static_cast<double>(mirrors) / static_cast<double>(onion) : 0.0;
}

std::vector<LabeledDoc> labeled_texts(std::size_t per_class, double noise, std::uint64_t seed) {
  const auto& lex = lexicon();
  SynthRng rng(seed);
  std::vector<LabeledDoc> docs;
  for (const auto& tag : category_tags()) {
    const auto& own = lex.by_tag.at(tag);
    for (std::size_t n = 0; n < per_class; ++n) {
      std::string text;
      for (int w = between(rng, 30, 80); w > 0; --w) {
        if (!text.empty()) text.push_back(' ');
        text += chance(rng, noise) ? pick(lex.common, rng) : pick(own, rng);
        if (chance(rng, 0.3)) text += " " + pick(lex.function_words, rng);
      }
      docs.push_back({category_label(tag), text});
    }
  }
  return docs;
}

namespace {

std::vector<std::string> schedule_for(SynthRng& rng, const SynthSpec& spec, bool protected_host) {
  if (protected_host) return {};
  if (chance(rng, spec.dead_fraction)) return std::vector<std::string>(kMaxAttempts, "timeout");
  if (!chance(rng, spec.volatility)) return {};
  std::vector<std::string> s;
  for (int n = between(rng, 1, 3); n > 0; --n) s.push_back(chance(rng, 0.5) ? "timeout" : "503");
  s.push_back("ok");
  return s;
}

std::string title_for(const std::string& tag, SynthRng& rng) {
  const auto& lex = lexicon();
  const auto& own = lex.by_tag.at(tag);
  return capitalize(pick(own, rng)) + " " + capitalize(pick(lex.common, rng)) + " " + capitalize(pick(own, rng));
}

}  // namespace

SynthCorpus generate(const SynthSpec& spec) {
  spec.validate();
  const auto& lex = lexicon();
  SynthRng rng(spec.seed);
  SynthCorpus corpus;
  const std::size_t n = spec.n_uniques;

  struct Base {
    std::string host, tag, title;
    PageKind kind;
    std::vector<std::string> mirrors;
    std::vector<std::string> out;
  };
  std::vector<Base> bases(n);
  for (auto& b : bases) {
    b.host = random_onion_host(rng, chance(rng, 0.25) ? OnionVersion::V2 : OnionVersion::V3);
    b.tag = pick(category_tags(), rng);
    b.title = title_for(b.tag, rng);
    bool shop = b.tag == "market" || b.tag == "drugs" || b.tag == "counterfeit" || b.tag == "crypto";
    b.kind = shop ? PageKind::Market : (chance(rng, 0.2) ? PageKind::Directory : PageKind::Blog);
    std::size_t fanout = spec.geometric_fanout
                             ? static_cast<std::size_t>(std::geometric_distribution<int>(1.0 / (1.0 + spec.fanout_mean))(rng))
                             : static_cast<std::size_t>(std::llround(spec.fanout_mean));
    for (std::size_t m = 0; m < fanout; ++m) b.mirrors.push_back(random_onion_host(rng, OnionVersion::V3));
  }

  // Topology over base sites, plus the roots that must be seeds.
  std::vector<std::size_t> roots;
  switch (spec.topology) {
    case Topology::Chain:
      roots.push_back(0);
      for (std::size_t i = 0; i + 1 < n; ++i) bases[i].out.push_back(bases[i + 1].host);
      break;
    case Topology::Tree:
      roots.push_back(0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = spec.branching * i + 1; c <= spec.branching * i + spec.branching && c < n; ++c) {
          bases[i].out.push_back(bases[c].host);
        }
      }
      break;
    case Topology::Clusters:
      for (std::size_t start = 0; start < n; start += spec.cluster_size) {
        roots.push_back(start);
        std::size_t end = std::min(n, start + spec.cluster_size);
        for (std::size_t i = start; i + 1 < end; ++i) bases[i].out.push_back(bases[i + 1].host);
        if (end - start > 2) bases[end - 1].out.push_back(bases[start].host);
        if (end - start > 3) bases[start].out.push_back(bases[start + (end - start) / 2].host);
      }
      break;
  }
  for (const auto& b : bases) {
    for (const auto& t : b.out) corpus.topology.emplace_back(b.host, t);
  }

  // Seeds: roots plus a sprinkling of other sites, tagged with title keywords.
  std::set<std::size_t> seed_idx(roots.begin(), roots.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (chance(rng, spec.extra_seed_fraction)) seed_idx.insert(i);
  }
  const std::set<std::string> stop(resources::english_stopwords().begin(), resources::english_stopwords().end());
  auto keywords_of = [&](const std::string& title, const std::string& tag) {
    std::set<std::string> terms;
    const auto& own = lex.by_tag.at(tag);
    for (const auto& raw : preprocess(title)) {
      bool topical = std::any_of(own.begin(), own.end(), [&](const std::string& w) { return preprocess(w) == std::vector<std::string>{raw}; });
      if (topical) terms.insert(raw);
    }
    if (terms.empty()) {
      auto toks = preprocess(title);
      if (!toks.empty()) terms.insert(toks.front());
    }
    return terms;
  };
  bool any_manual = false;
  for (std::size_t i : seed_idx) {
    SynthSeed s{bases[i].host, keywords_of(bases[i].title, bases[i].tag)};
    if (chance(rng, spec.manual_seed_fraction) || (!any_manual && i == roots.front())) {
      s.provenance.insert("manual");
      any_manual = true;
    }
    corpus.seeds.push_back(std::move(s));
    corpus.titles.push_back(bases[i].title);
  }
  const std::size_t live_seeds = corpus.seeds.size();
  const auto dead = static_cast<std::size_t>(std::llround(spec.dead_seed_fraction * static_cast<double>(live_seeds)));
  for (std::size_t d = 0; d < dead; ++d) {
    std::string tag = pick(category_tags(), rng);
    std::string title = title_for(tag, rng);
    corpus.seeds.push_back({random_onion_host(rng), keywords_of(title, tag)});
    corpus.titles.push_back(title);
  }

  // Engine fixtures: every keyword seed is indexed by at least one engine.
  static const std::vector<std::string> engines{"ahmia", "torch", "visitor"};
  for (const auto& s : corpus.seeds) {
    for (const auto& term : s.provenance) {
      if (term == "manual") continue;
      std::size_t hit = 0;
      for (const auto& e : engines) {
        if (chance(rng, 0.6)) {
          corpus.engines[e][term].push_back("http://" + s.host + "/");
          ++hit;
        }
      }
      if (!hit) corpus.engines[pick(engines, rng)][term].push_back("http://" + s.host + "/");
    }
  }
  for (auto& [engine, terms] : corpus.engines) {
    for (auto& [term, urls] : terms) {
      if (chance(rng, 0.1)) urls.push_back("https://www.example.com/search?q=" + term);
    }
  }

  // Pages.
  std::set<std::string> protected_hosts;
  for (std::size_t r : roots) protected_hosts.insert(bases[r].host);
  for (std::size_t c = 0; c < n; ++c) {
    const Base& b = bases[c];
    PageBlueprint bp;
    bp.title = b.title;
    bp.category = b.tag;
    bp.kind = b.kind;
    bp.onion_links = b.out;
    bp.onion_links.insert(bp.onion_links.end(), b.mirrors.begin(), b.mirrors.end());
    if (chance(rng, spec.surface_link_fraction)) bp.surface_links.push_back(fmt::format("https://www.example.org/list/{}", c));
    bp.structure_seed = rng();
    bp.content_seed = rng();
    if (b.tag == "porn") {
      SynthRng prng(mix64(spec.seed ^ fnv1a64("policy:" + b.host)));
      if (chance(prng, 0.7)) bp.policy = pick(policy_sentences(), prng);
    }
    SynthPage base{b.host, render_page(bp), c, "base", category_label(b.tag),
                   schedule_for(rng, spec, protected_hosts.contains(b.host)), false};

    std::vector<MutationKind> applicable;
    std::vector<double> weights;
    for (const auto& [kind, w] : spec.mutation_mix) {
      bool shop_only = kind == MutationKind::CurrencyChange || kind == MutationKind::FiatChange ||
                       kind == MutationKind::CryptowalletChange;
      if (shop_only && b.kind != PageKind::Market) continue;
      if (kind == MutationKind::LinkChange && bp.onion_links.empty()) continue;
      applicable.push_back(kind);
      weights.push_back(w);
    }
    corpus.pages.push_back(base);
    for (const auto& mhost : b.mirrors) {
      SynthRng mrng(mix64(spec.seed ^ fnv1a64(mhost)));
      SynthPage page{mhost, base.html, c, "exact", base.category, schedule_for(rng, spec, false), false};
      if (!chance(mrng, spec.exact_fraction) && !applicable.empty()) {
        std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
        Mutation m{applicable[choose(mrng)], {}};
        if (m.kind == MutationKind::Translate) m.language = pick(std::vector<std::string>{"de", "fr", "it"}, mrng);
        double magnitude = std::uniform_real_distribution<double>(spec.min_magnitude, spec.max_magnitude)(mrng);
        page.html = mutate(base.html, m, magnitude, mrng);
        page.mutation = to_string(m);
      }
      corpus.pages.push_back(std::move(page));
    }
  }

  // Surface-web seed pages linking into the onion space.
  for (std::size_t s = 0; s < spec.surface_seeds; ++s) {
    std::string host = fmt::format("links{}.example.net", s);
    PageBlueprint bp;
    bp.title = "Onion Link List";
    bp.category = "forum";
    bp.kind = PageKind::Directory;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 10 == s % 10) bp.onion_links.push_back(bases[i].host);
    }
    bp.structure_seed = rng();
    bp.content_seed = rng();
    corpus.pages.push_back({host, render_page(bp), n + s, "base", "Forum", {}, true});
    corpus.seeds.push_back({host, {"manual"}});
  }

  corpus.training = labeled_texts(spec.labeled_per_class, spec.label_noise, spec.seed + 1);
  return corpus;
}

void write_fixture(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  auto write = [](const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << content;
  };
  std::string labels = "host,cluster_id,mutation_kind\n", categories = "host,category\n";
  for (const auto& p : corpus.pages) {
    write(dir / "corpus" / p.host / "index.html", p.html);
    if (!p.schedule.empty()) {
      std::string s;
      for (const auto& t : p.schedule) s += t + "\n";
      write(dir / "corpus" / (p.host + ".schedule"), s);
    }
    if (p.surface) continue;
    labels += fmt::format("{},{},{}\n", p.host, p.cluster_id, p.mutation);
    categories += fmt::format("{},{}\n", p.host, p.category);
  }
  write(dir / "labels.csv", labels);
  write(dir / "lexicon.txt", std::string(resources::default_lexicon_text()) + "\n[keywords]\n" + std::string(kPolicyKeyword) + "\n");
  write(dir / "categories.csv", categories);

  std::string seeds = "# host\tprovenance\n", manual;
  for (const auto& s : corpus.seeds) {
    if (s.provenance.contains("manual")) manual += s.host + "\n";
    std::string tags;
    for (const auto& t : s.provenance) tags += (tags.empty() ? "" : ",") + t;
    seeds += s.host + "\t" + tags + "\n";
  }
  write(dir / "seeds.tsv", seeds);
  write(dir / "manual.txt", manual);

  std::string titles;
  for (const auto& t : corpus.titles) titles += t + "\n";
  write(dir / "titles.txt", titles);

  for (const auto& [engine, terms] : corpus.engines) {
    for (const auto& [term, urls] : terms) {
      std::string body;
      for (const auto& u : urls) body += u + "\n";
      write(dir / "engines" / engine / term, body);
    }
  }
  fs::create_directories(dir);
  save_labeled_jsonl(corpus.training, dir / "train.jsonl");
}

}  // namespace mimir
