#include "mimir/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <utility>

namespace mimir {

const HtmlAttribute* HtmlToken::attribute(std::string_view attr_name) const {
  for (const auto& a : attributes) {
    if (a.name == attr_name) return &a;
  }
  return nullptr;
}

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower(s[pos + i]) != prefix[i]) return false;
  }
  return true;
}

std::size_t find_ci(std::string_view s, std::size_t from, std::string_view needle) {
  for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
    if (starts_with_ci(s, i, needle)) return i;
  }
  return std::string_view::npos;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == ':' || c == '_' || c == '.';
}

// Parses a tag starting at html[pos] == '<'. Returns the position one past '>'
// (or end of input for an unterminated tag).
std::size_t parse_tag(std::string_view html, std::size_t pos, HtmlToken& tok) {
  std::size_t i = pos + 1;
  if (html[i] == '/') {
    tok.kind = HtmlTokenKind::EndTag;
    ++i;
  } else {
    tok.kind = HtmlTokenKind::StartTag;
  }
  std::size_t name_begin = i;
  while (i < html.size() && is_name_char(html[i])) ++i;
  tok.name = lowercase(html.substr(name_begin, i - name_begin));

  while (i < html.size()) {
    while (i < html.size() && is_space(html[i])) ++i;
    if (i >= html.size()) break;
    char c = html[i];
    if (c == '>') return i + 1;
    if (c == '/') {
      if (i + 1 < html.size() && html[i + 1] == '>') {
        tok.self_closing = true;
        return i + 2;
      }
      ++i;
      continue;
    }
    std::size_t attr_begin = i;
    while (i < html.size() && !is_space(html[i]) && html[i] != '=' && html[i] != '>' &&
           !(html[i] == '/' && i + 1 < html.size() && html[i + 1] == '>')) {
      ++i;
    }
    HtmlAttribute attr;
    attr.name = lowercase(html.substr(attr_begin, i - attr_begin));
    std::size_t j = i;
    while (j < html.size() && is_space(html[j])) ++j;
    if (j < html.size() && html[j] == '=') {
      ++j;
      while (j < html.size() && is_space(html[j])) ++j;
      attr.has_value = true;
      if (j < html.size() && (html[j] == '"' || html[j] == '\'')) {
        char quote = html[j];
        std::size_t close = html.find(quote, j + 1);
        if (close == std::string_view::npos) close = html.size();
        attr.value_begin = j + 1;
        attr.value_end = close;
        i = std::min(close + 1, html.size());
      } else {
        std::size_t v = j;
        while (v < html.size() && !is_space(html[v]) && html[v] != '>') ++v;
        attr.value_begin = j;
        attr.value_end = v;
        i = v;
      }
      attr.value = std::string(html.substr(attr.value_begin, attr.value_end - attr.value_begin));
    }
    if (!attr.name.empty() && tok.kind == HtmlTokenKind::StartTag) tok.attributes.push_back(std::move(attr));
  }
  return html.size();
}

}  // namespace

std::vector<HtmlToken> tokenize_html(std::string_view html) {
  std::vector<HtmlToken> tokens;
  std::size_t pos = 0;
  std::size_t text_begin = 0;

  auto flush_text = [&](std::size_t until) {
    if (until > text_begin) {
      HtmlToken t;
      t.kind = HtmlTokenKind::Text;
      t.begin = text_begin;
      t.end = until;
      tokens.push_back(std::move(t));
    }
  };

  while (pos < html.size()) {
    if (html[pos] != '<' || pos + 1 >= html.size()) {
      ++pos;
      continue;
    }
    char next = html[pos + 1];
    HtmlToken tok;
    tok.begin = pos;
    if (html.substr(pos, 4) == "<!--") {
      flush_text(pos);
      auto close = html.find("-->", pos + 4);
      tok.kind = HtmlTokenKind::Comment;
      tok.end = close == std::string_view::npos ? html.size() : close + 3;
    } else if (next == '!' || next == '?') {
      flush_text(pos);
      auto close = html.find('>', pos + 2);
      tok.kind = HtmlTokenKind::Doctype;
      tok.end = close == std::string_view::npos ? html.size() : close + 1;
    } else if (is_alpha(next) || (next == '/' && pos + 2 < html.size() && is_alpha(html[pos + 2]))) {
      flush_text(pos);
      tok.end = parse_tag(html, pos, tok);
    } else {
      ++pos;
      continue;
    }
    pos = tok.end;
    text_begin = pos;
    bool raw = tok.kind == HtmlTokenKind::StartTag && !tok.self_closing &&
               (tok.name == "script" || tok.name == "style");
    std::string closing = raw ? "</" + tok.name : std::string();
    tokens.push_back(std::move(tok));

    if (raw) {
      auto close = find_ci(html, pos, closing);
      std::size_t raw_end = close == std::string_view::npos ? html.size() : close;
      if (raw_end > pos) {
        HtmlToken r;
        r.kind = HtmlTokenKind::RawText;
        r.begin = pos;
        r.end = raw_end;
        tokens.push_back(std::move(r));
      }
      pos = raw_end;
      text_begin = pos;
    }
  }
  flush_text(html.size());
  return tokens;
}

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
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

constexpr std::array<std::pair<std::string_view, std::uint32_t>, 24> kNamedEntities{{
    {"amp", '&'},     {"lt", '<'},       {"gt", '>'},       {"quot", '"'},     {"apos", '\''},
    {"nbsp", ' '},    {"copy", 0xA9},    {"reg", 0xAE},     {"trade", 0x2122}, {"euro", 0x20AC},
    {"pound", 0xA3},  {"yen", 0xA5},     {"cent", 0xA2},    {"hellip", 0x2026}, {"mdash", 0x2014},
    {"ndash", 0x2013}, {"laquo", 0xAB},  {"raquo", 0xBB},   {"middot", 0xB7},  {"bull", 0x2022},
    {"rsquo", 0x2019}, {"lsquo", 0x2018}, {"rdquo", 0x201D}, {"ldquo", 0x201C},
}};

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(text[i++]);
      continue;
    }
    std::string_view ent = text.substr(i + 1, semi - i - 1);
    bool done = false;
    if (!ent.empty() && ent[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      std::string_view digits = ent.substr(hex ? 2 : 1);
      bool ok = !digits.empty();
      for (char c : digits) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else { ok = false; break; }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) { ok = false; break; }
      }
      if (ok) {
        append_utf8(out, cp == 0xA0 ? ' ' : cp);
        done = true;
      }
    } else {
      for (const auto& [name, cp] : kNamedEntities) {
        if (name == ent) {
          append_utf8(out, cp);
          done = true;
          break;
        }
      }
    }
    if (done) {
      i = semi + 1;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

bool is_inline_tag(std::string_view name) {
  static constexpr std::array<std::string_view, 25> kInline{
      "a", "abbr", "b", "bdi", "bdo", "cite", "code", "data", "dfn", "em", "font", "i", "kbd",
      "mark", "q", "s", "samp", "small", "span", "strong", "sub", "sup", "time", "u", "var"};
  return std::find(kInline.begin(), kInline.end(), name) != kInline.end();
}

}  // namespace mimir
