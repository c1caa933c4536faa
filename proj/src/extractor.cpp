#include "mimir/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <utility>

#include "mimir/html.hpp"

namespace mimir {

namespace {

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string scheme_token(const HtmlToken& tok) {
  std::string s;
  if (tok.kind == HtmlTokenKind::EndTag) {
    s = "</" + tok.name + ">";
  } else {
    s = "<" + tok.name;
    for (const auto& a : tok.attributes) {
      s.push_back(' ');
      s += a.name;
    }
    s.push_back('>');
  }
  return s;
}

bool is_tag(const HtmlToken& t) { return t.kind == HtmlTokenKind::StartTag || t.kind == HtmlTokenKind::EndTag; }

std::vector<LayoutItem> layout_from_tokens(std::string_view html, const std::vector<HtmlToken>& tokens) {
  std::vector<LayoutItem> items;
  items.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (is_tag(t)) {
      items.push_back({true, scheme_token(t)});
    } else if (t.kind == HtmlTokenKind::Text) {
      items.push_back({false, decode_entities(t.slice(html))});
    }
  }
  return items;
}

std::string text_from_layout(const std::vector<LayoutItem>& items) {
  std::string joined;
  for (const auto& item : items) {
    if (!item.is_tag) {
      joined += item.value;
      continue;
    }
    // "<name ...>" or "</name>"
    std::string_view v = item.value;
    v.remove_prefix(v.size() > 1 && v[1] == '/' ? 2 : 1);
    auto end = v.find_first_of(" >");
    if (!is_inline_tag(v.substr(0, end))) joined.push_back(' ');
  }
  return collapse_whitespace(joined);
}

std::string scheme_from_layout(const std::vector<LayoutItem>& items) {
  std::string s;
  for (const auto& item : items) {
    if (item.is_tag) s += item.value;
  }
  return s;
}

std::string title_from_tokens(std::string_view html, const std::vector<HtmlToken>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind != HtmlTokenKind::StartTag || tokens[i].name != "title") continue;
    std::string text;
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      if (tokens[j].kind == HtmlTokenKind::EndTag && tokens[j].name == "title") break;
      if (tokens[j].kind == HtmlTokenKind::Text) text += decode_entities(tokens[j].slice(html));
    }
    return collapse_whitespace(text);
  }
  return {};
}

std::map<std::string, std::string> metadata_from_tokens(std::string_view html, const std::vector<HtmlToken>& tokens) {
  std::map<std::string, std::string> meta;
  for (const auto& t : tokens) {
    if (t.kind != HtmlTokenKind::StartTag || t.name != "meta") continue;
    const HtmlAttribute* key = t.attribute("name");
    if (!key) key = t.attribute("property");
    if (!key) key = t.attribute("http-equiv");
    const HtmlAttribute* content = t.attribute("content");
    if (!key || !content || key->value.empty()) continue;
    std::string k = decode_entities(key->value);
    std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    meta.emplace(std::move(k), collapse_whitespace(decode_entities(content->value)));
  }
  if (auto title = title_from_tokens(html, tokens); !title.empty()) meta["title"] = std::move(title);
  return meta;
}

bool is_base32(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '2' && c <= '7');
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct LinkEvent {
  std::size_t pos;
  Link link;
};

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

// Path part of an absolute or scheme-less URL ("" when there is none).
std::string_view path_of(std::string_view url) {
  if (auto scheme = url.find("://"); scheme != std::string_view::npos) url.remove_prefix(scheme + 3);
  else if (url.substr(0, 2) == "//") url.remove_prefix(2);
  auto slash = url.find_first_of("/?#");
  return slash == std::string_view::npos ? std::string_view{} : url.substr(slash);
}

std::optional<Link> classify_href(std::string_view raw, const OnionAddress& self) {
  std::string value = decode_entities(trim(raw));
  std::string_view v = value;
  if (v.empty() || v.front() == '#') return std::nullopt;
  std::string lower = lowercase(v.substr(0, std::min<std::size_t>(v.size(), 16)));
  for (std::string_view skip : {"javascript:", "mailto:", "data:", "tel:"}) {
    if (lower.rfind(skip, 0) == 0) return std::nullopt;
  }

  bool absolute = v.find("://") != std::string_view::npos || v.substr(0, 2) == "//";
  std::string_view authority = v;
  if (auto s = authority.find("://"); s != std::string_view::npos) authority.remove_prefix(s + 3);
  else if (authority.substr(0, 2) == "//") authority.remove_prefix(2);
  authority = authority.substr(0, authority.find_first_of("/?#"));
  bool onion_like = lowercase(authority).find(".onion") != std::string::npos;

  if (!absolute && !onion_like) {
    std::string_view path = v;
    while (!path.empty() && path.front() == '/') path.remove_prefix(1);
    return Link{self.host + "/" + std::string(path), LinkClass::Own};
  }
  NormalizedUrl n = normalize_url(absolute ? v : std::string_view(value));
  if (auto* onion = std::get_if<OnionAddress>(&n)) {
    if (onion->host == self.host) return Link{onion->host + std::string(path_of(v)), LinkClass::Own};
    return Link{onion->host, LinkClass::ExternalOnion};
  }
  if (std::get<SurfaceHost>(n).host.empty()) return std::nullopt;
  return Link{value, LinkClass::Surface};
}

}  // namespace

std::string extract_text(std::string_view html) {
  auto tokens = tokenize_html(html);
  return text_from_layout(layout_from_tokens(html, tokens));
}

std::string extract_scheme(std::string_view html) {
  std::string s;
  for (const auto& t : tokenize_html(html)) {
    if (is_tag(t)) s += scheme_token(t);
  }
  return s;
}

std::vector<LayoutItem> extract_layout(std::string_view html) {
  return layout_from_tokens(html, tokenize_html(html));
}

std::string extract_title(std::string_view html) { return title_from_tokens(html, tokenize_html(html)); }

std::map<std::string, std::string> extract_metadata(std::string_view html) {
  return metadata_from_tokens(html, tokenize_html(html));
}

namespace {

std::vector<Link> links_from_tokens(std::string_view html, const std::vector<HtmlToken>& tokens,
                                    const OnionAddress& self) {
  std::vector<LinkEvent> events;
  std::vector<std::pair<std::size_t, std::size_t>> href_spans;
  for (const auto& t : tokens) {
    if (t.kind != HtmlTokenKind::StartTag) continue;
    const HtmlAttribute* href = t.attribute("href");
    if (!href || !href->has_value) continue;
    href_spans.emplace_back(href->value_begin, href->value_end);
    if (auto link = classify_href(href->value, self)) events.push_back({href->value_begin, std::move(*link)});
  }

  auto inside_href = [&](std::size_t pos) {
    return std::any_of(href_spans.begin(), href_spans.end(),
                       [pos](const auto& span) { return pos >= span.first && pos < span.second; });
  };

  // Bare onion addresses anywhere in the document.
  constexpr std::string_view kSuffix = ".onion";
  std::size_t from = 0;
  while (from + kSuffix.size() <= html.size()) {
    std::size_t p = from;
    bool found = false;
    for (; p + kSuffix.size() <= html.size(); ++p) {
      bool match = true;
      for (std::size_t k = 0; k < kSuffix.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(html[p + k])) != kSuffix[k]) {
          match = false;
          break;
        }
      }
      if (match) {
        found = true;
        break;
      }
    }
    if (!found) break;
    from = p + kSuffix.size();
    if (from < html.size() && is_alnum(html[from])) continue;
    std::size_t start = p;
    while (start > 0 && is_base32(html[start - 1])) --start;
    std::size_t len = p - start;
    if (len != 16 && len != 56) continue;
    if (start > 0 && is_alnum(html[start - 1])) continue;
    if (inside_href(start)) continue;
    std::string host = lowercase(html.substr(start, len)) + std::string(kSuffix);
    LinkClass kind = host == self.host ? LinkClass::Own : LinkClass::ExternalOnion;
    events.push_back({start, Link{std::move(host), kind}});
  }

  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.pos < b.pos; });
  std::vector<Link> links;
  std::set<std::pair<int, std::string>> seen;
  for (auto& e : events) {
    if (seen.emplace(static_cast<int>(e.link.kind), e.link.url).second) links.push_back(std::move(e.link));
  }
  return links;
}

}  // namespace

std::vector<Link> extract_links(std::string_view html, const OnionAddress& self) {
  return links_from_tokens(html, tokenize_html(html), self);
}

ExtractedPage extract_page(std::string_view html, const OnionAddress& self, const LanguageDetector& detector) {
  auto tokens = tokenize_html(html);
  auto layout = layout_from_tokens(html, tokens);
  ExtractedPage page;
  page.text = text_from_layout(layout);
  page.scheme = scheme_from_layout(layout);
  page.links = links_from_tokens(html, tokens, self);
  page.title = title_from_tokens(html, tokens);
  page.metadata = metadata_from_tokens(html, tokens);
  page.languages = detector.detect(page.text);
  return page;
}

}  // namespace mimir
