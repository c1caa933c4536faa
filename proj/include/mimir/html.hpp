#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mimir {

enum class HtmlTokenKind { Text, StartTag, EndTag, Comment, Doctype, RawText };

struct HtmlAttribute {
  std::string name;   // lowercase
  std::string value;  // raw, entities not decoded
  bool has_value = false;
  std::size_t value_begin = 0;  // byte offsets of the value in the source
  std::size_t value_end = 0;
};

// One lexical unit of a document. [begin, end) indexes the source, so
// concatenating every token's slice reproduces the input byte for byte.
struct HtmlToken {
  HtmlTokenKind kind = HtmlTokenKind::Text;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string name;  // tag name, lowercase; empty for text
  std::vector<HtmlAttribute> attributes;
  bool self_closing = false;

  std::string_view slice(std::string_view source) const { return source.substr(begin, end - begin); }
  const HtmlAttribute* attribute(std::string_view attr_name) const;
};

// Tolerant, non-validating tokenizer. Never throws; malformed markup degrades
// to text or to tags that run to end of input. Contents of <script> and
// <style> come back as a single RawText token.
std::vector<HtmlToken> tokenize_html(std::string_view html);

// Decodes named (common subset) and numeric character references. &nbsp;
// decodes to a plain space.
std::string decode_entities(std::string_view text);

// Tags that do not break words when stripped ("<b>he</b>llo" -> "hello").
bool is_inline_tag(std::string_view name);

}  // namespace mimir
