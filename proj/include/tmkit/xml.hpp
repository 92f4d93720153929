#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "tmkit/errors.hpp"

namespace tmkit::xml {

// Minimal non-validating XML reader: elements, attributes, text, comments,
// CDATA, processing instructions, the five named entities and numeric
// references. Enough for model interchange files; no DTD support.

struct Element {
  std::string name;    // local name, prefix stripped
  std::string prefix;  // namespace prefix as written
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;  // concatenated character data
  int line = 1;
  int col = 1;

  const std::string* attribute(const std::string& key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  std::string attribute_or(const std::string& key, const std::string& fallback) const {
    const std::string* v = attribute(key);
    return v ? *v : fallback;
  }
};

class Reader {
 public:
  explicit Reader(const std::string& input) : src_(input) {}

  Element parse() {
    skip_prolog();
    Element root = parse_element(0);
    skip_misc();
    if (pos_ < src_.size()) fail("trailing content after document element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw Error(Errc::XmlError,
                message + " at " + std::to_string(line_) + ":" + std::to_string(col_));
  }

  char cur() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  bool starts_with(const char* s) const { return src_.compare(pos_, std::char_traits<char>::length(s), s) == 0; }

  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && pos_ < src_.size(); ++k) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  void skip_comment_or_pi() {
    if (starts_with("<!--")) {
      advance(4);
      while (pos_ < src_.size() && !starts_with("-->")) advance();
      if (pos_ >= src_.size()) fail("unterminated comment");
      advance(3);
      return;
    }
    if (starts_with("<?")) {
      advance(2);
      while (pos_ < src_.size() && !starts_with("?>")) advance();
      if (pos_ >= src_.size()) fail("unterminated processing instruction");
      advance(2);
      return;
    }
    if (starts_with("<!DOCTYPE")) {
      while (pos_ < src_.size() && cur() != '>') advance();
      if (pos_ >= src_.size()) fail("unterminated doctype");
      advance();
      return;
    }
    fail("unexpected markup");
  }

  void skip_prolog() {
    while (true) {
      skip_ws();
      if (pos_ >= src_.size()) fail("no document element");
      if (cur() != '<') fail("expected markup");
      if (starts_with("<?") || starts_with("<!--") || starts_with("<!DOCTYPE")) {
        skip_comment_or_pi();
        continue;
      }
      return;
    }
  }

  void skip_misc() {
    while (true) {
      skip_ws();
      if (pos_ >= src_.size()) return;
      if (starts_with("<?") || starts_with("<!--")) {
        skip_comment_or_pi();
        continue;
      }
      return;
    }
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':';
  }

  std::string read_name() {
    if (!name_char(cur()) || std::isdigit(static_cast<unsigned char>(cur()))) fail("expected a name");
    std::size_t start = pos_;
    while (pos_ < src_.size() && name_char(src_[pos_])) advance();
    return src_.substr(start, pos_ - start);
  }

  std::string decode_entities(const std::string& raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size();) {
      if (raw[i] != '&') {
        out.push_back(raw[i++]);
        continue;
      }
      std::size_t semi = raw.find(';', i);
      if (semi == std::string::npos) fail("unterminated entity reference");
      std::string entity = raw.substr(i + 1, semi - i - 1);
      if (entity == "amp") out.push_back('&');
      else if (entity == "lt") out.push_back('<');
      else if (entity == "gt") out.push_back('>');
      else if (entity == "quot") out.push_back('"');
      else if (entity == "apos") out.push_back('\'');
      else if (!entity.empty() && entity[0] == '#') {
        int base = 10;
        std::string digits = entity.substr(1);
        if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
          base = 16;
          digits = digits.substr(1);
        }
        char* end = nullptr;
        long code = std::strtol(digits.c_str(), &end, base);
        if (end == digits.c_str() || code <= 0 || code > 0x10FFFF) fail("bad character reference");
        append_utf8(out, static_cast<unsigned long>(code));
      } else {
        fail("unknown entity '&" + entity + ";'");
      }
      i = semi + 1;
    }
    return out;
  }

  static void append_utf8(std::string& out, unsigned long code) {
    if (code < 0x80) {
      out.push_back(static_cast<char>(code));
    } else if (code < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (code >> 6)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else if (code < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (code >> 12)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (code >> 18)));
      out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    }
  }

  Element parse_element(int depth) {
    if (depth > 256) fail("element nesting too deep");
    if (cur() != '<') fail("expected '<'");
    Element element;
    element.line = line_;
    element.col = col_;
    advance();
    std::string qname = read_name();
    auto colon = qname.find(':');
    if (colon != std::string::npos) {
      element.prefix = qname.substr(0, colon);
      element.name = qname.substr(colon + 1);
    } else {
      element.name = qname;
    }

    while (true) {
      skip_ws();
      if (cur() == '/') {
        advance();
        if (cur() != '>') fail("expected '>'");
        advance();
        return element;
      }
      if (cur() == '>') {
        advance();
        break;
      }
      std::string key = read_name();
      skip_ws();
      if (cur() != '=') fail("expected '='");
      advance();
      skip_ws();
      char quote = cur();
      if (quote != '"' && quote != '\'') fail("expected a quoted attribute value");
      advance();
      std::size_t start = pos_;
      while (pos_ < src_.size() && src_[pos_] != quote) advance();
      if (pos_ >= src_.size()) fail("unterminated attribute value");
      element.attributes.emplace_back(key, decode_entities(src_.substr(start, pos_ - start)));
      advance();
    }

    // content
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated element <" + qname + ">");
      if (cur() == '<') {
        if (starts_with("</")) {
          advance(2);
          std::string closing = read_name();
          if (closing != qname) fail("mismatched closing tag </" + closing + ">");
          skip_ws();
          if (cur() != '>') fail("expected '>'");
          advance();
          return element;
        }
        if (starts_with("<!--") || starts_with("<?")) {
          skip_comment_or_pi();
          continue;
        }
        if (starts_with("<![CDATA[")) {
          advance(9);
          std::size_t start = pos_;
          while (pos_ < src_.size() && !starts_with("]]>")) advance();
          if (pos_ >= src_.size()) fail("unterminated CDATA section");
          element.text += src_.substr(start, pos_ - start);
          advance(3);
          continue;
        }
        element.children.push_back(parse_element(depth + 1));
        continue;
      }
      std::size_t start = pos_;
      while (pos_ < src_.size() && cur() != '<') advance();
      element.text += decode_entities(src_.substr(start, pos_ - start));
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline Element parse(const std::string& input) { return Reader(input).parse(); }

}  // namespace tmkit::xml
