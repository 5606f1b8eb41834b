#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace test_support {

// Minimal XML well-formedness check: one root, balanced tags, quoted
// attributes, no duplicate attributes, only the five predefined entities.
inline bool well_formed(std::string_view s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  auto name_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':'; };
  auto check_entities = [](std::string_view t) {
    for (std::size_t p = t.find('&'); p != std::string_view::npos; p = t.find('&', p + 1)) {
      bool ok = false;
      for (std::string_view e : {"&amp;", "&lt;", "&gt;", "&quot;", "&apos;"}) ok |= t.substr(p, e.size()) == e;
      if (!ok) return false;
    }
    return true;
  };
  if (s.substr(0, 5) == "<?xml") {
    i = s.find("?>");
    if (i == std::string_view::npos) return false;
    i += 2;
  }
  while (i < s.size()) {
    const std::size_t lt = s.find('<', i);
    const auto text = s.substr(i, (lt == std::string_view::npos ? s.size() : lt) - i);
    if (text.find('>') != std::string_view::npos || !check_entities(text)) return false;
    if (stack.empty()) {
      for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    if (lt == std::string_view::npos) break;
    i = lt + 1;
    const bool closing = i < s.size() && s[i] == '/';
    if (closing) ++i;
    const std::size_t name_start = i;
    while (i < s.size() && name_char(s[i])) ++i;
    const std::string name(s.substr(name_start, i - name_start));
    if (name.empty()) return false;
    if (closing) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size() || s[i] != '>' || stack.empty() || stack.back() != name) return false;
      stack.pop_back();
      ++i;
      continue;
    }
    std::vector<std::string> attrs;
    bool self_closing = false;
    while (true) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size()) return false;
      if (s[i] == '>') {
        ++i;
        break;
      }
      if (s.substr(i, 2) == "/>") {
        i += 2;
        self_closing = true;
        break;
      }
      const std::size_t a = i;
      while (i < s.size() && name_char(s[i])) ++i;
      if (i == a) return false;
      const std::string attr(s.substr(a, i - a));
      for (const auto& seen : attrs)
        if (seen == attr) return false;
      attrs.push_back(attr);
      if (i + 1 >= s.size() || s[i] != '=' || s[i + 1] != '"') return false;
      const std::size_t close = s.find('"', i + 2);
      if (close == std::string_view::npos) return false;
      const auto value = s.substr(i + 2, close - i - 2);
      if (value.find('<') != std::string_view::npos || !check_entities(value)) return false;
      i = close + 1;
    }
    if (stack.empty()) {
      if (root_seen) return false;
      root_seen = true;
    }
    if (!self_closing) stack.push_back(name);
  }
  return root_seen && stack.empty();
}

}  // namespace test_support
