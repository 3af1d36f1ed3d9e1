#include "dagkit/python_lexer.hpp"

#include <array>

namespace dagkit {

namespace {

bool name_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

bool name_char(unsigned char c) { return name_start(c) || (c >= '0' && c <= '9'); }

bool is_quote(char c) { return c == '\'' || c == '"'; }

// Returns the index one past the closing quote(s), or source.size().
std::size_t skip_string(std::string_view source, std::size_t quote_pos) {
  const char q = source[quote_pos];
  const bool triple = quote_pos + 2 < source.size() && source[quote_pos + 1] == q && source[quote_pos + 2] == q;
  std::size_t i = quote_pos + (triple ? 3 : 1);
  while (i < source.size()) {
    const char c = source[i];
    if (c == '\\') {
      i += 2;
      continue;
    }
    if (c == q) {
      if (!triple) return i + 1;
      if (i + 2 < source.size() && source[i + 1] == q && source[i + 2] == q) return i + 3;
    } else if (c == '\n' && !triple) {
      // Unterminated single-line literal: stop at the line end.
      return i;
    }
    ++i;
  }
  return source.size();
}

bool is_string_prefix(std::string_view word) {
  if (word.size() > 2) return false;
  for (char c : word) {
    switch (c) {
      case 'r': case 'R': case 'b': case 'B': case 'u': case 'U': case 'f': case 'F':
        break;
      default:
        return false;
    }
  }
  return true;
}

constexpr std::array<std::string_view, 9> kTwoCharOps = {"**", "==", "!=", "<=", ">=", ":=", "->", "//", "<<"};

}  // namespace

std::vector<PyToken> lex_python(std::string_view source) {
  std::vector<PyToken> tokens;
  std::size_t i = 0;
  const std::size_t n = source.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(source[i]);
    if (c == '#') {
      while (i < n && source[i] != '\n') ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\\') {
      ++i;
      continue;
    }
    if (is_quote(static_cast<char>(c))) {
      const std::size_t end = skip_string(source, i);
      tokens.push_back({PyTokenKind::String, i, end});
      i = end;
      continue;
    }
    if (name_start(c)) {
      std::size_t j = i + 1;
      while (j < n && name_char(static_cast<unsigned char>(source[j]))) ++j;
      if (j < n && is_quote(source[j]) && is_string_prefix(source.substr(i, j - i))) {
        const std::size_t end = skip_string(source, j);
        tokens.push_back({PyTokenKind::String, i, end});
        i = end;
        continue;
      }
      tokens.push_back({PyTokenKind::Name, i, j});
      i = j;
      continue;
    }
    if (c >= '0' && c <= '9') {
      std::size_t j = i + 1;
      while (j < n && (name_char(static_cast<unsigned char>(source[j])) || source[j] == '.')) ++j;
      tokens.push_back({PyTokenKind::Number, i, j});
      i = j;
      continue;
    }
    std::size_t len = 1;
    if (i + 1 < n) {
      const std::string_view two = source.substr(i, 2);
      for (auto op : kTwoCharOps) {
        if (two == op) {
          len = 2;
          break;
        }
      }
    }
    tokens.push_back({PyTokenKind::Op, i, i + len});
    i += len;
  }
  return tokens;
}

}  // namespace dagkit
