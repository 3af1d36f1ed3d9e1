#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace dagkit {

// Best-effort lexical view of Python source. Strings (including triple-quoted
// and prefixed literals) and comments are recognized so that text inside them
// never produces Name or Op tokens. Unterminated strings run to end of input.
enum class PyTokenKind { Name, Number, String, Op };

struct PyToken {
  PyTokenKind kind;
  std::size_t begin;
  std::size_t end;

  std::string_view text(std::string_view source) const { return source.substr(begin, end - begin); }
};

std::vector<PyToken> lex_python(std::string_view source);

}  // namespace dagkit
