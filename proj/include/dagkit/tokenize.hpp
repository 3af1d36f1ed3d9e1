#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dagkit {

// Lowercased alphanumeric runs. Underscores and every other non-alphanumeric
// byte act as separators; bytes >= 0x80 are kept as word characters so UTF-8
// text is never split mid-sequence.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace dagkit
