#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dagkit/api_index.hpp"

namespace dagkit {

enum class AugmentationDesign { NameOnly, Description, Specification, DescriptionPlusSpecification, FullDocumentation };

// CLI spellings: name-only, description, specification, desc-spec, full-doc.
std::string_view to_string(AugmentationDesign design);
AugmentationDesign parse_augmentation_design(std::string_view text);

inline constexpr std::size_t kFullDocCharLimit = 5000;
inline constexpr std::string_view kReferenceHeader = "API references:";

using TokenCounter = std::function<std::size_t(std::string_view)>;

// Counts alphanumeric runs; punctuation, whitespace and underscores separate.
std::size_t count_tokens(std::string_view text);
std::size_t count_tokens(std::string_view text, const TokenCounter& counter);

// Sentences end at '.', '!' or '?' followed by whitespace (or end of text).
// Returns at most `max_sentences` of them joined by single spaces, with inner
// whitespace runs collapsed.
std::string first_sentences(std::string_view text, std::size_t max_sentences);

// Keeps at most `max_chars` Unicode code points of UTF-8 text.
std::string truncate_utf8(std::string_view text, std::size_t max_chars);
std::size_t utf8_length(std::string_view text);

std::string render_design(const ApiSpec& spec, AugmentationDesign design);

struct AugmentedPrompt {
  std::string text;
  std::size_t augmentation_token_count = 0;
  AugmentationDesign design = AugmentationDesign::DescriptionPlusSpecification;
  std::vector<std::string> doc_names;
};

// Wraps `blocks` in one docstring headed by kReferenceHeader, then a blank
// line, then the task prompt verbatim. No blocks: the prompt is returned
// unchanged.
AugmentedPrompt build_prompt(std::string_view task_prompt, std::span<const std::string> blocks,
                             const TokenCounter& counter = {});

// Renders `docs` with `design` and builds the prompt, filling design and names.
AugmentedPrompt augment(std::string_view task_prompt, std::span<const ApiSpec* const> docs,
                        AugmentationDesign design, const TokenCounter& counter = {});

}  // namespace dagkit
