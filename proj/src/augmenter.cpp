#include "dagkit/augmenter.hpp"

#include <cctype>

#include "dagkit/errors.hpp"

namespace dagkit {

std::string_view to_string(AugmentationDesign design) {
  switch (design) {
    case AugmentationDesign::NameOnly:
      return "name-only";
    case AugmentationDesign::Description:
      return "description";
    case AugmentationDesign::Specification:
      return "specification";
    case AugmentationDesign::DescriptionPlusSpecification:
      return "desc-spec";
    case AugmentationDesign::FullDocumentation:
      return "full-doc";
  }
  return "?";
}

AugmentationDesign parse_augmentation_design(std::string_view text) {
  for (auto d : {AugmentationDesign::NameOnly, AugmentationDesign::Description, AugmentationDesign::Specification,
                 AugmentationDesign::DescriptionPlusSpecification, AugmentationDesign::FullDocumentation}) {
    if (text == to_string(d)) return d;
  }
  throw ConfigError("unknown augmentation design '" + std::string(text) +
                    "' (expected name-only|description|specification|desc-spec|full-doc)");
}

std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool word = std::isalnum(c) || c >= 0x80;
    if (word && !in_word) ++count;
    in_word = word;
  }
  return count;
}

std::size_t count_tokens(std::string_view text, const TokenCounter& counter) {
  return counter ? counter(text) : count_tokens(text);
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// `"""` inside a block would close the surrounding docstring early.
std::string escape_docstring(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 3, R"(""")") == 0) {
      out += R"(\"\"\")";
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i != 0) out += sep;
    out += items[i];
  }
  return out;
}

std::string description_block(const ApiSpec& spec) {
  const std::size_t sentences = spec.provider == Provider::AWS ? 5 : 1;
  const std::string_view source = spec.description.empty() ? std::string_view(spec.full_doc) : spec.description;
  return spec.name + "\nDescription: " + first_sentences(source, sentences);
}

std::string specification_block(const ApiSpec& spec) {
  auto list = [](const std::vector<std::string>& params) {
    return params.empty() ? std::string("none") : join(params, ", ");
  };
  return spec.name + "\nRequired arguments: " + list(spec.required_params) +
         "\nOptional arguments: " + list(spec.optional_params);
}

}  // namespace

std::string first_sentences(std::string_view text, std::size_t max_sentences) {
  const std::string flat = collapse_whitespace(text);
  if (max_sentences == 0) return {};
  std::size_t found = 0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const char c = flat[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == flat.size() || flat[i + 1] == ' ')) {
      if (++found == max_sentences) return flat.substr(0, i + 1);
    }
  }
  return flat;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string truncate_utf8(std::string_view text, std::size_t max_chars) {
  std::size_t chars = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      if (chars == max_chars) return std::string(text.substr(0, i));
      ++chars;
    }
  }
  return std::string(text);
}

std::string render_design(const ApiSpec& spec, AugmentationDesign design) {
  switch (design) {
    case AugmentationDesign::NameOnly:
      return spec.name;
    case AugmentationDesign::Description:
      return description_block(spec);
    case AugmentationDesign::Specification:
      return specification_block(spec);
    case AugmentationDesign::DescriptionPlusSpecification:
      return description_block(spec) + "\n" + specification_block(spec);
    case AugmentationDesign::FullDocumentation:
      return truncate_utf8(spec.full_doc, kFullDocCharLimit);
  }
  return {};
}

AugmentedPrompt build_prompt(std::string_view task_prompt, std::span<const std::string> blocks,
                             const TokenCounter& counter) {
  AugmentedPrompt out;
  if (blocks.empty()) {
    out.text = std::string(task_prompt);
    return out;
  }
  std::string doc = "\"\"\"\n";
  doc += kReferenceHeader;
  doc += '\n';
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i != 0) doc += "\n\n";
    doc += escape_docstring(blocks[i]);
  }
  doc += "\n\"\"\"\n";
  out.augmentation_token_count = count_tokens(doc, counter);
  out.text = doc + "\n" + std::string(task_prompt);
  return out;
}

AugmentedPrompt augment(std::string_view task_prompt, std::span<const ApiSpec* const> docs,
                        AugmentationDesign design, const TokenCounter& counter) {
  std::vector<std::string> blocks;
  std::vector<std::string> names;
  for (const ApiSpec* spec : docs) {
    blocks.push_back(render_design(*spec, design));
    names.push_back(spec->name);
  }
  AugmentedPrompt out = build_prompt(task_prompt, blocks, counter);
  out.design = design;
  out.doc_names = std::move(names);
  return out;
}

}  // namespace dagkit
