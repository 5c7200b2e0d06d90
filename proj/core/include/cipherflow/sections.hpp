#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cipherflow::rules {

// A label found at the start of a line, e.g. "**Ciphertext Answer:** ...".
//
// Matching is case-insensitive and tolerates leading markdown markup
// (`*`, `#`, `>`, `-`, `_`, backticks, whitespace), and markup between the
// label name and its colon. A label given with a trailing ':' requires the
// colon in the text; without it the colon is optional. The label name must
// end at a word boundary.
struct LabelHit {
  std::string label;
  std::size_t line_begin = 0;     // start of the line holding the label
  std::size_t content_begin = 0;  // first byte after the label and markup
};

std::vector<LabelHit> find_labels(std::string_view text,
                                  std::span<const std::string_view> labels);

// Content of the last non-empty occurrence of `label`, running to the next
// line that starts with any of `known_labels` (or end of text), trimmed of
// whitespace and stray markdown emphasis. nullopt when the label is absent or
// every occurrence is empty.
std::optional<std::string> section_content(std::string_view text, std::string_view label,
                                           std::span<const std::string_view> known_labels);

std::string trim(std::string_view text);

}  // namespace cipherflow::rules
