#include "cipherflow/sections.hpp"

#include <algorithm>
#include <cctype>

namespace cipherflow::rules {
namespace {

bool is_markup(char c) {
  return c == ' ' || c == '\t' || c == '*' || c == '#' || c == '>' || c == '-' ||
         c == '_' || c == '`' || c == '\r';
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

// If `label` starts at `pos`, returns the offset just past the label, its colon
// and trailing emphasis markup.
std::optional<std::size_t> match_label(std::string_view text, std::size_t pos,
                                       std::string_view label) {
  const bool needs_colon = !label.empty() && label.back() == ':';
  const std::string_view name = needs_colon ? label.substr(0, label.size() - 1) : label;
  if (text.size() - pos < name.size()) return std::nullopt;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (lower(text[pos + i]) != lower(name[i])) return std::nullopt;
  }
  std::size_t p = pos + name.size();
  if (p < text.size() && is_word_char(text[p]) && is_word_char(name.back())) {
    return std::nullopt;
  }
  while (p < text.size() && (text[p] == '*' || text[p] == '_' || text[p] == ' ')) ++p;
  if (p < text.size() && text[p] == ':') {
    ++p;
  } else if (p + 1 < text.size() && text[p] == '-' && p > pos + name.size() && text[p + 1] == ' ') {
    // "Label - value": a spaced dash stands in for the colon.
    ++p;
  } else if (needs_colon) {
    return std::nullopt;
  }
  while (p < text.size() && (text[p] == '*' || text[p] == '_')) ++p;
  return p;
}

}  // namespace

std::string trim(std::string_view text) {
  const auto* begin = text.begin();
  const auto* end = text.end();
  while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
  return {begin, end};
}

std::vector<LabelHit> find_labels(std::string_view text,
                                  std::span<const std::string_view> labels) {
  std::vector<LabelHit> hits;
  std::size_t line = 0;
  while (line <= text.size()) {
    std::size_t eol = text.find('\n', line);
    if (eol == std::string_view::npos) eol = text.size();
    std::size_t p = line;
    while (p < eol && is_markup(text[p])) ++p;
    // Ordered-list markers such as "1." or "2)".
    std::size_t q = p;
    while (q < eol && std::isdigit(static_cast<unsigned char>(text[q]))) ++q;
    if (q > p && q < eol && (text[q] == '.' || text[q] == ')')) {
      p = q + 1;
      while (p < eol && is_markup(text[p])) ++p;
    }
    // Longest label first so "Rule" never shadows a longer label.
    std::optional<std::size_t> best_end;
    std::string_view best_label;
    for (std::string_view label : labels) {
      if (auto end = match_label(text.substr(0, eol), p, label)) {
        if (label.size() > best_label.size()) {
          best_end = end;
          best_label = label;
        }
      }
    }
    if (best_end) hits.push_back({std::string(best_label), line, *best_end});
    if (eol == text.size()) break;
    line = eol + 1;
  }
  return hits;
}

std::optional<std::string> section_content(std::string_view text, std::string_view label,
                                           std::span<const std::string_view> known_labels) {
  std::vector<std::string_view> all(known_labels.begin(), known_labels.end());
  if (std::find(all.begin(), all.end(), label) == all.end()) all.push_back(label);
  const auto hits = find_labels(text, all);
  for (std::size_t i = hits.size(); i-- > 0;) {
    if (hits[i].label != label) continue;
    const std::size_t end = i + 1 < hits.size() ? hits[i + 1].line_begin : text.size();
    std::string content = trim(text.substr(hits[i].content_begin, end - hits[i].content_begin));
    // A closing "**" left over from "**Label:** value **" style emphasis.
    while (content.size() >= 2 && content.ends_with("**")) content = trim(content.substr(0, content.size() - 2));
    while (content.size() >= 2 && content.starts_with("**")) content = trim(content.substr(2));
    if (!content.empty()) return content;
  }
  return std::nullopt;
}

}  // namespace cipherflow::rules
