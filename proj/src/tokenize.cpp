#include <algorithm>

#include "emocorpus/textmetrics.hpp"
#include "text_util.hpp"
#include "utf8.hpp"

namespace emocorpus::metrics {

using detail::decode_utf8;
using detail::is_space;

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

// The whitespace-delimited token that ends at `period` (inclusive), with
// leading quotes/brackets removed, lowercased.
std::string token_ending_at(std::string_view text, std::size_t period) {
  std::size_t start = period;
  while (start > 0 && !is_space(text[start - 1])) --start;
  while (start < period && (text[start] == '"' || text[start] == '(' ||
                            text[start] == '[' || text[start] == '\'')) {
    ++start;
  }
  return detail::to_lower(text.substr(start, period - start + 1));
}

bool is_abbreviation(std::string_view token, const TokenizerOptions& opts) {
  return std::find(opts.abbreviations.begin(), opts.abbreviations.end(),
                   token) != opts.abbreviations.end();
}

}  // namespace

std::vector<std::string> segment_sentences(std::string_view text,
                                           const TokenizerOptions& opts) {
  std::vector<std::string> out;
  std::size_t seg_start = 0;
  auto emit = [&](std::size_t end) {
    const auto s = detail::trim(text.substr(seg_start, end - seg_start));
    if (!s.empty()) out.emplace_back(s);
    seg_start = end;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_terminal(text[j])) ++j;
    const bool single_period = (j - i == 1 && text[i] == '.');
    while (j < text.size() && is_closer(text[j])) ++j;
    const bool at_boundary = (j == text.size() || is_space(text[j]));
    if (at_boundary &&
        !(single_period && is_abbreviation(token_ending_at(text, i), opts))) {
      emit(j);
    }
    i = j;
  }
  emit(text.size());
  return out;
}

std::vector<std::string> tokenize_words(std::string_view text,
                                        const TokenizerOptions& opts) {
  std::vector<std::string> words;
  std::size_t i = 0;
  auto is_word_cp = [](char32_t cp) {
    return detail::is_letter_cp(cp) || detail::is_digit_cp(cp);
  };
  // Abbreviations with internal periods that can start at `pos`.
  auto abbreviation_at = [&](std::size_t pos) -> std::size_t {
    for (const auto& abbr : opts.abbreviations) {
      if (abbr.find('.') == abbr.size() - 1) continue;
      if (pos + abbr.size() > text.size()) continue;
      if (detail::to_lower(text.substr(pos, abbr.size())) != abbr) continue;
      const auto after = pos + abbr.size();
      if (after < text.size() && is_word_cp(decode_utf8(text, after).value)) {
        continue;
      }
      return abbr.size();
    }
    return 0;
  };

  while (i < text.size()) {
    const auto cp = decode_utf8(text, i);
    if (!is_word_cp(cp.value)) {
      i += cp.length;
      continue;
    }
    const bool preceded_by_word =
        i > 0 && (detail::is_word_byte(text[i - 1]));
    if (!preceded_by_word) {
      if (auto n = abbreviation_at(i); n > 0) {
        words.emplace_back(text.substr(i, n - 1));
        i += n;
        continue;
      }
    }
    std::string word;
    std::size_t j = i;
    while (j < text.size()) {
      const auto c = decode_utf8(text, j);
      if (is_word_cp(c.value)) {
        word.append(text.substr(j, c.length));
        j += c.length;
        continue;
      }
      const bool joiner = detail::is_apostrophe_cp(c.value) || c.value == '-';
      if (joiner && j + c.length < text.size() &&
          is_word_cp(decode_utf8(text, j + c.length).value)) {
        word.push_back(c.value == '-' ? '-' : '\'');
        j += c.length;
        continue;
      }
      break;
    }
    words.push_back(std::move(word));
    i = j;
  }
  return words;
}

std::size_t heuristic_syllables(std::string_view word) {
  std::string letters;
  for (char c : word) {
    if (detail::is_ascii_alpha(c)) letters.push_back(detail::lower(c));
  }
  auto is_vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' ||
           c == 'y';
  };
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : letters) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const auto n = letters.size();
  if (n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2])) {
    const bool consonant_le =
        letters[n - 2] == 'l' && n >= 3 && !is_vowel(letters[n - 3]);
    if (!consonant_le && groups > 0) --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

std::size_t count_syllables(std::string_view word,
                            const SyllableExceptions* exceptions) {
  const auto key = detail::to_lower(word);
  if (exceptions) {
    if (auto it = exceptions->find(key); it != exceptions->end()) {
      return std::max<std::size_t>(it->second, 1);
    }
  }
  if (key.find('-') == std::string::npos) return heuristic_syllables(key);
  std::size_t total = 0;
  std::size_t start = 0;
  while (start <= key.size()) {
    auto dash = key.find('-', start);
    if (dash == std::string::npos) dash = key.size();
    const auto part = std::string_view(key).substr(start, dash - start);
    if (!part.empty()) total += count_syllables(part, exceptions);
    start = dash + 1;
  }
  return std::max<std::size_t>(total, 1);
}

}  // namespace emocorpus::metrics
