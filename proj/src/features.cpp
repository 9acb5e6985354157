#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "emocorpus/error.hpp"
#include "emocorpus/textmetrics.hpp"
#include "text_util.hpp"
#include "utf8.hpp"

namespace emocorpus::metrics {

namespace {

// Closed-class personal/demonstrative pronouns; nouns are approximated by
// content words since no tagger is available.
const std::set<std::string, std::less<>> kPronouns = {
    "i",    "me",    "my",    "mine",  "myself", "you",   "your",
    "yours", "yourself", "he", "him",   "his",    "himself", "she",
    "her",  "hers",  "herself", "it",  "its",    "itself", "we",
    "us",   "our",   "ours",  "ourselves", "they", "them", "their",
    "theirs", "themselves", "this", "that", "these", "those"};

std::size_t char_length(std::string_view word) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < word.size();) {
    const auto cp = detail::decode_utf8(word, i);
    if (detail::is_letter_cp(cp.value) || detail::is_digit_cp(cp.value)) ++n;
    i += cp.length;
  }
  return n;
}

bool has_letter(std::string_view word) {
  for (std::size_t i = 0; i < word.size();) {
    const auto cp = detail::decode_utf8(word, i);
    if (detail::is_letter_cp(cp.value)) return true;
    i += cp.length;
  }
  return false;
}

double population_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

double char_entropy(std::string_view text) {
  std::map<char32_t, std::size_t> freq;
  std::size_t total = 0;
  for (std::size_t i = 0; i < text.size();) {
    const auto cp = detail::decode_utf8(text, i);
    i += cp.length;
    if (!detail::is_letter_cp(cp.value) && !detail::is_digit_cp(cp.value)) {
      continue;
    }
    char32_t key = cp.value;
    if (key >= 'A' && key <= 'Z') key = key - 'A' + 'a';
    ++freq[key];
    ++total;
  }
  double h = 0;
  for (const auto& [_, n] : freq) {
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h > 0 ? h : 0.0;  // avoid -0
}

}  // namespace

std::vector<std::pair<std::string, double>> FeatureVector::named() const {
  return {{"sentence_count", sentence_count},
          {"avg_word_length_stddev", avg_word_length_stddev},
          {"avg_char_entropy", avg_char_entropy},
          {"temporal_connective_ratio", temporal_connective_ratio},
          {"content_lemma_type_count", content_lemma_type_count},
          {"content_lemma_type_ratio", content_lemma_type_ratio},
          {"noun_pronoun_overlap_next2", noun_pronoun_overlap_next2}};
}

std::optional<double> FeatureVector::get(std::string_view name) const {
  for (const auto& [k, v] : named()) {
    if (k == name) return v;
  }
  return std::nullopt;
}

FeatureVector extract_features(std::string_view text,
                               const FeatureResources& resources,
                               const TokenizerOptions& opts) {
  FeatureVector fv;
  if (!resources.temporal_connectives) {
    fv.resource_missing.push_back("temporal_connectives");
  }
  if (!resources.stopwords) fv.resource_missing.push_back("stopwords");

  std::vector<std::vector<std::string>> sentences;  // lowercased tokens
  double stddev_sum = 0;
  for (const auto& s : segment_sentences(text, opts)) {
    auto words = tokenize_words(s, opts);
    if (words.empty()) continue;
    std::vector<double> lengths;
    lengths.reserve(words.size());
    for (auto& w : words) {
      lengths.push_back(static_cast<double>(char_length(w)));
      w = detail::to_lower(w);
    }
    stddev_sum += population_stddev(lengths);
    sentences.push_back(std::move(words));
  }
  if (sentences.empty()) return fv;

  std::vector<std::string> all;
  for (const auto& s : sentences) all.insert(all.end(), s.begin(), s.end());

  fv.sentence_count = static_cast<double>(sentences.size());
  fv.avg_word_length_stddev = stddev_sum / fv.sentence_count;
  fv.avg_char_entropy = char_entropy(text);

  if (resources.temporal_connectives) {
    std::vector<std::vector<std::string>> phrases;
    for (const auto& p : *resources.temporal_connectives) {
      auto words = tokenize_words(p, opts);
      for (auto& w : words) w = detail::to_lower(w);
      if (!words.empty()) phrases.push_back(std::move(words));
    }
    std::sort(phrases.begin(), phrases.end(),
              [](const auto& a, const auto& b) { return a.size() > b.size(); });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < all.size();) {
      std::size_t advance = 1;
      for (const auto& p : phrases) {
        if (i + p.size() <= all.size() &&
            std::equal(p.begin(), p.end(), all.begin() + i)) {
          ++hits;
          advance = p.size();
          break;
        }
      }
      i += advance;
    }
    fv.temporal_connective_ratio =
        static_cast<double>(hits) / static_cast<double>(all.size());
  }

  if (resources.stopwords) {
    const auto& stop = *resources.stopwords;
    auto is_content = [&](const std::string& w) {
      return has_letter(w) && !stop.count(w) && !kPronouns.count(w);
    };
    std::set<std::string> types;
    std::size_t content_tokens = 0;
    for (const auto& w : all) {
      if (!is_content(w)) continue;
      ++content_tokens;
      types.insert(w);
    }
    fv.content_lemma_type_count = static_cast<double>(types.size());
    fv.content_lemma_type_ratio =
        content_tokens == 0 ? 0.0
                            : static_cast<double>(types.size()) /
                                  static_cast<double>(content_tokens);

    std::vector<std::set<std::string>> np_sets;
    for (const auto& s : sentences) {
      std::set<std::string> set;
      for (const auto& w : s) {
        if (is_content(w) || kPronouns.count(w)) set.insert(w);
      }
      np_sets.push_back(std::move(set));
    }
    if (np_sets.size() >= 2) {
      std::size_t overlapping = 0;
      for (std::size_t i = 0; i + 1 < np_sets.size(); ++i) {
        bool hit = false;
        for (std::size_t k = i + 1; k <= i + 2 && k < np_sets.size() && !hit;
             ++k) {
          for (const auto& w : np_sets[i]) {
            if (np_sets[k].count(w)) {
              hit = true;
              break;
            }
          }
        }
        if (hit) ++overlapping;
      }
      fv.noun_pronoun_overlap_next2 = static_cast<double>(overlapping) /
                                      static_cast<double>(np_sets.size() - 1);
    }
  }
  return fv;
}

double linear_combine(const FeatureVector& fv, const LinearModel& model) {
  double total = model.intercept;
  for (const auto& [name, weight] : model.weights) {
    const auto value = fv.get(name);
    if (!value) {
      throw Error(ErrorCode::UnknownFeature,
                  fmt::format("unknown feature '{}'", name));
    }
    total += weight * *value;
  }
  return total;
}

}  // namespace emocorpus::metrics
