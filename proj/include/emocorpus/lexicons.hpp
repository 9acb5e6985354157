#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "emocorpus/textmetrics.hpp"
#include "emocorpus/types.hpp"

namespace emocorpus::lexicon {

struct WordList {
  std::string name;
  std::set<std::string> entries;
  std::string source_path;
  std::string checksum;  // SHA-256 of the file bytes, lowercase hex

  bool contains(std::string_view word) const;
  std::size_t size() const { return entries.size(); }
  std::vector<std::string> to_vector() const {
    return {entries.begin(), entries.end()};
  }
  metrics::WordSet to_word_set() const {
    return {entries.begin(), entries.end()};
  }
};

struct LoadOptions {
  /// Phrase lists (brand denylist, multi-word connectives) may hold spaces.
  bool allow_internal_whitespace = false;
};

/// One entry per non-blank, non-`#` line; entries are lowercased and deduped.
WordList load_word_list(const std::filesystem::path& path,
                        std::string_view name, LoadOptions options = {});
WordList parse_word_list(std::string_view bytes, std::string_view name,
                         std::string source_path = {},
                         LoadOptions options = {});

class EmotionLexicon {
 public:
  /// Throws DuplicateAcrossEmotions if a word is listed under two emotions.
  explicit EmotionLexicon(std::map<Emotion, WordList> lists);

  const WordList& words_for(Emotion e) const;
  bool expresses(Emotion e, std::string_view word) const;
  const std::map<Emotion, WordList>& lists() const { return lists_; }

 private:
  std::map<Emotion, WordList> lists_;
};

/// Reads `<dir>/<emotion>.txt` for all six emotions.
EmotionLexicon load_emotion_lexicon(const std::filesystem::path& dir);

/// `word<TAB>count` lines; `#` comments allowed.
metrics::SyllableExceptions load_syllable_exceptions(
    const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace emocorpus::lexicon
