#include "emocorpus/lexicons.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "emocorpus/error.hpp"
#include "text_util.hpp"
#include "utf8.hpp"

namespace emocorpus::lexicon {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError,
                fmt::format("cannot open '{}'", path.string()));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::IoError,
                fmt::format("error reading '{}'", path.string()));
  }
  return ss.str();
}

bool WordList::contains(std::string_view word) const {
  return entries.count(detail::to_lower(word)) > 0;
}

WordList parse_word_list(std::string_view bytes, std::string_view name,
                         std::string source_path, LoadOptions options) {
  if (!detail::is_valid_utf8(bytes)) {
    throw Error(ErrorCode::EncodingError,
                fmt::format("word list '{}' is not valid UTF-8", name));
  }
  WordList list;
  list.name = std::string(name);
  list.source_path = std::move(source_path);
  list.checksum = sha256_hex(bytes);
  const auto lines = detail::split_lines(detail::strip_bom(bytes));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    if (!options.allow_internal_whitespace &&
        std::any_of(line.begin(), line.end(), detail::is_space)) {
      throw Error(ErrorCode::InvalidValue,
                  fmt::format("word list '{}' line {}: entry '{}' contains "
                              "whitespace",
                              name, i + 1, line));
    }
    list.entries.insert(detail::to_lower(line));
  }
  if (list.entries.empty()) {
    throw Error(ErrorCode::EmptyList,
                fmt::format("word list '{}' has no entries", name));
  }
  return list;
}

WordList load_word_list(const std::filesystem::path& path,
                        std::string_view name, LoadOptions options) {
  return parse_word_list(read_file(path), name, path.string(), options);
}

EmotionLexicon::EmotionLexicon(std::map<Emotion, WordList> lists)
    : lists_(std::move(lists)) {
  for (Emotion e : kAllEmotions) {
    if (!lists_.count(e)) {
      throw Error(ErrorCode::MissingEmotionFile,
                  fmt::format("no word list for emotion '{}'", to_string(e)));
    }
  }
  std::map<std::string, Emotion> owner;
  for (const auto& [emotion, list] : lists_) {
    for (const auto& word : list.entries) {
      auto [it, inserted] = owner.emplace(word, emotion);
      if (!inserted) {
        throw Error(ErrorCode::DuplicateAcrossEmotions,
                    fmt::format("'{}' is listed under both {} and {}", word,
                                to_string(it->second), to_string(emotion)));
      }
    }
  }
}

const WordList& EmotionLexicon::words_for(Emotion e) const {
  return lists_.at(e);
}

bool EmotionLexicon::expresses(Emotion e, std::string_view word) const {
  return words_for(e).contains(word);
}

EmotionLexicon load_emotion_lexicon(const std::filesystem::path& dir) {
  std::map<Emotion, WordList> lists;
  for (Emotion e : kAllEmotions) {
    const auto path = dir / (std::string(to_string(e)) + ".txt");
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::MissingEmotionFile,
                  fmt::format("missing emotion file '{}'", path.string()));
    }
    lists.emplace(e, load_word_list(path, to_string(e)));
  }
  return EmotionLexicon(std::move(lists));
}

metrics::SyllableExceptions load_syllable_exceptions(
    const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  metrics::SyllableExceptions table;
  const auto lines = detail::split_lines(detail::strip_bom(bytes));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    std::size_t count = 0;
    if (tab == std::string_view::npos ||
        std::sscanf(std::string(line.substr(tab + 1)).c_str(), "%zu",
                    &count) != 1 ||
        count == 0) {
      throw Error(ErrorCode::InvalidValue,
                  fmt::format("{}:{}: expected 'word<TAB>count'",
                              path.string(), i + 1));
    }
    table[detail::to_lower(detail::trim(line.substr(0, tab)))] = count;
  }
  return table;
}

}  // namespace emocorpus::lexicon
