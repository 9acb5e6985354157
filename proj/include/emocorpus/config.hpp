#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emocorpus/curation.hpp"
#include "emocorpus/generator.hpp"
#include "emocorpus/lexicons.hpp"
#include "emocorpus/textmetrics.hpp"

namespace emocorpus::config {

/// Flat view of a TOML-like file: `[section]` headers and `key = value`
/// lines, keys reported as "section.key". Values may be bare or quoted.
using KeyValues = std::map<std::string, std::string>;

/// Throws ParseError on malformed lines or duplicate keys.
KeyValues parse_key_values(std::string_view text);

/// "[0, 5]", "(5, 9]", "(9, inf)". Throws InvalidBands.
curation::Band parse_band(std::string_view text);

struct LexiconPaths {
  std::filesystem::path emotions_dir;
  std::filesystem::path easy_words;
  std::optional<std::filesystem::path> syllable_exceptions;
  std::optional<std::filesystem::path> temporal_connectives;
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> brands;
};

struct AppConfig {
  std::filesystem::path corpus = "corpus.jsonl";
  gen::ProviderConfig provider;
  LexiconPaths lexicons;
  curation::CefrBandTable bands;
  std::map<std::string, metrics::LinearModel> combiners;
  curation::CoherenceMode coherence_mode = curation::CoherenceMode::FirstClientTurn;
  std::string listen = "127.0.0.1:8080";
  /// Environment variable holding the optional review API token.
  std::string token_env;
  std::optional<std::filesystem::path> ui_dir;
};

/// Defaults with lexicon paths rooted at `data_dir`.
AppConfig default_config(const std::filesystem::path& data_dir);

/// Overlays a config file on the defaults. Relative paths in the file are
/// resolved against the file's directory. Throws InvalidValue for unknown
/// keys or bad values.
AppConfig load_config(const std::filesystem::path& path,
                      const std::filesystem::path& data_dir);
AppConfig apply(const KeyValues& kv, AppConfig base,
                const std::filesystem::path& relative_to);

/// Everything the pipeline needs, loaded once and then read-only.
struct Resources {
  lexicon::EmotionLexicon emotions;
  metrics::ScoreConfig scoring;
  std::vector<std::string> brands;
  curation::CefrBandTable bands;
  curation::CoherenceMode coherence_mode = curation::CoherenceMode::FirstClientTurn;

  curation::AutoCheckContext auto_check_context() const;
};

Resources load_resources(const AppConfig& cfg);

}  // namespace emocorpus::config
