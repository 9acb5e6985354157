#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace emocorpus::metrics {

// Published readability coefficients.
//   ARI  (Senter & Smith 1967): 4.71 c/w + 0.5 w/s - 21.43
//   FRE  (Flesch 1948):         206.835 - 1.015 w/s - 84.6 syl/w
//   FKGL (Kincaid et al. 1975): 0.39 w/s + 11.8 syl/w - 15.59
//   NDC  (Chall & Dale 1995):   0.1579 PDW + 0.0496 w/s (+3.6365 if PDW > 5)
namespace coeff {
inline constexpr double kAriChars = 4.71;
inline constexpr double kAriWords = 0.5;
inline constexpr double kAriConst = -21.43;
inline constexpr double kFreConst = 206.835;
inline constexpr double kFreWords = 1.015;
inline constexpr double kFreSyll = 84.6;
inline constexpr double kFkglWords = 0.39;
inline constexpr double kFkglSyll = 11.8;
inline constexpr double kFkglConst = -15.59;
inline constexpr double kNdcDifficult = 0.1579;
inline constexpr double kNdcWords = 0.0496;
inline constexpr double kNdcAdjustment = 3.6365;
inline constexpr double kNdcThresholdPercent = 5.0;
}  // namespace coeff

struct TextCounts {
  std::size_t sentences = 0;
  std::size_t words = 0;
  std::size_t characters = 0;  // letters and digits inside word tokens
  std::size_t syllables = 0;
  std::size_t difficult_words = 0;

  bool operator==(const TextCounts&) const = default;
};

struct TokenizerOptions {
  /// Lowercase abbreviations, trailing period included.
  std::vector<std::string> abbreviations{"mr.", "mrs.", "ms.", "dr.",
                                         "p.m.", "a.m.", "etc.", "e.g.",
                                         "i.e.", "vs.", "st."};
};

std::vector<std::string> segment_sentences(std::string_view text,
                                           const TokenizerOptions& opts = {});
std::vector<std::string> tokenize_words(std::string_view text,
                                        const TokenizerOptions& opts = {});

/// word -> syllable count overrides, consulted before the heuristic.
using SyllableExceptions = std::unordered_map<std::string, std::size_t>;

std::size_t count_syllables(std::string_view word,
                            const SyllableExceptions* exceptions = nullptr);

/// Heuristic only; kept separate so exceptions can be audited against it.
std::size_t heuristic_syllables(std::string_view word);

using WordSet = std::unordered_set<std::string>;

/// Easy if the lowercase form, or the form with -s/-es/-ed/-ing removed, is
/// in the list. Capitalized tokens that do not start a sentence are treated
/// as proper nouns and count as easy.
bool is_easy_word(std::string_view word, bool sentence_initial,
                  const WordSet& easy_words);

TextCounts compute_counts(std::string_view text, const WordSet& easy_words,
                          const SyllableExceptions* exceptions = nullptr,
                          const TokenizerOptions& opts = {});

double ari(const TextCounts& c);
double fre(const TextCounts& c);
double fkgl(const TextCounts& c);
double ndc(const TextCounts& c);

// ---------------------------------------------------------------------------
// Text-intrinsic features used by the feature-based readability models.

struct FeatureVector {
  double sentence_count = 0;
  double avg_word_length_stddev = 0;
  double avg_char_entropy = 0;
  double temporal_connective_ratio = 0;
  double content_lemma_type_count = 0;
  double content_lemma_type_ratio = 0;
  double noun_pronoun_overlap_next2 = 0;
  /// Resource lists that were absent; dependent features are 0.
  std::vector<std::string> resource_missing;

  /// Named view over the numeric features, in declaration order.
  std::vector<std::pair<std::string, double>> named() const;
  std::optional<double> get(std::string_view name) const;
};

struct FeatureResources {
  /// Single words or space-separated phrases, lowercase.
  std::optional<std::vector<std::string>> temporal_connectives;
  /// Function words; anything else is treated as a content word.
  std::optional<WordSet> stopwords;
};

FeatureVector extract_features(std::string_view text,
                               const FeatureResources& resources,
                               const TokenizerOptions& opts = {});

struct LinearModel {
  std::map<std::string, double> weights;
  double intercept = 0;
};

double linear_combine(const FeatureVector& fv, const LinearModel& model);

// ---------------------------------------------------------------------------

struct MetricReport {
  double ari = 0;
  double fre = 0;
  double fkgl = 0;
  double ndc = 0;
  TextCounts counts;
  std::map<std::string, double> optional_scores;
  /// Metric slots that cannot be computed here (always includes "sbert").
  std::vector<std::string> unavailable;
  std::vector<std::string> notes;

  bool operator==(const MetricReport&) const = default;
};

struct ScoreConfig {
  WordSet easy_words;
  SyllableExceptions syllable_exceptions;
  TokenizerOptions tokenizer;
  FeatureResources features;
  /// Keyed by metric name: carec, carec_m, cml2.
  std::map<std::string, LinearModel> combiners;
  /// Drop `Speaker (attitude):` prefixes from transcript-shaped lines.
  bool strip_speaker_prefixes = true;
};

MetricReport score_text(std::string_view text, const ScoreConfig& config);

/// Joins utterances with single spaces, appending "." to any utterance that
/// lacks a terminal sentence mark so sentence counts survive concatenation.
std::string join_utterances(const std::vector<std::string_view>& utterances);

/// Removes `Speaker (attitude):` prefixes from lines that carry one.
std::string strip_speaker_prefixes(std::string_view text);

inline constexpr std::string_view kMetricCsvHeader =
    "text_id,ari,fre,fkgl,ndc,sentences,words,syllables,characters,difficult";
std::string to_csv_row(std::string_view text_id, const MetricReport& r);

nlohmann::json to_json(const MetricReport& r);
MetricReport report_from_json(const nlohmann::json& j);

}  // namespace emocorpus::metrics
