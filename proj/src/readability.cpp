#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "emocorpus/error.hpp"
#include "emocorpus/textmetrics.hpp"
#include "text_util.hpp"
#include "utf8.hpp"

namespace emocorpus::metrics {

namespace {

std::size_t letters_and_digits(std::string_view word) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < word.size();) {
    const auto cp = detail::decode_utf8(word, i);
    if (detail::is_letter_cp(cp.value) || detail::is_digit_cp(cp.value)) ++n;
    i += cp.length;
  }
  return n;
}

void require_non_degenerate(const TextCounts& c) {
  if (c.words == 0 || c.sentences == 0) {
    throw Error(ErrorCode::DegenerateText,
                fmt::format("text has {} words in {} sentences", c.words,
                            c.sentences));
  }
}

double words_per_sentence(const TextCounts& c) {
  return static_cast<double>(c.words) / static_cast<double>(c.sentences);
}

}  // namespace

bool is_easy_word(std::string_view word, bool sentence_initial,
                  const WordSet& easy_words) {
  if (word.empty()) return true;
  if (!sentence_initial && word.front() >= 'A' && word.front() <= 'Z') {
    return true;
  }
  const auto lw = detail::to_lower(word);
  if (easy_words.count(lw)) return true;
  for (std::string_view suffix : {"s", "es", "ed", "ing"}) {
    if (lw.size() > suffix.size() &&
        std::string_view(lw).substr(lw.size() - suffix.size()) == suffix &&
        easy_words.count(lw.substr(0, lw.size() - suffix.size()))) {
      return true;
    }
  }
  return false;
}

TextCounts compute_counts(std::string_view text, const WordSet& easy_words,
                          const SyllableExceptions* exceptions,
                          const TokenizerOptions& opts) {
  TextCounts c;
  for (const auto& sentence : segment_sentences(text, opts)) {
    const auto words = tokenize_words(sentence, opts);
    if (words.empty()) continue;
    ++c.sentences;
    for (std::size_t i = 0; i < words.size(); ++i) {
      ++c.words;
      c.characters += letters_and_digits(words[i]);
      c.syllables += count_syllables(words[i], exceptions);
      if (!is_easy_word(words[i], i == 0, easy_words)) ++c.difficult_words;
    }
  }
  return c;
}

double ari(const TextCounts& c) {
  require_non_degenerate(c);
  return coeff::kAriChars * (static_cast<double>(c.characters) / c.words) +
         coeff::kAriWords * words_per_sentence(c) + coeff::kAriConst;
}

double fre(const TextCounts& c) {
  require_non_degenerate(c);
  return coeff::kFreConst - coeff::kFreWords * words_per_sentence(c) -
         coeff::kFreSyll * (static_cast<double>(c.syllables) / c.words);
}

double fkgl(const TextCounts& c) {
  require_non_degenerate(c);
  return coeff::kFkglWords * words_per_sentence(c) +
         coeff::kFkglSyll * (static_cast<double>(c.syllables) / c.words) +
         coeff::kFkglConst;
}

double ndc(const TextCounts& c) {
  require_non_degenerate(c);
  const double pdw = 100.0 * static_cast<double>(c.difficult_words) / c.words;
  double score =
      coeff::kNdcDifficult * pdw + coeff::kNdcWords * words_per_sentence(c);
  if (pdw > coeff::kNdcThresholdPercent) score += coeff::kNdcAdjustment;
  return score;
}

std::string join_utterances(const std::vector<std::string_view>& utterances) {
  std::string out;
  for (auto u : utterances) {
    u = detail::trim(u);
    if (u.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(u);
    auto last = u.find_last_not_of("\"')]");
    if (last == std::string_view::npos ||
        (u[last] != '.' && u[last] != '!' && u[last] != '?')) {
      out.push_back('.');
    }
  }
  return out;
}

std::string strip_speaker_prefixes(std::string_view text) {
  std::string out;
  for (auto line : detail::split_lines(text)) {
    const auto t = detail::trim(line);
    const auto open = t.find('(');
    const auto close = t.find(')');
    bool stripped = false;
    if (open != std::string_view::npos && close != std::string_view::npos &&
        open > 0 && close > open) {
      const auto speaker = detail::trim(t.substr(0, open));
      auto rest = detail::trim(t.substr(close + 1));
      const bool speaker_ok =
          !speaker.empty() &&
          std::all_of(speaker.begin(), speaker.end(), detail::is_ascii_alpha);
      if (speaker_ok && !rest.empty() && rest.front() == ':') {
        out.append(detail::trim(rest.substr(1)));
        stripped = true;
      }
    }
    if (!stripped) out.append(t);
    out.push_back('\n');
  }
  return out;
}

MetricReport score_text(std::string_view text, const ScoreConfig& config) {
  std::string stripped;
  if (config.strip_speaker_prefixes) {
    stripped = strip_speaker_prefixes(text);
    text = stripped;
  }
  MetricReport r;
  r.counts = compute_counts(text, config.easy_words,
                            &config.syllable_exceptions, config.tokenizer);
  r.ari = ari(r.counts);
  r.fre = fre(r.counts);
  r.fkgl = fkgl(r.counts);
  r.ndc = ndc(r.counts);
  r.unavailable.push_back("sbert");
  if (!config.combiners.empty()) {
    const auto fv = extract_features(text, config.features, config.tokenizer);
    for (const auto& [name, model] : config.combiners) {
      r.optional_scores[name] = linear_combine(fv, model);
    }
    r.notes.push_back("lemma≈lowercase");
    for (const auto& missing : fv.resource_missing) {
      r.notes.push_back("resource_missing:" + missing);
    }
    if (config.combiners.count("cml2")) {
      r.notes.push_back("cml2 omits the SUBTLEXus frequency feature");
    }
  }
  return r;
}

std::string to_csv_row(std::string_view text_id, const MetricReport& r) {
  return fmt::format("{},{:.10g},{:.10g},{:.10g},{:.10g},{},{},{},{},{}", text_id, r.ari, r.fre,
                     r.fkgl, r.ndc, r.counts.sentences, r.counts.words,
                     r.counts.syllables, r.counts.characters,
                     r.counts.difficult_words);
}

nlohmann::json to_json(const MetricReport& r) {
  return {
      {"ari", r.ari},
      {"fre", r.fre},
      {"fkgl", r.fkgl},
      {"ndc", r.ndc},
      {"counts",
       {{"sentences", r.counts.sentences},
        {"words", r.counts.words},
        {"characters", r.counts.characters},
        {"syllables", r.counts.syllables},
        {"difficult_words", r.counts.difficult_words}}},
      {"optional_scores", r.optional_scores},
      {"unavailable", r.unavailable},
      {"notes", r.notes},
  };
}

MetricReport report_from_json(const nlohmann::json& j) {
  try {
    MetricReport r;
    r.ari = j.at("ari").get<double>();
    r.fre = j.at("fre").get<double>();
    r.fkgl = j.at("fkgl").get<double>();
    r.ndc = j.at("ndc").get<double>();
    const auto& c = j.at("counts");
    r.counts.sentences = c.at("sentences").get<std::size_t>();
    r.counts.words = c.at("words").get<std::size_t>();
    r.counts.characters = c.at("characters").get<std::size_t>();
    r.counts.syllables = c.at("syllables").get<std::size_t>();
    r.counts.difficult_words = c.at("difficult_words").get<std::size_t>();
    r.optional_scores =
        j.value("optional_scores", std::map<std::string, double>{});
    r.unavailable = j.value("unavailable", std::vector<std::string>{});
    r.notes = j.value("notes", std::vector<std::string>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptRecord,
                fmt::format("bad metric report JSON: {}", e.what()));
  }
}

}  // namespace emocorpus::metrics
