#include "emocorpus/config.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "emocorpus/error.hpp"
#include "text_util.hpp"

namespace emocorpus::config {

namespace fs = std::filesystem;

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::string section;
  const auto lines = detail::split_lines(detail::strip_bom(text));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::string_view line = lines[i];
    // Comments start at a '#' outside quotes.
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (line[k] == '"') quoted = !quoted;
      if (line[k] == '#' && !quoted) {
        line = line.substr(0, k);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ParseError(ErrorCode::MalformedLine, line_no,
                         "section header must look like [name]");
      }
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(ErrorCode::MalformedLine, line_no, "expected key = value");
    }
    const auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(ErrorCode::MalformedLine, line_no, "empty key");
    }
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') {
        throw ParseError(ErrorCode::MalformedLine, line_no, "unterminated string");
      }
      value = value.substr(1, value.size() - 2);
    }
    const auto full = section.empty() ? std::string(key)
                                      : section + "." + std::string(key);
    if (!kv.emplace(full, std::string(value)).second) {
      throw ParseError(ErrorCode::MalformedLine, line_no,
                       fmt::format("duplicate key '{}'", full));
    }
  }
  return kv;
}

namespace {

double to_double(std::string_view s, std::string_view what) {
  s = detail::trim(s);
  const auto lower = detail::to_lower(s);
  if (lower == "inf" || lower == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::InvalidValue,
                fmt::format("{}: '{}' is not a number", what, s));
  }
  return v;
}

std::size_t to_count(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::InvalidValue,
                fmt::format("{}: '{}' is not a non-negative integer", what, s));
  }
  return v;
}

fs::path resolve(const fs::path& base, std::string_view value) {
  fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

curation::Band parse_band(std::string_view text) {
  const auto t = detail::trim(text);
  const auto comma = t.find(',');
  if (t.size() < 5 || comma == std::string_view::npos ||
      (t.front() != '[' && t.front() != '(') ||
      (t.back() != ']' && t.back() != ')')) {
    throw Error(ErrorCode::InvalidBands,
                fmt::format("band '{}' must look like [lo, hi] or (lo, hi]", t));
  }
  curation::Band b;
  b.lo_open = t.front() == '(';
  try {
    b.lo = to_double(t.substr(1, comma - 1), "band");
    b.hi = to_double(t.substr(comma + 1, t.size() - comma - 2), "band");
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidBands, e.what());
  }
  if (t.back() == ')' && !std::isinf(b.hi)) {
    throw Error(ErrorCode::InvalidBands,
                fmt::format("band '{}': only an infinite upper end may be open", t));
  }
  if (!(b.lo < b.hi)) {
    throw Error(ErrorCode::InvalidBands,
                fmt::format("band '{}' is empty", t));
  }
  return b;
}

AppConfig default_config(const fs::path& data_dir) {
  AppConfig c;
  c.lexicons.emotions_dir = data_dir / "emotions";
  c.lexicons.easy_words = data_dir / "easy_words_mini.txt";
  c.lexicons.syllable_exceptions = data_dir / "syllable_exceptions.tsv";
  c.lexicons.temporal_connectives = data_dir / "temporal_connectives.txt";
  c.lexicons.stopwords = data_dir / "stopwords.txt";
  c.lexicons.brands = data_dir / "brands.txt";
  return c;
}

AppConfig apply(const KeyValues& kv, AppConfig c, const fs::path& rel) {
  std::map<Cefr, curation::Band> bands = {
      {Cefr::A2, c.bands.band(Cefr::A2)},
      {Cefr::B2, c.bands.band(Cefr::B2)},
      {Cefr::C2, c.bands.band(Cefr::C2)}};
  auto& p = c.provider;
  auto& lx = c.lexicons;
  for (const auto& [key, value] : kv) {
    if (key == "corpus") c.corpus = resolve(rel, value);
    else if (key == "provider.kind") p.kind = value;
    else if (key == "provider.name") p.name = value;
    else if (key == "provider.endpoint") p.endpoint = value;
    else if (key == "provider.model") p.model = value;
    else if (key == "provider.api_key_env") p.api_key_env = value;
    else if (key == "provider.timeout_ms")
      p.timeout = std::chrono::milliseconds(to_count(value, key));
    else if (key == "provider.max_retries") p.max_retries = to_count(value, key);
    else if (key == "provider.max_parallel") p.max_parallel = to_count(value, key);
    else if (key == "provider.temperature") p.temperature = to_double(value, key);
    else if (key == "provider.backoff_ms")
      p.backoff_base = std::chrono::milliseconds(to_count(value, key));
    else if (key == "lexicons.emotions_dir") lx.emotions_dir = resolve(rel, value);
    else if (key == "lexicons.easy_words") lx.easy_words = resolve(rel, value);
    else if (key == "lexicons.syllable_exceptions")
      lx.syllable_exceptions = resolve(rel, value);
    else if (key == "lexicons.temporal_connectives")
      lx.temporal_connectives = resolve(rel, value);
    else if (key == "lexicons.stopwords") lx.stopwords = resolve(rel, value);
    else if (key == "lexicons.brands") lx.brands = resolve(rel, value);
    else if (key.rfind("bands.", 0) == 0) {
      const auto level = parse_cefr(key.substr(6));
      if (!level) {
        throw Error(ErrorCode::InvalidValue, fmt::format("unknown key '{}'", key));
      }
      bands[*level] = parse_band(value);
    } else if (key == "curation.coherence_mode") {
      if (value == "first_client_turn") {
        c.coherence_mode = curation::CoherenceMode::FirstClientTurn;
      } else if (value == "any_client_turn") {
        c.coherence_mode = curation::CoherenceMode::AnyClientTurn;
      } else {
        throw Error(ErrorCode::InvalidValue,
                    fmt::format("{}: expected first_client_turn or "
                                "any_client_turn, got '{}'",
                                key, value));
      }
    } else if (key == "service.listen") c.listen = value;
    else if (key == "service.token_env") c.token_env = value;
    else if (key == "service.ui_dir") c.ui_dir = resolve(rel, value);
    else if (key.rfind("combiners.", 0) == 0) {
      // combiners.<metric>.intercept or combiners.<metric>.<feature>
      const auto rest = key.substr(10);
      const auto dot = rest.find('.');
      if (dot == std::string::npos || dot == 0 || dot + 1 == rest.size()) {
        throw Error(ErrorCode::InvalidValue, fmt::format("unknown key '{}'", key));
      }
      auto& model = c.combiners[rest.substr(0, dot)];
      const auto field = rest.substr(dot + 1);
      if (field == "intercept") model.intercept = to_double(value, key);
      else model.weights[field] = to_double(value, key);
    } else {
      throw Error(ErrorCode::InvalidValue, fmt::format("unknown key '{}'", key));
    }
  }
  c.bands = curation::CefrBandTable(bands);
  p.validate();
  return c;
}

AppConfig load_config(const fs::path& path, const fs::path& data_dir) {
  const auto text = lexicon::read_file(path);
  KeyValues kv;
  try {
    kv = parse_key_values(text);
  } catch (const ParseError& e) {
    throw ParseError(e.code(), e.line_no(),
                     fmt::format("{}: {}", path.string(), e.what()));
  }
  return apply(kv, default_config(data_dir), path.parent_path());
}

curation::AutoCheckContext Resources::auto_check_context() const {
  curation::AutoCheckContext ctx;
  ctx.lexicon = &emotions;
  ctx.bands = bands;
  ctx.scoring = scoring;
  ctx.mode = coherence_mode;
  return ctx;
}

Resources load_resources(const AppConfig& cfg) {
  metrics::ScoreConfig scoring;
  const auto& lx = cfg.lexicons;
  scoring.easy_words = lexicon::load_word_list(lx.easy_words, "easy_words").to_word_set();
  if (lx.syllable_exceptions) {
    scoring.syllable_exceptions =
        lexicon::load_syllable_exceptions(*lx.syllable_exceptions);
  }
  if (lx.temporal_connectives) {
    scoring.features.temporal_connectives =
        lexicon::load_word_list(*lx.temporal_connectives, "temporal_connectives",
                                {.allow_internal_whitespace = true})
            .to_vector();
  }
  if (lx.stopwords) {
    scoring.features.stopwords =
        lexicon::load_word_list(*lx.stopwords, "stopwords").to_word_set();
  }
  scoring.combiners = cfg.combiners;
  std::vector<std::string> brands;
  if (lx.brands) {
    brands = lexicon::load_word_list(*lx.brands, "brands",
                                     {.allow_internal_whitespace = true})
                 .to_vector();
  }
  return Resources{lexicon::load_emotion_lexicon(lx.emotions_dir),
                   std::move(scoring), std::move(brands), cfg.bands,
                   cfg.coherence_mode};
}

}  // namespace emocorpus::config
