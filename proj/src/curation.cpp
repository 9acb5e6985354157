#include "emocorpus/curation.hpp"

#include <cmath>

#include <fmt/format.h>

#include "emocorpus/error.hpp"
#include "text_util.hpp"

namespace emocorpus::curation {

std::string_view to_string(Qoi q) noexcept {
  switch (q) {
    case Qoi::S: return "S";
    case Qoi::A: return "A";
    case Qoi::F: return "F";
  }
  return "";
}

std::string_view to_string(Disposition d) noexcept {
  switch (d) {
    case Disposition::Pending: return "pending";
    case Disposition::Accepted: return "accepted";
    case Disposition::Rejected: return "rejected";
  }
  return "";
}

std::optional<Qoi> parse_qoi(std::string_view s) noexcept {
  if (s == "S") return Qoi::S;
  if (s == "A") return Qoi::A;
  if (s == "F") return Qoi::F;
  return std::nullopt;
}

std::optional<Disposition> parse_disposition(std::string_view s) noexcept {
  for (auto d : {Disposition::Pending, Disposition::Accepted,
                 Disposition::Rejected}) {
    if (s == to_string(d)) return d;
  }
  return std::nullopt;
}

CefrBandTable::CefrBandTable()
    : CefrBandTable({{Cefr::A2, Band{0.0, 5.0, false}},
                     {Cefr::B2, Band{5.0, 9.0, true}},
                     {Cefr::C2, Band{9.0,
                                     std::numeric_limits<double>::infinity(),
                                     true}}}) {}

CefrBandTable::CefrBandTable(std::map<Cefr, Band> bands)
    : bands_(std::move(bands)) {
  for (Cefr c : kAllCefrLevels) {
    if (!bands_.count(c)) {
      throw Error(ErrorCode::InvalidBands,
                  fmt::format("no FKGL band for {}", emocorpus::to_string(c)));
    }
    const auto& b = bands_.at(c);
    if (!(b.lo <= b.hi)) {
      throw Error(ErrorCode::InvalidBands,
                  fmt::format("empty FKGL band for {}", emocorpus::to_string(c)));
    }
  }
  for (std::size_t i = 0; i + 1 < kAllCefrLevels.size(); ++i) {
    const auto& lower = bands_.at(kAllCefrLevels[i]);
    const auto& upper = bands_.at(kAllCefrLevels[i + 1]);
    const bool ordered =
        lower.hi < upper.lo || (lower.hi == upper.lo && upper.lo_open);
    if (!ordered) {
      throw Error(ErrorCode::InvalidBands,
                  fmt::format("FKGL bands for {} and {} overlap or are "
                              "out of order",
                              emocorpus::to_string(kAllCefrLevels[i]),
                              emocorpus::to_string(kAllCefrLevels[i + 1])));
    }
  }
}

bool CefrBandTable::contains(Cefr level, double fkgl) const {
  return band(level).contains(fkgl);
}

std::string CefrBandTable::describe(Cefr level) const {
  const auto& b = band(level);
  return fmt::format("{}{}, {}]", b.lo_open ? '(' : '[', b.lo,
                     std::isinf(b.hi) ? std::string("inf")
                                      : fmt::format("{}", b.hi));
}

namespace {

Emotion require_target(const Dialogue& d) {
  if (!d.meta.target_emotion) {
    throw Error(ErrorCode::InvalidDialogue,
                fmt::format("dialogue '{}' has no target emotion", d.id));
  }
  return *d.meta.target_emotion;
}

std::optional<std::string> label_match(std::string_view label, Emotion target,
                                       const lexicon::EmotionLexicon& lexicon) {
  if (label == emocorpus::to_string(target) || lexicon.expresses(target, label)) {
    return std::string(label);
  }
  for (const auto& word : metrics::tokenize_words(label)) {
    if (lexicon.expresses(target, word)) return detail::to_lower(word);
  }
  return std::nullopt;
}

}  // namespace

CoherenceResult check_emotional_coherence(
    const Dialogue& d, const lexicon::EmotionLexicon& lexicon,
    CoherenceMode mode) {
  const Emotion target = require_target(d);
  for (const auto& t : d.turns) {
    if (t.role != Role::Client) continue;
    if (auto m = label_match(t.attitude, target, lexicon)) {
      return {true, std::move(m)};
    }
    if (mode == CoherenceMode::FirstClientTurn) break;
  }
  return {false, std::nullopt};
}

std::vector<IedViolation> check_ied(const Dialogue& d,
                                    const lexicon::EmotionLexicon& lexicon) {
  const Emotion target = require_target(d);
  std::vector<IedViolation> out;
  for (const auto& t : d.turns) {
    if (t.role != Role::Client) continue;
    for (const auto& token : metrics::tokenize_words(t.text)) {
      if (lexicon.expresses(target, token)) {
        out.push_back({t.index, detail::to_lower(token)});
        continue;
      }
      if (token.find('-') == std::string::npos) continue;
      std::size_t start = 0;
      while (start < token.size()) {
        auto dash = token.find('-', start);
        if (dash == std::string::npos) dash = token.size();
        const auto part = token.substr(start, dash - start);
        if (lexicon.expresses(target, part)) {
          out.push_back({t.index, detail::to_lower(part)});
        }
        start = dash + 1;
      }
    }
  }
  return out;
}

ComplexityResult check_complexity_coherence(const Dialogue& d,
                                            const CefrBandTable& bands,
                                            const metrics::ScoreConfig& scoring) {
  if (!d.meta.cefr) {
    throw Error(ErrorCode::InvalidDialogue,
                fmt::format("dialogue '{}' has no CEFR level", d.id));
  }
  std::vector<std::string_view> client;
  for (const auto& t : d.turns) {
    if (t.role == Role::Client) client.push_back(t.text);
  }
  const auto text = metrics::join_utterances(client);
  const auto counts =
      metrics::compute_counts(text, scoring.easy_words,
                              &scoring.syllable_exceptions, scoring.tokenizer);
  const double grade = metrics::fkgl(counts);  // throws DegenerateText
  return {bands.contains(*d.meta.cefr, grade), grade};
}

Disposition decide(std::optional<bool> emotional,
                   std::optional<bool> complexity, std::optional<Qoi> qoi) {
  if (!qoi) return Disposition::Pending;
  if (*qoi == Qoi::F) return Disposition::Rejected;
  return (emotional.value_or(false) && complexity.value_or(false))
             ? Disposition::Accepted
             : Disposition::Rejected;
}

Timestamp now_utc() {
  return std::chrono::floor<std::chrono::seconds>(
      std::chrono::system_clock::now());
}

GateRecord record_review(const GateRecord& rec, const ReviewInput& review) {
  if (rec.disposition != Disposition::Pending) {
    throw Error(ErrorCode::AlreadyDisposed,
                fmt::format("dialogue '{}' is already {}", rec.dialogue_id,
                            to_string(rec.disposition)));
  }
  GateRecord out = rec;
  if (review.emotional_coherence) {
    out.emotional_coherence = review.emotional_coherence;
  }
  if (review.complexity_coherence) {
    out.complexity_coherence = review.complexity_coherence;
  }
  out.qoi = review.qoi;
  out.reviewer = review.reviewer;
  out.reviewed_at = review.at.value_or(now_utc());
  out.disposition =
      decide(out.emotional_coherence, out.complexity_coherence, out.qoi);
  return out;
}

GateRecord auto_check(const Dialogue& d, const AutoCheckContext& ctx,
                      std::optional<Timestamp> at) {
  if (!ctx.lexicon) {
    throw Error(ErrorCode::InvalidValue, "auto_check needs an emotion lexicon");
  }
  GateRecord g;
  g.dialogue_id = d.id;
  g.auto_checked_at = at.value_or(now_utc());

  const auto ec = check_emotional_coherence(d, *ctx.lexicon, ctx.mode);
  g.emotional_coherence = ec.coherent;
  g.evidence.coherence_match = ec.matched;

  if (d.meta.implicit) g.ied_violations = check_ied(d, *ctx.lexicon);

  if (d.meta.cefr) g.evidence.band = ctx.bands.describe(*d.meta.cefr);
  try {
    const auto cc = check_complexity_coherence(d, ctx.bands, ctx.scoring);
    g.complexity_coherence = cc.coherent;
    g.evidence.client_fkgl = cc.fkgl;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateText) throw;
    g.complexity_coherence = false;
    g.evidence.complexity_error = e.what();
  }
  return g;
}

namespace {

std::string csv_bool(std::optional<bool> b) {
  return b ? (*b ? "true" : "false") : "";
}

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json opt_ts(const std::optional<Timestamp>& t) {
  return t ? nlohmann::json(transcript::format_timestamp(*t))
           : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

std::string to_csv_row(const GateRecord& g, const DialogueMeta& meta) {
  return fmt::format(
      "{},{},{},{},{},{},{},{}", g.dialogue_id,
      meta.target_emotion ? emocorpus::to_string(*meta.target_emotion) : "",
      meta.cefr ? emocorpus::to_string(*meta.cefr) : "",
      meta.implicit ? "true" : "false", csv_bool(g.emotional_coherence),
      csv_bool(g.complexity_coherence), g.qoi ? to_string(*g.qoi) : "",
      to_string(g.disposition));
}

nlohmann::json to_json(const GateRecord& g) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : g.ied_violations) {
    violations.push_back({{"turn", v.turn}, {"word", v.word}});
  }
  return {
      {"dialogue_id", g.dialogue_id},
      {"emotional_coherence", opt(g.emotional_coherence)},
      {"complexity_coherence", opt(g.complexity_coherence)},
      {"ied_violations", std::move(violations)},
      {"qoi", g.qoi ? nlohmann::json(to_string(*g.qoi)) : nlohmann::json(nullptr)},
      {"auto_checked_at", opt_ts(g.auto_checked_at)},
      {"reviewed_at", opt_ts(g.reviewed_at)},
      {"reviewer", opt(g.reviewer)},
      {"disposition", to_string(g.disposition)},
      {"evidence",
       {{"coherence_match", opt(g.evidence.coherence_match)},
        {"client_fkgl", opt(g.evidence.client_fkgl)},
        {"band", g.evidence.band},
        {"complexity_error", g.evidence.complexity_error}}},
  };
}

GateRecord gate_from_json(const nlohmann::json& j) {
  try {
    GateRecord g;
    g.dialogue_id = j.at("dialogue_id").get<std::string>();
    g.emotional_coherence = get_opt<bool>(j, "emotional_coherence");
    g.complexity_coherence = get_opt<bool>(j, "complexity_coherence");
    for (const auto& v : j.value("ied_violations", nlohmann::json::array())) {
      g.ied_violations.push_back(
          {v.at("turn").get<std::size_t>(), v.at("word").get<std::string>()});
    }
    if (auto q = get_opt<std::string>(j, "qoi")) {
      auto parsed = parse_qoi(*q);
      if (!parsed) throw Error(ErrorCode::CorruptRecord, "bad qoi " + *q);
      g.qoi = parsed;
    }
    if (auto t = get_opt<std::string>(j, "auto_checked_at")) {
      g.auto_checked_at = transcript::parse_timestamp(*t);
    }
    if (auto t = get_opt<std::string>(j, "reviewed_at")) {
      g.reviewed_at = transcript::parse_timestamp(*t);
    }
    g.reviewer = get_opt<std::string>(j, "reviewer");
    const auto disp = parse_disposition(j.at("disposition").get<std::string>());
    if (!disp) throw Error(ErrorCode::CorruptRecord, "bad disposition");
    g.disposition = *disp;
    if (auto it = j.find("evidence"); it != j.end() && it->is_object()) {
      g.evidence.coherence_match = get_opt<std::string>(*it, "coherence_match");
      g.evidence.client_fkgl = get_opt<double>(*it, "client_fkgl");
      g.evidence.band = it->value("band", std::string{});
      g.evidence.complexity_error = it->value("complexity_error", std::string{});
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptRecord,
                fmt::format("bad gate JSON: {}", e.what()));
  }
}

}  // namespace emocorpus::curation
