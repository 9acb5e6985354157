#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emocorpus/lexicons.hpp"
#include "emocorpus/textmetrics.hpp"
#include "emocorpus/transcript.hpp"

namespace emocorpus::curation {

enum class Qoi { S, A, F };
enum class Disposition { Pending, Accepted, Rejected };

std::string_view to_string(Qoi q) noexcept;
std::string_view to_string(Disposition d) noexcept;
std::optional<Qoi> parse_qoi(std::string_view s) noexcept;
std::optional<Disposition> parse_disposition(std::string_view s) noexcept;

struct IedViolation {
  std::size_t turn = 0;
  std::string word;

  bool operator==(const IedViolation&) const = default;
};

/// FKGL interval for one CEFR level. The lower end may be open so adjacent
/// bands can share a boundary value.
struct Band {
  double lo = 0;
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;

  bool contains(double x) const {
    return (lo_open ? x > lo : x >= lo) && x <= hi;
  }
  bool operator==(const Band&) const = default;
};

class CefrBandTable {
 public:
  /// A2 [0, 5], B2 (5, 9], C2 (9, inf).
  CefrBandTable();
  /// Throws InvalidBands unless A2 < B2 < C2 without overlap.
  explicit CefrBandTable(std::map<Cefr, Band> bands);

  const Band& band(Cefr level) const { return bands_.at(level); }
  bool contains(Cefr level, double fkgl) const;
  std::string describe(Cefr level) const;

 private:
  std::map<Cefr, Band> bands_;
};

/// Machine-filled evidence shown to the reviewer.
struct AutoEvidence {
  std::optional<std::string> coherence_match;  // matched label or word
  std::optional<double> client_fkgl;
  std::string band;
  std::string complexity_error;  // set when FKGL could not be computed

  bool operator==(const AutoEvidence&) const = default;
};

struct GateRecord {
  std::string dialogue_id;
  std::optional<bool> emotional_coherence;
  std::optional<bool> complexity_coherence;
  std::vector<IedViolation> ied_violations;
  std::optional<Qoi> qoi;
  std::optional<Timestamp> auto_checked_at;
  std::optional<Timestamp> reviewed_at;
  std::optional<std::string> reviewer;
  Disposition disposition = Disposition::Pending;
  AutoEvidence evidence;

  bool operator==(const GateRecord&) const = default;
};

enum class CoherenceMode { FirstClientTurn, AnyClientTurn };

struct CoherenceResult {
  bool coherent = false;
  std::optional<std::string> matched;
};

CoherenceResult check_emotional_coherence(
    const Dialogue& d, const lexicon::EmotionLexicon& lexicon,
    CoherenceMode mode = CoherenceMode::FirstClientTurn);

/// Whole-word, case-insensitive hits of the target emotion's words in Client
/// utterances. Attitude labels are not scanned.
std::vector<IedViolation> check_ied(const Dialogue& d,
                                    const lexicon::EmotionLexicon& lexicon);

struct ComplexityResult {
  bool coherent = false;
  double fkgl = 0;
};

/// FKGL of the concatenated Client utterances against the level's band.
/// Throws DegenerateText when there is no Client text.
ComplexityResult check_complexity_coherence(
    const Dialogue& d, const CefrBandTable& bands,
    const metrics::ScoreConfig& scoring = {});

/// Pure disposition rule: accepted only for (true, true, S|A).
Disposition decide(std::optional<bool> emotional,
                   std::optional<bool> complexity, std::optional<Qoi> qoi);

struct ReviewInput {
  Qoi qoi = Qoi::F;
  std::string reviewer;
  std::optional<bool> emotional_coherence;   // reviewer override
  std::optional<bool> complexity_coherence;  // reviewer override
  std::optional<Timestamp> at;               // defaults to now
};

/// Throws AlreadyDisposed unless `rec` is pending.
GateRecord record_review(const GateRecord& rec, const ReviewInput& review);

struct AutoCheckContext {
  const lexicon::EmotionLexicon* lexicon = nullptr;
  CefrBandTable bands;
  metrics::ScoreConfig scoring;
  CoherenceMode mode = CoherenceMode::FirstClientTurn;
};

/// Runs every automatic gate and returns a pending record pre-filled with
/// booleans and evidence.
GateRecord auto_check(const Dialogue& d, const AutoCheckContext& ctx,
                      std::optional<Timestamp> at = std::nullopt);

Timestamp now_utc();

inline constexpr std::string_view kGateCsvHeader =
    "dialogue_id,emotion,cefr,implicit,emotional_coherence,"
    "complexity_coherence,qoi,disposition";
std::string to_csv_row(const GateRecord& g, const DialogueMeta& meta);

nlohmann::json to_json(const GateRecord& g);
GateRecord gate_from_json(const nlohmann::json& j);

}  // namespace emocorpus::curation
