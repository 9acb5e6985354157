#include "emocorpus/types.hpp"

#include <algorithm>
#include <cctype>

#include "emocorpus/error.hpp"

namespace emocorpus {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedLine: return "malformed_line";
    case ErrorCode::UnknownSpeaker: return "unknown_speaker";
    case ErrorCode::EmptyDialogue: return "empty_dialogue";
    case ErrorCode::UnexpectedFirstSpeaker: return "unexpected_first_speaker";
    case ErrorCode::InvalidDialogue: return "invalid_dialogue";
    case ErrorCode::DegenerateText: return "degenerate_text";
    case ErrorCode::UnknownFeature: return "unknown_feature";
    case ErrorCode::IoError: return "io_error";
    case ErrorCode::EmptyList: return "empty_list";
    case ErrorCode::EncodingError: return "encoding_error";
    case ErrorCode::MissingEmotionFile: return "missing_emotion_file";
    case ErrorCode::DuplicateAcrossEmotions: return "duplicate_across_emotions";
    case ErrorCode::ProviderUnavailable: return "provider_unavailable";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::AuthFailure: return "auth_failure";
    case ErrorCode::MalformedResponse: return "malformed_response";
    case ErrorCode::InvalidSpec: return "invalid_spec";
    case ErrorCode::AlreadyDisposed: return "already_disposed";
    case ErrorCode::InvalidBands: return "invalid_bands";
    case ErrorCode::EmptyStratum: return "empty_stratum";
    case ErrorCode::CapTooSmall: return "cap_too_small";
    case ErrorCode::DuplicateId: return "duplicate_id";
    case ErrorCode::UnknownId: return "unknown_id";
    case ErrorCode::StoreLocked: return "store_locked";
    case ErrorCode::CorruptRecord: return "corrupt_record";
    case ErrorCode::InvalidValue: return "invalid_value";
  }
  return "unknown";
}

std::string_view to_string(Emotion e) noexcept {
  switch (e) {
    case Emotion::Joy: return "joy";
    case Emotion::Sadness: return "sadness";
    case Emotion::Anger: return "anger";
    case Emotion::Fear: return "fear";
    case Emotion::Surprise: return "surprise";
    case Emotion::Disgust: return "disgust";
  }
  return "";
}

std::string_view to_string(Cefr c) noexcept {
  switch (c) {
    case Cefr::A2: return "A2";
    case Cefr::B2: return "B2";
    case Cefr::C2: return "C2";
  }
  return "";
}

std::string_view to_string(Role r) noexcept {
  return r == Role::Client ? "Client" : "Agent";
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<E, N>& all, std::string_view s) {
  for (E e : all) {
    if (iequals(to_string(e), s)) return e;
  }
  return std::nullopt;
}

template <typename E>
E require(std::optional<E> v, std::string_view what, std::string_view s) {
  if (!v) {
    throw Error(ErrorCode::InvalidValue,
                std::string(what) + " '" + std::string(s) +
                    "' is not in the allowed set");
  }
  return *v;
}

}  // namespace

std::optional<Emotion> parse_emotion(std::string_view s) noexcept {
  return lookup(kAllEmotions, s);
}
std::optional<Cefr> parse_cefr(std::string_view s) noexcept {
  return lookup(kAllCefrLevels, s);
}
std::optional<Role> parse_role(std::string_view s) noexcept {
  return lookup(kAllRoles, s);
}

Emotion emotion_from_string(std::string_view s) {
  return require(parse_emotion(s), "emotion", s);
}
Cefr cefr_from_string(std::string_view s) {
  return require(parse_cefr(s), "CEFR level", s);
}
Role role_from_string(std::string_view s) {
  return require(parse_role(s), "role", s);
}

}  // namespace emocorpus
