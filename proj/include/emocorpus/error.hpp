#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emocorpus {

enum class ErrorCode {
  // transcript
  MalformedLine,
  UnknownSpeaker,
  EmptyDialogue,
  UnexpectedFirstSpeaker,
  InvalidDialogue,
  // textmetrics
  DegenerateText,
  UnknownFeature,
  // lexicons
  IoError,
  EmptyList,
  EncodingError,
  MissingEmotionFile,
  DuplicateAcrossEmotions,
  // generator
  ProviderUnavailable,
  Timeout,
  AuthFailure,
  MalformedResponse,
  InvalidSpec,
  // curation
  AlreadyDisposed,
  InvalidBands,
  // sampler
  EmptyStratum,
  CapTooSmall,
  // store
  DuplicateId,
  UnknownId,
  StoreLocked,
  CorruptRecord,
  // config / usage
  InvalidValue,
};

/// Stable snake_case name, used in JSON error bodies and CLI messages.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse errors carry the 1-based line they refer to (0 when not line-bound).
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line_no, const std::string& message)
      : Error(code, message), line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

}  // namespace emocorpus
