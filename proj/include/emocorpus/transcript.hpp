#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emocorpus/types.hpp"

namespace emocorpus {

using Timestamp = std::chrono::sys_seconds;

struct Turn {
  std::size_t index = 0;
  Role role = Role::Client;
  std::string attitude;  // lowercase
  std::string text;

  bool operator==(const Turn&) const = default;
};

struct DialogueMeta {
  std::optional<Emotion> target_emotion;
  std::optional<Cefr> cefr;
  bool implicit = false;
  std::string scenario;
  std::string provider;
  std::optional<Timestamp> created_at;

  bool operator==(const DialogueMeta&) const = default;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;
  DialogueMeta meta;

  bool operator==(const Dialogue&) const = default;
};

struct AttitudeChain {
  std::vector<std::pair<Role, std::string>> entries;

  bool operator==(const AttitudeChain&) const = default;
};

/// Maps speaker tokens in transcript text to the two roles. Tokens are
/// matched case-insensitively; serialization always writes the canonical
/// role names.
struct ParseOptions {
  std::vector<std::string> client_tokens{"Client", "Customer"};
  std::vector<std::string> agent_tokens{"Agent"};
  /// When set, the first parsed turn must have this role.
  std::optional<Role> first_role = Role::Client;
};

namespace transcript {

/// Parses `Speaker (attitude): text` lines. Blank lines are skipped; every
/// other line yields a turn or throws ParseError with its 1-based line number.
Dialogue parse(std::string_view input, const ParseOptions& options = {});

/// One `Role (attitude): text\n` line per turn.
std::string serialize(const Dialogue& d);

AttitudeChain extract_attitude_chain(const Dialogue& d);

/// "Client (angry) -> Agent (calm) -> ..." for display.
std::string format_chain(const AttitudeChain& chain);

inline constexpr std::string_view kBrandReplacement = "Brand Model";

/// Replaces every case-insensitive, word-bounded match of a denylist pattern
/// in turn texts with "Brand Model". Whitespace inside a pattern matches any
/// run of whitespace. Existing "Brand Model" spans are never re-matched.
Dialogue redact_brands(const Dialogue& d,
                       const std::vector<std::string>& denylist);
std::string redact_text(std::string_view text,
                        const std::vector<std::string>& denylist);

/// Throws Error(InvalidDialogue) naming the first violated invariant.
void validate(const Dialogue& d, std::optional<Role> first_role = Role::Client);

/// True when `label` is non-empty and holds only letters, spaces, hyphens.
bool is_valid_attitude(std::string_view label);

nlohmann::json to_json(const Dialogue& d);
Dialogue dialogue_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AttitudeChain& c);
AttitudeChain chain_from_json(const nlohmann::json& j);

std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view s);

}  // namespace transcript
}  // namespace emocorpus
