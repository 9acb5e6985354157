#include "emocorpus/transcript.hpp"

#include <algorithm>
#include <cstdio>

#include <fmt/format.h>

#include "emocorpus/error.hpp"
#include "text_util.hpp"

namespace emocorpus::transcript {

using detail::is_space;
using detail::trim;

namespace {

bool token_matches(std::string_view token,
                   const std::vector<std::string>& candidates) {
  const auto lowered = detail::to_lower(token);
  return std::any_of(candidates.begin(), candidates.end(),
                     [&](const std::string& c) {
                       return detail::to_lower(c) == lowered;
                     });
}

// Lowercases and collapses internal whitespace runs to one space.
std::string normalize_attitude(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(raw)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(detail::lower(c));
  }
  return out;
}

[[noreturn]] void malformed(std::size_t line_no, std::string_view why) {
  throw ParseError(ErrorCode::MalformedLine, line_no,
                   fmt::format("line {}: {}", line_no, why));
}

}  // namespace

bool is_valid_attitude(std::string_view label) {
  if (trim(label).empty()) return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return detail::is_ascii_alpha(c) || c == ' ' || c == '-' ||
           static_cast<unsigned char>(c) >= 0x80;
  });
}

Dialogue parse(std::string_view input, const ParseOptions& options) {
  Dialogue d;
  const auto lines = detail::split_lines(detail::strip_bom(input));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = trim(lines[i]);
    if (line.empty()) continue;

    const auto open = line.find('(');
    const auto colon = line.find(':');
    if (open == std::string_view::npos ||
        (colon != std::string_view::npos && colon < open)) {
      malformed(line_no, "expected 'Speaker (attitude): text'");
    }
    const auto close = line.find(')', open + 1);
    if (close == std::string_view::npos) {
      malformed(line_no, "unterminated attitude label");
    }
    auto rest = trim(line.substr(close + 1));
    if (rest.empty() || rest.front() != ':') {
      malformed(line_no, "missing ':' after attitude label");
    }
    const auto speaker = trim(line.substr(0, open));
    const auto attitude_raw = line.substr(open + 1, close - open - 1);
    const auto text = trim(rest.substr(1));
    if (speaker.empty()) malformed(line_no, "missing speaker");
    if (!is_valid_attitude(attitude_raw)) {
      malformed(line_no, "attitude must be letters, spaces or hyphens");
    }
    if (text.empty()) malformed(line_no, "empty utterance");

    Role role;
    if (token_matches(speaker, options.client_tokens)) {
      role = Role::Client;
    } else if (token_matches(speaker, options.agent_tokens)) {
      role = Role::Agent;
    } else {
      throw ParseError(ErrorCode::UnknownSpeaker, line_no,
                       fmt::format("line {}: unknown speaker '{}'", line_no,
                                   speaker));
    }
    if (d.turns.empty() && options.first_role && role != *options.first_role) {
      throw ParseError(
          ErrorCode::UnexpectedFirstSpeaker, line_no,
          fmt::format("line {}: dialogue must open with {}", line_no,
                      to_string(*options.first_role)));
    }
    d.turns.push_back(Turn{d.turns.size(), role,
                           normalize_attitude(attitude_raw),
                           std::string(text)});
  }
  if (d.turns.empty()) {
    throw ParseError(ErrorCode::EmptyDialogue, 0, "no turns in transcript");
  }
  return d;
}

std::string serialize(const Dialogue& d) {
  std::string out;
  for (const auto& t : d.turns) {
    out += fmt::format("{} ({}): {}\n", to_string(t.role), t.attitude, t.text);
  }
  return out;
}

AttitudeChain extract_attitude_chain(const Dialogue& d) {
  AttitudeChain chain;
  chain.entries.reserve(d.turns.size());
  for (const auto& t : d.turns) chain.entries.emplace_back(t.role, t.attitude);
  return chain;
}

std::string format_chain(const AttitudeChain& chain) {
  std::string out;
  for (const auto& [role, attitude] : chain.entries) {
    if (!out.empty()) out += " -> ";
    out += fmt::format("{} ({})", to_string(role), attitude);
  }
  return out;
}

namespace {

struct PatternPiece {
  std::vector<std::string> words;  // lowercased, whitespace-separated pieces
};

// Length of the match of `pattern` at `pos`, or 0.
std::size_t match_at(std::string_view text, std::size_t pos,
                     const PatternPiece& pattern) {
  std::size_t cur = pos;
  for (std::size_t w = 0; w < pattern.words.size(); ++w) {
    if (w > 0) {
      const auto ws_start = cur;
      while (cur < text.size() && is_space(text[cur])) ++cur;
      if (cur == ws_start) return 0;
    }
    const auto& word = pattern.words[w];
    if (cur + word.size() > text.size()) return 0;
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (detail::lower(text[cur + k]) != word[k]) return 0;
    }
    cur += word.size();
  }
  const auto& first = pattern.words.front();
  const auto& last = pattern.words.back();
  if (detail::is_word_byte(first.front()) && pos > 0 &&
      detail::is_word_byte(text[pos - 1])) {
    return 0;
  }
  if (detail::is_word_byte(last.back()) && cur < text.size() &&
      detail::is_word_byte(text[cur])) {
    return 0;
  }
  return cur - pos;
}

std::vector<PatternPiece> compile(const std::vector<std::string>& denylist) {
  std::vector<PatternPiece> out;
  for (const auto& raw : denylist) {
    PatternPiece p;
    std::string word;
    for (char c : raw) {
      if (is_space(c)) {
        if (!word.empty()) p.words.push_back(std::move(word));
        word.clear();
      } else {
        word.push_back(detail::lower(c));
      }
    }
    if (!word.empty()) p.words.push_back(std::move(word));
    if (!p.words.empty()) out.push_back(std::move(p));
  }
  // Longest pattern wins at a given position.
  std::stable_sort(out.begin(), out.end(),
                   [](const PatternPiece& a, const PatternPiece& b) {
                     std::size_t la = 0, lb = 0;
                     for (const auto& w : a.words) la += w.size() + 1;
                     for (const auto& w : b.words) lb += w.size() + 1;
                     return la > lb;
                   });
  return out;
}

}  // namespace

std::string redact_text(std::string_view text,
                        const std::vector<std::string>& denylist) {
  const auto patterns = compile(denylist);
  if (patterns.empty()) return std::string(text);
  const PatternPiece replacement{{"brand", "model"}};

  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (auto n = match_at(text, pos, replacement); n > 0) {
      out.append(text.substr(pos, n));
      pos += n;
      continue;
    }
    std::size_t matched = 0;
    for (const auto& p : patterns) {
      matched = match_at(text, pos, p);
      if (matched > 0) break;
    }
    if (matched > 0) {
      out.append(kBrandReplacement);
      pos += matched;
    } else {
      out.push_back(text[pos]);
      ++pos;
    }
  }
  return out;
}

Dialogue redact_brands(const Dialogue& d,
                       const std::vector<std::string>& denylist) {
  Dialogue out = d;
  for (auto& t : out.turns) t.text = redact_text(t.text, denylist);
  return out;
}

void validate(const Dialogue& d, std::optional<Role> first_role) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidDialogue,
                fmt::format("dialogue '{}': {}", d.id, why));
  };
  if (d.turns.empty()) fail("no turns");
  if (first_role && d.turns.front().role != *first_role) {
    fail(fmt::format("first turn must be {}", to_string(*first_role)));
  }
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const auto& t = d.turns[i];
    if (t.index != i) fail(fmt::format("turn {} has index {}", i, t.index));
    if (!is_valid_attitude(t.attitude) || t.attitude != normalize_attitude(t.attitude)) {
      fail(fmt::format("turn {} has invalid attitude '{}'", i, t.attitude));
    }
    if (trim(t.text).empty() || trim(t.text).size() != t.text.size()) {
      fail(fmt::format("turn {} text is empty or untrimmed", i));
    }
    if (t.text.find('\n') != std::string::npos ||
        t.text.find('\r') != std::string::npos) {
      fail(fmt::format("turn {} text contains a line break", i));
    }
  }
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z",
                     static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count());
}

Timestamp parse_timestamp(std::string_view s) {
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, se = 0;
  char z = 0;
  const std::string str(s);
  if (std::sscanf(str.c_str(), "%d-%u-%uT%u:%u:%u%c", &y, &mo, &d, &h, &mi,
                  &se, &z) != 7 ||
      z != 'Z') {
    throw Error(ErrorCode::InvalidValue,
                fmt::format("bad UTC timestamp '{}'", s));
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 60) {
    throw Error(ErrorCode::InvalidValue,
                fmt::format("bad UTC timestamp '{}'", s));
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
}

nlohmann::json to_json(const Dialogue& d) {
  nlohmann::json meta = {
      {"target_emotion", d.meta.target_emotion
                             ? nlohmann::json(to_string(*d.meta.target_emotion))
                             : nlohmann::json(nullptr)},
      {"cefr", d.meta.cefr ? nlohmann::json(to_string(*d.meta.cefr))
                           : nlohmann::json(nullptr)},
      {"implicit", d.meta.implicit},
      {"scenario", d.meta.scenario},
      {"provider", d.meta.provider},
      {"created_at", d.meta.created_at
                         ? nlohmann::json(format_timestamp(*d.meta.created_at))
                         : nlohmann::json(nullptr)},
  };
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : d.turns) {
    turns.push_back(
        {{"role", to_string(t.role)}, {"attitude", t.attitude}, {"text", t.text}});
  }
  return {{"id", d.id}, {"meta", std::move(meta)}, {"turns", std::move(turns)}};
}

Dialogue dialogue_from_json(const nlohmann::json& j) {
  try {
    Dialogue d;
    d.id = j.at("id").get<std::string>();
    const auto& m = j.at("meta");
    if (auto it = m.find("target_emotion"); it != m.end() && !it->is_null()) {
      d.meta.target_emotion = emotion_from_string(it->get<std::string>());
    }
    if (auto it = m.find("cefr"); it != m.end() && !it->is_null()) {
      d.meta.cefr = cefr_from_string(it->get<std::string>());
    }
    d.meta.implicit = m.value("implicit", false);
    d.meta.scenario = m.value("scenario", std::string{});
    d.meta.provider = m.value("provider", std::string{});
    if (auto it = m.find("created_at"); it != m.end() && !it->is_null()) {
      d.meta.created_at = parse_timestamp(it->get<std::string>());
    }
    for (const auto& t : j.at("turns")) {
      d.turns.push_back(Turn{d.turns.size(),
                             role_from_string(t.at("role").get<std::string>()),
                             t.at("attitude").get<std::string>(),
                             t.at("text").get<std::string>()});
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptRecord,
                fmt::format("bad dialogue JSON: {}", e.what()));
  }
}

nlohmann::json to_json(const AttitudeChain& c) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [role, attitude] : c.entries) {
    arr.push_back({to_string(role), attitude});
  }
  return arr;
}

AttitudeChain chain_from_json(const nlohmann::json& j) {
  AttitudeChain c;
  try {
    for (const auto& e : j) {
      c.entries.emplace_back(role_from_string(e.at(0).get<std::string>()),
                             e.at(1).get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptRecord,
                fmt::format("bad chain JSON: {}", e.what()));
  }
  return c;
}

}  // namespace emocorpus::transcript
