#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emocorpus/error.hpp"
#include "emocorpus/lexicons.hpp"
#include "emocorpus/types.hpp"

namespace emocorpus::gen {

inline constexpr const char* kDefaultScenario =
    "customer service of a hypothetical phone company";

struct PromptSpec {
  Emotion target_emotion = Emotion::Anger;
  Cefr cefr = Cefr::A2;
  bool implicit = false;
  std::string scenario = kDefaultScenario;
  std::size_t target_turns = 5;
  bool require_attitude_labels = true;

  /// Throws InvalidSpec.
  void validate() const;
  bool operator==(const PromptSpec&) const = default;
};

/// The six emotions x three levels x explicit/implicit, emotion-major.
std::vector<PromptSpec> full_grid(const std::string& scenario = kDefaultScenario);

struct ProviderConfig {
  /// "http" talks to a chat-completion endpoint; "mock" uses canned replies.
  std::string kind = "http";
  std::string name = "openai";
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  /// Name of the environment variable holding the key, never the key itself.
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{60'000};
  std::size_t max_retries = 3;
  std::size_t max_parallel = 4;
  double temperature = 0.7;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{8'000};

  /// Throws InvalidSpec.
  void validate() const;
};

struct GenerationResult {
  PromptSpec spec;
  std::string raw_text;
  std::string provider;
  std::string model;
  double temperature = 0;
  std::chrono::milliseconds latency{0};
  std::size_t attempt = 0;
};

nlohmann::json to_json(const PromptSpec& s);
nlohmann::json to_json(const GenerationResult& r);

/// Deterministic prompt text. `denylist` is only used when spec.implicit.
std::string build_prompt(const PromptSpec& spec,
                         const std::vector<std::string>& denylist = {});

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.7;
  std::chrono::milliseconds timeout{60'000};
  /// Not sent over the wire; lets test doubles key replies by grid cell.
  PromptSpec spec;
};

/// Failures worth retrying: 5xx, 429, connection resets, timeouts.
class TransientError : public Error {
 public:
  using Error::Error;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// Returns the assistant message text. Must be safe to call concurrently.
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// POSTs `{model, messages, temperature}` to `<endpoint>/chat/completions`.
class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(ProviderConfig config);
  std::string complete(const ChatRequest& request) override;

  /// Pulls the first choice's message content out of a response body.
  /// Throws MalformedResponse.
  static std::string extract_content(const std::string& body);

 private:
  ProviderConfig config_;
  std::string base_;    // scheme://host[:port]
  std::string prefix_;  // path part of the endpoint, no trailing slash
};

/// Replies from a script. Each reply is either text or an error to throw.
class MockChatProvider : public ChatProvider {
 public:
  struct Reply {
    std::optional<std::string> text;
    ErrorCode error = ErrorCode::ProviderUnavailable;
    bool transient = true;
    std::chrono::milliseconds delay{0};
  };
  using Script = std::function<Reply(const ChatRequest&, std::size_t call)>;

  /// Without a script every request gets canned_transcript(spec).
  MockChatProvider() = default;
  explicit MockChatProvider(Script script) : script_(std::move(script)) {}

  /// Queue of replies consumed in call order; the last one repeats.
  static MockChatProvider sequence(std::vector<Reply> replies);

  std::string complete(const ChatRequest& request) override;
  std::size_t calls() const;
  std::vector<std::string> prompts() const;

 private:
  Script script_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
  std::vector<std::string> prompts_;
};

/// A small well-formed transcript for the grid cell, with attitude labels and
/// Client wording chosen to avoid naming the emotion.
std::string canned_transcript(const PromptSpec& spec);

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config);

/// Supplies implicit-mode denylists; may be null.
struct GenerateContext {
  const lexicon::EmotionLexicon* lexicon = nullptr;
  /// Replaceable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Retries TransientError with exponential backoff. The final transient
/// failure is rethrown as ProviderUnavailable or Timeout.
GenerationResult generate(const PromptSpec& spec, const ProviderConfig& config,
                          ChatProvider& provider,
                          const GenerateContext& ctx = {});

struct BatchItem {
  PromptSpec spec;
  std::optional<GenerationResult> result;
  std::optional<ErrorCode> error;
  std::string error_message;

  bool ok() const { return result.has_value(); }
};

/// Results come back in input order. Throws InvalidSpec on an empty list.
std::vector<BatchItem> generate_batch(const std::vector<PromptSpec>& specs,
                                      const ProviderConfig& config,
                                      ChatProvider& provider,
                                      const GenerateContext& ctx = {});

}  // namespace emocorpus::gen
