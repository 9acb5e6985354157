#include "emocorpus/generator.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

namespace emocorpus::gen {

using nlohmann::json;

void PromptSpec::validate() const {
  if (target_turns < 2) {
    throw Error(ErrorCode::InvalidSpec,
                fmt::format("target_turns must be at least 2 (got {})",
                            target_turns));
  }
  if (scenario.empty()) throw Error(ErrorCode::InvalidSpec, "empty scenario");
}

std::vector<PromptSpec> full_grid(const std::string& scenario) {
  std::vector<PromptSpec> grid;
  for (Emotion e : kAllEmotions) {
    for (Cefr c : kAllCefrLevels) {
      for (bool implicit : {false, true}) {
        PromptSpec s;
        s.target_emotion = e;
        s.cefr = c;
        s.implicit = implicit;
        s.scenario = scenario;
        grid.push_back(s);
      }
    }
  }
  return grid;
}

void ProviderConfig::validate() const {
  if (kind != "http" && kind != "mock") {
    throw Error(ErrorCode::InvalidSpec,
                fmt::format("unknown provider kind '{}'", kind));
  }
  if (max_parallel < 1) {
    throw Error(ErrorCode::InvalidSpec, "max_parallel must be at least 1");
  }
  if (timeout.count() <= 0) {
    throw Error(ErrorCode::InvalidSpec, "timeout must be positive");
  }
  if (kind == "http" && endpoint.find("://") == std::string::npos) {
    throw Error(ErrorCode::InvalidSpec,
                fmt::format("endpoint '{}' is not an absolute URL", endpoint));
  }
}

json to_json(const PromptSpec& s) {
  return {{"target_emotion", to_string(s.target_emotion)},
          {"cefr", to_string(s.cefr)},
          {"implicit", s.implicit},
          {"scenario", s.scenario},
          {"target_turns", s.target_turns},
          {"require_attitude_labels", s.require_attitude_labels}};
}

json to_json(const GenerationResult& r) {
  return {{"spec", to_json(r.spec)},
          {"raw_text", r.raw_text},
          {"provider", r.provider},
          {"model", r.model},
          {"temperature", r.temperature},
          {"latency_ms", r.latency.count()},
          {"attempt", r.attempt}};
}

std::string build_prompt(const PromptSpec& spec,
                         const std::vector<std::string>& denylist) {
  spec.validate();
  std::string p;
  p += fmt::format(
      "Write a short, interactive dialogue between a Client and an Agent in "
      "the setting of {}.\n",
      spec.scenario);
  p += fmt::format(
      "The dialogue should have approximately {} turns for each speaker, "
      "starting with the Client.\n",
      spec.target_turns);
  p += fmt::format("The Client expresses the emotion {}.\n",
                   to_string(spec.target_emotion));
  p += fmt::format(
      "The Client writes at CEFR level {}: vocabulary and sentence "
      "structure must match that level.\n",
      to_string(spec.cefr));
  if (spec.require_attitude_labels) {
    p += "Please label each turn with the speaker's attitude in parentheses.\n";
  }
  p += "Write every turn on its own line in exactly this format:\n";
  p += "Client (attitude): ...\n";
  p += "Agent (attitude): ...\n";
  if (spec.implicit) {
    p += fmt::format(
        "The Client must convey {} implicitly, through tone and content only. "
        "In the Client's lines, do not use any of these words: ",
        to_string(spec.target_emotion));
    for (std::size_t i = 0; i < denylist.size(); ++i) {
      if (i) p += ", ";
      p += denylist[i];
    }
    p += ".\n";
  }
  p += "Output only the dialogue lines, with no title or commentary.\n";
  return p;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  std::string base = url.substr(0, path_start);
  std::string prefix =
      path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base, prefix};
}

}  // namespace

HttpChatProvider::HttpChatProvider(ProviderConfig config)
    : config_(std::move(config)) {
  config_.validate();
  std::tie(base_, prefix_) = split_endpoint(config_.endpoint);
}

std::string HttpChatProvider::extract_content(const std::string& body) {
  if (body.empty()) {
    throw Error(ErrorCode::MalformedResponse, "provider returned an empty body");
  }
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::MalformedResponse, "provider response is not JSON");
  }
  const json* content = nullptr;
  if (j.is_object() && j.contains("choices") && j["choices"].is_array() &&
      !j["choices"].empty()) {
    const auto& choice = j["choices"][0];
    if (choice.is_object() && choice.contains("message") &&
        choice["message"].is_object() && choice["message"].contains("content")) {
      content = &choice["message"]["content"];
    }
  }
  if (!content || !content->is_string() || content->get<std::string>().empty()) {
    throw Error(ErrorCode::MalformedResponse,
                "provider response has no assistant message content");
  }
  return content->get<std::string>();
}

std::string HttpChatProvider::complete(const ChatRequest& request) {
  httplib::Client cli(base_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      request.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) {
      throw Error(ErrorCode::AuthFailure,
                  fmt::format("environment variable {} is not set",
                              config_.api_key_env));
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const json body = {
      {"model", request.model},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature}};
  auto res = cli.Post(prefix_ + "/chat/completions", headers, body.dump(),
                      "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
      throw TransientError(ErrorCode::Timeout,
                           fmt::format("request to {} failed: {}", base_,
                                       httplib::to_string(err)));
    }
    throw TransientError(ErrorCode::ProviderUnavailable,
                         fmt::format("cannot reach {}: {}", base_,
                                     httplib::to_string(err)));
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw Error(ErrorCode::AuthFailure,
                fmt::format("provider rejected the credentials (HTTP {})", status));
  }
  if (status == 429 || status >= 500) {
    throw TransientError(ErrorCode::ProviderUnavailable,
                         fmt::format("provider returned HTTP {}", status));
  }
  if (status != 200) {
    throw Error(ErrorCode::ProviderUnavailable,
                fmt::format("provider returned HTTP {}", status));
  }
  return extract_content(res->body);
}

// ---------------------------------------------------------------------------

MockChatProvider MockChatProvider::sequence(std::vector<Reply> replies) {
  if (replies.empty()) throw Error(ErrorCode::InvalidSpec, "empty mock script");
  return MockChatProvider(
      [replies = std::move(replies)](const ChatRequest&, std::size_t call) {
        return replies[std::min(call, replies.size() - 1)];
      });
}

std::string MockChatProvider::complete(const ChatRequest& request) {
  std::size_t call;
  {
    std::lock_guard lock(mu_);
    call = calls_++;
    prompts_.push_back(request.prompt);
  }
  if (!script_) return canned_transcript(request.spec);
  const Reply reply = script_(request, call);
  if (reply.delay.count() > 0) std::this_thread::sleep_for(reply.delay);
  if (reply.text) {
    if (reply.text->empty()) {
      throw Error(ErrorCode::MalformedResponse, "provider returned an empty body");
    }
    return *reply.text;
  }
  const auto msg = fmt::format("scripted failure on call {}", call + 1);
  if (reply.transient) throw TransientError(reply.error, msg);
  throw Error(reply.error, msg);
}

std::size_t MockChatProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::vector<std::string> MockChatProvider::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

std::string canned_transcript(const PromptSpec& spec) {
  std::string_view label;
  switch (spec.target_emotion) {
    case Emotion::Joy: label = "happy"; break;
    case Emotion::Sadness: label = "sad"; break;
    case Emotion::Anger: label = "angry"; break;
    case Emotion::Fear: label = "afraid"; break;
    case Emotion::Surprise: label = "surprised"; break;
    case Emotion::Disgust: label = "disgusted"; break;
  }
  static constexpr std::array<std::array<std::string_view, 3>, 3> kClient = {{
      {"Hello, I am calling because my phone is not working today. I use it "
       "every day for my work, so I really need some help.",
       "Yes, I did that two times this morning. The screen is still black "
       "and nothing happens.",
       "OK. Can somebody come to my house today after five o'clock?"},
      {"Good afternoon. My phone stopped working this morning, and I rely on "
       "it for my job every day.",
       "I have already restarted it several times, but the screen remains "
       "completely black.",
       "That would be helpful, although I would prefer an appointment later "
       "this afternoon."},
      {"Good afternoon. I am contacting you regarding a persistent malfunction "
       "affecting my mobile device, which has rendered it entirely unusable.",
       "I have attempted numerous troubleshooting procedures, including "
       "restarting and recharging, without any discernible improvement.",
       "An appointment this evening would be acceptable, provided the "
       "technician can guarantee a comprehensive resolution."},
  }};
  const auto& client = kClient[static_cast<std::size_t>(spec.cefr)];
  return fmt::format(
      "Client ({}): {}\n"
      "Agent (calm): I am sorry to hear that. Have you tried restarting it?\n"
      "Client (impatient): {}\n"
      "Agent (helpful): Thank you. I can send a technician to help you.\n"
      "Client (resigned): {}\n"
      "Agent (reassuring): Yes. The technician will visit you this evening.\n",
      label, client[0], client[1], client[2]);
}

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config) {
  config.validate();
  if (config.kind == "mock") return std::make_unique<MockChatProvider>();
  return std::make_unique<HttpChatProvider>(config);
}

// ---------------------------------------------------------------------------

GenerationResult generate(const PromptSpec& spec, const ProviderConfig& config,
                          ChatProvider& provider, const GenerateContext& ctx) {
  config.validate();
  std::vector<std::string> denylist;
  if (spec.implicit && ctx.lexicon) {
    denylist = ctx.lexicon->words_for(spec.target_emotion).to_vector();
  }
  ChatRequest req;
  req.model = config.model;
  req.prompt = build_prompt(spec, denylist);
  req.temperature = config.temperature;
  req.timeout = config.timeout;
  req.spec = spec;

  const auto sleep = ctx.sleep ? ctx.sleep : [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
  const std::size_t attempts = config.max_retries + 1;
  auto delay = config.backoff_base;
  for (std::size_t attempt = 1;; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    try {
      std::string text = provider.complete(req);
      if (text.empty()) {
        throw Error(ErrorCode::MalformedResponse, "provider returned empty text");
      }
      GenerationResult r;
      r.spec = spec;
      r.raw_text = std::move(text);
      r.provider = config.name;
      r.model = config.model;
      r.temperature = config.temperature;
      r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      r.attempt = attempt;
      return r;
    } catch (const TransientError& e) {
      if (attempt >= attempts) {
        throw Error(e.code(), fmt::format("{} (after {} attempts)", e.what(),
                                          attempt));
      }
    }
    sleep(delay);
    delay = std::min(delay * 2, config.backoff_cap);
  }
}

std::vector<BatchItem> generate_batch(const std::vector<PromptSpec>& specs,
                                      const ProviderConfig& config,
                                      ChatProvider& provider,
                                      const GenerateContext& ctx) {
  if (specs.empty()) {
    throw Error(ErrorCode::InvalidSpec, "generate_batch needs at least one spec");
  }
  config.validate();
  std::vector<BatchItem> items(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < specs.size();) {
      auto& item = items[i];
      item.spec = specs[i];
      try {
        item.result = generate(specs[i], config, provider, ctx);
      } catch (const Error& e) {
        item.error = e.code();
        item.error_message = e.what();
      } catch (const std::exception& e) {
        item.error = ErrorCode::ProviderUnavailable;
        item.error_message = e.what();
      }
    }
  };
  const std::size_t n = std::min(config.max_parallel, specs.size());
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return items;
}

}  // namespace emocorpus::gen
