#include "emocorpus/service.hpp"

#include <charconv>

#include <fmt/format.h>
#include <httplib.h>

#include "emocorpus/curation.hpp"

namespace emocorpus::service {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownId: return 404;
    case ErrorCode::AlreadyDisposed: return 409;
    case ErrorCode::InvalidValue: return 422;
    case ErrorCode::AuthFailure: return 401;
    default: return 500;
  }
}

json error_body(ErrorCode code, std::string_view message) {
  return {{"code", error_code_name(code)}, {"message", std::string(message)}};
}

json review_task_json(const store::CorpusRecord& r) {
  const auto& g = r.gate;
  json evidence = {
      {"emotional_coherence", g.emotional_coherence ? json(*g.emotional_coherence)
                                                    : json(nullptr)},
      {"complexity_coherence", g.complexity_coherence
                                   ? json(*g.complexity_coherence)
                                   : json(nullptr)},
      {"coherence_match", g.evidence.coherence_match
                              ? json(*g.evidence.coherence_match)
                              : json(nullptr)},
      {"fkgl", g.evidence.client_fkgl ? json(*g.evidence.client_fkgl)
                                      : json(nullptr)},
      {"band", g.evidence.band},
      {"complexity_error", g.evidence.complexity_error},
      {"ied_violations", json::array()}};
  for (const auto& v : g.ied_violations) {
    evidence["ied_violations"].push_back({{"turn", v.turn}, {"word", v.word}});
  }
  return {{"dialogue_id", r.id()},
          {"dialogue", transcript::to_json(r.dialogue)},
          {"chain", transcript::to_json(r.chain)},
          {"evidence", std::move(evidence)},
          {"status", g.disposition == curation::Disposition::Pending ? "pending"
                                                                     : "done"}};
}

namespace {

std::optional<bool> parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  return std::nullopt;
}

std::size_t parse_count(const std::optional<std::string>& s, std::size_t dflt,
                        std::string_view name) {
  if (!s) return dflt;
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || ptr != s->data() + s->size() || s->empty()) {
    throw Error(ErrorCode::InvalidValue,
                fmt::format("{} must be a non-negative integer, got '{}'", name, *s));
  }
  return v;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, std::string_view msg) {
  send_json(res, http_status(code), error_body(code, msg));
}

}  // namespace

store::QueryFilter parse_filter(
    const std::function<std::optional<std::string>(const std::string&)>& param) {
  store::QueryFilter f;
  auto bad = [](std::string_view name, const std::string& v) {
    return Error(ErrorCode::InvalidValue,
                 fmt::format("invalid {} filter '{}'", name, v));
  };
  if (auto v = param("emotion")) {
    f.emotion = parse_emotion(*v);
    if (!f.emotion) throw bad("emotion", *v);
  }
  if (auto v = param("cefr")) {
    f.cefr = parse_cefr(*v);
    if (!f.cefr) throw bad("cefr", *v);
  }
  if (auto v = param("implicit")) {
    f.implicit = parse_bool(*v);
    if (!f.implicit) throw bad("implicit", *v);
  }
  if (auto v = param("disposition")) {
    f.disposition = curation::parse_disposition(*v);
    if (!f.disposition) throw bad("disposition", *v);
  }
  if (auto v = param("qoi")) {
    f.qoi = curation::parse_qoi(*v);
    if (!f.qoi) throw bad("qoi", *v);
  }
  if (auto v = param("role")) {
    f.has_role = parse_role(*v);
    if (!f.has_role) throw bad("role", *v);
  }
  return f;
}

ReviewService::ReviewService(store::Store& store, ServiceOptions options)
    : store_(store), options_(std::move(options)) {}

void ReviewService::install(httplib::Server& server) {
  // Wraps a handler with token checking, store locking and error mapping.
  auto route = [this](auto&& fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      if (!options_.token.empty() &&
          req.get_header_value("X-Review-Token") != options_.token) {
        send_error(res, ErrorCode::AuthFailure, "missing or wrong X-Review-Token");
        return;
      }
      try {
        std::lock_guard lock(mu_);
        if (!store_.writable()) store_.refresh();
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const json::exception& e) {
        send_error(res, ErrorCode::InvalidValue,
                   fmt::format("malformed JSON body: {}", e.what()));
      } catch (const std::exception& e) {
        send_error(res, ErrorCode::IoError, e.what());
      }
    };
  };
  auto param_of = [](const httplib::Request& req) {
    return [&req](const std::string& name) -> std::optional<std::string> {
      if (!req.has_param(name)) return std::nullopt;
      return req.get_param_value(name);
    };
  };

  server.Get("/api/review/next", route([this](const httplib::Request&,
                                              httplib::Response& res) {
    if (!store_.writable()) {
      throw Error(ErrorCode::StoreLocked,
                  "the corpus is locked by another writer; reviews are unavailable");
    }
    store::QueryFilter pending;
    pending.disposition = curation::Disposition::Pending;
    const auto queue = store_.query(pending);
    if (queue.empty()) {
      res.status = 204;
      return;
    }
    send_json(res, 200, review_task_json(queue.front()));
  }));

  server.Post(R"(/api/review/([^/]+))", route([this](const httplib::Request& req,
                                                     httplib::Response& res) {
    const std::string id = req.matches[1];
    const json body = json::parse(req.body);
    if (!body.is_object()) {
      throw Error(ErrorCode::InvalidValue, "review body must be a JSON object");
    }
    curation::ReviewInput in;
    const auto qoi_field = body.find("qoi");
    if (qoi_field == body.end() || !qoi_field->is_string()) {
      throw Error(ErrorCode::InvalidValue, "qoi must be one of S, A, F");
    }
    const auto qoi = curation::parse_qoi(qoi_field->get<std::string>());
    if (!qoi) {
      throw Error(ErrorCode::InvalidValue,
                  fmt::format("invalid qoi '{}'; expected S, A or F",
                              qoi_field->get<std::string>()));
    }
    in.qoi = *qoi;
    if (auto r = body.find("reviewer"); r != body.end()) {
      if (!r->is_string()) throw Error(ErrorCode::InvalidValue, "reviewer must be a string");
      in.reviewer = r->get<std::string>();
    }
    for (auto [name, slot] : {std::pair{"emotional_coherence", &in.emotional_coherence},
                              std::pair{"complexity_coherence", &in.complexity_coherence}}) {
      if (auto f = body.find(name); f != body.end() && !f->is_null()) {
        if (!f->is_boolean()) {
          throw Error(ErrorCode::InvalidValue, fmt::format("{} must be a boolean", name));
        }
        *slot = f->get<bool>();
      }
    }
    if (!store_.writable()) {
      throw Error(ErrorCode::StoreLocked,
                  "the corpus is locked by another writer; reviews are unavailable");
    }
    const auto updated = curation::record_review(store_.get(id).gate, in);
    store_.amend_gate(updated);
    send_json(res, 200, curation::to_json(updated));
  }));

  server.Get("/api/corpus", route([param_of, this](const httplib::Request& req,
                                                   httplib::Response& res) {
    const auto filter = parse_filter(param_of(req));
    json out = json::array();
    for (const auto& r : store_.query(filter)) out.push_back(store::summary_json(r));
    send_json(res, 200, out);
  }));

  server.Get(R"(/api/corpus/([^/]+))", route([this](const httplib::Request& req,
                                                    httplib::Response& res) {
    send_json(res, 200, store::to_json(store_.get(req.matches[1])));
  }));

  server.Get("/api/patterns", route([param_of, this](const httplib::Request& req,
                                                     httplib::Response& res) {
    const auto param = param_of(req);
    const auto filter = parse_filter(param);
    const auto n = parse_count(param("n"), 2, "n");
    const auto min_support = parse_count(param("min_support"), 1, "min_support");
    json out = json::array();
    for (const auto& p : store_.mine_chain_patterns(filter, n, min_support)) {
      out.push_back(store::to_json(p));
    }
    send_json(res, 200, out);
  }));

  if (options_.ui_dir) server.set_mount_point("/ui", options_.ui_dir->string());
}

std::pair<std::string, int> parse_listen(std::string_view listen) {
  std::string host = "127.0.0.1";
  std::string_view port_text = listen;
  if (const auto colon = listen.rfind(':'); colon != std::string_view::npos) {
    host = std::string(listen.substr(0, colon));
    port_text = listen.substr(colon + 1);
  }
  int port = -1;
  const auto [ptr, ec] =
      std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() ||
      port < 0 || port > 65535 || host.empty()) {
    throw Error(ErrorCode::InvalidValue,
                fmt::format("listen address '{}' must be host:port", listen));
  }
  return {host, port};
}

void serve(store::Store& store, const ServiceOptions& options,
           std::string_view listen, const std::function<void(int)>& on_ready) {
  const auto [host, port] = parse_listen(listen);
  httplib::Server server;
  ReviewService service(store, options);
  service.install(server);
  const int bound = port == 0 ? server.bind_to_any_port(host)
                              : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::IoError, fmt::format("cannot bind {}", listen));
  }
  if (on_ready) on_ready(bound);
  server.listen_after_bind();
}

}  // namespace emocorpus::service
