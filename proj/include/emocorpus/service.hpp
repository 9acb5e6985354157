#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "emocorpus/error.hpp"
#include "emocorpus/store.hpp"

namespace httplib {
class Server;
}

namespace emocorpus::service {

struct ServiceOptions {
  /// When non-empty, every /api request must carry it in X-Review-Token.
  std::string token;
  /// Served under /ui/ when set.
  std::optional<std::filesystem::path> ui_dir;
};

/// HTTP status used for a module error.
int http_status(ErrorCode code);

/// `{code, message}`
nlohmann::json error_body(ErrorCode code, std::string_view message);

/// Full record plus the auto-check evidence a reviewer needs.
nlohmann::json review_task_json(const store::CorpusRecord& r);

/// Parses corpus filters from query parameters. Throws InvalidValue.
store::QueryFilter parse_filter(
    const std::function<std::optional<std::string>(const std::string&)>& param);

/// Routes for the review queue and corpus browsing. The store is shared with
/// the caller and every access is serialized through one mutex.
class ReviewService {
 public:
  ReviewService(store::Store& store, ServiceOptions options);

  void install(httplib::Server& server);

 private:
  store::Store& store_;
  ServiceOptions options_;
  std::mutex mu_;
};

/// Splits "host:port"; a bare port binds 127.0.0.1. Throws InvalidValue.
std::pair<std::string, int> parse_listen(std::string_view listen);

/// Blocks serving on `listen` until the process is stopped. `on_ready`
/// receives the bound port.
void serve(store::Store& store, const ServiceOptions& options,
           std::string_view listen,
           const std::function<void(int)>& on_ready = {});

}  // namespace emocorpus::service
