#pragma once

// HTTP service over the pipeline and the pattern assets. Request handling is
// socket-independent (handle) so it can be exercised directly; run/start bind
// it to an HTTP listener.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "unscientify/knowledge.hpp"
#include "unscientify/pipeline.hpp"

namespace httplib {
class Server;
}

namespace unscientify {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path patterns_dir;
  bool paper_faithful = false;
  std::size_t max_body_bytes = 1 << 20;
  std::filesystem::path corpus_path;  // preview corpus: one sentence per line
  bool persist = false;               // write committed assets back to patterns_dir

  // UNSCIENTIFY_LISTEN ("host:port" or "port") and UNSCIENTIFY_PATTERNS.
  ServiceConfig with_env_overrides() const;
  // Throws ValidationError (bad port, missing patterns directory).
  void validate() const;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

class Service {
 public:
  explicit Service(ServiceConfig config);  // loads assets; throws on failure
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::string& body);

  // Currently served library (a snapshot; later swaps do not affect it).
  PatternLibrary library() const;

  // Blocks serving requests until stop().
  void run();
  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port.
  int start();
  void stop();

  const ServiceConfig& config() const { return config_; }

 private:
  struct State {
    AssetBundle assets;
    PatternLibrary lib;
  };

  std::shared_ptr<const State> snapshot() const;
  void install_routes();

  HttpResponse annotate(const std::string& body) const;
  HttpResponse get_patterns() const;
  HttpResponse validate_patterns(const std::string& body) const;
  HttpResponse put_patterns(const std::string& body);
  HttpResponse preview(const std::string& body) const;
  HttpResponse health() const;

  ServiceConfig config_;
  mutable std::mutex state_mutex_;   // guards state_ pointer swaps
  std::mutex commit_mutex_;          // serializes PUT /patterns
  std::shared_ptr<const State> state_;
  std::map<std::string, std::vector<Document>> corpora_;  // immutable after construction
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace unscientify
