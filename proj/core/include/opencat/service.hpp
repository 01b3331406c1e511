#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "opencat/ibl.hpp"
#include "opencat/keyvalue.hpp"
#include "opencat/pipeline.hpp"
#include "opencat/protocol.hpp"

namespace opencat {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  PipelineConfig pipeline = PipelineConfig::fallback_profile();
  WindowPolicy window;
  std::filesystem::path static_dir;     // served at "/" when set
  std::filesystem::path snapshot_dir;   // memories written here on shutdown when set
  bool access_log = true;               // one JSON line per request on stderr

  /// Keys: host, port, static_dir, snapshot_dir, window_factor, window_minimum,
  /// access_log, plus every pipeline key.
  static ServiceConfig from_keyvalue(const KeyValueFile& kv, const std::filesystem::path& base_dir);
  static ServiceConfig load(const std::filesystem::path& path);
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Interactive teaching sessions over one shared pipeline.
///
/// Endpoints (all JSON; errors are {"code", "message"}):
///   POST /sessions                  {"dataset": root, "seed"?, "shuffle"?} or {"mode": "upload"}
///   GET  /sessions/{id}             state and metrics
///   POST /sessions/{id}/next        next object: views, entropy, prediction;
///                                   upload sessions send {"cloud", "format"?, "base64"?}
///   POST /sessions/{id}/teach       {"label"}
///   POST /sessions/{id}/correct     {"label"}
///   GET  /sessions/{id}/categories  labels with instance counts
///   GET  /sessions/{id}/log         event log
///
/// An ask counts as correct unless the object is then taught or corrected
/// with a different label. Teach/correct events carry the stored feature so
/// the log replays to the session memory. Requests on different sessions run
/// concurrently; mutations of one session are serialized and reads see
/// published snapshots.
class SessionService {
 public:
  explicit SessionService(ServiceConfig config);
  SessionService(ServiceConfig config, std::shared_ptr<const Pipeline> pipeline);
  ~SessionService();

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  /// Transport-independent request handling.
  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Binds the listening socket; returns the bound port (port 0 picks one).
  int bind();
  /// Serves until stop(); call bind() first.
  void run();
  void stop();

  /// Copy of a session's memory; throws ConfigError for an unknown id.
  PerceptualMemory memory_of(const std::string& session_id) const;
  const Pipeline& pipeline() const;
  const ServiceConfig& config() const;

  /// Writes every session memory to config().snapshot_dir.
  void persist_snapshots() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Rebuilds a memory from the JSON returned by GET /sessions/{id}/log.
PerceptualMemory replay_session_log(std::string_view log_json, const FeatureLayout& layout,
                                    const MemoryOptions& options);

}  // namespace opencat
