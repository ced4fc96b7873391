#pragma once

// Session service behind the /v1 HTTP API. SessionService holds all the
// logic and is transport-free; HttpServer maps it onto routes.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "levelscope/protocol.hpp"

namespace levelscope {

// Milliseconds since the Unix epoch. Injectable so tests can move time.
using Clock = std::function<std::int64_t()>;
std::int64_t wall_clock_ms();

// 32 lowercase hex digits from the system entropy source.
std::string random_session_id();

struct Session {
  std::string id;
  std::int64_t created_ms = 0;
  nlohmann::json config_doc;  // as accepted, after server defaults
  SessionConfig config;

  // Guards everything below; one event at a time per session.
  std::mutex mutex;
  SessionState state;
  std::int64_t round_started_ms = 0;
};

class SessionStore {
 public:
  virtual ~SessionStore() = default;
  // False when the id is taken.
  virtual bool insert(std::shared_ptr<Session> session) = 0;
  virtual std::shared_ptr<Session> find(const std::string& id) const = 0;
  virtual std::size_t size() const = 0;
  // Durable event log; the in-memory store drops events.
  virtual void append(const nlohmann::json& event) { (void)event; }
};

class MemoryStore : public SessionStore {
 public:
  bool insert(std::shared_ptr<Session> session) override;
  std::shared_ptr<Session> find(const std::string& id) const override;
  std::size_t size() const override;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// In-memory sessions plus an append-only JSONL journal of create and
// advance events, flushed per event.
class JournalStore : public MemoryStore {
 public:
  explicit JournalStore(std::string path);
  void append(const nlohmann::json& event) override;
  const std::string& path() const { return path_; }

  // Events of an existing journal; a truncated last line is ignored.
  static std::vector<nlohmann::json> read(const std::string& path);

 private:
  std::string path_;
  std::mutex file_mutex_;
};

struct ServiceOptions {
  // Replaces "matrices": "default" in session configs when set.
  std::optional<RingMatrices> matrices;
  std::map<std::string, std::shared_ptr<const HistoryPool>> pools;
  // Pool for History-replay configs that name none.
  std::string default_pool;
  // Empty keeps sessions in memory only.
  std::string journal_path;
  Clock clock;

  // Bundled matrices and the reconstructed replay pool as the default.
  static ServiceOptions defaults();
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

class SessionService {
 public:
  // With a journal path, sessions recorded there are replayed first.
  explicit SessionService(ServiceOptions options);

  ServiceResponse create(const nlohmann::json& config);
  ServiceResponse round(const std::string& id);
  // Body: {"round": n, "choice": "a" | 37}.
  ServiceResponse choice(const std::string& id, const nlohmann::json& body);
  ServiceResponse result(const std::string& id);
  ServiceResponse health() const;

  std::size_t session_count() const { return store_->size(); }
  std::size_t recovered() const { return recovered_; }

 private:
  SessionConfig parse_config(nlohmann::json& doc) const;
  void expire(Session& session, std::int64_t now);
  void replay_event(const nlohmann::json& event);
  std::int64_t now() const { return options_.clock(); }

  ServiceOptions options_;
  std::unique_ptr<SessionStore> store_;
  std::size_t recovered_ = 0;
};

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
  // Served at / when set (the web client build).
  std::string static_dir;
};

class HttpServer {
 public:
  HttpServer(SessionService& service, HttpOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port. Throws Error when binding fails.
  int bind();
  // Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace levelscope
