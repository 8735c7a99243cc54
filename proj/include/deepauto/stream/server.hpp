// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "deepauto/stream/engine.hpp"

namespace httplib {
class Server;
}

namespace deepauto::stream {

/// host:port pair; port 0 asks the OS for a free port.
struct Endpoint {
  std::string host = "127.0.0.1";
  int port = -1;  // negative = disabled
  bool enabled() const noexcept { return port >= 0; }
};

/// Parses "host:port", ":port" or "port". Throws ConfigError.
Endpoint parse_endpoint(const std::string& text);

struct ServerOptions {
  Endpoint http;
  Endpoint ingest;    // NDJSON records over TCP, one record per line
  Endpoint firehose;  // every prediction as an NDJSON line to each client
  /// Path used by POST /reload when the request body is empty.
  std::string model_path;
  /// Open buckets are closed after this much wall-clock time without any
  /// input. Zero disables the timer.
  std::chrono::milliseconds idle_flush{0};
};

/// Network front end of an Engine: TCP ingest, HTTP queries and the
/// prediction firehose. HTTP routes:
///   GET  /health             engine counters and latency percentiles
///   GET  /predictions/{cell} latest prediction, 404 when unknown or warming
///   POST /reload             reload the model (body = path, optional)
///   POST /flush              close every open bucket
class Server {
 public:
  Server(Engine& engine, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds every enabled endpoint and starts the worker threads. Throws
  /// Error when a port cannot be bound.
  void start();
  void stop();

  int http_port() const noexcept { return http_port_; }
  int ingest_port() const noexcept { return ingest_port_; }
  int firehose_port() const noexcept { return firehose_port_; }

  /// Feeds lines from a stream until EOF, then flushes.
  void ingest_stream(std::istream& in);
  /// Wall-clock time of the most recent ingested line.
  void note_activity();

 private:
  void accept_loop(int listen_fd, bool firehose);
  void connection_loop(int fd);
  void ingest_guarded(std::string_view line, Clock::time_point received);
  void firehose_loop();
  void idle_loop();
  void enqueue_prediction(const PredictionRecord& p);

  Engine& engine_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> http_;
  std::atomic<bool> running_{false};
  int ingest_fd_ = -1;
  int firehose_fd_ = -1;
  int http_port_ = -1;
  int ingest_port_ = -1;
  int firehose_port_ = -1;

  std::vector<std::thread> threads_;
  std::mutex conn_mu_;
  std::vector<int> connections_;
  std::vector<std::thread> conn_threads_;

  std::mutex fire_mu_;
  std::condition_variable fire_cv_;
  std::deque<std::string> fire_queue_;
  std::vector<int> fire_clients_;
  std::uint64_t fire_dropped_ = 0;

  std::atomic<std::int64_t> last_activity_ns_{0};
  std::atomic<bool> idle_flushed_{true};
  std::size_t subscription_ = 0;
};

}  // namespace deepauto::stream
