// SPDX-License-Identifier: Apache-2.0
#include "deepauto/stream/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>

#include <httplib.h>

#include "deepauto/error.hpp"
#include "deepauto/log.hpp"

namespace deepauto::stream {

namespace {

constexpr std::size_t kFirehoseQueueLimit = 1 << 20;

int listen_on(const Endpoint& ep, int* bound_port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (int rc = ::getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw Error("cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw Error(std::string("socket: ") + std::strerror(errno));
  }
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
    const std::string msg = std::strerror(errno);
    ::freeaddrinfo(res);
    ::close(fd);
    throw Error("cannot listen on " + ep.host + ":" + port + ": " + msg);
  }
  ::freeaddrinfo(res);
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  *bound_port = ntohs(addr.sin_port);
  return fd;
}

bool send_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    data += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now().time_since_epoch()).count();
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  Endpoint ep;
  std::string port = text;
  if (const auto colon = text.rfind(':'); colon != std::string::npos) {
    if (colon > 0) ep.host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    ep.port = std::stoi(port, &used);
    if (used != port.size()) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw ConfigError("invalid endpoint '" + text + "', expected host:port");
  }
  if (ep.port < 0 || ep.port > 65535) throw ConfigError("port out of range in '" + text + "'");
  return ep;
}

Server::Server(Engine& engine, ServerOptions options) : engine_(engine), options_(std::move(options)) {}

Server::~Server() { stop(); }

void Server::start() {
  if (running_.exchange(true)) return;
  note_activity();
  try {
    if (options_.ingest.enabled()) ingest_fd_ = listen_on(options_.ingest, &ingest_port_);
    if (options_.firehose.enabled()) firehose_fd_ = listen_on(options_.firehose, &firehose_port_);
    if (options_.http.enabled()) {
      http_ = std::make_unique<httplib::Server>();
      auto json_reply = [](httplib::Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
      };
      http_->Get("/health", [this, json_reply](const httplib::Request&, httplib::Response& res) {
        json_reply(res, 200, engine_.health());
      });
      http_->Get(R"(/predictions/([^/]+))", [this, json_reply](const httplib::Request& req, httplib::Response& res) {
        const std::string cell = req.matches[1];
        switch (engine_.cell_state(cell)) {
          case Engine::CellState::unknown:
            json_reply(res, 404, {{"error", "unknown_cell"}, {"cell", cell}});
            return;
          case Engine::CellState::warming:
            json_reply(res, 404, {{"error", "warming"}, {"cell", cell}});
            return;
          case Engine::CellState::ready:
            if (auto p = engine_.latest(cell)) {
              json_reply(res, 200, p->to_json());
            } else {
              json_reply(res, 404, {{"error", "unknown_cell"}, {"cell", cell}});  // evicted meanwhile
            }
            return;
        }
      });
      http_->Post("/reload", [this, json_reply](const httplib::Request& req, httplib::Response& res) {
        const std::string path = req.body.empty() ? options_.model_path : req.body;
        if (path.empty()) {
          json_reply(res, 400, {{"error", "no model path"}});
          return;
        }
        if (auto err = engine_.reload_model_file(path)) {
          json_reply(res, 409, {{"error", *err}, {"model_version", engine_.model()->version}});
        } else {
          json_reply(res, 200, {{"model_version", engine_.model()->version}});
        }
      });
      http_->Post("/flush", [this, json_reply](const httplib::Request&, httplib::Response& res) {
        engine_.flush();
        json_reply(res, 200, {{"flushed", true}});
      });
      http_port_ = options_.http.port == 0 ? http_->bind_to_any_port(options_.http.host)
                                           : (http_->bind_to_port(options_.http.host, options_.http.port)
                                                  ? options_.http.port
                                                  : -1);
      if (http_port_ < 0)
        throw Error("cannot listen on " + options_.http.host + ":" + std::to_string(options_.http.port));
      threads_.emplace_back([this] { http_->listen_after_bind(); });
      http_->wait_until_ready();
    }
  } catch (...) {
    stop();
    throw;
  }
  if (firehose_fd_ >= 0) {
    subscription_ = engine_.subscribe([this](const PredictionRecord& p) { enqueue_prediction(p); });
    threads_.emplace_back([this] { firehose_loop(); });
    threads_.emplace_back([this] { accept_loop(firehose_fd_, true); });
  }
  if (ingest_fd_ >= 0) threads_.emplace_back([this] { accept_loop(ingest_fd_, false); });
  if (options_.idle_flush.count() > 0) threads_.emplace_back([this] { idle_loop(); });
  log::info("serve_started",
            {{"http_port", http_port_}, {"ingest_port", ingest_port_}, {"firehose_port", firehose_port_}});
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  if (subscription_) engine_.unsubscribe(subscription_);
  subscription_ = 0;
  if (http_) http_->stop();
  fire_cv_.notify_all();
  {
    std::lock_guard lock(conn_mu_);
    for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : threads_)
    if (t.joinable()) t.join();
  threads_.clear();
  std::vector<std::thread> conns;
  {
    std::lock_guard lock(conn_mu_);
    conns.swap(conn_threads_);
  }
  for (auto& t : conns)
    if (t.joinable()) t.join();
  if (ingest_fd_ >= 0) ::close(ingest_fd_);
  if (firehose_fd_ >= 0) ::close(firehose_fd_);
  ingest_fd_ = firehose_fd_ = -1;
  std::lock_guard lock(fire_mu_);
  for (int fd : fire_clients_) ::close(fd);
  fire_clients_.clear();
}

void Server::note_activity() {
  last_activity_ns_.store(now_ns());
  idle_flushed_.store(false);
}

void Server::accept_loop(int listen_fd, bool firehose) {
  while (running_.load()) {
    pollfd p{listen_fd, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd < 0) continue;
    if (firehose) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      std::lock_guard lock(fire_mu_);
      fire_clients_.push_back(fd);
      continue;
    }
    std::lock_guard lock(conn_mu_);
    connections_.push_back(fd);
    conn_threads_.emplace_back([this, fd] { connection_loop(fd); });
  }
}

void Server::ingest_guarded(std::string_view line, Clock::time_point received) {
  try {
    engine_.ingest_line(line, received);
  } catch (const std::exception& e) {
    log::error("ingest_failed", {{"error", e.what()}});
  }
}

void Server::connection_loop(int fd) {
  std::string pending;
  char buf[1 << 16];
  while (running_.load()) {
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    const auto received = Clock::now();
    note_activity();
    pending.append(buf, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = pending.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string_view line(pending.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) ingest_guarded(line, received);
    }
    pending.erase(0, start);
  }
  if (!pending.empty()) ingest_guarded(pending, Clock::now());
  std::lock_guard lock(conn_mu_);
  std::erase(connections_, fd);
  ::close(fd);
}

void Server::ingest_stream(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    note_activity();
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) engine_.ingest_line(line);
  }
  engine_.flush();
}

void Server::enqueue_prediction(const PredictionRecord& p) {
  std::string line = p.to_json().dump();
  line.push_back('\n');
  std::lock_guard lock(fire_mu_);
  if (fire_queue_.size() >= kFirehoseQueueLimit) {
    ++fire_dropped_;
    return;
  }
  fire_queue_.push_back(std::move(line));
  fire_cv_.notify_one();
}

void Server::firehose_loop() {
  std::unique_lock lock(fire_mu_);
  while (true) {
    fire_cv_.wait(lock, [this] { return !fire_queue_.empty() || !running_.load(); });
    if (fire_queue_.empty() && !running_.load()) return;
    std::string batch;
    while (!fire_queue_.empty() && batch.size() < (1 << 20)) {
      batch += fire_queue_.front();
      fire_queue_.pop_front();
    }
    std::vector<int> clients = fire_clients_;
    lock.unlock();
    std::vector<int> dead;
    for (int fd : clients)
      if (!send_all(fd, batch.data(), batch.size())) dead.push_back(fd);
    lock.lock();
    for (int fd : dead) {
      std::erase(fire_clients_, fd);
      ::close(fd);
    }
  }
}

void Server::idle_loop() {
  const auto limit_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(options_.idle_flush).count();
  while (running_.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (idle_flushed_.load() || now_ns() - last_activity_ns_.load() < limit_ns) continue;
    engine_.flush();
    idle_flushed_.store(true);
  }
}

}  // namespace deepauto::stream
