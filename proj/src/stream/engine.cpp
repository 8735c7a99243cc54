// SPDX-License-Identifier: Apache-2.0
#include "deepauto/stream/engine.hpp"

#include <algorithm>
#include <climits>

#include "deepauto/error.hpp"
#include "deepauto/log.hpp"

namespace deepauto::stream {

namespace {

double percentile(std::vector<double> v, double q) {
  const std::size_t k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

}  // namespace

std::string_view to_string(Engine::CellState s) noexcept {
  switch (s) {
    case Engine::CellState::unknown: return "unknown";
    case Engine::CellState::warming: return "warming";
    case Engine::CellState::ready: return "ready";
  }
  return "unknown";
}

Engine::Engine(EngineOptions options) : options_(options), shards_(std::max<std::size_t>(options.shards, 1)) {
  if (options_.idle_ttl_seconds <= 0) throw ConfigError("idle TTL must be positive");
  latencies_.reserve(std::min<std::size_t>(options_.latency_samples, 4096));
}

void Engine::load_model(model::ModelBundle bundle) {
  std::lock_guard lock(model_mu_);
  if (model_) {
    const auto& cur = model_->bundle.config;
    if (bundle.config.task != cur.task)
      throw ConfigError("reload rejected: task differs from the running model");
    if (bundle.config.step_seconds != cur.step_seconds)
      throw ConfigError("reload rejected: step_seconds differs from the running model");
  }
  auto snapshot = ModelSnapshot::make(std::move(bundle), next_version_);
  ++next_version_;
  model_ = std::move(snapshot);
}

std::optional<std::string> Engine::reload_model_file(const std::string& path) {
  try {
    load_model(model::load_model_file(path));
  } catch (const std::exception& e) {
    log::warn("model_reload_failed", {{"path", path}, {"error", e.what()}});
    return std::string(e.what());
  }
  log::info("model_loaded", {{"path", path}, {"version", model()->version}});
  return std::nullopt;
}

std::shared_ptr<const ModelSnapshot> Engine::model() const {
  std::lock_guard lock(model_mu_);
  return model_;
}

Engine::Shard& Engine::shard_for(std::string_view cell) const {
  return shards_[std::hash<std::string_view>{}(cell) % shards_.size()];
}

std::size_t Engine::subscribe(Subscriber s) {
  std::lock_guard lock(subscribers_mu_);
  const std::size_t id = next_subscriber_++;
  subscribers_.emplace_back(id, std::move(s));
  return id;
}

void Engine::unsubscribe(std::size_t id) {
  std::lock_guard lock(subscribers_mu_);
  std::erase_if(subscribers_, [id](const auto& e) { return e.first == id; });
}

void Engine::ingest_line(std::string_view line, Clock::time_point received) {
  data::CellRecord r;
  try {
    r = data::parse_record(line);
  } catch (const DataError&) {
    ++malformed_;
    return;
  }
  ingest(r, received);
}

void Engine::ingest(const data::CellRecord& r, Clock::time_point received) {
  const auto model = this->model();
  if (!model) throw ConfigError("no model loaded");
  if (data::validate_record(r)) {
    ++out_of_range_;
    return;
  }
  ++ingested_;
  const auto& cfg = model->bundle.config;
  const std::int64_t b = data::bucket_of(r.ts, cfg.step_seconds);
  {
    Shard& shard = shard_for(r.cell);
    std::lock_guard lock(shard.mu);
    auto it = shard.cells.find(r.cell);
    if (it == shard.cells.end())
      it = shard.cells
               .try_emplace(r.cell, cfg.task, model->channel_names.size(), std::max<std::size_t>(model->lookback, 1))
               .first;
    Cell& cell = it->second;
    if ((cell.any_closed && b <= cell.last_closed) || (cell.open && b < cell.open_bucket)) {
      ++late_;
      return;
    }
    if (cell.open && b > cell.open_bucket) {
      close_bucket(it->first, cell, received, model);
      cell.open = false;
    }
    if (!cell.open) {
      // Buckets skipped entirely by this cell become rows with every channel missing.
      if (cell.any_closed)
        while (cell.last_closed + 1 < b) close_bucket(it->first, cell, received, model);
      cell.open = true;
      cell.open_bucket = b;
      cell.open_received = received;
    }
    cell.acc.add(r);
    cell.last_event_ts = std::max(cell.last_event_ts, r.ts);
  }
  advance_watermark(r.ts);
}

void Engine::close_bucket(const std::string& id, Cell& cell, Clock::time_point received,
                          const std::shared_ptr<const ModelSnapshot>& model) {
  const auto& cfg = model->bundle.config;
  const std::int64_t bucket = cell.open ? cell.open_bucket : cell.last_closed + 1;
  data::KpiSeries row = data::make_empty_series(id, bucket * cfg.step_seconds, cfg.step_seconds, model->channel_names, 1);
  cell.acc.flush_into(row, 0);
  if (cell.buffer.capacity() < model->lookback) cell.buffer.set_capacity(model->lookback);
  cell.buffer.push_row(row, 0);
  cell.any_closed = true;
  cell.last_closed = bucket;
  cell.open = false;

  auto p = predict_next(cell.buffer, *model, id);
  if (!p) return;
  p->latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - received).count();
  record_latency(p->latency_ms);
  ++predictions_;
  cell.latest = *p;
  publish(*p);
}

void Engine::publish(const PredictionRecord& p) {
  std::lock_guard lock(subscribers_mu_);
  for (const auto& [id, s] : subscribers_) s(p);
}

void Engine::advance_watermark(std::int64_t ts) {
  std::int64_t prev = max_ts_.load();
  while (ts > prev && !max_ts_.compare_exchange_weak(prev, ts)) {
  }
  const auto model = this->model();
  const std::int64_t step = model->bundle.config.step_seconds;
  // A bucket is final once the newest event time is two steps past its end.
  const std::int64_t wm = data::bucket_of(max_ts_.load(), step) - 3;
  std::int64_t seen = watermark_bucket_.load();
  if (wm <= seen || !watermark_bucket_.compare_exchange_strong(seen, wm)) return;

  const auto now = Clock::now();
  const std::int64_t evict_before = max_ts_.load() - options_.idle_ttl_seconds;
  for (auto& shard : shards_) {
    std::lock_guard lock(shard.mu);
    for (auto it = shard.cells.begin(); it != shard.cells.end();) {
      Cell& cell = it->second;
      if (cell.open && cell.open_bucket <= wm) close_bucket(it->first, cell, now, model);
      if (cell.last_event_ts < evict_before) {
        it = shard.cells.erase(it);
        ++evicted_;
      } else {
        ++it;
      }
    }
  }
}

void Engine::flush() {
  const auto model = this->model();
  if (!model) return;
  const auto now = Clock::now();
  for (auto& shard : shards_) {
    std::lock_guard lock(shard.mu);
    for (auto& [id, cell] : shard.cells)
      if (cell.open) close_bucket(id, cell, now, model);
  }
}

void Engine::record_latency(double ms) {
  std::lock_guard lock(latency_mu_);
  if (latencies_.size() < options_.latency_samples) {
    latencies_.push_back(ms);
  } else {
    latencies_[latency_next_] = ms;
    latency_next_ = (latency_next_ + 1) % latencies_.size();
  }
}

Engine::CellState Engine::cell_state(std::string_view cell) const {
  Shard& shard = shard_for(cell);
  std::lock_guard lock(shard.mu);
  auto it = shard.cells.find(std::string(cell));
  if (it == shard.cells.end()) return CellState::unknown;
  return it->second.latest ? CellState::ready : CellState::warming;
}

std::optional<PredictionRecord> Engine::latest(std::string_view cell) const {
  Shard& shard = shard_for(cell);
  std::lock_guard lock(shard.mu);
  auto it = shard.cells.find(std::string(cell));
  if (it == shard.cells.end()) return std::nullopt;
  return it->second.latest;
}

EngineStats Engine::stats() const {
  EngineStats s;
  s.ingested = ingested_.load();
  s.malformed = malformed_.load();
  s.out_of_range = out_of_range_.load();
  s.late = late_.load();
  s.predictions = predictions_.load();
  s.evicted = evicted_.load();
  for (auto& shard : shards_) {
    std::lock_guard lock(shard.mu);
    s.cells += shard.cells.size();
    for (const auto& [id, cell] : shard.cells)
      if (cell.latest) ++s.ready_cells;
  }
  {
    std::lock_guard lock(latency_mu_);
    if (!latencies_.empty()) {
      s.p50_ms = percentile(latencies_, 0.50);
      s.p99_ms = percentile(latencies_, 0.99);
    }
  }
  if (auto m = model()) s.model_version = m->version;
  return s;
}

nlohmann::json Engine::health() const {
  const EngineStats s = stats();
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"status", s.model_version ? "ok" : "no_model"},
          {"model_version", s.model_version},
          {"ingested", s.ingested},
          {"dropped", s.malformed + s.out_of_range},
          {"malformed", s.malformed},
          {"out_of_range", s.out_of_range},
          {"late", s.late},
          {"predictions", s.predictions},
          {"cells", s.cells},
          {"cells_ready", s.ready_cells},
          {"evicted", s.evicted},
          {"latency_p50_ms", opt(s.p50_ms)},
          {"latency_p99_ms", opt(s.p99_ms)}};
}

}  // namespace deepauto::stream
