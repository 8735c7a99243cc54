// SPDX-License-Identifier: Apache-2.0
// deepauto: command line entry point for data generation, training,
// evaluation and serving.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <arpa/inet.h>
#include <netdb.h>
#include <pthread.h>
#include <sys/socket.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "deepauto/data/analysis.hpp"
#include "deepauto/data/records.hpp"
#include "deepauto/error.hpp"
#include "deepauto/eval/report.hpp"
#include "deepauto/log.hpp"
#include "deepauto/model/dataset.hpp"
#include "deepauto/model/grid.hpp"
#include "deepauto/model/io.hpp"
#include "deepauto/model/train.hpp"
#include "deepauto/stream/engine.hpp"
#include "deepauto/stream/prediction.hpp"
#include "deepauto/stream/server.hpp"
#include "deepauto/synth/generator.hpp"
#include "deepauto/synth/replay.hpp"

namespace {

using namespace deepauto;
using nlohmann::json;

/// Usage problems detected after CLI11 parsing (exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') {
    try {
      return json::parse(arg);
    } catch (const json::exception& e) {
      throw UsageError(std::string("inline --config is not valid JSON: ") + e.what());
    }
  }
  std::ifstream in(arg);
  if (!in) throw UsageError("cannot open config file " + arg);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file " + arg + " is not valid JSON: " + e.what());
  }
}

void require_readable(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing ") + what);
  if (path == "-") return;
  std::ifstream in(path);
  if (!in) throw UsageError(std::string("cannot read ") + what + " " + path);
}

/// Output sink: a file, or stdout for "" and "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw UsageError("cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<data::CellRecord> read_input(const std::string& path) {
  data::ReadStats stats;
  auto records = path == "-" ? data::read_records(std::cin, &stats) : data::read_records_file(path, &stats);
  log::info("input_read", {{"path", path},
                           {"lines", stats.lines},
                           {"accepted", stats.accepted},
                           {"malformed", stats.malformed},
                           {"out_of_range", stats.out_of_range}});
  if (records.empty()) throw DataError("no usable records in " + path);
  return records;
}

model::DeepAutoConfig model_config(const std::string& config_arg, std::optional<std::uint64_t> seed) {
  model::DeepAutoConfig cfg =
      config_arg.empty() ? model::default_config(data::Task::load) : model::config_from_json(read_json_arg(config_arg));
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

json run_json(const std::string& input, const model::PrepareOptions& po) {
  return {{"input", input}, {"anchor_stride", po.anchor_stride}, {"min_anchor", po.min_anchor}};
}

json scaler_json(const data::ScalerParams& s) {
  return {{"min", s.min}, {"max", s.max}, {"constant", s.constant}};
}

json tensor_rows(const nn::Tensor2& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) rows.push_back(std::vector<double>(t.row(r).begin(), t.row(r).end()));
  return rows;
}

/// Metrics of the model alone on `samples`, in the same shape as evaluate.
json model_metrics(const std::shared_ptr<const model::DeepAutoParams>& params, const model::DeepAutoConfig& cfg,
                   std::span<const data::WindowedSample> samples, double threshold) {
  eval::DeepAutoPredictor da(params);
  std::vector<const eval::Predictor*> ps{&da};
  if (cfg.output.kind == model::OutputSpec::Kind::pdf) {
    json kl = json::array();
    for (const auto& row : eval::compare_kl(ps, samples)) kl.push_back({{"algorithm", row.algorithm}, {"kl", row.kl}});
    return {{"kl", kl}};
  }
  return eval::compare_report(ps, samples, cfg.output.horizons, threshold).to_json();
}

// ---------------------------------------------------------------- commands

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string input;
  std::string output;
  std::string model;
  double threshold = 0.7;
  std::size_t anchor_stride = 1;
  std::size_t min_anchor = 0;
  std::string format = "json";
};

int cmd_generate(const Common& o, const std::string& preset) {
  synth::SynthConfig cfg;
  if (preset == "load") {
    cfg = synth::default_load_config();
  } else if (preset == "rsrq") {
    cfg = synth::default_rsrq_config();
  } else {
    throw UsageError("unknown preset " + preset);
  }
  if (!o.config.empty()) {
    json j = synth::to_json(cfg);
    j.merge_patch(read_json_arg(o.config));
    cfg = synth::synth_config_from_json(j);
  }
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  Output out(o.output);
  const auto records = synth::generate(cfg);
  data::write_records(out.stream(), records);
  log::info("generated", {{"records", records.size()}, {"config", synth::to_json(cfg)}});
  return 0;
}

int cmd_prepare(const Common& o, const std::string& samples_path) {
  require_readable(o.input, "--input");
  const auto cfg = model_config(o.config, o.seed);
  model::PrepareOptions po{o.min_anchor, o.anchor_stride, std::nullopt};
  Output out(o.output);
  std::unique_ptr<Output> samples_out;
  if (!samples_path.empty()) samples_out = std::make_unique<Output>(samples_path);

  const auto cells = model::assemble_series(read_input(o.input), cfg.task, cfg.step_seconds);
  const auto ds = model::prepare_dataset(cells, cfg, po);
  json cell_ids = json::array();
  for (const auto& s : ds.series) cell_ids.push_back(s.cell_id);
  json manifest{{"config", model::to_json(cfg)},
                {"run", run_json(o.input, po)},
                {"cells", cell_ids},
                {"skipped", cells.skipped},
                {"series_length", ds.series.front().length()},
                {"start_ts", ds.series.front().start_ts},
                {"scaler", scaler_json(ds.scaler)},
                {"fit_rows", ds.fit_rows},
                {"anchors", {{"first", ds.anchors.front()}, {"last", ds.anchors.back()}, {"count", ds.anchors.size()}}},
                {"splits",
                 {{"train", ds.splits.train.size()}, {"val", ds.splits.val.size()}, {"test", ds.splits.test.size()}}}};
  if (cfg.spatial_k > 0) manifest["neighbors"] = ds.neighbors;
  out.stream() << manifest.dump(2) << '\n';

  if (samples_out) {
    auto emit = [&](const std::vector<data::WindowedSample>& part, const char* split) {
      for (const auto& s : part) {
        json j{{"cell", ds.series[s.cell_index].cell_id},
               {"anchor_ts", s.anchor_ts},
               {"split", split},
               {"x_recent", tensor_rows(s.x_recent)},
               {"x_periodic", tensor_rows(s.x_periodic)},
               {"x_seasonal", tensor_rows(s.x_seasonal)},
               {"external", s.external},
               {"target", s.target}};
        samples_out->stream() << j.dump() << '\n';
      }
    };
    emit(ds.splits.train, "train");
    emit(ds.splits.val, "val");
    emit(ds.splits.test, "test");
  }
  return 0;
}

int cmd_train(const Common& o, const std::string& report_path, bool serial) {
  require_readable(o.input, "--input");
  if (o.output.empty() || o.output == "-") throw UsageError("train needs --output <model file>");
  const auto cfg = model_config(o.config, o.seed);
  model::PrepareOptions po{o.min_anchor, o.anchor_stride, std::nullopt};
  Output report_out(report_path);

  const auto cells = model::assemble_series(read_input(o.input), cfg.task, cfg.step_seconds);
  const auto ds = model::prepare_dataset(cells, cfg, po);
  model::TrainOptions topt;
  topt.serial = serial;
  topt.on_epoch = [](const model::EpochRecord& e) {
    log::info("epoch", {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
  };
  auto result = model::train(ds.splits.train, ds.splits.val, cfg, topt);
  auto params = std::make_shared<const model::DeepAutoParams>(result.params);
  result.report.test_metrics = model_metrics(params, cfg, ds.splits.test, o.threshold);
  model::save_model_file(o.output, model::ModelBundle{cfg, result.params, ds.scaler});

  json j = result.report.to_json();
  j["run"] = run_json(o.input, po);
  j["run"]["model"] = o.output;
  j["run"]["threshold"] = o.threshold;
  report_out.stream() << j.dump(2) << '\n';
  return 0;
}

int cmd_grid(const Common& o) {
  require_readable(o.input, "--input");
  if (o.format != "json" && o.format != "table") throw UsageError("--format must be json or table");
  const auto cfg = model_config(o.config, o.seed);
  model::PrepareOptions po{o.min_anchor, o.anchor_stride, std::nullopt};
  Output out(o.output);

  const auto cells = model::assemble_series(read_input(o.input), cfg.task, cfg.step_seconds);
  const auto candidates = model::locality_ladder(cfg.window.period_steps, cfg.window.season_steps);
  const auto report = model::grid_search(cells, cfg, candidates, po);
  if (o.format == "table") {
    out.stream() << report.to_table();
  } else {
    json j = report.to_json();
    j["config"] = model::to_json(cfg);
    j["run"] = run_json(o.input, po);
    out.stream() << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_evaluate(const Common& o, double ridge_lambda) {
  require_readable(o.input, "--input");
  require_readable(o.model, "--model");
  if (o.format != "json" && o.format != "table") throw UsageError("--format must be json or table");
  if (!(ridge_lambda >= 0.0)) throw UsageError("--ridge-lambda must be non-negative");
  if (o.threshold < 0.0 || o.threshold > 1.0) throw UsageError("--threshold must be in [0,1]");
  Output out(o.output);

  auto bundle = model::load_model_file(o.model);
  const auto& cfg = bundle.config;
  model::PrepareOptions po{o.min_anchor, o.anchor_stride, bundle.scaler};
  const auto cells = model::assemble_series(read_input(o.input), cfg.task, cfg.step_seconds);
  const auto ds = model::prepare_dataset(cells, cfg, po);

  auto params = std::make_shared<const model::DeepAutoParams>(bundle.params);
  eval::DeepAutoPredictor da(params);
  eval::NaivePredictor naive(cfg.target_spec());
  json j;
  if (cfg.output.kind == model::OutputSpec::Kind::pdf) {
    std::vector<const eval::Predictor*> ps{&da, &naive};
    json kl = json::array();
    for (const auto& row : eval::compare_kl(ps, ds.splits.test))
      kl.push_back({{"algorithm", row.algorithm}, {"kl", row.kl}});
    j = {{"kl", kl}};
    if (o.format == "table") {
      for (const auto& row : kl) out.stream() << row["algorithm"].get<std::string>() << '\t' << row["kl"] << '\n';
      return 0;
    }
  } else {
    eval::SeasonalNaivePredictor seasonal(ds.series, cfg.window.period_steps, cfg.target_spec());
    eval::RidgeArPredictor ridge;
    ridge.fit(ds.splits.train, ridge_lambda, cfg.use_external);
    std::vector<const eval::Predictor*> ps{&da, &naive, &seasonal, &ridge};
    const auto report = eval::compare_report(ps, ds.splits.test, cfg.output.horizons, o.threshold);
    if (o.format == "table") {
      out.stream() << report.to_table();
      return 0;
    }
    j = report.to_json();
  }
  j["config"] = model::to_json(cfg);
  j["run"] = run_json(o.input, po);
  j["run"]["model"] = o.model;
  j["run"]["ridge_lambda"] = ridge_lambda;
  j["run"]["test_samples"] = ds.splits.test.size();
  out.stream() << j.dump(2) << '\n';
  return 0;
}

int cmd_acf(const Common& o, std::string cell, const std::string& channel, std::int64_t step,
            std::size_t max_lag) {
  require_readable(o.input, "--input");
  if (step <= 0) throw UsageError("--step must be positive");
  Output out(o.output);
  const data::Task task = channel.rfind("rsrq", 0) == 0 ? data::Task::rsrq : data::Task::load;
  const auto cells = model::assemble_series(read_input(o.input), task, step);
  if (cells.series.empty()) throw DataError("no usable cells");
  const data::KpiSeries* s = &cells.series.front();
  if (!cell.empty()) {
    s = nullptr;
    for (const auto& c : cells.series)
      if (c.cell_id == cell) s = &c;
    if (!s) throw DataError("cell " + cell + " not found in " + o.input);
  }
  if (max_lag == 0) max_lag = static_cast<std::size_t>(8 * 86400 / step);
  if (max_lag >= s->length()) max_lag = s->length() - 1;
  const auto acf = data::autocorrelation(s->channel(s->channel_index(channel)), max_lag);
  out.stream() << "lag,acf\n";
  char buf[64];
  for (std::size_t k = 0; k < acf.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, acf[k]);
    out.stream() << buf;
  }
  return 0;
}

int cmd_predict(const Common& o, const std::string& split, const std::string& metrics_path) {
  require_readable(o.input, "--input");
  require_readable(o.model, "--model");
  if (!split.empty() && split != "train" && split != "val" && split != "test")
    throw UsageError("--split must be train, val or test");
  if (!metrics_path.empty() && split.empty()) throw UsageError("--metrics needs --split");
  Output out(o.output);
  std::unique_ptr<Output> metrics_out;
  if (!metrics_path.empty()) metrics_out = std::make_unique<Output>(metrics_path);

  auto bundle = model::load_model_file(o.model);
  const auto records = read_input(o.input);
  if (split.empty()) {
    // Causal path shared with the streaming engine.
    for (const auto& p : stream::batch_predict(records, bundle)) out.stream() << p.to_json().dump() << '\n';
    return 0;
  }

  const auto& cfg = bundle.config;
  model::PrepareOptions po{o.min_anchor, o.anchor_stride, bundle.scaler};
  const auto ds = model::prepare_dataset(model::assemble_series(records, cfg.task, cfg.step_seconds), cfg, po);
  const auto& part = split == "train" ? ds.splits.train : split == "val" ? ds.splits.val : ds.splits.test;
  auto params = std::make_shared<const model::DeepAutoParams>(bundle.params);
  for (const auto& s : part) {
    stream::PredictionRecord p;
    p.cell = ds.series[s.cell_index].cell_id;
    p.anchor_ts = s.anchor_ts;
    if (cfg.output.kind == model::OutputSpec::Kind::scalar_horizons) p.horizons = cfg.output.horizons;
    p.values = model::forward(s, *params);
    json j = p.to_json();
    j["target"] = s.target;
    out.stream() << j.dump() << '\n';
  }
  if (metrics_out) metrics_out->stream() << model_metrics(params, cfg, part, o.threshold).dump(2) << '\n';
  return 0;
}

int connect_to(const stream::Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res) != 0)
    throw Error("cannot resolve " + ep.host);
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const bool ok = fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0;
  ::freeaddrinfo(res);
  if (!ok) {
    if (fd >= 0) ::close(fd);
    throw Error("cannot connect to " + ep.host + ":" + std::to_string(ep.port));
  }
  return fd;
}

int cmd_replay(const Common& o, double speedup, const std::string& target) {
  require_readable(o.input, "--input");
  if (!(speedup > 0.0)) throw UsageError("--speedup must be positive");
  std::optional<stream::Endpoint> ep;
  if (!target.empty()) ep = stream::parse_endpoint(target);
  std::vector<std::string> lines;
  {
    std::ifstream in(o.input);
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) lines.push_back(std::move(line));
  }
  int fd = -1;
  if (ep) fd = connect_to(*ep);
  std::string buf;
  auto drain = [&] {
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::send(fd, buf.data() + off, buf.size() - off, MSG_NOSIGNAL);
      if (n <= 0) throw Error("ingest connection closed");
      off += static_cast<std::size_t>(n);
    }
    buf.clear();
  };
  const auto stats = synth::replay_lines(lines, speedup, [&](std::string_view line) {
    if (fd < 0) {
      std::cout << line << '\n';
      return;
    }
    buf.append(line);
    buf.push_back('\n');
    // Flat-out replays batch writes; paced replays send every record as it becomes due.
    if (speedup != std::numeric_limits<double>::infinity() || buf.size() > (1 << 16)) drain();
  });
  if (fd >= 0) {
    drain();
    ::close(fd);
  }
  std::cout.flush();
  log::info("replayed", {{"lines", stats.emitted}, {"seconds", stats.seconds}});
  return 0;
}

int cmd_serve(const Common& o, const std::string& http, const std::string& ingest, const std::string& firehose,
              bool use_stdin, bool exit_on_eof, std::int64_t idle_flush_ms, double ttl_hours) {
  require_readable(o.model, "--model");
  if (!(ttl_hours > 0.0)) throw UsageError("--ttl-hours must be positive");
  stream::ServerOptions so;
  if (!http.empty()) so.http = stream::parse_endpoint(http);
  if (!ingest.empty()) so.ingest = stream::parse_endpoint(ingest);
  if (!firehose.empty()) so.firehose = stream::parse_endpoint(firehose);
  if (!use_stdin && !so.ingest.enabled()) throw UsageError("serve needs --listen-ingest or --stdin");
  so.model_path = o.model;

  stream::EngineOptions eo;
  eo.idle_ttl_seconds = static_cast<std::int64_t>(ttl_hours * 3600.0);
  stream::Engine engine(eo);
  engine.load_model(model::load_model_file(o.model));
  const auto step = engine.model()->bundle.config.step_seconds;
  so.idle_flush = std::chrono::milliseconds(idle_flush_ms >= 0 ? idle_flush_ms : 2 * step * 1000);

  // Signals are handled synchronously by this thread only.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGHUP);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  stream::Server server(engine, so);
  server.start();
  std::cerr << json{{"level", "info"},
                    {"event", "listening"},
                    {"http_port", server.http_port()},
                    {"ingest_port", server.ingest_port()},
                    {"firehose_port", server.firehose_port()}}
                   .dump()
            << std::endl;

  std::thread stdin_thread;
  if (use_stdin) {
    stdin_thread = std::thread([&] {
      server.ingest_stream(std::cin);
      if (exit_on_eof) ::kill(::getpid(), SIGTERM);
    });
  }
  while (true) {
    int sig = 0;
    if (sigwait(&signals, &sig) != 0) continue;
    if (sig == SIGHUP) {
      engine.reload_model_file(o.model);
      continue;
    }
    break;
  }
  server.stop();
  if (stdin_thread.joinable()) {
    if (exit_on_eof) {
      stdin_thread.join();
    } else {
      stdin_thread.detach();
    }
  }
  std::cout << engine.health().dump() << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeepAuto cell KPI forecasting: generate, train, evaluate and serve"};
  app.require_subcommand(1);
  Common o;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub, bool input, bool config) {
    if (input) sub->add_option("--input", o.input, "NDJSON record file ('-' for stdin)");
    if (config) {
      sub->add_option("--config", o.config, "JSON config: a file path or an inline object");
      sub->add_option("--seed", seed_value, "Overrides the config seed");
    }
    sub->add_option("--output", o.output, "Output path (default stdout)");
  };
  auto add_prep = [&](CLI::App* sub) {
    sub->add_option("--anchor-stride", o.anchor_stride, "Keep every n-th anchor")->check(CLI::PositiveNumber);
    sub->add_option("--min-anchor", o.min_anchor, "First usable anchor index");
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic NDJSON record file");
  std::string preset = "load";
  add_common(gen, false, true);
  gen->add_option("--preset", preset, "load | rsrq")->check(CLI::IsMember({"load", "rsrq"}));

  auto* prep = app.add_subcommand("prepare", "Window and scale a record file; writes a dataset manifest");
  std::string samples_path;
  add_common(prep, true, true);
  add_prep(prep);
  prep->add_option("--samples", samples_path, "Also write every windowed sample as NDJSON");

  auto* tr = app.add_subcommand("train", "Train a model and write it with its report");
  std::string report_path;
  bool serial = false;
  add_common(tr, true, true);
  add_prep(tr);
  tr->add_option("--report", report_path, "Training report path (default stdout)");
  tr->add_option("--threshold", o.threshold, "MAPE load threshold for test metrics");
  tr->add_flag("--serial", serial, "Use the single-threaded gradient kernel");

  auto* gr = app.add_subcommand("grid", "Locality / periodicity / seasonality candidate grid");
  add_common(gr, true, true);
  add_prep(gr);
  gr->add_option("--format", o.format, "json | table");

  auto* ev = app.add_subcommand("evaluate", "Compare the model with baselines on the test split");
  double ridge_lambda = 1e-3;
  add_common(ev, true, false);
  add_prep(ev);
  ev->add_option("--model", o.model, "Model file")->required();
  ev->add_option("--threshold", o.threshold, "MAPE load threshold");
  ev->add_option("--ridge-lambda", ridge_lambda, "Ridge penalty of the AR baseline");
  ev->add_option("--format", o.format, "json | table");

  auto* acf = app.add_subcommand("acf", "Autocorrelation of one cell as CSV");
  std::string acf_cell, acf_channel = "load";
  std::int64_t acf_step = 900;
  std::size_t max_lag = 0;
  add_common(acf, true, false);
  acf->add_option("--cell", acf_cell, "Cell id (default: first cell)");
  acf->add_option("--channel", acf_channel, "Channel name");
  acf->add_option("--step", acf_step, "Bucket length in seconds");
  acf->add_option("--max-lag", max_lag, "Largest lag in steps (default 8 days)");

  auto* sv = app.add_subcommand("serve", "Run the streaming prediction engine");
  std::string http = "127.0.0.1:8080", ingest, firehose;
  bool use_stdin = false, exit_on_eof = false;
  std::int64_t idle_flush_ms = -1;
  double ttl_hours = 24.0;
  sv->add_option("--model", o.model, "Model file")->required();
  sv->add_option("--listen-http", http, "HTTP address host:port (port 0 picks a free port)");
  sv->add_option("--listen-ingest", ingest, "NDJSON ingest address host:port");
  sv->add_option("--firehose", firehose, "Prediction firehose address host:port");
  sv->add_flag("--stdin", use_stdin, "Also ingest NDJSON from stdin");
  sv->add_flag("--exit-on-eof", exit_on_eof, "Stop after stdin ends and print final health");
  sv->add_option("--idle-flush-ms", idle_flush_ms, "Close open buckets after this much idle time (default 2 steps)");
  sv->add_option("--ttl-hours", ttl_hours, "Forget cells silent for this long (event time)");

  auto* pr = app.add_subcommand("predict", "Batch predictions from a model and a record file");
  std::string split, metrics_path;
  add_common(pr, true, false);
  add_prep(pr);
  pr->add_option("--model", o.model, "Model file")->required();
  pr->add_option("--split", split, "Predict the windowed train/val/test samples instead of the causal stream");
  pr->add_option("--metrics", metrics_path, "With --split, write metrics for those samples");
  pr->add_option("--threshold", o.threshold, "MAPE load threshold");

  auto* rp = app.add_subcommand("replay", "Replay a record file in (scaled) real time");
  double speedup = std::numeric_limits<double>::infinity();
  std::string target;
  rp->add_option("--input", o.input, "NDJSON record file")->required();
  rp->add_option("--speedup", speedup, "Time compression factor (default: flat out)");
  rp->add_option("--target", target, "Send to this ingest address instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  for (auto* sub : {gen, prep, tr, gr}) {
    if (sub->parsed() && sub->count("--seed") > 0) o.seed = seed_value;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, preset);
    if (prep->parsed()) return cmd_prepare(o, samples_path);
    if (tr->parsed()) return cmd_train(o, report_path, serial);
    if (gr->parsed()) return cmd_grid(o);
    if (ev->parsed()) return cmd_evaluate(o, ridge_lambda);
    if (acf->parsed()) return cmd_acf(o, acf_cell, acf_channel, acf_step, max_lag);
    if (sv->parsed())
      return cmd_serve(o, http, ingest, firehose, use_stdin, exit_on_eof, idle_flush_ms, ttl_hours);
    if (pr->parsed()) return cmd_predict(o, split, metrics_path);
    if (rp->parsed()) return cmd_replay(o, speedup, target);
  } catch (const UsageError& e) {
    log::error("usage", {{"error", e.what()}});
    return 1;
  } catch (const ConfigError& e) {
    log::error("config", {{"error", e.what()}});
    return 1;
  } catch (const std::exception& e) {
    log::error("failed", {{"error", e.what()}});
    return 2;
  }
  return 1;
}
