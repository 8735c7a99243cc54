// SPDX-License-Identifier: Apache-2.0
#include "deepauto/model/config.hpp"

#include <fstream>
#include <set>

#include "deepauto/error.hpp"

namespace deepauto::model {

std::size_t DeepAutoConfig::base_channels() const noexcept {
  return data::task_channels(task).size();
}

data::TargetSpec DeepAutoConfig::target_spec() const {
  data::TargetSpec t;
  if (output.kind == OutputSpec::Kind::scalar_horizons) {
    t.kind = data::TargetSpec::Kind::horizons;
    t.horizons = output.horizons;
    t.channel = 0;
  } else {
    t.kind = data::TargetSpec::Kind::histogram;
    t.width = output.bins;
  }
  return t;
}

void DeepAutoConfig::validate() const {
  window.validate();
  if (step_seconds <= 0) throw ConfigError("step_seconds must be positive");
  if (input_dim != base_channels() * (1 + spatial_k)) {
    throw ConfigError("input_dim " + std::to_string(input_dim) + " does not equal channels x (1 + spatial_k) = " +
                      std::to_string(base_channels() * (1 + spatial_k)));
  }
  if ((window.n_recent > 0 && hidden_r == 0) || (window.n_periodic > 0 && hidden_p == 0) ||
      (window.n_seasonal > 0 && hidden_s == 0)) {
    throw ConfigError("hidden sizes of enabled branches must be positive");
  }
  if (use_external && ext_embed_dim == 0) throw ConfigError("ext_embed_dim must be positive when external is on");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (output.kind == OutputSpec::Kind::scalar_horizons) {
    if (task != data::Task::load) throw ConfigError("scalar_horizons output requires the load task");
    if (output.horizons.empty()) throw ConfigError("at least one horizon is required");
    for (auto h : output.horizons)
      if (h == 0) throw ConfigError("horizons must be >= 1");
  } else {
    if (task != data::Task::rsrq) throw ConfigError("pdf output requires the rsrq task");
    if (output.bins != static_cast<std::size_t>(data::kRsrqBins)) throw ConfigError("pdf output must have 35 bins");
  }
}

DeepAutoConfig default_config(data::Task task) {
  DeepAutoConfig c;
  c.task = task;
  if (task == data::Task::rsrq) {
    c.step_seconds = 300;
    c.window = {.n_recent = 5, .n_periodic = 0, .n_seasonal = 0, .period_steps = 288, .season_steps = 2016};
    c.output.kind = OutputSpec::Kind::pdf;
    c.output.horizons.clear();
  } else {
    c.step_seconds = 60;
    c.window = {.n_recent = 20, .n_periodic = 0, .n_seasonal = 0, .period_steps = 1440, .season_steps = 10080};
  }
  c.derive_input_dim();
  return c;
}

nlohmann::json to_json(const DeepAutoConfig& c) {
  nlohmann::json out;
  out["task"] = std::string(data::to_string(c.task));
  out["step_seconds"] = c.step_seconds;
  out["window"] = {{"n_r", c.window.n_recent},
                   {"n_p", c.window.n_periodic},
                   {"n_s", c.window.n_seasonal},
                   {"period_steps", c.window.period_steps},
                   {"season_steps", c.window.season_steps}};
  out["spatial_k"] = c.spatial_k;
  out["input_dim"] = c.input_dim;
  out["hidden_r"] = c.hidden_r;
  out["hidden_p"] = c.hidden_p;
  out["hidden_s"] = c.hidden_s;
  out["use_external"] = c.use_external;
  out["ext_embed_dim"] = c.ext_embed_dim;
  if (c.output.kind == OutputSpec::Kind::scalar_horizons) {
    out["output"] = {{"kind", "scalar_horizons"}, {"horizons", c.output.horizons}};
  } else {
    out["output"] = {{"kind", "pdf"}, {"bins", c.output.bins}};
  }
  out["alpha"] = c.alpha;
  out["lr"] = c.lr;
  out["batch_size"] = c.batch_size;
  out["max_epochs"] = c.max_epochs;
  out["patience"] = c.patience;
  out["seed"] = c.seed;
  return out;
}

namespace {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& dst) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    dst = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError(std::string("unknown ") + where + " field '" + it.key() + "'");
  }
}

}  // namespace

DeepAutoConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"task", "step_seconds", "window", "spatial_k", "input_dim", "hidden_r", "hidden_p", "hidden_s",
                  "use_external", "ext_embed_dim", "output", "alpha", "lr", "batch_size", "max_epochs", "patience",
                  "seed"},
                 "config");
  std::string task = "load";
  read_field(j, "task", task);
  DeepAutoConfig c = default_config(data::task_from_string(task));
  read_field(j, "step_seconds", c.step_seconds);
  if (auto w = j.find("window"); w != j.end()) {
    if (!w->is_object()) throw ConfigError("config field 'window' must be an object");
    reject_unknown(*w, {"n_r", "n_p", "n_s", "period_steps", "season_steps"}, "window");
    read_field(*w, "n_r", c.window.n_recent);
    read_field(*w, "n_p", c.window.n_periodic);
    read_field(*w, "n_s", c.window.n_seasonal);
    read_field(*w, "period_steps", c.window.period_steps);
    read_field(*w, "season_steps", c.window.season_steps);
  }
  read_field(j, "spatial_k", c.spatial_k);
  c.derive_input_dim();
  read_field(j, "input_dim", c.input_dim);
  read_field(j, "hidden_r", c.hidden_r);
  read_field(j, "hidden_p", c.hidden_p);
  read_field(j, "hidden_s", c.hidden_s);
  read_field(j, "use_external", c.use_external);
  read_field(j, "ext_embed_dim", c.ext_embed_dim);
  if (auto o = j.find("output"); o != j.end()) {
    if (!o->is_object()) throw ConfigError("config field 'output' must be an object");
    reject_unknown(*o, {"kind", "horizons", "bins"}, "output");
    std::string kind = c.output.kind == OutputSpec::Kind::pdf ? "pdf" : "scalar_horizons";
    read_field(*o, "kind", kind);
    if (kind == "scalar_horizons") c.output.kind = OutputSpec::Kind::scalar_horizons;
    else if (kind == "pdf") c.output.kind = OutputSpec::Kind::pdf;
    else throw ConfigError("unknown output kind '" + kind + "'");
    read_field(*o, "horizons", c.output.horizons);
    read_field(*o, "bins", c.output.bins);
  }
  read_field(j, "alpha", c.alpha);
  read_field(j, "lr", c.lr);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "max_epochs", c.max_epochs);
  read_field(j, "patience", c.patience);
  read_field(j, "seed", c.seed);
  c.validate();
  return c;
}

DeepAutoConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config '" + path + "' is not valid JSON");
  return config_from_json(j);
}

}  // namespace deepauto::model
