// SPDX-License-Identifier: Apache-2.0
#include "deepauto/stream/prediction.hpp"

#include <algorithm>

#include "deepauto/data/scaler.hpp"
#include "deepauto/data/series.hpp"
#include "deepauto/error.hpp"

namespace deepauto::stream {

std::shared_ptr<const ModelSnapshot> ModelSnapshot::make(model::ModelBundle bundle, std::uint64_t version) {
  bundle.config.validate();
  if (bundle.config.spatial_k != 0)
    throw ConfigError("models with spatial augmentation cannot be served online");
  if (bundle.scaler.channels() != bundle.config.base_channels())
    throw ConfigError("model scaler does not match the task's channels");
  auto s = std::make_shared<ModelSnapshot>();
  s->channel_names = data::task_channels(bundle.config.task);
  s->target = bundle.config.target_spec();
  s->lookback = bundle.config.window.lookback();
  s->version = version;
  s->bundle = std::move(bundle);
  return s;
}

nlohmann::json PredictionRecord::to_json() const {
  nlohmann::json j{{"cell", cell}, {"anchor_ts", anchor_ts}};
  if (horizons.empty()) {
    j["pdf"] = values;
  } else {
    for (std::size_t k = 0; k < horizons.size(); ++k) j["h" + std::to_string(horizons[k])] = values[k];
  }
  j["model_version"] = model_version;
  j["latency_ms"] = latency_ms;
  return j;
}

PredictionRecord PredictionRecord::from_json(const nlohmann::json& j) {
  PredictionRecord p;
  try {
    p.cell = j.at("cell").get<std::string>();
    p.anchor_ts = j.at("anchor_ts").get<std::int64_t>();
    p.model_version = j.value("model_version", std::uint64_t{0});
    p.latency_ms = j.value("latency_ms", 0.0);
    if (j.contains("pdf")) {
      p.values = j.at("pdf").get<std::vector<double>>();
    } else {
      std::vector<std::pair<std::size_t, double>> hv;
      for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k.size() > 1 && k[0] == 'h' && k.find_first_not_of("0123456789", 1) == std::string::npos)
          hv.emplace_back(std::stoul(k.substr(1)), it->get<double>());
      }
      std::sort(hv.begin(), hv.end());
      for (const auto& [h, v] : hv) {
        p.horizons.push_back(h);
        p.values.push_back(v);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed prediction record: ") + e.what());
  }
  return p;
}

std::optional<PredictionRecord> predict_next(const data::CausalBuffer& buffer, const ModelSnapshot& model,
                                             const std::string& cell) {
  const std::size_t L = model.lookback;
  if (!buffer.ready(L)) return std::nullopt;
  const auto& cfg = model.bundle.config;
  data::KpiSeries window = buffer.tail(L, cell, cfg.step_seconds, model.channel_names);
  data::apply_scaler(model.bundle.scaler, window);
  const data::WindowedSample sample = data::build_sample(window, L, cfg.window, model.target, false);
  PredictionRecord p;
  p.cell = cell;
  p.anchor_ts = sample.anchor_ts;
  if (cfg.output.kind == model::OutputSpec::Kind::scalar_horizons) p.horizons = cfg.output.horizons;
  p.values = model::forward(sample, model.bundle.params);
  p.model_version = model.version;
  return p;
}

std::vector<PredictionRecord> batch_predict(const std::vector<data::CellRecord>& records,
                                            const model::ModelBundle& bundle) {
  const auto snapshot = ModelSnapshot::make(bundle, 0);
  const auto& cfg = bundle.config;
  std::vector<PredictionRecord> out;
  for (const auto& series : data::build_series(records, cfg.task, cfg.step_seconds)) {
    data::CausalBuffer buffer(series.channel_count(), std::max<std::size_t>(snapshot->lookback, 1));
    for (std::size_t t = 0; t < series.length(); ++t) {
      buffer.push_row(series, t);
      if (auto p = predict_next(buffer, *snapshot, series.cell_id)) out.push_back(std::move(*p));
    }
  }
  return out;
}

}  // namespace deepauto::stream
