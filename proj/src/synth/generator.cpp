// SPDX-License-Identifier: Apache-2.0
#include "deepauto/synth/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "deepauto/error.hpp"
#include "deepauto/rng.hpp"

namespace deepauto::synth {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::int64_t kDay = 86400;
constexpr std::int64_t kRsrqBucket = 300;

// Monday .. Sunday
constexpr std::array<double, 7> kWeekdayProfile{0.5, 0.6, 0.6, 0.5, 0.3, -1.0, -1.2};

constexpr std::array<double, 3> kBands{700.0, 1900.0, 2600.0};
constexpr std::array<double, 3> kPowers{40.0, 43.0, 46.0};
constexpr std::array<double, 3> kBandwidths{5.0, 10.0, 20.0};

struct Cluster {
  double base;
  double phase;
  double weekly_sign;  // +1 busier on weekdays, -1 busier at weekends
  // short daily bursts (commute, events) at fixed times of day
  std::array<double, 2> burst_amp;
  std::array<double, 2> burst_center;  // fraction of a day
  std::array<double, 2> burst_width;   // fraction of a day
};

struct CellState {
  std::size_t cluster;
  double base_offset;
  double phase_offset;
  double shock = 0.0;
  double ar = 0.0;
  std::array<double, 3> config;
  double rsrq_mode0, rsrq_phase, rsrq_width;
  double rsrq_walk = 0.0;
};

int day_of_week(std::int64_t ts) {
  const std::int64_t days = ts >= 0 ? ts / kDay : (ts - kDay + 1) / kDay;
  return static_cast<int>(((days + 3) % 7 + 7) % 7);  // 1970-01-01 was a Thursday
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

template <std::size_t N>
double pick(Rng& rng, const std::array<double, N>& options, double current) {
  double v = current;
  while (v == current) v = options[rng.below(N)];
  return v;
}

void add_config_records(std::vector<data::CellRecord>& out, const std::string& cell, std::int64_t ts,
                        const std::array<double, 3>& cfg) {
  out.push_back({data::Topic::band, cell, ts, cfg[0]});
  out.push_back({data::Topic::power, cell, ts, cfg[1]});
  out.push_back({data::Topic::bandwidth, cell, ts, cfg[2]});
}

}  // namespace

void SynthConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  prob(missing_rate, "missing_rate");
  prob(event_rate, "event_rate");
  prob(weekend_damping, "weekend_damping");
  if (n_cells == 0 || days == 0) throw ConfigError("n_cells and days must be positive");
  if (step_seconds <= 0 || kDay % step_seconds != 0) throw ConfigError("step_seconds must divide one day");
  if (n_clusters == 0 || n_clusters > n_cells) throw ConfigError("n_clusters must lie in [1, n_cells]");
  for (double a : {daily_amp, weekly_amp, texture_amp, noise_sigma, ar_sigma, shock_size, ue_per_load, ue_noise})
    if (!(a >= 0.0)) throw ConfigError("amplitudes and noise levels must be >= 0");
  if (!(ar_rho >= 0.0 && ar_rho < 1.0)) throw ConfigError("ar_rho must lie in [0, 1)");
  const double swing = daily_amp + weekly_amp * 1.2 + texture_amp / 2;
  if (swing >= 0.5) throw ConfigError("daily, weekly and texture amplitudes together exceed the [0, 1] load range");
  if (rsrq.reports_per_5min > 0) {
    if (step_seconds % 300 != 0) throw ConfigError("rsrq reports need step_seconds to be a multiple of 300");
    if (!(rsrq.width_min > 0.0 && rsrq.width_max >= rsrq.width_min)) throw ConfigError("invalid rsrq width range");
    if (!(rsrq.drift_amp >= 0.0 && rsrq.walk_sigma >= 0.0 && rsrq.walk_limit >= 0.0))
      throw ConfigError("rsrq drift parameters must be >= 0");
  }
}

SynthConfig default_load_config() { return SynthConfig{}; }

SynthConfig default_rsrq_config() {
  SynthConfig c;
  c.n_cells = 20;
  c.days = 14;
  c.step_seconds = 300;
  c.emit_load = false;
  c.rsrq.reports_per_5min = 20;
  return c;
}

nlohmann::json to_json(const SynthConfig& c) {
  return {{"n_cells", c.n_cells},
          {"days", c.days},
          {"step_seconds", c.step_seconds},
          {"start_ts", c.start_ts},
          {"daily_amp", c.daily_amp},
          {"weekly_amp", c.weekly_amp},
          {"weekend_damping", c.weekend_damping},
          {"texture_amp", c.texture_amp},
          {"noise_sigma", c.noise_sigma},
          {"ar_rho", c.ar_rho},
          {"ar_sigma", c.ar_sigma},
          {"missing_rate", c.missing_rate},
          {"n_clusters", c.n_clusters},
          {"event_rate", c.event_rate},
          {"shock_size", c.shock_size},
          {"ue_per_load", c.ue_per_load},
          {"ue_noise", c.ue_noise},
          {"emit_load", c.emit_load},
          {"emit_config", c.emit_config},
          {"rsrq",
           {{"reports_per_5min", c.rsrq.reports_per_5min},
            {"drift_amp", c.rsrq.drift_amp},
            {"walk_sigma", c.rsrq.walk_sigma},
            {"walk_limit", c.rsrq.walk_limit},
            {"width_min", c.rsrq.width_min},
            {"width_max", c.rsrq.width_max}}},
          {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
  SynthConfig c;
  const nlohmann::json defaults = to_json(c);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!defaults.contains(it.key())) throw ConfigError("unknown generator field '" + it.key() + "'");
    if (it.key() == "rsrq") {
      if (!it->is_object()) throw ConfigError("generator field 'rsrq' must be an object");
      for (auto r = it->begin(); r != it->end(); ++r)
        if (!defaults["rsrq"].contains(r.key())) throw ConfigError("unknown rsrq field '" + r.key() + "'");
    }
  }
  nlohmann::json merged = defaults;
  merged.merge_patch(j);
  try {
    c.n_cells = merged["n_cells"].get<std::size_t>();
    c.days = merged["days"].get<std::size_t>();
    c.step_seconds = merged["step_seconds"].get<std::int64_t>();
    c.start_ts = merged["start_ts"].get<std::int64_t>();
    c.daily_amp = merged["daily_amp"].get<double>();
    c.weekly_amp = merged["weekly_amp"].get<double>();
    c.weekend_damping = merged["weekend_damping"].get<double>();
    c.texture_amp = merged["texture_amp"].get<double>();
    c.noise_sigma = merged["noise_sigma"].get<double>();
    c.ar_rho = merged["ar_rho"].get<double>();
    c.ar_sigma = merged["ar_sigma"].get<double>();
    c.missing_rate = merged["missing_rate"].get<double>();
    c.n_clusters = merged["n_clusters"].get<std::size_t>();
    c.event_rate = merged["event_rate"].get<double>();
    c.shock_size = merged["shock_size"].get<double>();
    c.ue_per_load = merged["ue_per_load"].get<double>();
    c.ue_noise = merged["ue_noise"].get<double>();
    c.emit_load = merged["emit_load"].get<bool>();
    c.emit_config = merged["emit_config"].get<bool>();
    const auto& r = merged["rsrq"];
    c.rsrq.reports_per_5min = r["reports_per_5min"].get<std::size_t>();
    c.rsrq.drift_amp = r["drift_amp"].get<double>();
    c.rsrq.walk_sigma = r["walk_sigma"].get<double>();
    c.rsrq.walk_limit = r["walk_limit"].get<double>();
    c.rsrq.width_min = r["width_min"].get<double>();
    c.rsrq.width_max = r["width_max"].get<double>();
    c.seed = merged["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string cell_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cell_%03zu", index);
  return buf;
}

std::size_t cluster_of(const SynthConfig& c, std::size_t cell) noexcept { return cell % c.n_clusters; }

std::vector<data::CellRecord> generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);

  std::vector<Cluster> clusters(config.n_clusters);
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    auto& cl = clusters[k];
    cl.base = rng.uniform(0.3, 0.7);
    // evenly spread peak hours keep clusters apart
    cl.phase = kTwoPi * static_cast<double>(k) / static_cast<double>(clusters.size());
    cl.weekly_sign = k % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < 2; ++j) {
      cl.burst_amp[j] = config.texture_amp * rng.uniform(0.6, 1.0);
      // staggered so clusters burst at different times of day
      cl.burst_center[j] = std::fmod(static_cast<double>(k) / static_cast<double>(2 * clusters.size()) +
                                         0.5 * static_cast<double>(j) + 0.3 + rng.uniform(-0.02, 0.02),
                                     1.0);
      cl.burst_width[j] = rng.uniform(0.25, 0.5) / 24.0;
    }
  }

  std::vector<CellState> cells(config.n_cells);
  std::vector<std::string> names(config.n_cells);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& s = cells[c];
    names[c] = cell_name(c);
    s.cluster = cluster_of(config, c);
    s.base_offset = rng.uniform(-0.05, 0.05);
    s.phase_offset = rng.uniform(-0.1, 0.1);
    s.config = {kBands[rng.below(3)], kPowers[rng.below(3)], kBandwidths[rng.below(3)]};
    s.rsrq_mode0 = rng.uniform(10.0, 24.0);
    s.rsrq_phase = rng.uniform(0.0, kTwoPi);
    s.rsrq_width = rng.uniform(config.rsrq.width_min, config.rsrq.width_max);
  }

  std::vector<data::CellRecord> out;
  const std::int64_t steps_per_day = kDay / config.step_seconds;
  const std::int64_t total_steps = steps_per_day * static_cast<std::int64_t>(config.days);
  const double shock_prob = config.event_rate / static_cast<double>(steps_per_day);
  const std::size_t reports = config.rsrq.reports_per_5min;
  std::vector<double> cdf(data::kRsrqBins);

  if (config.emit_config)
    for (std::size_t c = 0; c < cells.size(); ++c) add_config_records(out, names[c], config.start_ts, cells[c].config);

  for (std::int64_t k = 0; k < total_steps; ++k) {
    const std::int64_t ts = config.start_ts + k * config.step_seconds;
    const double day_frac = static_cast<double>((ts % kDay + kDay) % kDay) / static_cast<double>(kDay);
    const int dow = day_of_week(ts);
    const double weekend = dow >= 5 ? 1.0 : 0.0;

    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto& s = cells[c];
      const auto& cl = clusters[s.cluster];

      if (k > 0 && rng.bernoulli(shock_prob)) {
        double delta = config.shock_size * rng.uniform(0.5, 1.5);
        const double level = cl.base + s.base_offset + s.shock;
        if (level + delta > 0.8 || (level - delta >= 0.2 && rng.bernoulli(0.5))) delta = -delta;
        s.shock += delta;
        s.config[2] = pick(rng, kBandwidths, s.config[2]);
        if (rng.bernoulli(0.5)) s.config[0] = pick(rng, kBands, s.config[0]);
        if (rng.bernoulli(0.5)) s.config[1] = pick(rng, kPowers, s.config[1]);
        if (config.emit_config) add_config_records(out, names[c], ts, s.config);
      }

      if (config.emit_load) {
        const double daily = config.daily_amp * (1.0 - config.weekend_damping * weekend) *
                             std::sin(kTwoPi * day_frac + cl.phase + s.phase_offset);
        const double weekly = cl.weekly_sign * config.weekly_amp * kWeekdayProfile[static_cast<std::size_t>(dow)];
        double texture = 0.0;
        for (std::size_t j = 0; j < 2; ++j) {
          double d = std::abs(day_frac - cl.burst_center[j]);
          d = std::min(d, 1.0 - d);
          const double z = d / cl.burst_width[j];
          texture += cl.burst_amp[j] * std::exp(-0.5 * z * z);
        }
        s.ar = config.ar_rho * s.ar + config.ar_sigma * rng.normal();
        const double noise = config.noise_sigma * rng.normal();
        const double load =
            round4(std::clamp(cl.base + s.base_offset + s.shock + daily + weekly + texture + s.ar + noise, 0.0, 1.0));
        const double ue = std::max(0.0, std::round(load * config.ue_per_load + config.ue_noise * rng.normal()));
        if (!rng.bernoulli(config.missing_rate)) out.push_back({data::Topic::load, names[c], ts, load});
        if (!rng.bernoulli(config.missing_rate)) out.push_back({data::Topic::ue, names[c], ts, ue});
      }

      if (reports > 0) {
        for (std::int64_t b = ts; b < ts + config.step_seconds; b += kRsrqBucket) {
          const double frac = static_cast<double>((b % kDay + kDay) % kDay) / static_cast<double>(kDay);
          s.rsrq_walk += config.rsrq.walk_sigma * rng.normal();
          if (s.rsrq_walk > config.rsrq.walk_limit) s.rsrq_walk = 2 * config.rsrq.walk_limit - s.rsrq_walk;
          if (s.rsrq_walk < -config.rsrq.walk_limit) s.rsrq_walk = -2 * config.rsrq.walk_limit - s.rsrq_walk;
          const double mode = std::clamp(
              s.rsrq_mode0 + config.rsrq.drift_amp * std::sin(kTwoPi * frac + s.rsrq_phase) + s.rsrq_walk, 0.0,
              static_cast<double>(data::kRsrqBins - 1));
          double total = 0.0;
          for (int bin = 0; bin < data::kRsrqBins; ++bin) {
            const double z = (bin - mode) / s.rsrq_width;
            total += std::exp(-0.5 * z * z);
            cdf[static_cast<std::size_t>(bin)] = total;
          }
          const bool dropped = rng.bernoulli(config.missing_rate);
          for (std::size_t r = 0; r < reports; ++r) {
            const double u = rng.uniform() * total;
            const auto bin = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            const std::int64_t rts = b + static_cast<std::int64_t>(rng.below(kRsrqBucket));
            if (!dropped)
              out.push_back({data::Topic::rsrq, names[c], rts,
                             static_cast<double>(std::min<std::size_t>(bin, data::kRsrqBins - 1))});
          }
        }
      }
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const data::CellRecord& a, const data::CellRecord& b) {
    if (a.ts != b.ts) return a.ts < b.ts;
    if (a.cell != b.cell) return a.cell < b.cell;
    return static_cast<int>(a.topic) < static_cast<int>(b.topic);
  });
  return out;
}

}  // namespace deepauto::synth
