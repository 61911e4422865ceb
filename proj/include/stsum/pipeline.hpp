#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "stsum/error.hpp"
#include "stsum/features.hpp"
#include "stsum/field.hpp"
#include "stsum/fusion.hpp"
#include "stsum/infotheory.hpp"

namespace stsum {

struct KeyEntry {
  std::size_t index = 0;
  friend bool operator==(const KeyEntry&, const KeyEntry&) = default;
};

struct FusedEntry {
  std::size_t run_start = 0;
  std::size_t run_end = 0;
  std::map<std::uint32_t, std::size_t> label_map;  // local label -> absolute index
  friend bool operator==(const FusedEntry&, const FusedEntry&) = default;
};

/// A lone quiet timestep between two keys; its predecessor already carries
/// its information, so it is dropped but kept on record.
struct DiscardedEntry {
  std::size_t index = 0;
  friend bool operator==(const DiscardedEntry&, const DiscardedEntry&) = default;
};

using ManifestEntry = std::variant<KeyEntry, FusedEntry, DiscardedEntry>;

struct ReductionStats {
  std::size_t input_count = 0;
  std::size_t output_count = 0;
  double reduction_ratio = 0.0;  // 1 - out/in, rounded to 4 decimals
  friend bool operator==(const ReductionStats&, const ReductionStats&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  ReductionStats stats;
  nlohmann::json config = nlohmann::json::object();
};

inline double round4(double v) { return std::round(v * 1e4) / 1e4; }

inline ReductionStats reduction_stats(std::size_t input_count, std::size_t output_count) {
  ReductionStats s{input_count, output_count, 0.0};
  if (input_count > 0)
    s.reduction_ratio = round4(1.0 - static_cast<double>(output_count) / static_cast<double>(input_count));
  return s;
}

/// Recomputes the statistics from the entries of a manifest.
inline ReductionStats reduction_stats(const Manifest& manifest) {
  std::size_t in = 0;
  std::size_t out = 0;
  for (const auto& e : manifest.entries) {
    if (const auto* f = std::get_if<FusedEntry>(&e)) {
      in += f->run_end - f->run_start + 1;
      ++out;
    } else if (std::holds_alternative<KeyEntry>(e)) {
      ++in;
      ++out;
    } else {
      ++in;
    }
  }
  return reduction_stats(in, out);
}

template <class S>
concept TimestepSource = requires(S& s) {
  { s.next() } -> std::same_as<std::optional<TimestepRecord>>;
};

template <class W>
concept SummarySink = requires(W& w, const TimestepRecord& r, const SummaryBundle& b) {
  w.write_key(r);
  w.write_fused(b);
};

struct NullSink {
  void write_key(const TimestepRecord&) {}
  void write_fused(const SummaryBundle&) {}
};

inline nlohmann::json config_echo(const TriggerConfig& trigger, const FusionConfig& fusion,
                                  const std::string& channel) {
  nlohmann::json t{{"kind", to_string(trigger.kind)}};
  if (trigger.kind == TriggerKind::mi_threshold) {
    t["mi_threshold"] = trigger.mi_threshold;
    t["channel_a"] = trigger.channel_a;
    t["channel_b"] = trigger.channel_b;
    t["mi_bin_count"] = trigger.mi_bin_count;
  } else {
    t["channel"] = trigger.channel;
    t["segmentation"] = trigger.segmentation == Segmentation::threshold ? "threshold" : "static-background";
    t["seg_threshold"] = trigger.seg_threshold;
    t["seg_polarity"] = trigger.seg_polarity == Polarity::above ? "above" : "below";
    t["min_component_size"] = trigger.min_component_size;
    t["connectivity"] = static_cast<int>(trigger.connectivity);
    t["baseline"] = trigger.effective_baseline() == Baseline::first_timestep ? "first" : "second";
  }
  nlohmann::json f{
      {"channel", channel},
      {"measure", to_string(fusion.measure)},
      {"bin_count", fusion.bin_count},
      {"binning", "equal-width over each field's observed [min,max]"},
      {"log_base", 2},
      {"conf_th", fusion.confidence.threshold},
      {"conf_dir", fusion.confidence.comparator == ConfidenceRule::Comparator::below_is_background ? "below-bg"
                                                                                                   : "above-bg"},
  };
  if (fusion.measure == MeasureKind::ssi) f["ssi_sign"] = fusion.ssi_sign == SsiSign::positive ? "positive" : "negated";
  return {{"trigger", t}, {"fusion", f}};
}

/// Walks the sequence once: trigger timesteps are kept raw, runs of quiet
/// timesteps between them are fused on the fly (length >= 2) or discarded
/// (length 1). Holds at most one pending record plus the run accumulator.
template <TimestepSource Source, SummarySink Sink>
Manifest run_pipeline(Source& source, const TriggerConfig& trigger, const FusionConfig& fusion,
                      const std::string& channel, Sink& sink) {
  trigger.validate();
  Manifest manifest;
  manifest.config = config_echo(trigger, fusion, channel);

  std::optional<TimestepRecord> first = source.next();
  require(first.has_value(), ErrorCode::empty_input, "timestep source is empty");
  const Shape shape = first->shape();
  std::vector<std::string> tags;
  for (const auto& [tag, f] : first->channels()) tags.push_back(tag);

  std::size_t input_count = 0;
  std::size_t last_index = 0;
  TriggerState state;
  std::optional<TimestepRecord> pending;
  RunFuser fuser(fusion);

  auto flush = [&] {
    if (pending) {
      manifest.entries.emplace_back(DiscardedEntry{pending->index()});
      pending.reset();
    } else if (!fuser.empty()) {
      SummaryBundle bundle = fuser.finish();
      FusedEntry e{bundle.run_start, bundle.run_end, {}};
      for (std::uint32_t j = 1; j <= bundle.run_length(); ++j) e.label_map[j] = bundle.absolute_index(j);
      sink.write_fused(bundle);
      manifest.entries.emplace_back(std::move(e));
    }
  };

  auto consume = [&](TimestepRecord record) {
    if (input_count > 0) {
      require(record.index() == last_index + 1, ErrorCode::invalid_sequence,
              "timestep " + std::to_string(record.index()) + " does not follow " + std::to_string(last_index));
      require(record.shape() == shape, ErrorCode::invalid_sequence,
              "timestep " + std::to_string(record.index()) + " has shape " + record.shape().to_string() +
                  ", expected " + shape.to_string());
      require(record.channels().size() == tags.size(), ErrorCode::invalid_sequence,
              "timestep " + std::to_string(record.index()) + " changes its channel set");
      for (const auto& t : tags)
        require(record.has(t), ErrorCode::invalid_sequence,
                "timestep " + std::to_string(record.index()) + " lacks channel '" + t + "'");
    }
    ++input_count;
    last_index = record.index();

    const TriggerResult r = evaluate_trigger(state, record, trigger);
    state = r.state;
    if (r.fired) {
      flush();
      sink.write_key(record);
      manifest.entries.emplace_back(KeyEntry{record.index()});
      return;
    }
    if (pending) {
      fuser.add(pending->channel(channel), pending->index());
      pending.reset();
      fuser.add(record.channel(channel), record.index());
    } else if (fuser.empty()) {
      pending = std::move(record);
    } else {
      fuser.add(record.channel(channel), record.index());
    }
  };

  consume(std::move(*first));
  first.reset();
  while (auto record = source.next()) consume(std::move(*record));
  flush();

  manifest.stats = reduction_stats(manifest);
  return manifest;
}

inline nlohmann::json to_json(const Manifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    if (const auto* k = std::get_if<KeyEntry>(&e)) {
      entries.push_back({{"kind", "key"}, {"index", k->index}});
    } else if (const auto* f = std::get_if<FusedEntry>(&e)) {
      nlohmann::json labels = nlohmann::json::object();
      for (const auto& [local, abs] : f->label_map) labels[std::to_string(local)] = abs;
      entries.push_back({{"kind", "fused"}, {"run_start", f->run_start}, {"run_end", f->run_end}, {"label_map", labels}});
    } else {
      entries.push_back({{"kind", "discarded"}, {"index", std::get<DiscardedEntry>(e).index}});
    }
  }
  return {{"entries", entries},
          {"stats",
           {{"input_count", m.stats.input_count},
            {"output_count", m.stats.output_count},
            {"reduction_ratio", m.stats.reduction_ratio}}},
          {"config", m.config}};
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  Manifest m;
  try {
    for (const auto& e : j.at("entries")) {
      const std::string kind = e.at("kind");
      if (kind == "key") {
        m.entries.emplace_back(KeyEntry{e.at("index").get<std::size_t>()});
      } else if (kind == "fused") {
        FusedEntry f{e.at("run_start").get<std::size_t>(), e.at("run_end").get<std::size_t>(), {}};
        for (const auto& [local, abs] : e.at("label_map").items())
          f.label_map[static_cast<std::uint32_t>(std::stoul(local))] = abs.get<std::size_t>();
        m.entries.emplace_back(std::move(f));
      } else if (kind == "discarded") {
        m.entries.emplace_back(DiscardedEntry{e.at("index").get<std::size_t>()});
      } else {
        fail(ErrorCode::invalid_argument, "unknown manifest entry kind '" + kind + "'");
      }
    }
    const auto& s = j.at("stats");
    m.stats = {s.at("input_count").get<std::size_t>(), s.at("output_count").get<std::size_t>(),
               s.at("reduction_ratio").get<double>()};
    if (j.contains("config")) m.config = j.at("config");
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::invalid_argument, std::string("malformed manifest: ") + ex.what());
  }
  return m;
}

}  // namespace stsum
