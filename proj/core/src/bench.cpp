#include "dasml/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dasml/rng.hpp"

namespace dasml::run {

namespace {

using nlohmann::json;

constexpr const char* kReportSchema = "dasml-bench-report/1";
constexpr double kMonthSeconds = 30.0 * 86400.0;

json policy_to_json(const track::AlarmPolicy& p) {
  return json{{"radius_m", p.radius_m},
              {"k_confirm", p.k_confirm},
              {"gap_tolerance_s", p.gap_tolerance_s},
              {"min_probability", p.min_probability}};
}

track::AlarmPolicy policy_from_json(const json& j, track::AlarmPolicy base) {
  base.radius_m = j.value("radius_m", base.radius_m);
  base.k_confirm = j.value("k_confirm", base.k_confirm);
  base.gap_tolerance_s = j.value("gap_tolerance_s", base.gap_tolerance_s);
  base.min_probability = j.value("min_probability", base.min_probability);
  return base;
}

}  // namespace

BenchConfig bench_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("bench config: invalid JSON: ") + e.what());
  }
  BenchConfig c;
  try {
    c.sensor_count = j.value("sensor_count", c.sensor_count);
    c.sensor_spacing_m = j.value("sensor_spacing_m", c.sensor_spacing_m);
    c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
    c.scene_duration_s = j.value("scene_duration_s", c.scene_duration_s);
    c.onset_s = j.value("onset_s", c.onset_s);
    if (j.contains("distances_m")) c.distances_m = j.at("distances_m").get<std::vector<double>>();
    c.repeats = j.value("repeats", c.repeats);
    c.source_amplitude = j.value("source_amplitude", c.source_amplitude);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.attenuation_alpha = j.value("attenuation_alpha", c.attenuation_alpha);
    c.noise_scenes = j.value("noise_scenes", c.noise_scenes);
    c.noise_scene_duration_s = j.value("noise_scene_duration_s", c.noise_scene_duration_s);
    c.fiber_length_km = j.value("fiber_length_km", c.fiber_length_km);
    c.threads = j.value("threads", c.threads);
    c.seed = j.value("seed", c.seed);
    c.lowpass_alpha = j.value("lowpass_alpha", c.lowpass_alpha);
    if (j.contains("classic_policy"))
      c.classic_policy = policy_from_json(j.at("classic_policy"), c.classic_policy);
    if (j.contains("image_policy"))
      c.image_policy = policy_from_json(j.at("image_policy"), c.image_policy);
  } catch (const json::exception& e) {
    throw DataError(std::string("bench config: ") + e.what());
  }
  return c;
}

std::string bench_config_to_json(const BenchConfig& c) {
  json j;
  j["sensor_count"] = c.sensor_count;
  j["sensor_spacing_m"] = c.sensor_spacing_m;
  j["sample_rate_hz"] = c.sample_rate_hz;
  j["scene_duration_s"] = c.scene_duration_s;
  j["onset_s"] = c.onset_s;
  j["distances_m"] = c.distances_m;
  j["repeats"] = c.repeats;
  j["source_amplitude"] = c.source_amplitude;
  j["noise_std"] = c.noise_std;
  j["attenuation_alpha"] = c.attenuation_alpha;
  j["noise_scenes"] = c.noise_scenes;
  j["noise_scene_duration_s"] = c.noise_scene_duration_s;
  j["fiber_length_km"] = c.fiber_length_km;
  j["threads"] = c.threads;
  j["seed"] = c.seed;
  j["lowpass_alpha"] = c.lowpass_alpha;
  j["classic_policy"] = policy_to_json(c.classic_policy);
  j["image_policy"] = policy_to_json(c.image_policy);
  return j.dump(2);
}

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open bench config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return bench_config_from_json(ss.str());
}

namespace {

struct Accumulator {
  double wall_s = 0.0;
  double data_seconds = 0.0;
  std::uint64_t samples = 0;

  void add(const ExecStats& st) {
    wall_s += st.wall_s;
    data_seconds += st.data_seconds;
    samples += st.samples;
  }
};

struct DistanceTally {
  std::size_t detected = 0;
  std::size_t total = 0;
  double delay_sum = 0.0;
};

void tally_result(const std::vector<DelayResult>& delays, DistanceTally& tally,
                  double* delay_sum_all, std::size_t* detected_all) {
  for (const DelayResult& r : delays) {
    tally.total += 1;
    if (r.detected) {
      tally.detected += 1;
      tally.delay_sum += r.delay_s;
      *delay_sum_all += r.delay_s;
      *detected_all += 1;
    }
  }
}

PipelineMetrics finalize(const Accumulator& acc, std::map<double, DistanceTally>& by_distance,
                         double delay_sum, std::size_t detected, std::size_t false_alarms,
                         double noise_seconds, std::uint32_t sensors,
                         std::uint32_t fiber_sensors) {
  PipelineMetrics m;
  m.delay_mean_s = detected > 0 ? delay_sum / static_cast<double>(detected) : -1.0;
  for (auto& [d, tally] : by_distance) {
    m.detection_rate_by_distance[d] =
        tally.total > 0 ? static_cast<double>(tally.detected) / tally.total : 0.0;
    m.delay_by_distance[d] =
        tally.detected > 0 ? tally.delay_sum / static_cast<double>(tally.detected) : -1.0;
    if (m.detection_rate_by_distance[d] >= 0.99)
      m.max_detection_distance_m = std::max(m.max_detection_distance_m, d);
  }
  m.false_alarms_per_month =
      noise_seconds > 0.0 ? static_cast<double>(false_alarms) * (kMonthSeconds / noise_seconds)
                          : 0.0;
  if (acc.data_seconds > 0.0) {
    m.exec_time_per_60s_measured_s = acc.wall_s / acc.data_seconds * 60.0;
    m.exec_time_per_60s_fiber_s = m.exec_time_per_60s_measured_s *
                                  static_cast<double>(fiber_sensors) /
                                  static_cast<double>(sensors);
  }
  m.throughput_samples_per_s = acc.wall_s > 0.0 ? static_cast<double>(acc.samples) / acc.wall_s
                                                : 0.0;
  return m;
}

}  // namespace

BenchResult benchmark(const BenchConfig& cfg, const ml::ClassicModel& classic,
                      const cnn::CnnModel& image) {
  if (cfg.distances_m.empty() || cfg.repeats == 0)
    throw DataError("benchmark: insufficient scene suite (no distances or repeats)");

  ClassicParams cp;
  cp.sensor_spacing_m = cfg.sensor_spacing_m;
  cp.policy = cfg.classic_policy;
  cp.threads = cfg.threads;
  ImageParams ip;
  ip.sensor_spacing_m = cfg.sensor_spacing_m;
  ip.lowpass_alpha = cfg.lowpass_alpha;
  ip.policy = cfg.image_policy;
  ip.threads = cfg.threads;

  BenchResult out;
  Accumulator acc_classic, acc_image;
  std::map<double, DistanceTally> dist_classic, dist_image;
  double delay_sum_classic = 0.0, delay_sum_image = 0.0;
  std::size_t detected_classic = 0, detected_image = 0;

  const double span = (cfg.sensor_count - 1) * cfg.sensor_spacing_m;
  std::size_t scene_counter = 0;

  for (double distance : cfg.distances_m) {
    for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
      synth::SceneConfig sc;
      sc.sensor_count = cfg.sensor_count;
      sc.sensor_spacing_m = cfg.sensor_spacing_m;
      sc.sample_rate_hz = cfg.sample_rate_hz;
      sc.duration_s = cfg.scene_duration_s;
      sc.noise_std = cfg.noise_std;
      sc.attenuation_alpha = cfg.attenuation_alpha;
      sc.seed = splitmix64(cfg.seed + 0x1000 + scene_counter);

      synth::SourceSpec src;
      src.kind = SourceKind::Excavator;
      src.position_m = std::round(0.5 * span / cfg.sensor_spacing_m) * cfg.sensor_spacing_m;
      src.start_s = cfg.onset_s;
      src.end_s = cfg.scene_duration_s - 2.0;
      // Lateral distance enters as amplitude loss at the fiber.
      src.amplitude = synth::attenuate(cfg.source_amplitude, distance, cfg.attenuation_alpha);
      sc.sources.push_back(src);

      const RawTrace trace = synth::synth_scene(sc);
      const GroundTruthEvent truth{0, SourceKind::Excavator, cfg.onset_s, src.position_m};

      const std::string tag = "delay-d" + std::to_string(static_cast<int>(distance)) + "-r" +
                              std::to_string(rep);

      const PipelineResult rc = run_classic(trace, classic, cp);
      acc_classic.add(rc.stats);
      tally_result(detection_delay(rc.events, {truth}, cp.policy.radius_m),
                   dist_classic[distance], &delay_sum_classic, &detected_classic);
      for (const auto& e : rc.events) out.events.push_back({tag, e});

      const PipelineResult ri = run_image(trace, image, ip);
      acc_image.add(ri.stats);
      tally_result(detection_delay(ri.events, {truth}, ip.policy.radius_m),
                   dist_image[distance], &delay_sum_image, &detected_image);
      for (const auto& e : ri.events) out.events.push_back({tag, e});

      ++scene_counter;
    }
  }

  // Noise-only suite: highway and walking distractors, no excavator.
  std::size_t fa_classic = 0, fa_image = 0;
  double noise_seconds = 0.0;
  for (std::size_t i = 0; i < cfg.noise_scenes; ++i) {
    synth::SceneConfig sc;
    sc.sensor_count = cfg.sensor_count;
    sc.sensor_spacing_m = cfg.sensor_spacing_m;
    sc.sample_rate_hz = cfg.sample_rate_hz;
    sc.duration_s = cfg.noise_scene_duration_s;
    sc.noise_std = cfg.noise_std;
    sc.attenuation_alpha = cfg.attenuation_alpha;
    sc.seed = splitmix64(cfg.seed + 0x2000 + i);
    if (i % 3 != 2) {
      synth::SourceSpec src;
      src.kind = i % 3 == 0 ? SourceKind::Highway : SourceKind::Walking;
      src.position_m = 0.35 * span;
      src.start_s = 1.0;
      src.end_s = sc.duration_s - 1.0;
      src.amplitude = 0.6 * cfg.source_amplitude;
      sc.sources.push_back(src);
      if (src.kind == SourceKind::Highway) {
        for (double off : {-24.0, 18.0, 40.0}) {
          synth::SourceSpec extra = src;
          extra.position_m = std::max(0.0, src.position_m + off);
          sc.sources.push_back(extra);
        }
      }
    }

    const RawTrace trace = synth::synth_scene(sc);
    const std::string tag = "noise-" + std::to_string(i);

    const PipelineResult rc = run_classic(trace, classic, cp);
    acc_classic.add(rc.stats);
    fa_classic += rc.events.size();
    for (const auto& e : rc.events) out.events.push_back({tag, e});

    const PipelineResult ri = run_image(trace, image, ip);
    acc_image.add(ri.stats);
    fa_image += ri.events.size();
    for (const auto& e : ri.events) out.events.push_back({tag, e});

    noise_seconds += sc.duration_s;
  }

  const std::uint32_t fiber_sensors = static_cast<std::uint32_t>(
      std::lround(cfg.fiber_length_km * 1000.0 / cfg.sensor_spacing_m));
  out.report.sensor_count = cfg.sensor_count;
  out.report.fiber_sensor_count = fiber_sensors;
  out.report.month_scale = noise_seconds > 0.0 ? kMonthSeconds / noise_seconds : 0.0;
  out.report.classic = finalize(acc_classic, dist_classic, delay_sum_classic, detected_classic,
                                fa_classic, noise_seconds, cfg.sensor_count, fiber_sensors);
  out.report.image = finalize(acc_image, dist_image, delay_sum_image, detected_image, fa_image,
                              noise_seconds, cfg.sensor_count, fiber_sensors);
  return out;
}

namespace {

json metrics_to_json(const PipelineMetrics& m) {
  json delays = json::object();
  json rates = json::object();
  for (const auto& [d, v] : m.delay_by_distance) delays[std::to_string(d)] = v;
  for (const auto& [d, v] : m.detection_rate_by_distance) rates[std::to_string(d)] = v;
  return json{{"delay_mean_s", m.delay_mean_s},
              {"delay_by_distance_s", delays},
              {"detection_rate_by_distance", rates},
              {"max_detection_distance_m", m.max_detection_distance_m},
              {"false_alarms_per_month", m.false_alarms_per_month},
              {"exec_time_per_60s_measured_s", m.exec_time_per_60s_measured_s},
              {"exec_time_per_60s_fiber_s", m.exec_time_per_60s_fiber_s},
              {"throughput_samples_per_s", m.throughput_samples_per_s}};
}

}  // namespace

std::string report_to_json(const MetricsReport& r, const BenchConfig& cfg) {
  json j;
  j["schema"] = kReportSchema;
  j["config"] = json::parse(bench_config_to_json(cfg));
  j["sensor_count"] = r.sensor_count;
  j["fiber_sensor_count"] = r.fiber_sensor_count;
  j["month_scale"] = r.month_scale;
  j["pipelines"] = json{{"classic", metrics_to_json(r.classic)},
                        {"image", metrics_to_json(r.image)}};
  // Published reference values for the same three columns, measured on field
  // hardware at 17 km; kept in the report for side-by-side reading only.
  j["paper_reference"] = json{
      {"classic", {{"min_delay_s", 90.0}, {"exec_time_60s_17km_s", 60.0},
                   {"max_detection_distance_m", 30.0}}},
      {"image", {{"min_delay_s", 15.0}, {"exec_time_60s_17km_s", 5.0},
                 {"max_detection_distance_m", 10.0}}}};
  return j.dump(2);
}

std::string report_to_table(const MetricsReport& r) {
  std::ostringstream os;
  const auto row = [&](const std::string& name, const PipelineMetrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-12s %10.1f %12.3f %14.2f %16.2f %12.1f %14.0f\n",
                  name.c_str(), m.delay_mean_s, m.false_alarms_per_month,
                  m.exec_time_per_60s_measured_s, m.exec_time_per_60s_fiber_s,
                  m.max_detection_distance_m, m.throughput_samples_per_s);
    os << buf;
  };
  os << "pipeline      delay[s]     FA/month   exec60s[s]   exec60s@fiber[s]   maxdist[m]   throughput[sps]\n";
  row("classic", r.classic);
  row("image", r.image);
  os << "reference    classic: delay 90 s, exec 60 s (17 km), max distance 30 m\n";
  os << "reference    image:   delay 15 s, exec  5 s (17 km), max distance 10 m\n";
  return os.str();
}

bool validate_report_json(const std::string& text, std::string* why) {
  const auto fail = [&](const std::string& msg) {
    if (why != nullptr) *why = msg;
    return false;
  };
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    return fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.contains("schema") || j["schema"] != kReportSchema) return fail("bad schema tag");
  for (const char* key : {"config", "pipelines", "paper_reference", "sensor_count",
                          "fiber_sensor_count"}) {
    if (!j.contains(key)) return fail(std::string("missing key: ") + key);
  }
  for (const char* pipe : {"classic", "image"}) {
    if (!j["pipelines"].contains(pipe)) return fail(std::string("missing pipeline: ") + pipe);
    const json& p = j["pipelines"][pipe];
    for (const char* key :
         {"delay_mean_s", "false_alarms_per_month", "exec_time_per_60s_measured_s",
          "exec_time_per_60s_fiber_s", "max_detection_distance_m", "throughput_samples_per_s"}) {
      if (!p.contains(key) || !p[key].is_number())
        return fail(std::string(pipe) + ": missing or non-numeric " + key);
    }
    for (const char* key : {"false_alarms_per_month", "exec_time_per_60s_measured_s",
                            "max_detection_distance_m"}) {
      if (p[key].get<double>() < 0.0) return fail(std::string(pipe) + ": negative " + key);
    }
  }
  if (why != nullptr) why->clear();
  return true;
}

void write_tagged_events(const std::vector<TaggedEvent>& events, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("write_tagged_events: cannot open " + path);
  for (const TaggedEvent& te : events) {
    json j;
    j["scene"] = te.scene;
    j["t_confirmed"] = te.event.t_confirmed;
    j["position_m"] = te.event.position_m;
    j["probability"] = te.event.probability;
    j["pipeline"] = track::to_string(te.event.pipeline);
    j["track_length"] = te.event.track_length_s;
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write_tagged_events: write failed");
}

}  // namespace dasml::run
