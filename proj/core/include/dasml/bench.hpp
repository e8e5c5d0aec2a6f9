#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dasml/classic.hpp"
#include "dasml/cnn.hpp"
#include "dasml/pipeline.hpp"
#include "dasml/tracker.hpp"

namespace dasml::run {

// Shared scene suite for the side-by-side pipeline comparison. Lateral
// source distance is emulated by attenuating the source amplitude at the
// configured distance before it enters the scene, since sources live on the
// fiber axis.
struct BenchConfig {
  std::uint32_t sensor_count = 96;
  double sensor_spacing_m = 4.0;
  std::uint32_t sample_rate_hz = 2000;
  double scene_duration_s = 135.0;
  double onset_s = 20.0;
  std::vector<double> distances_m = {5.0, 10.0, 15.0, 20.0, 30.0};
  std::size_t repeats = 2;
  double source_amplitude = 6.0;
  double noise_std = 0.1;
  double attenuation_alpha = 0.05;
  std::size_t noise_scenes = 3;  // no-excavator scenes with distractors
  double noise_scene_duration_s = 120.0;
  double fiber_length_km = 17.0;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  double lowpass_alpha = 0.2;
  track::AlarmPolicy classic_policy = track::AlarmPolicy::classic_defaults();
  track::AlarmPolicy image_policy = track::AlarmPolicy::image_defaults();
};

BenchConfig bench_config_from_json(const std::string& text);
std::string bench_config_to_json(const BenchConfig& cfg);
BenchConfig load_bench_config(const std::string& path);

struct PipelineMetrics {
  double delay_mean_s = -1.0;  // mean over detected events; -1 if none
  std::map<double, double> delay_by_distance;          // -1 where undetected
  std::map<double, double> detection_rate_by_distance;
  double max_detection_distance_m = 0.0;  // largest distance at >= 99% detection
  double false_alarms_per_month = 0.0;
  double exec_time_per_60s_measured_s = 0.0;  // at the simulated sensor count
  double exec_time_per_60s_fiber_s = 0.0;     // extrapolated to fiber_length_km
  double throughput_samples_per_s = 0.0;
};

struct MetricsReport {
  PipelineMetrics classic;
  PipelineMetrics image;
  std::uint32_t sensor_count = 0;
  std::uint32_t fiber_sensor_count = 0;
  double month_scale = 0.0;  // (30 days) / simulated noise seconds
};

// Confirmed events tagged with their suite scene, written to the
// deterministic event log.
struct TaggedEvent {
  std::string scene;
  track::EventRecord event;
};

struct BenchResult {
  MetricsReport report;
  std::vector<TaggedEvent> events;
};

// Runs both pipelines over the shared suite. Throws DataError when the
// suite is empty (no distances, zero repeats).
BenchResult benchmark(const BenchConfig& cfg, const ml::ClassicModel& classic,
                      const cnn::CnnModel& image);

// Table-2-shaped JSON document (schema "dasml-bench-report/1") with the
// published reference values embedded for comparison.
std::string report_to_json(const MetricsReport& r, const BenchConfig& cfg);
// Aligned text table over the same numbers.
std::string report_to_table(const MetricsReport& r);
// Structural validation of a report document against the published schema.
bool validate_report_json(const std::string& text, std::string* why = nullptr);

void write_tagged_events(const std::vector<TaggedEvent>& events, const std::string& path);

}  // namespace dasml::run
