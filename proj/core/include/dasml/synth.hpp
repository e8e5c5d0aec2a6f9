#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dasml/trace.hpp"
#include "dasml/types.hpp"

namespace dasml::synth {

// One acoustic source placed along the fiber.
struct SourceSpec {
  SourceKind kind = SourceKind::None;
  double position_m = 0.0;
  double start_s = 0.0;
  double end_s = 0.0;
  double amplitude = 0.0;  // peak pressure at zero distance
};

struct SceneConfig {
  std::uint32_t sensor_count = 0;
  double sensor_spacing_m = 4.0;
  std::uint32_t sample_rate_hz = 2000;
  double duration_s = 0.0;
  std::vector<SourceSpec> sources;
  double noise_std = 0.0;
  double attenuation_alpha = 0.15;  // 1/m
  // Cells are labeled where the attenuated amplitude reaches this value.
  // 0 selects the default of 3 * noise_std (1e-4 for noiseless scenes).
  double label_threshold = 0.0;
  std::uint64_t seed = 0;

  double effective_label_threshold() const;
  void validate() const;  // throws DataError
};

// Ground-truth class per (sensor, second) cell, sensor-major.
struct LabelMask {
  std::uint32_t sensor_count = 0;
  std::uint32_t seconds = 0;
  std::vector<SourceKind> label;
  std::vector<std::int32_t> source;  // generating source index, -1 if none

  SourceKind at(std::size_t s, std::size_t t) const { return label[s * seconds + t]; }
  std::int32_t source_at(std::size_t s, std::size_t t) const { return source[s * seconds + t]; }

  bool operator==(const LabelMask&) const = default;
};

// Peak amplitude after exp(-alpha*d) / sqrt(max(d, 1 m)) propagation loss.
// Total on distance_m >= 0, alpha >= 0; strictly decreasing in distance
// beyond the 1 m floor.
double attenuate(double amplitude, double distance_m, double alpha);

// Highest frequency a source kind emits; drives the aliasing check in
// synth_scene.
double top_frequency_hz(SourceKind kind);

// Renders the scene deterministically for a fixed (config, seed). Every
// active source contributes a band-limited signature attenuated to each
// sensor; white Gaussian noise is added per channel.
RawTrace synth_scene(const SceneConfig& config);

// Labels each (sensor, second) cell with the dominant source whose
// attenuated amplitude reaches the labeling threshold.
LabelMask label_grid(const SceneConfig& config);

// JSON document mirroring SceneConfig fields one-to-one.
SceneConfig scene_from_json(const std::string& text);
SceneConfig load_scene(const std::string& path);
std::string scene_to_json(const SceneConfig& config);

}  // namespace dasml::synth
