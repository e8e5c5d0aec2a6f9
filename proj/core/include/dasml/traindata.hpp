#pragma once

#include <cstdint>
#include <vector>

#include "dasml/dataset.hpp"
#include "dasml/dsp.hpp"
#include "dasml/synth.hpp"

namespace dasml::run {

// Knobs for the synthetic training corpora. Ranges are sampled per scene
// from the seeded generator, giving amplitude/noise diversity without any
// external data.
struct FeatureDatasetOptions {
  std::uint32_t sample_rate_hz = 2000;
  std::uint32_t sensors_per_scene = 6;
  double scene_duration_s = 25.0;
  double sensor_spacing_m = 4.0;
  double attenuation_alpha = 0.15;
  double noise_lo = 0.08, noise_hi = 0.12;
  double amplitude_lo = 2.0, amplitude_hi = 3.5;
  double label_snr = 8.0;  // labeling threshold in noise sigmas
  // Small per-scene caps force many scenes, so the dataset spans many
  // independent source parameter draws.
  std::size_t max_cells_per_scene = 40;
};

// Labeled FFT-feature rows drawn from synthetic scenes: excavator cells vs
// highway, walking, and plain-noise cells (the "other" class).
ml::Dataset synth_feature_dataset(std::size_t n_excavator, std::size_t n_other,
                                  std::uint64_t seed, const FeatureDatasetOptions& opts = {});

struct PatchDatasetOptions {
  std::uint32_t sample_rate_hz = 2000;
  std::uint32_t sensors_per_scene = 64;
  double scene_duration_s = 30.0;
  double sensor_spacing_m = 4.0;
  double attenuation_alpha = 0.15;
  double noise_std = 0.1;
  double amplitude_lo = 2.0, amplitude_hi = 6.0;
  double lowpass_alpha = 0.2;
};

// Balanced waterfall patches: positives are patches whose sensor span covers
// an excavator source; negatives come from highway, walking, and noise-only
// scenes. Patch labels are set accordingly so train_cnn can consume the
// vector directly.
std::vector<dsp::WaterfallPatch> synth_patch_dataset(std::size_t per_class, std::uint64_t seed,
                                                     const PatchDatasetOptions& opts = {});

}  // namespace dasml::run
