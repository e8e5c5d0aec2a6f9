#include "dasml/traindata.hpp"

#include <algorithm>
#include <cmath>

#include "dasml/rng.hpp"
#include "dasml/windowing.hpp"

namespace dasml::run {

namespace {

constexpr std::uint64_t kFeatureTag = 0x66656174ULL;  // "feat"
constexpr std::uint64_t kPatchTag = 0x70746368ULL;    // "ptch"

synth::SceneConfig scene_skeleton(const FeatureDatasetOptions& o, std::uint64_t seed) {
  synth::SceneConfig c;
  c.sensor_count = o.sensors_per_scene;
  c.sensor_spacing_m = o.sensor_spacing_m;
  c.sample_rate_hz = o.sample_rate_hz;
  c.duration_s = o.scene_duration_s;
  c.attenuation_alpha = o.attenuation_alpha;
  c.seed = seed;
  return c;
}

}  // namespace

ml::Dataset synth_feature_dataset(std::size_t n_excavator, std::size_t n_other,
                                  std::uint64_t seed, const FeatureDatasetOptions& opts) {
  ml::Dataset d;
  std::mt19937_64 rng = substream(seed, kFeatureTag, 0);

  std::size_t got_exc = 0, got_other = 0;
  std::size_t scene_idx = 0;
  // other-class rotation: half quiet background, the rest split between
  // highway and walking distractors
  const SourceKind other_cycle[4] = {SourceKind::Highway, SourceKind::None, SourceKind::Walking,
                                     SourceKind::None};

  while (got_exc < n_excavator || got_other < n_other) {
    const bool want_exc = got_exc < n_excavator &&
                          (got_other >= n_other || scene_idx % 2 == 0);
    const SourceKind kind =
        want_exc ? SourceKind::Excavator : other_cycle[(scene_idx / 2) % 4];

    synth::SceneConfig c = scene_skeleton(opts, splitmix64(seed + 0x100 + scene_idx));
    c.noise_std = uniform(rng, opts.noise_lo, opts.noise_hi);
    c.label_threshold = opts.label_snr * c.noise_std;
    const double span = (c.sensor_count - 1) * c.sensor_spacing_m;
    if (kind != SourceKind::None) {
      synth::SourceSpec src;
      src.kind = kind;
      src.position_m = uniform(rng, 0.2 * span, 0.8 * span);
      src.start_s = 1.0;
      src.end_s = c.duration_s - 1.0;
      src.amplitude = uniform(rng, opts.amplitude_lo, opts.amplitude_hi);
      c.sources.push_back(src);
      if (kind == SourceKind::Highway) {
        // a road is a line source: spread more emitters along the fiber
        for (double off : {-24.0, 14.0, 30.0}) {
          synth::SourceSpec extra = src;
          extra.position_m = std::max(0.0, src.position_m + off);
          extra.amplitude = src.amplitude * uniform(rng, 0.6, 1.0);
          c.sources.push_back(extra);
        }
      }
    }

    const RawTrace trace = synth::synth_scene(c);
    const synth::LabelMask mask = synth::label_grid(c);
    const io::WindowRange range = io::window_iter(trace, 1.0, 1.0);

    std::size_t taken = 0;
    for (std::size_t t = 0; t < range.steps() && taken < opts.max_cells_per_scene; ++t) {
      for (std::uint32_t s = 0; s < c.sensor_count && taken < opts.max_cells_per_scene; ++s) {
        const SourceKind cell = mask.at(s, static_cast<std::uint32_t>(t));
        int target;
        if (kind == SourceKind::Excavator) {
          if (cell != SourceKind::Excavator) continue;  // only confident cells
          if (got_exc >= n_excavator) continue;
          target = 1;
        } else {
          if (kind != SourceKind::None && cell == SourceKind::None) {
            // keep a few plain-noise cells even from source scenes
            if ((t + s) % 7 != 0) continue;
          }
          if (got_other >= n_other) continue;
          target = 0;
        }
        const io::Window w = range.window(t, s);
        if (target == 1) {
          // A slow impact train can leave whole seconds empty; a cell with
          // no visible energy lift carries the wrong label, so skip it.
          double sumsq = 0.0;
          for (double v : w.samples) sumsq += v * v;
          const double rms = std::sqrt(sumsq / static_cast<double>(w.samples.size()));
          if (rms < 1.10 * c.noise_std) continue;
        }
        const dsp::FeatureVector fv = dsp::feature_fft100(w);
        d.push(fv.values, target);
        (target == 1 ? got_exc : got_other) += 1;
        ++taken;
      }
    }
    ++scene_idx;
    if (scene_idx > 4 * (n_excavator + n_other) + 64)
      throw DataError("synth_feature_dataset: scene budget exhausted before filling the dataset");
  }
  return d;
}

std::vector<dsp::WaterfallPatch> synth_patch_dataset(std::size_t per_class, std::uint64_t seed,
                                                     const PatchDatasetOptions& opts) {
  if (opts.sensors_per_scene < dsp::kPatchRows)
    throw DataError("synth_patch_dataset: scene narrower than a patch");
  std::vector<dsp::WaterfallPatch> positives, negatives;
  std::mt19937_64 rng = substream(seed, kPatchTag, 0);

  std::size_t scene_idx = 0;
  const SourceKind neg_cycle[3] = {SourceKind::Highway, SourceKind::Walking, SourceKind::None};
  while (positives.size() < per_class || negatives.size() < per_class) {
    const bool want_pos = positives.size() < per_class &&
                          (negatives.size() >= per_class || scene_idx % 2 == 0);

    synth::SceneConfig c;
    c.sensor_count = opts.sensors_per_scene;
    c.sensor_spacing_m = opts.sensor_spacing_m;
    c.sample_rate_hz = opts.sample_rate_hz;
    c.duration_s = opts.scene_duration_s;
    c.attenuation_alpha = opts.attenuation_alpha;
    c.noise_std = opts.noise_std;
    c.seed = splitmix64(seed + 0x200 + scene_idx);

    std::uint32_t src_row = 0;
    const SourceKind kind = want_pos ? SourceKind::Excavator : neg_cycle[(scene_idx / 2) % 3];
    if (kind != SourceKind::None) {
      synth::SourceSpec src;
      src.kind = kind;
      src_row = 4 + static_cast<std::uint32_t>(rng() % (opts.sensors_per_scene - 8));
      src.position_m = src_row * opts.sensor_spacing_m;
      src.start_s = 0.5;
      src.end_s = c.duration_s - 0.5;
      src.amplitude = uniform(rng, opts.amplitude_lo, opts.amplitude_hi);
      c.sources.push_back(src);
      if (kind == SourceKind::Highway) {
        // a road is a line source: spread more emitters along the fiber
        for (double off : {-28.0, 16.0, 36.0}) {
          synth::SourceSpec extra = src;
          extra.position_m = std::max(0.0, src.position_m + off);
          extra.amplitude = src.amplitude * uniform(rng, 0.6, 1.0);
          c.sources.push_back(extra);
        }
      }
    }

    const RawTrace trace = synth::synth_scene(c);
    for (dsp::WaterfallPatch& p : dsp::build_patches(trace, nullptr, opts.lowpass_alpha)) {
      if (want_pos) {
        // positives: the source row sits well inside the patch rows
        if (src_row >= p.origin_sensor + 4 && src_row + 4 < p.origin_sensor + dsp::kPatchRows) {
          if (positives.size() < per_class) {
            p.label = SourceKind::Excavator;
            positives.push_back(p);
          }
        }
      } else if (negatives.size() < per_class) {
        p.label = kind;
        negatives.push_back(p);
      }
    }
    ++scene_idx;
    if (scene_idx > 16 * per_class + 64)
      throw DataError("synth_patch_dataset: scene budget exhausted before filling the dataset");
  }

  // interleave classes deterministically
  std::vector<dsp::WaterfallPatch> out;
  out.reserve(2 * per_class);
  for (std::size_t i = 0; i < per_class; ++i) {
    out.push_back(positives[i]);
    out.push_back(negatives[i]);
  }
  return out;
}

}  // namespace dasml::run
