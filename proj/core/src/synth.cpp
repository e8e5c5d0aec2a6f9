#include "dasml/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dasml/rng.hpp"

namespace dasml::synth {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Substream tags; channel noise and source waveforms never collide.
constexpr std::uint64_t kNoiseTag = 0x6e6f697365ULL;   // "noise"
constexpr std::uint64_t kSourceTag = 0x73726373ULL;    // "srcs"

// Two cascaded RBJ biquads (high-pass then low-pass) bounding the highway
// noise band.
struct Biquad {
  double b0, b1, b2, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  double step(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

Biquad make_lowpass(double fc, double fs) {
  const double w0 = 2.0 * kPi * fc / fs;
  const double q = 0.7071067811865476;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  return {(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0, -2.0 * c / a0,
          (1.0 - alpha) / a0};
}

Biquad make_highpass(double fc, double fs) {
  const double w0 = 2.0 * kPi * fc / fs;
  const double q = 0.7071067811865476;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  return {(1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0, -2.0 * c / a0,
          (1.0 - alpha) / a0};
}

void add_impulse_train(std::vector<double>& w, const SourceSpec& src, std::uint32_t fs,
                       std::mt19937_64& rng, double rate_lo, double rate_hi, double fc_lo,
                       double fc_hi, double decay_lo, double decay_hi) {
  const double rate = uniform(rng, rate_lo, rate_hi);
  // Per-source center with per-impulse spread: impacts from one source share
  // a band but are never identical.
  const double fc0 = uniform(rng, fc_lo + 6.0, fc_hi - 6.0);
  const double n = static_cast<double>(w.size());
  double t = src.start_s + uniform(rng, 0.0, 0.3 / rate);
  while (t < src.end_s) {
    const double jitter = uniform(rng, -0.2, 0.2) / rate;
    const double fc = std::clamp(fc0 + uniform(rng, -8.0, 8.0), fc_lo, fc_hi);
    const double decay = uniform(rng, decay_lo, decay_hi);
    const double t0 = t;
    const std::size_t i0 = static_cast<std::size_t>(std::max(0.0, std::ceil(t0 * fs)));
    const std::size_t i1 = static_cast<std::size_t>(
        std::min(n, std::ceil(std::min(src.end_s, t0 + 6.0 * decay) * fs)));
    for (std::size_t i = i0; i < i1; ++i) {
      const double tau = static_cast<double>(i) / fs - t0;
      if (tau < 0.0) continue;
      w[i] += std::exp(-tau / decay) * std::sin(2.0 * kPi * fc * tau);
    }
    t += 1.0 / rate + jitter;
  }
}

// Unit-peak waveform of one source over the full scene duration.
std::vector<double> source_waveform(const SourceSpec& src, std::uint32_t fs, std::size_t total,
                                    std::mt19937_64 rng) {
  std::vector<double> w(total, 0.0);
  const std::size_t i_start =
      static_cast<std::size_t>(std::clamp(std::floor(src.start_s * fs), 0.0, double(total)));
  const std::size_t i_end =
      static_cast<std::size_t>(std::clamp(std::ceil(src.end_s * fs), 0.0, double(total)));

  switch (src.kind) {
    case SourceKind::None:
      return w;
    case SourceKind::Excavator: {
      // Quasi-periodic damped impact bursts (bucket ringing sits high in
      // the band) over a continuous low-band engine-and-hydraulics hum.
      add_impulse_train(w, src, fs, rng, 0.5, 2.0, 45.0, 60.0, 0.08, 0.18);
      Gaussian gauss;
      Biquad hp = make_highpass(8.0, fs);
      Biquad lp = make_lowpass(18.0, fs);
      double sumsq = 0.0;
      std::vector<double> hum(i_end > i_start ? i_end - i_start : 0);
      for (double& v : hum) {
        v = lp.step(hp.step(gauss(rng)));
        sumsq += v * v;
      }
      if (!hum.empty() && sumsq > 0.0) {
        const double rms = std::sqrt(sumsq / static_cast<double>(hum.size()));
        const double scale = 0.75 / rms;
        for (std::size_t i = 0; i < hum.size(); ++i) w[i_start + i] += scale * hum[i];
      }
      break;
    }
    case SourceKind::Walking:
      // Sparse light footfalls; ground-borne energy sits low.
      add_impulse_train(w, src, fs, rng, 1.5, 2.5, 8.0, 28.0, 0.02, 0.05);
      break;
    case SourceKind::Highway: {
      // Stationary 5-50 Hz colored noise over the active interval.
      Gaussian gauss;
      Biquad hp = make_highpass(5.0, fs);
      Biquad lp = make_lowpass(50.0, fs);
      double sumsq = 0.0;
      for (std::size_t i = i_start; i < i_end; ++i) {
        const double y = lp.step(hp.step(gauss(rng)));
        w[i] = y;
        sumsq += y * y;
      }
      const std::size_t nact = i_end > i_start ? i_end - i_start : 1;
      const double rms = std::sqrt(sumsq / static_cast<double>(nact));
      if (rms > 0.0) {
        // Normalize to sinusoid-equivalent RMS for a unit peak.
        const double scale = (1.0 / std::sqrt(2.0)) / rms;
        for (std::size_t i = i_start; i < i_end; ++i) w[i] *= scale;
      }
      return w;
    }
  }
  double peak = 0.0;
  for (double v : w) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : w) v /= peak;
  return w;
}

}  // namespace

double attenuate(double amplitude, double distance_m, double alpha) {
  const double d = std::max(distance_m, 1.0);
  return amplitude * std::exp(-alpha * distance_m) / std::sqrt(d);
}

double top_frequency_hz(SourceKind kind) {
  switch (kind) {
    case SourceKind::Excavator:
      return 60.0;
    case SourceKind::Highway:
      return 50.0;
    case SourceKind::Walking:
      return 30.0;
    case SourceKind::None:
      return 0.0;
  }
  return 0.0;
}

double SceneConfig::effective_label_threshold() const {
  if (label_threshold > 0.0) return label_threshold;
  return noise_std > 0.0 ? 3.0 * noise_std : 1e-4;
}

void SceneConfig::validate() const {
  if (sensor_count < 1) throw DataError("scene: sensor_count must be >= 1");
  if (duration_s <= 0.0) throw DataError("scene: duration_s must be > 0");
  if (noise_std < 0.0) throw DataError("scene: noise_std must be >= 0");
  if (sensor_spacing_m <= 0.0) throw DataError("scene: sensor_spacing_m must be > 0");
  if (attenuation_alpha < 0.0) throw DataError("scene: attenuation_alpha must be >= 0");
  if (sample_rate_hz == 0) throw DataError("scene: sample_rate_hz must be > 0");
  double top = 0.0;
  for (const auto& s : sources) {
    if (s.start_s >= s.end_s) throw DataError("scene: source start_s must be < end_s");
    if (s.position_m < 0.0) throw DataError("scene: source position_m must be >= 0");
    if (s.amplitude < 0.0) throw DataError("scene: source amplitude must be >= 0");
    top = std::max(top, top_frequency_hz(s.kind));
  }
  if (static_cast<double>(sample_rate_hz) < 2.0 * top)
    throw DataError("scene: sample_rate_hz below twice the top source frequency (aliasing)");
}

RawTrace synth_scene(const SceneConfig& config) {
  config.validate();
  const std::uint32_t fs = config.sample_rate_hz;
  const std::size_t total = static_cast<std::size_t>(std::llround(config.duration_s * fs));

  RawTrace trace;
  trace.sensor_count = config.sensor_count;
  trace.sample_rate_hz = fs;
  trace.samples.assign(total * config.sensor_count, 0.0);

  // One waveform per source, shared by all channels at different gains.
  std::vector<std::vector<double>> waves;
  waves.reserve(config.sources.size());
  for (std::size_t si = 0; si < config.sources.size(); ++si)
    waves.push_back(
        source_waveform(config.sources[si], fs, total, substream(config.seed, kSourceTag, si)));

  for (std::uint32_t ch = 0; ch < config.sensor_count; ++ch) {
    const double pos = ch * config.sensor_spacing_m;
    for (std::size_t si = 0; si < config.sources.size(); ++si) {
      const SourceSpec& src = config.sources[si];
      if (src.kind == SourceKind::None || src.amplitude <= 0.0) continue;
      const double gain =
          attenuate(src.amplitude, std::abs(pos - src.position_m), config.attenuation_alpha);
      if (gain <= 0.0) continue;
      const std::vector<double>& w = waves[si];
      for (std::size_t t = 0; t < total; ++t) {
        if (w[t] != 0.0) trace.samples[t * config.sensor_count + ch] += gain * w[t];
      }
    }
    if (config.noise_std > 0.0) {
      std::mt19937_64 rng = substream(config.seed, kNoiseTag, ch);
      Gaussian gauss;
      for (std::size_t t = 0; t < total; ++t)
        trace.samples[t * config.sensor_count + ch] += config.noise_std * gauss(rng);
    }
  }
  return trace;
}

LabelMask label_grid(const SceneConfig& config) {
  config.validate();
  const std::uint32_t seconds = static_cast<std::uint32_t>(std::ceil(config.duration_s));
  LabelMask mask;
  mask.sensor_count = config.sensor_count;
  mask.seconds = seconds;
  mask.label.assign(static_cast<std::size_t>(config.sensor_count) * seconds, SourceKind::None);
  mask.source.assign(static_cast<std::size_t>(config.sensor_count) * seconds, -1);

  const double threshold = config.effective_label_threshold();
  for (std::uint32_t s = 0; s < config.sensor_count; ++s) {
    const double pos = s * config.sensor_spacing_m;
    for (std::uint32_t t = 0; t < seconds; ++t) {
      double best = 0.0;
      std::int32_t best_id = -1;
      for (std::size_t si = 0; si < config.sources.size(); ++si) {
        const SourceSpec& src = config.sources[si];
        if (src.kind == SourceKind::None) continue;
        // Any overlap of [t, t+1) with the active interval counts.
        if (src.end_s <= t || src.start_s >= t + 1.0) continue;
        const double a =
            attenuate(src.amplitude, std::abs(pos - src.position_m), config.attenuation_alpha);
        if (a >= threshold && a > best) {
          best = a;
          best_id = static_cast<std::int32_t>(si);
        }
      }
      if (best_id >= 0) {
        mask.label[s * seconds + t] = config.sources[best_id].kind;
        mask.source[s * seconds + t] = best_id;
      }
    }
  }
  return mask;
}

namespace {

using nlohmann::json;

SourceSpec source_from_json(const json& j) {
  SourceSpec s;
  s.kind = source_kind_from_string(j.at("kind").get<std::string>());
  s.position_m = j.at("position_m").get<double>();
  s.start_s = j.at("start_s").get<double>();
  s.end_s = j.at("end_s").get<double>();
  s.amplitude = j.at("amplitude").get<double>();
  return s;
}

}  // namespace

SceneConfig scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("scene config: invalid JSON: ") + e.what());
  }
  try {
    SceneConfig c;
    c.sensor_count = j.at("sensor_count").get<std::uint32_t>();
    c.sensor_spacing_m = j.value("sensor_spacing_m", 4.0);
    c.sample_rate_hz = j.at("sample_rate_hz").get<std::uint32_t>();
    c.duration_s = j.at("duration_s").get<double>();
    c.noise_std = j.value("noise_std", 0.0);
    c.attenuation_alpha = j.value("attenuation_alpha", 0.15);
    c.label_threshold = j.value("label_threshold", 0.0);
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("sources"))
      for (const auto& js : j.at("sources")) c.sources.push_back(source_from_json(js));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("scene config: ") + e.what());
  }
}

SceneConfig load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open scene config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scene_from_json(ss.str());
}

std::string scene_to_json(const SceneConfig& config) {
  json j;
  j["sensor_count"] = config.sensor_count;
  j["sensor_spacing_m"] = config.sensor_spacing_m;
  j["sample_rate_hz"] = config.sample_rate_hz;
  j["duration_s"] = config.duration_s;
  j["noise_std"] = config.noise_std;
  j["attenuation_alpha"] = config.attenuation_alpha;
  j["label_threshold"] = config.label_threshold;
  j["seed"] = config.seed;
  json arr = json::array();
  for (const auto& s : config.sources) {
    json js;
    js["kind"] = to_string(s.kind);
    js["position_m"] = s.position_m;
    js["start_s"] = s.start_s;
    js["end_s"] = s.end_s;
    js["amplitude"] = s.amplitude;
    arr.push_back(js);
  }
  j["sources"] = arr;
  return j.dump(2);
}

}  // namespace dasml::synth
