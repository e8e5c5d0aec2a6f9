#include "dasml/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "dasml/parallel.hpp"
#include "dasml/windowing.hpp"

namespace dasml::run {

namespace {

using Clock = std::chrono::steady_clock;

ExecStats finish_stats(Clock::time_point start, const RawTrace& trace) {
  ExecStats st;
  st.wall_s = std::chrono::duration<double>(Clock::now() - start).count();
  st.data_seconds = trace.duration_s();
  st.sensors = trace.sensor_count;
  st.samples = trace.samples.size();
  st.throughput_sps = st.wall_s > 0.0 ? static_cast<double>(st.samples) / st.wall_s : 0.0;
  return st;
}

}  // namespace

PipelineResult run_classic(const RawTrace& trace, const ml::ClassicModel& model,
                           const ClassicParams& params) {
  const auto start = Clock::now();
  const io::WindowRange range = io::window_iter(trace, 1.0, 1.0);
  const std::size_t steps = range.steps();
  const std::uint32_t sensors = trace.sensor_count;

  // Excavator probability per (second, sensor), computed data-parallel per
  // sensor and merged in deterministic order afterwards.
  std::vector<double> p_exc(steps * sensors, 0.0);
  parallel_for(sensors, params.threads, [&](std::size_t s) {
    for (std::size_t t = 0; t < steps; ++t) {
      const io::Window w = range.window(t, static_cast<std::uint32_t>(s));
      const dsp::FeatureVector fv = dsp::feature_fft100(w);
      p_exc[t * sensors + s] = ml::predict(model, fv).p_excavator;
    }
  });

  PipelineResult out;
  track::TrackStore store(params.policy);
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<track::Detection> dets;
    for (std::uint32_t s = 0; s < sensors; ++s) {
      const double p = p_exc[t * sensors + s];
      if (p >= params.policy.min_probability) {
        // stamped at the window end: the decision exists once the data ends
        dets.push_back({static_cast<double>(t + 1), s * params.sensor_spacing_m, p,
                        track::Pipeline::Classic});
      }
    }
    auto events = store.step(static_cast<double>(t + 1), std::move(dets));
    out.events.insert(out.events.end(), events.begin(), events.end());
  }
  out.stats = finish_stats(start, trace);
  return out;
}

PipelineResult run_image(const RawTrace& trace, const cnn::CnnModel& model,
                         const ImageParams& params) {
  const auto start = Clock::now();
  const std::vector<dsp::WaterfallPatch> patches =
      dsp::build_patches(trace, nullptr, params.lowpass_alpha);

  std::vector<double> prob(patches.size(), 0.0);
  parallel_for(patches.size(), params.threads, [&](std::size_t i) {
    prob[i] = cnn::predict_image(model, patches[i]).probability;
  });

  // Group detections by their integer decision second (ceil of patch end).
  std::map<double, std::vector<track::Detection>> by_second;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    if (prob[i] < params.policy.min_probability) continue;
    const double t = std::ceil(patches[i].start_s + dsp::WaterfallPatch::seconds());
    by_second[t].push_back({t, patches[i].peak_row * params.sensor_spacing_m, prob[i],
                            track::Pipeline::Image});
  }

  PipelineResult out;
  track::TrackStore store(params.policy);
  for (auto& [t, dets] : by_second) {
    auto events = store.step(t, std::move(dets));
    out.events.insert(out.events.end(), events.begin(), events.end());
  }
  out.stats = finish_stats(start, trace);
  return out;
}

std::vector<GroundTruthEvent> ground_truth_events(const synth::LabelMask& labels,
                                                  double sensor_spacing_m) {
  std::map<std::int32_t, GroundTruthEvent> by_id;
  std::map<std::int32_t, std::pair<double, std::size_t>> pos_acc;  // sum, count
  for (std::uint32_t s = 0; s < labels.sensor_count; ++s) {
    for (std::uint32_t t = 0; t < labels.seconds; ++t) {
      const std::int32_t id = labels.source_at(s, t);
      if (id < 0) continue;
      auto [it, fresh] = by_id.try_emplace(id);
      GroundTruthEvent& g = it->second;
      if (fresh) {
        g.source_id = id;
        g.kind = labels.at(s, t);
        g.onset_s = t;
      } else {
        g.onset_s = std::min(g.onset_s, static_cast<double>(t));
      }
      auto& [sum, count] = pos_acc[id];
      sum += s * sensor_spacing_m;
      ++count;
    }
  }
  std::vector<GroundTruthEvent> out;
  for (auto& [id, g] : by_id) {
    const auto& [sum, count] = pos_acc[id];
    g.position_m = sum / static_cast<double>(count);
    out.push_back(g);
  }
  return out;
}

std::vector<DelayResult> detection_delay(const std::vector<track::EventRecord>& events,
                                         const std::vector<GroundTruthEvent>& truths,
                                         double radius_m) {
  std::vector<DelayResult> out;
  for (const GroundTruthEvent& truth : truths) {
    DelayResult r;
    r.truth = truth;
    for (const track::EventRecord& e : events) {
      if (e.t_confirmed < truth.onset_s) continue;
      if (std::abs(e.position_m - truth.position_m) > radius_m) continue;
      r.detected = true;
      r.delay_s = e.t_confirmed - truth.onset_s;
      r.position_error_m = std::abs(e.position_m - truth.position_m);
      break;  // events are time-ordered: first match wins
    }
    out.push_back(r);
  }
  return out;
}

std::vector<DelayResult> detection_delay(const std::vector<track::EventRecord>& events,
                                         const synth::LabelMask& labels, double sensor_spacing_m,
                                         double radius_m) {
  return detection_delay(events, ground_truth_events(labels, sensor_spacing_m), radius_m);
}

}  // namespace dasml::run
