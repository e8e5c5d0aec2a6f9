#pragma once

#include <cstdint>
#include <vector>

#include "dasml/classic.hpp"
#include "dasml/cnn.hpp"
#include "dasml/synth.hpp"
#include "dasml/trace.hpp"
#include "dasml/tracker.hpp"

namespace dasml::run {

struct ExecStats {
  double wall_s = 0.0;
  double data_seconds = 0.0;
  std::uint32_t sensors = 0;
  std::uint64_t samples = 0;
  double throughput_sps = 0.0;  // samples per wall second
};

struct PipelineResult {
  std::vector<track::EventRecord> events;  // time-ordered
  ExecStats stats;
};

struct ClassicParams {
  double sensor_spacing_m = 4.0;
  track::AlarmPolicy policy = track::AlarmPolicy::classic_defaults();
  unsigned threads = 1;
};

// Per sensor per second: feature_fft100 -> standardize -> predict; hits at or
// above the policy probability go through associate/confirm. Detections are
// stamped with the window end second.
PipelineResult run_classic(const RawTrace& trace, const ml::ClassicModel& model,
                           const ClassicParams& params);

struct ImageParams {
  double sensor_spacing_m = 4.0;
  double lowpass_alpha = 0.2;
  track::AlarmPolicy policy = track::AlarmPolicy::image_defaults();
  unsigned threads = 1;
};

// build_patches -> predict_image; a patch hit becomes a detection at the
// patch end second, located at the patch's peak-energy sensor row.
PipelineResult run_image(const RawTrace& trace, const cnn::CnnModel& model,
                         const ImageParams& params);

struct GroundTruthEvent {
  std::int32_t source_id = -1;
  SourceKind kind = SourceKind::None;
  double onset_s = 0.0;
  double position_m = 0.0;
};

// Ground-truth events recovered from a label mask: one per source id, onset
// at the first labeled second, position at the mean labeled sensor.
std::vector<GroundTruthEvent> ground_truth_events(const synth::LabelMask& labels,
                                                  double sensor_spacing_m);

struct DelayResult {
  GroundTruthEvent truth;
  bool detected = false;
  double delay_s = 0.0;
  double position_error_m = 0.0;
};

// First confirmed event within radius of each truth; unmatched events are
// reported as misses and excluded from mean-delay statistics.
std::vector<DelayResult> detection_delay(const std::vector<track::EventRecord>& events,
                                         const std::vector<GroundTruthEvent>& truths,
                                         double radius_m);
std::vector<DelayResult> detection_delay(const std::vector<track::EventRecord>& events,
                                         const synth::LabelMask& labels, double sensor_spacing_m,
                                         double radius_m);

}  // namespace dasml::run
