#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "dasml/types.hpp"

namespace dasml::track {

enum class Pipeline : std::uint8_t { Classic = 0, Image = 1 };

const char* to_string(Pipeline p);

// One per-second classifier hit.
struct Detection {
  double time_s = 0.0;
  double position_m = 0.0;
  double probability = 0.0;  // excavator probability of the single detection
  Pipeline pipeline = Pipeline::Classic;
};

struct AlarmPolicy {
  double radius_m = 5.0;
  std::size_t k_confirm = 90;    // qualifying seconds required
  double gap_tolerance_s = 3.0;  // max spacing between consecutive detection seconds
  double min_probability = 0.5;  // per-detection gate

  static AlarmPolicy classic_defaults() { return {}; }
  // One patch hit confirms; gaps must bridge the patch hop (7.5 s).
  static AlarmPolicy image_defaults() { return {5.0, 1, 16.0, 0.5}; }
};

enum class TrackState : std::uint8_t { Open, Confirmed, Closed };

struct Track {
  std::uint64_t id = 0;
  std::vector<Detection> detections;  // time-ordered
  double centroid_m = 0.0;            // running mean of detection positions
  TrackState state = TrackState::Open;
  double confirmed_time_s = -1.0;

  // confirmation bookkeeping: distinct detection seconds in the current
  // gap-free run
  std::size_t run_seconds = 0;
  double last_second = -std::numeric_limits<double>::infinity();
};

struct ConfirmDecision {
  bool confirmed = false;
  double time_s = -1.0;
  std::size_t qualifying = 0;  // distinct seconds in the qualifying run
};

// Pure re-evaluation of the confirmation rule on a track's detections:
// confirmed once K distinct detection seconds accumulate with no gap above
// the tolerance; the confirmation time is the K-th qualifying second.
ConfirmDecision confirm(const Track& track, const AlarmPolicy& policy);

// 1 - prod(1 - p_i) over the track's detections, clamped to [0, 1 - 1e-12].
double track_probability(const Track& track);

struct EventRecord {
  double t_confirmed = 0.0;
  double position_m = 0.0;
  double probability = 0.0;
  Pipeline pipeline = Pipeline::Classic;
  std::size_t track_length_s = 0;

  bool operator==(const EventRecord&) const = default;
};

// Single-owner mutable track store, advanced one time step at a time.
class TrackStore {
 public:
  // keep_closed = false drops closed tracks' detection history, which long
  // noise simulations need to stay linear in time.
  explicit TrackStore(AlarmPolicy policy, bool keep_closed = true)
      : policy_(policy), keep_closed_(keep_closed) {}

  // Associates all detections of one integer second, closes stale tracks,
  // and returns events for tracks confirmed by this step. Input order does
  // not matter: detections are sorted before processing.
  std::vector<EventRecord> step(double t_s, std::vector<Detection> detections);

  const std::vector<Track>& tracks() const { return tracks_; }
  const AlarmPolicy& policy() const { return policy_; }

 private:
  AlarmPolicy policy_;
  bool keep_closed_ = true;
  std::vector<Track> tracks_;
  std::vector<std::size_t> active_;  // indices of non-closed tracks
  std::uint64_t next_id_ = 0;
};

// Expected confirmed false tracks for independent per-second per-sensor
// false positives: sensors * horizon_s * (1 - p) * p^K. This counts run
// starts of length >= K (run-start approximation) and assumes sensors are
// independent, i.e. the association radius is below the sensor spacing and
// runs must be strictly consecutive (gap tolerance 1 s).
double far_estimate(double p_fp, std::size_t k, std::size_t sensors, double horizon_s);

// Simulation oracle for far_estimate: independent per-cell coin flips fed
// through associate/confirm under the stated assumptions.
std::size_t far_monte_carlo(double p_fp, std::size_t k, std::size_t sensors,
                            std::size_t horizon_s, double sensor_spacing_m, std::uint64_t seed);

// Event-log lines: {"t_confirmed", "position_m", "probability", "pipeline",
// "track_length"} as JSON.
void write_events(const std::vector<EventRecord>& events, std::ostream& out);
void write_events_file(const std::vector<EventRecord>& events, const std::string& path);
std::vector<EventRecord> read_events_file(const std::string& path);

}  // namespace dasml::track
