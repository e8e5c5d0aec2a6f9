#include "dasml/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "dasml/rng.hpp"

namespace dasml::track {

const char* to_string(Pipeline p) { return p == Pipeline::Classic ? "classic" : "image"; }

ConfirmDecision confirm(const Track& track, const AlarmPolicy& policy) {
  ConfirmDecision out;
  double last = -std::numeric_limits<double>::infinity();
  std::size_t run = 0;
  for (const Detection& d : track.detections) {
    const double sec = std::floor(d.time_s);
    if (sec == last) continue;  // same second, counts once
    run = (sec - last > policy.gap_tolerance_s) ? 1 : run + 1;
    last = sec;
    if (!out.confirmed && run >= policy.k_confirm) {
      out.confirmed = true;
      out.time_s = d.time_s;
      out.qualifying = run;
    }
  }
  if (!out.confirmed) out.qualifying = run;
  return out;
}

double track_probability(const Track& track) {
  double miss = 1.0;
  for (const Detection& d : track.detections) miss *= 1.0 - d.probability;
  return std::clamp(1.0 - miss, 0.0, 1.0 - 1e-12);
}

std::vector<EventRecord> TrackStore::step(double t_s, std::vector<Detection> detections) {
  // Close tracks that have been silent too long.
  std::size_t kept = 0;
  for (std::size_t idx : active_) {
    Track& tr = tracks_[idx];
    if (t_s - tr.last_second > policy_.gap_tolerance_s) {
      tr.state = TrackState::Closed;
      if (!keep_closed_) {
        tr.detections.clear();
        tr.detections.shrink_to_fit();
      }
    } else {
      active_[kept++] = idx;
    }
  }
  active_.resize(kept);

  // Association must not depend on caller ordering.
  std::sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
    if (a.position_m != b.position_m) return a.position_m < b.position_m;
    if (a.probability != b.probability) return a.probability < b.probability;
    return a.pipeline < b.pipeline;
  });

  std::vector<EventRecord> events;
  for (const Detection& d : detections) {
    if (d.probability < policy_.min_probability) continue;
    // nearest open track within the radius; ties favor the longer track,
    // then the lower centroid
    std::size_t best_idx = tracks_.size();
    double best_dist = policy_.radius_m;
    for (std::size_t idx : active_) {
      Track& tr = tracks_[idx];
      const double dist = std::abs(d.position_m - tr.centroid_m);
      if (dist > policy_.radius_m) continue;
      if (best_idx == tracks_.size() || dist < best_dist ||
          (dist == best_dist &&
           (tr.detections.size() > tracks_[best_idx].detections.size() ||
            (tr.detections.size() == tracks_[best_idx].detections.size() &&
             tr.centroid_m < tracks_[best_idx].centroid_m)))) {
        best_idx = idx;
        best_dist = dist;
      }
    }
    if (best_idx == tracks_.size()) {
      Track tr;
      tr.id = next_id_++;
      tr.centroid_m = d.position_m;
      tracks_.push_back(tr);
      active_.push_back(best_idx);
    }

    Track& tr = tracks_[best_idx];
    tr.detections.push_back(d);
    // running mean of positions
    tr.centroid_m += (d.position_m - tr.centroid_m) / static_cast<double>(tr.detections.size());
    const double sec = std::floor(d.time_s);
    if (sec != tr.last_second) {
      tr.run_seconds = (sec - tr.last_second > policy_.gap_tolerance_s) ? 1 : tr.run_seconds + 1;
      tr.last_second = sec;
    }
    if (tr.state == TrackState::Open && tr.run_seconds >= policy_.k_confirm) {
      tr.state = TrackState::Confirmed;
      tr.confirmed_time_s = d.time_s;
      events.push_back({d.time_s, tr.centroid_m, track_probability(tr), d.pipeline,
                        tr.run_seconds});
    }
  }
  return events;
}

double far_estimate(double p_fp, std::size_t k, std::size_t sensors, double horizon_s) {
  if (p_fp < 0.0 || p_fp >= 1.0) throw DataError("far_estimate: p_fp must be in [0, 1)");
  if (k < 1) throw DataError("far_estimate: K must be >= 1");
  return static_cast<double>(sensors) * horizon_s * (1.0 - p_fp) * std::pow(p_fp, double(k));
}

std::size_t far_monte_carlo(double p_fp, std::size_t k, std::size_t sensors,
                            std::size_t horizon_s, double sensor_spacing_m, std::uint64_t seed) {
  AlarmPolicy policy;
  policy.k_confirm = k;
  policy.gap_tolerance_s = 1.0;                   // strictly consecutive runs
  policy.radius_m = sensor_spacing_m * 0.25;      // keeps sensors independent
  policy.min_probability = 0.0;
  TrackStore store(policy, /*keep_closed=*/false);

  std::mt19937_64 rng = substream(seed, 0x666172ULL, 0);  // "far"
  std::size_t confirmed = 0;
  std::vector<Detection> dets;
  for (std::size_t t = 1; t <= horizon_s; ++t) {
    dets.clear();
    for (std::size_t s = 0; s < sensors; ++s) {
      if (uniform01(rng) < p_fp)
        dets.push_back({static_cast<double>(t), s * sensor_spacing_m, 1.0, Pipeline::Classic});
    }
    confirmed += store.step(static_cast<double>(t), std::move(dets)).size();
    dets = {};
  }
  return confirmed;
}

void write_events(const std::vector<EventRecord>& events, std::ostream& out) {
  using nlohmann::json;
  for (const EventRecord& e : events) {
    json j;
    j["t_confirmed"] = e.t_confirmed;
    j["position_m"] = e.position_m;
    j["probability"] = e.probability;
    j["pipeline"] = to_string(e.pipeline);
    j["track_length"] = e.track_length_s;
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write_events: stream write failed");
}

void write_events_file(const std::vector<EventRecord>& events, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("write_events: cannot open " + path);
  write_events(events, out);
}

std::vector<EventRecord> read_events_file(const std::string& path) {
  using nlohmann::json;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_events: cannot open " + path);
  std::vector<EventRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      EventRecord e;
      e.t_confirmed = j.at("t_confirmed").get<double>();
      e.position_m = j.at("position_m").get<double>();
      e.probability = j.at("probability").get<double>();
      e.pipeline = j.at("pipeline").get<std::string>() == "image" ? Pipeline::Image
                                                                  : Pipeline::Classic;
      e.track_length_s = j.at("track_length").get<std::size_t>();
      out.push_back(e);
    } catch (const json::exception& ex) {
      throw DataError("events: line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace dasml::track
