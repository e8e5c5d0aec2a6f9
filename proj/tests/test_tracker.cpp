#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dasml/tracker.hpp"

using namespace dasml;
using namespace dasml::track;

namespace {

Detection det(double t, double pos, double p = 0.9) {
  return {t, pos, p, Pipeline::Classic};
}

}  // namespace

TEST_CASE("associate: radius rule joins or opens tracks") {
  AlarmPolicy policy;  // radius 5
  TrackStore store(policy);
  store.step(1.0, {det(1.0, 100.0)});
  REQUIRE(store.tracks().size() == 1);

  // 4 m away joins; 6 m away opens a new track
  store.step(2.0, {det(2.0, 104.0)});
  CHECK(store.tracks().size() == 1);
  CHECK(store.tracks()[0].detections.size() == 2);
  store.step(3.0, {det(3.0, 110.0)});  // centroid is now 102; 8 m away
  CHECK(store.tracks().size() == 2);
}

TEST_CASE("associate: equidistant detection joins the longer track") {
  AlarmPolicy policy;
  policy.radius_m = 10.0;
  TrackStore store(policy);
  // track A at 100 with 3 detections, track B at 116 with 7
  for (int t = 1; t <= 3; ++t) store.step(t, {det(t, 100.0)});
  for (int t = 1; t <= 7; ++t) {
  }
  TrackStore store2(policy);
  std::vector<Detection> batch;
  for (int t = 1; t <= 3; ++t) store2.step(t, {det(t, 100.0), det(t, 116.0)});
  // extend only the 116 track for four more seconds
  for (int t = 4; t <= 7; ++t) store2.step(t, {det(t, 116.0)});
  REQUIRE(store2.tracks().size() == 2);
  CHECK(store2.tracks()[0].detections.size() == 3);
  CHECK(store2.tracks()[1].detections.size() == 7);

  // 108 is exactly 8 m from both centroids
  store2.step(8.0, {det(8.0, 108.0)});
  CHECK(store2.tracks()[0].detections.size() == 3);
  CHECK(store2.tracks()[1].detections.size() == 8);
}

TEST_CASE("associate: input order does not matter") {
  AlarmPolicy policy;
  TrackStore a(policy), b(policy);
  std::vector<Detection> d1{det(1.0, 10.0), det(1.0, 30.0), det(1.0, 12.0)};
  std::vector<Detection> d2{det(1.0, 12.0), det(1.0, 10.0), det(1.0, 30.0)};
  a.step(1.0, d1);
  b.step(1.0, d2);
  REQUIRE(a.tracks().size() == b.tracks().size());
  for (std::size_t i = 0; i < a.tracks().size(); ++i)
    CHECK(a.tracks()[i].centroid_m == b.tracks()[i].centroid_m);
}

TEST_CASE("associate: stale tracks close after the gap tolerance") {
  AlarmPolicy policy;  // gap 3 s
  TrackStore store(policy);
  store.step(1.0, {det(1.0, 50.0)});
  store.step(5.0, {det(5.0, 50.0)});  // 4 s silent -> closed, reopened fresh
  CHECK(store.tracks().size() == 2);
  CHECK(store.tracks()[0].state == TrackState::Closed);
}

TEST_CASE("confirm: the 90-second rule") {
  AlarmPolicy policy;  // K = 90
  Track tr;
  for (int t = 1; t <= 89; ++t) tr.detections.push_back(det(t, 100.0));
  CHECK_FALSE(confirm(tr, policy).confirmed);
  tr.detections.push_back(det(90, 100.0));
  const ConfirmDecision c = confirm(tr, policy);
  CHECK(c.confirmed);
  CHECK(c.time_s == 90.0);
}

TEST_CASE("confirm: image mode confirms on a single patch hit") {
  AlarmPolicy policy = AlarmPolicy::image_defaults();
  Track tr;
  tr.detections.push_back({15.0, 128.0, 0.97, Pipeline::Image});
  const ConfirmDecision c = confirm(tr, policy);
  CHECK(c.confirmed);
  CHECK(c.time_s == 15.0);
}

TEST_CASE("confirm: multiple same-second detections count once") {
  AlarmPolicy policy;
  policy.k_confirm = 3;
  Track tr;
  tr.detections.push_back(det(1.0, 100.0));
  tr.detections.push_back(det(1.0, 102.0));  // same second, second sensor
  tr.detections.push_back(det(2.0, 100.0));
  CHECK_FALSE(confirm(tr, policy).confirmed);
  tr.detections.push_back(det(3.0, 100.0));
  CHECK(confirm(tr, policy).confirmed);
}

TEST_CASE("confirm: a gap beyond the tolerance resets the run") {
  AlarmPolicy policy;
  policy.k_confirm = 3;
  policy.gap_tolerance_s = 3.0;
  Track tr;
  tr.detections.push_back(det(1.0, 100.0));
  tr.detections.push_back(det(2.0, 100.0));
  tr.detections.push_back(det(9.0, 100.0));  // 7 s gap
  tr.detections.push_back(det(10.0, 100.0));
  CHECK_FALSE(confirm(tr, policy).confirmed);
  tr.detections.push_back(det(11.0, 100.0));
  const ConfirmDecision c = confirm(tr, policy);
  CHECK(c.confirmed);
  CHECK(c.time_s == 11.0);
}

TEST_CASE("confirm is monotone under appended detections") {
  AlarmPolicy policy;
  policy.k_confirm = 2;
  Track tr;
  tr.detections.push_back(det(1.0, 10.0));
  tr.detections.push_back(det(2.0, 10.0));
  REQUIRE(confirm(tr, policy).confirmed);
  const double t0 = confirm(tr, policy).time_s;
  tr.detections.push_back(det(30.0, 10.0));  // long gap afterwards
  CHECK(confirm(tr, policy).confirmed);
  CHECK(confirm(tr, policy).time_s == t0);
}

TEST_CASE("track_probability: direct products and monotonicity") {
  Track tr;
  tr.detections.push_back(det(1.0, 0.0, 0.7));
  CHECK(track_probability(tr) == doctest::Approx(0.7).epsilon(1e-12));
  tr.detections.push_back(det(2.0, 0.0, 0.5));
  tr.detections[0].probability = 0.5;
  CHECK(track_probability(tr) == doctest::Approx(0.75).epsilon(1e-12));

  double prev = track_probability(tr);
  for (int i = 0; i < 2000; ++i) {
    tr.detections.push_back(det(3.0 + i, 0.0, 0.9));
    const double p = track_probability(tr);
    CHECK(p >= prev);
    CHECK(p <= 1.0 - 1e-12);
    prev = p;
  }
}

TEST_CASE("TrackStore confirmation matches the pure confirm()") {
  AlarmPolicy policy;
  policy.k_confirm = 5;
  TrackStore store(policy);
  std::vector<EventRecord> events;
  for (int t = 1; t <= 10; ++t) {
    auto e = store.step(t, {det(t, 40.0, 0.8)});
    events.insert(events.end(), e.begin(), e.end());
  }
  REQUIRE(events.size() == 1);
  CHECK(events[0].t_confirmed == 5.0);
  CHECK(events[0].track_length_s == 5);
  const ConfirmDecision pure = confirm(store.tracks()[0], policy);
  CHECK(pure.confirmed);
  CHECK(pure.time_s == events[0].t_confirmed);

  // every detection belongs to exactly one track
  std::size_t total = 0;
  for (const Track& tr : store.tracks()) total += tr.detections.size();
  CHECK(total == 10);
}

TEST_CASE("far_estimate: edge values and formula reductions") {
  CHECK(far_estimate(0.0, 3, 100, 1e5) == 0.0);
  CHECK(far_estimate(0.25, 1, 10, 1000.0) ==
        doctest::Approx(10.0 * 1000.0 * 0.75 * 0.25).epsilon(1e-12));
  CHECK_THROWS_AS(far_estimate(1.0, 1, 1, 1.0), DataError);
  CHECK_THROWS_AS(far_estimate(0.5, 0, 1, 1.0), DataError);
}

TEST_CASE("far_monte_carlo stays within x2 of the estimate when counts are meaningful") {
  // modest sizes here; the acceptance suite runs the full 1e5 s grid
  const double p = 0.05;
  const std::size_t k = 3, sensors = 100, horizon = 20000;
  const double est = far_estimate(p, k, sensors, static_cast<double>(horizon));
  const std::size_t mc = far_monte_carlo(p, k, sensors, horizon, 20.0, 77);
  CHECK(static_cast<double>(mc) >= est / 2.0);
  CHECK(static_cast<double>(mc) <= est * 2.0);
}

TEST_CASE("event log round trip") {
  std::vector<EventRecord> events{{90.0, 128.0, 0.999, Pipeline::Classic, 90},
                                  {15.0, 256.0, 0.87, Pipeline::Image, 1}};
  const std::string path = "tracker_events_test.jsonl";
  write_events_file(events, path);
  const auto back = read_events_file(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == events[0]);
  CHECK(back[1] == events[1]);
  std::remove(path.c_str());
}
