#include "dasml/windowing.hpp"

#include <cmath>

#include "dasml/types.hpp"

namespace dasml::io {

namespace {

std::size_t to_integral_samples(double seconds, std::uint32_t rate, const char* what) {
  const double exact = seconds * rate;
  const double rounded = std::round(exact);
  if (rounded < 1.0 || std::abs(exact - rounded) > 1e-9)
    throw DataError(std::string("window_iter: ") + what + " times sample rate must be a "
                    "positive integer");
  return static_cast<std::size_t>(rounded);
}

}  // namespace

WindowRange::WindowRange(const RawTrace& trace, double window_s, double hop_s) : trace_(&trace) {
  if (window_s <= 0.0 || hop_s <= 0.0) throw DataError("window_iter: window and hop must be > 0");
  window_len_ = to_integral_samples(window_s, trace.sample_rate_hz, "window_s");
  hop_len_ = to_integral_samples(hop_s, trace.sample_rate_hz, "hop_s");
  hop_s_ = hop_s;
  const std::size_t total = trace.sample_count();
  steps_ = total < window_len_ ? 0 : (total - window_len_) / hop_len_ + 1;
}

Window WindowRange::window(std::size_t step, std::uint32_t sensor) const {
  Window w;
  w.sensor_index = sensor;
  w.start_s = static_cast<double>(step) * hop_s_;
  w.samples.resize(window_len_);
  const std::size_t t0 = step * hop_len_;
  const std::uint32_t stride = trace_->sensor_count;
  for (std::size_t i = 0; i < window_len_; ++i)
    w.samples[i] = trace_->samples[(t0 + i) * stride + sensor];
  return w;
}

Window WindowRange::iterator::operator*() const {
  const std::size_t sensors = range_->trace_->sensor_count;
  return range_->window(flat_ / sensors, static_cast<std::uint32_t>(flat_ % sensors));
}

WindowRange window_iter(const RawTrace& trace, double window_s, double hop_s) {
  return WindowRange(trace, window_s, hop_s);
}

std::vector<Window> collect(const WindowRange& range) {
  std::vector<Window> out;
  out.reserve(range.size());
  for (auto it = range.begin(); it != range.end(); ++it) out.push_back(*it);
  return out;
}

}  // namespace dasml::io
