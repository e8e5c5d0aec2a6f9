#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dasml/trace.hpp"

namespace dasml::io {

// A fixed-length slice of one virtual sensor, the per-second analysis unit.
struct Window {
  std::uint32_t sensor_index = 0;
  double start_s = 0.0;
  std::vector<double> samples;
};

// Lazily enumerates full windows in (time, sensor) order. A window longer
// than the trace yields an empty range. Pure view: safe for concurrent
// iteration by multiple readers.
class WindowRange {
 public:
  WindowRange(const RawTrace& trace, double window_s, double hop_s);

  std::size_t window_len() const { return window_len_; }
  std::size_t steps() const { return steps_; }  // windows per sensor
  std::size_t size() const { return steps_ * trace_->sensor_count; }

  // Materializes the window at (time step, sensor).
  Window window(std::size_t step, std::uint32_t sensor) const;

  class iterator {
   public:
    iterator(const WindowRange* range, std::size_t flat) : range_(range), flat_(flat) {}
    Window operator*() const;
    iterator& operator++() {
      ++flat_;
      return *this;
    }
    bool operator==(const iterator& o) const { return flat_ == o.flat_; }
    bool operator!=(const iterator& o) const { return flat_ != o.flat_; }

   private:
    const WindowRange* range_;
    std::size_t flat_;
  };

  iterator begin() const { return iterator(this, 0); }
  iterator end() const { return iterator(this, size()); }

 private:
  const RawTrace* trace_;
  double hop_s_ = 0.0;
  std::size_t window_len_ = 0;
  std::size_t hop_len_ = 0;
  std::size_t steps_ = 0;
};

WindowRange window_iter(const RawTrace& trace, double window_s, double hop_s);
std::vector<Window> collect(const WindowRange& range);

}  // namespace dasml::io
