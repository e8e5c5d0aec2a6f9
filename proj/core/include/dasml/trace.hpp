#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dasml {

// Time-major acoustic samples: samples[t * sensor_count + s].
// Rows arrive whole from the interrogator, one per pulse, so appending a
// time step is contiguous.
struct RawTrace {
  std::uint32_t sensor_count = 0;
  std::uint32_t sample_rate_hz = 0;
  std::vector<double> samples;

  std::size_t sample_count() const {
    return sensor_count == 0 ? 0 : samples.size() / sensor_count;
  }
  double duration_s() const {
    return sample_rate_hz == 0 ? 0.0 : static_cast<double>(sample_count()) / sample_rate_hz;
  }
  double at(std::size_t t, std::size_t s) const { return samples[t * sensor_count + s]; }
  double& at(std::size_t t, std::size_t s) { return samples[t * sensor_count + s]; }

  bool operator==(const RawTrace&) const = default;
};

// One sensor's samples gathered into a contiguous vector.
std::vector<double> channel(const RawTrace& trace, std::uint32_t sensor_index);

}  // namespace dasml
