#include "dasml/trace.hpp"

namespace dasml {

std::vector<double> channel(const RawTrace& trace, std::uint32_t sensor_index) {
  const std::size_t n = trace.sample_count();
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = trace.samples[t * trace.sensor_count + sensor_index];
  return out;
}

}  // namespace dasml
