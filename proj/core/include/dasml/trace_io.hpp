#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "dasml/synth.hpp"
#include "dasml/trace.hpp"
#include "dasml/types.hpp"

namespace dasml::io {

// DAS1 container parse failure, one kind per distinct corruption.
struct TraceFormatError : DataError {
  enum class Kind { BadMagic, BadVersion, Truncated };
  Kind kind;
  TraceFormatError(Kind k, const std::string& msg) : DataError(msg), kind(k) {}
};

// DAS1 layout, little-endian throughout:
//   bytes 0-3   ASCII "DAS1"
//   u32         version (= 1)
//   u32         sensor_count
//   u32         sample_rate_hz
//   u64         sample_count (time rows)
//   payload     sample_count * sensor_count IEEE-754 binary32, time-major
// Samples are stored in 32-bit; in-memory computation stays 64-bit.
std::size_t write_trace(const RawTrace& trace, std::ostream& out);
std::size_t write_trace_file(const RawTrace& trace, const std::string& path);
RawTrace read_trace(std::istream& in);
RawTrace read_trace_file(const std::string& path);

// Label sidecar: JSON lines, one record per labeled cell
// {"sensor": s, "second": t, "label": "...", "source_id": k}.
void write_labels(const synth::LabelMask& mask, std::ostream& out);
void write_labels_file(const synth::LabelMask& mask, const std::string& path);
synth::LabelMask read_labels(std::istream& in, std::uint32_t sensor_count, std::uint32_t seconds);
synth::LabelMask read_labels_file(const std::string& path, std::uint32_t sensor_count,
                                  std::uint32_t seconds);

}  // namespace dasml::io
