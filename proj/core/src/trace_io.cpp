#include "dasml/trace_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace dasml::io {

namespace {

constexpr char kMagic[4] = {'D', 'A', 'S', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 24;

void put_u32(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_f32(std::string& buf, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(buf, bits);
}

float get_f32(const unsigned char* p) {
  const std::uint32_t bits = get_u32(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

std::size_t write_trace(const RawTrace& trace, std::ostream& out) {
  for (double v : trace.samples)
    if (!std::isfinite(v)) throw DataError("write_trace: non-finite sample");
  if (trace.sensor_count == 0) throw DataError("write_trace: sensor_count is zero");
  if (trace.samples.size() % trace.sensor_count != 0)
    throw DataError("write_trace: sample buffer not a whole number of time rows");

  std::string buf;
  buf.reserve(kHeaderBytes + trace.samples.size() * 4);
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, trace.sensor_count);
  put_u32(buf, trace.sample_rate_hz);
  put_u64(buf, trace.sample_count());
  for (double v : trace.samples) put_f32(buf, static_cast<float>(v));

  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("write_trace: stream write failed");
  return buf.size();
}

std::size_t write_trace_file(const RawTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("write_trace: cannot open " + path);
  return write_trace(trace, out);
}

RawTrace read_trace(std::istream& in) {
  unsigned char header[kHeaderBytes];
  in.read(reinterpret_cast<char*>(header), kHeaderBytes);
  if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes))
    throw TraceFormatError(TraceFormatError::Kind::Truncated, "DAS1: truncated header");
  if (std::memcmp(header, kMagic, 4) != 0)
    throw TraceFormatError(TraceFormatError::Kind::BadMagic, "DAS1: bad magic");
  const std::uint32_t version = get_u32(header + 4);
  if (version != kVersion)
    throw TraceFormatError(TraceFormatError::Kind::BadVersion,
                           "DAS1: unsupported version " + std::to_string(version));
  RawTrace trace;
  trace.sensor_count = get_u32(header + 8);
  trace.sample_rate_hz = get_u32(header + 12);
  const std::uint64_t rows = get_u64(header + 16);
  const std::uint64_t count = rows * trace.sensor_count;

  std::string payload(count * 4, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (in.gcount() != static_cast<std::streamsize>(payload.size()))
    throw TraceFormatError(TraceFormatError::Kind::Truncated,
                           "DAS1: payload shorter than header declares");
  trace.samples.resize(count);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::uint64_t i = 0; i < count; ++i) trace.samples[i] = get_f32(p + i * 4);
  return trace;
}

RawTrace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_trace: cannot open " + path);
  return read_trace(in);
}

void write_labels(const synth::LabelMask& mask, std::ostream& out) {
  using nlohmann::json;
  for (std::uint32_t s = 0; s < mask.sensor_count; ++s) {
    for (std::uint32_t t = 0; t < mask.seconds; ++t) {
      const SourceKind k = mask.at(s, t);
      if (k == SourceKind::None) continue;
      json j;
      j["sensor"] = s;
      j["second"] = t;
      j["label"] = to_string(k);
      j["source_id"] = mask.source_at(s, t);
      out << j.dump() << '\n';
    }
  }
  if (!out) throw DataError("write_labels: stream write failed");
}

void write_labels_file(const synth::LabelMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("write_labels: cannot open " + path);
  write_labels(mask, out);
}

synth::LabelMask read_labels(std::istream& in, std::uint32_t sensor_count, std::uint32_t seconds) {
  using nlohmann::json;
  synth::LabelMask mask;
  mask.sensor_count = sensor_count;
  mask.seconds = seconds;
  mask.label.assign(static_cast<std::size_t>(sensor_count) * seconds, SourceKind::None);
  mask.source.assign(static_cast<std::size_t>(sensor_count) * seconds, -1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::uint32_t s = j.at("sensor").get<std::uint32_t>();
      const std::uint32_t t = j.at("second").get<std::uint32_t>();
      if (s >= sensor_count || t >= seconds)
        throw DataError("labels: cell outside mask dimensions at line " + std::to_string(lineno));
      mask.label[s * seconds + t] = source_kind_from_string(j.at("label").get<std::string>());
      mask.source[s * seconds + t] = j.value("source_id", -1);
    } catch (const json::exception& e) {
      throw DataError("labels: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return mask;
}

synth::LabelMask read_labels_file(const std::string& path, std::uint32_t sensor_count,
                                  std::uint32_t seconds) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_labels: cannot open " + path);
  return read_labels(in, sensor_count, seconds);
}

}  // namespace dasml::io
