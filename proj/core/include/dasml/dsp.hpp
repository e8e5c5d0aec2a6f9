#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dasml/synth.hpp"
#include "dasml/trace.hpp"
#include "dasml/types.hpp"
#include "dasml/windowing.hpp"

namespace dasml::dsp {

inline constexpr std::size_t kFeatureBins = 100;

// 100 spectral magnitudes from a 1 s window of one virtual sensor.
struct FeatureVector {
  std::vector<double> values;  // size kFeatureBins, finite, >= 0
  std::uint32_t sensor_index = 0;
  double start_s = 0.0;
};

// Per-10 ms RMS amplitudes of one channel.
struct RmsSeries {
  static constexpr double kWindowMs = 10.0;
  std::uint32_t sensor_index = 0;
  std::vector<double> values;
};

struct GreyImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;  // row-major

  GreyImage() = default;
  GreyImage(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
};

inline constexpr std::size_t kPatchRows = 32;          // sensors (128 m at 4 m spacing)
inline constexpr std::size_t kPatchCols = 60;          // 15 s at 4 columns/s
inline constexpr std::size_t kPatchColsPerSecond = 4;  // one column per 250 ms

// Grey tile fed to the image classifier. Rows are sensors, columns time.
struct WaterfallPatch {
  std::array<double, kPatchRows * kPatchCols> pixels{};  // values in [0,1]
  std::uint32_t origin_sensor = 0;
  double start_s = 0.0;
  SourceKind label = SourceKind::None;
  // Sensor row (absolute index) with the highest mean pre-Sobel energy,
  // used to localize a patch-level detection.
  std::uint32_t peak_row = 0;

  double at(std::size_t r, std::size_t c) const { return pixels[r * kPatchCols + c]; }
  double& at(std::size_t r, std::size_t c) { return pixels[r * kPatchCols + c]; }
  static constexpr double seconds() {
    return static_cast<double>(kPatchCols) / kPatchColsPerSecond;
  }
};

// Per-bin mean and (n-1)-denominator standard deviation over a labeled
// window collection.
struct SpectrumStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// One-sided amplitude spectrum: |DFT(x)| * (2/N) for bins 1..floor(N/2),
// after mean removal. A sinusoid of amplitude A reads A at its bin.
std::vector<double> fft_mag(const io::Window& window);

// First 100 bins of fft_mag (1..100 Hz for a 1 s window at 2 kHz).
FeatureVector feature_fft100(const io::Window& window);

// RMS over consecutive blocks of round(10 ms * rate) samples; a trailing
// partial block is dropped.
RmsSeries rms_series(std::span<const double> samples, std::uint32_t sample_rate_hz,
                     std::uint32_t sensor_index = 0);

// First-order exponential smoother: y[0]=x[0], y[k]=alpha*x[k]+(1-alpha)*y[k-1].
RmsSeries lowpass(const RmsSeries& series, double alpha);

// Euclidean gradient magnitude of the horizontal and vertical Sobel
// responses; borders handled by edge replication; output keeps the shape.
GreyImage sobel_mag(const GreyImage& image);

// Full scene matrix (sensors x time columns): per channel rms_series ->
// lowpass(alpha) -> mean-decimate to 4 columns/s.
GreyImage waterfall_matrix(const RawTrace& trace, double alpha);

// waterfall_matrix -> sobel_mag -> 32x60 tiles with 50% overlap on both
// axes, each min-max normalized to [0,1] (an all-constant tile maps to
// zeros). Patch label = majority ground-truth label of covered cells when
// a mask is given.
std::vector<WaterfallPatch> build_patches(const RawTrace& trace, const synth::LabelMask* labels,
                                          double alpha);

// Per-class spectrum statistics; every class present needs >= 2 vectors.
std::map<SourceKind, SpectrumStats> spectrum_stats(
    const std::vector<std::pair<FeatureVector, SourceKind>>& labeled);

// 8-bit grey PGM (P5), pixel = round(255 * value).
void write_pgm(const GreyImage& image, std::ostream& out);
void write_patch_pgm(const WaterfallPatch& patch, const std::string& path);

}  // namespace dasml::dsp
