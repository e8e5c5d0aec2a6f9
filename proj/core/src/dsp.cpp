#include "dasml/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <ostream>

#include "dasml/fft.hpp"

namespace dasml::dsp {

std::vector<double> fft_mag(const io::Window& window) {
  const std::size_t n = window.samples.size();
  if (n < 2) throw DataError("fft_mag: window too short");
  double mean = 0.0;
  for (double v : window.samples) {
    if (!std::isfinite(v)) throw DataError("fft_mag: non-finite sample");
    mean += v;
  }
  mean /= static_cast<double>(n);

  std::vector<std::complex<double>> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = {window.samples[i] - mean, 0.0};
  const std::vector<std::complex<double>> spec = dft(x);

  const std::size_t bins = n / 2;
  std::vector<double> mag(bins);
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t k = 1; k <= bins; ++k) mag[k - 1] = std::abs(spec[k]) * scale;
  return mag;
}

FeatureVector feature_fft100(const io::Window& window) {
  const std::vector<double> mag = fft_mag(window);
  if (mag.size() < kFeatureBins)
    throw DataError("feature_fft100: window yields fewer than 100 spectral bins");
  FeatureVector fv;
  fv.values.assign(mag.begin(), mag.begin() + kFeatureBins);
  fv.sensor_index = window.sensor_index;
  fv.start_s = window.start_s;
  return fv;
}

RmsSeries rms_series(std::span<const double> samples, std::uint32_t sample_rate_hz,
                     std::uint32_t sensor_index) {
  const std::size_t block =
      static_cast<std::size_t>(std::llround(RmsSeries::kWindowMs * 1e-3 * sample_rate_hz));
  if (block == 0) throw DataError("rms_series: sample rate too low for 10 ms blocks");
  if (samples.size() < block) throw DataError("rms_series: channel shorter than one block");
  RmsSeries out;
  out.sensor_index = sensor_index;
  const std::size_t n = samples.size() / block;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < block; ++i) {
      const double v = samples[k * block + i];
      s += v * v;
    }
    out.values[k] = std::sqrt(s / static_cast<double>(block));
  }
  return out;
}

RmsSeries lowpass(const RmsSeries& series, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DataError("lowpass: alpha must be in (0, 1]");
  RmsSeries out;
  out.sensor_index = series.sensor_index;
  out.values.resize(series.values.size());
  double y = 0.0;
  for (std::size_t k = 0; k < series.values.size(); ++k) {
    y = k == 0 ? series.values[0] : alpha * series.values[k] + (1.0 - alpha) * y;
    out.values[k] = y;
  }
  return out;
}

GreyImage sobel_mag(const GreyImage& image) {
  if (image.rows < 3 || image.cols < 3) throw DataError("sobel_mag: image must be at least 3x3");
  static constexpr int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static constexpr int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  GreyImage out(image.rows, image.cols);
  const auto clamp_r = [&](long r) {
    return static_cast<std::size_t>(std::clamp<long>(r, 0, static_cast<long>(image.rows) - 1));
  };
  const auto clamp_c = [&](long c) {
    return static_cast<std::size_t>(std::clamp<long>(c, 0, static_cast<long>(image.cols) - 1));
  };
  for (std::size_t r = 0; r < image.rows; ++r) {
    for (std::size_t c = 0; c < image.cols; ++c) {
      double gx = 0.0, gy = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const double v = image.at(clamp_r(static_cast<long>(r) + i - 1),
                                    clamp_c(static_cast<long>(c) + j - 1));
          gx += kx[i][j] * v;
          gy += ky[i][j] * v;
        }
      }
      out.at(r, c) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

GreyImage waterfall_matrix(const RawTrace& trace, double alpha) {
  const std::size_t block =
      static_cast<std::size_t>(std::llround(RmsSeries::kWindowMs * 1e-3 * trace.sample_rate_hz));
  if (block == 0) throw DataError("waterfall_matrix: sample rate too low");
  const std::size_t nblocks = trace.sample_count() / block;
  const std::size_t group = 25;  // 250 ms of 10 ms blocks -> 4 columns/s
  const std::size_t ncols = nblocks / group;
  if (ncols == 0) throw DataError("waterfall_matrix: trace shorter than one column");

  GreyImage m(trace.sensor_count, ncols);
  for (std::uint32_t s = 0; s < trace.sensor_count; ++s) {
    const std::vector<double> ch = channel(trace, s);
    const RmsSeries smooth = lowpass(rms_series(ch, trace.sample_rate_hz, s), alpha);
    for (std::size_t c = 0; c < ncols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < group; ++i) acc += smooth.values[c * group + i];
      m.at(s, c) = acc / static_cast<double>(group);
    }
  }
  return m;
}

namespace {

SourceKind majority_label(const synth::LabelMask& mask, std::size_t r0, double start_s) {
  // Count whole seconds fully covered by the patch span.
  const double end_s = start_s + WaterfallPatch::seconds();
  const std::size_t t0 = static_cast<std::size_t>(std::ceil(start_s));
  const std::size_t t1 = static_cast<std::size_t>(std::floor(end_s));
  std::array<std::size_t, 4> counts{};
  for (std::size_t r = r0; r < r0 + kPatchRows && r < mask.sensor_count; ++r)
    for (std::size_t t = t0; t < t1 && t < mask.seconds; ++t)
      counts[static_cast<std::size_t>(mask.at(r, t))]++;
  std::size_t best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k)
    if (counts[k] > counts[best]) best = k;
  return static_cast<SourceKind>(best);
}

}  // namespace

std::vector<WaterfallPatch> build_patches(const RawTrace& trace, const synth::LabelMask* labels,
                                          double alpha) {
  std::vector<WaterfallPatch> patches;
  if (trace.sensor_count < kPatchRows) return patches;
  GreyImage m;
  try {
    m = waterfall_matrix(trace, alpha);
  } catch (const DataError&) {
    return patches;  // undersized trace
  }
  if (m.cols < kPatchCols) return patches;
  const GreyImage grad = sobel_mag(m);

  constexpr std::size_t row_stride = kPatchRows / 2;
  constexpr std::size_t col_stride = kPatchCols / 2;
  for (std::size_t c0 = 0; c0 + kPatchCols <= grad.cols; c0 += col_stride) {
    for (std::size_t r0 = 0; r0 + kPatchRows <= grad.rows; r0 += row_stride) {
      WaterfallPatch p;
      p.origin_sensor = static_cast<std::uint32_t>(r0);
      p.start_s = static_cast<double>(c0) / kPatchColsPerSecond;

      double lo = grad.at(r0, c0), hi = grad.at(r0, c0);
      for (std::size_t r = 0; r < kPatchRows; ++r) {
        for (std::size_t c = 0; c < kPatchCols; ++c) {
          const double v = grad.at(r0 + r, c0 + c);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      const double span = hi - lo;
      for (std::size_t r = 0; r < kPatchRows; ++r)
        for (std::size_t c = 0; c < kPatchCols; ++c)
          p.at(r, c) = span > 0.0 ? (grad.at(r0 + r, c0 + c) - lo) / span : 0.0;

      // Localization row from the pre-Sobel energy matrix.
      double best_energy = -1.0;
      std::size_t best_row = r0;
      for (std::size_t r = 0; r < kPatchRows; ++r) {
        double e = 0.0;
        for (std::size_t c = 0; c < kPatchCols; ++c) e += m.at(r0 + r, c0 + c);
        if (e > best_energy) {
          best_energy = e;
          best_row = r0 + r;
        }
      }
      p.peak_row = static_cast<std::uint32_t>(best_row);
      if (labels != nullptr) p.label = majority_label(*labels, r0, p.start_s);
      patches.push_back(p);
    }
  }
  return patches;
}

std::map<SourceKind, SpectrumStats> spectrum_stats(
    const std::vector<std::pair<FeatureVector, SourceKind>>& labeled) {
  std::map<SourceKind, std::vector<const FeatureVector*>> by_class;
  for (const auto& [fv, kind] : labeled) {
    if (fv.values.size() != kFeatureBins)
      throw DataError("spectrum_stats: feature vector must have 100 bins");
    by_class[kind].push_back(&fv);
  }
  std::map<SourceKind, SpectrumStats> out;
  for (const auto& [kind, vecs] : by_class) {
    if (vecs.size() < 2)
      throw DataError(std::string("spectrum_stats: class ") + to_string(kind) +
                      " has fewer than 2 vectors");
    SpectrumStats st;
    st.mean.assign(kFeatureBins, 0.0);
    st.stddev.assign(kFeatureBins, 0.0);
    const double n = static_cast<double>(vecs.size());
    for (const FeatureVector* fv : vecs)
      for (std::size_t b = 0; b < kFeatureBins; ++b) st.mean[b] += fv->values[b];
    for (std::size_t b = 0; b < kFeatureBins; ++b) st.mean[b] /= n;
    for (const FeatureVector* fv : vecs)
      for (std::size_t b = 0; b < kFeatureBins; ++b) {
        const double d = fv->values[b] - st.mean[b];
        st.stddev[b] += d * d;
      }
    for (std::size_t b = 0; b < kFeatureBins; ++b)
      st.stddev[b] = std::sqrt(st.stddev[b] / (n - 1.0));
    out[kind] = std::move(st);
  }
  return out;
}

void write_pgm(const GreyImage& image, std::ostream& out) {
  out << "P5\n" << image.cols << " " << image.rows << "\n255\n";
  for (double v : image.v) {
    const int g = static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    out.put(static_cast<char>(g));
  }
  if (!out) throw DataError("write_pgm: stream write failed");
}

void write_patch_pgm(const WaterfallPatch& patch, const std::string& path) {
  GreyImage img(kPatchRows, kPatchCols);
  std::copy(patch.pixels.begin(), patch.pixels.end(), img.v.begin());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("write_patch_pgm: cannot open " + path);
  write_pgm(img, out);
}

}  // namespace dasml::dsp
