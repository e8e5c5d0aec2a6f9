#include "dasml/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "dasml/optim.hpp"
#include "dasml/rng.hpp"

namespace dasml::cnn {

Tensor conv2d_forward(const ConvLayer& layer, const Tensor& in) {
  if (in.dims.size() != 3 || in.dim(0) != 1)
    throw DataError("conv2d: input must be (1, H, W)");
  const std::size_t h = in.dim(1), w = in.dim(2), k = layer.kernel;
  if (h < k || w < k) throw DataError("conv2d: input smaller than the kernel");
  const std::size_t oh = h - k + 1, ow = w - k + 1;
  Tensor out{layer.filters, oh, ow};
  for (std::size_t f = 0; f < layer.filters; ++f) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = layer.b[f];
        for (std::size_t di = 0; di < k; ++di)
          for (std::size_t dj = 0; dj < k; ++dj)
            acc += layer.w.at4(f, 0, di, dj) * in.at3(0, i + di, j + dj);
        out.at3(f, i, j) = acc;
      }
    }
  }
  return out;
}

void conv2d_backward(const ConvLayer& layer, const Tensor& in, const Tensor& dout, ConvGrads& g,
                     bool want_input_grad) {
  const std::size_t k = layer.kernel;
  const std::size_t oh = dout.dim(1), ow = dout.dim(2);
  if (g.w.dims != layer.w.dims) {
    g.w = layer.w;
    std::fill(g.w.v.begin(), g.w.v.end(), 0.0);
  }
  if (g.b.size() != layer.filters) g.b.assign(layer.filters, 0.0);
  for (std::size_t f = 0; f < layer.filters; ++f) {
    double db = 0.0;
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) db += dout.at3(f, i, j);
    g.b[f] += db;
    for (std::size_t di = 0; di < k; ++di) {
      for (std::size_t dj = 0; dj < k; ++dj) {
        double dw = 0.0;
        for (std::size_t i = 0; i < oh; ++i)
          for (std::size_t j = 0; j < ow; ++j)
            dw += dout.at3(f, i, j) * in.at3(0, i + di, j + dj);
        g.w.at4(f, 0, di, dj) += dw;
      }
    }
  }
  if (!want_input_grad) return;
  if (g.input.dims != in.dims) {
    g.input = in;
    std::fill(g.input.v.begin(), g.input.v.end(), 0.0);
  }
  for (std::size_t f = 0; f < layer.filters; ++f)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        const double d = dout.at3(f, i, j);
        for (std::size_t di = 0; di < k; ++di)
          for (std::size_t dj = 0; dj < k; ++dj)
            g.input.at3(0, i + di, j + dj) += d * layer.w.at4(f, 0, di, dj);
      }
}

Tensor relu(const Tensor& t) {
  Tensor out = t;
  for (double& x : out.v) x = std::max(0.0, x);
  return out;
}

Tensor relu_backward(const Tensor& in, const Tensor& dout) {
  if (!in.same_shape(dout)) throw DataError("relu_backward: shape mismatch");
  Tensor g = dout;
  for (std::size_t i = 0; i < g.v.size(); ++i)
    if (!(in.v[i] > 0.0)) g.v[i] = 0.0;
  return g;
}

Tensor maxpool2(const Tensor& t) {
  if (t.dims.size() != 3) throw DataError("maxpool2: expected (C, H, W)");
  const std::size_t c = t.dim(0), h = t.dim(1), w = t.dim(2);
  if (h % 2 != 0 || w % 2 != 0) throw DataError("maxpool2: odd input dimensions");
  Tensor out{c, h / 2, w / 2};
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h / 2; ++i)
      for (std::size_t j = 0; j < w / 2; ++j) {
        double m = t.at3(ch, 2 * i, 2 * j);
        m = std::max(m, t.at3(ch, 2 * i, 2 * j + 1));
        m = std::max(m, t.at3(ch, 2 * i + 1, 2 * j));
        m = std::max(m, t.at3(ch, 2 * i + 1, 2 * j + 1));
        out.at3(ch, i, j) = m;
      }
  return out;
}

Tensor maxpool2_backward(const Tensor& in, const Tensor& dout) {
  const std::size_t c = in.dim(0), h = in.dim(1), w = in.dim(2);
  Tensor g = in;
  std::fill(g.v.begin(), g.v.end(), 0.0);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h / 2; ++i)
      for (std::size_t j = 0; j < w / 2; ++j) {
        // first-index tie-break over the scan order (0,0),(0,1),(1,0),(1,1)
        std::size_t bi = 2 * i, bj = 2 * j;
        double best = in.at3(ch, bi, bj);
        const std::size_t cand[3][2] = {{2 * i, 2 * j + 1}, {2 * i + 1, 2 * j},
                                        {2 * i + 1, 2 * j + 1}};
        for (const auto& rc : cand) {
          if (in.at3(ch, rc[0], rc[1]) > best) {
            best = in.at3(ch, rc[0], rc[1]);
            bi = rc[0];
            bj = rc[1];
          }
        }
        g.at3(ch, bi, bj) += dout.at3(ch, i, j);
      }
  return g;
}

std::vector<double> softmax_forward(const std::vector<double>& logits) {
  if (logits.empty()) throw DataError("softmax: empty logits");
  double m = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericError("softmax: non-finite logit");
    m = std::max(m, z);
  }
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

double cross_entropy(const std::vector<std::array<double, 2>>& probs,
                     const std::vector<int>& targets) {
  if (probs.size() != targets.size()) throw DataError("cross_entropy: batch size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    loss += -std::log(std::max(probs[i][static_cast<std::size_t>(targets[i])], 1e-15));
  return loss;
}

std::vector<double> CnnModel::forward(const Tensor& in) const {
  const Tensor z = conv2d_forward(conv, in);
  const Tensor a = relu(z);
  const Tensor p = maxpool2(a);
  std::vector<double> logits(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) logits[c] = dense_b[c];
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    const double x = p.v[i];
    for (std::size_t c = 0; c < classes; ++c) logits[c] += dense_w[i * classes + c] * x;
  }
  return softmax_forward(logits);
}

CnnModel init_cnn(std::uint64_t seed, std::size_t input_h, std::size_t input_w,
                  std::size_t filters, std::size_t kernel) {
  CnnModel m;
  m.input_h = input_h;
  m.input_w = input_w;
  m.conv.filters = filters;
  m.conv.kernel = kernel;
  m.conv.w = Tensor{filters, 1, kernel, kernel};
  m.conv.b.assign(filters, 0.0);

  std::mt19937_64 rng = substream(seed, 0x636e6eULL, 0);  // "cnn"
  const double s_conv = 1.0 / std::sqrt(static_cast<double>(kernel * kernel));
  for (double& w : m.conv.w.v) w = uniform(rng, -s_conv, s_conv);

  const std::size_t pooled = m.pooled_size();
  m.dense_w.resize(pooled * m.classes);
  const double s_dense = 1.0 / std::sqrt(static_cast<double>(pooled));
  for (double& w : m.dense_w) w = uniform(rng, -s_dense, s_dense);
  m.dense_b.assign(m.classes, 0.0);

  m.vel_conv_w.assign(m.conv.w.size(), 0.0);
  m.vel_conv_b.assign(filters, 0.0);
  m.vel_dense_w.assign(m.dense_w.size(), 0.0);
  m.vel_dense_b.assign(m.classes, 0.0);
  return m;
}

void CnnGrads::zero(const CnnModel& m) {
  conv_w = m.conv.w;
  std::fill(conv_w.v.begin(), conv_w.v.end(), 0.0);
  conv_b.assign(m.conv.filters, 0.0);
  dense_w.assign(m.dense_w.size(), 0.0);
  dense_b.assign(m.dense_b.size(), 0.0);
}

Tensor patch_to_tensor(const dsp::WaterfallPatch& patch) {
  Tensor t{1, dsp::kPatchRows, dsp::kPatchCols};
  std::copy(patch.pixels.begin(), patch.pixels.end(), t.v.begin());
  return t;
}

double cnn_loss_grad(const CnnModel& m, const std::vector<const Tensor*>& batch,
                     const std::vector<int>& targets, CnnGrads* g) {
  if (batch.size() != targets.size()) throw DataError("cnn_loss_grad: batch size mismatch");
  double loss = 0.0;
  ConvGrads cg;  // conv gradients accumulate here across the batch
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const Tensor& in = *batch[n];
    if (in.dim(1) != m.input_h || in.dim(2) != m.input_w)
      throw DataError("cnn: input shape does not match the model");
    const Tensor z = conv2d_forward(m.conv, in);
    const Tensor a = relu(z);
    const Tensor pooled = maxpool2(a);

    std::vector<double> logits(m.classes, 0.0);
    for (std::size_t c = 0; c < m.classes; ++c) logits[c] = m.dense_b[c];
    for (std::size_t i = 0; i < pooled.v.size(); ++i)
      for (std::size_t c = 0; c < m.classes; ++c)
        logits[c] += m.dense_w[i * m.classes + c] * pooled.v[i];
    const std::vector<double> p = softmax_forward(logits);
    const int t = targets[n];
    loss += -std::log(std::max(p[static_cast<std::size_t>(t)], 1e-15));
    if (g == nullptr) continue;

    // dL/dlogits = p - t for the summed loss
    std::vector<double> dz(m.classes);
    for (std::size_t c = 0; c < m.classes; ++c)
      dz[c] = p[c] - (static_cast<std::size_t>(t) == c ? 1.0 : 0.0);

    Tensor dpool = pooled;
    std::fill(dpool.v.begin(), dpool.v.end(), 0.0);
    for (std::size_t i = 0; i < pooled.v.size(); ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < m.classes; ++c) {
        g->dense_w[i * m.classes + c] += pooled.v[i] * dz[c];
        acc += m.dense_w[i * m.classes + c] * dz[c];
      }
      dpool.v[i] = acc;
    }
    for (std::size_t c = 0; c < m.classes; ++c) g->dense_b[c] += dz[c];

    const Tensor da = maxpool2_backward(a, dpool);
    const Tensor dzc = relu_backward(z, da);
    conv2d_backward(m.conv, in, dzc, cg, false);
  }
  if (g != nullptr && !cg.w.v.empty()) {
    for (std::size_t i = 0; i < cg.w.v.size(); ++i) g->conv_w.v[i] += cg.w.v[i];
    for (std::size_t i = 0; i < cg.b.size(); ++i) g->conv_b[i] += cg.b[i];
  }
  return loss;
}

double cnn_loss_grad(const CnnModel& m, const std::vector<const dsp::WaterfallPatch*>& batch,
                     const std::vector<int>& targets, CnnGrads* g) {
  std::vector<Tensor> tensors;
  tensors.reserve(batch.size());
  for (const dsp::WaterfallPatch* p : batch) tensors.push_back(patch_to_tensor(*p));
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(tensors.size());
  for (const Tensor& t : tensors) ptrs.push_back(&t);
  return cnn_loss_grad(m, ptrs, targets, g);
}

namespace {

double train_accuracy(const CnnModel& m, const std::vector<dsp::WaterfallPatch>& patches,
                      const std::vector<int>& targets) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const std::vector<double> p = m.forward(patch_to_tensor(patches[i]));
    const int pred = p[1] > p[0] ? 1 : 0;
    if (pred == targets[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(patches.size());
}

}  // namespace

TrainLog train_cnn(CnnModel& model, const std::vector<dsp::WaterfallPatch>& patches,
                   const TrainConfig& cfg) {
  if (patches.empty()) throw DataError("train_cnn: empty patch set");
  std::vector<int> targets(patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i)
    targets[i] = patches[i].label == SourceKind::Excavator ? 1 : 0;
  const bool has0 = std::find(targets.begin(), targets.end(), 0) != targets.end();
  const bool has1 = std::find(targets.begin(), targets.end(), 1) != targets.end();
  if (!has0 || !has1) throw DataError("train_cnn: both classes must be present");
  if (cfg.batch == 0 || cfg.lr <= 0.0) throw DataError("train_cnn: bad batch size or lr");

  std::vector<std::size_t> order(patches.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng = substream(cfg.seed, 0x636e6e74ULL, 1);  // batch shuffling

  TrainLog log;
  CnnGrads grads;
  std::vector<const dsp::WaterfallPatch*> xs;
  std::vector<int> ys;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.epoch_lr(epoch);
    double epoch_loss = 0.0;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch) {
      const std::size_t hi = std::min(order.size(), at + cfg.batch);
      xs.clear();
      ys.clear();
      for (std::size_t i = at; i < hi; ++i) {
        xs.push_back(&patches[order[i]]);
        ys.push_back(targets[order[i]]);
      }
      grads.zero(model);
      const double loss = cnn_loss_grad(model, xs, ys, &grads);
      if (!std::isfinite(loss))
        throw NumericError("train_cnn: loss diverged at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(at / cfg.batch));
      epoch_loss += loss;
      sgd_momentum_step(model.conv.w.v, grads.conv_w.v, model.vel_conv_w, lr, cfg.momentum);
      sgd_momentum_step(model.conv.b, grads.conv_b, model.vel_conv_b, lr, cfg.momentum);
      sgd_momentum_step(model.dense_w, grads.dense_w, model.vel_dense_w, lr, cfg.momentum);
      sgd_momentum_step(model.dense_b, grads.dense_b, model.vel_dense_b, lr, cfg.momentum);
    }
    log.epoch_loss.push_back(epoch_loss);
    const double acc = train_accuracy(model, patches, targets);
    log.epoch_accuracy.push_back(acc);
    log.epochs_run = epoch + 1;
    if (cfg.early_exit && acc >= 1.0) break;
  }
  return log;
}

ImagePrediction predict_image(const CnnModel& model, const dsp::WaterfallPatch& patch) {
  const Tensor in = patch_to_tensor(patch);
  if (in.dim(1) != model.input_h || in.dim(2) != model.input_w)
    throw DataError("predict_image: patch shape does not match the model input");
  const std::vector<double> p = model.forward(in);
  ImagePrediction out;
  out.probability = p[1];
  out.label = p[1] > p[0] ? EventClass::Excavator : EventClass::Other;
  return out;
}

namespace {

constexpr char kMagic[4] = {'C', 'N', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw DataError("CNN1: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64_array(std::ostream& out, const std::vector<double>& a) {
  for (double v : a) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(b, 8);
  }
}

void get_f64_array(std::istream& in, std::vector<double>& a, std::size_t n) {
  a.resize(n);
  std::vector<char> raw(n * 8);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw DataError("CNN1: truncated parameter block");
  const unsigned char* p = reinterpret_cast<const unsigned char*>(raw.data());
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k) bits = (bits << 8) | p[i * 8 + k];
    std::memcpy(&a[i], &bits, 8);
  }
}

}  // namespace

void save_checkpoint(const CnnModel& model, std::ostream& out) {
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(model.input_h));
  put_u32(out, static_cast<std::uint32_t>(model.input_w));
  put_u32(out, static_cast<std::uint32_t>(model.conv.filters));
  put_u32(out, static_cast<std::uint32_t>(model.conv.kernel));
  put_u32(out, static_cast<std::uint32_t>(model.classes));
  put_f64_array(out, model.conv.w.v);
  put_f64_array(out, model.conv.b);
  put_f64_array(out, model.dense_w);
  put_f64_array(out, model.dense_b);
  put_f64_array(out, model.vel_conv_w);
  put_f64_array(out, model.vel_conv_b);
  put_f64_array(out, model.vel_dense_w);
  put_f64_array(out, model.vel_dense_b);
  if (!out) throw DataError("save_checkpoint: write failed");
}

void save_checkpoint_file(const CnnModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("save_checkpoint: cannot open " + path);
  save_checkpoint(model, out);
}

CnnModel load_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("CNN1: bad magic");
  const std::uint32_t version = get_u32(in);
  if (version != kVersion)
    throw DataError("CNN1: unsupported version " + std::to_string(version));
  const std::uint32_t h = get_u32(in);
  const std::uint32_t w = get_u32(in);
  const std::uint32_t filters = get_u32(in);
  const std::uint32_t kernel = get_u32(in);
  const std::uint32_t classes = get_u32(in);
  if (classes != 2) throw DataError("CNN1: unsupported class count");

  CnnModel m;
  m.input_h = h;
  m.input_w = w;
  m.classes = classes;
  m.conv.filters = filters;
  m.conv.kernel = kernel;
  m.conv.w = Tensor{filters, 1, kernel, kernel};
  get_f64_array(in, m.conv.w.v, static_cast<std::size_t>(filters) * kernel * kernel);
  get_f64_array(in, m.conv.b, filters);
  get_f64_array(in, m.dense_w, m.pooled_size() * classes);
  get_f64_array(in, m.dense_b, classes);
  get_f64_array(in, m.vel_conv_w, m.conv.w.size());
  get_f64_array(in, m.vel_conv_b, filters);
  get_f64_array(in, m.vel_dense_w, m.dense_w.size());
  get_f64_array(in, m.vel_dense_b, classes);
  return m;
}

CnnModel load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_checkpoint: cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace dasml::cnn
