#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dasml/dsp.hpp"
#include "dasml/tensor.hpp"
#include "dasml/types.hpp"

namespace dasml::cnn {

// Valid (no padding) stride-1 cross-correlation bank: single input channel,
// square kernels.
struct ConvLayer {
  std::size_t filters = 20;
  std::size_t kernel = 5;
  Tensor w;               // (filters, 1, kernel, kernel)
  std::vector<double> b;  // filters
};

Tensor conv2d_forward(const ConvLayer& layer, const Tensor& in);

struct ConvGrads {
  Tensor w;
  std::vector<double> b;
  Tensor input;  // filled only when requested
};

// Accumulates exact gradients w.r.t. filters and biases into g (+= semantics);
// input gradients are optional since the first layer never needs them.
void conv2d_backward(const ConvLayer& layer, const Tensor& in, const Tensor& dout, ConvGrads& g,
                     bool want_input_grad);

Tensor relu(const Tensor& t);
// Gradient passes where the forward input was > 0 and is zero elsewhere.
Tensor relu_backward(const Tensor& in, const Tensor& dout);

// 2x2 stride-2 max pooling; requires even height and width. Backward routes
// each upstream gradient to the argmax position (first-index tie-break).
Tensor maxpool2(const Tensor& t);
Tensor maxpool2_backward(const Tensor& in, const Tensor& dout);

// Numerically stable (max-subtracted) softmax.
std::vector<double> softmax_forward(const std::vector<double>& logits);

// Summed cross-entropy over the batch; probabilities are clamped to 1e-15
// before the log.
double cross_entropy(const std::vector<std::array<double, 2>>& probs,
                     const std::vector<int>& targets);

struct TrainConfig {
  std::size_t max_epochs = 50;
  std::size_t batch = 128;
  double lr = 0.001;  // initial rate; decays harmonically per epoch
  double lr_decay = 0.1;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool early_exit = true;  // stop at an epoch boundary on 100% train accuracy

  double epoch_lr(std::size_t epoch) const { return lr / (1.0 + lr_decay * epoch); }
};

// Conv -> ReLU -> 2x2 max pool -> dense softmax over {Other, Excavator}.
// Velocity buffers live in the model and persist through checkpoints.
struct CnnModel {
  std::size_t input_h = 32;
  std::size_t input_w = 60;
  std::size_t classes = 2;
  ConvLayer conv;
  std::vector<double> dense_w;  // (pooled size) x classes, input-major
  std::vector<double> dense_b;  // classes

  std::vector<double> vel_conv_w, vel_conv_b, vel_dense_w, vel_dense_b;

  std::size_t conv_out_h() const { return input_h - conv.kernel + 1; }
  std::size_t conv_out_w() const { return input_w - conv.kernel + 1; }
  std::size_t pooled_size() const {
    return conv.filters * (conv_out_h() / 2) * (conv_out_w() / 2);
  }

  std::vector<double> forward(const Tensor& in) const;  // class probabilities
};

// Seeded uniform init scaled by 1/sqrt(fan-in); biases and velocities zero.
CnnModel init_cnn(std::uint64_t seed, std::size_t input_h = 32, std::size_t input_w = 60,
                  std::size_t filters = 20, std::size_t kernel = 5);

struct CnnGrads {
  Tensor conv_w;
  std::vector<double> conv_b, dense_w, dense_b;
  void zero(const CnnModel& m);
};

// Forward + backward over a batch; returns the summed loss and accumulates
// gradients (when g != nullptr). The Tensor overload accepts any input shape
// matching the model, which keeps small probe networks testable.
double cnn_loss_grad(const CnnModel& m, const std::vector<const Tensor*>& batch,
                     const std::vector<int>& targets, CnnGrads* g);
double cnn_loss_grad(const CnnModel& m, const std::vector<const dsp::WaterfallPatch*>& batch,
                     const std::vector<int>& targets, CnnGrads* g);

struct TrainLog {
  std::vector<double> epoch_loss;      // summed loss over each epoch
  std::vector<double> epoch_accuracy;  // training accuracy at each epoch end
  std::size_t epochs_run = 0;
};

// Patch targets come from the patch labels: Excavator -> class 1, anything
// else -> class 0. Deterministic for a fixed seed; throws NumericError on a
// non-finite loss.
TrainLog train_cnn(CnnModel& model, const std::vector<dsp::WaterfallPatch>& patches,
                   const TrainConfig& cfg);

struct ImagePrediction {
  EventClass label = EventClass::Other;
  double probability = 0.0;  // softmax Excavator component
};

ImagePrediction predict_image(const CnnModel& model, const dsp::WaterfallPatch& patch);

Tensor patch_to_tensor(const dsp::WaterfallPatch& patch);

// CNN1 checkpoint: magic "CNN1", u32 LE version, u32 LE dims (input_h,
// input_w, filters, kernel, classes), then binary64 LE parameters in order
// (filters, conv biases, dense weights, dense biases, then velocities in the
// same order). Bit-exact round trip.
void save_checkpoint(const CnnModel& model, std::ostream& out);
void save_checkpoint_file(const CnnModel& model, const std::string& path);
CnnModel load_checkpoint(std::istream& in);
CnnModel load_checkpoint_file(const std::string& path);

}  // namespace dasml::cnn
