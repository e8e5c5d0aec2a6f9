#include "dasml/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dasml/optim.hpp"
#include "dasml/rng.hpp"

namespace dasml::ml {

namespace {

std::array<double, 2> softmax2(double z0, double z1) {
  const double m = std::max(z0, z1);
  const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
  const double s = e0 + e1;
  return {e0 / s, e1 / s};
}

}  // namespace

std::array<double, 2> MlpModel::forward(const std::vector<double>& x) const {
  if (x.size() != in_dim) throw DataError("mlp: input dimension mismatch");
  std::vector<double> h(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    double z = b1[j];
    for (std::size_t i = 0; i < in_dim; ++i) z += w1[i * hidden + j] * x[i];
    h[j] = std::tanh(z);
  }
  double z0 = b2[0], z1 = b2[1];
  for (std::size_t j = 0; j < hidden; ++j) {
    z0 += w2[j * 2 + 0] * h[j];
    z1 += w2[j * 2 + 1] * h[j];
  }
  return softmax2(z0, z1);
}

void MlpGrads::zero(const MlpModel& m) {
  w1.assign(m.w1.size(), 0.0);
  b1.assign(m.b1.size(), 0.0);
  w2.assign(m.w2.size(), 0.0);
  b2.assign(m.b2.size(), 0.0);
}

MlpModel init_mlp(std::size_t in_dim, std::size_t hidden, std::uint64_t seed) {
  MlpModel m;
  m.in_dim = in_dim;
  m.hidden = hidden;
  m.w1.resize(in_dim * hidden);
  m.b1.assign(hidden, 0.0);
  m.w2.resize(hidden * 2);
  m.b2.assign(2, 0.0);
  std::mt19937_64 rng = substream(seed, 0x6d6c70ULL, 0);  // "mlp"
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (auto& w : m.w1) w = uniform(rng, -s1, s1);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& w : m.w2) w = uniform(rng, -s2, s2);
  return m;
}

double mlp_loss_grad(const MlpModel& m, const std::vector<const std::vector<double>*>& xs,
                     const std::vector<int>& ys, MlpGrads* g) {
  if (xs.size() != ys.size()) throw DataError("mlp_loss_grad: batch size mismatch");
  double loss = 0.0;
  std::vector<double> h(m.hidden), pre(m.hidden), dh(m.hidden);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const std::vector<double>& x = *xs[n];
    for (std::size_t j = 0; j < m.hidden; ++j) {
      double z = m.b1[j];
      for (std::size_t i = 0; i < m.in_dim; ++i) z += m.w1[i * m.hidden + j] * x[i];
      pre[j] = z;
      h[j] = std::tanh(z);
    }
    double z0 = m.b2[0], z1 = m.b2[1];
    for (std::size_t j = 0; j < m.hidden; ++j) {
      z0 += m.w2[j * 2 + 0] * h[j];
      z1 += m.w2[j * 2 + 1] * h[j];
    }
    const std::array<double, 2> p = softmax2(z0, z1);
    const int t = ys[n];
    loss += -std::log(std::max(p[static_cast<std::size_t>(t)], 1e-15));
    if (g == nullptr) continue;

    // Softmax + cross-entropy gradient at the logits is (p - t).
    const double dz[2] = {p[0] - (t == 0 ? 1.0 : 0.0), p[1] - (t == 1 ? 1.0 : 0.0)};
    for (std::size_t j = 0; j < m.hidden; ++j) {
      g->w2[j * 2 + 0] += h[j] * dz[0];
      g->w2[j * 2 + 1] += h[j] * dz[1];
      dh[j] = m.w2[j * 2 + 0] * dz[0] + m.w2[j * 2 + 1] * dz[1];
    }
    g->b2[0] += dz[0];
    g->b2[1] += dz[1];
    for (std::size_t j = 0; j < m.hidden; ++j) {
      const double dpre = (1.0 - h[j] * h[j]) * dh[j];
      for (std::size_t i = 0; i < m.in_dim; ++i) g->w1[i * m.hidden + j] += x[i] * dpre;
      g->b1[j] += dpre;
    }
  }
  return loss;
}

MlpModel train_mlp(const Dataset& train, const MlpConfig& cfg) {
  train.validate_for_training();
  if (cfg.batch == 0 || cfg.lr <= 0.0) throw DataError("train_mlp: bad batch size or lr");
  MlpModel m = init_mlp(train.dim, cfg.hidden, cfg.seed);

  MlpGrads grads;
  MlpGrads vel;
  vel.zero(m);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng = substream(cfg.seed, 0x6d6c7073ULL, 1);  // epoch shuffling

  std::vector<const std::vector<double>*> xs;
  std::vector<int> ys;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t at = 0; at < order.size(); at += cfg.batch) {
      const std::size_t hi = std::min(order.size(), at + cfg.batch);
      xs.clear();
      ys.clear();
      for (std::size_t i = at; i < hi; ++i) {
        xs.push_back(&train.x[order[i]]);
        ys.push_back(train.y[order[i]]);
      }
      grads.zero(m);
      const double loss = mlp_loss_grad(m, xs, ys, &grads);
      if (!std::isfinite(loss))
        throw NumericError("train_mlp: loss diverged at epoch " + std::to_string(epoch));
      sgd_momentum_step(m.w1, grads.w1, vel.w1, cfg.lr, cfg.momentum);
      sgd_momentum_step(m.b1, grads.b1, vel.b1, cfg.lr, cfg.momentum);
      sgd_momentum_step(m.w2, grads.w2, vel.w2, cfg.lr, cfg.momentum);
      sgd_momentum_step(m.b2, grads.b2, vel.b2, cfg.lr, cfg.momentum);
    }
  }
  return m;
}

}  // namespace dasml::ml
