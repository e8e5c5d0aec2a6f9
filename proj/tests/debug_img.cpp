// scratch diagnostics, not part of the suite
#include <cstdio>

#include "dasml/cnn.hpp"
#include "dasml/rng.hpp"
#include "dasml/pipeline.hpp"
#include "dasml/traindata.hpp"

using namespace dasml;
using namespace dasml::run;

int main() {
  synth::SceneConfig c;
  c.sensor_count = 48;
  c.sample_rate_hz = 2000;
  c.duration_s = 120.0;
  c.noise_std = 0.1;
  c.attenuation_alpha = 0.15;
  c.seed = splitmix64(7 + 0x1000 + 0);
  c.sources.push_back({SourceKind::Excavator, 96.0, 10.0, 118.0, 4.0});
  const RawTrace trace = synth::synth_scene(c);
  const auto patches = dsp::build_patches(trace, nullptr, 0.2);
  std::printf("patches: %zu\n", patches.size());

  for (std::size_t per_class : {40, 64, 100}) {
    for (std::uint64_t seed : {7ULL, 5ULL}) {
      const auto train = synth_patch_dataset(per_class, 505);
      cnn::TrainConfig cfg;
      cfg.seed = seed;
      cfg.max_epochs = 50;
      cnn::CnnModel m = cnn::init_cnn(cfg.seed);
      const auto log = cnn::train_cnn(m, train, cfg);
      int hits = 0;
      double maxp = 0.0;
      for (const auto& p : patches) {
        const auto pr = cnn::predict_image(m, p);
        // count only patches whose rows cover the source sensor 24
        if (p.origin_sensor <= 20 && p.origin_sensor + 32 > 28) {
          maxp = std::max(maxp, pr.probability);
          if (pr.probability >= 0.5) ++hits;
        }
      }
      std::printf("per_class=%zu seed=%llu: train acc %.3f epochs %zu; covering-patch hits %d, max p %.3f\n",
                  per_class, (unsigned long long)seed, log.epoch_accuracy.back(), log.epochs_run,
                  hits, maxp);
    }
  }
  return 0;
}
