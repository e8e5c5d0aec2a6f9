// scratch diagnostics, not part of the suite
#include <cmath>
#include <cstdio>

#include "dasml/classic.hpp"
#include "dasml/rng.hpp"
#include "dasml/traindata.hpp"
#include "dasml/windowing.hpp"

using namespace dasml;
using namespace dasml::run;

static void eval_kind(const ml::ClassicModel& m, SourceKind kind, std::uint64_t seed,
                      const char* name) {
  std::size_t as_exc = 0, total = 0;
  for (int rep = 0; rep < 12; ++rep) {
    synth::SceneConfig c;
    c.sensor_count = 6;
    c.sample_rate_hz = 2000;
    c.duration_s = 25.0;
    c.noise_std = 0.1;
    c.seed = splitmix64(seed + rep);
    c.label_threshold = 0.4;
    if (kind != SourceKind::None) {
      synth::SourceSpec src;
      src.kind = kind;
      src.position_m = 10.0;
      src.start_s = 1.0;
      src.end_s = 24.0;
      src.amplitude = 2.5;
      c.sources.push_back(src);
    }
    const RawTrace trace = synth::synth_scene(c);
    const synth::LabelMask mask = synth::label_grid(c);
    const io::WindowRange range = io::window_iter(trace, 1.0, 1.0);
    for (std::size_t t = 0; t < range.steps(); ++t) {
      for (std::uint32_t s = 0; s < c.sensor_count; ++s) {
        if (kind != SourceKind::None && mask.at(s, t) != kind) continue;
        const auto p = ml::predict(m, dsp::feature_fft100(range.window(t, s)));
        if (p.label == EventClass::Excavator) ++as_exc;
        ++total;
      }
    }
  }
  std::printf("%-10s -> excavator rate %.4f (%zu/%zu)\n", name,
              double(as_exc) / double(total), as_exc, total);
}

int main(int argc, char**) {
  const std::size_t n_exc = argc > 1 ? 2000 : 600;
  const std::size_t n_oth = argc > 1 ? 5500 : 1650;
  std::printf("dataset %zu/%zu\n", n_exc, n_oth);
  const ml::Dataset raw = synth_feature_dataset(n_exc, n_oth, 404);
  const auto split = ml::split_dataset(raw, 0.7, 0.15, 11);
  const ml::Standardizer std_ = ml::standardize_fit(split.train);
  const ml::Dataset z = std_.apply(split.train);

  ml::ClassicModel svm{ml::ModelKind::Svm, std_, ml::train_svm(z)};
  std::printf("svm  test acc=%.4f\n", ml::evaluate(svm, split.test).accuracy);

  for (std::size_t ml_ : {2, 5, 10, 20}) {
    const ml::TreeModel base = ml::train_tree(z, ml_);
    ml::ClassicModel t2{ml::ModelKind::Tree, std_, base};
    const ml::TreeModel pr = ml::prune_tree(base, std_.apply(split.holdout));
    ml::ClassicModel p2{ml::ModelKind::PrunedTree, std_, pr};
    std::printf("tree(min_leaf=%zu) test acc=%.4f  pruned acc=%.4f (nodes %zu -> %zu)\n", ml_,
                ml::evaluate(t2, split.test).accuracy, ml::evaluate(p2, split.test).accuracy,
                base.node_count(), pr.node_count());
  }
  ml::ClassicModel tree{ml::ModelKind::Tree, std_, ml::train_tree(z, 5)};
  {
    const auto em = ml::evaluate(tree, split.test);
    std::printf("tree confusion: t0->[%lld %lld] t1->[%lld %lld] recall0=%.4f recall1=%.4f\n",
                (long long)em.confusion[0][0], (long long)em.confusion[0][1],
                (long long)em.confusion[1][0], (long long)em.confusion[1][1], em.recall[0],
                em.recall[1]);
    // amplitude profile of missed excavator cells: max raw bin value
    std::size_t shown = 0;
    for (std::size_t i = 0; i < split.test.size() && shown < 12; ++i) {
      if (split.test.y[i] != 1) continue;
      const auto p = ml::predict(tree, split.test.x[i]);
      if (p.label == EventClass::Excavator) continue;
      double mx = 0, sum = 0;
      for (double v : split.test.x[i]) { mx = std::max(mx, v); sum += v; }
      std::printf("  missed exc: maxbin=%.3f sum=%.3f\n", mx, sum);
      ++shown;
    }
  }

  const auto& tm = std::get<ml::TreeModel>(tree.model);
  ml::ClassicModel pruned{ml::ModelKind::PrunedTree, std_,
                          ml::prune_tree(tm, std_.apply(split.holdout))};
  std::printf("pruned test acc=%.4f (nodes %zu -> %zu)\n",
              ml::evaluate(pruned, split.test).accuracy, tm.node_count(),
              std::get<ml::TreeModel>(pruned.model).node_count());

  ml::MlpConfig mc;
  mc.epochs = 80;
  mc.lr = 1e-4;
  ml::ClassicModel mlp{ml::ModelKind::Mlp, std_, ml::train_mlp(z, mc)};
  std::printf("mlp  test acc=%.4f\n", ml::evaluate(mlp, split.test).accuracy);

  eval_kind(svm, SourceKind::Walking, 1000, "walking");
  eval_kind(svm, SourceKind::Highway, 2000, "highway");
  eval_kind(svm, SourceKind::None, 3000, "silence");
  eval_kind(svm, SourceKind::Excavator, 4000, "excavator");
  return 0;
}
