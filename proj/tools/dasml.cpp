// Command-line front end: scene synthesis, feature extraction, training,
// detection, and the side-by-side pipeline benchmark. See README for the
// full workflow.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "dasml/bench.hpp"
#include "dasml/classic.hpp"
#include "dasml/cnn.hpp"
#include "dasml/dataset.hpp"
#include "dasml/pipeline.hpp"
#include "dasml/synth.hpp"
#include "dasml/trace_io.hpp"
#include "dasml/tracker.hpp"
#include "dasml/traindata.hpp"
#include "dasml/types.hpp"
#include "dasml/windowing.hpp"

namespace {

using namespace dasml;
namespace fs = std::filesystem;

struct CliOptions {
  // synth
  std::string scene_config;
  std::string out;
  std::string labels;
  bool seed_set = false;
  std::uint64_t seed = 0;

  // features
  std::string trace_path;

  // train-classic
  std::string dataset_in;
  std::string model_sel = "all";
  std::size_t synth_excavator = 0;
  std::size_t synth_other = 0;
  std::size_t min_leaf = 5;
  double svm_c = 1.0;
  std::size_t mlp_epochs = 80;
  double mlp_lr = 1e-4;

  // train-cnn
  std::size_t synth_per_class = 0;
  std::size_t cnn_epochs = 50;
  std::size_t cnn_batch = 128;
  double cnn_lr = 0.001;
  double cnn_momentum = 0.9;

  // detect / bench
  std::string pipeline = "both";
  std::string classic_model_path;
  std::string cnn_model_path;
  std::string events_out;
  unsigned threads = 1;
  double spacing = 4.0;
  double lowpass_alpha = 0.2;
  std::size_t k_classic = 90;
  std::size_t k_image = 1;
  double radius = 5.0;
  double min_prob = 0.5;
  std::string bench_config;
};

int cmd_synth(const CliOptions& o) {
  synth::SceneConfig cfg = synth::load_scene(o.scene_config);
  if (o.seed_set) cfg.seed = o.seed;
  const RawTrace trace = synth::synth_scene(cfg);
  const synth::LabelMask mask = synth::label_grid(cfg);
  const std::size_t bytes = io::write_trace_file(trace, o.out);
  const std::string labels_path = o.labels.empty() ? o.out + ".labels.jsonl" : o.labels;
  io::write_labels_file(mask, labels_path);
  std::size_t labeled = 0;
  for (SourceKind k : mask.label)
    if (k != SourceKind::None) ++labeled;
  std::printf("wrote %s (%zu bytes, %u sensors, %.1f s) and %s (%zu labeled cells)\n",
              o.out.c_str(), bytes, trace.sensor_count, trace.duration_s(), labels_path.c_str(),
              labeled);
  return 0;
}

int cmd_features(const CliOptions& o) {
  const RawTrace trace = io::read_trace_file(o.trace_path);
  synth::LabelMask mask;
  const std::uint32_t seconds = static_cast<std::uint32_t>(trace.duration_s());
  if (!o.labels.empty()) {
    mask = io::read_labels_file(o.labels, trace.sensor_count, seconds);
  } else {
    mask.sensor_count = trace.sensor_count;
    mask.seconds = seconds;
    mask.label.assign(static_cast<std::size_t>(trace.sensor_count) * seconds, SourceKind::None);
    mask.source.assign(mask.label.size(), -1);
  }
  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open output: " + o.out);
  const io::WindowRange range = io::window_iter(trace, 1.0, 1.0);
  std::size_t rows = 0;
  for (std::size_t t = 0; t < range.steps(); ++t) {
    for (std::uint32_t s = 0; s < trace.sensor_count; ++s) {
      const dsp::FeatureVector fv = dsp::feature_fft100(range.window(t, s));
      const std::uint32_t tt = static_cast<std::uint32_t>(t);
      ml::write_feature_row(out, fv, mask.at(s, tt), mask.source_at(s, tt));
      ++rows;
    }
  }
  std::printf("wrote %zu feature rows to %s\n", rows, o.out.c_str());
  return 0;
}

void report_metrics(const char* name, const ml::EvalMetrics& m) {
  std::printf("%-12s accuracy %.4f  recall other %.4f  recall excavator %.4f\n", name, m.accuracy,
              m.recall[0], m.recall[1]);
}

int cmd_train_classic(const CliOptions& o) {
  ml::Dataset raw;
  if (o.synth_excavator > 0) {
    raw = run::synth_feature_dataset(o.synth_excavator, o.synth_other, o.seed);
  } else if (!o.dataset_in.empty()) {
    raw = ml::read_feature_file(o.dataset_in);
  } else {
    throw DataError("train-classic: provide --in or --synthetic");
  }
  raw.validate_for_training();

  const ml::Split split = ml::split_dataset(raw, 0.7, 0.15, o.seed);
  const ml::Standardizer std_ = ml::standardize_fit(split.train);
  const ml::Dataset z = std_.apply(split.train);
  fs::create_directories(o.out);

  const bool all = o.model_sel == "all";
  if (all || o.model_sel == "svm") {
    ml::SvmConfig cfg;
    cfg.c = o.svm_c;
    ml::ClassicModel m{ml::ModelKind::Svm, std_, ml::train_svm(z, cfg)};
    ml::save_model(m, (fs::path(o.out) / "svm.json").string());
    report_metrics("svm", ml::evaluate(m, split.test));
  }
  ml::TreeModel base;
  if (all || o.model_sel == "tree" || o.model_sel == "pruned-tree")
    base = ml::train_tree(z, o.min_leaf);
  if (all || o.model_sel == "tree") {
    ml::ClassicModel m{ml::ModelKind::Tree, std_, base};
    ml::save_model(m, (fs::path(o.out) / "tree.json").string());
    report_metrics("tree", ml::evaluate(m, split.test));
  }
  if (all || o.model_sel == "pruned-tree") {
    ml::ClassicModel m{ml::ModelKind::PrunedTree, std_,
                       ml::prune_tree(base, std_.apply(split.holdout))};
    ml::save_model(m, (fs::path(o.out) / "pruned_tree.json").string());
    report_metrics("pruned-tree", ml::evaluate(m, split.test));
  }
  if (all || o.model_sel == "mlp") {
    ml::MlpConfig cfg;
    cfg.epochs = o.mlp_epochs;
    cfg.lr = o.mlp_lr;
    cfg.seed = o.seed;
    ml::ClassicModel m{ml::ModelKind::Mlp, std_, ml::train_mlp(z, cfg)};
    ml::save_model(m, (fs::path(o.out) / "mlp.json").string());
    report_metrics("mlp", ml::evaluate(m, split.test));
  }
  std::printf("models written to %s\n", o.out.c_str());
  return 0;
}

int cmd_train_cnn(const CliOptions& o) {
  std::vector<dsp::WaterfallPatch> patches;
  if (o.synth_per_class > 0) {
    patches = run::synth_patch_dataset(o.synth_per_class, o.seed);
  } else if (!o.trace_path.empty()) {
    if (o.labels.empty()) throw DataError("train-cnn: --trace requires --labels");
    const RawTrace trace = io::read_trace_file(o.trace_path);
    const synth::LabelMask mask = io::read_labels_file(
        o.labels, trace.sensor_count, static_cast<std::uint32_t>(trace.duration_s()));
    patches = dsp::build_patches(trace, &mask, o.lowpass_alpha);
  } else {
    throw DataError("train-cnn: provide --trace/--labels or --synthetic");
  }

  cnn::TrainConfig cfg;
  cfg.max_epochs = o.cnn_epochs;
  cfg.batch = o.cnn_batch;
  cfg.lr = o.cnn_lr;
  cfg.momentum = o.cnn_momentum;
  cfg.seed = o.seed;
  cnn::CnnModel model = cnn::init_cnn(cfg.seed);
  const cnn::TrainLog log = cnn::train_cnn(model, patches, cfg);
  cnn::save_checkpoint_file(model, o.out);
  std::printf("trained on %zu patches for %zu epochs, final loss %.4f, accuracy %.4f -> %s\n",
              patches.size(), log.epochs_run, log.epoch_loss.back(), log.epoch_accuracy.back(),
              o.out.c_str());
  return 0;
}

int cmd_detect(const CliOptions& o) {
  const RawTrace trace = io::read_trace_file(o.trace_path);
  std::vector<track::EventRecord> events;
  const bool want_classic = o.pipeline == "classic" || o.pipeline == "both";
  const bool want_image = o.pipeline == "image" || o.pipeline == "both";

  if (want_classic) {
    if (o.classic_model_path.empty()) throw DataError("detect: --classic-model required");
    const ml::ClassicModel model = ml::load_model(o.classic_model_path);
    run::ClassicParams params;
    params.sensor_spacing_m = o.spacing;
    params.policy.k_confirm = o.k_classic;
    params.policy.radius_m = o.radius;
    params.policy.min_probability = o.min_prob;
    params.threads = o.threads;
    const run::PipelineResult r = run::run_classic(trace, model, params);
    events.insert(events.end(), r.events.begin(), r.events.end());
    std::printf("classic: %zu events, %.2f s wall, %.0f samples/s\n", r.events.size(),
                r.stats.wall_s, r.stats.throughput_sps);
  }
  if (want_image) {
    if (o.cnn_model_path.empty()) throw DataError("detect: --cnn-model required");
    const cnn::CnnModel model = cnn::load_checkpoint_file(o.cnn_model_path);
    run::ImageParams params;
    params.sensor_spacing_m = o.spacing;
    params.lowpass_alpha = o.lowpass_alpha;
    params.policy.k_confirm = o.k_image;
    params.policy.radius_m = o.radius;
    params.policy.min_probability = o.min_prob;
    params.threads = o.threads;
    const run::PipelineResult r = run::run_image(trace, model, params);
    events.insert(events.end(), r.events.begin(), r.events.end());
    std::printf("image:   %zu events, %.2f s wall, %.0f samples/s\n", r.events.size(),
                r.stats.wall_s, r.stats.throughput_sps);
  }

  std::sort(events.begin(), events.end(),
            [](const track::EventRecord& a, const track::EventRecord& b) {
              if (a.t_confirmed != b.t_confirmed) return a.t_confirmed < b.t_confirmed;
              return a.position_m < b.position_m;
            });
  track::write_events_file(events, o.out);
  std::printf("wrote %zu events to %s\n", events.size(), o.out.c_str());
  return 0;
}

int cmd_bench(const CliOptions& o) {
  run::BenchConfig cfg =
      o.bench_config.empty() ? run::BenchConfig{} : run::load_bench_config(o.bench_config);
  if (o.seed_set) cfg.seed = o.seed;
  if (o.threads > 1) cfg.threads = o.threads;
  if (o.classic_model_path.empty() || o.cnn_model_path.empty())
    throw DataError("bench: --classic-model and --cnn-model required");
  const ml::ClassicModel classic = ml::load_model(o.classic_model_path);
  const cnn::CnnModel image = cnn::load_checkpoint_file(o.cnn_model_path);

  const run::BenchResult result = run::benchmark(cfg, classic, image);

  const std::string doc = run::report_to_json(result.report, cfg);
  std::string why;
  if (!run::validate_report_json(doc, &why))
    throw NumericError("bench: report failed schema validation: " + why);
  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open output: " + o.out);
  out << doc << '\n';

  const std::string events_path = o.events_out.empty() ? o.out + ".events.jsonl" : o.events_out;
  run::write_tagged_events(result.events, events_path);

  std::fputs(run::report_to_table(result.report).c_str(), stdout);
  std::printf("report: %s\nevents: %s\n", o.out.c_str(), events_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DAS excavation-event detection toolkit"};
  app.require_subcommand(1);
  CliOptions o;

  CLI::App* synth = app.add_subcommand("synth", "scene config JSON -> DAS1 trace + label sidecar");
  synth->add_option("--config", o.scene_config, "scene config JSON")->required();
  synth->add_option("--out", o.out, "output DAS1 path")->required();
  synth->add_option("--labels", o.labels, "label sidecar path (default <out>.labels.jsonl)");
  synth->add_option("--seed", o.seed, "override the scene seed")->each([&](const std::string&) {
    o.seed_set = true;
  });

  CLI::App* features = app.add_subcommand("features", "DAS1 trace -> labeled FFT-feature rows");
  features->add_option("--trace", o.trace_path, "input DAS1 trace")->required();
  features->add_option("--labels", o.labels, "label sidecar JSONL");
  features->add_option("--out", o.out, "output dataset JSONL")->required();

  CLI::App* tc = app.add_subcommand("train-classic", "feature dataset -> classic model JSONs");
  tc->add_option("--in", o.dataset_in, "feature dataset JSONL");
  tc->add_option("--synthetic", o.synth_excavator,
                 "generate a synthetic dataset with this many excavator rows");
  tc->add_option("--synthetic-other", o.synth_other, "other rows for --synthetic (default 11/4 x)");
  tc->add_option("--model", o.model_sel, "all|svm|tree|pruned-tree|mlp")
      ->check(CLI::IsMember({"all", "svm", "tree", "pruned-tree", "mlp"}));
  tc->add_option("--out", o.out, "output directory")->required();
  tc->add_option("--seed", o.seed, "train/split seed");
  tc->add_option("--min-leaf", o.min_leaf, "tree minimum leaf size");
  tc->add_option("--svm-c", o.svm_c, "SVM soft-margin C");
  tc->add_option("--mlp-epochs", o.mlp_epochs, "MLP training epochs");
  tc->add_option("--mlp-lr", o.mlp_lr, "MLP learning rate");

  CLI::App* tn = app.add_subcommand("train-cnn", "waterfall patches -> CNN1 checkpoint");
  tn->add_option("--trace", o.trace_path, "labeled DAS1 trace to cut patches from");
  tn->add_option("--labels", o.labels, "label sidecar for --trace");
  tn->add_option("--synthetic", o.synth_per_class,
                 "generate a synthetic patch set with this many patches per class");
  tn->add_option("--out", o.out, "output checkpoint path")->required();
  tn->add_option("--epochs", o.cnn_epochs, "max training epochs");
  tn->add_option("--batch", o.cnn_batch, "batch size");
  tn->add_option("--lr", o.cnn_lr, "learning rate");
  tn->add_option("--momentum", o.cnn_momentum, "momentum constant");
  tn->add_option("--seed", o.seed, "training seed");
  tn->add_option("--lowpass-alpha", o.lowpass_alpha, "RMS smoothing factor");

  CLI::App* detect = app.add_subcommand("detect", "DAS1 trace + models -> JSONL event log");
  detect->add_option("--trace", o.trace_path, "input DAS1 trace")->required();
  detect->add_option("--pipeline", o.pipeline, "classic|image|both")
      ->check(CLI::IsMember({"classic", "image", "both"}));
  detect->add_option("--classic-model", o.classic_model_path, "classic model JSON");
  detect->add_option("--cnn-model", o.cnn_model_path, "CNN1 checkpoint");
  detect->add_option("--out", o.out, "output events JSONL")->required();
  detect->add_option("--threads", o.threads, "worker threads");
  detect->add_option("--spacing", o.spacing, "sensor spacing in meters");
  detect->add_option("--k-classic", o.k_classic, "confirmation seconds, classic");
  detect->add_option("--k-image", o.k_image, "confirmation hits, image");
  detect->add_option("--radius", o.radius, "association radius in meters");
  detect->add_option("--min-prob", o.min_prob, "per-detection probability gate");
  detect->add_option("--lowpass-alpha", o.lowpass_alpha, "RMS smoothing factor");

  CLI::App* bench = app.add_subcommand("bench", "scene suite -> report JSON + text table");
  bench->add_option("--config", o.bench_config, "suite config JSON (defaults when omitted)");
  bench->add_option("--classic-model", o.classic_model_path, "classic model JSON")->required();
  bench->add_option("--cnn-model", o.cnn_model_path, "CNN1 checkpoint")->required();
  bench->add_option("--out", o.out, "output report JSON")->required();
  bench->add_option("--events-out", o.events_out, "event log path (default <out>.events.jsonl)");
  bench->add_option("--seed", o.seed, "override the suite seed")->each([&](const std::string&) {
    o.seed_set = true;
  });
  bench->add_option("--threads", o.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (features->parsed()) return cmd_features(o);
    if (tc->parsed()) {
      if (o.synth_excavator > 0 && o.synth_other == 0)
        o.synth_other = o.synth_excavator * 11 / 4;  // the 40k/110k field ratio
      return cmd_train_classic(o);
    }
    if (tn->parsed()) return cmd_train_cnn(o);
    if (detect->parsed()) return cmd_detect(o);
    if (bench->parsed()) return cmd_bench(o);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
