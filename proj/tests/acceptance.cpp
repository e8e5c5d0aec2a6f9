// Acceptance suite: one check per release criterion, each printed as a
// PASS/FAIL line with its measured numbers. Exit code = number of failures.
//
// argv[1] (optional): path to the dasml CLI binary, used by the
// determinism check; when omitted that check calls the library directly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dasml/bench.hpp"
#include "dasml/classic.hpp"
#include "dasml/cnn.hpp"
#include "dasml/dsp.hpp"
#include "dasml/optim.hpp"
#include "dasml/pipeline.hpp"
#include "dasml/rng.hpp"
#include "dasml/synth.hpp"
#include "dasml/trace_io.hpp"
#include "dasml/tracker.hpp"
#include "dasml/traindata.hpp"
#include "dasml/windowing.hpp"
#include "oracles.hpp"

using namespace dasml;
namespace fs = std::filesystem;

namespace {

struct Harness {
  int failures = 0;
  std::vector<std::string> notes;

  void note(const std::string& s) { notes.push_back(s); }

  void criterion(int id, const std::string& name, double budget_s,
                 const std::function<bool(Harness&)>& body) {
    notes.clear();
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string error;
    try {
      ok = body(*this);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start).count();
    if (budget_s > 0.0 && elapsed > budget_s) {
      ok = false;
      notes.push_back("over budget: " + std::to_string(elapsed) + " s > " +
                      std::to_string(budget_s) + " s");
    }
    if (!error.empty()) notes.push_back("exception: " + error);
    std::printf("[%s] %2d. %-28s (%.1f s)\n", ok ? "PASS" : "FAIL", id, name.c_str(), elapsed);
    for (const std::string& n : notes) std::printf("        %s\n", n.c_str());
    if (!ok) ++failures;
    std::fflush(stdout);
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criteria

bool dsp_oracle(Harness& h) {
  std::mt19937_64 rng = substream(2024, 0xacc1, 0);
  double worst_mag = 0.0, worst_parseval = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 * (4 + rng() % 1022);  // even sizes in [8, 2048]
    io::Window w;
    w.samples.resize(n);
    for (double& v : w.samples) v = uniform(rng, -2.0, 2.0);
    const auto ours = dsp::fft_mag(w);
    const auto ref = oracle::dft_mag(w.samples);
    worst_mag = std::max(worst_mag, oracle::rel_linf(ours, ref));
    const double lhs = oracle::signal_energy(w.samples);
    const double rhs = oracle::spectrum_energy(ours, n);
    worst_parseval = std::max(worst_parseval, std::abs(lhs - rhs) / lhs);
  }
  h.note("max DFT-oracle rel err " + fmt(worst_mag) + " (< 1e-9)");
  h.note("max Parseval rel err " + fmt(worst_parseval) + " (< 1e-9)");
  return worst_mag < 1e-9 && worst_parseval < 1e-9;
}

bool gradient_suite(Harness& h) {
  double worst = 0.0;
  const double step = 1e-5;
  for (int seed = 0; seed < 20; ++seed) {
    cnn::CnnModel m = cnn::init_cnn(1000 + seed, 8, 8, 2, 5);
    std::mt19937_64 rng = substream(77, 0xacc2, seed);
    std::vector<cnn::Tensor> store;
    std::vector<int> ys;
    for (int i = 0; i < 4; ++i) {
      cnn::Tensor t{1, 8, 8};
      for (double& v : t.v) v = uniform(rng, -1.0, 1.0);
      store.push_back(std::move(t));
      ys.push_back(i % 2);
    }
    std::vector<const cnn::Tensor*> xs;
    for (const auto& t : store) xs.push_back(&t);

    cnn::CnnGrads g;
    g.zero(m);
    cnn::cnn_loss_grad(m, xs, ys, &g);
    const auto probe = [&](std::vector<double>& param, const std::vector<double>& grad) {
      for (std::size_t i = 0; i < param.size(); ++i) {
        const double keep = param[i];
        param[i] = keep + step;
        const double up = cnn::cnn_loss_grad(m, xs, ys, nullptr);
        param[i] = keep - step;
        const double dn = cnn::cnn_loss_grad(m, xs, ys, nullptr);
        param[i] = keep;
        const double numeric = (up - dn) / (2.0 * step);
        const double den = std::max({std::abs(numeric), std::abs(grad[i]), 1e-4});
        worst = std::max(worst, std::abs(numeric - grad[i]) / den);
      }
    };
    // conv filters + biases, dense weights + biases: every layer's
    // parameters sit in the chain conv -> relu -> pool -> dense -> softmax+CE
    probe(m.conv.w.v, g.conv_w.v);
    probe(m.conv.b, g.conv_b);
    probe(m.dense_w, g.dense_w);
    probe(m.dense_b, g.dense_b);

    // softmax + cross-entropy combined gradient at the logits is (p - t)
    std::vector<double> logits{uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)};
    const auto p = cnn::softmax_forward(logits);
    for (int cls = 0; cls < 2; ++cls) {
      for (int k = 0; k < 2; ++k) {
        const auto loss_at = [&](double z) {
          std::vector<double> l = logits;
          l[static_cast<std::size_t>(k)] = z;
          const auto pp = cnn::softmax_forward(l);
          return -std::log(std::max(pp[static_cast<std::size_t>(cls)], 1e-15));
        };
        const double numeric = oracle::central_diff(loss_at, logits[k], step);
        const double analytic = p[k] - (k == cls ? 1.0 : 0.0);
        const double den = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
        worst = std::max(worst, std::abs(numeric - analytic) / den);
      }
    }
  }
  h.note("max gradient rel err " + fmt(worst) + " (< 1e-4, h = 1e-5, 20 seeds)");
  return worst < 1e-4;
}

bool optimizer_fidelity(Harness& h) {
  std::vector<double> theta{0.0}, grad{1.0}, vel{0.0};
  sgd_momentum_step(theta, grad, vel, 0.001, 0.9);
  const double after_one = theta[0];
  sgd_momentum_step(theta, grad, vel, 0.001, 0.9);
  const double after_two = theta[0];
  h.note("theta after steps: " + fmt(after_one) + ", " + fmt(after_two) +
         " (expect -0.001, -0.0029)");
  return after_one == -0.001 && std::abs(after_two - (-0.0029)) < 1e-18;
}

struct TrainedModels {
  ml::ClassicModel svm, tree, pruned, mlp;
  cnn::CnnModel image = cnn::init_cnn(0);
  bool classic_ready = false;
  bool image_ready = false;
};

TrainedModels g_models;

bool classic_suite(Harness& h) {
  const ml::Dataset raw = run::synth_feature_dataset(2000, 5500, 8802);
  const ml::Split split = ml::split_dataset(raw, 0.7, 0.15, 17);
  const ml::Standardizer std_ = ml::standardize_fit(split.train);
  const ml::Dataset z = std_.apply(split.train);

  g_models.svm = {ml::ModelKind::Svm, std_, ml::train_svm(z)};
  const ml::TreeModel base = ml::train_tree(z, 5);
  g_models.tree = {ml::ModelKind::Tree, std_, base};
  g_models.pruned = {ml::ModelKind::PrunedTree, std_,
                     ml::prune_tree(base, std_.apply(split.holdout))};
  ml::MlpConfig mc;
  mc.epochs = 80;
  mc.lr = 1e-4;
  mc.seed = 3;
  g_models.mlp = {ml::ModelKind::Mlp, std_, ml::train_mlp(z, mc)};
  g_models.classic_ready = true;

  bool ok = true;
  const auto check = [&](const char* name, const ml::ClassicModel& m) {
    const double acc = ml::evaluate(m, split.test).accuracy;
    h.note(std::string(name) + " held-out accuracy " + fmt(acc) + " (>= 0.95)");
    ok = ok && acc >= 0.95;
  };
  check("svm", g_models.svm);
  check("tree", g_models.tree);
  check("pruned tree", g_models.pruned);
  check("mlp", g_models.mlp);
  return ok;
}

bool cnn_training(Harness& h) {
  const auto patches = run::synth_patch_dataset(200, 9903);
  cnn::TrainConfig cfg;  // the published hyperparameters: 50 epochs,
  cfg.seed = 5;          // batch 128, lr 0.001, momentum 0.9
  cnn::CnnModel model = cnn::init_cnn(cfg.seed);
  const cnn::TrainLog log = cnn::train_cnn(model, patches, cfg);
  const double acc = log.epoch_accuracy.back();
  h.note("400-patch training accuracy " + fmt(acc) + " after " +
         std::to_string(log.epochs_run) + " epochs (>= 0.98 within 50)");
  g_models.image = model;
  g_models.image_ready = true;

  const auto toy = run::synth_patch_dataset(8, 12);
  cnn::TrainConfig toy_cfg;
  toy_cfg.seed = 7;
  cnn::CnnModel toy_model = cnn::init_cnn(toy_cfg.seed);
  const cnn::TrainLog toy_log = cnn::train_cnn(toy_model, toy, toy_cfg);
  const double toy_acc = toy_log.epoch_accuracy.back();
  h.note("16-patch memorization accuracy " + fmt(toy_acc) + " after " +
         std::to_string(toy_log.epochs_run) + " epochs (== 1.0)");
  return acc >= 0.98 && log.epochs_run <= 50 && toy_acc == 1.0;
}

bool tracker_far(Harness& h) {
  bool ok = true;
  int idx = 0;
  for (double p : {0.01, 0.05}) {
    for (std::size_t k : {std::size_t{3}, std::size_t{5}}) {
      const double est = track::far_estimate(p, k, 100, 1e5);
      const std::size_t mc = track::far_monte_carlo(p, k, 100, 100000, 20.0, 31 + idx);
      ++idx;
      bool pass;
      std::string gate;
      if (est >= 5.0) {
        pass = mc >= est / 2.0 && mc <= est * 2.0;
        gate = "x2 gate";
      } else {
        // expectation too small to demand a nonzero count; allow a
        // Poisson-style upper bound instead
        const double bound = est + 3.0 * std::sqrt(est) + 2.0;
        pass = static_cast<double>(mc) <= bound;
        gate = "poisson bound " + fmt(bound);
      }
      h.note("p=" + fmt(p) + " K=" + std::to_string(k) + ": estimate " + fmt(est) +
             ", monte-carlo " + std::to_string(mc) + " (" + gate + ")");
      ok = ok && pass;
    }
  }
  return ok;
}

bool end_to_end_delay(Harness& h) {
  if (!g_models.classic_ready || !g_models.image_ready) {
    h.note("models unavailable (earlier criterion failed)");
    return false;
  }
  synth::SceneConfig c;
  c.sensor_count = 64;
  c.sample_rate_hz = 2000;
  c.duration_s = 135.0;
  c.noise_std = 0.1;
  c.seed = 606;
  const double onset = 20.0;
  c.sources.push_back({SourceKind::Excavator, 32 * 4.0, onset, 130.0, 4.0});
  const RawTrace trace = synth::synth_scene(c);
  const synth::LabelMask labels = synth::label_grid(c);

  run::ClassicParams cp;  // K = 90
  const run::PipelineResult rc = run::run_classic(trace, g_models.svm, cp);
  const auto dc = run::detection_delay(rc.events, labels, 4.0, 5.0);
  bool ok = dc.size() == 1 && dc[0].detected;
  if (ok) {
    h.note("classic delay " + fmt(dc[0].delay_s) + " s (90 +- 1), position error " +
           fmt(dc[0].position_error_m) + " m (<= 5)");
    ok = std::abs(dc[0].delay_s - 90.0) <= 1.0 && dc[0].position_error_m <= 5.0;
  } else {
    h.note("classic pipeline missed the event");
  }

  run::ImageParams ip;  // K = 1, one patch covers 15 s
  const run::PipelineResult ri = run::run_image(trace, g_models.image, ip);
  const auto di = run::detection_delay(ri.events, labels, 4.0, 5.0);
  bool ok_image = di.size() == 1 && di[0].detected;
  if (ok_image) {
    h.note("image delay " + fmt(di[0].delay_s) + " s (<= 15 + 7.5 hop + 1), position error " +
           fmt(di[0].position_error_m) + " m (<= 5)");
    ok_image = di[0].delay_s <= 15.0 + 7.5 + 1.0 && di[0].position_error_m <= 5.0;
  } else {
    h.note("image pipeline missed the event");
  }
  return ok && ok_image;
}

fs::path g_workdir;
std::string g_cli;

bool run_bench_cli(const std::string& report, const std::string& events, std::uint64_t seed,
                   Harness& h) {
  const std::string cmd = g_cli + " bench --config " + (g_workdir / "bench.json").string() +
                          " --classic-model " + (g_workdir / "svm.json").string() +
                          " --cnn-model " + (g_workdir / "model.cnn1").string() + " --out " +
                          report + " --events-out " + events + " --seed " +
                          std::to_string(seed) + " > " + (g_workdir / "bench.log").string() +
                          " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc != 0) h.note("bench CLI exited with " + std::to_string(rc));
  return rc == 0;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool g_bench_ran = false;
std::string g_report_a, g_events_a, g_events_b;

bool prepare_bench_runs(Harness& h) {
  if (!g_models.classic_ready || !g_models.image_ready) {
    h.note("models unavailable (earlier criterion failed)");
    return false;
  }
  ml::save_model(g_models.svm, (g_workdir / "svm.json").string());
  cnn::save_checkpoint_file(g_models.image, (g_workdir / "model.cnn1").string());
  // default suite, trimmed noise block to keep two full runs affordable
  run::BenchConfig cfg;
  cfg.noise_scenes = 2;
  std::ofstream(g_workdir / "bench.json") << run::bench_config_to_json(cfg) << '\n';

  const std::string ra = (g_workdir / "report_a.json").string();
  const std::string rb = (g_workdir / "report_b.json").string();
  g_events_a = (g_workdir / "events_a.jsonl").string();
  g_events_b = (g_workdir / "events_b.jsonl").string();
  if (!g_cli.empty()) {
    if (!run_bench_cli(ra, g_events_a, 1234, h)) return false;
    if (!run_bench_cli(rb, g_events_b, 1234, h)) return false;
    g_report_a = slurp(ra);
  } else {
    // no CLI path given: drive the same suite through the library
    cfg.seed = 1234;
    const ml::ClassicModel classic = ml::load_model((g_workdir / "svm.json").string());
    const cnn::CnnModel image = cnn::load_checkpoint_file((g_workdir / "model.cnn1").string());
    const run::BenchResult a = run::benchmark(cfg, classic, image);
    const run::BenchResult b = run::benchmark(cfg, classic, image);
    run::write_tagged_events(a.events, g_events_a);
    run::write_tagged_events(b.events, g_events_b);
    g_report_a = run::report_to_json(a.report, cfg);
  }
  g_bench_ran = true;
  return true;
}

bool relative_ordering(Harness& h) {
  if (!g_bench_ran && !prepare_bench_runs(h)) return false;
  std::string why;
  if (!run::validate_report_json(g_report_a, &why)) {
    h.note("report schema: " + why);
    return false;
  }
  const auto j = nlohmann::json::parse(g_report_a);
  const double classic = j["pipelines"]["classic"]["exec_time_per_60s_measured_s"].get<double>();
  const double image = j["pipelines"]["image"]["exec_time_per_60s_measured_s"].get<double>();
  h.note("exec time per 60 s of data: classic " + fmt(classic) + " s, image " + fmt(image) +
         " s (image < classic)");
  const double d_classic = j["pipelines"]["classic"]["delay_mean_s"].get<double>();
  const double d_image = j["pipelines"]["image"]["delay_mean_s"].get<double>();
  h.note("mean delay: classic " + fmt(d_classic) + " s, image " + fmt(d_image) + " s");
  return image < classic && image > 0.0;
}

bool format_roundtrips(Harness& h) {
  std::mt19937_64 rng = substream(4096, 0xacc9, 0);
  for (int rep = 0; rep < 100; ++rep) {
    RawTrace t;
    t.sensor_count = 1 + rng() % 6;
    t.sample_rate_hz = 100 + rng() % 4000;
    const std::size_t rows = 1 + rng() % 300;
    t.samples.resize(rows * t.sensor_count);
    for (double& v : t.samples)
      v = static_cast<double>(static_cast<float>(uniform(rng, -100.0, 100.0)));
    std::stringstream buf;
    io::write_trace(t, buf);
    if (!(io::read_trace(buf) == t)) {
      h.note("DAS1 round trip mismatch at instance " + std::to_string(rep));
      return false;
    }
  }
  h.note("100 DAS1 round trips bit-exact");

  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t hw = 8 + 2 * (rng() % 5);
    cnn::CnnModel m = cnn::init_cnn(rng(), hw, hw + 2, 1 + rng() % 3, 5);
    for (double& v : m.vel_dense_w) v = uniform(rng, -1.0, 1.0);
    for (double& v : m.vel_conv_w) v = uniform(rng, -1.0, 1.0);
    std::stringstream buf;
    cnn::save_checkpoint(m, buf);
    const cnn::CnnModel back = cnn::load_checkpoint(buf);
    if (back.conv.w.v != m.conv.w.v || back.dense_w != m.dense_w ||
        back.vel_dense_w != m.vel_dense_w || back.vel_conv_w != m.vel_conv_w ||
        back.conv.b != m.conv.b || back.dense_b != m.dense_b ||
        back.vel_conv_b != m.vel_conv_b || back.vel_dense_b != m.vel_dense_b) {
      h.note("CNN1 round trip mismatch at instance " + std::to_string(rep));
      return false;
    }
  }
  h.note("100 CNN1 round trips bit-exact");
  return true;
}

bool determinism(Harness& h) {
  if (!g_bench_ran && !prepare_bench_runs(h)) return false;
  const std::string a = slurp(g_events_a);
  const std::string b = slurp(g_events_b);
  h.note("event logs: " + std::to_string(a.size()) + " bytes vs " + std::to_string(b.size()) +
         " bytes");
  if (a.empty()) {
    h.note("event log unexpectedly empty");
    return false;
  }
  return a == b;
}

}  // namespace

int main(int argc, char** argv) {
  g_cli = argc > 1 ? argv[1] : "";
  g_workdir = fs::current_path() / "acceptance_work";
  fs::remove_all(g_workdir);
  fs::create_directories(g_workdir);

  Harness h;
  h.criterion(1, "dsp-oracle-equivalence", 10.0, dsp_oracle);
  h.criterion(2, "gradient-suite", 60.0, gradient_suite);
  h.criterion(3, "optimizer-fidelity", 0.0, optimizer_fidelity);
  h.criterion(4, "classic-classifiers", 600.0, classic_suite);
  h.criterion(5, "cnn-training", 300.0, cnn_training);
  h.criterion(6, "tracker-far-oracle", 120.0, tracker_far);
  h.criterion(7, "end-to-end-delay", 0.0, end_to_end_delay);
  h.criterion(8, "relative-ordering", 0.0, relative_ordering);
  h.criterion(9, "format-roundtrips", 0.0, format_roundtrips);
  h.criterion(10, "bench-determinism", 0.0, determinism);

  std::printf("%d of 10 criteria failed\n", h.failures);
  return h.failures;
}
