// daec — command-line front end for the echo-cancellation pipeline.
//
// Subcommands cover the full workflow: synthesize training scenes (datagen),
// inspect delay alignment (align), run the linear canceller (linaec), train
// the neural models (train), process recordings (enhance), and score
// pipelines against scene sets (eval). Every artifact-producing command
// writes a provenance sidecar carrying the tool version, the configuration
// hash, and the seed, so results can be traced back to their exact settings.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 file or artifact
// error, 4 numerical breakdown (training divergence included), 1 unexpected.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "daec/checkpoint.hpp"
#include "daec/delay_align.hpp"
#include "daec/error.hpp"
#include "daec/evaluate.hpp"
#include "daec/linaec.hpp"
#include "daec/pipeline_config.hpp"
#include "daec/rng.hpp"
#include "daec/scene_gen.hpp"
#include "daec/spectral.hpp"
#include "daec/trainer.hpp"
#include "daec/two_stage.hpp"
#include "daec/version.hpp"
#include "daec/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace daec {
namespace {

struct GlobalOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

PipelineConfig load_config(const GlobalOpts& g) {
  PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = PipelineConfig::from_file(g.config_path);
  for (const std::string& s : g.sets) cfg.apply(s);
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

json provenance_json(const PipelineConfig& cfg, const std::string& subcommand) {
  json j;
  j["tool"] = "daec";
  j["version"] = kVersion;
  j["subcommand"] = subcommand;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

// Single-file artifacts get "<file>.provenance.json"; directories get
// "<dir>/provenance.json".
void write_provenance(const std::string& artifact, const PipelineConfig& cfg,
                      const std::string& subcommand) {
  const fs::path p = fs::is_directory(artifact)
                         ? fs::path(artifact) / "provenance.json"
                         : fs::path(artifact + ".provenance.json");
  write_text_file(p, provenance_json(cfg, subcommand).dump(2) + "\n");
}

std::vector<double> load_wav_checked(const std::string& path, int expect_rate) {
  WavData w = read_wav(path);
  if (w.sample_rate_hz != expect_rate)
    throw ConfigError(path + " is " + std::to_string(w.sample_rate_hz) +
                      " Hz; the configured sample rate is " +
                      std::to_string(expect_rate) + " Hz");
  if (w.samples.empty()) throw ConfigError(path + " holds no samples");
  return std::move(w.samples);
}

// Mic and far-end reference may differ by a few frames of capture skew;
// process the common prefix.
void equalize(std::vector<double>& a, std::vector<double>& b) {
  const size_t n = std::min(a.size(), b.size());
  a.resize(n);
  b.resize(n);
}

std::vector<double> pad_to(std::vector<double> x, size_t n) {
  if (x.size() < n) x.resize(n, 0.0);
  if (x.size() > n) x.resize(n);
  return x;
}

std::vector<std::string> list_scene_dirs(const std::string& root) {
  if (!fs::is_directory(root)) throw IoError("not a scene directory: " + root);
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() &&
        entry.path().filename().string().rfind("scene-", 0) == 0)
      dirs.push_back(entry.path().string());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError("no scene-* directories under " + root);
  return dirs;
}

WindowConfig window_for_bins(int n_bins, int rate) {
  WindowConfig wc;
  wc.sample_rate_hz = rate;
  wc.window_len_samples = 2 * (n_bins - 1);
  wc.hop_samples = n_bins - 1;
  wc.window_kind = WindowKind::kSqrtHann;
  return wc;
}

// ---- datagen ----

int cmd_datagen(const GlobalOpts& g, const std::string& out, int n_scenes) {
  const PipelineConfig cfg = load_config(g);
  require(n_scenes > 0, "--n must be positive");
  fs::create_directories(out);

  std::printf("synthesizing source corpus (%d speech / %d noise / %d music clips)\n",
              cfg.corpus.n_speech, cfg.corpus.n_noise, cfg.corpus.n_music);
  const Corpus corpus = make_synthetic_corpus(cfg.corpus, derive_seed(cfg.seed, 0xC0));

  json manifest;
  manifest["n_scenes"] = n_scenes;
  manifest["sample_rate_hz"] = cfg.scene.sample_rate_hz;
  std::map<std::string, int> counts;
  json scene_list = json::array();
  for (int i = 0; i < n_scenes; ++i) {
    const std::uint64_t scene_seed = derive_seed(cfg.seed, 0x5C, static_cast<std::uint64_t>(i));
    SceneBundle scene = generate_scene(corpus, cfg.scene, scene_seed);
    char name[32];
    std::snprintf(name, sizeof name, "scene-%04d", i);
    write_scene(scene, (fs::path(out) / name).string(), cfg.scene.sample_rate_hz);
    counts[to_string(scene.meta.category)] += 1;
    json row;
    row["dir"] = name;
    row["seed"] = scene.meta.seed;
    row["category"] = to_string(scene.meta.category);
    row["challenge_tag"] = scene.meta.challenge_tag;
    scene_list.push_back(row);
    std::printf("  %s  %-12s %s\n", name, to_string(scene.meta.category),
                scene.meta.challenge_tag.c_str());
  }
  manifest["scenes"] = scene_list;
  manifest["category_counts"] = counts;
  write_text_file(fs::path(out) / "manifest.json", manifest.dump(2) + "\n");
  write_provenance(out, cfg, "datagen");
  std::printf("wrote %d scenes to %s\n", n_scenes, out.c_str());
  return 0;
}

// ---- align ----

int cmd_align(const GlobalOpts& g, const std::string& mic_path,
              const std::string& far_path, const std::string& out) {
  const PipelineConfig cfg = load_config(g);
  std::vector<double> mic = load_wav_checked(mic_path, cfg.scene.sample_rate_hz);
  std::vector<double> far = load_wav_checked(far_path, cfg.scene.sample_rate_hz);
  equalize(mic, far);

  const WindowConfig wc = cfg.processing_cfg();
  const Spectrogram ym = stft(mic, wc);
  const Spectrogram yf = stft(far, wc);
  const DelayTrack track = estimate_delay(ym, yf, cfg.msc);
  write_delay_csv(out, track);
  write_provenance(out, cfg, "align");

  int last = track.delay_frames.empty() ? 0 : track.delay_frames.back();
  std::printf("wrote %zu frames to %s (final delay %d frames = %.1f ms)\n",
              track.delay_frames.size(), out.c_str(), last,
              1e3 * last * wc.hop_samples / wc.sample_rate_hz);
  return 0;
}

// ---- linaec ----

int cmd_linaec(const GlobalOpts& g, const std::string& mic_path,
               const std::string& far_path, const std::string& out,
               const std::string& echo_out) {
  const PipelineConfig cfg = load_config(g);
  std::vector<double> mic = load_wav_checked(mic_path, cfg.linaec.sample_rate_hz);
  std::vector<double> far = load_wav_checked(far_path, cfg.linaec.sample_rate_hz);
  equalize(mic, far);

  const LinAecOutput res = linaec_process(mic, far, cfg.linaec);
  write_wav(out, pad_to(res.error_out, mic.size()), cfg.linaec.sample_rate_hz);
  write_provenance(out, cfg, "linaec");
  if (!echo_out.empty()) {
    write_wav(echo_out, pad_to(res.echo_estimate, mic.size()), cfg.linaec.sample_rate_hz);
    write_provenance(echo_out, cfg, "linaec");
  }
  std::printf("wrote error signal to %s\n", out.c_str());
  return 0;
}

// ---- train ----

int cmd_train(const GlobalOpts& g, const std::string& scenes_dir,
              const std::string& out, const std::string& arm_name) {
  const PipelineConfig cfg = load_config(g);
  const std::vector<std::string> dirs = list_scene_dirs(scenes_dir);
  require(dirs.size() >= 2, "training needs at least 2 scenes (1 is held out "
                            "for validation); found " + std::to_string(dirs.size()));

  const WindowConfig wc = cfg.processing_cfg();
  std::printf("preparing %zu scenes (STFT + delay alignment)\n", dirs.size());
  std::vector<PreparedScene> prepared;
  prepared.reserve(dirs.size());
  for (const std::string& d : dirs)
    prepared.push_back(prepare_scene(read_scene(d, cfg.scene.sample_rate_hz), wc, cfg.msc));

  const size_t val_n = std::max<size_t>(1, prepared.size() / 5);
  std::vector<PreparedScene> val(prepared.end() - static_cast<long>(val_n), prepared.end());
  prepared.resize(prepared.size() - val_n);
  std::printf("split: %zu train / %zu validation scenes\n", prepared.size(), val.size());

  fs::create_directories(out);
  const TrainConfig tcfg = cfg.train_config();
  TrainResult result;

  if (cfg.model_variant == "two_stage") {
    TwoStageModel model(cfg.two_stage_config());
    const TrainArm arm = train_arm_from_string(arm_name);
    std::printf("training two-stage model, arm %s, %d epochs x %d sequences\n",
                to_string(arm), tcfg.epochs, tcfg.sequences_per_epoch);
    result = run_arm(model, arm, prepared, val, tcfg);
    save_two_stage((fs::path(out) / "checkpoint.bin").string(), model);
  } else {
    require(arm_name == "adaptive+asym",
            "--arm selects echo-loss ablations and applies only to the "
            "two-stage model");
    SingleStageModel model(cfg.single_config());
    SingleStageGraph graph(model, cfg.model_compress_exp);
    LossPlan plan;  // speech terms only; the graph exposes no echo estimate
    std::printf("training single-stage model, %d epochs x %d sequences\n",
                tcfg.epochs, tcfg.sequences_per_epoch);
    result = train(graph, prepared, val, tcfg, plan);
    save_single_stage((fs::path(out) / "checkpoint.bin").string(), model);
  }

  write_text_file(fs::path(out) / "trainlog.csv", result.log.to_csv());
  write_text_file(fs::path(out) / "trainlog.json", result.log.to_json());
  write_provenance(out, cfg, "train");

  std::printf("saved checkpoint + train log to %s\n", out.c_str());
  if (result.best_epoch > 0)
    std::printf("best epoch %d (validation score %.4f)\n", result.best_epoch,
                result.best_score);
  if (result.diverged)
    throw NumericalError("training diverged at " + result.diagnostic +
                         "; best checkpoint before the divergence was saved");
  return 0;
}

// ---- enhance ----

int cmd_enhance(const GlobalOpts& g, const std::string& mic_path,
                const std::string& far_path, const std::string& ckpt,
                const std::string& ns_ckpt, const std::string& out,
                const std::string& mode, const std::string& echo_out,
                const std::string& error_out) {
  const PipelineConfig cfg = load_config(g);
  const int rate = cfg.scene.sample_rate_hz;
  std::vector<double> mic = load_wav_checked(mic_path, rate);
  std::vector<double> far = load_wav_checked(far_path, rate);
  equalize(mic, far);
  const size_t n = mic.size();

  const bool neural = mode != "linaec";
  require(!neural || !ckpt.empty(), "mode '" + mode + "' needs --checkpoint");
  require(echo_out.empty() || mode == "two_stage" || mode == "daec_only",
          "--echo-out applies only to the two-stage modes");
  require(error_out.empty() || mode == "two_stage" || mode == "daec_only",
          "--error-out applies only to the two-stage modes");

  std::vector<double> enhanced;
  if (mode == "linaec") {
    enhanced = linaec_process(mic, far, cfg.linaec).error_out;
  } else if (mode == "linaec+ns") {
    SingleStageModel ns = load_single_stage(ckpt);
    const WindowConfig wc = window_for_bins(ns.core().config().n_bins, rate);
    const std::vector<double> err = linaec_process(mic, far, cfg.linaec).error_out;
    std::vector<double> e = err, f = far;
    equalize(e, f);
    const Spectrogram ye = stft(e, wc);
    const Spectrogram yf = stft(f, wc);
    const DelayTrack track = estimate_delay(ye, yf, cfg.msc);
    SingleStageCache cache;
    enhanced = ns.forward(ye, align_farend(yf, track), cfg.model_compress_exp, cache)
                   .s_hat_time;
  } else if (mode == "single") {
    SingleStageModel model = load_single_stage(ckpt);
    const WindowConfig wc = window_for_bins(model.core().config().n_bins, rate);
    const Spectrogram ym = stft(mic, wc);
    const Spectrogram yf = stft(far, wc);
    const DelayTrack track = estimate_delay(ym, yf, cfg.msc);
    SingleStageCache cache;
    enhanced = model.forward(ym, align_farend(yf, track), cfg.model_compress_exp, cache)
                   .s_hat_time;
  } else {  // two_stage | daec_only
    TwoStageModel model = load_two_stage(ckpt);
    const WindowConfig wc = window_for_bins(model.config().daec.n_bins, rate);
    const Spectrogram ym = stft(mic, wc);
    const Spectrogram yf = stft(far, wc);
    const DelayTrack track = estimate_delay(ym, yf, cfg.msc);
    TwoStageCache cache;
    const TwoStageOut o = model.forward(ym, align_farend(yf, track), cache);
    enhanced = mode == "daec_only" ? istft(o.e, wc) : o.s_hat_time;
    if (!echo_out.empty()) {
      const Spectrogram d_hat = decompress(o.d_hat_c, model.config().compress_exp);
      write_wav(echo_out, pad_to(istft(d_hat, wc), n), rate);
      write_provenance(echo_out, cfg, "enhance");
    }
    if (!error_out.empty()) {
      write_wav(error_out, pad_to(istft(o.e, wc), n), rate);
      write_provenance(error_out, cfg, "enhance");
    }
  }
  (void)ns_ckpt;

  write_wav(out, pad_to(std::move(enhanced), n), rate);
  write_provenance(out, cfg, "enhance");
  std::printf("wrote enhanced signal to %s (%zu samples, mode %s)\n", out.c_str(), n,
              mode.c_str());
  return 0;
}

// ---- eval ----

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

int cmd_eval(const GlobalOpts& g, const std::string& scenes_dir, const std::string& out,
             const std::string& pipeline_list, const std::string& two_ckpt,
             const std::string& single_ckpt, bool svg) {
  const PipelineConfig cfg = load_config(g);
  const std::vector<std::string> dirs = list_scene_dirs(scenes_dir);
  std::vector<SceneBundle> scenes;
  scenes.reserve(dirs.size());
  for (const std::string& d : dirs) scenes.push_back(read_scene(d, cfg.scene.sample_rate_hz));

  // Models are loaded once and shared by every pipeline that needs them; the
  // analysis window follows each checkpoint's own bin count.
  std::optional<TwoStageModel> two;
  std::optional<SingleStageModel> single;
  WindowConfig two_wc, single_wc;
  auto need_two = [&]() -> TwoStageModel& {
    if (!two) {
      require(!two_ckpt.empty(), "this pipeline list needs --two-stage-ckpt");
      two = load_two_stage(two_ckpt);
      two_wc = window_for_bins(two->config().daec.n_bins, cfg.scene.sample_rate_hz);
    }
    return *two;
  };
  auto need_single = [&]() -> SingleStageModel& {
    if (!single) {
      require(!single_ckpt.empty(), "this pipeline list needs --single-ckpt");
      single = load_single_stage(single_ckpt);
      single_wc = window_for_bins(single->core().config().n_bins, cfg.scene.sample_rate_hz);
    }
    return *single;
  };

  std::vector<Pipeline> pipelines;
  for (const std::string& name : split_csv(pipeline_list)) {
    if (name == "identity") {
      pipelines.push_back(identity_pipeline());
    } else if (name == "oracle") {
      pipelines.push_back(oracle_pipeline());
    } else if (name == "echo_subtractor") {
      pipelines.push_back(true_echo_subtractor_pipeline());
    } else if (name == "linaec") {
      pipelines.push_back(linaec_pipeline(cfg.linaec));
    } else if (name == "linaec+ns") {
      SingleStageModel& m = need_single();
      pipelines.push_back(
          linaec_ns_pipeline(cfg.linaec, m, cfg.model_compress_exp, single_wc, cfg.msc));
    } else if (name == "single_stage") {
      SingleStageModel& m = need_single();
      pipelines.push_back(
          single_stage_pipeline(m, cfg.model_compress_exp, single_wc, cfg.msc));
    } else if (name == "daec_only") {
      pipelines.push_back(daec_only_pipeline(need_two(), two_wc, cfg.msc));
    } else if (name == "two_stage") {
      pipelines.push_back(two_stage_pipeline(need_two(), two_wc, cfg.msc));
    } else {
      throw ConfigError("unknown pipeline '" + name +
                        "' (known: identity, oracle, echo_subtractor, linaec, "
                        "linaec+ns, single_stage, daec_only, two_stage)");
    }
  }
  require(!pipelines.empty(), "--pipelines lists no pipelines");

  EvalConfig ecfg;
  ecfg.lsd_cfg = cfg.processing_cfg();
  std::string ident;
  if (!two_ckpt.empty()) ident += "two_stage=" + two_ckpt;
  if (!single_ckpt.empty()) ident += (ident.empty() ? "" : " ") + ("single=" + single_ckpt);
  ecfg.model_identity = ident.empty() ? "no neural models" : ident;
  ecfg.config_hash = cfg.hash();

  std::printf("evaluating %zu pipelines over %zu scenes\n", pipelines.size(),
              scenes.size());
  const EvalReport report = scenario_eval(pipelines, scenes, ecfg);

  fs::create_directories(out);
  write_text_file(fs::path(out) / "report.json", report.to_json());
  write_text_file(fs::path(out) / "report.csv", report.to_csv());
  if (svg) write_text_file(fs::path(out) / "report.svg", report.to_svg());
  write_provenance(out, cfg, "eval");

  for (const PipelineReport& pr : report.pipelines) {
    auto fmt = [](const std::map<std::string, AggregateStat>& m, const char* key) {
      auto it = m.find(key);
      return it == m.end() || it->second.n == 0 ? std::string("-")
                                                : std::to_string(it->second.mean);
    };
    std::printf("  %-16s erle %s  si_sdr %s  lsd %s\n", pr.pipeline.c_str(),
                fmt(pr.erle, "all").c_str(), fmt(pr.si_sdr, "all").c_str(),
                fmt(pr.lsd, "all").c_str());
  }
  std::printf("wrote report to %s\n", out.c_str());
  return 0;
}

}  // namespace
}  // namespace daec

int main(int argc, char** argv) {
  using namespace daec;

  CLI::App app{"deep echo cancellation pipeline: scene synthesis, delay "
               "alignment, linear + neural cancellation, training, evaluation"};
  app.require_subcommand(1);
  app.footer("Configuration keys (for --config files and --set):\n" +
             PipelineConfig::describe_keys() +
             "\nExit codes: 0 ok, 2 config/usage, 3 file/artifact, 4 numerical, "
             "1 unexpected.");

  GlobalOpts g;
  app.add_option("--config", g.config_path, "configuration file (key=value lines)");
  app.add_option("--set", g.sets, "override one key, e.g. --set train.epochs=10")
      ->take_all();
  std::uint64_t seed_val = 0;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_val, "override the root seed");

  // datagen
  auto* datagen = app.add_subcommand("datagen", "synthesize a set of training/eval scenes");
  std::string dg_out;
  int dg_n = 10;
  datagen->add_option("--out", dg_out, "output scene-set directory")->required();
  datagen->add_option("--n", dg_n, "number of scenes")->required();

  // align
  auto* align = app.add_subcommand("align", "estimate the per-frame mic/far-end delay");
  std::string al_mic, al_far, al_out;
  align->add_option("--mic", al_mic, "microphone WAV")->required();
  align->add_option("--far", al_far, "far-end reference WAV")->required();
  align->add_option("--out", al_out, "output delay CSV")->required();

  // linaec
  auto* linaec = app.add_subcommand("linaec", "run the linear echo canceller");
  std::string la_mic, la_far, la_out, la_echo;
  linaec->add_option("--mic", la_mic, "microphone WAV")->required();
  linaec->add_option("--far", la_far, "far-end reference WAV")->required();
  linaec->add_option("--out", la_out, "output error-signal WAV")->required();
  linaec->add_option("--echo-out", la_echo, "also write the echo estimate WAV");

  // train
  auto* train = app.add_subcommand("train", "train the configured model on a scene set");
  std::string tr_scenes, tr_out, tr_arm = "adaptive+asym";
  train->add_option("--scenes", tr_scenes, "scene-set directory (from datagen)")->required();
  train->add_option("--out", tr_out, "output directory (checkpoint + logs)")->required();
  train->add_option("--arm", tr_arm,
                    "echo-loss arm: adaptive+asym | adaptive+noasym | fixed | "
                    "pretrain+fixed");

  // enhance
  auto* enhance = app.add_subcommand("enhance", "process a recording with a trained model");
  std::string en_mic, en_far, en_ckpt, en_ns_ckpt, en_out, en_echo, en_err;
  std::string en_mode = "two_stage";
  enhance->add_option("--mic", en_mic, "microphone WAV")->required();
  enhance->add_option("--far", en_far, "far-end reference WAV")->required();
  enhance->add_option("--checkpoint", en_ckpt, "model checkpoint");
  enhance->add_option("--ns-checkpoint", en_ns_ckpt, "(reserved)")->group("");
  enhance->add_option("--out", en_out, "output WAV")->required();
  enhance->add_option("--mode", en_mode, "two_stage | daec_only | single | linaec | linaec+ns")
      ->check(CLI::IsMember({"two_stage", "daec_only", "single", "linaec", "linaec+ns"}));
  enhance->add_option("--echo-out", en_echo, "also write the echo estimate WAV");
  enhance->add_option("--error-out", en_err, "also write the first-stage error WAV");

  // eval
  auto* eval = app.add_subcommand("eval", "score pipelines over a scene set");
  std::string ev_scenes, ev_out, ev_pipes = "linaec";
  std::string ev_two, ev_single;
  bool ev_svg = false;
  eval->add_option("--scenes", ev_scenes, "scene-set directory")->required();
  eval->add_option("--out", ev_out, "output report directory")->required();
  eval->add_option("--pipelines", ev_pipes,
                   "comma list: identity,oracle,echo_subtractor,linaec,"
                   "linaec+ns,single_stage,daec_only,two_stage");
  eval->add_option("--two-stage-ckpt", ev_two, "two-stage model checkpoint");
  eval->add_option("--single-ckpt", ev_single, "single-stage model checkpoint");
  eval->add_flag("--svg", ev_svg, "also render the bar-chart SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 returns 0 for --help, nonzero for usage errors; fold the latter
    // onto the config-error exit code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*seed_opt) g.seed = seed_val;

  try {
    if (*datagen) return cmd_datagen(g, dg_out, dg_n);
    if (*align) return cmd_align(g, al_mic, al_far, al_out);
    if (*linaec) return cmd_linaec(g, la_mic, la_far, la_out, la_echo);
    if (*train) return cmd_train(g, tr_scenes, tr_out, tr_arm);
    if (*enhance)
      return cmd_enhance(g, en_mic, en_far, en_ckpt, en_ns_ckpt, en_out, en_mode,
                         en_echo, en_err);
    if (*eval)
      return cmd_eval(g, ev_scenes, ev_out, ev_pipes, ev_two, ev_single, ev_svg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
