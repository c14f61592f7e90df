#include "daec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "daec/error.hpp"
#include "daec/metrics.hpp"
#include "daec/rng.hpp"
#include "json.hpp"

namespace daec {

using nlohmann::json;

// ---- Scene preparation ----

PreparedScene prepare_scene(const SceneBundle& scene, const WindowConfig& wcfg,
                            const MscConfig& mcfg) {
  PreparedScene p;
  p.y = stft(scene.mic, wcfg);
  Spectrogram far = stft(scene.farend, wcfg);
  DelayTrack track = estimate_delay(p.y, far, mcfg);
  p.u_aligned = align_farend(far, track);
  p.d = stft(scene.echo, wcfg);
  p.mic = scene.mic;
  p.target = scene.target;
  p.echo = scene.echo;
  p.meta = scene.meta;
  return p;
}

SceneCrop crop_scene(const PreparedScene& s, int start_frame, int n_frames) {
  require(start_frame >= 0 && n_frames > 0 &&
              start_frame + n_frames <= s.y.n_frames,
          "scene crop out of range");
  const WindowConfig& cfg = s.y.config;
  SceneCrop c;
  auto slice = [&](const Spectrogram& src) {
    Spectrogram out(n_frames, src.n_bins, cfg);
    std::copy(src.data.begin() + static_cast<size_t>(start_frame) * src.n_bins,
              src.data.begin() +
                  static_cast<size_t>(start_frame + n_frames) * src.n_bins,
              out.data.begin());
    return out;
  };
  c.y = slice(s.y);
  c.u = slice(s.u_aligned);
  c.d = slice(s.d);
  const size_t t0 = static_cast<size_t>(start_frame) * cfg.hop_samples;
  const size_t len = static_cast<size_t>(n_frames - 1) * cfg.hop_samples +
                     cfg.window_len_samples;
  require(t0 + len <= s.mic.size(), "scene crop exceeds the signal");
  c.mic.assign(s.mic.begin() + t0, s.mic.begin() + t0 + len);
  c.target.assign(s.target.begin() + t0, s.target.begin() + t0 + len);
  return c;
}

// ---- Config ----

void TrainConfig::validate() const {
  require(batch_size > 0, "batch size must be positive");
  require(epochs >= 0, "epoch count must be non-negative");
  require(sequences_per_epoch > 0, "sequences per epoch must be positive");
  require(lr_init > 0.0, "initial learning rate must be positive");
  require(lr_drop_factor > 0.0 && lr_drop_factor <= 1.0,
          "learning-rate drop factor must lie in (0, 1]");
  require(lr_patience_epochs >= 1, "learning-rate patience must be >= 1");
  require(grad_clip_norm > 0.0, "gradient clip norm must be positive");
  require(crop_seconds > 0.0, "crop length must be positive");
  require(pretrain_epochs >= 0 && pretrain_epochs <= epochs,
          "pretraining epochs must fit the total budget");
  weights.validate();
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "batch_size=" << batch_size << "\n";
  os << "epochs=" << epochs << "\n";
  os << "sequences_per_epoch=" << sequences_per_epoch << "\n";
  os << "lr_init=" << num(lr_init) << "\n";
  os << "lr_drop_factor=" << num(lr_drop_factor) << "\n";
  os << "lr_patience_epochs=" << lr_patience_epochs << "\n";
  os << "alpha=" << num(weights.alpha) << "\n";
  os << "beta=" << num(weights.beta) << "\n";
  os << "gamma_min=" << num(weights.gamma_min) << "\n";
  os << "eta=" << num(weights.eta) << "\n";
  os << "compress_exp=" << num(weights.c) << "\n";
  os << "gamma_mode="
     << (gamma_mode == GammaMode::kAdaptive ? "adaptive" : "fixed") << "\n";
  os << "fixed_gamma=" << num(fixed_gamma) << "\n";
  os << "pretrain_mode="
     << (pretrain_mode == PretrainMode::kNone ? "none" : "daec_first") << "\n";
  os << "pretrain_epochs=" << pretrain_epochs << "\n";
  os << "grad_clip_norm=" << num(grad_clip_norm) << "\n";
  os << "crop_seconds=" << num(crop_seconds) << "\n";
  os << "adam_beta1=" << num(adam_beta1) << "\n";
  os << "adam_beta2=" << num(adam_beta2) << "\n";
  os << "adam_eps=" << num(adam_eps) << "\n";
  os << "loss_window=" << loss_cfg.sample_rate_hz << ":"
     << loss_cfg.window_len_samples << ":" << loss_cfg.hop_samples << ":"
     << (loss_cfg.window_kind == WindowKind::kHann ? "hann" : "sqrt_hann")
     << "\n";
  os << "seed=" << seed << "\n";
  return os.str();
}

uint64_t TrainConfig::config_hash() const {
  // FNV-1a over the canonical text.
  const std::string text = to_text();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// ---- Log serialization ----

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  os << "# config_hash=" << config_hash << " seed=" << seed << "\n";
  os << "epoch,total,ccmse,asym,echo_mae,gamma,val_proxy,lr\n";
  for (const EpochRecord& r : epochs) {
    os << r.epoch << "," << fmt_g(r.total) << "," << fmt_g(r.ccmse) << ","
       << fmt_g(r.asym) << "," << fmt_g(r.echo_mae) << "," << fmt_g(r.gamma)
       << "," << fmt_g(r.val_proxy) << "," << fmt_g(r.lr) << "\n";
  }
  return os.str();
}

std::string TrainLog::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["epochs"] = json::array();
  for (const EpochRecord& r : epochs) {
    json e;
    e["epoch"] = r.epoch;
    e["total"] = r.total;
    e["ccmse"] = r.ccmse;
    e["asym"] = r.asym;
    e["echo_mae"] = r.echo_mae;
    e["gamma"] = r.gamma;
    e["val_proxy"] = r.val_proxy;
    e["lr"] = r.lr;
    j["epochs"].push_back(e);
  }
  return j.dump(2);
}

// ---- Graph adapters ----

void TwoStageGraph::begin_batch(int n_items) {
  caches_.assign(static_cast<size_t>(n_items), TwoStageCache{});
}

ItemOut TwoStageGraph::forward_item(int slot, const SceneCrop& crop) {
  ItemOut out;
  TwoStageOut o = model_.forward(crop.y, crop.u, caches_[slot]);
  out.s_hat = std::move(o.s_hat_time);
  out.d_hat_lin = decompress(o.d_hat_c, model_.config().compress_exp);
  return out;
}

void TwoStageGraph::backward_item(int slot, const std::vector<double>& g_s_hat,
                                  const Spectrogram* g_d_hat_lin) {
  const TwoStageCache& cache = caches_[slot];
  if (g_d_hat_lin != nullptr) {
    Spectrogram g_dc;
    decompress_backward(cache.d_hat_c, *g_d_hat_lin,
                        model_.config().compress_exp, g_dc);
    model_.backward(cache, g_s_hat, &g_dc);
  } else {
    model_.backward(cache, g_s_hat, nullptr);
  }
}

std::vector<double> TwoStageGraph::infer(const PreparedScene& scene) {
  TwoStageCache cache;
  return model_.forward(scene.y, scene.u_aligned, cache).s_hat_time;
}

double TwoStageGraph::validation_score(const std::vector<PreparedScene>& val) {
  return validation_proxy(val, [this](const PreparedScene& s) { return infer(s); })
      .value;
}

void SingleStageGraph::begin_batch(int n_items) {
  caches_.assign(static_cast<size_t>(n_items), SingleStageCache{});
}

ItemOut SingleStageGraph::forward_item(int slot, const SceneCrop& crop) {
  ItemOut out;
  out.s_hat = model_.forward(crop.y, crop.u, c_, caches_[slot]).s_hat_time;
  return out;
}

void SingleStageGraph::backward_item(int slot, const std::vector<double>& g_s_hat,
                                     const Spectrogram* g_d_hat_lin) {
  require(g_d_hat_lin == nullptr, "single-stage graph has no echo estimate");
  model_.backward(caches_[slot], g_s_hat, c_);
}

std::vector<double> SingleStageGraph::infer(const PreparedScene& scene) {
  SingleStageCache cache;
  return model_.forward(scene.y, scene.u_aligned, c_, cache).s_hat_time;
}

double SingleStageGraph::validation_score(const std::vector<PreparedScene>& val) {
  return validation_proxy(val, [this](const PreparedScene& s) { return infer(s); })
      .value;
}

void EchoStageGraph::begin_batch(int n_items) {
  slots_.assign(static_cast<size_t>(n_items), Slot{});
}

ItemOut EchoStageGraph::forward_item(int slot, const SceneCrop& crop) {
  Slot& s = slots_[slot];
  const Spectrogram yc = compress(crop.y, c_);
  const Spectrogram uc = compress(crop.u, c_);
  s.in = pack_spectra({&yc, &uc});
  FeatureMap head = daec_.forward(s.in, nullptr, s.core);
  s.d_hat_c = map_to_spectrogram(head, 0, 1, crop.y.config);
  ItemOut out;
  out.d_hat_lin = decompress(s.d_hat_c, c_);
  return out;
}

void EchoStageGraph::backward_item(int slot, const std::vector<double>& g_s_hat,
                                   const Spectrogram* g_d_hat_lin) {
  require(g_s_hat.empty(), "echo-only graph has no speech output");
  if (g_d_hat_lin == nullptr) return;
  Slot& s = slots_[slot];
  Spectrogram g_dc;
  decompress_backward(s.d_hat_c, *g_d_hat_lin, c_, g_dc);
  daec_.backward(s.core, spectrogram_to_map_grad(g_dc));
}

std::vector<double> EchoStageGraph::infer(const PreparedScene& scene) {
  // The canceller's enhanced signal: mic minus the estimated echo.
  Slot s;
  const Spectrogram yc = compress(scene.y, c_);
  const Spectrogram uc = compress(scene.u_aligned, c_);
  s.in = pack_spectra({&yc, &uc});
  FeatureMap head = daec_.forward(s.in, nullptr, s.core);
  s.d_hat_c = map_to_spectrogram(head, 0, 1, scene.y.config);
  return istft(subtract_echo(scene.y, s.d_hat_c, c_), scene.y.config);
}

double EchoStageGraph::validation_score(const std::vector<PreparedScene>& val) {
  return -relative_echo_error(daec_, c_, val);
}

double relative_echo_error(CruseModel& daec, double compress_exp,
                           const std::vector<PreparedScene>& scenes) {
  require(!scenes.empty(), "relative echo error needs at least one scene");
  double resid = 0.0, total = 0.0;
  for (const PreparedScene& s : scenes) {
    CruseCache cache;
    const Spectrogram yc = compress(s.y, compress_exp);
    const Spectrogram uc = compress(s.u_aligned, compress_exp);
    const FeatureMap in = pack_spectra({&yc, &uc});
    FeatureMap head = daec.forward(in, nullptr, cache);
    const Spectrogram d_hat =
        decompress(map_to_spectrogram(head, 0, 1, s.y.config), compress_exp);
    resid += echo_abs_residual(d_hat, s.d);
    total += echo_abs_total(s.d);
  }
  if (total <= 0.0) return 0.0;
  return resid / total;
}

// ---- Validation proxy ----

namespace {

// Synthesis edges lack full overlap; comparisons drop one window on each
// side whenever enough samples remain.
size_t edge_trim(size_t len, const WindowConfig& cfg) {
  const size_t w = static_cast<size_t>(cfg.window_len_samples);
  return len > 2 * w ? w : 0;
}

std::vector<double> trim_to(const std::vector<double>& x, size_t off, size_t n) {
  return std::vector<double>(x.begin() + off, x.begin() + off + n);
}

}  // namespace

ProxyBreakdown validation_proxy(
    const std::vector<PreparedScene>& val,
    const std::function<std::vector<double>(const PreparedScene&)>& infer) {
  require(!val.empty(), "validation needs at least one scene");
  ProxyBreakdown pb;
  for (const PreparedScene& scene : val) {
    const std::vector<double> out = infer(scene);
    require(out.size() <= scene.mic.size(),
            "inference output longer than the scene");
    const WindowConfig& cfg = scene.y.config;
    const size_t off = edge_trim(out.size(), cfg);
    const size_t n = out.size() - 2 * off;
    const std::vector<double> out_t = trim_to(out, off, n);
    const std::vector<double> mic_t = trim_to(scene.mic, off, n);
    if (scene.meta.category == SceneCategory::kDoubleTalk) {
      const std::vector<double> ref_t = trim_to(scene.target, off, n);
      pb.dt_si_sdr_gain += si_sdr_db(out_t, ref_t) - si_sdr_db(mic_t, ref_t);
      ++pb.n_dt;
    } else if (scene.meta.category == SceneCategory::kFarEndOnly) {
      const std::vector<double> echo_t = trim_to(scene.echo, off, n);
      const std::vector<char> mask = active_mask(echo_t, cfg.sample_rate_hz);
      pb.feo_seg_erle += segmental_erle_db(mic_t, out_t, mask, cfg.sample_rate_hz);
      ++pb.n_feo;
    }
  }
  if (pb.n_dt > 0) pb.dt_si_sdr_gain /= pb.n_dt;
  if (pb.n_feo > 0) pb.feo_seg_erle /= pb.n_feo;
  pb.value = pb.dt_si_sdr_gain + 0.5 * pb.feo_seg_erle;
  return pb;
}

// ---- Optimizer ----

void Adam::step(const std::vector<NamedParam>& params, double lr) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].tensor->v.size(), 0.0);
      v_[i].assign(params[i].tensor->v.size(), 0.0);
    }
  }
  require(m_.size() == params.size(), "optimizer bound to a different model");
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, t_);
  const double bc2 = 1.0 - std::pow(b2_, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    require(m_[i].size() == p.v.size(), "optimizer state shape mismatch");
    for (size_t k = 0; k < p.v.size(); ++k) {
      const double g = p.g[k];
      m_[i][k] = b1_ * m_[i][k] + (1.0 - b1_) * g;
      v_[i][k] = b2_ * v_[i][k] + (1.0 - b2_) * g * g;
      const double mhat = m_[i][k] / bc1;
      const double vhat = v_[i][k] / bc2;
      p.v[k] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

// ---- Training loop ----

namespace {

std::vector<double> snapshot_params(const std::vector<NamedParam>& params) {
  std::vector<double> s;
  for (const NamedParam& p : params) {
    s.insert(s.end(), p.tensor->v.begin(), p.tensor->v.end());
  }
  return s;
}

void restore_params(const std::vector<NamedParam>& params,
                    const std::vector<double>& s) {
  size_t off = 0;
  for (const NamedParam& p : params) {
    std::copy(s.begin() + off, s.begin() + off + p.tensor->v.size(),
              p.tensor->v.begin());
    off += p.tensor->v.size();
  }
  require(off == s.size(), "parameter snapshot size mismatch");
}

double grad_global_norm(const std::vector<NamedParam>& params) {
  double sq = 0.0;
  for (const NamedParam& p : params) {
    for (double g : p.tensor->g) sq += g * g;
  }
  return std::sqrt(sq);
}

void scale_grads(const std::vector<NamedParam>& params, double s) {
  for (const NamedParam& p : params) {
    for (double& g : p.tensor->g) g *= s;
  }
}

struct BatchItem {
  SceneCrop crop;
  ItemOut out;
};

}  // namespace

TrainResult train(TrainGraph& graph, const std::vector<PreparedScene>& train_scenes,
                  const std::vector<PreparedScene>& val_scenes,
                  const TrainConfig& cfg, const LossPlan& plan) {
  cfg.validate();
  require(!train_scenes.empty(), "training needs at least one scene");
  require(!val_scenes.empty(), "training needs a validation set");
  require(plan.speech || graph.has_echo(),
          "loss plan selects no term for this graph");

  TrainResult result;
  result.log.config_hash = cfg.config_hash();
  result.log.seed = cfg.seed;

  const std::vector<NamedParam> params = graph.params();
  Adam opt(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  double lr = cfg.lr_init;
  int epochs_since_improve = 0;
  // Seeding the snapshot with the initial parameters means a divergence
  // before the first validation still rolls back to a usable state.
  std::vector<double> best_snapshot = snapshot_params(params);
  double best_score = -1e300;

  const WindowConfig& wcfg = train_scenes.front().y.config;
  const int crop_frames = std::max(
      1, static_cast<int>(cfg.crop_seconds * wcfg.sample_rate_hz / wcfg.hop_samples));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng erng(derive_seed(cfg.seed, 0x10000 + static_cast<uint64_t>(epoch)));
    double sum_total = 0.0, sum_ccmse = 0.0, sum_asym = 0.0, sum_mae = 0.0;
    double sum_gamma = 0.0;
    int n_items_epoch = 0, n_batches = 0;

    int remaining = cfg.sequences_per_epoch;
    while (remaining > 0) {
      const int bn = std::min(cfg.batch_size, remaining);
      remaining -= bn;
      try {
        // Phase 1: assemble and run the batch forward.
        graph.zero_grad();
        graph.begin_batch(bn);
        std::vector<BatchItem> items(bn);
        for (int i = 0; i < bn; ++i) {
          const int scene_idx = erng.randint(0, static_cast<int>(train_scenes.size()) - 1);
          const PreparedScene& scene = train_scenes[scene_idx];
          const int nf = std::min(crop_frames, scene.y.n_frames);
          const int max_start = scene.y.n_frames - nf;
          const int start = max_start > 0 ? erng.randint(0, max_start) : 0;
          items[i].crop = crop_scene(scene, start, nf);
          items[i].out = graph.forward_item(i, items[i].crop);
        }

        // Batch echo weight from aggregated sums.
        double gamma = 0.0;
        if (graph.has_echo()) {
          if (!plan.speech) {
            gamma = 1.0;  // echo-only phase
          } else if (plan.gamma_mode == GammaMode::kFixed) {
            gamma = plan.fixed_gamma;
          } else {
            double resid = 0.0, total = 0.0;
            for (const BatchItem& it : items) {
              resid += echo_abs_residual(it.out.d_hat_lin, it.crop.d);
              total += echo_abs_total(it.crop.d);
            }
            gamma = gamma_from_sums(resid, total, cfg.weights);
          }
        }

        // Phase 2: losses and gradients, averaged over the batch.
        const double inv = 1.0 / bn;
        double batch_loss = 0.0;
        for (int i = 0; i < bn; ++i) {
          const BatchItem& it = items[i];
          double item_total = 0.0;
          std::vector<double> g_s;
          bool have_gs = false;
          if (plan.speech && !it.out.s_hat.empty()) {
            const size_t len = it.out.s_hat.size();
            require(len == it.crop.target.size(), "crop/output length mismatch");
            const size_t off = edge_trim(len, wcfg);
            const size_t n = len - 2 * off;
            const std::vector<double> est = trim_to(it.out.s_hat, off, n);
            const std::vector<double> ref = trim_to(it.crop.target, off, n);
            std::vector<double> g_ccmse, g_asym;
            const double l_ccmse = ccmse(est, ref, cfg.weights, cfg.loss_cfg, &g_ccmse);
            const double l_asym =
                asym_penalty(est, ref, cfg.weights, cfg.loss_cfg, &g_asym);
            sum_ccmse += l_ccmse;
            sum_asym += l_asym;
            item_total += l_ccmse + cfg.weights.beta * l_asym;
            g_s.assign(len, 0.0);
            for (size_t k = 0; k < n; ++k) {
              g_s[off + k] = inv * (g_ccmse[k] + cfg.weights.beta * g_asym[k]);
            }
            have_gs = true;
          }
          Spectrogram g_d;
          bool have_gd = false;
          if (graph.has_echo()) {
            Spectrogram g_mae;
            const double l_mae = echo_mae(it.out.d_hat_lin, it.crop.d, &g_mae);
            sum_mae += l_mae;
            item_total += gamma * l_mae;
            const double w = inv * gamma;
            g_d = std::move(g_mae);
            for (auto& z : g_d.data) z *= w;
            have_gd = true;
          }
          batch_loss += item_total;
          sum_total += item_total;
          graph.backward_item(i, have_gs ? g_s : std::vector<double>{},
                              have_gd ? &g_d : nullptr);
        }
        batch_loss *= inv;
        sum_gamma += gamma;
        ++n_batches;
        n_items_epoch += bn;

        if (!std::isfinite(batch_loss)) {
          result.diverged = true;
          result.diagnostic = "non-finite loss in epoch " + std::to_string(epoch);
          break;
        }

        // Clip by global norm, then update.
        const double norm = grad_global_norm(params);
        if (!std::isfinite(norm)) {
          result.diverged = true;
          result.diagnostic =
              "non-finite gradient norm in epoch " + std::to_string(epoch);
          break;
        }
        if (norm > cfg.grad_clip_norm) {
          scale_grads(params, cfg.grad_clip_norm / norm);
        }
        opt.step(params, lr);
      } catch (const NumericalError& e) {
        // Models and losses reject non-finite values at their boundaries;
        // any such breakdown mid-run is a divergence, not a caller bug.
        result.diverged = true;
        result.diagnostic =
            "epoch " + std::to_string(epoch) + ": " + e.what();
        break;
      }
    }

    if (result.diverged) break;

    const double proxy = graph.validation_score(val_scenes);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.total = sum_total / n_items_epoch;
    rec.ccmse = sum_ccmse / n_items_epoch;
    rec.asym = sum_asym / n_items_epoch;
    rec.echo_mae = sum_mae / n_items_epoch;
    rec.gamma = n_batches > 0 ? sum_gamma / n_batches : 0.0;
    rec.val_proxy = proxy;
    rec.lr = lr;
    result.log.epochs.push_back(rec);

    if (proxy > best_score) {
      best_score = proxy;
      result.best_epoch = epoch;
      result.best_score = proxy;
      best_snapshot = snapshot_params(params);
      epochs_since_improve = 0;
    } else {
      ++epochs_since_improve;
      if (epochs_since_improve == cfg.lr_patience_epochs) {
        lr *= cfg.lr_drop_factor;
        epochs_since_improve = 0;
      }
    }
  }

  // Leave the graph at the best state seen (initial state if nothing ran or
  // the very first epoch already diverged).
  restore_params(params, best_snapshot);
  return result;
}

TrainResult pretrain_daec(TwoStageModel& model,
                          const std::vector<PreparedScene>& train_scenes,
                          const std::vector<PreparedScene>& val_scenes,
                          const TrainConfig& cfg) {
  EchoStageGraph graph(model.daec(), model.config().compress_exp);
  LossPlan plan;
  plan.speech = false;
  return train(graph, train_scenes, val_scenes, cfg, plan);
}

// ---- Ablation arms ----

const char* to_string(TrainArm arm) {
  switch (arm) {
    case TrainArm::kAdaptiveAsym: return "adaptive+asym";
    case TrainArm::kAdaptiveNoAsym: return "adaptive+noasym";
    case TrainArm::kFixed: return "fixed";
    case TrainArm::kPretrainFixed: return "pretrain+fixed";
  }
  return "?";
}

TrainArm train_arm_from_string(const std::string& s) {
  if (s == "adaptive+asym") return TrainArm::kAdaptiveAsym;
  if (s == "adaptive+noasym") return TrainArm::kAdaptiveNoAsym;
  if (s == "fixed") return TrainArm::kFixed;
  if (s == "pretrain+fixed") return TrainArm::kPretrainFixed;
  throw ConfigError("unknown training arm: " + s);
}

TrainResult run_arm(TwoStageModel& model, TrainArm arm,
                    const std::vector<PreparedScene>& train_scenes,
                    const std::vector<PreparedScene>& val_scenes,
                    const TrainConfig& base_cfg) {
  TrainConfig cfg = base_cfg;
  LossPlan plan;
  plan.fixed_gamma = cfg.fixed_gamma;
  switch (arm) {
    case TrainArm::kAdaptiveAsym:
      cfg.gamma_mode = GammaMode::kAdaptive;
      cfg.pretrain_mode = PretrainMode::kNone;
      break;
    case TrainArm::kAdaptiveNoAsym:
      cfg.gamma_mode = GammaMode::kAdaptive;
      cfg.pretrain_mode = PretrainMode::kNone;
      cfg.weights.beta = 0.0;
      break;
    case TrainArm::kFixed:
      cfg.gamma_mode = GammaMode::kFixed;
      cfg.pretrain_mode = PretrainMode::kNone;
      break;
    case TrainArm::kPretrainFixed:
      cfg.gamma_mode = GammaMode::kFixed;
      cfg.pretrain_mode = PretrainMode::kDaecFirst;
      if (cfg.pretrain_epochs == 0 && cfg.epochs > 0) {
        cfg.pretrain_epochs = std::max(1, cfg.epochs / 4);
      }
      break;
  }
  plan.gamma_mode = cfg.gamma_mode;
  cfg.validate();

  int finetune_epochs = cfg.epochs;
  if (cfg.pretrain_mode == PretrainMode::kDaecFirst) {
    TrainConfig pre = cfg;
    pre.epochs = cfg.pretrain_epochs;
    pre.pretrain_mode = PretrainMode::kNone;
    pre.pretrain_epochs = 0;
    pretrain_daec(model, train_scenes, val_scenes, pre);
    finetune_epochs = cfg.epochs - cfg.pretrain_epochs;
  }

  TrainConfig fine = cfg;
  fine.epochs = finetune_epochs;
  TwoStageGraph graph(model);
  return train(graph, train_scenes, val_scenes, fine, plan);
}

}  // namespace daec
