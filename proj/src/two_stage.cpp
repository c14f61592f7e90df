#include "daec/two_stage.hpp"

#include <sstream>

#include "daec/checkpoint.hpp"

namespace daec {

namespace {

void add_spec(Spectrogram& acc, const Spectrogram& inc) {
  require(acc.same_shape(inc), "gradient spectrogram shape mismatch");
  for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += inc.data[i];
}

}  // namespace

// ---- Single stage ----

CruseConfig single_stage_desk_config(uint64_t init_seed) {
  CruseConfig cfg;
  cfg.in_channels = 4;
  cfg.out_mode = OutMode::kDeepFilter;
  cfg.init_seed = init_seed;
  return cfg;
}

SingleStageModel::SingleStageModel(const CruseConfig& cfg) : core_(cfg) {
  require(cfg.in_channels == 4, "single stage expects 4 input channels");
  require(cfg.out_mode == OutMode::kDeepFilter, "single stage uses a deep filter head");
  require(!cfg.bridge_input, "single stage takes no bridge input");
}

SingleStageOut SingleStageModel::forward(const Spectrogram& y,
                                         const Spectrogram& u_aligned,
                                         double compress_exp,
                                         SingleStageCache& cache) const {
  require(y.same_shape(u_aligned), "mic/far spectra must share a shape");
  cache.y = y;
  const Spectrogram y_c = compress(y, compress_exp);
  const Spectrogram u_c = compress(u_aligned, compress_exp);
  cache.in = pack_spectra({&y_c, &u_c});
  FeatureMap out = core_.forward(cache.in, nullptr, cache.core);
  const CruseConfig& cfg = core_.config();
  cache.g = map_to_df(out, cfg.df_neighbors, cfg.df_past);
  cache.s_hat = apply_deep_filter(cache.g, y);

  SingleStageOut r;
  r.g = cache.g;
  r.s_hat = cache.s_hat;
  r.s_hat_time = istft(cache.s_hat, y.config);
  return r;
}

void SingleStageModel::backward(const SingleStageCache& cache,
                                const std::vector<double>& grad_s_time,
                                double compress_exp) {
  (void)compress_exp;  // input compression consumes no parameters upstream
  Spectrogram grad_s = istft_adjoint(grad_s_time, cache.s_hat.n_frames, cache.y.config);
  DeepFilterCoeffs grad_g;
  Spectrogram grad_y;
  deep_filter_backward(cache.g, cache.y, grad_s, grad_g, grad_y);
  FeatureMap grad_out = df_to_map_grad(grad_g);
  core_.backward(cache.core, grad_out);
}

// ---- Two stage ----

TwoStageConfig TwoStageConfig::desk_default(uint64_t init_seed) {
  TwoStageConfig cfg;
  cfg.daec.in_channels = 4;
  cfg.daec.out_mode = OutMode::kDirectSpectrum;
  cfg.daec.bridge_input = false;
  cfg.daec.init_seed = derive_seed(init_seed, 1);
  cfg.nres.in_channels = 4;
  cfg.nres.out_mode = OutMode::kDeepFilter;
  cfg.nres.bridge_input = true;
  cfg.nres.init_seed = derive_seed(init_seed, 2);
  return cfg;
}

void TwoStageConfig::validate() const {
  daec.validate();
  nres.validate();
  require(daec.out_mode == OutMode::kDirectSpectrum,
          "first stage must emit a direct spectrum");
  require(!daec.bridge_input, "first stage takes no bridge input");
  require(daec.in_channels == 4, "first stage expects mic + far RI channels");
  require(nres.out_mode == OutMode::kDeepFilter, "second stage must emit a deep filter");
  require(nres.bridge_input, "second stage consumes the bridge features");
  require(nres.in_channels == 4, "second stage expects error + echo-estimate RI channels");
  require(daec.n_bins == nres.n_bins, "stages must share the bin count");
  require(compress_exp > 0.0 && compress_exp <= 1.0, "compression exponent out of range");
}

std::string TwoStageConfig::to_text() const {
  std::ostringstream os;
  os << "compress_exp=" << compress_exp << "\n";
  std::istringstream d(daec.to_text());
  std::string line;
  while (std::getline(d, line)) os << "daec." << line << "\n";
  std::istringstream n(nres.to_text());
  while (std::getline(n, line)) os << "nres." << line << "\n";
  return os.str();
}

TwoStageConfig TwoStageConfig::from_text(const std::string& text) {
  TwoStageConfig cfg;
  std::istringstream is(text);
  std::string line, daec_text, nres_text;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("daec.", 0) == 0) {
      daec_text += line.substr(5) + "\n";
    } else if (line.rfind("nres.", 0) == 0) {
      nres_text += line.substr(5) + "\n";
    } else if (line.rfind("compress_exp=", 0) == 0) {
      cfg.compress_exp = std::stod(line.substr(13));
    } else {
      throw ConfigError("unknown two-stage config line: " + line);
    }
  }
  cfg.daec = CruseConfig::from_text(daec_text);
  cfg.nres = CruseConfig::from_text(nres_text);
  cfg.validate();
  return cfg;
}

TwoStageModel::TwoStageModel(const TwoStageConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  daec_ = CruseModel(cfg_.daec);
  nres_ = CruseModel(cfg_.nres);
  Rng rng(derive_seed(cfg_.daec.init_seed ^ cfg_.nres.init_seed, 3));
  bridge_ = Conv1x1(cfg_.daec.encoder_channels[3], cfg_.nres.encoder_channels[3], rng);
}

TwoStageOut TwoStageModel::forward(const Spectrogram& y, const Spectrogram& u_aligned,
                                   TwoStageCache& cache) const {
  require(y.same_shape(u_aligned), "mic/far spectra must share a shape");
  const double c = cfg_.compress_exp;
  cache.y = y;

  const Spectrogram y_c = compress(y, c);
  const Spectrogram u_c = compress(u_aligned, c);
  cache.daec_in = pack_spectra({&y_c, &u_c});
  FeatureMap daec_out = daec_.forward(cache.daec_in, nullptr, cache.daec);
  cache.d_hat_c = map_to_spectrogram(daec_out, 0, 1, y.config);

  cache.e = subtract_echo(y, cache.d_hat_c, c);
  cache.e_c = compress(cache.e, c);
  cache.nres_in = pack_spectra({&cache.e_c, &cache.d_hat_c});
  cache.bridge_out = bridge_.forward(cache.daec.enc_act[3]);
  FeatureMap nres_out = nres_.forward(cache.nres_in, &cache.bridge_out, cache.nres);
  cache.g = map_to_df(nres_out, cfg_.nres.df_neighbors, cfg_.nres.df_past);
  cache.s_hat = apply_deep_filter(cache.g, cache.e);

  TwoStageOut r;
  r.d_hat_c = cache.d_hat_c;
  r.e = cache.e;
  r.g = cache.g;
  r.s_hat = cache.s_hat;
  r.s_hat_time = istft(cache.s_hat, y.config);
  return r;
}

void TwoStageModel::backward(const TwoStageCache& cache,
                             const std::vector<double>& grad_s_time,
                             const Spectrogram* grad_d_hat_extra) {
  const double c = cfg_.compress_exp;

  // Output chain: samples -> S_hat -> (G, E).
  Spectrogram grad_s = istft_adjoint(grad_s_time, cache.s_hat.n_frames, cache.y.config);
  DeepFilterCoeffs grad_g;
  Spectrogram grad_e;
  deep_filter_backward(cache.g, cache.e, grad_s, grad_g, grad_e);

  // Second stage.
  FeatureMap g_nres_out = df_to_map_grad(grad_g);
  FeatureMap g_bridge_out;
  FeatureMap g_nres_in = nres_.backward(cache.nres, g_nres_out, &g_bridge_out);
  FeatureMap g_daec_enc4 = bridge_.backward(cache.daec.enc_act[3], g_bridge_out);

  // NRES input channels: 0/1 = compressed error, 2/3 = compressed echo est.
  Spectrogram g_e_c = map_to_spectrogram(g_nres_in, 0, 1, cache.y.config);
  Spectrogram g_d_hat_c = map_to_spectrogram(g_nres_in, 2, 3, cache.y.config);

  // E feeds the deep filter directly and via its compressed copy.
  Spectrogram g_e_from_compress;
  compress_backward(cache.e, g_e_c, c, g_e_from_compress);
  add_spec(grad_e, g_e_from_compress);

  // E = Y - decompress(D_hat_c): echo estimate sees the negated error grad.
  Spectrogram neg_e = grad_e;
  for (cpx& v : neg_e.data) v = -v;
  Spectrogram g_d_from_sub;
  decompress_backward(cache.d_hat_c, neg_e, c, g_d_from_sub);
  add_spec(g_d_hat_c, g_d_from_sub);
  if (grad_d_hat_extra != nullptr) add_spec(g_d_hat_c, *grad_d_hat_extra);

  // First stage, with the bridge gradient reinjected at its encoder tail.
  FeatureMap g_daec_out = spectrogram_to_map_grad(g_d_hat_c);
  daec_.backward(cache.daec, g_daec_out, nullptr, &g_daec_enc4);
}

std::vector<NamedParam> TwoStageModel::params() {
  std::vector<NamedParam> out;
  for (NamedParam p : daec_.params()) out.push_back({"daec." + p.name, p.tensor});
  for (NamedParam p : nres_.params()) out.push_back({"nres." + p.name, p.tensor});
  bridge_.collect("bridge", out);
  return out;
}

void TwoStageModel::zero_grad() {
  for (NamedParam& p : params()) p.tensor->zero_grad();
}

// ---- Checkpoints ----

void save_single_stage(const std::string& path, SingleStageModel& model) {
  save_cruse(path, model.core(), "single_stage");
}

SingleStageModel load_single_stage(const std::string& path) {
  return SingleStageModel(load_cruse(path, "single_stage"));
}

void save_two_stage(const std::string& path, TwoStageModel& model) {
  const std::string header =
      std::string(kKindKey) + "two_stage\n" + model.config().to_text();
  save_checkpoint(path, header, model.params());
}

TwoStageModel load_two_stage(const std::string& path) {
  const std::string kind = checkpoint_kind(path);
  if (kind != "two_stage")
    throw IoError("checkpoint " + path + " holds a '" + kind +
                  "' model, expected 'two_stage'");
  std::string header = read_checkpoint_config(path);
  header = header.substr(header.find('\n') + 1);
  TwoStageModel model(TwoStageConfig::from_text(header));
  load_checkpoint_params(path, model.params());
  return model;
}

}  // namespace daec
