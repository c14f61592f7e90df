#include "daec/cruse.hpp"

#include <sstream>

namespace daec {

std::array<int, 5> CruseConfig::freq_sizes() const {
  std::array<int, 5> f{};
  f[0] = n_bins;
  for (int i = 0; i < 4; ++i) f[i + 1] = Conv2dCausal::out_freq(f[i]);
  return f;
}

int CruseConfig::bottleneck_width() const {
  return encoder_channels[3] * freq_sizes()[4];
}

void CruseConfig::validate() const {
  require(in_channels > 0, "in_channels must be positive");
  require(n_bins > 1 && (n_bins - 1) % 16 == 0,
          "n_bins must be 16m+1 so the four stride-2 levels mirror exactly");
  for (int c : encoder_channels) require(c > 0, "encoder channels must be positive");
  require(gru_groups > 0, "gru_groups must be positive");
  require(encoder_channels[3] % gru_groups == 0,
          "gru_groups must divide the final encoder channel count");
  if (out_mode == OutMode::kDeepFilter) {
    require(df_neighbors >= 0 && df_past >= 0, "deep filter taps must be nonnegative");
  }
}

std::string CruseConfig::to_text() const {
  std::ostringstream os;
  os << "in_channels=" << in_channels << "\n";
  os << "n_bins=" << n_bins << "\n";
  os << "encoder_channels=" << encoder_channels[0] << "," << encoder_channels[1] << ","
     << encoder_channels[2] << "," << encoder_channels[3] << "\n";
  os << "gru_groups=" << gru_groups << "\n";
  os << "out_mode=" << (out_mode == OutMode::kDeepFilter ? "deep_filter" : "direct_spectrum")
     << "\n";
  os << "df_neighbors=" << df_neighbors << "\n";
  os << "df_past=" << df_past << "\n";
  os << "bridge_input=" << (bridge_input ? 1 : 0) << "\n";
  return os.str();
}

CruseConfig CruseConfig::from_text(const std::string& text) {
  CruseConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    require(eq != std::string::npos, "malformed model config line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "in_channels") {
      cfg.in_channels = std::stoi(val);
    } else if (key == "n_bins") {
      cfg.n_bins = std::stoi(val);
    } else if (key == "encoder_channels") {
      std::istringstream vs(val);
      std::string tok;
      int i = 0;
      while (std::getline(vs, tok, ',')) {
        require(i < 4, "encoder_channels expects 4 entries");
        cfg.encoder_channels[i++] = std::stoi(tok);
      }
      require(i == 4, "encoder_channels expects 4 entries");
    } else if (key == "gru_groups") {
      cfg.gru_groups = std::stoi(val);
    } else if (key == "out_mode") {
      if (val == "deep_filter") {
        cfg.out_mode = OutMode::kDeepFilter;
      } else if (val == "direct_spectrum") {
        cfg.out_mode = OutMode::kDirectSpectrum;
      } else {
        throw ConfigError("unknown out_mode: " + val);
      }
    } else if (key == "df_neighbors") {
      cfg.df_neighbors = std::stoi(val);
    } else if (key == "df_past") {
      cfg.df_past = std::stoi(val);
    } else if (key == "bridge_input") {
      cfg.bridge_input = std::stoi(val) != 0;
    } else {
      throw ConfigError("unknown model config key: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

CruseModel::CruseModel(const CruseConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(cfg_.init_seed);
  const auto& ec = cfg_.encoder_channels;
  enc_[0] = Conv2dCausal(cfg_.in_channels, ec[0], rng);
  enc_[1] = Conv2dCausal(ec[0], ec[1], rng);
  enc_[2] = Conv2dCausal(ec[1], ec[2], rng);
  enc_[3] = Conv2dCausal(ec[2], ec[3], rng);
  for (int i = 0; i < 4; ++i) skip_[i] = Conv1x1(ec[i], ec[i], rng);
  gru_ = GroupedGru(cfg_.gru_in_size(), cfg_.bottleneck_width(), cfg_.gru_groups, rng);
  dec_[3] = ConvT2dCausal(ec[3], ec[2], rng);
  dec_[2] = ConvT2dCausal(ec[2], ec[1], rng);
  dec_[1] = ConvT2dCausal(ec[1], ec[0], rng);
  dec_[0] = ConvT2dCausal(ec[0], cfg_.out_channels(), rng);
}

namespace {

// Group-wise channel interleave puts each group's encoder block next to its
// bridge block so every GRU group sees both streams:
// [enc g-chunk | extra g-chunk] per group.
FeatureMap interleave_groups(const FeatureMap& enc, const FeatureMap& extra, int groups) {
  require(enc.same_shape(extra), "bridge features must match the encoder output shape");
  require(enc.c % groups == 0, "group count must divide channels");
  const int gc = enc.c / groups;
  FeatureMap out(2 * enc.c, enc.t, enc.f);
  for (int g = 0; g < groups; ++g) {
    for (int i = 0; i < gc; ++i) {
      const int src = g * gc + i;
      for (int t = 0; t < enc.t; ++t)
        for (int f = 0; f < enc.f; ++f) {
          out.at(g * 2 * gc + i, t, f) = enc.at(src, t, f);
          out.at(g * 2 * gc + gc + i, t, f) = extra.at(src, t, f);
        }
    }
  }
  return out;
}

void deinterleave_groups(const FeatureMap& g_concat, int groups, FeatureMap& g_enc,
                         FeatureMap& g_extra) {
  const int gc = g_enc.c / groups;
  for (int g = 0; g < groups; ++g) {
    for (int i = 0; i < gc; ++i) {
      const int dst = g * gc + i;
      for (int t = 0; t < g_enc.t; ++t)
        for (int f = 0; f < g_enc.f; ++f) {
          g_enc.at(dst, t, f) += g_concat.at(g * 2 * gc + i, t, f);
          g_extra.at(dst, t, f) += g_concat.at(g * 2 * gc + gc + i, t, f);
        }
    }
  }
}

std::vector<double> flatten_frames(const FeatureMap& m) {
  const int width = m.c * m.f;
  std::vector<double> flat(static_cast<size_t>(m.t) * width);
  for (int c = 0; c < m.c; ++c)
    for (int t = 0; t < m.t; ++t)
      for (int f = 0; f < m.f; ++f)
        flat[static_cast<size_t>(t) * width + c * m.f + f] = m.at(c, t, f);
  return flat;
}

FeatureMap unflatten_frames(const std::vector<double>& flat, int c, int t, int f) {
  FeatureMap m(c, t, f);
  const int width = c * f;
  for (int ci = 0; ci < c; ++ci)
    for (int ti = 0; ti < t; ++ti)
      for (int fi = 0; fi < f; ++fi)
        m.at(ci, ti, fi) = flat[static_cast<size_t>(ti) * width + ci * f + fi];
  return m;
}

}  // namespace

FeatureMap CruseModel::forward(const FeatureMap& x, const FeatureMap* bottleneck_extra,
                               CruseCache& cache) const {
  require(x.c == cfg_.in_channels, "model input channel mismatch");
  require(x.f == cfg_.n_bins, "model input freq-bin mismatch");
  require(x.t >= 1, "model input needs at least one frame");
  require((bottleneck_extra != nullptr) == cfg_.bridge_input,
          "bottleneck extra input must be present exactly when bridge_input is set");

  cache.x = x;
  const FeatureMap* cur = &cache.x;
  for (int i = 0; i < 4; ++i) {
    cache.enc_pre[i] = enc_[i].forward(*cur);
    cache.enc_act[i] = leaky_relu(cache.enc_pre[i]);
    cur = &cache.enc_act[i];
  }

  const FeatureMap& e4 = cache.enc_act[3];
  if (cfg_.bridge_input) {
    cache.concat_in = interleave_groups(e4, *bottleneck_extra, cfg_.gru_groups);
  } else {
    cache.concat_in = e4;
  }

  std::vector<double> flat = flatten_frames(cache.concat_in);
  std::vector<double> gru_out = gru_.forward(flat, x.t, cache.gru);
  cache.gru_out_map = unflatten_frames(gru_out, e4.c, x.t, e4.f);

  FeatureMap upstream = cache.gru_out_map;
  FeatureMap out;
  for (int i = 3; i >= 0; --i) {
    FeatureMap skip = skip_[i].forward(cache.enc_act[i]);
    require(skip.same_shape(upstream), "decoder/skip shape mismatch");
    cache.dec_in[i] = std::move(upstream);
    for (size_t j = 0; j < skip.v.size(); ++j) cache.dec_in[i].v[j] += skip.v[j];
    if (i > 0) {
      cache.dec_pre[i - 1] = dec_[i].forward(cache.dec_in[i]);
      upstream = leaky_relu(cache.dec_pre[i - 1]);
    } else {
      out = dec_[0].forward(cache.dec_in[0]);
    }
  }
  out.check_finite("model output");
  return out;
}

FeatureMap CruseModel::backward(const CruseCache& cache, const FeatureMap& grad_out,
                                FeatureMap* grad_extra,
                                const FeatureMap* inject_bottleneck) {
  require((grad_extra != nullptr) == cfg_.bridge_input,
          "grad_extra must be given exactly when bridge_input is set");

  std::array<FeatureMap, 4> g_enc_act;
  for (int i = 0; i < 4; ++i)
    g_enc_act[i] = FeatureMap(cache.enc_act[i].c, cache.enc_act[i].t, cache.enc_act[i].f);

  // Decoder chain, output head first.
  FeatureMap g = grad_out;
  FeatureMap g_bottleneck;  // grad w.r.t. gru_out_map
  for (int i = 0; i <= 3; ++i) {
    FeatureMap g_in = dec_[i].backward(cache.dec_in[i], g);
    // dec input = upstream feature + skip(enc_act[i]); both receive g_in.
    FeatureMap g_skip_src = skip_[i].backward(cache.enc_act[i], g_in);
    for (size_t j = 0; j < g_skip_src.v.size(); ++j) g_enc_act[i].v[j] += g_skip_src.v[j];
    if (i < 3) {
      g = leaky_relu_backward(cache.dec_pre[i], g_in);
    } else {
      g_bottleneck = g_in;
    }
  }

  // Bottleneck GRU.
  std::vector<double> g_flat = flatten_frames(g_bottleneck);
  std::vector<double> g_gru_in = gru_.backward(cache.gru, g_flat);
  FeatureMap g_concat = unflatten_frames(g_gru_in, cache.concat_in.c, cache.concat_in.t,
                                         cache.concat_in.f);
  if (cfg_.bridge_input) {
    *grad_extra = FeatureMap(cache.enc_act[3].c, cache.enc_act[3].t, cache.enc_act[3].f);
    deinterleave_groups(g_concat, cfg_.gru_groups, g_enc_act[3], *grad_extra);
  } else {
    for (size_t j = 0; j < g_concat.v.size(); ++j) g_enc_act[3].v[j] += g_concat.v[j];
  }
  if (inject_bottleneck != nullptr) {
    require(inject_bottleneck->same_shape(g_enc_act[3]),
            "injected bottleneck gradient shape mismatch");
    for (size_t j = 0; j < g_enc_act[3].v.size(); ++j)
      g_enc_act[3].v[j] += inject_bottleneck->v[j];
  }

  // Encoder chain, deepest first.
  for (int i = 3; i >= 0; --i) {
    FeatureMap g_pre = leaky_relu_backward(cache.enc_pre[i], g_enc_act[i]);
    const FeatureMap& input = (i == 0) ? cache.x : cache.enc_act[i - 1];
    FeatureMap g_below = enc_[i].backward(input, g_pre);
    if (i == 0) return g_below;
    for (size_t j = 0; j < g_below.v.size(); ++j) g_enc_act[i - 1].v[j] += g_below.v[j];
  }
  return {};
}

std::vector<NamedParam> CruseModel::params() {
  std::vector<NamedParam> out;
  for (int i = 0; i < 4; ++i) enc_[i].collect("enc" + std::to_string(i), out);
  for (int i = 0; i < 4; ++i) skip_[i].collect("skip" + std::to_string(i), out);
  gru_.collect("gru", out);
  for (int i = 3; i >= 0; --i) dec_[i].collect("dec" + std::to_string(i), out);
  return out;
}

size_t CruseModel::param_count() const {
  size_t n = 0;
  auto& self = const_cast<CruseModel&>(*this);
  for (const NamedParam& p : self.params()) n += p.tensor->size();
  return n;
}

void CruseModel::zero_grad() {
  for (NamedParam& p : params()) p.tensor->zero_grad();
}

FeatureMap pack_spectra(const std::vector<const Spectrogram*>& specs) {
  require(!specs.empty(), "pack_spectra needs at least one spectrogram");
  const int t = specs[0]->n_frames;
  const int f = specs[0]->n_bins;
  for (const Spectrogram* s : specs)
    require(s->n_frames == t && s->n_bins == f, "pack_spectra shape mismatch");
  FeatureMap m(2 * static_cast<int>(specs.size()), t, f);
  for (size_t i = 0; i < specs.size(); ++i) {
    for (int ti = 0; ti < t; ++ti)
      for (int fi = 0; fi < f; ++fi) {
        const cpx v = specs[i]->at(ti, fi);
        m.at(2 * static_cast<int>(i), ti, fi) = v.real();
        m.at(2 * static_cast<int>(i) + 1, ti, fi) = v.imag();
      }
  }
  return m;
}

Spectrogram map_to_spectrogram(const FeatureMap& m, int ch_re, int ch_im,
                               const WindowConfig& cfg) {
  require(ch_re >= 0 && ch_im >= 0 && ch_re < m.c && ch_im < m.c,
          "map_to_spectrogram channel out of range");
  Spectrogram s(m.t, m.f, cfg);
  for (int t = 0; t < m.t; ++t)
    for (int f = 0; f < m.f; ++f) s.at(t, f) = cpx(m.at(ch_re, t, f), m.at(ch_im, t, f));
  return s;
}

FeatureMap spectrogram_to_map_grad(const Spectrogram& g) {
  FeatureMap m(2, g.n_frames, g.n_bins);
  for (int t = 0; t < g.n_frames; ++t)
    for (int f = 0; f < g.n_bins; ++f) {
      m.at(0, t, f) = g.at(t, f).real();
      m.at(1, t, f) = g.at(t, f).imag();
    }
  return m;
}

DeepFilterCoeffs map_to_df(const FeatureMap& m, int k_neighbors, int l_past) {
  const int taps = (2 * k_neighbors + 1) * (l_past + 1);
  require(m.c == 2 * taps, "deep filter head channel count mismatch");
  DeepFilterCoeffs g(m.t, m.f, k_neighbors, l_past);
  for (int t = 0; t < m.t; ++t)
    for (int f = 0; f < m.f; ++f)
      for (int kappa = 0; kappa < 2 * k_neighbors + 1; ++kappa)
        for (int ell = 0; ell <= l_past; ++ell) {
          const int tap = kappa * (l_past + 1) + ell;
          g.at(t, f, kappa, ell) =
              cpx(m.at(2 * tap, t, f), m.at(2 * tap + 1, t, f));
        }
  return g;
}

FeatureMap df_to_map_grad(const DeepFilterCoeffs& g) {
  const int taps = g.taps_per_bin();
  FeatureMap m(2 * taps, g.n_frames, g.n_bins);
  for (int t = 0; t < g.n_frames; ++t)
    for (int f = 0; f < g.n_bins; ++f)
      for (int kappa = 0; kappa < 2 * g.k_neighbors + 1; ++kappa)
        for (int ell = 0; ell <= g.l_past; ++ell) {
          const int tap = kappa * (g.l_past + 1) + ell;
          const cpx v = g.at(t, f, kappa, ell);
          m.at(2 * tap, t, f) = v.real();
          m.at(2 * tap + 1, t, f) = v.imag();
        }
  return m;
}

}  // namespace daec
