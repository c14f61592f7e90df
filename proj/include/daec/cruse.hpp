#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "daec/layers.hpp"
#include "daec/spectral.hpp"
#include "daec/tensor.hpp"

namespace daec {

enum class OutMode { kDeepFilter, kDirectSpectrum };

// Causal U-net over compressed spectra: 4 conv encoder layers (kernel (2,3),
// stride (1,2) in freq), a grouped-GRU bottleneck, and a mirrored
// transposed-conv decoder with per-level 1x1-conv skip connections added to
// each decoder layer input.
struct CruseConfig {
  int in_channels = 4;
  int n_bins = 161;
  std::array<int, 4> encoder_channels = {8, 16, 16, 16};
  int gru_groups = 4;
  OutMode out_mode = OutMode::kDeepFilter;
  int df_neighbors = 1;  // freq taps each side of the center bin
  int df_past = 2;       // past frames per tap on top of the current one
  // When set, the bottleneck expects a second feature map (same shape as the
  // final encoder output) concatenated group-wise before the GRU.
  bool bridge_input = false;
  uint64_t init_seed = 1;

  int out_channels() const {
    return out_mode == OutMode::kDeepFilter
               ? 2 * (2 * df_neighbors + 1) * (df_past + 1)
               : 2;
  }
  // Freq bin count entering each level; index 4 is the bottleneck width.
  // Each stride-2 level maps f -> (f-1)/2 + 1, which mirrors exactly back
  // through fout = 2*fin - 1 as long as every size stays odd; validate()
  // enforces n_bins = 16m + 1 so all five sizes are odd and no crop is ever
  // needed.
  std::array<int, 5> freq_sizes() const;
  int bottleneck_width() const;  // encoder_channels[3] * freq_sizes()[4]
  int gru_in_size() const { return (bridge_input ? 2 : 1) * bottleneck_width(); }

  void validate() const;
  std::string to_text() const;
  static CruseConfig from_text(const std::string& text);
  bool operator==(const CruseConfig& o) const = default;
};

struct CruseCache {
  FeatureMap x;
  std::array<FeatureMap, 4> enc_pre;  // conv outputs before activation
  std::array<FeatureMap, 4> enc_act;  // after activation (skip sources)
  FeatureMap concat_in;               // GRU input map (with bridge interleave)
  GroupedGru::Cache gru;
  FeatureMap gru_out_map;
  std::array<FeatureMap, 4> dec_in;   // decoder inputs after skip addition
  std::array<FeatureMap, 3> dec_pre;  // pre-activation of dec_[3..1] outputs
};

class CruseModel {
 public:
  CruseModel() = default;
  explicit CruseModel(const CruseConfig& cfg);

  // x: [in_channels][T][n_bins]. bottleneck_extra must be present iff the
  // config declares bridge_input, shaped like the final encoder output.
  FeatureMap forward(const FeatureMap& x, const FeatureMap* bottleneck_extra,
                     CruseCache& cache) const;

  // grad_out: gradient w.r.t. the forward output. Accumulates parameter
  // gradients and returns the gradient w.r.t. x. grad_extra (required iff
  // bridge_input) receives the gradient w.r.t. the bottleneck extra input.
  // inject_bottleneck, when given, is an extra gradient added to the final
  // encoder activation (the path a downstream bridge tap feeds back).
  FeatureMap backward(const CruseCache& cache, const FeatureMap& grad_out,
                      FeatureMap* grad_extra = nullptr,
                      const FeatureMap* inject_bottleneck = nullptr);

  std::vector<NamedParam> params();
  size_t param_count() const;
  void zero_grad();
  const CruseConfig& config() const { return cfg_; }

 private:
  CruseConfig cfg_;
  std::array<Conv2dCausal, 4> enc_;
  std::array<Conv1x1, 4> skip_;
  GroupedGru gru_;
  // dec_[3] consumes the bottleneck; dec_[0] is the linear output head.
  std::array<ConvT2dCausal, 4> dec_;
};

// ---- Spectrogram <-> FeatureMap plumbing ----

// Channels 2i / 2i+1 become the real / imaginary parts of specs[i].
FeatureMap pack_spectra(const std::vector<const Spectrogram*>& specs);
// Reads channel pair (ch_re, ch_im) back into a complex spectrogram.
Spectrogram map_to_spectrogram(const FeatureMap& m, int ch_re, int ch_im,
                               const WindowConfig& cfg);
// Gradient of map_to_spectrogram's inverse: packs a complex gradient as a
// 2-channel map.
FeatureMap spectrogram_to_map_grad(const Spectrogram& g);

// Deep-filter head layout: channel 2*(kappa_idx*(L+1) + ell) + {0 re, 1 im}.
DeepFilterCoeffs map_to_df(const FeatureMap& m, int k_neighbors, int l_past);
FeatureMap df_to_map_grad(const DeepFilterCoeffs& g);

}  // namespace daec
