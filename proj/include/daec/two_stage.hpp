#pragma once

#include <string>
#include <vector>

#include "daec/cruse.hpp"
#include "daec/spectral.hpp"

namespace daec {

// ---- Single-stage canceller ----
// One U-net sees compressed mic + aligned far-end spectra (4 channels) and
// emits deep-filter coefficients applied to the linear mic spectrum.

struct SingleStageCache {
  CruseCache core;
  FeatureMap in;
  Spectrogram y;
  DeepFilterCoeffs g;
  Spectrogram s_hat;
};

struct SingleStageOut {
  DeepFilterCoeffs g;
  Spectrogram s_hat;
  std::vector<double> s_hat_time;
};

class SingleStageModel {
 public:
  SingleStageModel() = default;
  explicit SingleStageModel(const CruseConfig& cfg);
  explicit SingleStageModel(CruseModel core) : core_(std::move(core)) {}

  SingleStageOut forward(const Spectrogram& y, const Spectrogram& u_aligned,
                         double compress_exp, SingleStageCache& cache) const;
  void backward(const SingleStageCache& cache, const std::vector<double>& grad_s_time,
                double compress_exp);

  std::vector<NamedParam> params() { return core_.params(); }
  void zero_grad() { core_.zero_grad(); }
  CruseModel& core() { return core_; }
  const CruseModel& core() const { return core_; }

 private:
  CruseModel core_;
};

CruseConfig single_stage_desk_config(uint64_t init_seed);

// ---- Two-stage canceller + suppressor ----

struct TwoStageConfig {
  CruseConfig daec;  // direct_spectrum head, estimates the compressed echo
  CruseConfig nres;  // deep_filter head, consumes E and the echo estimate
  double compress_exp = 0.3;

  static TwoStageConfig desk_default(uint64_t init_seed);
  void validate() const;
  std::string to_text() const;
  static TwoStageConfig from_text(const std::string& text);
};

struct TwoStageCache {
  CruseCache daec, nres;
  FeatureMap daec_in, nres_in;
  FeatureMap bridge_out;
  Spectrogram y;          // linear mic spectrum
  Spectrogram d_hat_c;    // compressed echo estimate
  Spectrogram e;          // linear error spectrum
  Spectrogram e_c;        // compressed error spectrum
  DeepFilterCoeffs g;
  Spectrogram s_hat;
};

struct TwoStageOut {
  Spectrogram d_hat_c;
  Spectrogram e;
  DeepFilterCoeffs g;
  Spectrogram s_hat;
  std::vector<double> s_hat_time;
};

class TwoStageModel {
 public:
  TwoStageModel() = default;
  explicit TwoStageModel(const TwoStageConfig& cfg);

  TwoStageOut forward(const Spectrogram& y, const Spectrogram& u_aligned,
                      TwoStageCache& cache) const;

  // grad_s_time: gradient w.r.t. the output samples. grad_d_hat_extra, when
  // given, is an additional gradient w.r.t. the compressed echo estimate
  // (the echo-loss path). Accumulates into parameter gradients.
  void backward(const TwoStageCache& cache, const std::vector<double>& grad_s_time,
                const Spectrogram* grad_d_hat_extra);

  std::vector<NamedParam> params();  // names prefixed daec. / nres. / bridge.
  void zero_grad();
  const TwoStageConfig& config() const { return cfg_; }
  CruseModel& daec() { return daec_; }
  CruseModel& nres() { return nres_; }
  Conv1x1& bridge() { return bridge_; }

 private:
  TwoStageConfig cfg_;
  CruseModel daec_, nres_;
  Conv1x1 bridge_;
};

// Checkpoint wrappers; headers are tagged "model=single_stage" /
// "model=two_stage" for dispatch.
void save_single_stage(const std::string& path, SingleStageModel& model);
SingleStageModel load_single_stage(const std::string& path);
void save_two_stage(const std::string& path, TwoStageModel& model);
TwoStageModel load_two_stage(const std::string& path);

}  // namespace daec
