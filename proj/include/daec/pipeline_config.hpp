#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "daec/delay_align.hpp"
#include "daec/linaec.hpp"
#include "daec/scene_gen.hpp"
#include "daec/trainer.hpp"
#include "daec/two_stage.hpp"

namespace daec {

// One flat, namespaced key=value configuration covering every module, read
// from a text file ('#' comments, blank lines allowed) and overridable from
// the command line. Unknown keys are rejected. The canonical text rendering
// defines the config hash stamped into artifact provenance.

struct PipelineConfig {
  uint64_t seed = 1;
  CorpusSpec corpus;
  SceneConfig scene;
  MscConfig msc;
  LinAecConfig linaec;
  TrainConfig train;

  // Model construction (desk preset with size overrides). Encoder widths are
  // {base, 2*base, 2*base, 2*base}; n_bins must stay of the 16m+1 family.
  std::string model_variant = "two_stage";  // "two_stage" | "single"
  int model_n_bins = 161;
  int model_base_channels = 8;
  int model_gru_groups = 4;
  double model_compress_exp = 0.3;
  uint64_t model_init_seed = 1;

  static PipelineConfig from_file(const std::string& path);
  // Applies one "key=value" assignment; throws ConfigError on unknown keys
  // or malformed values.
  void apply(const std::string& assignment);

  std::string to_text() const;
  uint64_t hash() const;
  void validate() const;

  // Derived pieces the subcommands consume.
  WindowConfig processing_cfg() const;  // sqrt-Hann, window 2*(n_bins-1)
  TwoStageConfig two_stage_config() const;
  CruseConfig single_config() const;
  // train with the global seed and the processing-window-consistent loss
  // analysis applied.
  TrainConfig train_config() const;

  // One line per key: "name (type, default ...)"; backs --help.
  static std::string describe_keys();
};

}  // namespace daec
