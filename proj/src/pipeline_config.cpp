#include "daec/pipeline_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "daec/error.hpp"

namespace daec {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// One configuration key: how to parse an assignment into the bound field
// and how to render the field canonically.
struct Binding {
  std::string key;
  std::string type;  // for the --help key listing
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

long long parse_int(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": not an integer: '" + v + "'");
  }
  if (pos != v.size())
    throw ConfigError("key " + key + ": not an integer: '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": not a number: '" + v + "'");
  }
  if (pos != v.size())
    throw ConfigError("key " + key + ": not a number: '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key " + key + ": not a boolean: '" + v + "'");
}

class Bindings {
 public:
  explicit Bindings(PipelineConfig& c) {
    add_u64("seed", c.seed);

    add_int("corpus.sample_rate_hz", c.corpus.sample_rate_hz);
    add_int("corpus.n_speech", c.corpus.n_speech);
    add_int("corpus.n_noise", c.corpus.n_noise);
    add_int("corpus.n_music", c.corpus.n_music);
    add_double("corpus.clip_min_s", c.corpus.clip_min_s);
    add_double("corpus.clip_max_s", c.corpus.clip_max_s);

    add_int("scene.sample_rate_hz", c.scene.sample_rate_hz);
    add_double("scene.duration_s", c.scene.duration_s);
    add_double("scene.snr_mean_db", c.scene.snr_db_dist.mean);
    add_double("scene.snr_std_db", c.scene.snr_db_dist.stddev);
    add_double("scene.ser_mean_db", c.scene.ser_db_dist.mean);
    add_double("scene.ser_std_db", c.scene.ser_db_dist.stddev);
    add_double("scene.mic_level_mean_dbfs", c.scene.mic_level_dbfs_dist.mean);
    add_double("scene.mic_level_std_dbfs", c.scene.mic_level_dbfs_dist.stddev);
    add_double("scene.early_boundary_ms", c.scene.early_boundary_ms);
    add_double("scene.silence_min_s", c.scene.silence_min_s);
    add_double("scene.silence_max_s", c.scene.silence_max_s);
    add_double("scene.dropout_prob", c.scene.dropout_prob);
    add_double("scene.clockdrift_prob", c.scene.clockdrift_prob);
    add_double("scene.clockdrift_std_sps", c.scene.clockdrift_std_sps);
    add_double("scene.clip_prob", c.scene.clip_prob);
    add_double("scene.pathchange_prob", c.scene.pathchange_prob);
    add_int("scene.max_pathchanges", c.scene.max_pathchanges);
    add_double("scene.echo_delay_max_s", c.scene.echo_delay_max_s);
    add_double("scene.direct_gain_mean_db", c.scene.direct_gain_db_dist.mean);
    add_double("scene.direct_gain_std_db", c.scene.direct_gain_db_dist.stddev);
    add_double("scene.t60_match_ms", c.scene.t60_match_ms);
    add_double("scene.spectral_aug_prob", c.scene.spectral_aug_prob);
    add_double("scene.pitch_aug_prob", c.scene.pitch_aug_prob);
    add_double("scene.doubletalk_prob", c.scene.doubletalk_prob);
    add_double("scene.farend_only_prob", c.scene.farend_only_prob);
    add_double("scene.farend_noise_prob", c.scene.farend_noise_prob);
    add_double("scene.t60_min_ms", c.scene.t60_min_ms);
    add_double("scene.t60_max_ms", c.scene.t60_max_ms);

    add_double("msc.search_window_s", c.msc.search_window_s);
    add_double("msc.smoothing_coeff", c.msc.smoothing_coeff);
    add_int("msc.max_delay_frames", c.msc.max_delay_frames);
    add_double("msc.eps", c.msc.eps);

    add_int("linaec.window_ms", c.linaec.window_ms);
    add_double("linaec.overlap", c.linaec.overlap);
    add_int("linaec.filter_len_ms", c.linaec.filter_len_ms);
    add_double("linaec.step_size", c.linaec.step_size);
    add_double("linaec.regularization", c.linaec.regularization);
    add_double("linaec.dtd_floor", c.linaec.dtd_floor);
    add_int("linaec.sample_rate_hz", c.linaec.sample_rate_hz);

    add_int("train.batch_size", c.train.batch_size);
    add_int("train.epochs", c.train.epochs);
    add_int("train.sequences_per_epoch", c.train.sequences_per_epoch);
    add_double("train.lr_init", c.train.lr_init);
    add_double("train.lr_drop_factor", c.train.lr_drop_factor);
    add_int("train.lr_patience_epochs", c.train.lr_patience_epochs);
    add_enum("train.gamma_mode", c.train.gamma_mode,
             {{GammaMode::kAdaptive, "adaptive"}, {GammaMode::kFixed, "fixed"}});
    add_double("train.fixed_gamma", c.train.fixed_gamma);
    add_enum("train.pretrain_mode", c.train.pretrain_mode,
             {{PretrainMode::kNone, "none"},
              {PretrainMode::kDaecFirst, "daec_first"}});
    add_int("train.pretrain_epochs", c.train.pretrain_epochs);
    add_double("train.grad_clip_norm", c.train.grad_clip_norm);
    add_double("train.crop_seconds", c.train.crop_seconds);
    add_double("train.adam_beta1", c.train.adam_beta1);
    add_double("train.adam_beta2", c.train.adam_beta2);
    add_double("train.adam_eps", c.train.adam_eps);

    add_double("loss.alpha", c.train.weights.alpha);
    add_double("loss.beta", c.train.weights.beta);
    add_double("loss.gamma_min", c.train.weights.gamma_min);
    add_double("loss.eta", c.train.weights.eta);
    add_double("loss.compress_exp", c.train.weights.c);

    add_string("model.variant", c.model_variant);
    add_int("model.n_bins", c.model_n_bins);
    add_int("model.base_channels", c.model_base_channels);
    add_int("model.gru_groups", c.model_gru_groups);
    add_double("model.compress_exp", c.model_compress_exp);
    add_u64("model.init_seed", c.model_init_seed);
  }

  const std::vector<Binding>& all() const { return bindings_; }

  const Binding* find(const std::string& key) const {
    for (const Binding& b : bindings_)
      if (b.key == key) return &b;
    return nullptr;
  }

 private:
  void add_int(const std::string& key, int& field) {
    bindings_.push_back(
        {key, "int",
         [key, &field](const std::string& v) {
           field = static_cast<int>(parse_int(key, v));
         },
         [&field] { return std::to_string(field); }});
  }
  void add_u64(const std::string& key, uint64_t& field) {
    bindings_.push_back(
        {key, "uint",
         [key, &field](const std::string& v) {
           field = static_cast<uint64_t>(parse_int(key, v));
         },
         [&field] { return std::to_string(field); }});
  }
  void add_double(const std::string& key, double& field) {
    bindings_.push_back({key, "number",
                         [key, &field](const std::string& v) {
                           field = parse_double(key, v);
                         },
                         [&field] { return fmt_double(field); }});
  }
  void add_string(const std::string& key, std::string& field) {
    bindings_.push_back({key, "string",
                         [&field](const std::string& v) { field = v; },
                         [&field] { return field; }});
  }
  template <typename E>
  void add_enum(const std::string& key, E& field,
                std::vector<std::pair<E, std::string>> names) {
    std::string type;
    for (const auto& [_, n] : names) type += (type.empty() ? "" : "|") + n;
    bindings_.push_back(
        {key, type,
         [key, &field, names](const std::string& v) {
           for (const auto& [e, n] : names) {
             if (n == v) {
               field = e;
               return;
             }
           }
           throw ConfigError("key " + key + ": unknown value '" + v + "'");
         },
         [&field, names] {
           for (const auto& [e, n] : names)
             if (field == e) return n;
           return std::string("?");
         }});
  }

  std::vector<Binding> bindings_;
};

}  // namespace

void PipelineConfig::apply(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("expected key=value, got: '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  Bindings b(*this);
  const Binding* binding = b.find(key);
  if (binding == nullptr) throw ConfigError("unknown config key: '" + key + "'");
  binding->set(value);
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config file: " + path);
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      cfg.apply(t);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

std::string PipelineConfig::to_text() const {
  // Bindings hold mutable references for set(); only get() runs here.
  Bindings b(*const_cast<PipelineConfig*>(this));
  std::string out;
  for (const Binding& binding : b.all()) {
    out += binding.key + "=" + binding.get() + "\n";
  }
  return out;
}

uint64_t PipelineConfig::hash() const {
  const std::string text = to_text();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

void PipelineConfig::validate() const {
  scene.validate();
  linaec.validate();
  train_config().validate();
  msc.validate(processing_cfg());
  require(model_variant == "two_stage" || model_variant == "single",
          "model.variant must be 'two_stage' or 'single'");
  require(model_n_bins >= 17 && (model_n_bins - 1) % 16 == 0,
          "model.n_bins must be 16m+1 with m >= 1");
  require(model_base_channels > 0, "model.base_channels must be positive");
  require(model_gru_groups > 0, "model.gru_groups must be positive");
  require(model_compress_exp > 0.0 && model_compress_exp <= 1.0,
          "model.compress_exp must lie in (0, 1]");
  require(scene.sample_rate_hz == corpus.sample_rate_hz &&
              scene.sample_rate_hz == linaec.sample_rate_hz,
          "sample rates must agree across modules");
  if (model_variant == "two_stage") {
    two_stage_config().validate();
  } else {
    single_config().validate();
  }
}

WindowConfig PipelineConfig::processing_cfg() const {
  WindowConfig wc;
  wc.sample_rate_hz = scene.sample_rate_hz;
  wc.window_len_samples = 2 * (model_n_bins - 1);
  wc.hop_samples = wc.window_len_samples / 2;
  wc.window_kind = WindowKind::kSqrtHann;
  return wc;
}

namespace {

void apply_model_size(CruseConfig& c, int n_bins, int base, int groups) {
  c.n_bins = n_bins;
  c.encoder_channels = {base, 2 * base, 2 * base, 2 * base};
  c.gru_groups = groups;
}

}  // namespace

TwoStageConfig PipelineConfig::two_stage_config() const {
  TwoStageConfig cfg = TwoStageConfig::desk_default(model_init_seed);
  apply_model_size(cfg.daec, model_n_bins, model_base_channels, model_gru_groups);
  apply_model_size(cfg.nres, model_n_bins, model_base_channels, model_gru_groups);
  cfg.compress_exp = model_compress_exp;
  return cfg;
}

CruseConfig PipelineConfig::single_config() const {
  CruseConfig cfg = single_stage_desk_config(model_init_seed);
  apply_model_size(cfg, model_n_bins, model_base_channels, model_gru_groups);
  return cfg;
}

TrainConfig PipelineConfig::train_config() const {
  TrainConfig cfg = train;
  cfg.seed = seed;
  cfg.loss_cfg.sample_rate_hz = scene.sample_rate_hz;
  return cfg;
}

std::string PipelineConfig::describe_keys() {
  PipelineConfig defaults;
  Bindings b(defaults);
  std::ostringstream os;
  for (const Binding& binding : b.all()) {
    os << "  " << binding.key << "  (" << binding.type
       << ", default " << binding.get() << ")\n";
  }
  return os.str();
}

}  // namespace daec
