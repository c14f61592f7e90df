#include "daec/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "daec/error.hpp"
#include "daec/metrics.hpp"
#include "json.hpp"

namespace daec {

using nlohmann::json;

// ---- Pipeline factories ----

namespace {

// Spectral front end shared by the neural pipelines: processing STFTs of
// mic and far-end plus coherence-tracked far-end alignment.
struct Front {
  Spectrogram y, u_aligned;
};

Front spectral_front(const std::vector<double>& mic,
                     const std::vector<double>& farend,
                     const WindowConfig& wcfg, const MscConfig& mcfg) {
  Front f;
  f.y = stft(mic, wcfg);
  Spectrogram far = stft(farend, wcfg);
  DelayTrack track = estimate_delay(f.y, far, mcfg);
  f.u_aligned = align_farend(far, track);
  return f;
}

}  // namespace

Pipeline identity_pipeline() {
  return {"identity", [](const SceneBundle& s) { return s.mic; }};
}

Pipeline oracle_pipeline() {
  return {"oracle", [](const SceneBundle& s) { return s.target; }};
}

Pipeline true_echo_subtractor_pipeline() {
  return {"true_echo_subtractor", [](const SceneBundle& s) {
            std::vector<double> out(s.mic.size());
            for (size_t i = 0; i < out.size(); ++i) out[i] = s.mic[i] - s.echo[i];
            return out;
          }};
}

Pipeline linaec_pipeline(const LinAecConfig& cfg) {
  return {"linaec", [cfg](const SceneBundle& s) {
            return linaec_process(s.mic, s.farend, cfg).error_out;
          }};
}

Pipeline linaec_ns_pipeline(const LinAecConfig& lin_cfg, SingleStageModel& ns,
                            double compress_exp, const WindowConfig& wcfg,
                            const MscConfig& mcfg) {
  return {"linaec+ns",
          [lin_cfg, &ns, compress_exp, wcfg, mcfg](const SceneBundle& s) {
            const std::vector<double> err =
                linaec_process(s.mic, s.farend, lin_cfg).error_out;
            Front f = spectral_front(err, s.farend, wcfg, mcfg);
            SingleStageCache cache;
            return ns.forward(f.y, f.u_aligned, compress_exp, cache).s_hat_time;
          }};
}

Pipeline single_stage_pipeline(SingleStageModel& model, double compress_exp,
                               const WindowConfig& wcfg, const MscConfig& mcfg) {
  return {"single_stage",
          [&model, compress_exp, wcfg, mcfg](const SceneBundle& s) {
            Front f = spectral_front(s.mic, s.farend, wcfg, mcfg);
            SingleStageCache cache;
            return model.forward(f.y, f.u_aligned, compress_exp, cache).s_hat_time;
          }};
}

Pipeline daec_only_pipeline(TwoStageModel& model, const WindowConfig& wcfg,
                            const MscConfig& mcfg) {
  return {"daec_only", [&model, wcfg, mcfg](const SceneBundle& s) {
            Front f = spectral_front(s.mic, s.farend, wcfg, mcfg);
            TwoStageCache cache;
            TwoStageOut out = model.forward(f.y, f.u_aligned, cache);
            return istft(out.e, wcfg);
          }};
}

Pipeline two_stage_pipeline(TwoStageModel& model, const WindowConfig& wcfg,
                            const MscConfig& mcfg) {
  return {"two_stage", [&model, wcfg, mcfg](const SceneBundle& s) {
            Front f = spectral_front(s.mic, s.farend, wcfg, mcfg);
            TwoStageCache cache;
            return model.forward(f.y, f.u_aligned, cache).s_hat_time;
          }};
}

// ---- Metric evaluation ----

namespace {

MetricValue absent(const std::string& reason) {
  MetricValue m;
  m.reason = reason;
  return m;
}

MetricValue value_of(double v) {
  MetricValue m;
  m.present = true;
  m.value = v;
  return m;
}

std::vector<double> slice(const std::vector<double>& x, size_t off, size_t n) {
  return std::vector<double>(x.begin() + off, x.begin() + off + n);
}

// Comparisons drop one analysis window per side (when enough samples
// remain) so synthesis edge taper does not penalize causal pipelines.
SceneMetrics eval_scene(const SceneBundle& scene, const std::vector<double>& out,
                        const EvalConfig& cfg) {
  require(out.size() <= scene.mic.size(),
          "pipeline output longer than the scene");
  require(!out.empty(), "pipeline produced no samples");
  const int fs = cfg.lsd_cfg.sample_rate_hz;
  const size_t w = static_cast<size_t>(cfg.lsd_cfg.window_len_samples);
  const size_t off = out.size() > 2 * w ? w : 0;
  const size_t n = out.size() - 2 * off;
  const std::vector<double> out_t = slice(out, off, n);
  const std::vector<double> mic_t = slice(scene.mic, off, n);

  SceneMetrics m;
  if (scene.meta.category == SceneCategory::kFarEndOnly) {
    const std::vector<double> echo_t = slice(scene.echo, off, n);
    const std::vector<char> mask = active_mask(echo_t, fs);
    m.erle = value_of(erle_db(mic_t, out_t, mask, fs));
    m.si_sdr = absent("no near-end target in a far-end-only scene");
    m.lsd = absent("no near-end target in a far-end-only scene");
  } else {
    m.erle = absent("scene is not far-end-only");
    const std::vector<double> ref_t = slice(scene.target, off, n);
    m.si_sdr = value_of(si_sdr_db(out_t, ref_t));
    m.lsd = value_of(lsd_db(out_t, ref_t, cfg.lsd_cfg));
  }
  return m;
}

struct Accum {
  int n = 0;
  double sum = 0.0, sum_sq = 0.0;
  void add(double v) {
    ++n;
    sum += v;
    sum_sq += v * v;
  }
  AggregateStat stat() const {
    AggregateStat s;
    s.n = n;
    if (n > 0) {
      s.mean = sum / n;
      const double var = std::max(0.0, sum_sq / n - s.mean * s.mean);
      s.stddev = std::sqrt(var);
    }
    return s;
  }
};

void aggregate(const std::vector<SceneInfo>& scenes,
               const std::vector<SceneMetrics>& per_scene,
               MetricValue SceneMetrics::*metric,
               std::map<std::string, AggregateStat>& out) {
  std::map<std::string, Accum> acc;
  for (size_t i = 0; i < scenes.size(); ++i) {
    const MetricValue& mv = per_scene[i].*metric;
    if (!mv.present) continue;
    acc["all"].add(mv.value);
    acc["category:" + scenes[i].category].add(mv.value);
    acc["tag:" + scenes[i].challenge_tag].add(mv.value);
  }
  for (const auto& [key, a] : acc) out[key] = a.stat();
}

}  // namespace

EvalReport scenario_eval(const std::vector<Pipeline>& pipelines,
                         const std::vector<SceneBundle>& scenes,
                         const EvalConfig& cfg) {
  require(!pipelines.empty(), "evaluation needs at least one pipeline");
  require(!scenes.empty(), "evaluation needs at least one scene");

  EvalReport report;
  report.model_identity = cfg.model_identity;
  report.config_hash = cfg.config_hash;
  for (const SceneBundle& s : scenes) {
    SceneInfo info;
    info.id = "scene-" + std::to_string(s.meta.seed);
    info.category = to_string(s.meta.category);
    info.challenge_tag = s.meta.challenge_tag;
    report.scenes.push_back(info);
    report.category_counts[info.category] += 1;
  }

  for (const Pipeline& p : pipelines) {
    require(static_cast<bool>(p.run), "pipeline has no runner: " + p.name);
    PipelineReport pr;
    pr.pipeline = p.name;
    for (const SceneBundle& s : scenes) {
      pr.per_scene.push_back(eval_scene(s, p.run(s), cfg));
    }
    aggregate(report.scenes, pr.per_scene, &SceneMetrics::erle, pr.erle);
    aggregate(report.scenes, pr.per_scene, &SceneMetrics::si_sdr, pr.si_sdr);
    aggregate(report.scenes, pr.per_scene, &SceneMetrics::lsd, pr.lsd);
    report.pipelines.push_back(std::move(pr));
  }
  return report;
}

// ---- Serialization ----

namespace {

void metric_to_json(json& row, const char* name, const MetricValue& mv) {
  if (mv.present) {
    row[name] = mv.value;
  } else {
    row[name] = nullptr;
    row[std::string(name) + "_omitted"] = mv.reason;
  }
}

json stats_to_json(const std::map<std::string, AggregateStat>& stats) {
  json j = json::object();
  for (const auto& [key, s] : stats) {
    j[key] = {{"n", s.n}, {"mean", s.mean}, {"stddev", s.stddev}};
  }
  return j;
}

std::string csv_cell(const MetricValue& mv) {
  if (!mv.present) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", mv.value);
  return buf;
}

}  // namespace

std::string EvalReport::to_json() const {
  json j;
  j["model_identity"] = model_identity;
  j["config_hash"] = config_hash;
  j["n_scenes"] = scenes.size();
  j["category_counts"] = json::object();
  for (const auto& [cat, n] : category_counts) j["category_counts"][cat] = n;
  // Reserved for externally computed listener-model scores; merged by
  // downstream tooling, never produced here.
  j["external_mos"] = json::object();

  j["scenes"] = json::array();
  for (const SceneInfo& s : scenes) {
    j["scenes"].push_back(
        {{"id", s.id}, {"category", s.category}, {"tag", s.challenge_tag}});
  }

  j["pipelines"] = json::array();
  for (const PipelineReport& pr : pipelines) {
    json p;
    p["name"] = pr.pipeline;
    p["per_scene"] = json::array();
    for (size_t i = 0; i < pr.per_scene.size(); ++i) {
      json row;
      row["scene"] = scenes[i].id;
      metric_to_json(row, "erle_db", pr.per_scene[i].erle);
      metric_to_json(row, "si_sdr_db", pr.per_scene[i].si_sdr);
      metric_to_json(row, "lsd_db", pr.per_scene[i].lsd);
      p["per_scene"].push_back(row);
    }
    p["aggregates"] = {{"erle_db", stats_to_json(pr.erle)},
                       {"si_sdr_db", stats_to_json(pr.si_sdr)},
                       {"lsd_db", stats_to_json(pr.lsd)}};
    j["pipelines"].push_back(p);
  }
  return j.dump(2);
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "pipeline,scene,category,tag,erle_db,si_sdr_db,lsd_db\n";
  for (const PipelineReport& pr : pipelines) {
    for (size_t i = 0; i < pr.per_scene.size(); ++i) {
      os << pr.pipeline << "," << scenes[i].id << "," << scenes[i].category
         << "," << scenes[i].challenge_tag << ","
         << csv_cell(pr.per_scene[i].erle) << ","
         << csv_cell(pr.per_scene[i].si_sdr) << ","
         << csv_cell(pr.per_scene[i].lsd) << "\n";
    }
  }
  return os.str();
}

// ---- SVG bar chart ----

namespace {

const char* kPalette[] = {"#4878cf", "#ee854a", "#6acc64", "#d65f5f",
                          "#956cb4", "#8c613c", "#dc7ec0", "#797979"};

struct Panel {
  const char* title;
  std::map<std::string, AggregateStat> PipelineReport::*stats;
};

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

std::string EvalReport::to_svg() const {
  const Panel panels[] = {{"ERLE (dB)", &PipelineReport::erle},
                          {"SI-SDR (dB)", &PipelineReport::si_sdr},
                          {"LSD (dB)", &PipelineReport::lsd}};
  const int width = 880, panel_h = 240, margin_l = 60, margin_r = 20;
  const int legend_h = 24 + 18 * static_cast<int>(pipelines.size());
  const int height = 3 * panel_h + legend_h + 20;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  int top = 10;
  for (const Panel& panel : panels) {
    // Mean per category per pipeline; skip categories with no data anywhere.
    std::vector<std::string> groups;
    for (const auto& [cat, n] : category_counts) {
      const std::string key = "category:" + cat;
      for (const PipelineReport& pr : pipelines) {
        const auto& stats = pr.*(panel.stats);
        if (stats.count(key)) {
          groups.push_back(cat);
          break;
        }
      }
    }
    os << "<text x=\"" << margin_l << "\" y=\"" << top + 14
       << "\" font-size=\"14\" font-weight=\"bold\">" << panel.title
       << "</text>\n";
    if (groups.empty()) {
      os << "<text x=\"" << margin_l << "\" y=\"" << top + 40
         << "\" font-size=\"12\" fill=\"#777\">no data</text>\n";
      top += panel_h;
      continue;
    }

    double vmin = 0.0, vmax = 0.0;
    for (const PipelineReport& pr : pipelines) {
      for (const std::string& g : groups) {
        const auto& stats = pr.*(panel.stats);
        auto it = stats.find("category:" + g);
        if (it == stats.end()) continue;
        vmin = std::min(vmin, it->second.mean);
        vmax = std::max(vmax, it->second.mean);
      }
    }
    if (vmax == vmin) vmax = vmin + 1.0;
    const double plot_top = top + 24, plot_h = panel_h - 60;
    const double plot_w = width - margin_l - margin_r;
    auto ycoord = [&](double v) {
      return plot_top + plot_h * (vmax - v) / (vmax - vmin);
    };
    // Zero line and axis extremes.
    os << "<line x1=\"" << margin_l << "\" y1=\"" << ycoord(0.0) << "\" x2=\""
       << width - margin_r << "\" y2=\"" << ycoord(0.0)
       << "\" stroke=\"#999\"/>\n";
    os << "<text x=\"" << margin_l - 5 << "\" y=\"" << ycoord(vmax) + 4
       << "\" font-size=\"10\" text-anchor=\"end\">" << fmt1(vmax)
       << "</text>\n";
    os << "<text x=\"" << margin_l - 5 << "\" y=\"" << ycoord(vmin) + 4
       << "\" font-size=\"10\" text-anchor=\"end\">" << fmt1(vmin)
       << "</text>\n";

    const double group_w = plot_w / groups.size();
    const double bar_w =
        std::min(40.0, group_w * 0.8 / static_cast<double>(pipelines.size()));
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      const double gx = margin_l + group_w * gi;
      os << "<text x=\"" << gx + group_w / 2 << "\" y=\"" << top + panel_h - 16
         << "\" font-size=\"11\" text-anchor=\"middle\">" << groups[gi]
         << "</text>\n";
      const double total_bars = bar_w * static_cast<double>(pipelines.size());
      double bx = gx + (group_w - total_bars) / 2;
      for (size_t pi = 0; pi < pipelines.size(); ++pi, bx += bar_w) {
        const auto& stats = pipelines[pi].*(panel.stats);
        auto it = stats.find("category:" + groups[gi]);
        if (it == stats.end()) continue;
        const double v = it->second.mean;
        const double y0 = ycoord(std::max(v, 0.0));
        const double y1 = ycoord(std::min(v, 0.0));
        os << "<rect x=\"" << bx << "\" y=\"" << y0 << "\" width=\""
           << bar_w - 2 << "\" height=\"" << std::max(1.0, y1 - y0)
           << "\" fill=\"" << kPalette[pi % 8] << "\"/>\n";
        os << "<text x=\"" << bx + (bar_w - 2) / 2 << "\" y=\"" << y0 - 3
           << "\" font-size=\"9\" text-anchor=\"middle\">" << fmt1(v)
           << "</text>\n";
      }
    }
    top += panel_h;
  }

  // Legend.
  os << "<text x=\"" << margin_l << "\" y=\"" << top + 14
     << "\" font-size=\"12\" font-weight=\"bold\">Pipelines</text>\n";
  for (size_t pi = 0; pi < pipelines.size(); ++pi) {
    const int y = top + 24 + 18 * static_cast<int>(pi);
    os << "<rect x=\"" << margin_l << "\" y=\"" << y << "\" width=\"12\""
       << " height=\"12\" fill=\"" << kPalette[pi % 8] << "\"/>\n";
    os << "<text x=\"" << margin_l + 18 << "\" y=\"" << y + 10
       << "\" font-size=\"11\">" << pipelines[pi].pipeline << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace daec
