#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "daec/checkpoint.hpp"
#include "daec/two_stage.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace daec;
using namespace daec::testutil;

namespace {

constexpr double kFdEps = 1e-5;
constexpr double kFdTol = 1e-4;

double rel_err(double fd, double an) {
  return std::abs(fd - an) / std::max({1e-6, std::abs(fd), std::abs(an)});
}

WindowConfig toy_window() {
  WindowConfig wc;
  wc.window_len_samples = 32;
  wc.hop_samples = 16;
  return wc;
}

TwoStageConfig toy_two_stage(uint64_t seed) {
  TwoStageConfig cfg = TwoStageConfig::desk_default(seed);
  for (CruseConfig* c : {&cfg.daec, &cfg.nres}) {
    c->n_bins = 17;
    c->encoder_channels = {2, 2, 2, 2};
    c->gru_groups = 2;
  }
  return cfg;
}

CruseConfig toy_single(uint64_t seed) {
  CruseConfig c = single_stage_desk_config(seed);
  c.n_bins = 17;
  c.encoder_channels = {2, 2, 2, 2};
  c.gru_groups = 2;
  return c;
}

// Random spectra with magnitudes bounded away from zero, so every
// compression op in the graph sits in its smooth region for FD probing.
Spectrogram bounded_spec(uint64_t seed, int frames, const WindowConfig& wc) {
  Rng rng(seed);
  Spectrogram s(frames, wc.n_bins(), wc);
  for (int t = 0; t < frames; ++t)
    for (int k = 0; k < s.n_bins; ++k) {
      const double mag = rng.uniform(0.5, 1.5);
      const double ph = rng.uniform(0.0, 2.0 * M_PI);
      if (k == 0 || k == s.n_bins - 1) {
        s.at(t, k) = cpx(rng.chance(0.5) ? mag : -mag, 0.0);
      } else {
        s.at(t, k) = std::polar(mag, ph);
      }
    }
  return s;
}

// See test_cruse.cpp: an FD probe is only a derivative estimate when no
// rectifier pre-activation flips sign between its endpoints; probes that do
// straddle a kink are skipped (capped), all others checked strictly.
void append_preacts(const CruseCache& c, std::vector<double>& sig) {
  for (int i = 0; i < 4; ++i)
    sig.insert(sig.end(), c.enc_pre[i].v.begin(), c.enc_pre[i].v.end());
  for (int i = 0; i < 3; ++i)
    sig.insert(sig.end(), c.dec_pre[i].v.begin(), c.dec_pre[i].v.end());
}

bool same_signs(const std::vector<double>& a, const std::vector<double>& b) {
  for (size_t i = 0; i < a.size(); ++i)
    if ((a[i] < 0.0) != (b[i] < 0.0)) return false;
  return true;
}

}  // namespace

TEST_CASE("two-stage config validation") {
  TwoStageConfig cfg = toy_two_stage(7);
  cfg.validate();

  TwoStageConfig bad = cfg;
  bad.daec.out_mode = OutMode::kDeepFilter;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.nres.bridge_input = false;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.nres.n_bins = 33;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.compress_exp = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  TwoStageConfig rt = TwoStageConfig::from_text(cfg.to_text());
  CHECK(rt.daec.encoder_channels == cfg.daec.encoder_channels);
  CHECK(rt.nres.out_mode == OutMode::kDeepFilter);
  CHECK(rt.compress_exp == doctest::Approx(cfg.compress_exp));
}

TEST_CASE("zero first stage passes the mic spectrum through untouched") {
  TwoStageModel m(toy_two_stage(11));
  for (NamedParam& p : m.params())
    if (p.name.rfind("daec.", 0) == 0)
      std::fill(p.tensor->v.begin(), p.tensor->v.end(), 0.0);

  const WindowConfig wc = toy_window();
  Spectrogram y = bounded_spec(13, 6, wc);
  Spectrogram u = bounded_spec(17, 6, wc);
  TwoStageCache cache;
  TwoStageOut out = m.forward(y, u, cache);
  for (size_t i = 0; i < y.data.size(); ++i) {
    CHECK(out.d_hat_c.data[i] == cpx(0.0, 0.0));
    CHECK(out.e.data[i] == y.data[i]);
  }
}

TEST_CASE("zero single-stage model emits silence") {
  SingleStageModel m(toy_single(19));
  for (NamedParam& p : m.params()) std::fill(p.tensor->v.begin(), p.tensor->v.end(), 0.0);
  const WindowConfig wc = toy_window();
  Spectrogram y = bounded_spec(23, 6, wc);
  Spectrogram u = bounded_spec(29, 6, wc);
  SingleStageCache cache;
  SingleStageOut out = m.forward(y, u, 0.3, cache);
  for (const cpx& v : out.s_hat.data) CHECK(v == cpx(0.0, 0.0));
  for (double v : out.s_hat_time) CHECK(v == 0.0);
}

TEST_CASE("two-stage forward is causal") {
  TwoStageModel m(toy_two_stage(31));
  const WindowConfig wc = toy_window();
  Spectrogram y = bounded_spec(37, 12, wc);
  Spectrogram u = bounded_spec(41, 12, wc);
  TwoStageCache cache;
  TwoStageOut a = m.forward(y, u, cache);

  Spectrogram y2 = y, u2 = u;
  for (int k = 0; k < y.n_bins; ++k) {
    y2.at(11, k) += cpx(0.3, k == 0 || k == y.n_bins - 1 ? 0.0 : -0.2);
    u2.at(11, k) *= 1.7;
  }
  TwoStageOut b = m.forward(y2, u2, cache);
  for (int t = 0; t < 11; ++t)
    for (int k = 0; k < y.n_bins; ++k) {
      CHECK(a.d_hat_c.at(t, k) == b.d_hat_c.at(t, k));
      CHECK(a.e.at(t, k) == b.e.at(t, k));
      CHECK(a.s_hat.at(t, k) == b.s_hat.at(t, k));
    }
  double moved = 0.0;
  for (int k = 0; k < y.n_bins; ++k) moved += std::abs(a.s_hat.at(11, k) - b.s_hat.at(11, k));
  CHECK(moved > 0.0);
}

TEST_CASE("two-stage gradients match finite differences on a toy scene") {
  const WindowConfig wc = toy_window();
  const int frames = 6;
  TwoStageModel m(toy_two_stage(43));
  Spectrogram y = bounded_spec(47, frames, wc);
  Spectrogram u = bounded_spec(53, frames, wc);

  TwoStageCache cache;
  TwoStageOut out0 = m.forward(y, u, cache);

  Rng rng(59);
  std::vector<double> ws(out0.s_hat_time.size());
  for (double& v : ws) v = rng.uniform(-1.0, 1.0);
  Spectrogram wd(frames, y.n_bins, wc);
  for (cpx& v : wd.data) v = cpx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));

  std::vector<double> sig0, sigp, sigm;
  auto loss = [&](std::vector<double>* sig) {
    TwoStageCache c2;
    TwoStageOut o = m.forward(y, u, c2);
    double s = 0.0;
    for (size_t i = 0; i < ws.size(); ++i) s += ws[i] * o.s_hat_time[i];
    for (size_t i = 0; i < wd.data.size(); ++i)
      s += wd.data[i].real() * o.d_hat_c.data[i].real() +
           wd.data[i].imag() * o.d_hat_c.data[i].imag();
    if (sig != nullptr) {
      sig->clear();
      append_preacts(c2.daec, *sig);
      append_preacts(c2.nres, *sig);
    }
    return s;
  };
  loss(&sig0);

  m.zero_grad();
  m.backward(cache, ws, &wd);

  size_t total = 0, skipped = 0;
  for (NamedParam& p : m.params()) {
    Tensor& t = *p.tensor;
    for (size_t i = 0; i < t.size(); ++i) {
      const double keep = t.v[i];
      t.v[i] = keep + kFdEps;
      const double lp = loss(&sigp);
      t.v[i] = keep - kFdEps;
      const double lm = loss(&sigm);
      t.v[i] = keep;
      ++total;
      if (!same_signs(sig0, sigp) || !same_signs(sig0, sigm)) {
        ++skipped;
        continue;
      }
      const double fd = (lp - lm) / (2 * kFdEps);
      INFO(p.name, " coord ", i);
      CHECK(rel_err(fd, t.g[i]) < kFdTol);
    }
  }
  size_t expect = 0;
  for (NamedParam& p : m.params()) expect += p.tensor->size();
  CHECK(total == expect);      // every parameter of both stages and the bridge
  CHECK(skipped * 50 < total);  // kink-adjacent probes must stay rare
}

TEST_CASE("single-stage gradients match finite differences") {
  const WindowConfig wc = toy_window();
  const int frames = 6;
  SingleStageModel m(toy_single(61));
  Spectrogram y = bounded_spec(67, frames, wc);
  Spectrogram u = bounded_spec(71, frames, wc);

  SingleStageCache cache;
  SingleStageOut out0 = m.forward(y, u, 0.3, cache);
  Rng rng(73);
  std::vector<double> ws(out0.s_hat_time.size());
  for (double& v : ws) v = rng.uniform(-1.0, 1.0);

  std::vector<double> sig0, sigp, sigm;
  auto loss = [&](std::vector<double>* sig) {
    SingleStageCache c2;
    SingleStageOut o = m.forward(y, u, 0.3, c2);
    double s = 0.0;
    for (size_t i = 0; i < ws.size(); ++i) s += ws[i] * o.s_hat_time[i];
    if (sig != nullptr) {
      sig->clear();
      append_preacts(c2.core, *sig);
    }
    return s;
  };
  loss(&sig0);

  m.zero_grad();
  m.backward(cache, ws, 0.3);
  size_t total = 0, skipped = 0;
  for (NamedParam& p : m.params()) {
    Tensor& t = *p.tensor;
    for (size_t i = 0; i < t.size(); ++i) {
      const double keep = t.v[i];
      t.v[i] = keep + kFdEps;
      const double lp = loss(&sigp);
      t.v[i] = keep - kFdEps;
      const double lm = loss(&sigm);
      t.v[i] = keep;
      ++total;
      if (!same_signs(sig0, sigp) || !same_signs(sig0, sigm)) {
        ++skipped;
        continue;
      }
      INFO(p.name, " coord ", i);
      CHECK(rel_err((lp - lm) / (2 * kFdEps), t.g[i]) < kFdTol);
    }
  }
  CHECK(skipped * 50 < total);
}

TEST_CASE("two-stage checkpoint roundtrip and kind dispatch") {
  const std::string path = "test_ckpt_two_stage.bin";
  TwoStageModel m(toy_two_stage(79));
  m.params()[0].tensor->v[0] = 0.777;  // arbitrary non-init value survives
  save_two_stage(path, m);
  CHECK(checkpoint_kind(path) == "two_stage");

  TwoStageModel loaded = load_two_stage(path);
  std::vector<NamedParam> pa = m.params();
  std::vector<NamedParam> pb = loaded.params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    for (size_t j = 0; j < pa[i].tensor->size(); ++j)
      CHECK(static_cast<float>(pa[i].tensor->v[j]) ==
            static_cast<float>(pb[i].tensor->v[j]));
  }

  // Loaded model computes exactly what the saved f32 state computes.
  const WindowConfig wc = toy_window();
  Spectrogram y = bounded_spec(83, 5, wc);
  Spectrogram u = bounded_spec(89, 5, wc);
  TwoStageCache ca, cb;
  TwoStageOut oa = loaded.forward(y, u, ca);
  TwoStageOut ob = load_two_stage(path).forward(y, u, cb);
  for (size_t i = 0; i < oa.s_hat.data.size(); ++i)
    CHECK(oa.s_hat.data[i] == ob.s_hat.data[i]);

  CHECK_THROWS_AS(load_single_stage(path), IoError);
  std::remove(path.c_str());
}
