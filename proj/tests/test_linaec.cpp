#include <cmath>
#include <vector>

#include "daec/fft.hpp"
#include "daec/linaec.hpp"
#include "daec/rng.hpp"
#include "daec/spectral.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace daec;
using namespace daec::testutil;

namespace {

// 50 ms exponentially decaying random echo path.
std::vector<double> test_echo_path(uint64_t seed) {
  Rng rng(seed);
  std::vector<double> h(800);
  for (size_t i = 0; i < h.size(); ++i) {
    h[i] = rng.uniform(-1.0, 1.0) * std::exp(-6.0 * static_cast<double>(i) / h.size());
  }
  h[0] = 1.0;
  return h;
}

std::vector<double> make_echo(const std::vector<double>& far,
                              const std::vector<double>& h) {
  auto echo = fft_convolve(far, h);
  echo.resize(far.size());
  return echo;
}

double tail_erle_db(const std::vector<double>& mic, const std::vector<double>& err,
                    size_t begin, size_t end) {
  double pm = 0.0, pe = 0.0;
  for (size_t i = begin; i < end; ++i) {
    pm += mic[i] * mic[i];
    pe += err[i] * err[i];
  }
  return 10.0 * std::log10(pm / (pe + 1e-30));
}

}  // namespace

TEST_CASE("linaec config") {
  LinAecConfig cfg;
  CHECK(cfg.window().window_len_samples == 640);
  CHECK(cfg.window().hop_samples == 160);
  CHECK(cfg.window().window_kind == WindowKind::kHann);
  CHECK(cfg.partitions() == 20);
  cfg.validate();

  LinAecConfig bad = cfg;
  bad.step_size = 2.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.filter_len_ms = 5;  // shorter than one hop
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("linaec converges on a static echo path") {
  const auto far = random_signal(77, 16000 * 10);
  const auto mic = make_echo(far, test_echo_path(78));
  const auto out = linaec_process(mic, far, LinAecConfig{});
  REQUIRE(out.error_out.size() == mic.size());
  // Last two seconds, after convergence.
  const double erle = tail_erle_db(mic, out.error_out, mic.size() - 32000, mic.size());
  CHECK(erle > 20.0);
  // The echo estimate carries the removed energy.
  double est_power = 0.0;
  for (double v : out.echo_estimate) est_power += v * v;
  CHECK(est_power > 0.0);
}

TEST_CASE("linaec error converges monotonically") {
  const auto far = random_signal(79, 16000 * 15);
  const auto mic = make_echo(far, test_echo_path(80));
  const auto out = linaec_process(mic, far, LinAecConfig{});
  const size_t third = mic.size() / 3;
  const double e1 = tail_erle_db(mic, out.error_out, 0, third);
  const double e2 = tail_erle_db(mic, out.error_out, third, 2 * third);
  const double e3 = tail_erle_db(mic, out.error_out, 2 * third, 3 * third);
  CHECK(e2 > e1);
  CHECK(e3 > e1);
  CHECK(e3 > e2 - 1.0);  // allow a plateau once converged
}

TEST_CASE("linaec passes the mic through when the far end is silent") {
  const auto mic = random_signal(81, 16000 * 2);
  const std::vector<double> far(mic.size(), 0.0);
  const auto out = linaec_process(mic, far, LinAecConfig{});
  // Weights never move off zero, so the error path is a pure STFT roundtrip;
  // compare away from the signal edges where overlap-add is partial.
  const auto wcfg = LinAecConfig{}.window();
  for (size_t i = wcfg.window_len_samples; i + wcfg.window_len_samples < mic.size(); ++i) {
    CHECK(std::abs(out.error_out[i] - mic[i]) < 1e-9);
  }
  for (double v : out.echo_estimate) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("frozen linaec never adapts") {
  const auto far = random_signal(82, 16000 * 2);
  const auto mic = make_echo(far, test_echo_path(83));
  LinAecConfig cfg;
  cfg.freeze_adaptation = true;
  const auto out = linaec_process(mic, far, cfg);
  const auto wcfg = cfg.window();
  for (size_t i = wcfg.window_len_samples; i + wcfg.window_len_samples < mic.size(); ++i) {
    CHECK(std::abs(out.error_out[i] - mic[i]) < 1e-9);
  }
}

TEST_CASE("near-end speech passes through a frozen filter unchanged") {
  const auto wcfg = LinAecConfig{}.window();
  const auto far = random_signal(84, 16000 * 8);
  const auto echo = make_echo(far, test_echo_path(85));
  const auto far_spec = stft(far, wcfg);
  const auto echo_spec = stft(echo, wcfg);
  const auto near_spec = stft(random_signal(86, 16000 * 8), wcfg);
  const int n_bins = wcfg.n_bins();

  LinearAec aec(LinAecConfig{});
  std::vector<cpx> est(n_bins), err(n_bins);
  for (int t = 0; t < far_spec.n_frames; ++t) {
    aec.process_frame(&echo_spec.at(t, 0), &far_spec.at(t, 0), est.data(), err.data());
  }
  LinearAec aec2 = aec;  // identical converged state
  aec.set_freeze(true);
  aec2.set_freeze(true);

  std::vector<cpx> mic2(n_bins), est2(n_bins), err2(n_bins);
  for (int t = 0; t < far_spec.n_frames; ++t) {
    aec.process_frame(&echo_spec.at(t, 0), &far_spec.at(t, 0), est.data(), err.data());
    for (int k = 0; k < n_bins; ++k) mic2[k] = echo_spec.at(t, k) + near_spec.at(t, k);
    aec2.process_frame(mic2.data(), &far_spec.at(t, 0), est2.data(), err2.data());
    for (int k = 0; k < n_bins; ++k) {
      // Same far history and frozen weights: the error difference is exactly
      // the injected near-end component.
      CHECK(std::abs(err2[k] - err[k] - near_spec.at(t, k)) < 1e-9);
    }
  }
}

TEST_CASE("linaec chain applies the post stage to the error signal") {
  const auto far = random_signal(87, 16000 * 2);
  const auto mic = make_echo(far, test_echo_path(88));
  LinAecConfig cfg;
  const auto plain = linaec_process(mic, far, cfg);
  const auto passthrough = linaec_chain(mic, far, cfg, nullptr);
  CHECK(max_abs_diff(passthrough, plain.error_out) == 0.0);

  const auto muted = linaec_chain(mic, far, cfg, [](const std::vector<double>& x) {
    return std::vector<double>(x.size(), 0.0);
  });
  for (double v : muted) CHECK(v == 0.0);
}

TEST_CASE("linaec rejects mismatched input lengths") {
  const auto mic = random_signal(89, 16000);
  const auto far = random_signal(90, 16000 + 1);
  CHECK_THROWS_AS(linaec_process(mic, far, LinAecConfig{}), ConfigError);
}
