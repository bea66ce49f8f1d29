#include <cmath>

#include "doctest.h"
#include "hsbio/features.hpp"
#include "hsbio/rng.hpp"
#include "hsbio/synth.hpp"
#include "test_util.hpp"

using namespace hsbio;

namespace {

IdentityParams stationary_identity() {
  IdentityParams id;
  id.s1_resonances = {{95.0, 30.0, 1.0}, {180.0, 36.0, 0.5}};
  id.s2_resonances = {{150.0, 42.0, 1.0}, {280.0, 50.0, 0.5}};
  id.fsr_db_target = 4.0;
  id.base_rate_bpm = 66.0;
  id.systole_fraction = 0.32;
  return id;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("mel_from_hz frozen values") {
  CHECK(mel_from_hz(0.0) == 0.0);
  // 2595*log10(2), evaluated independently to 1e-8.
  CHECK(mel_from_hz(700.0) == doctest::Approx(781.17283874803120).epsilon(1e-10));
  // The classical fixed point of the Mel map.
  CHECK(std::abs(mel_from_hz(1000.0) - 1000.0) < 0.2);
  CHECK(mel_from_hz(1000.0) ==
        doctest::Approx(999.98553713962437).epsilon(1e-10));
}

TEST_CASE("mel_from_hz is strictly increasing and inverts") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(0.0, 5512.0);
    const double b = a + rng.uniform(1e-3, 100.0);
    CHECK(mel_from_hz(a) < mel_from_hz(b));
    CHECK(hz_from_mel(mel_from_hz(a)) == doctest::Approx(a).epsilon(1e-9));
  }
}

TEST_CASE("cepstrum analytic identities") {
  // K=1: C_0 equals the single input.
  const std::vector<double> one{2.71};
  const auto c1 = cepstrum(one, 3);
  CHECK(c1[0] == doctest::Approx(2.71).epsilon(1e-15));

  // K=4 constant input: C_i vanishes for i >= 1, C_0 sums the inputs.
  const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
  const auto c4 = cepstrum(flat, 4);
  CHECK(c4[0] == doctest::Approx(4.0).epsilon(1e-15));
  for (size_t i = 1; i < c4.size(); ++i) CHECK(std::abs(c4[i]) < 1e-12);

  // K=2, X=[1,-1]: C_1 = cos(pi/4) - cos(3*pi/4) = sqrt(2).
  const std::vector<double> pm{1.0, -1.0};
  const auto c2 = cepstrum(pm, 1);
  CHECK(c2[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("cepstrum matches a direct summation oracle and is linear") {
  Rng rng(4);
  const size_t k = 24, m = 12;
  std::vector<double> x(k), y(k);
  for (size_t i = 0; i < k; ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  const auto cx = cepstrum(x, m);
  for (size_t i = 0; i <= m; ++i) {
    double expect = 0.0;
    for (size_t j = 1; j <= k; ++j)
      expect += x[j - 1] * std::cos(static_cast<double>(i) *
                                    (static_cast<double>(j) - 0.5) * kPi /
                                    static_cast<double>(k));
    CHECK(cx[i] == doctest::Approx(expect).epsilon(1e-12));
  }

  const double a = 1.7, b = -0.45;
  std::vector<double> combo(k);
  for (size_t i = 0; i < k; ++i) combo[i] = a * x[i] + b * y[i];
  const auto cy = cepstrum(y, m);
  const auto cc = cepstrum(combo, m);
  for (size_t i = 0; i <= m; ++i)
    CHECK(std::abs(cc[i] - (a * cx[i] + b * cy[i])) < 1e-9);
}

TEST_CASE("extract_cepstra on silence: constant rows, zero deltas") {
  PcgSignal sig;
  sig.sample_rate = 11025.0;
  sig.samples.assign(11025, 0.0);
  FeatureConfig fc = statistical_feature_config(11025.0);
  const FeatureMatrix fm =
      extract_cepstra(sig, fc.filterbank, fc.cepstrum, fc.frames);
  REQUIRE(fm.num_frames > 2);
  CHECK(fm.dim == 34);  // 16 + 16 deltas + E + dE
  for (size_t t = 1; t < fm.num_frames; ++t)
    for (size_t d = 0; d < fm.dim; ++d)
      CHECK(fm.at(t, d) == doctest::Approx(fm.at(0, d)).epsilon(1e-12));
  // Delta dimensions are identically zero.
  for (size_t t = 0; t < fm.num_frames; ++t) {
    for (size_t d = 16; d < 32; ++d) CHECK(fm.at(t, d) == 0.0);
    CHECK(fm.at(t, 33) == 0.0);  // dE
  }
}

TEST_CASE("distinct tones separate in cepstral space") {
  const PcgSignal low = testutil::sine(100.0, 1.0, 11025.0, 0.5);
  const PcgSignal high = testutil::sine(400.0, 1.0, 11025.0, 0.5);
  FeatureConfig fc = structural_feature_config(11025.0);
  const FeatureMatrix a =
      extract_cepstra(low, fc.filterbank, fc.cepstrum, fc.frames);
  const FeatureMatrix b =
      extract_cepstra(high, fc.filterbank, fc.cepstrum, fc.frames);
  double dist = 0.0;
  for (size_t d = 0; d < 12; ++d) {  // c1..c12 only
    const double diff = a.at(10, d) - b.at(10, d);
    dist += diff * diff;
  }
  CHECK(std::sqrt(dist) > 1.0);
}

TEST_CASE("structural preset yields 13 dimensions") {
  const PcgSignal sig = testutil::sine(120.0, 0.5, 11025.0, 0.5);
  FeatureConfig fc = structural_feature_config(11025.0);
  const FeatureMatrix fm =
      extract_cepstra(sig, fc.filterbank, fc.cepstrum, fc.frames);
  CHECK(fm.dim == 13);
  CHECK(fm.dim_labels.size() == 13);
  CHECK(fm.dim_labels[0] == "c1");
  CHECK(fm.dim_labels[11] == "c12");
  CHECK(fm.dim_labels[12] == "E");
}

TEST_CASE("gain covariance: cepstra invariant, energy shifts by 2K*log(a)") {
  const PcgSignal sig = testutil::sine(160.0, 1.0, 11025.0, 0.4);
  PcgSignal scaled = sig;
  const double alpha = 3.0;
  for (double& v : scaled.samples) v *= alpha;

  FeatureConfig fc = structural_feature_config(11025.0);
  const FeatureMatrix a =
      extract_cepstra(sig, fc.filterbank, fc.cepstrum, fc.frames);
  const FeatureMatrix b =
      extract_cepstra(scaled, fc.filterbank, fc.cepstrum, fc.frames);
  // Power spectra scale by alpha^2, so every filter log-energy shifts by
  // 2*log(alpha): c1..cM see a constant shift cancel, E(C0) moves by K*shift.
  const double shift = 2.0 * std::log(alpha);
  for (size_t t = 0; t < a.num_frames; ++t) {
    for (size_t d = 0; d < 12; ++d)
      CHECK(std::abs(b.at(t, d) - a.at(t, d)) < 1e-9);
    CHECK(b.at(t, 12) - a.at(t, 12) ==
          doctest::Approx(24.0 * shift).epsilon(1e-9));
  }
}

TEST_CASE("fsr_sequence analytic cases") {
  PcgSignal sig;
  sig.sample_rate = 11025.0;
  sig.samples.assign(11025, 0.0);
  // S1 burst at 1000, identical S2 burst at 4000.
  for (size_t i = 0; i < 500; ++i) {
    const double v = std::sin(0.05 * static_cast<double>(i));
    sig.samples[1000 + i] = v;
    sig.samples[4000 + i] = v;
  }
  ToneEndpoints tones;
  tones.tones = {{ToneLabel::kS1, 1000, 1600, 1.0},
                 {ToneLabel::kS2, 4000, 4600, 1.0}};
  const FsrValue equal = fsr_sequence(sig, tones);
  CHECK(equal.ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(equal.ratio_db == doctest::Approx(0.0).epsilon(1e-9));

  // Doubling the S1 amplitude quadruples the power ratio (+6.02 dB).
  PcgSignal loud = sig;
  for (size_t i = 0; i < 500; ++i) loud.samples[1000 + i] *= 2.0;
  const FsrValue four = fsr_sequence(loud, tones);
  CHECK(four.ratio == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(four.ratio_db == doctest::Approx(6.0205999132796239).epsilon(1e-12));

  // Zero S2 power cannot form a ratio.
  PcgSignal dead = sig;
  for (size_t i = 4000; i < 4600; ++i) dead.samples[i] = 0.0;
  CHECK_THROWS_AS(fsr_sequence(dead, tones), DegeneratePower);

  // No complete cycle at all.
  ToneEndpoints only_s1;
  only_s1.tones = {{ToneLabel::kS1, 1000, 1600, 1.0}};
  CHECK_THROWS_AS(fsr_sequence(sig, only_s1), NoCompleteCycle);
}

TEST_CASE("fsr is exactly gain invariant") {
  const SynthRecording rec = generate(stationary_identity(), GenSpec{
      .duration_s = 10.0, .jitter_pct = 0.0, .noise_snr_db = 200.0,
      .clicks_per_10s = 0.0, .sample_rate = 11025.0, .seed = 2});
  const FsrValue base = fsr_sequence(rec.signal, rec.truth);
  // A power-of-two gain scales every sample exactly: bitwise-equal ratio.
  PcgSignal scaled = rec.signal;
  for (double& v : scaled.samples) v *= 0.25;
  const FsrValue same = fsr_sequence(scaled, rec.truth);
  CHECK(base.ratio == same.ratio);
  // Arbitrary gains agree to rounding error.
  PcgSignal odd = rec.signal;
  for (double& v : odd.samples) v *= 0.21;
  const FsrValue close = fsr_sequence(odd, rec.truth);
  CHECK(close.ratio == doctest::Approx(base.ratio).epsilon(1e-12));
}

TEST_CASE("fsr_windowed: stationary signal carries one constant column") {
  GenSpec spec;
  spec.duration_s = 12.0;
  spec.jitter_pct = 0.0;
  spec.noise_snr_db = 200.0;
  spec.seed = 6;
  const SynthRecording rec = generate(stationary_identity(), spec);
  const FrameSpec frames = FrameSpec::from_ms(25.0, 10.0, 11025.0);
  const std::vector<double> col =
      fsr_windowed(rec.signal, rec.truth, frames, 5.0);
  const double whole = fsr_sequence(rec.signal, rec.truth).ratio_db;
  REQUIRE(col.size() == frames.num_frames(rec.signal.samples.size()));
  for (double v : col)
    CHECK(std::abs(v - whole) <= 0.01 * std::abs(whole) + 1e-6);
}

TEST_CASE("fsr_windowed: a balance flip produces two plateaus") {
  // Two 6 s halves with opposite FSR targets, concatenated.
  IdentityParams loud_s1 = stationary_identity();
  loud_s1.fsr_db_target = 6.0;
  IdentityParams loud_s2 = stationary_identity();
  loud_s2.fsr_db_target = -6.0;
  GenSpec spec;
  spec.duration_s = 6.0;
  spec.jitter_pct = 0.0;
  spec.noise_snr_db = 200.0;
  spec.seed = 7;
  const SynthRecording a = generate(loud_s1, spec);
  const SynthRecording b = generate(loud_s2, spec);

  PcgSignal sig = a.signal;
  const size_t offset = sig.samples.size();
  sig.samples.insert(sig.samples.end(), b.signal.samples.begin(),
                     b.signal.samples.end());
  ToneEndpoints truth = a.truth;
  for (Tone t : b.truth.tones) {
    t.start += offset;
    t.end += offset;
    truth.tones.push_back(t);
  }

  const FrameSpec frames = FrameSpec::from_ms(25.0, 10.0, 11025.0);
  const std::vector<double> col = fsr_windowed(sig, truth, frames, 5.0);
  CHECK(col.front() == doctest::Approx(6.0).epsilon(0.1));
  CHECK(col.back() == doctest::Approx(-6.0).epsilon(0.1));
}

TEST_CASE("fsr_windowed: short recordings form a single uniform window") {
  GenSpec spec;
  spec.duration_s = 4.0;
  spec.jitter_pct = 0.0;
  spec.noise_snr_db = 200.0;
  spec.seed = 8;
  const SynthRecording rec = generate(stationary_identity(), spec);
  const FrameSpec frames = FrameSpec::from_ms(25.0, 10.0, 11025.0);
  const std::vector<double> col =
      fsr_windowed(rec.signal, rec.truth, frames, 5.0);
  for (double v : col) CHECK(v == col.front());
}

TEST_CASE("feature matrix binary blob round-trips") {
  const PcgSignal sig = testutil::sine(130.0, 0.6, 11025.0, 0.5);
  FeatureConfig fc = statistical_feature_config(11025.0);
  const FeatureMatrix fm =
      extract_cepstra(sig, fc.filterbank, fc.cepstrum, fc.frames);
  const FeatureMatrix back = parse_feature_matrix_binary(feature_matrix_binary(fm));
  REQUIRE(back.num_frames == fm.num_frames);
  REQUIRE(back.dim == fm.dim);
  for (size_t i = 0; i < fm.data.size(); ++i) CHECK(back.data[i] == fm.data[i]);
}

TEST_CASE("statistical_frontend appends the FSR dimension") {
  GenSpec spec;
  spec.duration_s = 12.0;
  spec.noise_snr_db = 30.0;
  spec.seed = 9;
  const SynthRecording rec = generate(stationary_identity(), spec);
  const FeatureMatrix fm = statistical_frontend(rec.signal);
  CHECK(fm.dim == 35);
  CHECK(fm.dim_labels.back() == "FSR");
  const FeatureMatrix bare = statistical_frontend(rec.signal, 500.0, 5.0, false);
  CHECK(bare.dim == 34);
}

}  // TEST_SUITE
