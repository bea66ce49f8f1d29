#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "hsbio/features.hpp"
#include "hsbio/file_util.hpp"
#include "hsbio/synth.hpp"
#include "test_util.hpp"

using namespace hsbio;
using testutil::TempDir;

TEST_SUITE("synth") {

TEST_CASE("a metronomic schedule lands on exact one-second spacing") {
  IdentityParams id;
  id.s1_resonances = {{90.0, 30.0, 1.0}};
  id.s2_resonances = {{140.0, 42.0, 1.0}};
  id.fsr_db_target = 0.0;
  id.base_rate_bpm = 60.0;
  id.systole_fraction = 0.3;
  GenSpec spec;
  spec.duration_s = 10.0;
  spec.jitter_pct = 0.0;
  spec.noise_snr_db = 200.0;
  spec.seed = 1;
  const SynthRecording rec = generate(id, spec);

  size_t s1 = 0, s2 = 0;
  std::vector<size_t> s1_starts;
  for (const Tone& t : rec.truth.tones) {
    if (t.label == ToneLabel::kS1) {
      ++s1;
      s1_starts.push_back(t.start);
    } else {
      ++s2;
    }
  }
  CHECK(s1 == 10);
  CHECK(s2 == 10);
  for (size_t i = 1; i < s1_starts.size(); ++i)
    CHECK(s1_starts[i] - s1_starts[i - 1] == 11025);
}

TEST_CASE("generation is bitwise deterministic") {
  const IdentityParams id = identity_for_index(3, 20.0);
  GenSpec spec;
  spec.duration_s = 12.0;
  spec.jitter_pct = 4.0;
  spec.noise_snr_db = 30.0;
  spec.seed = 77;
  const SynthRecording a = generate(id, spec);
  const SynthRecording b = generate(id, spec);
  REQUIRE(a.signal.samples.size() == b.signal.samples.size());
  for (size_t i = 0; i < a.signal.samples.size(); ++i)
    CHECK(a.signal.samples[i] == b.signal.samples[i]);
  REQUIRE(a.truth.tones.size() == b.truth.tones.size());
  for (size_t i = 0; i < a.truth.tones.size(); ++i)
    CHECK(a.truth.tones[i].start == b.truth.tones[i].start);
}

TEST_CASE("the realized FSR tracks the target") {
  IdentityParams id = identity_for_index(1, 20.0);
  id.fsr_db_target = 6.0;
  GenSpec spec;
  spec.duration_s = 8.0;
  spec.noise_snr_db = 30.0;
  spec.seed = 3;
  const SynthRecording rec = generate(id, spec);
  const FsrValue fsr = fsr_sequence(rec.signal, rec.truth);
  CHECK(std::abs(fsr.ratio_db - 6.0) <= 1.0);
}

TEST_CASE("FSR fidelity holds across 100 seeds") {
  IdentityParams id = identity_for_index(2, 20.0);
  id.fsr_db_target = -3.5;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    GenSpec spec;
    spec.duration_s = 6.0;
    spec.noise_snr_db = 30.0;
    spec.jitter_pct = 3.0;
    spec.seed = seed;
    const SynthRecording rec = generate(id, spec);
    const FsrValue fsr = fsr_sequence(rec.signal, rec.truth);
    CHECK(std::abs(fsr.ratio_db - id.fsr_db_target) <= 1.0);
  }
}

TEST_CASE("generate validates parameters") {
  const IdentityParams id = identity_for_index(0, 10.0);
  GenSpec spec;
  spec.duration_s = 2.0;  // below the 4 s minimum
  CHECK_THROWS_AS(generate(id, spec), InvalidParams);

  IdentityParams bad = id;
  bad.systole_fraction = 0.6;
  GenSpec ok;
  ok.duration_s = 8.0;
  CHECK_THROWS_AS(generate(bad, ok), InvalidParams);

  IdentityParams high = id;
  high.s1_resonances[0].freq_hz = 700.0;  // outside the heart-sound band
  CHECK_THROWS_AS(generate(high, ok), InvalidParams);
}

TEST_CASE("make_corpus writes the full file layout") {
  TempDir dir("corpus_layout");
  CorpusSpec spec;
  spec.num_identities = 10;
  spec.spread_hz = 12.0;
  spec.seed = 42;
  spec.duration_min_s = 20.0;
  spec.duration_max_s = 25.0;
  const CorpusInfo info = make_corpus(spec, dir.file("c"));

  CHECK(info.manifest.entries.size() == 20);
  CHECK(info.identities.size() == 10);
  size_t enrolls = 0, verifies = 0;
  for (const auto& e : info.manifest.entries) {
    (e.role == RecordingRole::kEnroll ? enrolls : verifies)++;
    CHECK(std::filesystem::exists(info.manifest.resolve(e)));
  }
  CHECK(enrolls == 10);
  CHECK(verifies == 10);

  // The manifest file itself parses back to the same entries.
  const Manifest loaded =
      load_manifest((std::filesystem::path(dir.file("c")) / "manifest.txt").string());
  REQUIRE(loaded.entries.size() == info.manifest.entries.size());
  for (size_t i = 0; i < loaded.entries.size(); ++i) {
    CHECK(loaded.entries[i].person_id == info.manifest.entries[i].person_id);
    CHECK(loaded.entries[i].path == info.manifest.entries[i].path);
  }

  // Truth files parse and correspond to loadable WAVs.
  for (const auto& path : info.truth_paths) {
    const ToneEndpoints truth = load_truth_file(path);
    CHECK(truth.tones.size() >= 2);
  }
  const PcgSignal sig = load_wav(info.manifest.resolve(info.manifest.entries[0]));
  CHECK(sig.sample_rate == 11025.0);
  CHECK(sig.duration_s() >= 20.0);
  CHECK(sig.duration_s() <= 25.0);
}

TEST_CASE("identity parameters separate by at least the spread") {
  const double spread = 15.0;
  std::vector<double> fundamentals;
  for (size_t i = 0; i < 8; ++i) {
    const IdentityParams id = identity_for_index(i, spread);
    fundamentals.push_back(id.s1_resonances[0].freq_hz);
    for (const Resonance& r : id.s1_resonances) CHECK(r.freq_hz < 500.0);
    for (const Resonance& r : id.s2_resonances) CHECK(r.freq_hz < 500.0);
  }
  std::sort(fundamentals.begin(), fundamentals.end());
  for (size_t i = 1; i < fundamentals.size(); ++i)
    CHECK(fundamentals[i] - fundamentals[i - 1] >= spread - 1e-9);

  // Spread zero collapses every identity onto the same parameters.
  const IdentityParams a = identity_for_index(0, 0.0);
  const IdentityParams b = identity_for_index(7, 0.0);
  CHECK(a.s1_resonances[0].freq_hz == b.s1_resonances[0].freq_hz);
  CHECK(a.fsr_db_target == b.fsr_db_target);
  CHECK(a.base_rate_bpm == b.base_rate_bpm);
}

TEST_CASE("make_corpus validates its inputs") {
  TempDir dir("corpus_bad");
  CorpusSpec one;
  one.num_identities = 1;
  CHECK_THROWS_AS(make_corpus(one, dir.file("x")), InvalidParams);

  CorpusSpec wide;
  wide.num_identities = 30;
  wide.spread_hz = 30.0;  // 55 + 29*30 overflows the band
  CHECK_THROWS_AS(make_corpus(wide, dir.file("y")), InvalidParams);

  CorpusSpec short_rec;
  short_rec.num_identities = 2;
  short_rec.duration_min_s = 2.0;
  CHECK_THROWS_AS(make_corpus(short_rec, dir.file("z")), InvalidParams);
}

TEST_CASE("corpus generation is reproducible byte for byte") {
  TempDir dir("corpus_repro");
  CorpusSpec spec;
  spec.num_identities = 3;
  spec.spread_hz = 20.0;
  spec.seed = 7;
  spec.duration_min_s = 20.0;
  spec.duration_max_s = 21.0;
  make_corpus(spec, dir.file("a"));
  make_corpus(spec, dir.file("b"));

  for (const auto& entry :
       std::filesystem::directory_iterator(dir.file("a"))) {
    const std::string name = entry.path().filename().string();
    const std::string twin =
        (std::filesystem::path(dir.file("b")) / name).string();
    CHECK(read_file(entry.path().string()) == read_file(twin));
  }
}

TEST_CASE("clicks land between tones, not inside them") {
  IdentityParams id = identity_for_index(1, 20.0);
  GenSpec spec;
  spec.duration_s = 20.0;
  spec.noise_snr_db = 200.0;
  spec.jitter_pct = 0.0;
  spec.clicks_per_10s = 1.0;
  spec.seed = 5;
  const SynthRecording rec = generate(id, spec);

  GenSpec clean = spec;
  clean.clicks_per_10s = 0.0;
  const SynthRecording base = generate(id, clean);

  // Find samples that differ: they are the click; assert they fall outside
  // every truth tone window.
  REQUIRE(rec.signal.samples.size() == base.signal.samples.size());
  for (size_t i = 0; i < rec.signal.samples.size(); ++i) {
    if (rec.signal.samples[i] == base.signal.samples[i]) continue;
    for (const Tone& t : rec.truth.tones) {
      CHECK((i < t.start || i >= t.end));
    }
  }
}

}  // TEST_SUITE
