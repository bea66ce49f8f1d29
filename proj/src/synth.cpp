// Copyright 2026 The hsbio Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsbio/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "hsbio/file_util.hpp"
#include "hsbio/rng.hpp"

namespace hsbio {

namespace {

constexpr double kLeadS = 0.3;
constexpr double kTailS = 0.1;
constexpr double kBurstS = 0.10;         // effective tone duration
constexpr double kTruthWindowS = 0.120;  // matches the segmentation default
constexpr double kBaseAmplitude = 0.45;
constexpr double kClickWidthS = 0.0025;

std::vector<double> render_burst(const std::vector<Resonance>& resonances,
                                 double sample_rate) {
  const size_t len =
      static_cast<size_t>(std::lround(kBurstS * sample_rate));
  std::vector<double> burst(len, 0.0);
  for (const Resonance& r : resonances) {
    for (size_t i = 0; i < len; ++i) {
      const double tau = static_cast<double>(i) / sample_rate;
      burst[i] += r.amplitude * std::sin(2.0 * kPi * r.freq_hz * tau) *
                  std::exp(-r.decay_per_s * tau);
    }
  }
  return burst;
}

double mean_square_padded(const std::vector<double>& burst, size_t window) {
  double acc = 0.0;
  for (double v : burst) acc += v * v;
  return acc / static_cast<double>(window);
}

void validate_identity(const IdentityParams& id, double sample_rate) {
  if (id.s1_resonances.empty() || id.s2_resonances.empty())
    throw InvalidParams("identity needs S1 and S2 resonances");
  for (const auto* set : {&id.s1_resonances, &id.s2_resonances})
    for (const Resonance& r : *set) {
      if (!(r.freq_hz > 0.0) || !(r.freq_hz < 500.0) ||
          !(r.freq_hz < sample_rate / 2.0))
        throw InvalidParams("resonance frequency outside the heart-sound band");
      if (!(r.decay_per_s > 0.0)) throw InvalidParams("non-positive decay");
    }
  if (!(id.base_rate_bpm >= 30.0) || !(id.base_rate_bpm <= 180.0))
    throw InvalidParams("heart rate outside [30, 180] bpm");
  if (!(id.systole_fraction > 0.0) || !(id.systole_fraction < 0.5))
    throw InvalidParams("systole_fraction must lie in (0, 0.5)");
}

}  // namespace

SynthRecording generate(const IdentityParams& identity, const GenSpec& spec) {
  if (!(spec.duration_s >= 4.0))
    throw InvalidParams("duration must be at least 4 s");
  if (!(spec.sample_rate > 0.0)) throw InvalidParams("bad sample rate");
  if (spec.jitter_pct < 0.0 || spec.jitter_pct >= 50.0)
    throw InvalidParams("jitter_pct must lie in [0, 50)");
  validate_identity(identity, spec.sample_rate);

  const double fs = spec.sample_rate;
  const size_t n = static_cast<size_t>(std::lround(spec.duration_s * fs));
  const size_t win = static_cast<size_t>(std::lround(kTruthWindowS * fs));
  const size_t tail = static_cast<size_t>(std::lround(kTailS * fs));

  Rng rng(spec.seed);

  const std::vector<double> b1 = render_burst(identity.s1_resonances, fs);
  const std::vector<double> b2 = render_burst(identity.s2_resonances, fs);
  const double p1 = mean_square_padded(b1, win);
  const double p2 = mean_square_padded(b2, win);
  if (!(p1 > 0.0) || !(p2 > 0.0))
    throw InvalidParams("degenerate tone bursts");

  // Calibrate the S2 amplitude so the power ratio over the truth windows
  // realizes the requested FSR exactly (before noise).
  const double a1 = kBaseAmplitude * std::pow(10.0, spec.gain_db / 20.0);
  const double a2 =
      a1 * std::sqrt(p1 / (p2 * std::pow(10.0, identity.fsr_db_target / 10.0)));

  // Integer-sample schedule keeps seeded output and spacing exact.
  struct Cycle {
    size_t s1_on;
    size_t s2_on;
    size_t cycle_samples;
  };
  std::vector<Cycle> cycles;
  const double period_s = 60.0 / identity.base_rate_bpm;
  size_t onset = static_cast<size_t>(std::lround(kLeadS * fs));
  while (true) {
    const double jitter =
        spec.jitter_pct > 0.0
            ? 1.0 + spec.jitter_pct / 100.0 * (2.0 * rng.uniform() - 1.0)
            : 1.0;
    const size_t cycle_samples =
        static_cast<size_t>(std::lround(period_s * jitter * fs));
    const size_t s2_on =
        onset + static_cast<size_t>(std::lround(
                    identity.systole_fraction *
                    static_cast<double>(cycle_samples)));
    if (s2_on + win + tail > n) break;
    cycles.push_back({onset, s2_on, cycle_samples});
    onset += cycle_samples;
  }
  if (cycles.empty())
    throw InvalidParams("duration too short for a single cardiac cycle");

  const double breath_phase =
      spec.breath_mod_depth > 0.0 ? rng.uniform(0.0, 2.0 * kPi) : 0.0;
  auto breath = [&](size_t onset) {
    if (spec.breath_mod_depth <= 0.0) return 0.0;
    const double t = static_cast<double>(onset) / fs;
    return spec.breath_mod_depth *
           std::sin(2.0 * kPi * t / spec.breath_period_s + breath_phase);
  };

  std::vector<double> x(n, 0.0);
  for (const Cycle& c : cycles) {
    const double m = breath(c.s1_on);
    const double g1 = a1 * (1.0 + m);
    const double g2 = a2 * (1.0 - m);
    for (size_t i = 0; i < b1.size() && c.s1_on + i < n; ++i)
      x[c.s1_on + i] += g1 * b1[i];
    for (size_t i = 0; i < b2.size() && c.s2_on + i < n; ++i)
      x[c.s2_on + i] += g2 * b2[i];
  }

  // Impulsive clicks: short loud pulses placed mid-diastole.
  const size_t num_clicks = static_cast<size_t>(
      std::lround(spec.duration_s * spec.clicks_per_10s / 10.0));
  if (num_clicks > 0) {
    double peak = 0.0;
    for (double v : b1) peak = std::max(peak, std::abs(a1 * v));
    for (double v : b2) peak = std::max(peak, std::abs(a2 * v));
    const double click_amp = 1.2 * peak;
    const size_t click_len =
        static_cast<size_t>(std::max<long>(3, std::lround(kClickWidthS * fs)));
    for (size_t c = 0; c < num_clicks; ++c) {
      const size_t ci = rng.index(cycles.size());
      const size_t gap_start = cycles[ci].s2_on + win;
      const size_t gap_end = ci + 1 < cycles.size()
                                 ? cycles[ci + 1].s1_on
                                 : n - std::min(n, tail);
      if (gap_end <= gap_start + click_len + 2) continue;
      const size_t room = gap_end - gap_start - click_len;
      const size_t pos =
          gap_start + static_cast<size_t>(rng.uniform() * (room > 1 ? room - 1 : 0));
      for (size_t i = 0; i < click_len && pos + i < n; ++i)
        x[pos + i] += click_amp * 0.5 *
                      (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                      static_cast<double>(click_len - 1)));
    }
  }

  if (spec.noise_snr_db < 150.0) {
    double power = 0.0;
    for (double v : x) power += v * v;
    power /= static_cast<double>(n);
    const double sigma =
        std::sqrt(power * std::pow(10.0, -spec.noise_snr_db / 10.0));
    for (double& v : x) v += sigma * rng.normal();
  }

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.99) {
    const double scale = 0.99 / peak;
    for (double& v : x) v *= scale;
  }

  SynthRecording rec;
  rec.seed = spec.seed;
  rec.identity = identity;
  rec.signal.sample_rate = fs;
  rec.signal.samples = std::move(x);
  rec.signal.source_id = "synth-seed-" + std::to_string(spec.seed);

  double mean_cycle = 0.0;
  for (const Cycle& c : cycles)
    mean_cycle += static_cast<double>(c.cycle_samples);
  rec.truth.period_samples = mean_cycle / static_cast<double>(cycles.size());
  for (const Cycle& c : cycles) {
    rec.truth.tones.push_back({ToneLabel::kS1, c.s1_on, c.s1_on + win, 0.0});
    rec.truth.tones.push_back({ToneLabel::kS2, c.s2_on, c.s2_on + win, 0.0});
  }
  return rec;
}

namespace {

// Session-to-session physiological drift: resonances, decays, FSR balance
// and heart rate all move a little between recordings of the same person.
IdentityParams perturb_session(const IdentityParams& base, double sigma,
                               Rng& rng) {
  if (sigma <= 0.0) return base;
  auto clipped = [&rng]() { return std::clamp(rng.normal(), -2.0, 2.0); };
  IdentityParams out = base;
  for (auto* set : {&out.s1_resonances, &out.s2_resonances})
    for (Resonance& r : *set) {
      r.freq_hz = std::clamp(r.freq_hz * (1.0 + sigma * clipped()), 20.0, 495.0);
      r.decay_per_s *= 1.0 + sigma * clipped();
      r.amplitude *= 1.0 + sigma * clipped();
    }
  out.fsr_db_target += 10.0 * sigma * clipped();
  out.base_rate_bpm =
      std::clamp(out.base_rate_bpm * (1.0 + sigma * clipped()), 40.0, 150.0);
  out.systole_fraction =
      std::clamp(out.systole_fraction * (1.0 + sigma * clipped()), 0.25, 0.45);
  return out;
}

}  // namespace

IdentityParams identity_for_index(size_t index, double spread_hz) {
  IdentityParams id;
  if (spread_hz <= 0.0) {
    // Indistinguishable population: identical parameters for everyone.
    id.s1_resonances = {{120.0, 28.0, 1.0}, {226.0, 35.0, 0.55}};
    id.s2_resonances = {{166.0, 40.0, 1.0}, {315.0, 48.0, 0.5}};
    id.fsr_db_target = 0.0;
    id.base_rate_bpm = 72.0;
    id.systole_fraction = 0.34;
    return id;
  }

  const double i = static_cast<double>(index);
  auto frac = [](double v) { return v - std::floor(v); };

  const double f1 = 55.0 + i * spread_hz;
  const double f1b = std::min(1.83 * f1 + 7.0, 480.0);
  const double f2 = std::min(1.27 * f1 + 11.0 + 0.4 * spread_hz, 460.0);
  const double f2b = std::min(1.9 * f2, 485.0);
  id.s1_resonances = {{f1, 28.0, 1.0}, {f1b, 35.0, 0.55}};
  id.s2_resonances = {{f2, 40.0, 1.0}, {f2b, 48.0, 0.5}};
  id.fsr_db_target = -5.0 + 10.0 * frac(i * 0.6180339887498949);
  id.base_rate_bpm = 58.0 + 44.0 * frac(i * 0.7548776662466927);
  id.systole_fraction = 0.30 + 0.08 * frac(i * 0.5698402909980532);
  return id;
}

CorpusInfo make_corpus(const CorpusSpec& spec, const std::string& out_dir) {
  if (spec.num_identities < 2)
    throw InvalidParams("corpus needs at least 2 identities");
  if (spec.recordings_each < 2)
    throw InvalidParams("corpus needs at least 2 recordings per identity");
  if (!(spec.duration_min_s >= 4.0) ||
      !(spec.duration_max_s >= spec.duration_min_s))
    throw InvalidParams("bad duration range");
  if (spec.spread_hz > 0.0 &&
      55.0 + static_cast<double>(spec.num_identities - 1) * spec.spread_hz >
          440.0)
    throw InvalidParams("spread too large for the identity count");

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  Rng rng(spec.seed);
  CorpusInfo info;
  info.manifest.base_dir = out_dir;

  for (size_t i = 0; i < spec.num_identities; ++i) {
    char id_buf[16];
    std::snprintf(id_buf, sizeof(id_buf), "p%03zu", i);
    const std::string person_id = id_buf;
    const IdentityParams params = identity_for_index(i, spec.spread_hz);
    info.identities.push_back(params);

    for (size_t r = 0; r < spec.recordings_each; ++r) {
      GenSpec gen;
      gen.duration_s = rng.uniform(spec.duration_min_s, spec.duration_max_s);
      gen.jitter_pct = spec.jitter_pct;
      gen.noise_snr_db = spec.noise_snr_db;
      gen.clicks_per_10s = spec.clicks_per_10s;
      gen.sample_rate = spec.sample_rate;
      gen.breath_mod_depth = spec.breath_mod_depth;
      gen.breath_period_s = spec.breath_period_s;
      gen.gain_db = rng.uniform(-spec.gain_var_db, spec.gain_var_db);
      gen.seed = derive_seed(spec.seed, i * 1000 + r);

      Rng session_rng(derive_seed(spec.seed, 500000 + i * 1000 + r));
      const IdentityParams session =
          perturb_session(params, spec.session_variability, session_rng);
      SynthRecording rec = generate(session, gen);

      std::string stem = person_id;
      if (r == 0) {
        stem += "_enroll";
      } else if (r == 1) {
        stem += "_verify";
      } else {
        stem += "_verify" + std::to_string(r);
      }
      const std::string wav_rel = stem + ".wav";
      const std::string truth_rel = stem + ".tones";
      write_wav(rec.signal, (fs::path(out_dir) / wav_rel).string());
      write_truth_file((fs::path(out_dir) / truth_rel).string(), person_id,
                       gen.seed, rec.truth);

      ManifestEntry entry;
      entry.person_id = person_id;
      entry.role = r == 0 ? RecordingRole::kEnroll : RecordingRole::kVerify;
      entry.path = wav_rel;
      info.manifest.entries.push_back(entry);
      info.truth_paths.push_back((fs::path(out_dir) / truth_rel).string());
    }
  }

  write_manifest(info.manifest,
                 (fs::path(out_dir) / "manifest.txt").string());
  return info;
}

void write_truth_file(const std::string& path, const std::string& identity,
                      uint64_t seed, const ToneEndpoints& truth) {
  std::string out =
      "# identity " + identity + " seed " + std::to_string(seed) + "\n";
  out += format_endpoints(truth);
  write_file_atomic(path, out);
}

ToneEndpoints load_truth_file(const std::string& path) {
  std::istringstream in(read_file(path));
  ToneEndpoints t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string label;
    size_t start = 0, end = 0;
    if (!(fields >> label >> start >> end))
      throw Error("malformed truth line: " + line);
    if (label != "S1" && label != "S2")
      throw Error("unknown tone label: " + label);
    t.tones.push_back(
        {label == "S1" ? ToneLabel::kS1 : ToneLabel::kS2, start, end, 0.0});
  }
  if (t.tones.empty()) throw Error("empty truth file: " + path);
  return t;
}

}  // namespace hsbio
