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

#ifndef HSBIO_SYNTH_HPP_
#define HSBIO_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hsbio/manifest.hpp"
#include "hsbio/segmentation.hpp"
#include "hsbio/signal_io.hpp"

namespace hsbio {

// One damped-sinusoid component of a synthetic tone.
struct Resonance {
  double freq_hz;
  double decay_per_s;
  double amplitude;  // relative within the tone
};

struct IdentityParams {
  std::vector<Resonance> s1_resonances;
  std::vector<Resonance> s2_resonances;
  double fsr_db_target = 0.0;
  double base_rate_bpm = 72.0;
  double systole_fraction = 0.34;  // S1->S2 gap as a fraction of the cycle
};

struct GenSpec {
  double duration_s = 30.0;
  double jitter_pct = 3.0;       // per-cycle length jitter, +-percent
  double noise_snr_db = 30.0;    // >= 150 disables noise
  double clicks_per_10s = 0.0;   // impulsive-noise injection rate
  double sample_rate = 11025.0;
  uint64_t seed = 1;
  // Slow respiratory-style modulation of the S1/S2 balance: the S1 gain
  // swings by +-depth and the S2 gain counter-swings, with a random phase.
  double breath_mod_depth = 0.0;
  double breath_period_s = 4.0;
  // Overall recording level (sensor coupling); scales tones and clicks,
  // noise follows via the SNR.
  double gain_db = 0.0;
};

struct SynthRecording {
  PcgSignal signal;
  ToneEndpoints truth;  // exact scheduled endpoints
  IdentityParams identity;
  uint64_t seed = 0;
};

// S1/S2 amplitudes are calibrated so the realized FSR over the truth windows
// matches fsr_db_target. Bit-reproducible for a fixed (identity, spec).
SynthRecording generate(const IdentityParams& identity, const GenSpec& spec);

struct CorpusSpec {
  size_t num_identities = 10;
  size_t recordings_each = 2;  // first is enroll, the rest verify
  double spread_hz = 12.0;     // inter-identity resonance separation
  uint64_t seed = 1;
  double duration_min_s = 20.0;
  double duration_max_s = 70.0;
  double jitter_pct = 3.0;
  double noise_snr_db = 30.0;
  double clicks_per_10s = 0.0;
  double sample_rate = 11025.0;
  // Per-recording perturbation of the identity parameters, modelling
  // session-to-session physiological change (relative sigma).
  double session_variability = 0.03;
  // Within-recording respiratory modulation (see GenSpec).
  double breath_mod_depth = 0.05;
  double breath_period_s = 4.0;
  // Per-recording level draw: uniform in +-gain_var_db.
  double gain_var_db = 4.0;
};

struct CorpusInfo {
  Manifest manifest;
  std::vector<IdentityParams> identities;
  std::vector<std::string> truth_paths;  // parallel to manifest entries
};

// Deterministic identity parameter map; spread 0 collapses every identity to
// the same parameters.
IdentityParams identity_for_index(size_t index, double spread_hz);

// Writes WAVs, truth endpoint files and a manifest under out_dir.
CorpusInfo make_corpus(const CorpusSpec& spec, const std::string& out_dir);

// Truth file: "# identity <id> seed <seed>" header then segment lines.
void write_truth_file(const std::string& path, const std::string& identity,
                      uint64_t seed, const ToneEndpoints& truth);
ToneEndpoints load_truth_file(const std::string& path);

}  // namespace hsbio

#endif  // HSBIO_SYNTH_HPP_
