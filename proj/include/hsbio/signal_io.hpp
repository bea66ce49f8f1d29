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

#ifndef HSBIO_SIGNAL_IO_HPP_
#define HSBIO_SIGNAL_IO_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "hsbio/error.hpp"

namespace hsbio {

// A mono heart-sound recording. Samples are unit-scale reals in [-1, 1].
struct PcgSignal {
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz
  std::string source_id;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class WindowKind { kRectangular, kHamming };

// Analysis framing. Lengths are in samples; 0 < hop <= frame_length.
struct FrameSpec {
  size_t frame_length = 0;
  size_t hop = 0;
  WindowKind window = WindowKind::kRectangular;

  static FrameSpec from_ms(double frame_ms, double hop_ms, double sample_rate,
                           WindowKind window = WindowKind::kRectangular);

  // floor((n - frame_length)/hop) + 1, or 0 if the signal is too short.
  size_t num_frames(size_t num_samples) const;
};

// Per-frame short-time energy: sum of squared windowed samples.
struct EnergyTrack {
  std::vector<double> energies;
  FrameSpec frame_spec;
};

// Reads a mono PCM WAV (8/16/24-bit) and scales samples to unit range.
PcgSignal load_wav(const std::string& path);

// Writes 16-bit little-endian PCM at the signal's rate. Written atomically.
// Round-trips 16-bit integer sample values losslessly.
void write_wav(const PcgSignal& sig, const std::string& path);

// Linear-phase FIR low-pass (Hamming-windowed sinc), group delay compensated:
// the output has the same length and is time-aligned with the input.
// Attenuation one octave above the cutoff is at least 40 dB.
PcgSignal lowpass_filter(const PcgSignal& sig, double cutoff_hz);

EnergyTrack frame_energy(const PcgSignal& sig, const FrameSpec& spec);

std::vector<double> make_window(WindowKind kind, size_t length);

}  // namespace hsbio

#endif  // HSBIO_SIGNAL_IO_HPP_
