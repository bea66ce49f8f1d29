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

#ifndef HSBIO_SEGMENTATION_HPP_
#define HSBIO_SEGMENTATION_HPP_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hsbio/signal_io.hpp"

namespace hsbio {

enum class ToneLabel { kS1, kS2 };

const char* to_string(ToneLabel label);

// One detected primary heart sound. [start, end) in samples; all tones from
// one detection run share the same constant width.
struct Tone {
  ToneLabel label;
  size_t start;
  size_t end;
  double peak_energy;  // energy of the frame the tone was anchored at
};

struct ToneEndpoints {
  std::vector<Tone> tones;       // sorted by start, labels alternating
  double period_samples = 0.0;   // estimated heartbeat period
  std::vector<std::string> warnings;
};

struct SegmentationConfig {
  double tone_window_ms = 120.0;
  // Half-width of the local-maximum search around each periodic position.
  // Negative means: derive as 15% of the estimated period.
  int search_halfwidth_frames = -1;
  double analysis_window_s = 4.0;
  // Lead of the tone window before the start of the anchor frame, so the
  // attack of the tone is not clipped.
  double back_porch_ms = 5.0;
  FrameSpec energy_frame;  // 20 ms / 10 ms rectangular by default

  static SegmentationConfig defaults(double sample_rate);
};

// Lag (in frames) of the autocorrelation maximum, searched after the first
// autocorrelation minimum. Throws NoPeriodFound when the track has no
// minimum-then-maximum shape.
size_t estimate_period(const EnergyTrack& track);

// Single-window detection (intended for signals up to ~analysis_window_s).
ToneEndpoints detect_tones_short(const PcgSignal& sig,
                                 const SegmentationConfig& cfg);

// Detection restricted to sample range [begin, end); emitted endpoints are in
// global sample coordinates and may extend slightly past the range edges.
ToneEndpoints detect_tones_range(const PcgSignal& sig,
                                 const SegmentationConfig& cfg, size_t begin,
                                 size_t end);

// Long-signal detection: splits into ~analysis_window_s wide windows, detects
// per window, joins the endpoint sets and deduplicates across the seams.
ToneEndpoints detect_tones(const PcgSignal& sig, const SegmentationConfig& cfg);

// Indices (i, j) into tones of each complete S1->S2 cycle.
std::vector<std::pair<size_t, size_t>> complete_cycles(const ToneEndpoints& t);

// One line per tone: "label start_sample end_sample".
std::string format_endpoints(const ToneEndpoints& t);

}  // namespace hsbio

#endif  // HSBIO_SEGMENTATION_HPP_
