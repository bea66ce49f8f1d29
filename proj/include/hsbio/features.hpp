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

#ifndef HSBIO_FEATURES_HPP_
#define HSBIO_FEATURES_HPP_

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "hsbio/segmentation.hpp"
#include "hsbio/signal_io.hpp"

namespace hsbio {

enum class FilterScale { kMel, kLinear };

struct FilterbankSpec {
  FilterScale scale = FilterScale::kMel;
  size_t num_filters = 24;
  double min_freq = 0.0;
  double max_freq = 500.0;
  size_t fft_size = 1024;
};

enum class DeltaOrder { kNone, kFirst, kFirstAndSecond };

struct CepstrumSpec {
  size_t num_coeffs = 12;       // M; c1..cM are emitted
  bool include_c0_energy = true;  // append C0 as the log-energy dimension
  DeltaOrder deltas = DeltaOrder::kNone;
  size_t delta_window = 2;      // regression half-width in frames
};

// T x D feature rows, row-major, with a label per dimension.
struct FeatureMatrix {
  size_t num_frames = 0;
  size_t dim = 0;
  std::vector<double> data;
  std::vector<std::string> dim_labels;

  std::span<const double> row(size_t t) const {
    return {data.data() + t * dim, dim};
  }
  std::span<double> row(size_t t) { return {data.data() + t * dim, dim}; }
  double at(size_t t, size_t d) const { return data[t * dim + d]; }
  double& at(size_t t, size_t d) { return data[t * dim + d]; }
};

struct FsrValue {
  double ratio;     // averaged S1 power over averaged S2 power
  double ratio_db;  // 10*log10(ratio)
};

double mel_from_hz(double f_lin);
double hz_from_mel(double mel);

// C_i = sum_{k=1..K} X_k * cos(i * (k - 1/2) * pi / K), i = 0..M.
// Returns M+1 values; C_0 is the log-energy term.
std::vector<double> cepstrum(std::span<const double> filter_log_energies,
                             size_t num_coeffs);

// Triangular filterbank weights over fft_size/2+1 spectrum bins.
std::vector<std::vector<double>> make_filterbank(const FilterbankSpec& fb,
                                                 double sample_rate);

// Per frame: window -> power spectrum -> filterbank log-energies (floored)
// -> cepstrum -> optional deltas. Layout (documented in dim_labels):
//   c1..cM [d1..dM [dd1..ddM]] [E [dE [ddE]]]
FeatureMatrix extract_cepstra(const PcgSignal& sig, const FilterbankSpec& fb,
                              const CepstrumSpec& cs, const FrameSpec& frames);

// z-transform evaluated on num_bins points along the unit-circle arc
// [f_start, f_end] (Bluestein construction).
std::vector<std::complex<double>> czt_zoom_spectrum(
    std::span<const double> segment, double sample_rate, double f_start,
    double f_end, size_t num_bins);

// Sequence-level first-to-second power ratio over complete S1->S2 cycles.
// Power is the mean squared amplitude over each tone window.
FsrValue fsr_sequence(const PcgSignal& sig, const ToneEndpoints& tones);

// Average FSR per window_s-second window, as a dB value tagged onto every
// feature frame whose centre lies in that window. Windows without a complete
// cycle inherit the nearest valid window's value.
std::vector<double> fsr_windowed(const PcgSignal& sig,
                                 const ToneEndpoints& tones,
                                 const FrameSpec& frames,
                                 double window_s = 5.0);

void append_column(FeatureMatrix& fm, std::span<const double> column,
                   const std::string& label);

// Per-tone pooled feature vectors: the mean cepstral row over each tone's
// frames, in tone order.
std::vector<std::vector<double>> tone_mean_cepstra(const PcgSignal& sig,
                                                   const ToneEndpoints& tones,
                                                   const FilterbankSpec& fb,
                                                   const CepstrumSpec& cs,
                                                   const FrameSpec& frames);

struct FeatureConfig {
  FilterbankSpec filterbank;
  CepstrumSpec cepstrum;
  FrameSpec frames;
};

// 12 Mel cepstra + C0 log-energy, 13 dimensions.
FeatureConfig structural_feature_config(double sample_rate);
// Linear filterbank, 16 cepstra + 16 deltas + E + dE (34 dims before FSR).
FeatureConfig statistical_feature_config(double sample_rate);

// Full statistical front end: low-pass, segment, extract cepstra over the
// detected tone frames and append the windowed FSR column (35 dims with
// FSR). Frames outside the detected tones are dropped.
FeatureMatrix statistical_frontend(const PcgSignal& sig,
                                   double lowpass_cutoff_hz = 500.0,
                                   double fsr_window_s = 5.0,
                                   bool append_fsr = true);

// Text: one frame per line. Binary: "HSFM" magic, u32 version/T/D, f64 data.
std::string feature_matrix_text(const FeatureMatrix& fm);
std::string feature_matrix_binary(const FeatureMatrix& fm);
FeatureMatrix parse_feature_matrix_binary(const std::string& bytes);

}  // namespace hsbio

#endif  // HSBIO_FEATURES_HPP_
