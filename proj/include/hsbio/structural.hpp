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

#ifndef HSBIO_STRUCTURAL_HPP_
#define HSBIO_STRUCTURAL_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "hsbio/features.hpp"
#include "hsbio/signal_io.hpp"

namespace hsbio {

inline constexpr size_t kStructuralDim = 13;  // 12 Mel cepstra + log-energy

// Stored identity: one pooled cepstral vector per S1 and S2 of each complete
// cycle, plus the sequence FSR in dB.
struct StructuralTemplate {
  std::string person_id;
  std::vector<std::vector<double>> s1_features;  // N x 13
  std::vector<std::vector<double>> s2_features;  // N x 13
  double fsr_db = 0.0;

  size_t num_cycles() const { return s1_features.size(); }
};

struct StructuralParams {
  double th_fsr = 0.25;          // activation threshold on normalized d_FSR
  double fsr_db_max = 20.0;      // normalization ceiling for d_FSR
  double decision_threshold = 10.0;
  double subseq_window_s = 5.0;  // best-subsequence window, 4..6 s
  double subseq_stride_s = 0.5;
  double lowpass_cutoff_hz = 500.0;
};

// Quality of a 4-cycle candidate: reciprocal of the summed pairwise Euclidean
// distances over the S1 and S2 cycle vectors. Identical cycles give +inf.
double quality_index(const std::vector<std::vector<double>>& s1_vectors,
                     const std::vector<std::vector<double>>& s2_vectors);

struct SubsequencePick {
  size_t offset;   // samples
  double quality;  // DHS quality index of the selected window
};

// Slides a window over the signal, segments each candidate and scores the
// quality of its first four cycles; returns the best offset.
SubsequencePick best_subsequence(const PcgSignal& sig, double window_s,
                                 double stride_s = 0.5);

StructuralTemplate enroll_structural(const PcgSignal& sig,
                                     const StructuralParams& params);

double structural_distance(const StructuralTemplate& x,
                           const StructuralTemplate& y,
                           const StructuralParams& params);

struct StructuralVerifyResult {
  double distance;
  bool accept;
};

StructuralVerifyResult verify_structural(const PcgSignal& probe,
                                         const StructuralTemplate& tmpl,
                                         const StructuralParams& params);

// Versioned text record: person_id, N, fsr_db, then N x 13 + N x 13 values.
void save_template(const StructuralTemplate& tmpl, const std::string& path);
StructuralTemplate load_template(const std::string& path);

}  // namespace hsbio

#endif  // HSBIO_STRUCTURAL_HPP_
