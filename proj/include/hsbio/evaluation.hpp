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

#ifndef HSBIO_EVALUATION_HPP_
#define HSBIO_EVALUATION_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "hsbio/manifest.hpp"
#include "hsbio/statistical.hpp"
#include "hsbio/structural.hpp"

namespace hsbio {

// Whether larger scores indicate a match (statistical LLR) or smaller ones do
// (structural distance).
enum class ScorePolarity { kHigherIsMatch, kLowerIsMatch };

struct GenuineTrial {
  std::string claimed_id;
  double score;
};

struct ImpostorTrial {
  std::string claimed_id;
  std::string probe_id;
  double score;
};

struct TrialSet {
  std::vector<GenuineTrial> genuine;
  std::vector<ImpostorTrial> impostor;
  ScorePolarity polarity = ScorePolarity::kHigherIsMatch;
};

struct ErrorRates {
  double fmr;   // impostor trials accepted
  double fnmr;  // genuine trials rejected
};

struct DetPoint {
  double threshold;
  double fmr;
  double fnmr;
};

struct DetCurve {
  std::vector<DetPoint> points;  // ordered by threshold
};

struct EerResult {
  double eer;
  double threshold;
};

// Boundary convention: a score equal to the threshold accepts (matching the
// statistical decision rule); mirrored for lower-is-match.
ErrorRates rates_at(const TrialSet& trials, double threshold);

// Sweeps all distinct scores; at the closest FMR/FNMR bracketing pair the EER
// is reported as the midpoint (FMR+FNMR)/2.
EerResult eer(const TrialSet& trials);

// Thresholds at all distinct scores plus a reject-all sentinel, subsampled to
// num_points with the endpoints preserved.
DetCurve det_curve(const TrialSet& trials, size_t num_points);

// CSV with header "threshold,fmr,fnmr".
std::string det_csv(const DetCurve& curve);

enum class SystemKind { kStructural, kStatistical };

struct ExperimentConfig {
  SystemKind system = SystemKind::kStatistical;
  TrainConfig train;
  StructuralParams structural;
  double lowpass_cutoff_hz = 500.0;
  double fsr_window_s = 5.0;
  bool append_fsr = true;
  int jobs = 1;
  // When set, each claimed identity is scored against a UBM trained without
  // its own enrollment recording (leave-one-out world model).
  bool exclude_claimed_from_ubm = false;
};

struct ExperimentResult {
  TrialSet trials;
  std::vector<std::string> skipped;  // one reason line per skipped item
  size_t num_identities = 0;
};

// Enrolls every identity from its enroll recording, scores one genuine trial
// per verify recording and impostor trials for every ordered identity pair.
ExperimentResult run_experiment(const Manifest& manifest,
                                const ExperimentConfig& cfg);

std::string experiment_report(const ExperimentResult& result,
                              const EerResult& eer_result,
                              SystemKind system);

}  // namespace hsbio

#endif  // HSBIO_EVALUATION_HPP_
