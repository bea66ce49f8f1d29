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

#include "hsbio/structural.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "hsbio/file_util.hpp"
#include "hsbio/segmentation.hpp"

namespace hsbio {

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// Mean pairwise distance between two cycle sets, normalized by N_x * N_y.
double mean_pairwise(const std::vector<std::vector<double>>& xs,
                     const std::vector<std::vector<double>>& ys) {
  double acc = 0.0;
  for (const auto& x : xs)
    for (const auto& y : ys) acc += euclidean(x, y);
  return acc / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

// Cross-set mean pairwise distance centered by the within-set scatter
// (energy-distance form). Non-negative, and exactly zero when the two cycle
// sets coincide, so a template is at distance zero from itself; equals the
// plain mean pairwise distance whenever the within-set scatter vanishes.
double centered_pairwise(const std::vector<std::vector<double>>& xs,
                         const std::vector<std::vector<double>>& ys) {
  const double cross = mean_pairwise(xs, ys);
  const double within =
      0.5 * mean_pairwise(xs, xs) + 0.5 * mean_pairwise(ys, ys);
  return std::max(0.0, cross - within);
}

// Per-cycle S1/S2 pooled vectors for the given range of a signal.
struct CycleFeatures {
  std::vector<std::vector<double>> s1;
  std::vector<std::vector<double>> s2;
};

CycleFeatures cycle_features(const PcgSignal& sig, const ToneEndpoints& tones,
                             const FeatureConfig& fc) {
  const auto vectors =
      tone_mean_cepstra(sig, tones, fc.filterbank, fc.cepstrum, fc.frames);
  CycleFeatures out;
  for (const auto& [i_s1, i_s2] : complete_cycles(tones)) {
    out.s1.push_back(vectors[i_s1]);
    out.s2.push_back(vectors[i_s2]);
  }
  return out;
}

}  // namespace

double quality_index(const std::vector<std::vector<double>>& s1_vectors,
                     const std::vector<std::vector<double>>& s2_vectors) {
  if (s1_vectors.size() != 4 || s2_vectors.size() != 4)
    throw InvalidParams("quality_index: needs exactly 4 S1 and 4 S2 vectors");
  double denom = 0.0;
  for (const auto* set : {&s1_vectors, &s2_vectors})
    for (size_t k = 0; k < 4; ++k)
      for (size_t j = 0; j < 4; ++j)
        if (j != k) denom += euclidean((*set)[j], (*set)[k]);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / denom;
}

SubsequencePick best_subsequence(const PcgSignal& sig, double window_s,
                                 double stride_s) {
  if (!(window_s > 0.0) || !(stride_s > 0.0))
    throw InvalidParams("best_subsequence: bad window/stride");
  const size_t n = sig.samples.size();
  const size_t win = static_cast<size_t>(std::lround(window_s * sig.sample_rate));
  const size_t stride =
      static_cast<size_t>(std::max<long>(1, std::lround(stride_s * sig.sample_rate)));
  if (n < win)
    throw NoValidSubsequence("signal shorter than the selection window");

  const SegmentationConfig seg = SegmentationConfig::defaults(sig.sample_rate);
  const FeatureConfig fc = structural_feature_config(sig.sample_rate);

  bool found = false;
  SubsequencePick best{0, 0.0};
  for (size_t off = 0;; off += stride) {
    if (off + win > n) break;
    try {
      const ToneEndpoints tones = detect_tones_range(sig, seg, off, off + win);
      CycleFeatures cf = cycle_features(sig, tones, fc);
      if (cf.s1.size() < 4) continue;
      cf.s1.resize(4);
      cf.s2.resize(4);
      const double q = quality_index(cf.s1, cf.s2);
      if (!found || q > best.quality) {
        best = {off, q};
        found = true;
      }
    } catch (const Error&) {
      continue;  // candidate without a usable segmentation
    }
  }
  if (!found)
    throw NoValidSubsequence("no window with four complete cycles");
  return best;
}

StructuralTemplate enroll_structural(const PcgSignal& sig,
                                     const StructuralParams& params) {
  const SubsequencePick pick =
      best_subsequence(sig, params.subseq_window_s, params.subseq_stride_s);
  const size_t win =
      static_cast<size_t>(std::lround(params.subseq_window_s * sig.sample_rate));

  const PcgSignal filtered = lowpass_filter(sig, params.lowpass_cutoff_hz);
  const SegmentationConfig seg = SegmentationConfig::defaults(sig.sample_rate);
  const ToneEndpoints tones =
      detect_tones_range(filtered, seg, pick.offset, pick.offset + win);

  const FeatureConfig fc = structural_feature_config(sig.sample_rate);
  CycleFeatures cf = cycle_features(filtered, tones, fc);
  if (cf.s1.size() < 4)
    throw TooFewTones("selected subsequence lost cycles after filtering");

  // Restrict the FSR to the complete cycles actually kept in the template.
  StructuralTemplate tmpl;
  tmpl.person_id = sig.source_id;
  tmpl.s1_features = std::move(cf.s1);
  tmpl.s2_features = std::move(cf.s2);
  tmpl.fsr_db = fsr_sequence(filtered, tones).ratio_db;
  return tmpl;
}

double structural_distance(const StructuralTemplate& x,
                           const StructuralTemplate& y,
                           const StructuralParams& params) {
  if (x.s1_features.empty() || y.s1_features.empty())
    throw InvalidParams("structural_distance: empty template");
  if (!(params.th_fsr > 0.0) || params.th_fsr > 1.0 ||
      !(params.fsr_db_max > 0.0))
    throw InvalidParams("structural_distance: bad FSR parameters");

  const double d_s1 = centered_pairwise(x.s1_features, y.s1_features);
  const double d_s2 = centered_pairwise(x.s2_features, y.s2_features);
  const double d_fsr = std::abs(x.fsr_db - y.fsr_db);
  const double d_fsr_norm = std::min(d_fsr / params.fsr_db_max, 1.0);
  const double k_fsr = std::max(1.0, d_fsr_norm / params.th_fsr);
  return k_fsr * std::sqrt(d_s1 * d_s1 + d_s2 * d_s2);
}

StructuralVerifyResult verify_structural(const PcgSignal& probe,
                                         const StructuralTemplate& tmpl,
                                         const StructuralParams& params) {
  const StructuralTemplate probe_tmpl = enroll_structural(probe, params);
  const double d = structural_distance(probe_tmpl, tmpl, params);
  return {d, d <= params.decision_threshold};
}

void save_template(const StructuralTemplate& tmpl, const std::string& path) {
  std::string out = "HSST 1\n";
  std::string id = tmpl.person_id.empty() ? "-" : tmpl.person_id;
  std::replace_if(id.begin(), id.end(),
                  [](unsigned char c) { return std::isspace(c); }, '_');
  out += id;
  out += ' ';
  out += std::to_string(tmpl.num_cycles());
  out += ' ';
  out += format_double(tmpl.fsr_db);
  out += '\n';
  for (const auto* set : {&tmpl.s1_features, &tmpl.s2_features}) {
    for (const auto& row : *set) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) out += ' ';
        out += format_double(row[i]);
      }
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

StructuralTemplate load_template(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "HSST" || version != 1)
    throw Error("not a structural template file: " + path);
  StructuralTemplate tmpl;
  size_t n = 0;
  if (!(in >> tmpl.person_id >> n >> tmpl.fsr_db) || n == 0)
    throw Error("malformed template header: " + path);
  if (tmpl.person_id == "-") tmpl.person_id.clear();
  for (auto* set : {&tmpl.s1_features, &tmpl.s2_features}) {
    set->assign(n, std::vector<double>(kStructuralDim, 0.0));
    for (auto& row : *set)
      for (double& v : row)
        if (!(in >> v)) throw Error("truncated template data: " + path);
  }
  return tmpl;
}

}  // namespace hsbio
