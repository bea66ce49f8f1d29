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

#ifndef HSBIO_STATISTICAL_HPP_
#define HSBIO_STATISTICAL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hsbio/features.hpp"

namespace hsbio {

enum class ModelRole { kUbm, kIdentity };

// Diagonal-covariance Gaussian mixture. Immutable once trained; call
// refresh_cache() after any manual edit.
struct GmmModel {
  size_t num_components = 0;
  size_t dim = 0;
  std::vector<double> weights;    // N
  std::vector<double> means;      // N x D, row-major
  std::vector<double> variances;  // N x D diagonal entries
  ModelRole role = ModelRole::kUbm;
  uint64_t seed = 0;
  std::string provenance;

  // Per component: log(w_i) - 0.5 * sum_d log(2*pi*var_id).
  std::vector<double> log_norm;

  std::span<const double> mean(size_t i) const {
    return {means.data() + i * dim, dim};
  }
  std::span<const double> variance(size_t i) const {
    return {variances.data() + i * dim, dim};
  }
  void refresh_cache();
  void validate() const;  // weight simplex, positive variances, finite values
};

struct TrainConfig {
  size_t num_components = 256;
  size_t max_em_iters = 50;
  double ll_tol = 1e-4;          // relative log-likelihood improvement
  double variance_floor = 0.01;  // fraction of the global per-dim variance
  double map_relevance = 14.0;
  uint64_t seed = 1;
  size_t kmeans_iters = 10;
  size_t init_subsample = 50000;
};

struct TrainReport {
  std::vector<double> ll_history;  // total training log-likelihood / iteration
  size_t iterations = 0;
};

struct VerificationScore {
  double llr = 0.0;  // per-frame log-likelihood ratio (canonical score)
  double total_llr = 0.0;
  double per_frame_ll_target = 0.0;
  double per_frame_ll_ubm = 0.0;
  size_t num_frames = 0;
};

struct DecisionPolicy {
  double theta = 0.0;
};

double gmm_logpdf(const GmmModel& model, std::span<const double> x);

// k-means++ initialized EM over the pooled frames of all inputs.
GmmModel train_ubm(const std::vector<FeatureMatrix>& features,
                   const TrainConfig& cfg, TrainReport* report = nullptr);

// Mean-only MAP adaptation; weights and variances are copied from the UBM.
GmmModel adapt_map(const GmmModel& ubm, const FeatureMatrix& features,
                   const TrainConfig& cfg);

VerificationScore score_llr(const GmmModel& target, const GmmModel& ubm,
                            const FeatureMatrix& features);

// Accept iff the per-frame LLR is >= theta (boundary accepts).
bool verify_statistical(const VerificationScore& score,
                        const DecisionPolicy& policy);

// Text: "HSGM 1 role N D seed" header then weights/means/variances.
// Binary: "HSGB" magic with the same payload, little-endian doubles.
void save_gmm_text(const GmmModel& model, const std::string& path);
void save_gmm_binary(const GmmModel& model, const std::string& path);
GmmModel load_gmm(const std::string& path);  // sniffs the magic

}  // namespace hsbio

#endif  // HSBIO_STATISTICAL_HPP_
