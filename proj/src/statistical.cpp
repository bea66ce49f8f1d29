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

#include "hsbio/statistical.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "hsbio/file_util.hpp"
#include "hsbio/rng.hpp"

namespace hsbio {

namespace {

constexpr double kMinPosteriorMass = 1e-8;
constexpr double kAbsVarianceFloor = 1e-10;

// Log-likelihood of x under every component; returns the log-sum-exp.
double component_loglikes(const GmmModel& g, std::span<const double> x,
                          std::vector<double>& ll) {
  const size_t n = g.num_components, d = g.dim;
  ll.resize(n);
  double max_ll = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    const double* mu = g.means.data() + i * d;
    const double* var = g.variances.data() + i * d;
    double quad = 0.0;
    for (size_t k = 0; k < d; ++k) {
      const double diff = x[k] - mu[k];
      quad += diff * diff / var[k];
    }
    ll[i] = g.log_norm[i] - 0.5 * quad;
    if (ll[i] > max_ll) max_ll = ll[i];
  }
  if (!std::isfinite(max_ll)) return max_ll;
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += std::exp(ll[i] - max_ll);
  return max_ll + std::log(acc);
}

struct PooledData {
  size_t num_frames = 0;
  size_t dim = 0;
  std::vector<double> data;  // row-major

  std::span<const double> row(size_t t) const {
    return {data.data() + t * dim, dim};
  }
};

PooledData pool_frames(const std::vector<FeatureMatrix>& features) {
  PooledData pool;
  for (const auto& fm : features) {
    if (fm.num_frames == 0) continue;
    if (pool.dim == 0) pool.dim = fm.dim;
    if (fm.dim != pool.dim)
      throw DimensionMismatch("train_ubm: inconsistent feature dimensions");
    pool.num_frames += fm.num_frames;
  }
  if (pool.num_frames == 0) throw InsufficientData("train_ubm: no frames");
  pool.data.reserve(pool.num_frames * pool.dim);
  for (const auto& fm : features)
    pool.data.insert(pool.data.end(), fm.data.begin(), fm.data.end());
  for (double v : pool.data)
    if (!std::isfinite(v))
      throw NonFiniteFeature("train_ubm: non-finite feature value");
  return pool;
}

std::vector<double> per_dim_variance_floor(const PooledData& pool,
                                           double fraction) {
  const size_t d = pool.dim, t_count = pool.num_frames;
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (size_t t = 0; t < t_count; ++t) {
    auto row = pool.row(t);
    for (size_t k = 0; k < d; ++k) mean[k] += row[k];
  }
  for (double& m : mean) m /= static_cast<double>(t_count);
  for (size_t t = 0; t < t_count; ++t) {
    auto row = pool.row(t);
    for (size_t k = 0; k < d; ++k) {
      const double diff = row[k] - mean[k];
      var[k] += diff * diff;
    }
  }
  std::vector<double> floor(d);
  for (size_t k = 0; k < d; ++k)
    floor[k] = std::max(fraction * var[k] / static_cast<double>(t_count),
                        kAbsVarianceFloor);
  return floor;
}

double sq_dist(std::span<const double> a, const double* b, size_t d) {
  double acc = 0.0;
  for (size_t k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

// k-means++ seeding plus a few Lloyd iterations on a subsample.
GmmModel kmeans_init(const PooledData& pool, const TrainConfig& cfg,
                     const std::vector<double>& var_floor) {
  const size_t d = pool.dim, n = cfg.num_components;
  Rng rng(cfg.seed);

  std::vector<size_t> idx(pool.num_frames);
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (idx.size() > cfg.init_subsample) {
    for (size_t i = 0; i < cfg.init_subsample; ++i) {
      const size_t j = i + rng.index(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(cfg.init_subsample);
  }
  const size_t s = idx.size();

  std::vector<double> centers(n * d, 0.0);
  auto center = [&](size_t i) { return centers.data() + i * d; };

  // Seeding: squared-distance weighted draws.
  std::copy_n(pool.row(idx[rng.index(s)]).data(), d, center(0));
  std::vector<double> d2(s);
  for (size_t p = 0; p < s; ++p)
    d2[p] = sq_dist(pool.row(idx[p]), center(0), d);
  for (size_t c = 1; c < n; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    size_t chosen;
    if (total <= 0.0) {
      chosen = rng.index(s);
    } else {
      const double target = rng.uniform() * total;
      double run = 0.0;
      chosen = s - 1;
      for (size_t p = 0; p < s; ++p) {
        run += d2[p];
        if (run >= target) {
          chosen = p;
          break;
        }
      }
    }
    std::copy_n(pool.row(idx[chosen]).data(), d, center(c));
    for (size_t p = 0; p < s; ++p)
      d2[p] = std::min(d2[p], sq_dist(pool.row(idx[p]), center(c), d));
  }

  std::vector<size_t> assign(s, 0);
  std::vector<size_t> counts(n, 0);
  for (size_t it = 0; it < cfg.kmeans_iters; ++it) {
    for (size_t p = 0; p < s; ++p) {
      size_t best = 0;
      double best_d = sq_dist(pool.row(idx[p]), center(0), d);
      for (size_t c = 1; c < n; ++c) {
        const double dist = sq_dist(pool.row(idx[p]), center(c), d);
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      assign[p] = best;
    }
    std::fill(centers.begin(), centers.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (size_t p = 0; p < s; ++p) {
      auto row = pool.row(idx[p]);
      double* c = center(assign[p]);
      for (size_t k = 0; k < d; ++k) c[k] += row[k];
      counts[assign[p]]++;
    }
    std::vector<double> dist_to_own(s, 0.0);
    for (size_t c = 0; c < n; ++c)
      if (counts[c] > 0)
        for (size_t k = 0; k < d; ++k)
          center(c)[k] /= static_cast<double>(counts[c]);
    for (size_t p = 0; p < s; ++p)
      dist_to_own[p] = sq_dist(pool.row(idx[p]), center(assign[p]), d);
    for (size_t c = 0; c < n; ++c) {
      if (counts[c] > 0) continue;
      // Re-seed an empty cluster at the farthest point from its centre.
      size_t far = 0;
      for (size_t p = 1; p < s; ++p)
        if (dist_to_own[p] > dist_to_own[far]) far = p;
      std::copy_n(pool.row(idx[far]).data(), d, center(c));
      dist_to_own[far] = -1.0;
      counts[c] = 1;
    }
  }

  // Final assignment for weights and per-cluster scatter.
  std::fill(counts.begin(), counts.end(), 0);
  std::vector<double> scatter(n * d, 0.0);
  for (size_t p = 0; p < s; ++p) {
    size_t best = 0;
    double best_d = sq_dist(pool.row(idx[p]), center(0), d);
    for (size_t c = 1; c < n; ++c) {
      const double dist = sq_dist(pool.row(idx[p]), center(c), d);
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    assign[p] = best;
    counts[best]++;
  }
  for (size_t p = 0; p < s; ++p) {
    auto row = pool.row(idx[p]);
    const double* c = center(assign[p]);
    double* sc = scatter.data() + assign[p] * d;
    for (size_t k = 0; k < d; ++k) {
      const double diff = row[k] - c[k];
      sc[k] += diff * diff;
    }
  }

  GmmModel g;
  g.num_components = n;
  g.dim = d;
  g.seed = cfg.seed;
  g.weights.resize(n);
  g.means = centers;
  g.variances.resize(n * d);
  double wsum = 0.0;
  for (size_t c = 0; c < n; ++c) {
    g.weights[c] = std::max<double>(static_cast<double>(counts[c]), 1.0);
    wsum += g.weights[c];
  }
  for (double& w : g.weights) w /= wsum;
  for (size_t c = 0; c < n; ++c)
    for (size_t k = 0; k < d; ++k) {
      const double v = counts[c] > 0
                           ? scatter[c * d + k] / static_cast<double>(counts[c])
                           : 0.0;
      g.variances[c * d + k] = std::max(v, var_floor[k]);
    }
  g.refresh_cache();
  return g;
}

}  // namespace

void GmmModel::refresh_cache() {
  log_norm.resize(num_components);
  constexpr double kLog2Pi = 1.8378770664093453;
  for (size_t i = 0; i < num_components; ++i) {
    double acc = weights[i] > 0.0
                     ? std::log(weights[i])
                     : -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < dim; ++k)
      acc -= 0.5 * (kLog2Pi + std::log(variances[i * dim + k]));
    log_norm[i] = acc;
  }
}

void GmmModel::validate() const {
  if (num_components == 0 || dim == 0)
    throw InvalidParams("gmm: empty model");
  if (weights.size() != num_components || means.size() != num_components * dim ||
      variances.size() != num_components * dim)
    throw InvalidParams("gmm: inconsistent array sizes");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidParams("gmm: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidParams("gmm: weights do not sum to 1");
  for (double v : variances)
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidParams("gmm: non-positive variance");
  for (double m : means)
    if (!std::isfinite(m)) throw InvalidParams("gmm: non-finite mean");
}

double gmm_logpdf(const GmmModel& model, std::span<const double> x) {
  if (x.size() != model.dim)
    throw DimensionMismatch("gmm_logpdf: vector dimension mismatch");
  std::vector<double> ll;
  return component_loglikes(model, x, ll);
}

GmmModel train_ubm(const std::vector<FeatureMatrix>& features,
                   const TrainConfig& cfg, TrainReport* report) {
  if (cfg.num_components < 1)
    throw InvalidParams("train_ubm: need at least one component");
  const PooledData pool = pool_frames(features);
  const size_t t_count = pool.num_frames, d = pool.dim, n = cfg.num_components;
  if (t_count < 10 * n * d)
    throw InsufficientData(
        "train_ubm: need at least 10*N*D frames (" +
        std::to_string(10 * n * d) + "), got " + std::to_string(t_count));

  const std::vector<double> var_floor =
      per_dim_variance_floor(pool, cfg.variance_floor);
  GmmModel g = kmeans_init(pool, cfg, var_floor);

  std::vector<double> ll_buf;
  std::vector<double> resp_n(n), resp_sx(n * d), resp_sxx(n * d);
  double prev_ll = -std::numeric_limits<double>::infinity();
  TrainReport local;
  TrainReport& rep = report ? *report : local;

  for (size_t iter = 0; iter < cfg.max_em_iters; ++iter) {
    std::fill(resp_n.begin(), resp_n.end(), 0.0);
    std::fill(resp_sx.begin(), resp_sx.end(), 0.0);
    std::fill(resp_sxx.begin(), resp_sxx.end(), 0.0);
    double total_ll = 0.0;

    for (size_t t = 0; t < t_count; ++t) {
      auto x = pool.row(t);
      const double lse = component_loglikes(g, x, ll_buf);
      total_ll += lse;
      for (size_t i = 0; i < n; ++i) {
        const double r = std::exp(ll_buf[i] - lse);
        if (r == 0.0) continue;
        resp_n[i] += r;
        double* sx = resp_sx.data() + i * d;
        double* sxx = resp_sxx.data() + i * d;
        for (size_t k = 0; k < d; ++k) {
          sx[k] += r * x[k];
          sxx[k] += r * x[k] * x[k];
        }
      }
    }

    rep.ll_history.push_back(total_ll);
    rep.iterations = iter + 1;
    if (iter > 0) {
      const double rel = (total_ll - prev_ll) / std::abs(prev_ll);
      if (rel < cfg.ll_tol) break;  // keep the params this LL was measured on
    }
    prev_ll = total_ll;

    double wsum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (resp_n[i] > kMinPosteriorMass) {
        const double inv = 1.0 / resp_n[i];
        for (size_t k = 0; k < d; ++k) {
          const double mu = resp_sx[i * d + k] * inv;
          g.means[i * d + k] = mu;
          g.variances[i * d + k] =
              std::max(resp_sxx[i * d + k] * inv - mu * mu, var_floor[k]);
        }
      }
      g.weights[i] = resp_n[i] / static_cast<double>(t_count);
      wsum += g.weights[i];
    }
    for (double& w : g.weights) w /= wsum;
    g.refresh_cache();
  }

  g.role = ModelRole::kUbm;
  g.seed = cfg.seed;
  std::ostringstream prov;
  prov << "em iters=" << rep.iterations << " frames=" << t_count;
  g.provenance = prov.str();
  g.validate();
  return g;
}

GmmModel adapt_map(const GmmModel& ubm, const FeatureMatrix& features,
                   const TrainConfig& cfg) {
  if (features.dim != ubm.dim)
    throw DimensionMismatch("adapt_map: feature dimension mismatch");
  if (features.num_frames == 0) throw EmptyFeatures("adapt_map: no frames");
  for (double v : features.data)
    if (!std::isfinite(v))
      throw NonFiniteFeature("adapt_map: non-finite feature value");

  const size_t n = ubm.num_components, d = ubm.dim;
  std::vector<double> ll_buf;
  std::vector<double> occ(n, 0.0), sx(n * d, 0.0);
  for (size_t t = 0; t < features.num_frames; ++t) {
    auto x = features.row(t);
    const double lse = component_loglikes(ubm, x, ll_buf);
    for (size_t i = 0; i < n; ++i) {
      const double r = std::exp(ll_buf[i] - lse);
      if (r == 0.0) continue;
      occ[i] += r;
      double* s = sx.data() + i * d;
      for (size_t k = 0; k < d; ++k) s[k] += r * x[k];
    }
  }

  GmmModel adapted = ubm;
  adapted.role = ModelRole::kIdentity;
  adapted.provenance = "map relevance=" + format_double(cfg.map_relevance) +
                       " frames=" + std::to_string(features.num_frames);
  for (size_t i = 0; i < n; ++i) {
    if (occ[i] <= 0.0) continue;  // no evidence: keep the UBM mean
    const double alpha = occ[i] / (occ[i] + cfg.map_relevance);
    for (size_t k = 0; k < d; ++k) {
      const double posterior_mean = sx[i * d + k] / occ[i];
      adapted.means[i * d + k] =
          alpha * posterior_mean + (1.0 - alpha) * ubm.means[i * d + k];
    }
  }
  adapted.refresh_cache();
  adapted.validate();
  return adapted;
}

VerificationScore score_llr(const GmmModel& target, const GmmModel& ubm,
                            const FeatureMatrix& features) {
  if (target.dim != ubm.dim)
    throw DimensionMismatch("score_llr: model dimensions differ");
  if (features.dim != ubm.dim)
    throw DimensionMismatch("score_llr: feature dimension mismatch");
  if (features.num_frames == 0) throw EmptyFeatures("score_llr: no frames");

  double ll_target = 0.0, ll_ubm = 0.0;
  std::vector<double> buf;
  for (size_t t = 0; t < features.num_frames; ++t) {
    auto x = features.row(t);
    ll_target += component_loglikes(target, x, buf);
    ll_ubm += component_loglikes(ubm, x, buf);
  }

  VerificationScore s;
  s.num_frames = features.num_frames;
  const double inv_t = 1.0 / static_cast<double>(features.num_frames);
  s.per_frame_ll_target = ll_target * inv_t;
  s.per_frame_ll_ubm = ll_ubm * inv_t;
  s.total_llr = ll_target - ll_ubm;
  s.llr = s.per_frame_ll_target - s.per_frame_ll_ubm;
  return s;
}

bool verify_statistical(const VerificationScore& score,
                        const DecisionPolicy& policy) {
  return score.llr >= policy.theta;
}

namespace {

const char* role_name(ModelRole role) {
  return role == ModelRole::kUbm ? "ubm" : "identity";
}

ModelRole role_from_name(const std::string& name) {
  if (name == "ubm") return ModelRole::kUbm;
  if (name == "identity") return ModelRole::kIdentity;
  throw Error("unknown model role: " + name);
}

}  // namespace

void save_gmm_text(const GmmModel& model, const std::string& path) {
  std::string out = "HSGM 1 ";
  out += role_name(model.role);
  out += ' ' + std::to_string(model.num_components);
  out += ' ' + std::to_string(model.dim);
  out += ' ' + std::to_string(model.seed);
  out += '\n';
  for (size_t i = 0; i < model.num_components; ++i) {
    if (i) out += ' ';
    out += format_double(model.weights[i]);
  }
  out += '\n';
  for (const auto* arr : {&model.means, &model.variances}) {
    for (size_t i = 0; i < model.num_components; ++i) {
      for (size_t k = 0; k < model.dim; ++k) {
        if (k) out += ' ';
        out += format_double((*arr)[i * model.dim + k]);
      }
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

void save_gmm_binary(const GmmModel& model, const std::string& path) {
  std::string out = "HSGB";
  auto put_u32 = [&out](uint32_t v) {
    for (int i = 0; i < 4; ++i)
      out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_u32(1);
  put_u32(model.role == ModelRole::kUbm ? 0u : 1u);
  put_u32(static_cast<uint32_t>(model.num_components));
  put_u32(static_cast<uint32_t>(model.dim));
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((model.seed >> (8 * i)) & 0xff));
  auto put_doubles = [&out](const std::vector<double>& v) {
    const size_t off = out.size();
    out.resize(off + v.size() * sizeof(double));
    std::memcpy(out.data() + off, v.data(), v.size() * sizeof(double));
  };
  put_doubles(model.weights);
  put_doubles(model.means);
  put_doubles(model.variances);
  write_file_atomic(path, out);
}

GmmModel load_gmm(const std::string& path) {
  const std::string raw = read_file(path);
  GmmModel g;
  if (raw.size() >= 4 && raw.compare(0, 4, "HSGB") == 0) {
    if (raw.size() < 28) throw Error("truncated model file: " + path);
    auto get_u32 = [&raw](size_t off) {
      uint32_t v = 0;
      for (int i = 0; i < 4; ++i)
        v |= static_cast<uint32_t>(static_cast<unsigned char>(raw[off + i]))
             << (8 * i);
      return v;
    };
    if (get_u32(4) != 1) throw Error("unsupported model version: " + path);
    g.role = get_u32(8) == 0 ? ModelRole::kUbm : ModelRole::kIdentity;
    g.num_components = get_u32(12);
    g.dim = get_u32(16);
    g.seed = 0;
    for (int i = 0; i < 8; ++i)
      g.seed |= static_cast<uint64_t>(static_cast<unsigned char>(raw[20 + i]))
                << (8 * i);
    const size_t nd = g.num_components * g.dim;
    const size_t want = 28 + (g.num_components + 2 * nd) * sizeof(double);
    if (raw.size() != want) throw Error("model file size mismatch: " + path);
    g.weights.resize(g.num_components);
    g.means.resize(nd);
    g.variances.resize(nd);
    size_t off = 28;
    auto get_doubles = [&raw, &off](std::vector<double>& v) {
      std::memcpy(v.data(), raw.data() + off, v.size() * sizeof(double));
      off += v.size() * sizeof(double);
    };
    get_doubles(g.weights);
    get_doubles(g.means);
    get_doubles(g.variances);
  } else {
    std::istringstream in(raw);
    std::string magic, role;
    int version = 0;
    if (!(in >> magic >> version) || magic != "HSGM" || version != 1)
      throw Error("not a GMM model file: " + path);
    size_t n = 0, d = 0;
    uint64_t seed = 0;
    if (!(in >> role >> n >> d >> seed) || n == 0 || d == 0)
      throw Error("malformed model header: " + path);
    g.role = role_from_name(role);
    g.num_components = n;
    g.dim = d;
    g.seed = seed;
    g.weights.resize(n);
    g.means.resize(n * d);
    g.variances.resize(n * d);
    for (auto* arr : {&g.weights, &g.means, &g.variances})
      for (double& v : *arr)
        if (!(in >> v)) throw Error("truncated model data: " + path);
  }
  g.validate();
  g.refresh_cache();
  return g;
}

}  // namespace hsbio
