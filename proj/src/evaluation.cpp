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

#include "hsbio/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "hsbio/file_util.hpp"

namespace hsbio {

namespace {

bool accepts(ScorePolarity polarity, double score, double threshold) {
  return polarity == ScorePolarity::kHigherIsMatch ? score >= threshold
                                                   : score <= threshold;
}

std::vector<double> distinct_scores(const TrialSet& trials) {
  std::vector<double> s;
  s.reserve(trials.genuine.size() + trials.impostor.size());
  for (const auto& g : trials.genuine) s.push_back(g.score);
  for (const auto& i : trials.impostor) s.push_back(i.score);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

void check_finite(const TrialSet& trials) {
  for (const auto& g : trials.genuine)
    if (!std::isfinite(g.score)) throw InvalidParams("non-finite trial score");
  for (const auto& i : trials.impostor)
    if (!std::isfinite(i.score)) throw InvalidParams("non-finite trial score");
}

// Index-partitioned parallel loop; results must be written to disjoint slots
// so the outcome is independent of the thread count.
void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn) {
  if (jobs <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const size_t workers = std::min<size_t>(static_cast<size_t>(jobs), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

ErrorRates rates_at(const TrialSet& trials, double threshold) {
  if (trials.genuine.empty() || trials.impostor.empty())
    throw EmptyTrials("rates_at: need both genuine and impostor trials");
  size_t false_matches = 0, false_non_matches = 0;
  for (const auto& t : trials.impostor)
    if (accepts(trials.polarity, t.score, threshold)) ++false_matches;
  for (const auto& t : trials.genuine)
    if (!accepts(trials.polarity, t.score, threshold)) ++false_non_matches;
  return {static_cast<double>(false_matches) /
              static_cast<double>(trials.impostor.size()),
          static_cast<double>(false_non_matches) /
              static_cast<double>(trials.genuine.size())};
}

EerResult eer(const TrialSet& trials) {
  if (trials.genuine.empty() || trials.impostor.empty())
    throw EmptyTrials("eer: need both genuine and impostor trials");
  check_finite(trials);

  const std::vector<double> thresholds = distinct_scores(trials);
  double best_gap = std::numeric_limits<double>::infinity();
  double best_mid = 0.0, best_threshold = 0.0;
  for (double th : thresholds) {
    const ErrorRates r = rates_at(trials, th);
    const double gap = std::abs(r.fmr - r.fnmr);
    const double mid = 0.5 * (r.fmr + r.fnmr);
    if (gap < best_gap || (gap == best_gap && mid < best_mid)) {
      best_gap = gap;
      best_mid = mid;
      best_threshold = th;
    }
  }
  return {best_mid, best_threshold};
}

DetCurve det_curve(const TrialSet& trials, size_t num_points) {
  if (trials.genuine.empty() || trials.impostor.empty())
    throw EmptyTrials("det_curve: need both genuine and impostor trials");
  check_finite(trials);

  std::vector<double> thresholds = distinct_scores(trials);
  // The distinct scores cover the accept-all extreme; add a reject-all
  // sentinel on the appropriate side.
  if (trials.polarity == ScorePolarity::kHigherIsMatch) {
    thresholds.push_back(std::numeric_limits<double>::infinity());
  } else {
    thresholds.insert(thresholds.begin(),
                      -std::numeric_limits<double>::infinity());
  }

  std::vector<size_t> keep;
  if (num_points >= 2 && thresholds.size() > num_points) {
    for (size_t i = 0; i < num_points; ++i)
      keep.push_back(static_cast<size_t>(
          std::llround(static_cast<double>(i) *
                       static_cast<double>(thresholds.size() - 1) /
                       static_cast<double>(num_points - 1))));
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  } else {
    for (size_t i = 0; i < thresholds.size(); ++i) keep.push_back(i);
  }

  DetCurve curve;
  curve.points.reserve(keep.size());
  for (size_t i : keep) {
    const ErrorRates r = rates_at(trials, thresholds[i]);
    curve.points.push_back({thresholds[i], r.fmr, r.fnmr});
  }
  return curve;
}

std::string det_csv(const DetCurve& curve) {
  std::string out = "threshold,fmr,fnmr\n";
  for (const auto& p : curve.points) {
    out += format_double(p.threshold);
    out += ',';
    out += format_double(p.fmr);
    out += ',';
    out += format_double(p.fnmr);
    out += '\n';
  }
  return out;
}

namespace {

struct StatisticalAssets {
  std::vector<std::string> ids;
  std::vector<FeatureMatrix> enroll_features;  // parallel to ids
};

ExperimentResult run_structural(const std::vector<IdentityRecordings>& groups,
                                const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.trials.polarity = ScorePolarity::kLowerIsMatch;

  std::vector<std::string> ids;
  std::vector<StructuralTemplate> templates;
  for (const auto& g : groups) {
    try {
      PcgSignal sig = load_wav(g.enroll_path);
      StructuralTemplate t = enroll_structural(sig, cfg.structural);
      t.person_id = g.person_id;
      ids.push_back(g.person_id);
      templates.push_back(std::move(t));
    } catch (const Error& e) {
      result.skipped.push_back("identity " + g.person_id +
                               " dropped (enroll failed): " + e.what());
    }
  }

  struct Probe {
    std::string person_id;
    StructuralTemplate tmpl;
  };
  std::vector<Probe> probes;
  for (const auto& g : groups) {
    if (std::find(ids.begin(), ids.end(), g.person_id) == ids.end()) continue;
    for (const auto& path : g.verify_paths) {
      try {
        PcgSignal sig = load_wav(path);
        StructuralTemplate t = enroll_structural(sig, cfg.structural);
        t.person_id = g.person_id;
        probes.push_back({g.person_id, std::move(t)});
      } catch (const Error& e) {
        result.skipped.push_back("probe " + path + " skipped: " + e.what());
      }
    }
  }

  const size_t pairs = probes.size() * templates.size();
  std::vector<double> scores(pairs);
  parallel_for(pairs, cfg.jobs, [&](size_t k) {
    const size_t p = k / templates.size(), c = k % templates.size();
    scores[k] =
        structural_distance(probes[p].tmpl, templates[c], cfg.structural);
  });
  for (size_t p = 0; p < probes.size(); ++p)
    for (size_t c = 0; c < templates.size(); ++c) {
      const double s = scores[p * templates.size() + c];
      if (probes[p].person_id == ids[c]) {
        result.trials.genuine.push_back({ids[c], s});
      } else {
        result.trials.impostor.push_back({ids[c], probes[p].person_id, s});
      }
    }
  result.num_identities = ids.size();
  return result;
}

ExperimentResult run_statistical(const std::vector<IdentityRecordings>& groups,
                                 const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.trials.polarity = ScorePolarity::kHigherIsMatch;

  StatisticalAssets assets;
  for (const auto& g : groups) {
    try {
      PcgSignal sig = load_wav(g.enroll_path);
      assets.enroll_features.push_back(statistical_frontend(
          sig, cfg.lowpass_cutoff_hz, cfg.fsr_window_s, cfg.append_fsr));
      assets.ids.push_back(g.person_id);
    } catch (const Error& e) {
      result.skipped.push_back("identity " + g.person_id +
                               " dropped (enroll failed): " + e.what());
    }
  }
  const size_t n_id = assets.ids.size();
  if (n_id < 2)
    throw ManifestError("fewer than 2 identities enrolled successfully");

  // World model(s) and per-identity MAP models. With leave-one-out enabled a
  // separate UBM is trained per claimed identity.
  std::vector<GmmModel> ubms;
  std::vector<GmmModel> models;
  if (!cfg.exclude_claimed_from_ubm) {
    GmmModel ubm = train_ubm(assets.enroll_features, cfg.train);
    for (size_t c = 0; c < n_id; ++c)
      models.push_back(adapt_map(ubm, assets.enroll_features[c], cfg.train));
    ubms.push_back(std::move(ubm));
  } else {
    for (size_t c = 0; c < n_id; ++c) {
      std::vector<FeatureMatrix> rest;
      for (size_t j = 0; j < n_id; ++j)
        if (j != c) rest.push_back(assets.enroll_features[j]);
      GmmModel ubm = train_ubm(rest, cfg.train);
      models.push_back(adapt_map(ubm, assets.enroll_features[c], cfg.train));
      ubms.push_back(std::move(ubm));
    }
  }

  struct Probe {
    std::string person_id;
    FeatureMatrix features;
  };
  std::vector<Probe> probes;
  for (const auto& g : groups) {
    if (std::find(assets.ids.begin(), assets.ids.end(), g.person_id) ==
        assets.ids.end())
      continue;
    for (const auto& path : g.verify_paths) {
      try {
        PcgSignal sig = load_wav(path);
        probes.push_back({g.person_id,
                          statistical_frontend(sig, cfg.lowpass_cutoff_hz,
                                               cfg.fsr_window_s,
                                               cfg.append_fsr)});
      } catch (const Error& e) {
        result.skipped.push_back("probe " + path + " skipped: " + e.what());
      }
    }
  }

  const size_t pairs = probes.size() * n_id;
  std::vector<double> scores(pairs);
  parallel_for(pairs, cfg.jobs, [&](size_t k) {
    const size_t p = k / n_id, c = k % n_id;
    const GmmModel& ubm = cfg.exclude_claimed_from_ubm ? ubms[c] : ubms[0];
    scores[k] = score_llr(models[c], ubm, probes[p].features).llr;
  });
  for (size_t p = 0; p < probes.size(); ++p)
    for (size_t c = 0; c < n_id; ++c) {
      const double s = scores[p * n_id + c];
      if (probes[p].person_id == assets.ids[c]) {
        result.trials.genuine.push_back({assets.ids[c], s});
      } else {
        result.trials.impostor.push_back(
            {assets.ids[c], probes[p].person_id, s});
      }
    }
  result.num_identities = n_id;
  return result;
}

}  // namespace

ExperimentResult run_experiment(const Manifest& manifest,
                                const ExperimentConfig& cfg) {
  const std::vector<IdentityRecordings> groups = group_by_identity(manifest);
  return cfg.system == SystemKind::kStructural ? run_structural(groups, cfg)
                                               : run_statistical(groups, cfg);
}

std::string experiment_report(const ExperimentResult& result,
                              const EerResult& eer_result, SystemKind system) {
  std::ostringstream out;
  out << "system: "
      << (system == SystemKind::kStructural ? "structural" : "statistical")
      << '\n';
  out << "identities: " << result.num_identities << '\n';
  out << "genuine_trials: " << result.trials.genuine.size() << '\n';
  out << "impostor_trials: " << result.trials.impostor.size() << '\n';
  out << "skipped: " << result.skipped.size() << '\n';
  for (const auto& s : result.skipped) out << "  skip: " << s << '\n';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", 100.0 * eer_result.eer);
  out << "EER: " << buf << "% (threshold "
      << format_double(eer_result.threshold) << ")\n";
  return out.str();
}

}  // namespace hsbio
