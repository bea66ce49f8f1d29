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

// Command-line front end: synth, segment, features, train-ubm, enroll,
// verify, evaluate. Exit codes: 0 ok, 1 usage, 2 data error, 3 internal.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "hsbio/evaluation.hpp"
#include "hsbio/file_util.hpp"
#include "hsbio/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace hsbio;

uint64_t make_seed(int64_t flag_value) {
  if (flag_value >= 0) return static_cast<uint64_t>(flag_value);
  std::random_device rd;
  const uint64_t seed =
      (static_cast<uint64_t>(rd()) << 32) ^ static_cast<uint64_t>(rd());
  std::cout << "seed: " << seed << "\n";
  return seed;
}

SystemKind parse_system(const std::string& name) {
  if (name == "structural") return SystemKind::kStructural;
  if (name == "statistical") return SystemKind::kStatistical;
  throw CLI::ValidationError("--system must be structural or statistical");
}

int cmd_synth(const std::string& out_dir, CorpusSpec spec, int64_t seed_flag,
              const std::string& preset) {
  if (preset == "separable") {
    spec.spread_hz = 25.0;
    spec.noise_snr_db = 30.0;
  } else if (preset == "moderate") {
    spec.spread_hz = 6.0;
    spec.noise_snr_db = 22.0;
  } else if (preset == "identical") {
    spec.spread_hz = 0.0;
  } else if (preset == "adversarial") {
    spec.clicks_per_10s = 1.0;
  } else if (!preset.empty()) {
    throw CLI::ValidationError("unknown preset: " + preset);
  }
  spec.seed = make_seed(seed_flag);
  const CorpusInfo info = make_corpus(spec, out_dir);
  std::cout << "wrote " << info.manifest.entries.size() << " recordings for "
            << spec.num_identities << " identities under " << out_dir << "\n";
  return 0;
}

int cmd_segment(const std::string& in_path, const std::string& out_path,
                double lowpass_hz, double tone_window_ms,
                double analysis_window_s) {
  PcgSignal sig = load_wav(in_path);
  if (lowpass_hz > 0.0) sig = lowpass_filter(sig, lowpass_hz);
  SegmentationConfig cfg = SegmentationConfig::defaults(sig.sample_rate);
  cfg.tone_window_ms = tone_window_ms;
  cfg.analysis_window_s = analysis_window_s;
  const ToneEndpoints tones = detect_tones(sig, cfg);
  for (const auto& w : tones.warnings) std::cerr << "warning: " << w << "\n";
  const std::string text = format_endpoints(tones);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out_path, text);
  }
  return 0;
}

int cmd_features(const std::string& in_path, const std::string& out_path,
                 const std::string& preset, const std::string& format,
                 bool with_fsr, double lowpass_hz, double fsr_window_s) {
  const PcgSignal sig = load_wav(in_path);
  FeatureMatrix fm;
  if (preset == "statistical") {
    fm = statistical_frontend(sig, lowpass_hz, fsr_window_s, with_fsr);
  } else if (preset == "structural") {
    const PcgSignal filtered =
        lowpass_hz > 0.0 ? lowpass_filter(sig, lowpass_hz) : sig;
    const FeatureConfig fc = structural_feature_config(sig.sample_rate);
    fm = extract_cepstra(filtered, fc.filterbank, fc.cepstrum, fc.frames);
  } else {
    throw CLI::ValidationError("--preset must be structural or statistical");
  }
  const std::string payload =
      format == "binary" ? feature_matrix_binary(fm) : feature_matrix_text(fm);
  if (out_path.empty()) {
    std::cout << payload;
  } else {
    write_file_atomic(out_path, payload);
  }
  return 0;
}

int cmd_train_ubm(const std::string& manifest_path, const std::string& out_path,
                  TrainConfig train, int64_t seed_flag,
                  const std::string& format, double lowpass_hz,
                  double fsr_window_s, bool with_fsr) {
  train.seed = make_seed(seed_flag);
  const Manifest manifest = load_manifest(manifest_path);
  std::vector<FeatureMatrix> features;
  for (const auto& e : manifest.entries) {
    if (e.role != RecordingRole::kEnroll) continue;
    const PcgSignal sig = load_wav(manifest.resolve(e));
    features.push_back(
        statistical_frontend(sig, lowpass_hz, fsr_window_s, with_fsr));
  }
  const GmmModel ubm = train_ubm(features, train);
  if (format == "binary") {
    save_gmm_binary(ubm, out_path);
  } else {
    save_gmm_text(ubm, out_path);
  }
  std::cout << "trained UBM: " << ubm.num_components << " components, dim "
            << ubm.dim << " (" << ubm.provenance << ")\n";
  return 0;
}

int cmd_enroll(const std::string& system_name, const std::string& in_path,
               const std::string& out_path, const std::string& ubm_path,
               const std::string& person_id, TrainConfig train,
               const StructuralParams& params, const std::string& format,
               double lowpass_hz, double fsr_window_s, bool with_fsr) {
  const SystemKind system = parse_system(system_name);
  const PcgSignal sig = load_wav(in_path);
  if (system == SystemKind::kStructural) {
    StructuralTemplate tmpl = enroll_structural(sig, params);
    if (!person_id.empty()) tmpl.person_id = person_id;
    save_template(tmpl, out_path);
    std::cout << "enrolled structural template: " << tmpl.num_cycles()
              << " cycles, FSR " << tmpl.fsr_db << " dB\n";
  } else {
    if (ubm_path.empty())
      throw CLI::ValidationError("statistical enroll requires --ubm");
    const GmmModel ubm = load_gmm(ubm_path);
    const FeatureMatrix fm =
        statistical_frontend(sig, lowpass_hz, fsr_window_s, with_fsr);
    const GmmModel model = adapt_map(ubm, fm, train);
    if (format == "binary") {
      save_gmm_binary(model, out_path);
    } else {
      save_gmm_text(model, out_path);
    }
    std::cout << "adapted identity model from " << fm.num_frames
              << " frames\n";
  }
  return 0;
}

int cmd_verify(const std::string& system_name, const std::string& probe_path,
               const std::string& template_path, const std::string& model_path,
               const std::string& ubm_path, double threshold,
               const StructuralParams& params, double lowpass_hz,
               double fsr_window_s, bool with_fsr) {
  const SystemKind system = parse_system(system_name);
  const PcgSignal probe = load_wav(probe_path);
  if (system == SystemKind::kStructural) {
    if (template_path.empty())
      throw CLI::ValidationError("structural verify requires --template");
    StructuralParams p = params;
    p.decision_threshold = threshold;
    const StructuralTemplate tmpl = load_template(template_path);
    const StructuralVerifyResult r = verify_structural(probe, tmpl, p);
    std::cout << "distance: " << format_double(r.distance) << "\n"
              << "decision: " << (r.accept ? "accept" : "reject") << "\n";
  } else {
    if (model_path.empty() || ubm_path.empty())
      throw CLI::ValidationError("statistical verify requires --model and --ubm");
    const GmmModel model = load_gmm(model_path);
    const GmmModel ubm = load_gmm(ubm_path);
    const FeatureMatrix fm =
        statistical_frontend(probe, lowpass_hz, fsr_window_s, with_fsr);
    const VerificationScore score = score_llr(model, ubm, fm);
    const bool accept = verify_statistical(score, DecisionPolicy{threshold});
    std::cout << "llr: " << format_double(score.llr) << "\n"
              << "total_llr: " << format_double(score.total_llr) << "\n"
              << "decision: " << (accept ? "accept" : "reject") << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& manifest_path, const std::string& out_dir,
                 const std::string& system_name, ExperimentConfig cfg,
                 int64_t seed_flag, size_t det_points) {
  cfg.system = parse_system(system_name);
  cfg.train.seed = make_seed(seed_flag);
  const Manifest manifest = load_manifest(manifest_path);
  const ExperimentResult result = run_experiment(manifest, cfg);
  const EerResult e = eer(result.trials);
  const DetCurve curve = det_curve(result.trials, det_points);
  const std::string report = experiment_report(result, e, cfg.system);
  std::cout << report;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file_atomic((fs::path(out_dir) / "det.csv").string(),
                      det_csv(curve));
    write_file_atomic((fs::path(out_dir) / "report.txt").string(), report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heart-sound biometric verification toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from an INI/TOML file");

  // synth ------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic PCG corpus");
  std::string synth_out;
  CorpusSpec corpus;
  int64_t synth_seed = -1;
  std::string synth_preset;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--identities", corpus.num_identities, "Number of people");
  synth->add_option("--recordings-each", corpus.recordings_each,
                    "Recordings per person (first is enroll)");
  synth->add_option("--spread", corpus.spread_hz,
                    "Inter-identity resonance separation in Hz");
  synth->add_option("--snr-db", corpus.noise_snr_db, "Additive noise SNR");
  synth->add_option("--jitter-pct", corpus.jitter_pct, "Cycle length jitter");
  synth->add_option("--clicks-per-10s", corpus.clicks_per_10s,
                    "Impulsive click rate");
  synth->add_option("--duration-min", corpus.duration_min_s,
                    "Minimum recording length (s)");
  synth->add_option("--duration-max", corpus.duration_max_s,
                    "Maximum recording length (s)");
  synth->add_option("--session-var", corpus.session_variability,
                    "Session-to-session parameter drift (relative sigma)");
  synth->add_option("--seed", synth_seed, "RNG seed (printed if omitted)");
  synth->add_option("--preset", synth_preset,
                    "separable | moderate | identical | adversarial");

  // segment ----------------------------------------------------------------
  auto* segment = app.add_subcommand("segment", "Detect S1/S2 endpoints");
  std::string seg_in, seg_out;
  double seg_lowpass = 500.0, seg_tone_ms = 120.0, seg_window_s = 4.0;
  segment->add_option("--in", seg_in, "Input WAV")->required();
  segment->add_option("--out", seg_out, "Output file (stdout if omitted)");
  segment->add_option("--lowpass-hz", seg_lowpass,
                      "Pre-filter cutoff; 0 disables");
  segment->add_option("--tone-window-ms", seg_tone_ms, "Tone window width");
  segment->add_option("--analysis-window-s", seg_window_s,
                      "Analysis window length");

  // features ---------------------------------------------------------------
  auto* features = app.add_subcommand("features", "Extract cepstral features");
  std::string feat_in, feat_out, feat_preset = "statistical",
                                 feat_format = "text";
  bool feat_fsr = true;
  double feat_lowpass = 500.0, feat_fsr_window = 5.0;
  features->add_option("--in", feat_in, "Input WAV")->required();
  features->add_option("--out", feat_out, "Output file (stdout if omitted)");
  features->add_option("--preset", feat_preset, "structural | statistical");
  features->add_option("--format", feat_format, "text | binary");
  features->add_flag("--fsr,!--no-fsr", feat_fsr,
                     "Append the windowed FSR column (statistical preset)");
  features->add_option("--lowpass-hz", feat_lowpass, "Pre-filter cutoff");
  features->add_option("--fsr-window-s", feat_fsr_window, "FSR window length");

  // train-ubm ----------------------------------------------------------------
  auto* ubm_cmd = app.add_subcommand("train-ubm",
                                     "Train the universal background model");
  std::string ubm_manifest, ubm_out, ubm_format = "text";
  TrainConfig train;
  int64_t ubm_seed = -1;
  bool ubm_fsr = true;
  double ubm_lowpass = 500.0, ubm_fsr_window = 5.0;
  ubm_cmd->add_option("--manifest", ubm_manifest, "Corpus manifest")->required();
  ubm_cmd->add_option("--out", ubm_out, "Model output path")->required();
  ubm_cmd->add_option("--components", train.num_components, "Mixture size");
  ubm_cmd->add_option("--max-iters", train.max_em_iters, "EM iteration cap");
  ubm_cmd->add_option("--ll-tol", train.ll_tol, "Relative LL stop tolerance");
  ubm_cmd->add_option("--variance-floor", train.variance_floor,
                      "Variance floor fraction");
  ubm_cmd->add_option("--relevance", train.map_relevance, "MAP relevance");
  ubm_cmd->add_option("--seed", ubm_seed, "RNG seed (printed if omitted)");
  ubm_cmd->add_option("--format", ubm_format, "text | binary");
  ubm_cmd->add_flag("--fsr,!--no-fsr", ubm_fsr, "Append FSR column");
  ubm_cmd->add_option("--lowpass-hz", ubm_lowpass, "Pre-filter cutoff");
  ubm_cmd->add_option("--fsr-window-s", ubm_fsr_window, "FSR window length");

  // enroll -------------------------------------------------------------------
  auto* enroll = app.add_subcommand("enroll", "Build an identity model");
  std::string en_system = "structural", en_in, en_out, en_ubm, en_person,
              en_format = "text";
  StructuralParams structural;
  enroll->add_option("--system", en_system, "structural | statistical");
  enroll->add_option("--in", en_in, "Enrollment WAV")->required();
  enroll->add_option("--out", en_out, "Template/model output path")->required();
  enroll->add_option("--ubm", en_ubm, "UBM path (statistical)");
  enroll->add_option("--person", en_person, "Person identifier");
  enroll->add_option("--relevance", train.map_relevance, "MAP relevance");
  enroll->add_option("--format", en_format, "text | binary (statistical)");
  enroll->add_option("--subseq-window-s", structural.subseq_window_s,
                     "Best-subsequence window (structural)");
  enroll->add_option("--th-fsr", structural.th_fsr, "FSR activation threshold");

  // verify -------------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "Score a probe recording");
  std::string ver_system = "structural", ver_in, ver_template, ver_model,
              ver_ubm;
  double ver_threshold = 0.0;
  verify->add_option("--system", ver_system, "structural | statistical");
  verify->add_option("--in", ver_in, "Probe WAV")->required();
  verify->add_option("--template", ver_template, "Template path (structural)");
  verify->add_option("--model", ver_model, "Identity model (statistical)");
  verify->add_option("--ubm", ver_ubm, "UBM path (statistical)");
  verify->add_option("--threshold", ver_threshold,
                     "Decision threshold (distance or LLR)");
  verify->add_option("--th-fsr", structural.th_fsr, "FSR activation threshold");

  // evaluate -----------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate",
                                      "Run a verification experiment");
  std::string ev_manifest, ev_out_dir, ev_system = "statistical";
  ExperimentConfig experiment;
  int64_t ev_seed = -1;
  size_t ev_det_points = 200;
  evaluate->add_option("--manifest", ev_manifest, "Corpus manifest")->required();
  evaluate->add_option("--out-dir", ev_out_dir, "Report/DET output directory");
  evaluate->add_option("--system", ev_system, "structural | statistical");
  evaluate->add_option("--components", experiment.train.num_components,
                       "Mixture size");
  evaluate->add_option("--max-iters", experiment.train.max_em_iters,
                       "EM iteration cap");
  evaluate->add_option("--relevance", experiment.train.map_relevance,
                       "MAP relevance");
  evaluate->add_option("--seed", ev_seed, "RNG seed (printed if omitted)");
  evaluate->add_option("--jobs", experiment.jobs, "Parallel scoring threads");
  evaluate->add_option("--det-points", ev_det_points, "DET curve resolution");
  evaluate->add_flag("--exclude-claimed-ubm",
                     experiment.exclude_claimed_from_ubm,
                     "Leave the claimed identity out of the UBM");
  evaluate->add_flag("--fsr,!--no-fsr", experiment.append_fsr,
                     "Append FSR column");
  evaluate->add_option("--th-fsr", experiment.structural.th_fsr,
                       "FSR activation threshold (structural)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(synth))
      return cmd_synth(synth_out, corpus, synth_seed, synth_preset);
    if (app.got_subcommand(segment))
      return cmd_segment(seg_in, seg_out, seg_lowpass, seg_tone_ms,
                         seg_window_s);
    if (app.got_subcommand(features))
      return cmd_features(feat_in, feat_out, feat_preset, feat_format,
                          feat_fsr, feat_lowpass, feat_fsr_window);
    if (app.got_subcommand(ubm_cmd))
      return cmd_train_ubm(ubm_manifest, ubm_out, train, ubm_seed, ubm_format,
                           ubm_lowpass, ubm_fsr_window, ubm_fsr);
    if (app.got_subcommand(enroll))
      return cmd_enroll(en_system, en_in, en_out, en_ubm, en_person, train,
                        structural, en_format, ubm_lowpass, ubm_fsr_window,
                        ubm_fsr);
    if (app.got_subcommand(verify))
      return cmd_verify(ver_system, ver_in, ver_template, ver_model, ver_ubm,
                        ver_threshold, structural, ubm_lowpass, ubm_fsr_window,
                        ubm_fsr);
    if (app.got_subcommand(evaluate))
      return cmd_evaluate(ev_manifest, ev_out_dir, ev_system, experiment,
                          ev_seed, ev_det_points);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const hsbio::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
