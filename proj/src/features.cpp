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

#include "hsbio/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "hsbio/fft.hpp"
#include "hsbio/file_util.hpp"
#include "hsbio/rng.hpp"

namespace hsbio {

namespace {

constexpr double kLogEnergyFloor = 1e-10;

// exp(i*phase) with the phase computed in extended precision; the chirp
// phases grow quadratically and would otherwise lose accuracy on long
// segments.
std::complex<double> cis_l(long double phase) {
  const long double two_pi = 2.0L * 3.14159265358979323846264338328L;
  const long double p = std::fmod(phase, two_pi);
  return {static_cast<double>(std::cos(p)), static_cast<double>(std::sin(p))};
}

void append_delta(const std::vector<std::vector<double>>& src,
                  std::vector<std::vector<double>>& dst, size_t window) {
  // Regression delta over +-window frames, edge frames replicated.
  const long t_max = static_cast<long>(src.size()) - 1;
  double norm = 0.0;
  for (size_t th = 1; th <= window; ++th) norm += 2.0 * th * th;
  for (long t = 0; t <= t_max; ++t) {
    std::vector<double> d(src[0].size(), 0.0);
    for (size_t th = 1; th <= window; ++th) {
      const auto& fwd = src[static_cast<size_t>(std::min<long>(t + th, t_max))];
      const auto& bwd = src[static_cast<size_t>(std::max<long>(t - th, 0))];
      for (size_t k = 0; k < d.size(); ++k)
        d[k] += th * (fwd[k] - bwd[k]);
    }
    for (double& v : d) v /= norm;
    dst.push_back(std::move(d));
  }
}

double segment_power(const PcgSignal& sig, size_t start, size_t end) {
  end = std::min(end, sig.samples.size());
  if (start >= end) return 0.0;
  double acc = 0.0;
  for (size_t i = start; i < end; ++i) acc += sig.samples[i] * sig.samples[i];
  return acc / static_cast<double>(end - start);
}

}  // namespace

double mel_from_hz(double f_lin) {
  return 2595.0 * std::log10(1.0 + f_lin / 700.0);
}

double hz_from_mel(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> cepstrum(std::span<const double> filter_log_energies,
                             size_t num_coeffs) {
  const size_t k_filters = filter_log_energies.size();
  if (k_filters == 0) throw InvalidParams("cepstrum: no filter outputs");
  std::vector<double> c(num_coeffs + 1, 0.0);
  for (size_t i = 0; i <= num_coeffs; ++i) {
    double acc = 0.0;
    for (size_t k = 1; k <= k_filters; ++k)
      acc += filter_log_energies[k - 1] *
             std::cos(static_cast<double>(i) *
                      (static_cast<double>(k) - 0.5) * kPi /
                      static_cast<double>(k_filters));
    c[i] = acc;
  }
  return c;
}

std::vector<std::vector<double>> make_filterbank(const FilterbankSpec& fb,
                                                 double sample_rate) {
  if (fb.num_filters < 1) throw InvalidParams("filterbank: need >= 1 filter");
  if (!(fb.min_freq >= 0.0) || !(fb.min_freq < fb.max_freq) ||
      !(fb.max_freq <= sample_rate / 2.0))
    throw InvalidParams("filterbank: need 0 <= min < max <= rate/2");

  const size_t bins = fb.fft_size / 2 + 1;
  const size_t k = fb.num_filters;

  // K+2 edge points equally spaced on the chosen scale.
  std::vector<double> edges(k + 2);
  if (fb.scale == FilterScale::kMel) {
    const double lo = mel_from_hz(fb.min_freq), hi = mel_from_hz(fb.max_freq);
    for (size_t i = 0; i < k + 2; ++i)
      edges[i] = hz_from_mel(lo + (hi - lo) * static_cast<double>(i) /
                                      static_cast<double>(k + 1));
  } else {
    for (size_t i = 0; i < k + 2; ++i)
      edges[i] = fb.min_freq + (fb.max_freq - fb.min_freq) *
                                   static_cast<double>(i) /
                                   static_cast<double>(k + 1);
  }

  std::vector<std::vector<double>> weights(k, std::vector<double>(bins, 0.0));
  for (size_t f = 0; f < k; ++f) {
    const double left = edges[f], centre = edges[f + 1], right = edges[f + 2];
    for (size_t b = 0; b < bins; ++b) {
      const double freq =
          static_cast<double>(b) * sample_rate / static_cast<double>(fb.fft_size);
      double w = 0.0;
      if (freq > left && freq < centre) {
        w = (freq - left) / (centre - left);
      } else if (freq >= centre && freq < right) {
        w = (right - freq) / (right - centre);
      }
      weights[f][b] = w;
    }
  }
  return weights;
}

FeatureMatrix extract_cepstra(const PcgSignal& sig, const FilterbankSpec& fb,
                              const CepstrumSpec& cs, const FrameSpec& frames) {
  if (cs.num_coeffs < 1) throw InvalidParams("cepstrum spec: need M >= 1");
  if (cs.num_coeffs > fb.num_filters)
    throw InvalidParams("cepstrum spec: M must not exceed the filter count");
  const size_t num_frames = frames.num_frames(sig.samples.size());
  if (num_frames == 0)
    throw SignalTooShort("extract_cepstra: signal shorter than one frame");
  if (frames.frame_length > fb.fft_size)
    throw InvalidParams("extract_cepstra: frame longer than fft_size");

  const auto bank = make_filterbank(fb, sig.sample_rate);
  const std::vector<double> window =
      make_window(frames.window, frames.frame_length);

  const size_t m = cs.num_coeffs;
  std::vector<std::vector<double>> statics;  // per frame: c1..cM [, E]
  statics.reserve(num_frames);
  std::vector<double> frame_buf(frames.frame_length);

  for (size_t t = 0; t < num_frames; ++t) {
    const double* x = sig.samples.data() + t * frames.hop;
    for (size_t i = 0; i < frames.frame_length; ++i)
      frame_buf[i] = window[i] * x[i];
    const std::vector<double> spec = power_spectrum(frame_buf, fb.fft_size);

    std::vector<double> log_e(fb.num_filters);
    for (size_t f = 0; f < fb.num_filters; ++f) {
      double acc = 0.0;
      for (size_t b = 0; b < spec.size(); ++b) acc += bank[f][b] * spec[b];
      log_e[f] = std::log(std::max(acc, kLogEnergyFloor));
    }
    const std::vector<double> c = cepstrum(log_e, m);

    std::vector<double> row(c.begin() + 1, c.end());  // c1..cM
    if (cs.include_c0_energy) row.push_back(c[0]);
    statics.push_back(std::move(row));
  }

  std::vector<std::vector<double>> deltas, deltas2;
  if (cs.deltas != DeltaOrder::kNone) {
    append_delta(statics, deltas, cs.delta_window);
    if (cs.deltas == DeltaOrder::kFirstAndSecond)
      append_delta(deltas, deltas2, cs.delta_window);
  }

  // Layout: c1..cM, d(c1..cM), dd(c1..cM), E, dE, ddE.
  FeatureMatrix fm;
  fm.num_frames = num_frames;
  const size_t n_static = m;
  const bool has_e = cs.include_c0_energy;
  const size_t orders = cs.deltas == DeltaOrder::kNone
                            ? 1
                            : (cs.deltas == DeltaOrder::kFirst ? 2 : 3);
  fm.dim = n_static * orders + (has_e ? orders : 0);
  fm.data.resize(fm.num_frames * fm.dim);

  const char* prefix[3] = {"", "d", "dd"};
  for (size_t o = 0; o < orders; ++o)
    for (size_t i = 1; i <= m; ++i)
      fm.dim_labels.push_back(std::string(prefix[o]) + "c" + std::to_string(i));
  if (has_e)
    for (size_t o = 0; o < orders; ++o)
      fm.dim_labels.push_back(std::string(prefix[o]) + "E");

  for (size_t t = 0; t < num_frames; ++t) {
    auto row = fm.row(t);
    size_t pos = 0;
    const std::vector<std::vector<double>>* sources[3] = {&statics, &deltas,
                                                          &deltas2};
    for (size_t o = 0; o < orders; ++o)
      for (size_t i = 0; i < m; ++i) row[pos++] = (*sources[o])[t][i];
    if (has_e)
      for (size_t o = 0; o < orders; ++o) row[pos++] = (*sources[o])[t][m];
  }
  return fm;
}

std::vector<std::complex<double>> czt_zoom_spectrum(
    std::span<const double> segment, double sample_rate, double f_start,
    double f_end, size_t num_bins) {
  if (num_bins < 2) throw InvalidBand("czt: need at least 2 bins");
  if (!(f_start >= 0.0) || !(f_start < f_end) ||
      !(f_end <= sample_rate / 2.0))
    throw InvalidBand("czt: need 0 <= f_start < f_end <= rate/2");
  if (segment.empty()) throw InvalidBand("czt: empty segment");

  const size_t n = segment.size();
  const size_t m = num_bins;
  const long double theta0 =
      2.0L * 3.14159265358979323846264338328L * f_start / sample_rate;
  const long double dtheta = 2.0L * 3.14159265358979323846264338328L *
                             (f_end - f_start) / sample_rate /
                             static_cast<long double>(m - 1);

  // Bluestein: nk = (n^2 + k^2 - (k-n)^2)/2 turns the transform into a
  // convolution with the chirp exp(+i*dtheta*j^2/2).
  const size_t conv_len = next_pow2(n + m - 1);
  std::vector<std::complex<double>> a(conv_len, {0.0, 0.0});
  std::vector<std::complex<double>> b(conv_len, {0.0, 0.0});

  for (size_t j = 0; j < n; ++j) {
    const long double jj = static_cast<long double>(j);
    const std::complex<double> chirp =
        cis_l(-(theta0 * jj + dtheta * jj * jj / 2.0L));
    a[j] = chirp * segment[j];
  }
  for (size_t j = 0; j < std::max(n, m); ++j) {
    const long double jj = static_cast<long double>(j);
    const std::complex<double> chirp = cis_l(dtheta * jj * jj / 2.0L);
    if (j < m) b[j] = chirp;
    if (j > 0 && j < n) b[conv_len - j] = chirp;
  }

  fft_inplace(a);
  fft_inplace(b);
  for (size_t i = 0; i < conv_len; ++i) a[i] *= b[i];
  fft_inplace(a, /*inverse=*/true);

  std::vector<std::complex<double>> out(m);
  for (size_t k = 0; k < m; ++k) {
    const long double kk = static_cast<long double>(k);
    out[k] = a[k] * cis_l(-dtheta * kk * kk / 2.0L);
  }
  return out;
}

FsrValue fsr_sequence(const PcgSignal& sig, const ToneEndpoints& tones) {
  const auto cycles = complete_cycles(tones);
  if (cycles.empty()) throw NoCompleteCycle("no complete S1->S2 cycle");

  double p1 = 0.0, p2 = 0.0;
  for (const auto& [i_s1, i_s2] : cycles) {
    p1 += segment_power(sig, tones.tones[i_s1].start, tones.tones[i_s1].end);
    p2 += segment_power(sig, tones.tones[i_s2].start, tones.tones[i_s2].end);
  }
  p1 /= static_cast<double>(cycles.size());
  p2 /= static_cast<double>(cycles.size());
  if (!(p1 > 0.0) || !(p2 > 0.0))
    throw DegeneratePower("zero average tone power");
  FsrValue v;
  v.ratio = p1 / p2;
  v.ratio_db = 10.0 * std::log10(v.ratio);
  return v;
}

std::vector<double> fsr_windowed(const PcgSignal& sig,
                                 const ToneEndpoints& tones,
                                 const FrameSpec& frames, double window_s) {
  if (!(window_s > 0.0)) throw InvalidParams("fsr_windowed: bad window");
  const size_t n = sig.samples.size();
  const size_t win = static_cast<size_t>(
      std::max<long>(1, std::lround(window_s * sig.sample_rate)));
  const size_t num_windows = (n + win - 1) / win;

  const auto cycles = complete_cycles(tones);
  if (cycles.empty()) throw NoCompleteCycle("no complete S1->S2 cycle");

  // Average powers per window; a cycle belongs to the window containing the
  // start of its S1 tone.
  std::vector<double> sum1(num_windows, 0.0), sum2(num_windows, 0.0);
  std::vector<size_t> counts(num_windows, 0);
  for (const auto& [i_s1, i_s2] : cycles) {
    const size_t w = std::min(tones.tones[i_s1].start / win, num_windows - 1);
    sum1[w] += segment_power(sig, tones.tones[i_s1].start, tones.tones[i_s1].end);
    sum2[w] += segment_power(sig, tones.tones[i_s2].start, tones.tones[i_s2].end);
    counts[w]++;
  }

  std::vector<double> value_db(num_windows);
  std::vector<bool> valid(num_windows, false);
  for (size_t w = 0; w < num_windows; ++w) {
    if (counts[w] == 0) continue;
    if (!(sum1[w] > 0.0) || !(sum2[w] > 0.0)) continue;
    value_db[w] = 10.0 * std::log10(sum1[w] / sum2[w]);
    valid[w] = true;
  }

  // Cycle-less windows inherit the nearest valid value (ties to the left).
  for (size_t w = 0; w < num_windows; ++w) {
    if (valid[w]) continue;
    long best = -1;
    size_t best_dist = num_windows + 1;
    for (size_t v = 0; v < num_windows; ++v) {
      if (!valid[v]) continue;
      const size_t dist = v > w ? v - w : w - v;
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<long>(v);
      }
    }
    if (best < 0) throw NoCompleteCycle("no window with a complete cycle");
    value_db[w] = value_db[static_cast<size_t>(best)];
  }

  const size_t num_frames = frames.num_frames(n);
  if (num_frames == 0)
    throw SignalTooShort("fsr_windowed: signal shorter than one frame");
  std::vector<double> column(num_frames);
  for (size_t t = 0; t < num_frames; ++t) {
    const size_t centre = t * frames.hop + frames.frame_length / 2;
    column[t] = value_db[std::min(centre / win, num_windows - 1)];
  }
  return column;
}

void append_column(FeatureMatrix& fm, std::span<const double> column,
                   const std::string& label) {
  if (column.size() != fm.num_frames)
    throw DimensionMismatch("append_column: row count mismatch");
  FeatureMatrix out;
  out.num_frames = fm.num_frames;
  out.dim = fm.dim + 1;
  out.dim_labels = fm.dim_labels;
  out.dim_labels.push_back(label);
  out.data.resize(out.num_frames * out.dim);
  for (size_t t = 0; t < fm.num_frames; ++t) {
    std::copy_n(fm.row(t).data(), fm.dim, out.row(t).data());
    out.row(t)[fm.dim] = column[t];
  }
  fm = std::move(out);
}

std::vector<std::vector<double>> tone_mean_cepstra(const PcgSignal& sig,
                                                   const ToneEndpoints& tones,
                                                   const FilterbankSpec& fb,
                                                   const CepstrumSpec& cs,
                                                   const FrameSpec& frames) {
  std::vector<std::vector<double>> out;
  out.reserve(tones.tones.size());
  for (const Tone& t : tones.tones) {
    const size_t end = std::min(t.end, sig.samples.size());
    if (end <= t.start || end - t.start < frames.frame_length)
      throw SignalTooShort("tone segment shorter than one analysis frame");
    PcgSignal slice;
    slice.sample_rate = sig.sample_rate;
    slice.samples.assign(sig.samples.begin() + static_cast<long>(t.start),
                         sig.samples.begin() + static_cast<long>(end));
    const FeatureMatrix fm = extract_cepstra(slice, fb, cs, frames);
    std::vector<double> mean(fm.dim, 0.0);
    for (size_t r = 0; r < fm.num_frames; ++r)
      for (size_t d = 0; d < fm.dim; ++d) mean[d] += fm.at(r, d);
    for (double& v : mean) v /= static_cast<double>(fm.num_frames);
    out.push_back(std::move(mean));
  }
  return out;
}

FeatureConfig structural_feature_config(double sample_rate) {
  FeatureConfig cfg;
  cfg.filterbank.scale = FilterScale::kMel;
  cfg.filterbank.num_filters = 24;
  cfg.filterbank.min_freq = 0.0;
  cfg.filterbank.max_freq = 500.0;
  cfg.filterbank.fft_size = 1024;
  cfg.cepstrum.num_coeffs = 12;
  cfg.cepstrum.include_c0_energy = true;
  cfg.cepstrum.deltas = DeltaOrder::kNone;
  cfg.frames = FrameSpec::from_ms(25.0, 10.0, sample_rate, WindowKind::kHamming);
  return cfg;
}

FeatureConfig statistical_feature_config(double sample_rate) {
  FeatureConfig cfg;
  cfg.filterbank.scale = FilterScale::kLinear;
  cfg.filterbank.num_filters = 24;
  cfg.filterbank.min_freq = 0.0;
  cfg.filterbank.max_freq = 500.0;
  cfg.filterbank.fft_size = 1024;
  cfg.cepstrum.num_coeffs = 16;
  cfg.cepstrum.include_c0_energy = true;
  cfg.cepstrum.deltas = DeltaOrder::kFirst;
  cfg.cepstrum.delta_window = 2;
  cfg.frames = FrameSpec::from_ms(25.0, 10.0, sample_rate, WindowKind::kHamming);
  return cfg;
}

FeatureMatrix statistical_frontend(const PcgSignal& sig,
                                   double lowpass_cutoff_hz,
                                   double fsr_window_s, bool append_fsr) {
  const PcgSignal filtered = lowpass_filter(sig, lowpass_cutoff_hz);
  const FeatureConfig fc = statistical_feature_config(sig.sample_rate);
  const SegmentationConfig seg = SegmentationConfig::defaults(sig.sample_rate);
  const ToneEndpoints tones = detect_tones(filtered, seg);

  FeatureMatrix fm =
      extract_cepstra(filtered, fc.filterbank, fc.cepstrum, fc.frames);
  if (append_fsr) {
    const std::vector<double> col =
        fsr_windowed(filtered, tones, fc.frames, fsr_window_s);
    append_column(fm, col, "FSR");
  }

  // Frame selection: model only the frames whose centre falls inside a
  // detected tone. Diastolic stretches carry noise, not identity.
  std::vector<size_t> keep;
  size_t tone_idx = 0;
  for (size_t t = 0; t < fm.num_frames; ++t) {
    const size_t centre = t * fc.frames.hop + fc.frames.frame_length / 2;
    while (tone_idx < tones.tones.size() && tones.tones[tone_idx].end <= centre)
      ++tone_idx;
    if (tone_idx < tones.tones.size() && centre >= tones.tones[tone_idx].start)
      keep.push_back(t);
  }
  if (keep.empty()) throw TooFewTones("no feature frames inside tones");

  FeatureMatrix selected;
  selected.num_frames = keep.size();
  selected.dim = fm.dim;
  selected.dim_labels = fm.dim_labels;
  selected.data.reserve(keep.size() * fm.dim);
  for (size_t t : keep)
    selected.data.insert(selected.data.end(), fm.row(t).begin(),
                         fm.row(t).end());
  return selected;
}

std::string feature_matrix_text(const FeatureMatrix& fm) {
  std::string out = "# ";
  for (size_t d = 0; d < fm.dim_labels.size(); ++d) {
    if (d) out += ' ';
    out += fm.dim_labels[d];
  }
  out += '\n';
  for (size_t t = 0; t < fm.num_frames; ++t) {
    for (size_t d = 0; d < fm.dim; ++d) {
      if (d) out += ' ';
      out += format_double(fm.at(t, d));
    }
    out += '\n';
  }
  return out;
}

std::string feature_matrix_binary(const FeatureMatrix& fm) {
  std::string out = "HSFM";
  auto put_u32 = [&out](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_u32(1);  // version
  put_u32(static_cast<uint32_t>(fm.num_frames));
  put_u32(static_cast<uint32_t>(fm.dim));
  const size_t bytes = fm.data.size() * sizeof(double);
  const size_t off = out.size();
  out.resize(off + bytes);
  std::memcpy(out.data() + off, fm.data.data(), bytes);
  return out;
}

FeatureMatrix parse_feature_matrix_binary(const std::string& bytes) {
  if (bytes.size() < 16 || bytes.compare(0, 4, "HSFM") != 0)
    throw Error("not a feature matrix blob");
  auto get_u32 = [&bytes](size_t off) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + i]))
           << (8 * i);
    return v;
  };
  const uint32_t version = get_u32(4);
  if (version != 1) throw Error("unsupported feature blob version");
  FeatureMatrix fm;
  fm.num_frames = get_u32(8);
  fm.dim = get_u32(12);
  const size_t want = 16 + fm.num_frames * fm.dim * sizeof(double);
  if (bytes.size() != want) throw Error("feature blob size mismatch");
  fm.data.resize(fm.num_frames * fm.dim);
  std::memcpy(fm.data.data(), bytes.data() + 16, fm.data.size() * sizeof(double));
  for (size_t d = 0; d < fm.dim; ++d)
    fm.dim_labels.push_back("x" + std::to_string(d));
  return fm;
}

}  // namespace hsbio
