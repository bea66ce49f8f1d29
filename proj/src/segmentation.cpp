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

#include "hsbio/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hsbio {

namespace {

struct Pick {
  size_t frame;
  double energy;
  int train;  // 0: seeded from SX1, 1: from SX2
};

size_t argmax_range(const std::vector<double>& e, size_t lo, size_t hi) {
  size_t best = lo;
  for (size_t i = lo + 1; i <= hi; ++i)
    if (e[i] > e[best]) best = i;
  return best;
}

// A pick this far below its train's seed energy is the noise floor (a dead
// stretch at the signal edge or an excised region), not a heart sound.
constexpr double kMinPickRelEnergy = 1e-3;

// Walks left and right from the seed in steps of the period, picking the
// local energy maximum inside +-halfwidth around each nominal position.
// Re-anchors at each accepted pick to follow heart-rate drift.
std::vector<Pick> walk_train(const std::vector<double>& e, size_t seed,
                             size_t period, size_t halfwidth, int train) {
  const long n = static_cast<long>(e.size());
  const long p = static_cast<long>(period);
  const long hw = static_cast<long>(halfwidth);
  std::vector<Pick> picks;
  picks.push_back({seed, e[seed], train});

  for (int dir : {-1, +1}) {
    long anchor = static_cast<long>(seed);
    while (true) {
      const long nominal = anchor + dir * p;
      long lo = nominal - hw, hi = nominal + hw;
      if (hi < 0 || lo >= n) break;
      lo = std::max<long>(lo, 0);
      hi = std::min<long>(hi, n - 1);
      const size_t idx = argmax_range(e, static_cast<size_t>(lo),
                                      static_cast<size_t>(hi));
      if (e[idx] <= kMinPickRelEnergy * e[seed]) break;
      picks.push_back({idx, e[idx], train});
      anchor = static_cast<long>(idx);
    }
  }

  std::sort(picks.begin(), picks.end(),
            [](const Pick& a, const Pick& b) { return a.frame < b.frame; });
  picks.erase(std::unique(picks.begin(), picks.end(),
                          [](const Pick& a, const Pick& b) {
                            return a.frame == b.frame;
                          }),
              picks.end());
  return picks;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SegmentationConfig resolve_config(const SegmentationConfig& cfg,
                                  double sample_rate) {
  SegmentationConfig r = cfg;
  if (r.energy_frame.frame_length == 0)
    r.energy_frame = FrameSpec::from_ms(20.0, 10.0, sample_rate,
                                        WindowKind::kRectangular);
  return r;
}

// Places the constant-width tone window just ahead of the anchor frame,
// shifting inward at the signal edges so the width is preserved.
std::pair<size_t, size_t> tone_window(size_t peak_frame_start, size_t width,
                                      size_t back_porch, size_t signal_len) {
  long start = static_cast<long>(peak_frame_start) - static_cast<long>(back_porch);
  start = std::max<long>(start, 0);
  if (static_cast<size_t>(start) + width > signal_len)
    start = static_cast<long>(signal_len) - static_cast<long>(width);
  start = std::max<long>(start, 0);
  return {static_cast<size_t>(start), static_cast<size_t>(start) + width};
}

// Drops overlapping tones (keeping the stronger) and enforces strict S1/S2
// alternation by keeping the stronger of same-label neighbours. A kept
// replacement can create a new collision with its predecessor, so iterate
// to a fixed point.
void tidy_tones(std::vector<Tone>& tones) {
  std::sort(tones.begin(), tones.end(),
            [](const Tone& a, const Tone& b) { return a.start < b.start; });
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Tone> out;
    for (const Tone& t : tones) {
      if (!out.empty() &&
          (t.start < out.back().end || t.label == out.back().label)) {
        if (t.peak_energy > out.back().peak_energy) out.back() = t;
        changed = true;
        continue;
      }
      out.push_back(t);
    }
    tones = std::move(out);
  }
}

}  // namespace

const char* to_string(ToneLabel label) {
  return label == ToneLabel::kS1 ? "S1" : "S2";
}

SegmentationConfig SegmentationConfig::defaults(double sample_rate) {
  SegmentationConfig cfg;
  cfg.energy_frame = FrameSpec::from_ms(20.0, 10.0, sample_rate,
                                        WindowKind::kRectangular);
  return cfg;
}

size_t estimate_period(const EnergyTrack& track) {
  const std::vector<double>& e = track.energies;
  const size_t n = e.size();
  if (n < 3) throw NoPeriodFound("energy track shorter than 3 frames");

  std::vector<double> r(n, 0.0);
  for (size_t lag = 0; lag < n; ++lag) {
    double acc = 0.0;
    for (size_t t = 0; t + lag < n; ++t) acc += e[t] * e[t + lag];
    r[lag] = acc;
  }

  // First minimum: running minimum followed by a strict rise. Strict '<'
  // keeps plateau ties at the smaller lag.
  size_t min_idx = 0;
  size_t first_min = 0;
  bool found_min = false;
  for (size_t lag = 1; lag < n; ++lag) {
    if (r[lag] < r[min_idx]) {
      min_idx = lag;
    } else if (r[lag] > r[min_idx] && min_idx >= 1) {
      first_min = min_idx;
      found_min = true;
      break;
    }
  }
  if (!found_min)
    throw NoPeriodFound("autocorrelation has no minimum followed by a rise");

  size_t period = argmax_range(r, first_min + 1, n - 1);

  // Octave-error correction: cycle-length jitter can line up better at a
  // multiple of the true period. Prefer the smallest sub-multiple lag whose
  // autocorrelation comes close to the maximum.
  for (size_t div = 4; div >= 2; --div) {
    const size_t centre = period / div;
    if (centre <= first_min) continue;
    const size_t halfwidth = std::max<size_t>(1, centre / 8);
    const size_t lo = std::max(centre - halfwidth, first_min + 1);
    const size_t hi = std::min(centre + halfwidth, n - 1);
    if (lo > hi) continue;
    const size_t sub = argmax_range(r, lo, hi);
    if (r[sub] >= 0.8 * r[period]) {
      period = sub;
      break;
    }
  }
  if (period < 1) throw NoPeriodFound("degenerate period");
  return period;
}

ToneEndpoints detect_tones_range(const PcgSignal& sig,
                                 const SegmentationConfig& cfg_in,
                                 size_t begin, size_t end) {
  if (end > sig.samples.size() || begin >= end)
    throw InvalidParams("detect_tones_range: bad sample range");
  const SegmentationConfig cfg = resolve_config(cfg_in, sig.sample_rate);
  const FrameSpec& fspec = cfg.energy_frame;
  const size_t range_len = end - begin;
  const size_t num_frames = fspec.num_frames(range_len);
  if (num_frames < 3) throw TooFewTones("analysis range shorter than 3 frames");

  std::vector<double> e(num_frames, 0.0);
  const std::vector<double> w = make_window(fspec.window, fspec.frame_length);
  for (size_t k = 0; k < num_frames; ++k) {
    const double* x = sig.samples.data() + begin + k * fspec.hop;
    double acc = 0.0;
    for (size_t i = 0; i < fspec.frame_length; ++i) {
      const double v = w[i] * x[i];
      acc += v * v;
    }
    e[k] = acc;
  }

  const size_t sx1 = argmax_range(e, 0, num_frames - 1);
  if (e[sx1] <= 0.0) throw TooFewTones("no signal energy in range");

  EnergyTrack track;
  track.energies = e;
  track.frame_spec = fspec;
  const size_t period = estimate_period(track);

  size_t halfwidth =
      cfg.search_halfwidth_frames >= 0
          ? static_cast<size_t>(cfg.search_halfwidth_frames)
          : static_cast<size_t>(std::max<long>(1, std::lround(0.15 * period)));
  halfwidth = std::min(halfwidth, period - 1);
  halfwidth = std::max<size_t>(halfwidth, 1);

  const size_t width = static_cast<size_t>(
      std::max<long>(1, std::lround(cfg.tone_window_ms * sig.sample_rate / 1000.0)));
  const size_t porch = static_cast<size_t>(
      std::max<long>(0, std::lround(cfg.back_porch_ms * sig.sample_rate / 1000.0)));
  if (width > sig.samples.size())
    throw TooFewTones("signal shorter than one tone window");

  auto frame_to_window = [&](size_t frame) {
    return tone_window(begin + frame * fspec.hop, width, porch,
                       sig.samples.size());
  };

  // Train 1, then excise its tone windows from the energy signal and find
  // the second train from the new global maximum.
  std::vector<Pick> train1 = walk_train(e, sx1, period, halfwidth, 0);

  std::vector<double> e2 = e;
  for (const Pick& p : train1) {
    const auto [ts, te] = frame_to_window(p.frame);
    for (size_t k = 0; k < num_frames; ++k) {
      const size_t fs_ = begin + k * fspec.hop;
      const size_t fe_ = fs_ + fspec.frame_length;
      if (fs_ < te && fe_ > ts) e2[k] = 0.0;
    }
  }

  const size_t sx2 = argmax_range(e2, 0, num_frames - 1);
  if (e2[sx2] <= kMinPickRelEnergy * e[sx1])
    throw TooFewTones("only one tone train present");
  std::vector<Pick> train2 = walk_train(e2, sx2, period, halfwidth, 1);

  // Decide which train is S1: the train whose gap to the following other-train
  // tone is shorter holds the systolic position.
  std::vector<Pick> events = train1;
  events.insert(events.end(), train2.begin(), train2.end());
  std::sort(events.begin(), events.end(),
            [](const Pick& a, const Pick& b) { return a.frame < b.frame; });

  std::vector<double> gap01, gap10;
  for (size_t i = 0; i + 1 < events.size(); ++i) {
    if (events[i].train == events[i + 1].train) continue;
    const double gap =
        static_cast<double>(events[i + 1].frame - events[i].frame);
    (events[i].train == 0 ? gap01 : gap10).push_back(gap);
  }

  bool train0_is_s1;
  if (!gap01.empty() && !gap10.empty()) {
    train0_is_s1 = median(gap01) < median(gap10);
  } else if (!gap01.empty()) {
    train0_is_s1 = median(gap01) < 0.5 * static_cast<double>(period);
  } else if (!gap10.empty()) {
    train0_is_s1 = !(median(gap10) < 0.5 * static_cast<double>(period));
  } else {
    throw TooFewTones("tone trains do not interleave");
  }

  ToneEndpoints out;
  out.period_samples = static_cast<double>(period * fspec.hop);
  if (train1.size() != train2.size()) {
    std::ostringstream warn;
    warn << "tone trains have unequal counts (" << train1.size() << " vs "
         << train2.size() << "); emitting truncated alternation";
    out.warnings.push_back(warn.str());
  }

  for (const Pick& p : events) {
    const auto [ts, te] = frame_to_window(p.frame);
    const bool is_s1 = (p.train == 0) == train0_is_s1;
    out.tones.push_back(
        {is_s1 ? ToneLabel::kS1 : ToneLabel::kS2, ts, te, p.energy});
  }
  tidy_tones(out.tones);

  size_t n_s1 = 0, n_s2 = 0;
  for (const Tone& t : out.tones)
    (t.label == ToneLabel::kS1 ? n_s1 : n_s2)++;
  if (n_s1 < 1 || n_s2 < 1)
    throw TooFewTones("need at least one S1 and one S2");
  return out;
}

ToneEndpoints detect_tones_short(const PcgSignal& sig,
                                 const SegmentationConfig& cfg) {
  if (sig.samples.empty()) throw TooFewTones("empty signal");
  return detect_tones_range(sig, cfg, 0, sig.samples.size());
}

ToneEndpoints detect_tones(const PcgSignal& sig,
                           const SegmentationConfig& cfg_in) {
  if (sig.samples.empty()) throw TooFewTones("empty signal");
  const SegmentationConfig cfg = resolve_config(cfg_in, sig.sample_rate);
  const size_t n = sig.samples.size();
  const double win_samples = cfg.analysis_window_s * sig.sample_rate;

  // Equal-width windows close to analysis_window_s; a small remainder is
  // absorbed rather than processed as a fragment.
  size_t num_windows = static_cast<size_t>(n / win_samples);
  if (num_windows == 0) {
    num_windows = 1;
  } else if (static_cast<double>(n) - num_windows * win_samples >
             0.1 * win_samples) {
    ++num_windows;
  }
  const double width = static_cast<double>(n) / num_windows;

  ToneEndpoints joined;
  std::vector<double> periods;
  std::vector<Tone> tones;
  size_t ok_windows = 0;
  for (size_t i = 0; i < num_windows; ++i) {
    const size_t b = static_cast<size_t>(std::llround(i * width));
    const size_t e = (i + 1 == num_windows)
                         ? n
                         : static_cast<size_t>(std::llround((i + 1) * width));
    try {
      ToneEndpoints part = detect_tones_range(sig, cfg, b, e);
      tones.insert(tones.end(), part.tones.begin(), part.tones.end());
      periods.push_back(part.period_samples);
      for (auto& wmsg : part.warnings)
        joined.warnings.push_back("window " + std::to_string(i) + ": " + wmsg);
      ++ok_windows;
    } catch (const Error& err) {
      joined.warnings.push_back("window " + std::to_string(i) +
                                " skipped: " + err.what());
    }
  }
  if (ok_windows == 0) throw TooFewTones("every analysis window failed");

  // Join across seams: overlapping duplicates collapse to the stronger tone,
  // then alternation is restored.
  tidy_tones(tones);
  joined.tones = std::move(tones);
  joined.period_samples = median(periods);

  size_t n_s1 = 0, n_s2 = 0;
  for (const Tone& t : joined.tones)
    (t.label == ToneLabel::kS1 ? n_s1 : n_s2)++;
  if (n_s1 < 1 || n_s2 < 1)
    throw TooFewTones("need at least one S1 and one S2");
  return joined;
}

std::vector<std::pair<size_t, size_t>> complete_cycles(
    const ToneEndpoints& t) {
  std::vector<std::pair<size_t, size_t>> cycles;
  for (size_t i = 0; i + 1 < t.tones.size(); ++i)
    if (t.tones[i].label == ToneLabel::kS1 &&
        t.tones[i + 1].label == ToneLabel::kS2)
      cycles.emplace_back(i, i + 1);
  return cycles;
}

std::string format_endpoints(const ToneEndpoints& t) {
  std::ostringstream out;
  for (const Tone& tone : t.tones)
    out << to_string(tone.label) << ' ' << tone.start << ' ' << tone.end
        << '\n';
  return out.str();
}

}  // namespace hsbio
