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

#include "hsbio/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "hsbio/file_util.hpp"
#include "hsbio/rng.hpp"

namespace hsbio {

namespace {

uint32_t read_u32le(const std::string& b, size_t off) {
  return static_cast<uint32_t>(static_cast<unsigned char>(b[off])) |
         (static_cast<uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8) |
         (static_cast<uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16) |
         (static_cast<uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24);
}

uint16_t read_u16le(const std::string& b, size_t off) {
  return static_cast<uint16_t>(
      static_cast<uint16_t>(static_cast<unsigned char>(b[off])) |
      (static_cast<uint16_t>(static_cast<unsigned char>(b[off + 1])) << 8));
}

void append_u32le(std::string& b, uint32_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>((v >> 8) & 0xff));
  b.push_back(static_cast<char>((v >> 16) & 0xff));
  b.push_back(static_cast<char>((v >> 24) & 0xff));
}

void append_u16le(std::string& b, uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

FrameSpec FrameSpec::from_ms(double frame_ms, double hop_ms,
                             double sample_rate, WindowKind window) {
  FrameSpec spec;
  spec.frame_length = static_cast<size_t>(
      std::max<long>(1, std::lround(frame_ms * sample_rate / 1000.0)));
  spec.hop = static_cast<size_t>(
      std::max<long>(1, std::lround(hop_ms * sample_rate / 1000.0)));
  spec.window = window;
  return spec;
}

size_t FrameSpec::num_frames(size_t num_samples) const {
  if (num_samples < frame_length) return 0;
  return (num_samples - frame_length) / hop + 1;
}

PcgSignal load_wav(const std::string& path) {
  const std::string raw = read_file(path);
  if (raw.size() < 12 || raw.compare(0, 4, "RIFF") != 0 ||
      raw.compare(8, 4, "WAVE") != 0)
    throw MalformedWav("not a RIFF/WAVE file: " + path);

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t data_off = 0, data_len = 0;
  bool have_data = false;

  size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const std::string id = raw.substr(pos, 4);
    const uint32_t len = read_u32le(raw, pos + 4);
    pos += 8;
    if (pos + len > raw.size())
      throw MalformedWav("truncated chunk '" + id + "' in " + path);
    if (id == "fmt ") {
      if (len < 16) throw MalformedWav("short fmt chunk in " + path);
      format = read_u16le(raw, pos);
      channels = read_u16le(raw, pos + 2);
      rate = read_u32le(raw, pos + 4);
      bits = read_u16le(raw, pos + 14);
      have_fmt = true;
    } else if (id == "data") {
      data_off = pos;
      data_len = len;
      have_data = true;
    }
    pos += len + (len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || !have_data)
    throw MalformedWav("missing fmt/data chunk in " + path);
  if (format != 1)
    throw UnsupportedFormat("non-PCM WAV (format tag " +
                            std::to_string(format) + "): " + path);
  if (channels != 1)
    throw UnsupportedFormat("expected mono, got " + std::to_string(channels) +
                            " channels: " + path);
  if (bits != 8 && bits != 16 && bits != 24)
    throw UnsupportedFormat("unsupported bit depth " + std::to_string(bits) +
                            ": " + path);
  if (rate == 0) throw MalformedWav("zero sample rate: " + path);

  const size_t bytes_per = bits / 8;
  if (data_len % bytes_per != 0)
    throw MalformedWav("data chunk not a whole number of samples: " + path);
  const size_t n = data_len / bytes_per;
  if (n == 0) throw MalformedWav("empty data chunk: " + path);

  PcgSignal sig;
  sig.sample_rate = static_cast<double>(rate);
  sig.source_id = path;
  sig.samples.resize(n);
  const unsigned char* d =
      reinterpret_cast<const unsigned char*>(raw.data()) + data_off;
  switch (bits) {
    case 8:
      for (size_t i = 0; i < n; ++i)
        sig.samples[i] = (static_cast<int>(d[i]) - 128) / 128.0;
      break;
    case 16:
      for (size_t i = 0; i < n; ++i) {
        int16_t v = static_cast<int16_t>(
            static_cast<uint16_t>(d[2 * i]) |
            (static_cast<uint16_t>(d[2 * i + 1]) << 8));
        sig.samples[i] = v / 32768.0;
      }
      break;
    case 24:
      for (size_t i = 0; i < n; ++i) {
        int32_t v = static_cast<int32_t>(
            static_cast<uint32_t>(d[3 * i]) |
            (static_cast<uint32_t>(d[3 * i + 1]) << 8) |
            (static_cast<uint32_t>(d[3 * i + 2]) << 16));
        if (v & 0x800000) v |= ~0xffffff;  // sign-extend
        sig.samples[i] = v / 8388608.0;
      }
      break;
  }
  return sig;
}

void write_wav(const PcgSignal& sig, const std::string& path) {
  if (sig.samples.empty()) throw InvalidParams("write_wav: empty signal");
  if (sig.sample_rate <= 0) throw InvalidParams("write_wav: bad sample rate");

  const uint32_t n = static_cast<uint32_t>(sig.samples.size());
  const uint32_t rate = static_cast<uint32_t>(std::lround(sig.sample_rate));
  const uint32_t data_bytes = n * 2;

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  append_u32le(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  append_u32le(out, 16);
  append_u16le(out, 1);  // PCM
  append_u16le(out, 1);  // mono
  append_u32le(out, rate);
  append_u32le(out, rate * 2);  // byte rate
  append_u16le(out, 2);         // block align
  append_u16le(out, 16);        // bits
  out += "data";
  append_u32le(out, data_bytes);
  for (double x : sig.samples) {
    long v = std::lround(x * 32768.0);
    v = std::clamp<long>(v, -32768, 32767);
    append_u16le(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  write_file_atomic(path, out);
}

PcgSignal lowpass_filter(const PcgSignal& sig, double cutoff_hz) {
  const double fs = sig.sample_rate;
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs / 2.0))
    throw InvalidCutoff("cutoff must lie in (0, sample_rate/2), got " +
                        std::to_string(cutoff_hz));
  if (sig.samples.empty()) throw SignalTooShort("lowpass_filter: empty signal");

  // Tap count scales with fs/cutoff so the transition band stays inside one
  // octave; the ideal cutoff sits mid-transition, above the nominal edge.
  long taps = std::lround(4.0 * fs / cutoff_hz);
  taps = std::clamp<long>(taps, 31, 2047);
  if (taps % 2 == 0) ++taps;
  const long mid = (taps - 1) / 2;
  const double fc = std::min(1.5 * cutoff_hz, 0.5 * (cutoff_hz + fs / 2.0));
  const double fcn = fc / fs;

  std::vector<double> h(static_cast<size_t>(taps));
  double sum = 0.0;
  for (long i = 0; i < taps; ++i) {
    const double m = static_cast<double>(i - mid);
    double s;
    if (m == 0.0) {
      s = 2.0 * fcn;
    } else {
      s = std::sin(2.0 * kPi * fcn * m) / (kPi * m);
    }
    const double w =
        0.54 - 0.46 * std::cos(2.0 * kPi * i / static_cast<double>(taps - 1));
    h[static_cast<size_t>(i)] = s * w;
    sum += h[static_cast<size_t>(i)];
  }
  for (double& v : h) v /= sum;  // unity DC gain

  const long n = static_cast<long>(sig.samples.size());
  PcgSignal out;
  out.sample_rate = fs;
  out.source_id = sig.source_id;
  out.samples.assign(sig.samples.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    // Centered convolution: compensates the (taps-1)/2 group delay.
    const long lo = std::max<long>(0, i + mid - (taps - 1));
    const long hi = std::min<long>(n - 1, i + mid);
    for (long j = lo; j <= hi; ++j)
      acc += sig.samples[static_cast<size_t>(j)] *
             h[static_cast<size_t>(i + mid - j)];
    out.samples[static_cast<size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> make_window(WindowKind kind, size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::kHamming && length > 1) {
    for (size_t i = 0; i < length; ++i)
      w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                    static_cast<double>(length - 1));
  }
  return w;
}

EnergyTrack frame_energy(const PcgSignal& sig, const FrameSpec& spec) {
  if (spec.hop == 0 || spec.frame_length < spec.hop)
    throw InvalidParams("frame_energy: need 0 < hop <= frame_length");
  const size_t count = spec.num_frames(sig.samples.size());
  if (count == 0)
    throw SignalTooShort("frame_energy: signal shorter than one frame");

  const std::vector<double> w = make_window(spec.window, spec.frame_length);
  EnergyTrack track;
  track.frame_spec = spec;
  track.energies.resize(count);
  for (size_t k = 0; k < count; ++k) {
    const double* x = sig.samples.data() + k * spec.hop;
    double e = 0.0;
    for (size_t i = 0; i < spec.frame_length; ++i) {
      const double v = w[i] * x[i];
      e += v * v;
    }
    track.energies[k] = e;
  }
  return track;
}

}  // namespace hsbio
