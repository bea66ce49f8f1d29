// Shared helpers for the unit and acceptance suites.
#ifndef HSBIO_TESTS_TEST_UTIL_HPP_
#define HSBIO_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "hsbio/segmentation.hpp"
#include "hsbio/signal_io.hpp"

namespace hsbio::testutil {

// Unique scratch directory under the current working directory; removed on
// destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::absolute("tmp_" + tag + "_" +
                                      std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline PcgSignal sine(double freq_hz, double duration_s, double sample_rate,
                      double amplitude = 1.0) {
  PcgSignal sig;
  sig.sample_rate = sample_rate;
  const size_t n = static_cast<size_t>(duration_s * sample_rate);
  sig.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    sig.samples[i] =
        amplitude * std::sin(2.0 * 3.14159265358979323846 * freq_hz *
                             static_cast<double>(i) / sample_rate);
  return sig;
}

inline double rms(const std::vector<double>& x, size_t begin, size_t end) {
  double acc = 0.0;
  for (size_t i = begin; i < end; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(end - begin));
}

struct ToneMatchStats {
  size_t truth_count = 0;
  size_t matched = 0;         // truth tones with a detection within tolerance
  size_t label_correct = 0;   // of the matched ones
};

// Greedy one-to-one matching by start-sample distance.
inline ToneMatchStats match_tones(const ToneEndpoints& truth,
                                  const ToneEndpoints& detected,
                                  size_t tol_samples) {
  ToneMatchStats stats;
  stats.truth_count = truth.tones.size();
  std::vector<bool> used(detected.tones.size(), false);
  for (const Tone& t : truth.tones) {
    long best = -1;
    size_t best_dist = tol_samples + 1;
    for (size_t j = 0; j < detected.tones.size(); ++j) {
      if (used[j]) continue;
      const size_t a = t.start, b = detected.tones[j].start;
      const size_t dist = a > b ? a - b : b - a;
      if (dist <= tol_samples && dist < best_dist) {
        best_dist = dist;
        best = static_cast<long>(j);
      }
    }
    if (best >= 0) {
      used[static_cast<size_t>(best)] = true;
      ++stats.matched;
      if (detected.tones[static_cast<size_t>(best)].label == t.label)
        ++stats.label_correct;
    }
  }
  return stats;
}

}  // namespace hsbio::testutil

#endif  // HSBIO_TESTS_TEST_UTIL_HPP_
