#include <complex>
#include <vector>

#include "doctest.h"
#include "hsbio/features.hpp"
#include "hsbio/fft.hpp"
#include "hsbio/rng.hpp"
#include "test_util.hpp"

using namespace hsbio;

namespace {

// Direct O(N*M) z-transform oracle: X_k = sum_n x[n] * exp(-i*2*pi*f_k*n/fs).
std::vector<std::complex<double>> direct_zoom(const std::vector<double>& x,
                                              double fs, double f0, double f1,
                                              size_t bins) {
  std::vector<std::complex<double>> out(bins);
  for (size_t k = 0; k < bins; ++k) {
    const double fk =
        f0 + (f1 - f0) * static_cast<double>(k) / static_cast<double>(bins - 1);
    std::complex<double> acc{0.0, 0.0};
    for (size_t n = 0; n < x.size(); ++n) {
      const double phase = -2.0 * kPi * fk * static_cast<double>(n) / fs;
      acc += x[n] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out[k] = acc;
  }
  return out;
}

double max_abs(const std::vector<std::complex<double>>& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, std::abs(c));
  return m;
}

void check_close(const std::vector<std::complex<double>>& got,
                 const std::vector<std::complex<double>>& want,
                 double rel_tol) {
  REQUIRE(got.size() == want.size());
  const double scale = std::max(max_abs(want), 1e-30);
  for (size_t i = 0; i < got.size(); ++i)
    CHECK(std::abs(got[i] - want[i]) <= rel_tol * scale);
}

}  // namespace

TEST_SUITE("fft_czt") {

TEST_CASE("fft matches the naive DFT") {
  Rng rng(5);
  for (size_t n : {8u, 64u, 256u, 1024u}) {
    std::vector<std::complex<double>> a(n);
    for (auto& v : a) v = {rng.normal(), rng.normal()};
    std::vector<std::complex<double>> want(n);
    for (size_t k = 0; k < n; ++k) {
      std::complex<double> acc{0.0, 0.0};
      for (size_t j = 0; j < n; ++j) {
        const double ph = -2.0 * kPi * static_cast<double>(k * j) /
                          static_cast<double>(n);
        acc += a[j] * std::complex<double>(std::cos(ph), std::sin(ph));
      }
      want[k] = acc;
    }
    std::vector<std::complex<double>> got = a;
    fft_inplace(got);
    double scale = 0.0;
    for (const auto& w : want) scale = std::max(scale, std::abs(w));
    for (size_t k = 0; k < n; ++k)
      CHECK(std::abs(got[k] - want[k]) <= 1e-9 * scale);
  }
}

TEST_CASE("fft round-trips through the inverse") {
  Rng rng(6);
  std::vector<std::complex<double>> a(512);
  for (auto& v : a) v = {rng.normal(), rng.normal()};
  auto b = a;
  fft_inplace(b);
  fft_inplace(b, /*inverse=*/true);
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(a[i] - b[i]) < 1e-12 * 32.0);
}

TEST_CASE("czt peaks at a pure tone inside the zoom band") {
  const PcgSignal tone = testutil::sine(150.0, 1.0, 11025.0);
  const auto spec = czt_zoom_spectrum(tone.samples, 11025.0, 100.0, 200.0, 101);
  size_t peak = 0;
  for (size_t i = 1; i < spec.size(); ++i)
    if (std::abs(spec[i]) > std::abs(spec[peak])) peak = i;
  CHECK(peak >= 49);
  CHECK(peak <= 51);

  const auto oracle =
      direct_zoom(tone.samples, 11025.0, 100.0, 200.0, 101);
  check_close(spec, oracle, 1e-6);
}

TEST_CASE("czt over the full band degenerates to the FFT") {
  Rng rng(8);
  const size_t n = 256;
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();

  const double fs = 11025.0;
  const auto zoom = czt_zoom_spectrum(x, fs, 0.0, fs / 2.0, n / 2 + 1);

  std::vector<std::complex<double>> buf(n);
  for (size_t i = 0; i < n; ++i) buf[i] = {x[i], 0.0};
  fft_inplace(buf);
  std::vector<std::complex<double>> fft_bins(buf.begin(),
                                             buf.begin() + n / 2 + 1);
  check_close(zoom, fft_bins, 1e-6);
}

TEST_CASE("czt of the zero signal is zero") {
  std::vector<double> x(500, 0.0);
  for (const auto& bin : czt_zoom_spectrum(x, 11025.0, 50.0, 400.0, 64))
    CHECK(std::abs(bin) == 0.0);
}

TEST_CASE("czt matches the direct z-transform on random segments and bands") {
  Rng rng(9);
  for (size_t n : {97u, 500u, 1323u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    const double f0 = rng.uniform(0.0, 2000.0);
    const double f1 = f0 + rng.uniform(20.0, 2500.0);
    const size_t bins = 2 + rng.index(200);
    const auto got = czt_zoom_spectrum(x, 11025.0, f0, std::min(f1, 5512.0), bins);
    const auto want = direct_zoom(x, 11025.0, f0, std::min(f1, 5512.0), bins);
    check_close(got, want, 1e-6);
  }
}

TEST_CASE("czt validates the band") {
  std::vector<double> x(100, 1.0);
  CHECK_THROWS_AS(czt_zoom_spectrum(x, 11025.0, 200.0, 100.0, 10), InvalidBand);
  CHECK_THROWS_AS(czt_zoom_spectrum(x, 11025.0, 100.0, 6000.0, 10), InvalidBand);
  CHECK_THROWS_AS(czt_zoom_spectrum(x, 11025.0, 100.0, 200.0, 1), InvalidBand);
  CHECK_THROWS_AS(czt_zoom_spectrum(x, 11025.0, -5.0, 200.0, 10), InvalidBand);
}

}  // TEST_SUITE
