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

#ifndef HSBIO_FFT_HPP_
#define HSBIO_FFT_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace hsbio {

size_t next_pow2(size_t n);

// In-place iterative radix-2 FFT. a.size() must be a power of two.
// inverse=true applies the conjugate transform and the 1/N scale.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false);

// Squared-magnitude spectrum of a real frame zero-padded to fft_size
// (power of two). Returns fft_size/2 + 1 bins.
std::vector<double> power_spectrum(std::span<const double> frame,
                                   size_t fft_size);

}  // namespace hsbio

#endif  // HSBIO_FFT_HPP_
