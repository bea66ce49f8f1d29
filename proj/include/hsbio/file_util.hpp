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

#ifndef HSBIO_FILE_UTIL_HPP_
#define HSBIO_FILE_UTIL_HPP_

#include <string>

namespace hsbio {

// Writes via a temp file in the same directory, then renames into place.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

// Formats a double so that it round-trips exactly through text.
std::string format_double(double v);

}  // namespace hsbio

#endif  // HSBIO_FILE_UTIL_HPP_
