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

#ifndef HSBIO_MANIFEST_HPP_
#define HSBIO_MANIFEST_HPP_

#include <string>
#include <vector>

#include "hsbio/error.hpp"

namespace hsbio {

enum class RecordingRole { kEnroll, kVerify };

// One corpus record. Field order in the file is normative:
//   person_id recording_role relative_path
struct ManifestEntry {
  std::string person_id;
  RecordingRole role;
  std::string path;  // relative to the manifest's directory
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string base_dir;

  std::string resolve(const ManifestEntry& e) const;
};

Manifest load_manifest(const std::string& path);
void write_manifest(const Manifest& m, const std::string& path);

// Per-identity view with the one-enroll / one-or-more-verify shape enforced.
struct IdentityRecordings {
  std::string person_id;
  std::string enroll_path;                // resolved
  std::vector<std::string> verify_paths;  // resolved
};

// Throws ManifestError naming the offending identity.
std::vector<IdentityRecordings> group_by_identity(const Manifest& m);

const char* to_string(RecordingRole role);

}  // namespace hsbio

#endif  // HSBIO_MANIFEST_HPP_
