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

#include "hsbio/manifest.hpp"

#include <filesystem>
#include <map>
#include <sstream>

#include "hsbio/file_util.hpp"

namespace hsbio {

namespace fs = std::filesystem;

const char* to_string(RecordingRole role) {
  return role == RecordingRole::kEnroll ? "enroll" : "verify";
}

std::string Manifest::resolve(const ManifestEntry& e) const {
  if (base_dir.empty()) return e.path;
  return (fs::path(base_dir) / e.path).string();
}

Manifest load_manifest(const std::string& path) {
  Manifest m;
  m.base_dir = fs::path(path).parent_path().string();

  std::istringstream in(read_file(path));
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string person, role, rel;
    if (!(fields >> person)) continue;  // blank line
    if (!(fields >> role >> rel))
      throw ManifestError("manifest line " + std::to_string(lineno) +
                          ": expected 'person_id role path'");
    ManifestEntry e;
    e.person_id = person;
    if (role == "enroll") {
      e.role = RecordingRole::kEnroll;
    } else if (role == "verify") {
      e.role = RecordingRole::kVerify;
    } else {
      throw ManifestError("manifest line " + std::to_string(lineno) +
                          ": unknown role '" + role + "'");
    }
    e.path = rel;
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw ManifestError("empty manifest: " + path);
  return m;
}

void write_manifest(const Manifest& m, const std::string& path) {
  std::string out;
  for (const auto& e : m.entries) {
    out += e.person_id;
    out += ' ';
    out += to_string(e.role);
    out += ' ';
    out += e.path;
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<IdentityRecordings> group_by_identity(const Manifest& m) {
  std::map<std::string, IdentityRecordings> by_id;
  std::vector<std::string> order;
  for (const auto& e : m.entries) {
    auto it = by_id.find(e.person_id);
    if (it == by_id.end()) {
      order.push_back(e.person_id);
      it = by_id.emplace(e.person_id, IdentityRecordings{e.person_id, "", {}})
               .first;
    }
    if (e.role == RecordingRole::kEnroll) {
      if (!it->second.enroll_path.empty())
        throw ManifestError("identity '" + e.person_id +
                            "' has more than one enroll recording");
      it->second.enroll_path = m.resolve(e);
    } else {
      it->second.verify_paths.push_back(m.resolve(e));
    }
  }

  std::vector<IdentityRecordings> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    const auto& rec = by_id.at(id);
    if (rec.enroll_path.empty())
      throw ManifestError("identity '" + id + "' is missing an enroll recording");
    if (rec.verify_paths.empty())
      throw ManifestError("identity '" + id + "' is missing a verify recording");
    out.push_back(rec);
  }
  if (out.size() < 2)
    throw ManifestError("manifest must list at least 2 identities");
  return out;
}

}  // namespace hsbio
