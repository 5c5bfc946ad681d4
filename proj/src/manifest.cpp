// SPDX-License-Identifier: Apache-2.0
#include "avsyn/manifest.hpp"

#include <fstream>

#include "avsyn/error.hpp"

namespace avsyn {

void write_manifest(const std::filesystem::path& path, const ManifestEntries& entries) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot create manifest: " + path.string());
  out << "# avsyn manifest\n";
  for (const auto& [key, value] : entries) {
    if (key.find('=') != std::string::npos || key.find('\n') != std::string::npos)
      throw ConfigError("manifest key contains '=' or newline: " + key);
    if (value.find('\n') != std::string::npos)
      throw ConfigError("manifest value contains newline for key: " + key);
    out << key << '=' << value << '\n';
  }
  if (!out) throw ConfigError("manifest write failed: " + path.string());
}

ManifestEntries read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest: " + path.string());
  ManifestEntries entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("malformed manifest line in " + path.string() + ": " + line);
    entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return entries;
}

const std::string& manifest_get(const ManifestEntries& entries, const std::string& key) {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw ConfigError("manifest is missing key: " + key);
}

}  // namespace avsyn
