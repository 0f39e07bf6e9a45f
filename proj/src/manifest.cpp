#include "cpageo/manifest.hpp"

#include <algorithm>
#include <fstream>

#include "cpageo/errors.hpp"
#include "cpageo/hash.hpp"

namespace cpageo {

void ExperimentManifest::add(const std::string& key, const std::string& value) {
  flags.emplace_back(key, value);
}

std::string ExperimentManifest::canonical() const {
  std::vector<std::pair<std::string, std::string>> sorted = flags;
  std::sort(sorted.begin(), sorted.end());
  std::string s = "subcommand=" + subcommand + "\n";
  for (const auto& [k, v] : sorted) s += k + "=" + v + "\n";
  s += std::string("tool_version=") + kToolVersion + "\n";
  return s;
}

std::string ExperimentManifest::hash() const { return to_hex(fnv1a64(canonical())); }

void write_manifest(const std::string& path, const ExperimentManifest& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  std::vector<std::pair<std::string, std::string>> sorted = m.flags;
  std::sort(sorted.begin(), sorted.end());
  out << "{\n";
  out << "  \"subcommand\": \"" << m.subcommand << "\",\n";
  out << "  \"tool_version\": \"" << kToolVersion << "\",\n";
  out << "  \"format_version\": " << kFormatVersion << ",\n";
  out << "  \"hash\": \"" << m.hash() << "\",\n";
  out << "  \"flags\": {";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out << (i == 0 ? "\n" : ",\n");
    out << "    \"" << sorted[i].first << "\": \"" << sorted[i].second << "\"";
  }
  out << "\n  }\n}\n";
}

}  // namespace cpageo
