#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cpageo {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

// Record of one CLI invocation; identical manifests must lead to
// byte-identical outputs, and every output file embeds the manifest hash.
struct ExperimentManifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> flags;

  void add(const std::string& key, const std::string& value);
  std::string canonical() const;  // sorted key=value serialization
  std::string hash() const;
};

void write_manifest(const std::string& path, const ExperimentManifest& m);

}  // namespace cpageo
