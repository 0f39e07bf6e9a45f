#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cpageo/diagnostics.hpp"
#include "cpageo/enumeration.hpp"
#include "cpageo/network.hpp"
#include "cpageo/trainer.hpp"

namespace cpageo {

// 17 significant digits; round-trips doubles exactly.
std::string fmt17(double v);

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::string dataset;
  std::string manifest_hash;
};

void save_checkpoint(const std::string& path, const Network& net,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  Network net;
  CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// Numeric CSV, one sample per row; '#' lines are ignored.
Mat read_matrix_csv(const std::string& path);

void write_matrix_csv(const std::string& path, const Mat& m,
                      const std::string& manifest_hash);

// (x1, ..., xD, label)
void write_dataset_csv(const std::string& path, const Dataset& d,
                       const std::string& manifest_hash);
Dataset read_dataset_csv(const std::string& path);

void write_metrics_csv(const std::string& path,
                       const std::vector<EpochMetrics>& metrics,
                       const std::string& manifest_hash);

void write_offsets_csv(const std::string& path,
                       const std::map<int, std::vector<OffsetRecord>>& offsets,
                       std::uint64_t seed, std::uint64_t epoch,
                       const std::string& batch_id,
                       const std::vector<double>& radii,
                       const std::string& manifest_hash);

std::string pattern_hash(const ActivationPattern& pattern);

void write_regions_csv(const std::string& path,
                       const std::vector<RegionCell>& cells,
                       const std::vector<int>& labels,  // may be empty
                       const std::string& manifest_hash);

struct DensityCsvRow {
  std::string center_name;
  double r;
  std::size_t count;
  double density;
};

void write_density_csv(const std::string& path,
                       const std::vector<DensityCsvRow>& rows,
                       const std::string& manifest_hash);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cpageo
