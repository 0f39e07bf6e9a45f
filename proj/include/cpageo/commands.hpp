#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpageo/manifest.hpp"

namespace cpageo {

// Implementations behind the CLI subcommands. Each writes its output files
// plus a manifest.json into the output directory and returns the manifest
// hash; the CLI is a thin argument-parsing layer over these.

struct TrainArgs {
  std::string dataset = "two-moons";
  std::size_t n_samples = 200;
  std::vector<std::size_t> widths = {64};
  bool use_bn = false;
  std::size_t epochs = 100;
  double learning_rate = 1e-4;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  std::string activation = "relu";  // relu | leaky:<alpha> | hardtanh
  std::vector<std::size_t> checkpoint_epochs;
  std::string out_dir;
};

std::string cmd_train(const TrainArgs& args);

struct FreezeBatchArgs {
  std::string model_path;
  std::string data_path;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  std::string out_dir;
};

std::string cmd_freeze_batch(const FreezeBatchArgs& args);

struct EnumerateArgs {
  std::string model_path;
  std::string mode = "nobn";  // nobn | eval | frozen:<batch.csv>
  double window_x = 0.0, window_y = 0.0, window_r = 1.0;
  std::vector<double> slice;  // empty, or 3D flattened [col1 col2 origin]
  std::string csv_path;
  std::string svg_path;
  std::string out_dir;
};

std::string cmd_enumerate(const EnumerateArgs& args);

struct OffsetsArgs {
  std::string model_path;
  std::string data_path;
  std::string variant = "baseline";
  std::string batch_path;  // for bn_frozen
  std::vector<int> layers;  // empty = all hidden layers
  std::vector<double> radii = {0.1, 0.25, 0.5};
  std::string out_dir;
};

std::string cmd_offsets(const OffsetsArgs& args);

struct DiagnoseArgs {
  std::string model_bn_path;
  std::string model_nobn_path;
  std::string data_path;
  std::size_t n_batches = 10;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  std::vector<double> quantiles = {0.10, 0.25, 0.50};
  std::vector<double> bias_shifts = {0.1, -0.1, 1.0, -1.0, 10.0, -10.0};
  std::string out_dir;
};

std::string cmd_diagnose(const DiagnoseArgs& args);

struct SelftestArgs {
  std::uint64_t seed = 0;
  int instances = 50;
  std::string out_dir;
};

// returns the number of formula/enumeration mismatches (0 on success)
int cmd_arrangement_selftest(const SelftestArgs& args, std::string* manifest_hash);

struct PullbackArgs {
  std::string model_path;
  std::string mode = "nobn";
  std::size_t layer = 2;
  std::size_t n_anchors = 20;
  std::uint64_t seed = 0;
  double rep_radius = 0.25;
  double domain_x = 0.0, domain_y = 0.0, domain_r = 1.0;
  std::string data_path;  // anchors sampled near these points when given
  std::string out_dir;
};

std::string cmd_pullback_check(const PullbackArgs& args);

struct DensityArgs {
  std::string model_path;
  std::string mode = "nobn";
  double center_x = 0.0, center_y = 0.0;
  std::vector<double> radii = {0.25, 0.5, 1.0};
  std::string data_path;  // optional: adds class-centered profiles
  std::string out_dir;
};

std::string cmd_density_profile(const DensityArgs& args);

struct DecisionMapArgs {
  std::string model_path;
  std::string mode = "nobn";
  double window_x = 0.0, window_y = 0.0, window_r = 1.0;
  std::string svg_path;
  std::string csv_path;
  std::string out_dir;
};

std::string cmd_decision_map(const DecisionMapArgs& args);

struct Table1Args {
  std::vector<std::string> datasets = {"gauss-quantiles", "two-moons",
                                       "random-uniform"};
  std::vector<std::size_t> widths = {32, 64, 128};
  std::size_t seeds = 10;
  std::size_t epochs = 100;
  double learning_rate = 1e-4;
  std::size_t batch_size = 64;
  std::size_t ref_batches = 3;
  std::string out_dir;
};

struct Table1Summary {
  struct Row {
    std::string dataset;
    std::size_t width;
    double mean_nobn, std_nobn, mean_bn, std_bn;
  };
  std::vector<Row> rows;
  std::string manifest_hash;
};

Table1Summary cmd_reproduce_table1(const Table1Args& args);

struct Table2Args {
  std::size_t seeds = 5;
  std::size_t epochs = 100;
  double learning_rate = 1e-4;
  std::size_t batch_size = 64;
  std::size_t ref_batches = 3;
  bool include_gauss = false;  // the [128x3] configuration is the slowest
  std::string out_dir;
};

struct Table2Summary {
  struct Row {
    std::string dataset;
    std::string arch;
    double mean_nobn, std_nobn, mean_bn, std_bn;
  };
  std::vector<Row> rows;
  std::string manifest_hash;
};

Table2Summary cmd_reproduce_table2(const Table2Args& args);

// shared helpers
struct ParsedMode {
  int kind = 0;  // 0 nobn, 1 eval, 2 frozen
  std::string batch_path;
};
ParsedMode parse_mode_string(const std::string& mode);

// centroid-anchored evaluation window conventions per dataset
void dataset_window(const std::string& dataset, double* x, double* y, double* r);

}  // namespace cpageo
