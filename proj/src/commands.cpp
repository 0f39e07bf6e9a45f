#include "cpageo/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cpageo/arrangement.hpp"
#include "cpageo/diagnostics.hpp"
#include "cpageo/enumeration.hpp"
#include "cpageo/io.hpp"
#include "cpageo/svg.hpp"
#include "cpageo/trainer.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cpageo {

namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

CpaActivation parse_activation(const std::string& s) {
  if (s == "relu") return CpaActivation::relu();
  if (s == "hardtanh") return CpaActivation::hard_tanh();
  if (s.rfind("leaky:", 0) == 0)
    return CpaActivation::leaky_relu(std::stod(s.substr(6)));
  throw Error("unknown activation: " + s);
}

std::string vec_to_string(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string dvec_to_string(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt17(v[i]);
  return s;
}

std::vector<int> all_hidden_layers(const Network& net) {
  std::vector<int> layers;
  for (std::size_t l = 1; l <= net.hidden_layer_count(); ++l)
    layers.push_back(static_cast<int>(l));
  return layers;
}

std::vector<std::size_t> full_pool(std::size_t n) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  return pool;
}

}  // namespace

ParsedMode parse_mode_string(const std::string& mode) {
  if (mode == "nobn") return {0, ""};
  if (mode == "eval") return {1, ""};
  if (mode.rfind("frozen:", 0) == 0) return {2, mode.substr(7)};
  throw Error("unknown mode: " + mode + " (expected nobn|eval|frozen:<batch.csv>)");
}

void dataset_window(const std::string& dataset, double* x, double* y, double* r) {
  if (dataset == "gauss-quantiles") {
    *x = 0.0;
    *y = 0.0;
    *r = 1.0;
  } else if (dataset == "two-moons") {
    *x = 0.5;
    *y = 0.5;
    *r = 1.5;
  } else if (dataset == "random-uniform") {
    *x = 2.0;
    *y = 2.0;
    *r = 2.5;
  } else {
    throw Error("unknown dataset: " + dataset);
  }
}

std::string cmd_train(const TrainArgs& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "train";
  m.add("dataset", args.dataset);
  m.add("n", std::to_string(args.n_samples));
  m.add("widths", vec_to_string(args.widths));
  m.add("bn", args.use_bn ? "true" : "false");
  m.add("epochs", std::to_string(args.epochs));
  m.add("lr", fmt17(args.learning_rate));
  m.add("batch", std::to_string(args.batch_size));
  m.add("seed", std::to_string(args.seed));
  m.add("activation", args.activation);
  m.add("checkpoint_epochs", vec_to_string(args.checkpoint_epochs));
  const std::string hash = m.hash();

  const Dataset data = generate_dataset(args.dataset, args.n_samples, args.seed);

  TrainConfig cfg;
  cfg.hidden_widths = args.widths;
  cfg.use_bn = args.use_bn;
  cfg.epochs = args.epochs;
  cfg.learning_rate = args.learning_rate;
  cfg.batch_size = args.batch_size;
  cfg.seed = args.seed;
  cfg.activation = parse_activation(args.activation);
  cfg.checkpoint_epochs = args.checkpoint_epochs;
  if (cfg.checkpoint_epochs.empty()) cfg.checkpoint_epochs = {0, args.epochs};

  const TrainResult res = train(data, cfg);

  write_dataset_csv(join_path(args.out_dir, "dataset.csv"), data, hash);
  write_metrics_csv(join_path(args.out_dir, "metrics.csv"), res.metrics, hash);
  for (const auto& [epoch, net] : res.checkpoints) {
    CheckpointMeta meta{args.seed, epoch, args.dataset, hash};
    save_checkpoint(
        join_path(args.out_dir, "checkpoint_epoch" + std::to_string(epoch) + ".json"),
        net, meta);
  }
  if (res.checkpoints.find(args.epochs) == res.checkpoints.end()) {
    CheckpointMeta meta{args.seed, args.epochs, args.dataset, hash};
    save_checkpoint(join_path(args.out_dir, "checkpoint_final.json"), res.net, meta);
  }
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return hash;
}

std::string cmd_freeze_batch(const FreezeBatchArgs& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "freeze-batch";
  m.add("model", args.model_path);
  m.add("data", args.data_path);
  m.add("batch", std::to_string(args.batch_size));
  m.add("seed", std::to_string(args.seed));
  const std::string hash = m.hash();

  const LoadedCheckpoint lc = load_checkpoint(args.model_path);
  const Dataset data = read_dataset_csv(args.data_path);
  const Mat batch =
      sample_reference_batch(data, full_pool(data.n()), args.batch_size, args.seed);
  const FrozenBatch frozen = freeze_batch(lc.net, batch);

  write_matrix_csv(join_path(args.out_dir, "refbatch.csv"), batch, hash);
  std::ostringstream stats;
  stats << "{\n\"batch_id\": \"" << frozen.reference_batch_id << "\",\n";
  stats << "\"manifest_hash\": \"" << hash << "\",\n\"per_block\": [\n";
  for (std::size_t l = 0; l < frozen.per_block.size(); ++l) {
    stats << " {\"mu\": [";
    for (std::size_t j = 0; j < frozen.per_block[l].mu.size(); ++j)
      stats << (j ? "," : "") << fmt17(frozen.per_block[l].mu[j]);
    stats << "], \"var\": [";
    for (std::size_t j = 0; j < frozen.per_block[l].var.size(); ++j)
      stats << (j ? "," : "") << fmt17(frozen.per_block[l].var[j]);
    stats << "]}" << (l + 1 < frozen.per_block.size() ? ",\n" : "\n");
  }
  stats << "]}\n";
  write_text_file(join_path(args.out_dir, "frozen_stats.json"), stats.str());
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return hash;
}

namespace {

struct ResolvedMode {
  FrozenBatch frozen;
  EvalMode mode;
  std::string batch_id = "none";
};

ResolvedMode resolve_mode(const Network& net, const std::string& mode_str) {
  ResolvedMode out;
  const ParsedMode pm = parse_mode_string(mode_str);
  if (pm.kind == 0) {
    out.mode = EvalMode::no_bn();
  } else if (pm.kind == 1) {
    out.mode = EvalMode::bn_eval();
  } else {
    const Mat batch = read_matrix_csv(pm.batch_path);
    out.frozen = freeze_batch(net, batch);
    out.batch_id = out.frozen.reference_batch_id;
    out.mode = EvalMode::bn_frozen(out.frozen);
  }
  return out;
}

}  // namespace

std::string cmd_enumerate(const EnumerateArgs& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "enumerate";
  m.add("model", args.model_path);
  m.add("mode", args.mode);
  m.add("window", fmt17(args.window_x) + "," + fmt17(args.window_y) + "," +
                       fmt17(args.window_r));
  if (!args.slice.empty()) m.add("slice", dvec_to_string(args.slice));
  const std::string hash = m.hash();

  const LoadedCheckpoint lc = load_checkpoint(args.model_path);
  const ResolvedMode rm = resolve_mode(lc.net, args.mode);
  const Window window{{args.window_x, args.window_y}, args.window_r};

  EnumerationResult res;
  if (args.slice.empty()) {
    res = enumerate_regions(lc.net, rm.mode, window);
  } else {
    const std::size_t dim = lc.net.input_dim();
    if (args.slice.size() != 3 * dim)
      throw Error("slice must have 3*input_dim values: col1, col2, origin");
    SliceMap slice;
    slice.P = Mat(dim, 2);
    slice.o = Vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      slice.P(i, 0) = args.slice[i];
      slice.P(i, 1) = args.slice[dim + i];
      slice.o[i] = args.slice[2 * dim + i];
    }
    res = enumerate_on_slice(lc.net, rm.mode, slice, window);
  }

  const std::string csv =
      args.csv_path.empty() ? join_path(args.out_dir, "regions.csv") : args.csv_path;
  write_regions_csv(csv, res.cells, {}, hash);
  if (!args.svg_path.empty()) {
    SvgOptions opt;
    write_text_file(args.svg_path,
                    render_partition_svg(res.cells, window, {}, {}, opt, hash));
  }
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return hash;
}

std::string cmd_offsets(const OffsetsArgs& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "offsets";
  m.add("model", args.model_path);
  m.add("data", args.data_path);
  m.add("variant", args.variant);
  if (!args.batch_path.empty()) m.add("batch", args.batch_path);
  m.add("radii", dvec_to_string(args.radii));
  const std::string hash = m.hash();

  const LoadedCheckpoint lc = load_checkpoint(args.model_path);
  const Dataset data = read_dataset_csv(args.data_path);
  const OffsetVariant variant = variant_from_name(args.variant);
  std::vector<int> layers = args.layers;
  if (layers.empty()) layers = all_hidden_layers(lc.net);

  FrozenBatch frozen;
  const FrozenBatch* fb = nullptr;
  std::string batch_id = "none";
  if (variant == OffsetVariant::BnFrozen) {
    if (args.batch_path.empty())
      throw Error("variant bn_frozen requires --batch <batch.csv>");
    frozen = freeze_batch(lc.net, read_matrix_csv(args.batch_path));
    fb = &frozen;
    batch_id = frozen.reference_batch_id;
  }

  const auto offsets = offsets_by_layer(lc.net, data.X, layers, variant, fb);
  for (int layer : layers) {
    const LayerArrangement arr =
        layer_arrangement(lc.net, static_cast<std::size_t>(layer), EvalMode::no_bn());
    if (arr.skipped_zero_weight > 0)
      std::fprintf(stderr,
                   "warning: layer %d has %d zero-weight neuron(s), excluded "
                   "from the arrangement\n",
                   layer, arr.skipped_zero_weight);
  }
  write_offsets_csv(join_path(args.out_dir, "offsets.csv"), offsets, lc.meta.seed,
                    lc.meta.epoch, batch_id, args.radii, hash);
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return hash;
}

std::string cmd_diagnose(const DiagnoseArgs& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "diagnose";
  m.add("model_bn", args.model_bn_path);
  m.add("model_nobn", args.model_nobn_path);
  m.add("data", args.data_path);
  m.add("batches", std::to_string(args.n_batches));
  m.add("batch_size", std::to_string(args.batch_size));
  m.add("seed", std::to_string(args.seed));
  const std::string hash = m.hash();

  const LoadedCheckpoint bn = load_checkpoint(args.model_bn_path);
  const LoadedCheckpoint nobn = load_checkpoint(args.model_nobn_path);
  const Dataset data = read_dataset_csv(args.data_path);
  const std::vector<int> layers = all_hidden_layers(bn.net);

  // baseline offsets of the matched non-BN model (per layer, batch-free)
  const auto nobn_offsets =
      offsets_by_layer(nobn.net, data.X, layers, OffsetVariant::Baseline);

  std::ofstream cdf(join_path(args.out_dir, "cdf_stats.csv"), std::ios::binary);
  cdf << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  cdf << "seed,epoch,batch_idx,batch_id,layer,d_plus,wasserstein1,area_diff";
  for (double q : args.quantiles) cdf << ",rate_bn_q" << fmt17(q) << ",rate_nobn_q"
                                      << fmt17(q);
  cdf << "\n";

  std::size_t trials = 0, dplus_positive = 0;
  std::size_t rate_trials = 0, rate_dominant = 0;

  for (std::size_t bi = 0; bi < args.n_batches; ++bi) {
    const Mat batch = sample_reference_batch(data, full_pool(data.n()),
                                             args.batch_size, args.seed + bi);
    const FrozenBatch frozen = freeze_batch(bn.net, batch);
    const auto bn_offsets =
        offsets_by_layer(bn.net, data.X, layers, OffsetVariant::BnFrozen, &frozen);
    for (int layer : layers) {
      const std::vector<double> a = offset_deltas(bn_offsets.at(layer));
      const std::vector<double> b = offset_deltas(nobn_offsets.at(layer));
      double hi = 1e-6;
      for (double v : a) hi = std::max(hi, v);
      for (double v : b) hi = std::max(hi, v);
      std::vector<double> grid(101);
      for (int g = 0; g < 101; ++g) grid[static_cast<std::size_t>(g)] = 1.5 * hi * g / 100.0;
      const EcdfSummary s = ecdf_compare(a, b, grid);
      ++trials;
      if (s.d_plus > 0.0) ++dplus_positive;
      cdf << bn.meta.seed << "," << bn.meta.epoch << "," << bi << ","
          << frozen.reference_batch_id << "," << layer << "," << fmt17(s.d_plus)
          << "," << fmt17(s.wasserstein1) << "," << fmt17(s.area_diff);
      for (double q : args.quantiles) {
        const double rate_bn = cut_rate_at_quantile(a, q, b);
        const double rate_nobn = cut_rate_at_quantile(b, q, b);
        ++rate_trials;
        if (rate_bn >= rate_nobn) ++rate_dominant;
        cdf << "," << fmt17(rate_bn) << "," << fmt17(rate_nobn);
      }
      cdf << "\n";
    }
  }

  // bias-shift invariance on the first reference batch
  const Mat batch0 =
      sample_reference_batch(data, full_pool(data.n()), args.batch_size, args.seed);
  std::ofstream bias(join_path(args.out_dir, "bias_shift.csv"), std::ios::binary);
  bias << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  bias << "shift,shifted_layer,max_baseline_change,max_bn_offset_change,"
          "max_bn_hyperplane_change\n";
  double worst_bn_change = 0.0;
  for (double c : args.bias_shifts) {
    for (const BiasShiftResult& res : bias_shift_test(bn.net, batch0, c)) {
      worst_bn_change = std::max(worst_bn_change, res.max_bn_offset_change);
      bias << fmt17(c) << "," << res.shifted_layer << ","
           << fmt17(res.max_baseline_change) << ","
           << fmt17(res.max_bn_offset_change) << ","
           << fmt17(res.max_bn_hyperplane_change) << "\n";
    }
  }

  // per-layer Pearson correlation between |b| and offsets
  std::ofstream corr(join_path(args.out_dir, "bias_correlation.csv"),
                     std::ios::binary);
  corr << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  corr << "model,layer,defined,pearson_r\n";
  for (const auto& [layer, r] : bias_offset_correlation(nobn.net, batch0,
                                                        OffsetVariant::Baseline))
    corr << "nobn," << layer << "," << (r.defined ? 1 : 0) << "," << fmt17(r.r) << "\n";
  for (const auto& [layer, r] : bias_offset_correlation(bn.net, batch0,
                                                        OffsetVariant::BnFrozen))
    corr << "bn," << layer << "," << (r.defined ? 1 : 0) << "," << fmt17(r.r) << "\n";

  // centroid-to-hyperplane distance medians
  const FrozenBatch frozen0 = freeze_batch(bn.net, batch0);
  const auto dist_bn = distance_histogram(bn.net, data.X, layers,
                                          OffsetVariant::BnFrozen, &frozen0);
  const auto dist_nobn =
      distance_histogram(nobn.net, data.X, layers, OffsetVariant::Baseline);
  std::ofstream dist(join_path(args.out_dir, "distances.csv"), std::ios::binary);
  dist << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  dist << "layer,median_bn,median_nobn\n";
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.empty() ? 0.0 : v[v.size() / 2];
  };
  for (int layer : layers)
    dist << layer << "," << fmt17(median(dist_bn.at(layer))) << ","
         << fmt17(median(dist_nobn.at(layer))) << "\n";

  std::ostringstream summary;
  summary << "diagnose summary (manifest " << hash << ")\n";
  summary << "trials (batch x layer): " << trials << "\n";
  summary << "d_plus positive: " << dplus_positive << " ("
          << fmt17(static_cast<double>(dplus_positive) /
                   static_cast<double>(std::max<std::size_t>(trials, 1)))
          << ")\n";
  summary << "cut-rate comparisons with bn >= nobn: " << rate_dominant << " / "
          << rate_trials << "\n";
  summary << "max bn offset change under bias shifts: " << fmt17(worst_bn_change)
          << "\n";
  write_text_file(join_path(args.out_dir, "summary.txt"), summary.str());
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return hash;
}

int cmd_arrangement_selftest(const SelftestArgs& args, std::string* manifest_hash) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "arrangement-selftest";
  m.add("seed", std::to_string(args.seed));
  m.add("instances", std::to_string(args.instances));
  const std::string hash = m.hash();
  if (manifest_hash != nullptr) *manifest_hash = hash;

  Rng rng(args.seed);
  const Window window{{0.0, 0.0}, 1.0};
  std::ofstream out(join_path(args.out_dir, "selftest.csv"), std::ios::binary);
  out << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  out << "instance_id,kind,m_vec,formula_count,enumerated_count,valid,eta\n";

  int mismatches = 0;
  for (int i = 0; i < args.instances; ++i) {
    const bool simple = i % 2 == 0;
    GeneratedArrangement gen;
    std::vector<unsigned> m_vec;
    BigCount formula;
    if (simple) {
      const unsigned mm = 1 + static_cast<unsigned>(rng.below(12));
      m_vec.assign(mm, 1);
      gen = generate_valid_arrangement_simple(mm, window, rng);
      formula = region_count_simple(mm, 2);
    } else {
      const std::size_t fams = 1 + rng.below(4);
      unsigned total = 0;
      for (std::size_t f = 0; f < fams; ++f) {
        m_vec.push_back(static_cast<unsigned>(rng.below(5)));
        total += m_vec.back();
      }
      if (total == 0) m_vec[0] = 1;
      gen = generate_valid_arrangement_parallel(m_vec, window, rng);
      formula = region_count_parallel(m_vec, 2);
    }
    std::vector<Hyperplane> lines;
    for (const auto& fam : gen.arrangement.families)
      lines.insert(lines.end(), fam.begin(), fam.end());
    const std::size_t enumerated = count_window_cells(lines, window);
    if (BigCount(enumerated) != formula) ++mismatches;
    std::string mv;
    for (std::size_t k = 0; k < m_vec.size(); ++k)
      mv += (k ? ";" : "") + std::to_string(m_vec[k]);
    out << i << "," << (simple ? "simple" : "parallel") << "," << mv << ","
        << formula << "," << enumerated << ","
        << (gen.report.overall_valid ? 1 : 0) << "," << fmt17(gen.report.eta)
        << "\n";
  }
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return mismatches;
}

std::string cmd_pullback_check(const PullbackArgs& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "pullback-check";
  m.add("model", args.model_path);
  m.add("mode", args.mode);
  m.add("layer", std::to_string(args.layer));
  m.add("anchors", std::to_string(args.n_anchors));
  m.add("seed", std::to_string(args.seed));
  m.add("radius", fmt17(args.rep_radius));
  const std::string hash = m.hash();

  const LoadedCheckpoint lc = load_checkpoint(args.model_path);
  const ResolvedMode rm = resolve_mode(lc.net, args.mode);
  const Window domain{{args.domain_x, args.domain_y}, args.domain_r};

  const Network prefix = prefix_network(lc.net, args.layer - 1);
  const EnumerationResult prefix_cells = enumerate_regions(prefix, rm.mode, domain);

  Rng rng(args.seed);
  Mat anchors_src(0, 0);
  if (!args.data_path.empty()) anchors_src = read_dataset_csv(args.data_path).X;

  std::ofstream out(join_path(args.out_dir, "pullback.csv"), std::ios::binary);
  out << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  out << "anchor_x,anchor_y,layer,status,rank,sigma_min,jacobian,support,"
         "used_radius,rep_components,input_components,counts_equal\n";

  std::size_t retained = 0;
  const std::size_t max_candidates = 10 * args.n_anchors;
  for (std::size_t k = 0; k < max_candidates && retained < args.n_anchors; ++k) {
    Vec anchor(2);
    if (anchors_src.rows > 0) {
      const std::size_t i = rng.below(anchors_src.rows);
      anchor[0] = anchors_src(i, 0) + 0.02 * rng.normal();
      anchor[1] = anchors_src(i, 1) + 0.02 * rng.normal();
    } else {
      anchor[0] = rng.uniform(domain.center[0] - domain.r, domain.center[0] + domain.r);
      anchor[1] = rng.uniform(domain.center[1] - domain.r, domain.center[1] + domain.r);
    }
    std::string status = "not_contained";
    for (double r = args.rep_radius; r > args.rep_radius / 16.0; r *= 0.5) {
      try {
        const PullbackReport rep =
            pullback_check(lc.net, rm.mode, args.layer, anchor, r, prefix_cells);
        out << fmt17(anchor[0]) << "," << fmt17(anchor[1]) << "," << args.layer
            << ",retained," << rep.rank << "," << fmt17(rep.sigma_min) << ","
            << fmt17(rep.jacobian) << "," << fmt17(rep.in_region_support) << ","
            << fmt17(r) << "," << rep.representation_components << ","
            << rep.input_space_components << "," << (rep.counts_equal ? 1 : 0)
            << "\n";
        ++retained;
        status = "retained";
        break;
      } catch (const WindowNotContained&) {
        continue;
      } catch (const RankDeficient&) {
        status = "rank_deficient";
        break;
      }
    }
    if (status != "retained")
      out << fmt17(anchor[0]) << "," << fmt17(anchor[1]) << "," << args.layer << ","
          << status << ",,,,,,,,\n";
  }
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return hash;
}

std::string cmd_density_profile(const DensityArgs& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "density-profile";
  m.add("model", args.model_path);
  m.add("mode", args.mode);
  m.add("center", fmt17(args.center_x) + "," + fmt17(args.center_y));
  m.add("radii", dvec_to_string(args.radii));
  if (!args.data_path.empty()) m.add("data", args.data_path);
  const std::string hash = m.hash();

  const LoadedCheckpoint lc = load_checkpoint(args.model_path);
  const ResolvedMode rm = resolve_mode(lc.net, args.mode);

  std::vector<DensityCsvRow> rows;
  const auto center_rows = density_profile(lc.net, rm.mode,
                                           {args.center_x, args.center_y},
                                           args.radii);
  for (const auto& r : center_rows)
    rows.push_back({"center", r.r, r.count, r.density});

  if (!args.data_path.empty()) {
    const Dataset data = read_dataset_csv(args.data_path);
    const auto centers = data.class_centroids();
    const auto weights = data.class_weights();
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const auto cr = density_profile(lc.net, rm.mode,
                                      {centers[c][0], centers[c][1]}, args.radii);
      for (const auto& r : cr)
        rows.push_back({"class" + std::to_string(c), r.r, r.count, r.density});
    }
    std::vector<Point2> pts;
    for (const Vec& c : centers) pts.push_back({c[0], c[1]});
    const auto agg =
        aggregate_class_density(lc.net, rm.mode, pts, weights, args.radii);
    for (const auto& r : agg)
      rows.push_back({"class_aggregate", r.r, r.count, r.density});
  }
  write_density_csv(join_path(args.out_dir, "density.csv"), rows, hash);
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return hash;
}

std::string cmd_decision_map(const DecisionMapArgs& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "decision-map";
  m.add("model", args.model_path);
  m.add("mode", args.mode);
  m.add("window", fmt17(args.window_x) + "," + fmt17(args.window_y) + "," +
                       fmt17(args.window_r));
  const std::string hash = m.hash();

  const LoadedCheckpoint lc = load_checkpoint(args.model_path);
  const ResolvedMode rm = resolve_mode(lc.net, args.mode);
  const Window window{{args.window_x, args.window_y}, args.window_r};
  const EnumerationResult res = enumerate_regions(lc.net, rm.mode, window);
  const DecisionMap dm = decision_regions(res.cells);

  std::vector<RegionCell> view;
  std::vector<int> labels;
  view.reserve(dm.cells.size());
  for (const DecisionCell& dc : dm.cells) {
    RegionCell cell;
    cell.polygon = dc.polygon;
    cell.pattern = res.cells[static_cast<std::size_t>(dc.parent_cell)].pattern;
    cell.affine = res.cells[static_cast<std::size_t>(dc.parent_cell)].affine;
    view.push_back(std::move(cell));
    labels.push_back(dc.label);
  }
  const std::string csv =
      args.csv_path.empty() ? join_path(args.out_dir, "decision_cells.csv")
                            : args.csv_path;
  write_regions_csv(csv, view, labels, hash);
  if (!args.svg_path.empty()) {
    SvgOptions opt;
    opt.color_by_label = true;
    opt.draw_boundary = true;
    write_text_file(args.svg_path, render_partition_svg(view, window, labels,
                                                        dm.boundary, opt, hash));
  }
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return hash;
}

namespace {

struct CountTask {
  std::string dataset;
  std::vector<std::size_t> widths;
  std::size_t seed = 0;
};

struct CountResult {
  std::size_t count_nobn = 0;
  std::vector<std::size_t> counts_bn;  // one per reference batch
  double mean_bn() const {
    double s = 0.0;
    for (std::size_t c : counts_bn) s += static_cast<double>(c);
    return counts_bn.empty() ? 0.0 : s / static_cast<double>(counts_bn.size());
  }
};

CountResult run_count_task(const CountTask& task, std::size_t epochs, double lr,
                           std::size_t batch_size, std::size_t ref_batches) {
  const Dataset data = generate_dataset(task.dataset, 200, task.seed);
  double wx, wy, wr;
  dataset_window(task.dataset, &wx, &wy, &wr);
  const Window window{{wx, wy}, wr};

  TrainConfig cfg;
  cfg.hidden_widths = task.widths;
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  cfg.batch_size = batch_size;
  cfg.seed = task.seed;

  EnumerationOptions opt;
  opt.parallel = false;  // tasks are already parallel

  CountResult out;
  cfg.use_bn = false;
  const TrainResult plain = train(data, cfg);
  out.count_nobn =
      enumerate_regions(plain.net, EvalMode::no_bn(), window, opt).cells.size();

  cfg.use_bn = true;
  const TrainResult bn = train(data, cfg);
  for (std::size_t b = 0; b < ref_batches; ++b) {
    const Mat batch = sample_reference_batch(data, bn.train_indices, batch_size,
                                             task.seed * 1000 + b);
    const FrozenBatch frozen = freeze_batch(bn.net, batch);
    out.counts_bn.push_back(
        enumerate_regions(bn.net, EvalMode::bn_frozen(frozen), window, opt)
            .cells.size());
  }
  return out;
}

void run_tasks_parallel(const std::vector<CountTask>& tasks,
                        std::vector<CountResult>& results, std::size_t epochs,
                        double lr, std::size_t batch_size, std::size_t ref_batches) {
  results.resize(tasks.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(tasks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i)
    results[static_cast<std::size_t>(i)] =
        run_count_task(tasks[static_cast<std::size_t>(i)], epochs, lr, batch_size,
                       ref_batches);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

Table1Summary cmd_reproduce_table1(const Table1Args& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "reproduce-table1";
  std::string ds;
  for (std::size_t i = 0; i < args.datasets.size(); ++i)
    ds += (i ? "," : "") + args.datasets[i];
  m.add("datasets", ds);
  m.add("widths", vec_to_string(args.widths));
  m.add("seeds", std::to_string(args.seeds));
  m.add("epochs", std::to_string(args.epochs));
  m.add("lr", fmt17(args.learning_rate));
  m.add("batch", std::to_string(args.batch_size));
  m.add("ref_batches", std::to_string(args.ref_batches));
  const std::string hash = m.hash();

  std::vector<CountTask> tasks;
  for (const std::string& dataset : args.datasets)
    for (std::size_t width : args.widths)
      for (std::size_t seed = 0; seed < args.seeds; ++seed)
        tasks.push_back({dataset, {width}, seed});

  std::vector<CountResult> results;
  run_tasks_parallel(tasks, results, args.epochs, args.learning_rate,
                     args.batch_size, args.ref_batches);

  std::ofstream counts(join_path(args.out_dir, "counts.csv"), std::ios::binary);
  counts << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  counts << "dataset,width,model,seed,ref_batch,count\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    counts << tasks[i].dataset << "," << tasks[i].widths[0] << ",nobn,"
           << tasks[i].seed << ",-1," << results[i].count_nobn << "\n";
    for (std::size_t b = 0; b < results[i].counts_bn.size(); ++b)
      counts << tasks[i].dataset << "," << tasks[i].widths[0] << ",bn,"
             << tasks[i].seed << "," << b << "," << results[i].counts_bn[b] << "\n";
  }

  Table1Summary summary;
  summary.manifest_hash = hash;
  std::ofstream sum(join_path(args.out_dir, "summary.csv"), std::ios::binary);
  sum << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  sum << "dataset,width,mean_nobn,std_nobn,mean_bn,std_bn,gap\n";
  for (const std::string& dataset : args.datasets) {
    for (std::size_t width : args.widths) {
      std::vector<double> nobn_counts, bn_counts;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].dataset != dataset || tasks[i].widths[0] != width) continue;
        nobn_counts.push_back(static_cast<double>(results[i].count_nobn));
        bn_counts.push_back(results[i].mean_bn());
      }
      Table1Summary::Row row{dataset, width, mean_of(nobn_counts),
                             std_of(nobn_counts), mean_of(bn_counts),
                             std_of(bn_counts)};
      sum << dataset << "," << width << "," << fmt17(row.mean_nobn) << ","
          << fmt17(row.std_nobn) << "," << fmt17(row.mean_bn) << ","
          << fmt17(row.std_bn) << "," << fmt17(row.mean_bn - row.mean_nobn) << "\n";
      summary.rows.push_back(row);
    }
  }
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return summary;
}

Table2Summary cmd_reproduce_table2(const Table2Args& args) {
  ensure_dir(args.out_dir);
  ExperimentManifest m;
  m.subcommand = "reproduce-table2";
  m.add("seeds", std::to_string(args.seeds));
  m.add("epochs", std::to_string(args.epochs));
  m.add("lr", fmt17(args.learning_rate));
  m.add("batch", std::to_string(args.batch_size));
  m.add("ref_batches", std::to_string(args.ref_batches));
  m.add("include_gauss", args.include_gauss ? "true" : "false");
  const std::string hash = m.hash();

  struct Config {
    std::string dataset;
    std::vector<std::size_t> widths;
  };
  std::vector<Config> configs = {{"two-moons", {64, 64, 64}},
                                 {"random-uniform", {32, 32, 32, 32, 32}}};
  if (args.include_gauss) configs.push_back({"gauss-quantiles", {128, 128, 128}});

  std::vector<CountTask> tasks;
  for (const Config& cfg : configs)
    for (std::size_t seed = 0; seed < args.seeds; ++seed)
      tasks.push_back({cfg.dataset, cfg.widths, seed});

  std::vector<CountResult> results;
  run_tasks_parallel(tasks, results, args.epochs, args.learning_rate,
                     args.batch_size, args.ref_batches);

  std::ofstream counts(join_path(args.out_dir, "counts.csv"), std::ios::binary);
  counts << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  counts << "dataset,arch,model,seed,ref_batch,count\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string arch = vec_to_string(tasks[i].widths);
    counts << tasks[i].dataset << "," << arch << ",nobn," << tasks[i].seed
           << ",-1," << results[i].count_nobn << "\n";
    for (std::size_t b = 0; b < results[i].counts_bn.size(); ++b)
      counts << tasks[i].dataset << "," << arch << ",bn," << tasks[i].seed << ","
             << b << "," << results[i].counts_bn[b] << "\n";
  }

  Table2Summary summary;
  summary.manifest_hash = hash;
  std::ofstream sum(join_path(args.out_dir, "summary.csv"), std::ios::binary);
  sum << "# manifest=" << hash << " tool_version=" << kToolVersion << "\n";
  sum << "dataset,arch,mean_nobn,std_nobn,mean_bn,std_bn,ratio\n";
  for (const Config& cfg : configs) {
    std::vector<double> nobn_counts, bn_counts;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].dataset != cfg.dataset || tasks[i].widths != cfg.widths) continue;
      nobn_counts.push_back(static_cast<double>(results[i].count_nobn));
      bn_counts.push_back(results[i].mean_bn());
    }
    Table2Summary::Row row{cfg.dataset, vec_to_string(cfg.widths),
                           mean_of(nobn_counts), std_of(nobn_counts),
                           mean_of(bn_counts), std_of(bn_counts)};
    sum << row.dataset << "," << row.arch << "," << fmt17(row.mean_nobn) << ","
        << fmt17(row.std_nobn) << "," << fmt17(row.mean_bn) << ","
        << fmt17(row.std_bn) << ","
        << fmt17(row.mean_nobn > 0 ? row.mean_bn / row.mean_nobn : 0.0) << "\n";
    summary.rows.push_back(row);
  }
  write_manifest(join_path(args.out_dir, "manifest.json"), m);
  return summary;
}

}  // namespace cpageo
