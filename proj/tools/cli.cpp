// cpageo: exact local partition geometry of CPA networks with and without
// batch normalization. One binary, subcommand style; see README for the
// file formats and experiment recipes.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "cpageo/commands.hpp"
#include "cpageo/errors.hpp"
#include "cpageo/manifest.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(static_cast<std::size_t>(std::stoull(item)));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

struct WindowFlag {
  double x = 0.0, y = 0.0, r = 1.0;
};

WindowFlag parse_window(const std::string& s) {
  const auto vals = parse_double_list(s);
  if (vals.size() != 3) throw cpageo::Error("window must be x0,y0,r");
  if (!(vals[2] > 0.0)) throw cpageo::Error("window radius must be positive");
  return {vals[0], vals[1], vals[2]};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cpageo: exact local affine-region geometry of CPA networks"};
  app.set_version_flag("--version", std::string("cpageo ") + cpageo::kToolVersion +
                                        " (format v" +
                                        std::to_string(cpageo::kFormatVersion) + ")");
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = library default)");

  // train
  cpageo::TrainArgs train_args;
  std::string train_widths = "64", train_ckpts;
  auto* train = app.add_subcommand("train", "train a matched BN or non-BN MLP");
  train->add_option("--dataset", train_args.dataset,
                    "two-moons|gauss-quantiles|random-uniform");
  train->add_option("--n", train_args.n_samples, "sample count");
  train->add_option("--widths", train_widths, "hidden widths, e.g. 64,64");
  train->add_flag("--bn", train_args.use_bn, "insert BN before each activation");
  train->add_option("--epochs", train_args.epochs);
  train->add_option("--lr", train_args.learning_rate);
  train->add_option("--batch", train_args.batch_size);
  train->add_option("--seed", train_args.seed);
  train->add_option("--activation", train_args.activation,
                    "relu|leaky:<alpha>|hardtanh");
  train->add_option("--checkpoint-epochs", train_ckpts, "e.g. 0,50,100");
  train->add_option("--out", train_args.out_dir)->required();

  // freeze-batch
  cpageo::FreezeBatchArgs freeze_args;
  auto* freeze = app.add_subcommand("freeze-batch",
                                    "sample a reference batch and freeze stats");
  freeze->add_option("--model", freeze_args.model_path)->required();
  freeze->add_option("--data", freeze_args.data_path)->required();
  freeze->add_option("--batch", freeze_args.batch_size);
  freeze->add_option("--seed", freeze_args.seed);
  freeze->add_option("--out", freeze_args.out_dir)->required();

  // enumerate
  cpageo::EnumerateArgs enum_args;
  std::string enum_window = "0,0,1", enum_slice;
  auto* enumerate = app.add_subcommand("enumerate",
                                       "exact affine regions in a 2D window");
  enumerate->add_option("--model", enum_args.model_path)->required();
  enumerate->add_option("--mode", enum_args.mode, "nobn|eval|frozen:<batch.csv>");
  enumerate->add_option("--window", enum_window, "x0,y0,r")->required();
  enumerate->add_option("--slice", enum_slice,
                        "3*input_dim values: col1,col2,origin");
  enumerate->add_option("--csv", enum_args.csv_path);
  enumerate->add_option("--svg", enum_args.svg_path);
  enumerate->add_option("--out", enum_args.out_dir)->required();

  // offsets
  cpageo::OffsetsArgs off_args;
  std::string off_layers, off_radii = "0.1,0.25,0.5";
  auto* offsets = app.add_subcommand("offsets", "normalized switching offsets");
  offsets->add_option("--model", off_args.model_path)->required();
  offsets->add_option("--data", off_args.data_path)->required();
  offsets->add_option("--variant", off_args.variant,
                      "baseline|bn_frozen|bn_running|through_centroid");
  offsets->add_option("--batch", off_args.batch_path, "reference batch CSV");
  offsets->add_option("--layers", off_layers, "e.g. 1,2,3 (default: all)");
  offsets->add_option("--radii", off_radii);
  offsets->add_option("--out", off_args.out_dir)->required();

  // diagnose
  cpageo::DiagnoseArgs diag_args;
  auto* diagnose = app.add_subcommand("diagnose",
                                      "CDF, cut-rate and invariance diagnostics");
  diagnose->add_option("--model-bn", diag_args.model_bn_path)->required();
  diagnose->add_option("--model-nobn", diag_args.model_nobn_path)->required();
  diagnose->add_option("--data", diag_args.data_path)->required();
  diagnose->add_option("--batches", diag_args.n_batches);
  diagnose->add_option("--batch-size", diag_args.batch_size);
  diagnose->add_option("--seed", diag_args.seed);
  diagnose->add_option("--out", diag_args.out_dir)->required();

  // arrangement-selftest
  cpageo::SelftestArgs self_args;
  auto* selftest = app.add_subcommand("arrangement-selftest",
                                      "formula vs enumeration cross-check");
  selftest->add_option("--seed", self_args.seed);
  selftest->add_option("--instances", self_args.instances);
  selftest->add_option("--out", self_args.out_dir)->required();

  // pullback-check
  cpageo::PullbackArgs pull_args;
  std::string pull_domain = "0,0,1";
  auto* pullback = app.add_subcommand("pullback-check",
                                      "component preservation through a parent region");
  pullback->add_option("--model", pull_args.model_path)->required();
  pullback->add_option("--mode", pull_args.mode);
  pullback->add_option("--layer", pull_args.layer)->required();
  pullback->add_option("--anchors", pull_args.n_anchors);
  pullback->add_option("--seed", pull_args.seed);
  pullback->add_option("--radius", pull_args.rep_radius);
  pullback->add_option("--domain", pull_domain, "x0,y0,r");
  pullback->add_option("--data", pull_args.data_path, "anchor pool CSV");
  pullback->add_option("--out", pull_args.out_dir)->required();

  // density-profile
  cpageo::DensityArgs dens_args;
  std::string dens_center = "0,0", dens_radii = "0.25,0.5,1";
  auto* density = app.add_subcommand("density-profile",
                                     "local region density over a radius grid");
  density->add_option("--model", dens_args.model_path)->required();
  density->add_option("--mode", dens_args.mode);
  density->add_option("--center", dens_center, "x,y");
  density->add_option("--radii", dens_radii);
  density->add_option("--data", dens_args.data_path, "adds class-centered rows");
  density->add_option("--out", dens_args.out_dir)->required();

  // decision-map
  cpageo::DecisionMapArgs dec_args;
  std::string dec_window = "0,0,1";
  auto* decision = app.add_subcommand("decision-map",
                                      "class regions and boundary edges");
  decision->add_option("--model", dec_args.model_path)->required();
  decision->add_option("--mode", dec_args.mode);
  decision->add_option("--window", dec_window, "x0,y0,r")->required();
  decision->add_option("--svg", dec_args.svg_path);
  decision->add_option("--csv", dec_args.csv_path);
  decision->add_option("--out", dec_args.out_dir)->required();

  // reproduce-table1
  cpageo::Table1Args t1_args;
  std::string t1_datasets = "gauss-quantiles,two-moons,random-uniform";
  std::string t1_widths = "32,64,128";
  auto* table1 = app.add_subcommand("reproduce-table1",
                                    "single-layer local counts, BN vs non-BN");
  table1->add_option("--datasets", t1_datasets);
  table1->add_option("--widths", t1_widths);
  table1->add_option("--seeds", t1_args.seeds);
  table1->add_option("--epochs", t1_args.epochs);
  table1->add_option("--lr", t1_args.learning_rate);
  table1->add_option("--batch", t1_args.batch_size);
  table1->add_option("--ref-batches", t1_args.ref_batches);
  table1->add_option("--out", t1_args.out_dir)->required();

  // reproduce-table2
  cpageo::Table2Args t2_args;
  auto* table2 = app.add_subcommand("reproduce-table2",
                                    "deep local counts, BN vs non-BN");
  table2->add_option("--seeds", t2_args.seeds);
  table2->add_option("--epochs", t2_args.epochs);
  table2->add_option("--lr", t2_args.learning_rate);
  table2->add_option("--batch", t2_args.batch_size);
  table2->add_option("--ref-batches", t2_args.ref_batches);
  table2->add_flag("--include-gauss", t2_args.include_gauss);
  table2->add_option("--out", t2_args.out_dir)->required();

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*train) {
      train_args.widths = parse_size_list(train_widths);
      if (!train_ckpts.empty())
        train_args.checkpoint_epochs = parse_size_list(train_ckpts);
      std::printf("manifest %s\n", cpageo::cmd_train(train_args).c_str());
    } else if (*freeze) {
      std::printf("manifest %s\n", cpageo::cmd_freeze_batch(freeze_args).c_str());
    } else if (*enumerate) {
      const WindowFlag w = parse_window(enum_window);
      enum_args.window_x = w.x;
      enum_args.window_y = w.y;
      enum_args.window_r = w.r;
      if (!enum_slice.empty()) enum_args.slice = parse_double_list(enum_slice);
      std::printf("manifest %s\n", cpageo::cmd_enumerate(enum_args).c_str());
    } else if (*offsets) {
      if (!off_layers.empty()) off_args.layers = parse_int_list(off_layers);
      off_args.radii = parse_double_list(off_radii);
      std::printf("manifest %s\n", cpageo::cmd_offsets(off_args).c_str());
    } else if (*diagnose) {
      std::printf("manifest %s\n", cpageo::cmd_diagnose(diag_args).c_str());
    } else if (*selftest) {
      std::string hash;
      const int mismatches = cpageo::cmd_arrangement_selftest(self_args, &hash);
      std::printf("manifest %s mismatches %d\n", hash.c_str(), mismatches);
      if (mismatches != 0) return 1;
    } else if (*pullback) {
      const WindowFlag w = parse_window(pull_domain);
      pull_args.domain_x = w.x;
      pull_args.domain_y = w.y;
      pull_args.domain_r = w.r;
      std::printf("manifest %s\n", cpageo::cmd_pullback_check(pull_args).c_str());
    } else if (*density) {
      const auto c = parse_double_list(dens_center);
      if (c.size() != 2) throw cpageo::Error("center must be x,y");
      dens_args.center_x = c[0];
      dens_args.center_y = c[1];
      dens_args.radii = parse_double_list(dens_radii);
      std::printf("manifest %s\n", cpageo::cmd_density_profile(dens_args).c_str());
    } else if (*decision) {
      const WindowFlag w = parse_window(dec_window);
      dec_args.window_x = w.x;
      dec_args.window_y = w.y;
      dec_args.window_r = w.r;
      std::printf("manifest %s\n", cpageo::cmd_decision_map(dec_args).c_str());
    } else if (*table1) {
      t1_args.datasets.clear();
      std::stringstream ss(t1_datasets);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) t1_args.datasets.push_back(item);
      t1_args.widths = parse_size_list(t1_widths);
      const cpageo::Table1Summary s = cpageo::cmd_reproduce_table1(t1_args);
      std::printf("manifest %s\n", s.manifest_hash.c_str());
      for (const auto& row : s.rows)
        std::printf("%s width %zu: non-BN %.1f +- %.1f, BN %.1f +- %.1f %s\n",
                    row.dataset.c_str(), row.width, row.mean_nobn, row.std_nobn,
                    row.mean_bn, row.std_bn,
                    row.mean_bn > row.mean_nobn ? "[BN larger]" : "[no gap]");
    } else if (*table2) {
      const cpageo::Table2Summary s = cpageo::cmd_reproduce_table2(t2_args);
      std::printf("manifest %s\n", s.manifest_hash.c_str());
      for (const auto& row : s.rows)
        std::printf("%s [%s]: non-BN %.1f +- %.1f, BN %.1f +- %.1f, ratio %.2f\n",
                    row.dataset.c_str(), row.arch.c_str(), row.mean_nobn,
                    row.std_nobn, row.mean_bn, row.std_bn,
                    row.mean_nobn > 0 ? row.mean_bn / row.mean_nobn : 0.0);
    }
  } catch (const cpageo::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const cpageo::NonFiniteLoss& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const cpageo::CountOverflow& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const cpageo::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return 0;
}
