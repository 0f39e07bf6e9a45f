// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier end-to-end checks than the unit tests; expected
// wall time is a few minutes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <vector>

#include "cpageo/arrangement.hpp"
#include "cpageo/commands.hpp"
#include "cpageo/diagnostics.hpp"
#include "cpageo/enumeration.hpp"
#include "cpageo/io.hpp"
#include "cpageo/trainer.hpp"
#include "test_util.hpp"

using namespace cpageo;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------- criterion 1

void criterion1_formula_oracle() {
  const double t0 = now_seconds();
  const Window window{{0.0, 0.0}, 1.0};
  Rng rng(20240801);
  int instances = 0, mismatches = 0;

  for (unsigned m = 1; m <= 12; ++m) {
    for (int k = 0; k < 10; ++k, ++instances) {
      const auto gen = generate_valid_arrangement_simple(m, window, rng);
      std::vector<Hyperplane> lines;
      for (const auto& fam : gen.arrangement.families)
        lines.insert(lines.end(), fam.begin(), fam.end());
      if (BigCount(count_window_cells(lines, window)) != region_count_simple(m, 2))
        ++mismatches;
    }
  }
  for (int k = 0; k < 100; ++k, ++instances) {
    std::vector<unsigned> m_vec;
    unsigned total = 0;
    const std::size_t fams = 1 + rng.below(4);
    for (std::size_t f = 0; f < fams; ++f) {
      m_vec.push_back(static_cast<unsigned>(rng.below(5)));
      total += m_vec.back();
    }
    if (total == 0) m_vec[0] = 1;
    const auto gen = generate_valid_arrangement_parallel(m_vec, window, rng);
    std::vector<Hyperplane> lines;
    for (const auto& fam : gen.arrangement.families)
      lines.insert(lines.end(), fam.begin(), fam.end());
    if (BigCount(count_window_cells(lines, window)) !=
        region_count_parallel(m_vec, 2))
      ++mismatches;
  }
  const double dt = now_seconds() - t0;
  report(1, instances >= 200 && mismatches == 0 && dt < 60.0,
         "formula/enumeration oracle over generated valid arrangements",
         std::to_string(instances) + " instances, " + std::to_string(mismatches) +
             " mismatches, " + fmt17(dt) + " s");
}

// ------------------------------------------------------- trained checkpoints

struct TrainedPair {
  std::string dataset;
  std::vector<std::size_t> widths;
  std::uint64_t seed = 0;
  Dataset data;
  TrainResult bn;
  TrainResult nobn;
};

TrainedPair train_pair(const std::string& dataset,
                       const std::vector<std::size_t>& widths,
                       std::uint64_t seed, std::size_t epochs) {
  const Dataset data = generate_dataset(dataset, 200, seed);
  TrainConfig cfg;
  cfg.hidden_widths = widths;
  cfg.epochs = epochs;
  cfg.learning_rate = 1e-4;
  cfg.batch_size = 64;
  cfg.seed = seed;
  cfg.use_bn = false;
  TrainResult nobn = train(data, cfg);
  cfg.use_bn = true;
  TrainResult bn = train(data, cfg);
  return {dataset, widths, seed, data, std::move(bn), std::move(nobn)};
}

std::vector<TrainedPair> g_table1;  // single hidden layer
std::vector<TrainedPair> g_table2;  // deep

void train_all_checkpoints() {
  const std::vector<std::string> datasets{"gauss-quantiles", "two-moons",
                                          "random-uniform"};
  const std::vector<std::size_t> widths{32, 64, 128};
  struct Job {
    std::string dataset;
    std::vector<std::size_t> widths;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& d : datasets)
    for (std::size_t w : widths)
      for (std::uint64_t s = 0; s < 10; ++s) jobs.push_back({d, {w}, s});
  const std::size_t t1_count = jobs.size();
  for (std::uint64_t s = 0; s < 5; ++s) jobs.push_back({"two-moons", {64, 64, 64}, s});
  for (std::uint64_t s = 0; s < 5; ++s)
    jobs.push_back({"random-uniform", {32, 32, 32, 32, 32}, s});

  std::vector<std::optional<TrainedPair>> all(jobs.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(jobs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Job& sp = jobs[static_cast<std::size_t>(i)];
    all[static_cast<std::size_t>(i)] = train_pair(sp.dataset, sp.widths, sp.seed, 100);
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    (i < t1_count ? g_table1 : g_table2).push_back(std::move(*all[i]));
}

Mat reference_batch_for(const TrainedPair& pair, std::uint64_t which) {
  return sample_reference_batch(pair.data, pair.bn.train_indices, 64,
                                pair.seed * 1000 + which);
}

// ---------------------------------------------------------------- criterion 2

void criterion2_exact_geometry() {
  // (a) through-centroid residual across every trained BN checkpoint
  double worst_residual = 0.0;
  std::size_t checked_neurons = 0;
  auto check_residual = [&](const TrainedPair& pair) {
    const Mat batch = reference_batch_for(pair, 0);
    const FrozenBatch fb = freeze_batch(pair.bn.net, batch);
    const EvalMode mode = EvalMode::bn_frozen(fb);
    // layer centroids of the batch under the frozen map itself
    std::vector<Vec> centroids(pair.bn.net.hidden_layer_count());
    for (std::size_t l = 0; l < centroids.size(); ++l)
      centroids[l] = Vec(l == 0 ? pair.bn.net.input_dim()
                                : pair.bn.net.hidden_width(l - 1),
                         0.0);
    Vec x(batch.cols);
    for (std::size_t i = 0; i < batch.rows; ++i) {
      for (std::size_t j = 0; j < batch.cols; ++j) x[j] = batch(i, j);
      const ForwardTrace tr = forward_trace(pair.bn.net, x, mode);
      for (std::size_t l = 0; l < centroids.size(); ++l) {
        const Vec& h = l == 0 ? x : tr.layers[l - 1].h;
        for (std::size_t j = 0; j < h.size(); ++j) centroids[l][j] += h[j];
      }
    }
    for (Vec& c : centroids)
      for (double& v : c) v /= static_cast<double>(batch.rows);

    for (std::size_t l = 0; l < pair.bn.net.hidden_layer_count(); ++l) {
      const HiddenBlock& blk = pair.bn.net.block(l);
      for (std::size_t j = 0; j < blk.linear.out_dim(); ++j) {
        Vec w(blk.linear.W.cols);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = blk.linear.W(j, k);
        if (norm_l2(w) == 0.0) continue;
        const double wu = dot(w, centroids[l]);
        const double c_from_stats = fb.per_block[l].mu[j] - blk.linear.b[j];
        const double residual = std::fabs(c_from_stats - wu) / (1.0 + std::fabs(wu));
        worst_residual = std::max(worst_residual, residual);
        ++checked_neurons;
      }
    }
  };
  for (const TrainedPair& pair : g_table1) check_residual(pair);
  for (const TrainedPair& pair : g_table2) check_residual(pair);
  report(2, worst_residual <= 1e-10,
         "(a) through-centroid residual over all BN checkpoints",
         std::to_string(checked_neurons) + " neurons, worst " +
             fmt17(worst_residual));

  // (b) bias-shift invariance of frozen hyperplanes and offsets
  double worst_bn_change = 0.0;
  std::size_t shift_checks = 0;
  auto check_shift = [&](const TrainedPair& pair) {
    const Mat batch = reference_batch_for(pair, 1);
    for (double c : {0.1, -0.1, 1.0, -1.0, 10.0, -10.0}) {
      for (const BiasShiftResult& res : bias_shift_test(pair.bn.net, batch, c)) {
        worst_bn_change = std::max({worst_bn_change, res.max_bn_offset_change,
                                    res.max_bn_hyperplane_change});
        ++shift_checks;
      }
    }
  };
  for (std::size_t i = 0; i < g_table1.size(); i += 7) check_shift(g_table1[i]);
  for (const TrainedPair& pair : g_table2) check_shift(pair);
  report(2, worst_bn_change <= 1e-12,
         "(b) bias-shift invariance of bn_frozen geometry",
         std::to_string(shift_checks) + " layer shifts, worst change " +
             fmt17(worst_bn_change));

  // (c) l_inf criterion vs the box-clipping oracle
  Rng rng(777);
  int tested = 0, agree = 0;
  while (tested < 10000) {
    Vec w{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    if (norm_l2(w) < 1e-9) continue;
    const Vec center{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const double r = rng.uniform(0.05, 2.5);
    const double c = dot(w, center) + rng.uniform(-1.6, 1.6) * r * norm_l1(w);
    if (std::fabs(std::fabs(c - dot(w, center)) - r * norm_l1(w)) <= 1e-12) continue;
    ++tested;
    const bool criterion = window_cut({w, c}, {center, r}, CutBoundary::Open);
    if (criterion == testutil::line_cuts_open_box_oracle(w, c, center, r)) ++agree;
  }
  report(2, agree == tested, "(c) l_inf window-cut criterion vs clipping oracle",
         std::to_string(agree) + "/" + std::to_string(tested) + " agree");

  // (d) standardized batch has mean beta and variance g^2 v/(v+eps)
  double worst_mean = 0.0, worst_var = 0.0;
  for (std::size_t i = 0; i < g_table1.size(); i += 13) {
    const TrainedPair& pair = g_table1[i];
    const Mat batch = reference_batch_for(pair, 2);
    const FrozenBatch fb = freeze_batch(pair.bn.net, batch);
    const EvalMode mode = EvalMode::bn_frozen(fb);
    const Network& net = pair.bn.net;
    for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
      const HiddenBlock& blk = net.block(l);
      Mat zhat(batch.rows, blk.linear.out_dim());
      Vec x(batch.cols);
      for (std::size_t bi = 0; bi < batch.rows; ++bi) {
        for (std::size_t j = 0; j < batch.cols; ++j) x[j] = batch(bi, j);
        const ForwardTrace tr = forward_trace(net, x, mode);
        for (std::size_t j = 0; j < blk.linear.out_dim(); ++j)
          zhat(bi, j) = tr.layers[l].z_hat[j];
      }
      const BatchStats post = batch_stats(zhat);
      for (std::size_t j = 0; j < blk.linear.out_dim(); ++j) {
        const double v = fb.per_block[l].var[j];
        const double expect_var = blk.bn.gamma[j] * blk.bn.gamma[j] * v /
                                  (v + blk.bn.eps);
        worst_mean = std::max(worst_mean, std::fabs(post.mu[j] - blk.bn.beta[j]));
        worst_var = std::max(worst_var, std::fabs(post.var[j] - expect_var));
      }
    }
  }
  report(2, worst_mean <= 1e-10 && worst_var <= 1e-10,
         "(d) standardized batch mean/variance identity",
         "worst mean dev " + fmt17(worst_mean) + ", worst var dev " +
             fmt17(worst_var));
}

// ---------------------------------------------------------------- criterion 3

void criterion3_gradients() {
  const double t0 = now_seconds();
  Rng rng(4040);
  bool fd_ok = true;
  double worst_rel = 0.0;
  double worst_bias_grad = 0.0;
  for (const bool bn : {false, true}) {
    Network net = testutil::random_net(2, {8, 8}, 3, bn, bn ? 91 : 92);
    const TrainMode mode = bn ? TrainMode::BnTrain : TrainMode::NoBn;
    const Mat x = testutil::random_mat(rng, 32, 2, -1.5, 1.5);
    std::vector<int> y(32);
    for (auto& yi : y) yi = static_cast<int>(rng.below(3));
    const LossGrad lg = loss_and_grad(net, x, y, mode);

    std::vector<std::pair<double*, double>> coords;
    for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
      HiddenBlock& blk = net.block(l);
      for (std::size_t i = 0; i < blk.linear.W.data.size(); ++i)
        coords.push_back({&blk.linear.W.data[i], lg.grad.dW[l].data[i]});
      if (!bn)
        for (std::size_t i = 0; i < blk.linear.b.size(); ++i)
          coords.push_back({&blk.linear.b[i], lg.grad.db[l][i]});
      if (blk.bn.present) {
        for (std::size_t i = 0; i < blk.bn.gamma.size(); ++i)
          coords.push_back({&blk.bn.gamma[i], lg.grad.dgamma[l][i]});
        for (std::size_t i = 0; i < blk.bn.beta.size(); ++i)
          coords.push_back({&blk.bn.beta[i], lg.grad.dbeta[l][i]});
      }
      if (bn)
        for (double g : lg.grad.db[l])
          worst_bias_grad = std::max(worst_bias_grad, std::fabs(g));
    }
    for (std::size_t i = 0; i < net.output_layer().W.data.size(); ++i)
      coords.push_back({&net.output_layer().W.data[i], lg.grad.dW_out.data[i]});

    const double h = 1e-5;
    int checked = 0;
    while (checked < 50) {
      auto& [p, g] = coords[rng.below(coords.size())];
      const double saved = *p;
      *p = saved + h;
      const double up = compute_loss(net, x, y, mode);
      *p = saved - h;
      const double down = compute_loss(net, x, y, mode);
      *p = saved;
      const double fd = (up - down) / (2.0 * h);
      if (std::fabs(fd) < 1e-10 && std::fabs(g) < 1e-10) continue;
      const double rel =
          std::fabs(fd - g) / std::max({std::fabs(fd), std::fabs(g), 1e-8});
      worst_rel = std::max(worst_rel, rel);
      if (rel >= 1e-4) fd_ok = false;
      ++checked;
    }
  }
  const double dt = now_seconds() - t0;
  report(3, fd_ok && worst_bias_grad <= 1e-12,
         "gradient verification (finite differences + BN bias nullity)",
         "worst rel err " + fmt17(worst_rel) + ", worst BN bias grad " +
             fmt17(worst_bias_grad) + ", " + fmt17(dt) + " s");
}

// ---------------------------------------------------------------- criterion 4

struct CountsRow {
  std::string dataset;
  std::size_t width;
  double mean_nobn = 0.0, mean_bn = 0.0;
};

std::vector<CountsRow> g_table1_rows;

void criterion4_table1() {
  const double t0 = now_seconds();
  struct PerPair {
    double nobn = 0.0, bn = 0.0;
  };
  std::vector<PerPair> per_pair(g_table1.size());
  EnumerationOptions opt;
  opt.parallel = false;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g_table1.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const TrainedPair& pair = g_table1[static_cast<std::size_t>(i)];
    double wx, wy, wr;
    dataset_window(pair.dataset, &wx, &wy, &wr);
    const Window window{{wx, wy}, wr};
    per_pair[static_cast<std::size_t>(i)].nobn = static_cast<double>(
        enumerate_regions(pair.nobn.net, EvalMode::no_bn(), window, opt)
            .cells.size());
    double bn_total = 0.0;
    for (std::uint64_t b = 0; b < 3; ++b) {
      const Mat batch = reference_batch_for(pair, b);
      const FrozenBatch fb = freeze_batch(pair.bn.net, batch);
      bn_total += static_cast<double>(
          enumerate_regions(pair.bn.net, EvalMode::bn_frozen(fb), window, opt)
              .cells.size());
    }
    per_pair[static_cast<std::size_t>(i)].bn = bn_total / 3.0;
  }

  const std::vector<std::string> datasets{"gauss-quantiles", "two-moons",
                                          "random-uniform"};
  const std::vector<std::size_t> widths{32, 64, 128};
  bool all_directional = true;
  int growth_datasets = 0;
  bool magnitude_ok = true;
  for (const std::string& dataset : datasets) {
    std::vector<double> gaps;
    for (std::size_t width : widths) {
      double sum_nobn = 0.0, sum_bn = 0.0;
      int cnt = 0;
      for (std::size_t i = 0; i < g_table1.size(); ++i) {
        if (g_table1[i].dataset != dataset || g_table1[i].widths[0] != width)
          continue;
        sum_nobn += per_pair[i].nobn;
        sum_bn += per_pair[i].bn;
        ++cnt;
      }
      CountsRow row{dataset, width, sum_nobn / cnt, sum_bn / cnt};
      g_table1_rows.push_back(row);
      if (!(row.mean_bn > row.mean_nobn)) all_directional = false;
      gaps.push_back(row.mean_bn - row.mean_nobn);
      if (width == 64 && (row.mean_nobn < 100.0 || row.mean_nobn > 5000.0))
        magnitude_ok = false;
      std::printf("    table1 %s h=%zu: non-BN %.1f, BN %.1f\n", dataset.c_str(),
                  width, row.mean_nobn, row.mean_bn);
    }
    if (gaps[2] > gaps[1] && gaps[1] > gaps[0]) ++growth_datasets;
  }
  const double dt = now_seconds() - t0;
  report(4,
         all_directional && growth_datasets >= 2 && magnitude_ok && dt < 1800.0,
         "single-layer local counts: BN above non-BN, gap grows with width",
         "directional " + std::string(all_directional ? "yes" : "NO") +
             ", growth on " + std::to_string(growth_datasets) + "/3 datasets, " +
             fmt17(dt) + " s");
}

// ---------------------------------------------------------------- criterion 5

void criterion5_table2() {
  const double t0 = now_seconds();
  struct PerPair {
    double nobn = 0.0, bn = 0.0;
  };
  std::vector<PerPair> per_pair(g_table2.size());
  EnumerationOptions opt;
  opt.parallel = false;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g_table2.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const TrainedPair& pair = g_table2[static_cast<std::size_t>(i)];
    double wx, wy, wr;
    dataset_window(pair.dataset, &wx, &wy, &wr);
    const Window window{{wx, wy}, wr};
    per_pair[static_cast<std::size_t>(i)].nobn = static_cast<double>(
        enumerate_regions(pair.nobn.net, EvalMode::no_bn(), window, opt)
            .cells.size());
    double bn_total = 0.0;
    for (std::uint64_t b = 0; b < 3; ++b) {
      const Mat batch = reference_batch_for(pair, b);
      const FrozenBatch fb = freeze_batch(pair.bn.net, batch);
      bn_total += static_cast<double>(
          enumerate_regions(pair.bn.net, EvalMode::bn_frozen(fb), window, opt)
              .cells.size());
    }
    per_pair[static_cast<std::size_t>(i)].bn = bn_total / 3.0;
  }

  bool all_ok = true;
  std::string detail;
  for (const std::string& dataset : {"two-moons", "random-uniform"}) {
    double sum_nobn = 0.0, sum_bn = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < g_table2.size(); ++i) {
      if (g_table2[i].dataset != dataset) continue;
      sum_nobn += per_pair[i].nobn;
      sum_bn += per_pair[i].bn;
      ++cnt;
    }
    const double ratio = sum_bn / sum_nobn;
    if (!(sum_bn > sum_nobn && ratio > 2.0)) all_ok = false;
    detail += dataset + " ratio " + fmt17(ratio) + "; ";
    std::printf("    table2 %s: non-BN %.1f, BN %.1f, ratio %.2f\n",
                dataset.c_str(), sum_nobn / cnt, sum_bn / cnt, ratio);
  }
  const double dt = now_seconds() - t0;
  report(5, all_ok && dt < 3600.0,
         "deep local counts: BN above non-BN with ratio > 2",
         detail + fmt17(dt) + " s");
}

// ---------------------------------------------------------------- criterion 6

void criterion6_pullback() {
  const double t0 = now_seconds();
  std::size_t total_retained = 0, equal_count = 0, rank2_count = 0;
  double worst_drop_rank = 0.0;
  bool every_checkpoint_has_20 = true;

  std::vector<const TrainedPair*> checkpoints;
  for (const TrainedPair& pair : g_table2)
    if (pair.seed < 2) checkpoints.push_back(&pair);

  for (const TrainedPair* pair : checkpoints) {
    double wx, wy, wr;
    dataset_window(pair->dataset, &wx, &wy, &wr);
    const Window domain{{wx, wy}, wr};
    for (const bool bn : {false, true}) {
      const Network& net = bn ? pair->bn.net : pair->nobn.net;
      const Mat batch = reference_batch_for(*pair, 3);
      const FrozenBatch fb = bn ? freeze_batch(net, batch) : FrozenBatch{};
      const EvalMode mode = bn ? EvalMode::bn_frozen(fb) : EvalMode::no_bn();
      const std::size_t layer = 3;  // depth-2 prefix map

      const Network prefix = prefix_network(net, layer - 1);
      const EnumerationResult prefix_cells = enumerate_regions(prefix, mode, domain);

      Rng rng(pair->seed * 17 + (bn ? 1 : 0));
      std::size_t retained = 0;
      for (int cand = 0; cand < 400 && retained < 20; ++cand) {
        const std::size_t idx = rng.below(pair->data.n());
        const Vec anchor{pair->data.X(idx, 0) + 0.02 * rng.normal(),
                         pair->data.X(idx, 1) + 0.02 * rng.normal()};
        for (double r : {0.5, 0.25, 0.1, 0.05, 0.02}) {
          try {
            const PullbackReport rep =
                pullback_check(net, mode, layer, anchor, r, prefix_cells);
            ++retained;
            ++total_retained;
            if (rep.counts_equal) ++equal_count;
            if (rep.rank == 2) ++rank2_count;
            break;
          } catch (const WindowNotContained&) {
          } catch (const RankDeficient&) {
            break;
          }
        }
      }
      if (retained < 20) every_checkpoint_has_20 = false;

      // drop-rank ratio over sampled neighborhoods of the data
      Mat samples(100, 2);
      for (std::size_t i = 0; i < 100; ++i) {
        const std::size_t idx = rng.below(pair->data.n());
        samples(i, 0) = pair->data.X(idx, 0) + 0.05 * rng.normal();
        samples(i, 1) = pair->data.X(idx, 1) + 0.05 * rng.normal();
      }
      const ConditioningSummary cond =
          parent_region_conditioning(net, mode, samples, layer - 1);
      worst_drop_rank = std::max(worst_drop_rank, cond.drop_rank_ratio);
    }
  }
  const double dt = now_seconds() - t0;
  report(6,
         every_checkpoint_has_20 && equal_count == total_retained &&
             rank2_count == total_retained && worst_drop_rank == 0.0,
         "pullback component counts agree inside parent regions",
         std::to_string(equal_count) + "/" + std::to_string(total_retained) +
             " equal, drop-rank " + fmt17(worst_drop_rank) + ", " + fmt17(dt) +
             " s");
}

// ---------------------------------------------------------------- criterion 7

void criterion7_offset_cdf() {
  const double t0 = now_seconds();
  std::size_t dplus_trials = 0, dplus_positive = 0;
  std::size_t rate_trials = 0, rate_dominant = 0;

  for (const TrainedPair& pair : g_table2) {
    std::vector<int> layers;
    for (std::size_t l = 1; l <= pair.bn.net.hidden_layer_count(); ++l)
      layers.push_back(static_cast<int>(l));
    const auto nobn_offsets = offsets_by_layer(pair.nobn.net, pair.data.X, layers,
                                               OffsetVariant::Baseline);
    for (std::uint64_t b = 0; b < 3; ++b) {
      const Mat batch = reference_batch_for(pair, 10 + b);
      const FrozenBatch fb = freeze_batch(pair.bn.net, batch);
      const auto bn_offsets = offsets_by_layer(pair.bn.net, pair.data.X, layers,
                                               OffsetVariant::BnFrozen, &fb);
      for (int layer : layers) {
        const std::vector<double> a = offset_deltas(bn_offsets.at(layer));
        const std::vector<double> bvals = offset_deltas(nobn_offsets.at(layer));
        double hi = 1e-9;
        for (double v : a) hi = std::max(hi, v);
        for (double v : bvals) hi = std::max(hi, v);
        std::vector<double> grid(64);
        for (int g = 0; g < 64; ++g)
          grid[static_cast<std::size_t>(g)] = 1.5 * hi * g / 63.0;
        const EcdfSummary s = ecdf_compare(a, bvals, grid);
        ++dplus_trials;
        if (s.d_plus > 0.0) ++dplus_positive;
        for (double q : {0.10, 0.25, 0.50}) {
          const double rate_bn = cut_rate_at_quantile(a, q, bvals);
          const double rate_nobn = cut_rate_at_quantile(bvals, q, bvals);
          ++rate_trials;
          if (rate_bn >= rate_nobn) ++rate_dominant;
        }
      }
    }
  }
  const double frac_dplus =
      static_cast<double>(dplus_positive) / static_cast<double>(dplus_trials);
  const double frac_rate =
      static_cast<double>(rate_dominant) / static_cast<double>(rate_trials);
  const double dt = now_seconds() - t0;
  report(7, frac_dplus >= 0.8 && frac_rate >= 0.8,
         "offsets: BN ECDF dominance and cut-rate dominance",
         "D+ positive " + fmt17(frac_dplus) + ", rate dominance " +
             fmt17(frac_rate) + ", " + fmt17(dt) + " s");
}

// ---------------------------------------------------------------- criterion 8

void criterion8_self_consistency() {
  const double t0 = now_seconds();
  bool ok = true;
  std::string detail;
  std::size_t checked = 0;

  auto check_enumeration = [&](const Network& net, const EvalMode& mode,
                               const Window& window) {
    const EnumerationResult res = enumerate_regions(net, mode, window);
    ++checked;
    double area = 0.0;
    for (const RegionCell& cell : res.cells) area += polygon_area(cell.polygon);
    if (std::fabs(area - res.window_area) > 1e-6 * res.window_area) {
      ok = false;
      detail += "area conservation failed; ";
    }
    for (std::size_t i = 0; i < res.cells.size();
         i += std::max<std::size_t>(res.cells.size() / 40, 1)) {
      const RegionCell& cell = res.cells[i];
      for (const Point2& t : interior_sample_points(cell.polygon, 5)) {
        ActivationPattern p;
        try {
          p = activation_pattern(net, {t.x, t.y}, mode);
        } catch (const BreakpointHit&) {
          continue;
        }
        if (p != cell.pattern) {
          ok = false;
          detail += "pattern purity failed; ";
        }
        const Vec direct = forward(net, {t.x, t.y}, mode);
        for (std::size_t j = 0; j < direct.size(); ++j) {
          const double via = cell.affine.A(j, 0) * t.x + cell.affine.A(j, 1) * t.y +
                             cell.affine.b[j];
          if (std::fabs(via - direct[j]) > 1e-8 * (1.0 + std::fabs(direct[j]))) {
            ok = false;
            detail += "affine consistency failed; ";
          }
        }
      }
    }
    // thread-count independence: serial pass must be byte-identical
    EnumerationOptions serial;
    serial.parallel = false;
    const EnumerationResult ser = enumerate_regions(net, mode, window, serial);
    if (ser.cells.size() != res.cells.size()) {
      ok = false;
      detail += "thread dependence (count); ";
      return;
    }
    for (std::size_t i = 0; i < res.cells.size(); ++i) {
      if (res.cells[i].pattern != ser.cells[i].pattern ||
          res.cells[i].polygon.size() != ser.cells[i].polygon.size()) {
        ok = false;
        detail += "thread dependence (cells); ";
        return;
      }
      for (std::size_t v = 0; v < res.cells[i].polygon.size(); ++v)
        if (res.cells[i].polygon[v].x != ser.cells[i].polygon[v].x ||
            res.cells[i].polygon[v].y != ser.cells[i].polygon[v].y) {
          ok = false;
          detail += "thread dependence (vertices); ";
          return;
        }
    }
  };

  for (const std::string& dataset : {"gauss-quantiles", "two-moons",
                                     "random-uniform"}) {
    double wx, wy, wr;
    dataset_window(dataset, &wx, &wy, &wr);
    const Window window{{wx, wy}, wr};
    for (const TrainedPair& pair : g_table1) {
      if (pair.dataset != dataset || pair.seed != 0 || pair.widths[0] != 64)
        continue;
      check_enumeration(pair.nobn.net, EvalMode::no_bn(), window);
      const Mat batch = reference_batch_for(pair, 0);
      const FrozenBatch fb = freeze_batch(pair.bn.net, batch);
      check_enumeration(pair.bn.net, EvalMode::bn_frozen(fb), window);
    }
  }
  {
    const TrainedPair& pair = g_table2.front();
    double wx, wy, wr;
    dataset_window(pair.dataset, &wx, &wy, &wr);
    check_enumeration(pair.nobn.net, EvalMode::no_bn(), {{wx, wy}, wr});
  }
  const double dt = now_seconds() - t0;
  report(8, ok, "enumeration self-consistency and thread independence",
         std::to_string(checked) + " enumerations checked; " +
             (detail.empty() ? "clean; " : detail) + fmt17(dt) + " s");
}

// ---------------------------------------------------------------- criterion 9

namespace fs = std::filesystem;

bool dirs_byte_identical(const std::string& a, const std::string& b,
                         std::string* first_diff) {
  std::vector<std::string> rel;
  for (const auto& entry : fs::recursive_directory_iterator(a))
    if (entry.is_regular_file())
      rel.push_back(fs::relative(entry.path(), a).string());
  std::sort(rel.begin(), rel.end());
  for (const std::string& r : rel) {
    const std::string pa = (fs::path(a) / r).string();
    const std::string pb = (fs::path(b) / r).string();
    if (!fs::exists(pb)) {
      *first_diff = r + " missing";
      return false;
    }
    if (read_text_file(pa) != read_text_file(pb)) {
      *first_diff = r;
      return false;
    }
  }
  return true;
}

// Runs the pipeline with relative paths from inside `dir`, so the two runs
// see literally identical flag sets and manifests.
void run_pipeline(const std::string& dir) {
  fs::create_directories(dir);
  const fs::path saved_cwd = fs::current_path();
  fs::current_path(dir);

  TrainArgs targs;
  targs.dataset = "two-moons";
  targs.widths = {16, 16};
  targs.use_bn = true;
  targs.epochs = 10;
  targs.learning_rate = 1e-3;
  targs.batch_size = 32;
  targs.seed = 3;
  targs.checkpoint_epochs = {0, 10};
  targs.out_dir = "train";
  cmd_train(targs);

  FreezeBatchArgs fargs;
  fargs.model_path = "train/checkpoint_epoch10.json";
  fargs.data_path = "train/dataset.csv";
  fargs.batch_size = 32;
  fargs.seed = 4;
  fargs.out_dir = "freeze";
  cmd_freeze_batch(fargs);

  EnumerateArgs eargs;
  eargs.model_path = fargs.model_path;
  eargs.mode = "frozen:freeze/refbatch.csv";
  eargs.window_x = 0.5;
  eargs.window_y = 0.5;
  eargs.window_r = 1.5;
  eargs.svg_path = "enum/partition.svg";
  eargs.out_dir = "enum";
  cmd_enumerate(eargs);

  OffsetsArgs oargs;
  oargs.model_path = fargs.model_path;
  oargs.data_path = "train/dataset.csv";
  oargs.variant = "bn_frozen";
  oargs.batch_path = "freeze/refbatch.csv";
  oargs.out_dir = "offsets";
  cmd_offsets(oargs);

  DecisionMapArgs dargs;
  dargs.model_path = fargs.model_path;
  dargs.mode = "frozen:freeze/refbatch.csv";
  dargs.window_x = 0.5;
  dargs.window_y = 0.5;
  dargs.window_r = 1.5;
  dargs.svg_path = "decision/map.svg";
  dargs.out_dir = "decision";
  cmd_decision_map(dargs);

  fs::current_path(saved_cwd);
}

void criterion9_determinism() {
  const double t0 = now_seconds();
  const std::string base =
      (fs::temp_directory_path() / "cpageo_acceptance_det").string();
  fs::remove_all(base);
  run_pipeline(base + "/run_a");
  run_pipeline(base + "/run_b");
  std::string first_diff;
  const bool same =
      dirs_byte_identical(base + "/run_a", base + "/run_b", &first_diff);
  const double dt = now_seconds() - t0;
  report(9, same, "identical manifests give byte-identical outputs",
         (same ? "all files identical" : "first difference: " + first_diff) +
             ", " + fmt17(dt) + " s");
  fs::remove_all(base);
}

}  // namespace

int main() {
  std::printf("cpageo acceptance suite\n");
  const double t0 = now_seconds();

  criterion1_formula_oracle();
  criterion3_gradients();

  std::printf("  training matched checkpoints (table 1 and table 2 protocols)...\n");
  std::fflush(stdout);
  train_all_checkpoints();
  std::printf("  trained %zu single-layer and %zu deep pairs\n", g_table1.size(),
              g_table2.size());

  criterion2_exact_geometry();
  criterion4_table1();
  criterion5_table2();
  criterion6_pullback();
  criterion7_offset_cdf();
  criterion8_self_consistency();
  criterion9_determinism();

  std::printf("total time %.1f s; %d criterion failure(s)\n", now_seconds() - t0,
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
