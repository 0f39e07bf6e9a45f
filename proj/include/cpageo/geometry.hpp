#pragma once

#include <string>
#include <vector>

#include "cpageo/linalg.hpp"
#include "cpageo/network.hpp"

namespace cpageo {

// The set {u : <w, u> = c}.
struct Hyperplane {
  Vec w;
  double c = 0.0;
};

// Closed l_inf ball B(center, r).
struct Window {
  Vec center;
  double r = 0.0;
};

Hyperplane baseline_hyperplane(const Vec& w, double b, double tau);

// Switching hyperplane of a BN neuron conditioned on a batch with centroid
// `centroid` and pre-activation variance v:
//   <w, u> = <w, centroid> + delta * sqrt(v + eps),  delta = (tau - beta) / gamma.
Hyperplane bn_hyperplane(const Vec& w, const Vec& centroid, double v, double gamma,
                         double beta, double tau, double eps);

// Same hyperplane from the captured scalar statistics (mu, v) of the neuron,
// using mu = <w, centroid> + b.
Hyperplane bn_hyperplane_from_stats(const Vec& w, double b, double mu, double v,
                                    double gamma, double beta, double tau, double eps);

Hyperplane through_centroid_hyperplane(const Vec& w, const Vec& centroid);

enum class CutBoundary { Open, Closed };

// Open: |c - <w, x0>| < r * ||w||_1;  closed: <=.
bool window_cut(const Hyperplane& h, const Window& b, CutBoundary boundary);

struct CutClassification {
  bool open_cut = false;
  bool closed_cut = false;
  bool boundary_tie = false;  // within tie_tol of the equality case
};

CutClassification window_cut_classified(const Hyperplane& h, const Window& b,
                                        double tie_tol = 1e-12);

double centroid_distance_l2(const Hyperplane& h, const Vec& x0);

enum class OffsetVariant { Baseline, BnFrozen, BnRunning, ThroughCentroid };

const char* variant_name(OffsetVariant v);
OffsetVariant variant_from_name(const std::string& name);

struct OffsetRecord {
  int layer = 0;       // 1-based hidden layer
  int neuron = 0;      // 0-based within the layer
  int breakpoint = 0;  // 1-based q
  OffsetVariant variant = OffsetVariant::Baseline;
  double delta = 0.0;
  double numerator = 0.0;
  double l1_norm = 0.0;
};

// Window cut at radius r  <=>  delta < r, for every variant.
double offset_baseline(const Vec& w, double b, double tau, const Vec& center);

// Centroid-centered BN offset in bias-free form: |delta| sqrt(v+eps) / ||w||_1.
double offset_bn_frozen(const Vec& w, double gamma, double beta, double tau,
                        double eps, double v);

// General window center u0: |<w, centroid - u0> + delta sqrt(v+eps)| / ||w||_1.
double offset_bn_general(const Vec& w, const Vec& centroid, const Vec& center,
                         double gamma, double beta, double tau, double eps, double v);

// Inference-mode offset under running statistics, relative to center u0:
// |<w, u0> + b - mu_run - delta sqrt(v_run + eps)| / ||w||_1.
double offset_bn_running(const Vec& w, double b, double mu_run, double v_run,
                         double gamma, double beta, double tau, double eps,
                         const Vec& center);

// Hyperplane family of one hidden layer in its representation space.
struct LayerArrangement {
  std::vector<Hyperplane> planes;
  std::vector<std::pair<int, int>> index;  // (neuron, breakpoint q)
  int skipped_zero_weight = 0;
};

// Baseline planes come from mode NoBn; BN variants absorb the layer's
// statistics. `layer` is 1-based.
LayerArrangement layer_arrangement(const Network& net, std::size_t layer,
                                   const EvalMode& mode);

struct FamilyCutCounts {
  std::vector<int> per_neuron;  // M_j, entries in [0, Q]
  long long total = 0;          // C
  int skipped_zero_weight = 0;
};

FamilyCutCounts family_cut_counts(const Network& net, std::size_t layer,
                                  const EvalMode& mode, const Window& b);

FamilyCutCounts family_cut_counts(const LayerArrangement& arr, std::size_t width,
                                  const Window& b);

}  // namespace cpageo
