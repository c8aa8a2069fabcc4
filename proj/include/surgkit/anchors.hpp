#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "surgkit/types.hpp"

namespace surgkit {

using WH = std::array<double, 2>;

// Anchor priors grouped per detection level, fine to coarse. Within a
// level anchors are sorted by area ascending; levels are sorted by mean
// area ascending.
struct AnchorSet {
  std::vector<std::vector<WH>> levels;
  int n_per_level = 0;
  double bpr = 0.0;  // best possible recall of these anchors on the fit data

  std::vector<WH> flat() const;
};

struct AnchorConfig {
  int n_per_level = 3;
  int levels = 3;
  double img_size = 640.0;
  std::uint64_t seed = 0;
  double ratio_threshold = 4.0;  // max wh ratio for a box to count as covered
  double min_side_px = 2.0;      // boxes smaller than this after scaling are skipped
  int max_iterations = 300;
  double rel_tolerance = 1e-6;
};

struct AnchorReport {
  std::size_t boxes_used = 0;
  std::size_t boxes_excluded = 0;
  int iterations = 0;
  double mean_fitness = 0.0;  // mean wh-ratio fitness at convergence
  // Mean distance after each assignment step; non-increasing.
  std::vector<double> objective_trajectory;
};

// Fitness of an anchor for a box: per-dimension min(ratio, 1/ratio),
// then the worse of the two dimensions. 1 means a perfect size match.
double wh_ratio_fitness(double box_w, double box_h, double anchor_w,
                        double anchor_h);

// Ground-truth (w, h) after letterbox scaling to the square training
// resolution, degenerate boxes (< min_side_px) excluded.
std::vector<WH> collect_scaled_wh(const Dataset& dataset, double img_size,
                                  double min_side_px,
                                  std::size_t* excluded = nullptr);

// K-means (k-means++ seeding, Lloyd iterations) over box (w, h) with
// distance 1 - wh_ratio_fitness, k = n_per_level * levels. Deterministic
// for a fixed seed. Throws ValidationError when fewer than k usable boxes
// exist.
AnchorSet generate_anchors(const Dataset& dataset, const AnchorConfig& config = {},
                           AnchorReport* report = nullptr);

// Fraction of ground-truth boxes whose best anchor keeps every side ratio
// below ratio_threshold.
double best_possible_recall(const AnchorSet& anchors, const Dataset& dataset,
                            double img_size = 640.0, double ratio_threshold = 4.0);
double best_possible_recall_wh(const std::vector<WH>& anchors,
                               const std::vector<WH>& boxes,
                               double ratio_threshold);

// Level-major config block of integer-rounded pairs, ready to paste into
// a detector model config:
//   anchors:
//     - [10,13, 16,30, 33,23]
//     ...
std::string format_anchor_config(const AnchorSet& anchors);

}  // namespace surgkit
