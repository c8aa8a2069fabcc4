#include "surgkit/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "surgkit/error.hpp"
#include "surgkit/geometry.hpp"

namespace surgkit {

namespace {

// Portable uniform double in [0, 1): 53 mantissa bits of the generator
// output, so results are identical wherever mt19937_64 is.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double wh_distance(const WH& box, const WH& anchor) {
  return 1.0 - wh_ratio_fitness(box[0], box[1], anchor[0], anchor[1]);
}

std::size_t nearest_center(const WH& box, const std::vector<WH>& centers,
                           double* distance = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = wh_distance(box, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (distance != nullptr) {
    *distance = best_d;
  }
  return best;
}

std::vector<WH> kmeans_pp_seed(const std::vector<WH>& boxes, std::size_t k,
                               std::mt19937_64& rng) {
  std::vector<WH> centers;
  centers.reserve(k);
  centers.push_back(boxes[rng() % boxes.size()]);
  std::vector<double> dist2(boxes.size());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      double d = 0.0;
      nearest_center(boxes[i], centers, &d);
      dist2[i] = d * d;
      total += dist2[i];
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng() % boxes.size();  // all points already sit on a center
    } else {
      const double target = uniform01(rng) * total;
      double cumulative = 0.0;
      pick = boxes.size() - 1;
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        cumulative += dist2[i];
        if (cumulative >= target) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(boxes[pick]);
  }
  return centers;
}

}  // namespace

double wh_ratio_fitness(double box_w, double box_h, double anchor_w,
                        double anchor_h) {
  const double rw = std::min(box_w / anchor_w, anchor_w / box_w);
  const double rh = std::min(box_h / anchor_h, anchor_h / box_h);
  return std::min(rw, rh);
}

std::vector<WH> AnchorSet::flat() const {
  std::vector<WH> out;
  for (const auto& level : levels) {
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::vector<WH> collect_scaled_wh(const Dataset& dataset, double img_size,
                                  double min_side_px, std::size_t* excluded) {
  std::vector<WH> whs;
  std::size_t skipped = 0;
  for (const auto& frame : dataset.frames) {
    if (frame.image_width <= 0 || frame.image_height <= 0) {
      throw ValidationError("anchors: frame '" + frame.id +
                            "' has unknown image dimensions");
    }
    const double scale = letterbox(frame.image_width, frame.image_height,
                                   img_size, img_size)
                             .scale;
    for (const auto& ann : frame.annotations) {
      const BoxAA* box = std::get_if<BoxAA>(&ann.geometry);
      if (box == nullptr) {
        throw ValidationError("anchors: frame '" + frame.id +
                              "' has non axis-aligned geometry");
      }
      const double w = box->width() * scale;
      const double h = box->height() * scale;
      if (w < min_side_px || h < min_side_px) {
        ++skipped;
        continue;
      }
      whs.push_back({w, h});
    }
  }
  if (excluded != nullptr) {
    *excluded = skipped;
  }
  return whs;
}

AnchorSet generate_anchors(const Dataset& dataset, const AnchorConfig& config,
                           AnchorReport* report) {
  if (config.n_per_level < 1 || config.levels < 1) {
    throw ValidationError("anchors: n_per_level and levels must be positive");
  }
  std::size_t excluded = 0;
  const std::vector<WH> boxes =
      collect_scaled_wh(dataset, config.img_size, config.min_side_px, &excluded);
  const std::size_t k =
      static_cast<std::size_t>(config.n_per_level) * static_cast<std::size_t>(config.levels);
  if (boxes.size() < k) {
    throw ValidationError("anchors: need at least " + std::to_string(k) +
                          " usable boxes, have " + std::to_string(boxes.size()));
  }

  std::mt19937_64 rng(config.seed);
  std::vector<WH> centers = kmeans_pp_seed(boxes, k, rng);

  // Lloyd iterations. The mean update is not the exact minimizer of the
  // ratio metric, so a step can occasionally worsen the objective; such a
  // step is reverted and iteration stops, keeping the objective sequence
  // non-increasing.
  std::vector<std::size_t> assignment(boxes.size(), 0);
  std::vector<double> trajectory;
  std::vector<WH> prev_centers;
  double prev_objective = std::numeric_limits<double>::infinity();
  int iteration = 0;
  for (; iteration < config.max_iterations; ++iteration) {
    double objective = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      double d = 0.0;
      assignment[i] = nearest_center(boxes[i], centers, &d);
      objective += d;
    }
    objective /= static_cast<double>(boxes.size());

    if (objective > prev_objective) {
      centers = prev_centers;
      break;
    }
    trajectory.push_back(objective);
    const bool converged = prev_objective - objective <
                           config.rel_tolerance * std::max(objective, 1e-12);
    prev_objective = objective;
    if (converged) {
      break;
    }
    prev_centers = centers;

    std::vector<WH> sums(k, {0.0, 0.0});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      sums[assignment[i]][0] += boxes[i][0];
      sums[assignment[i]][1] += boxes[i][1];
      ++counts[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseat an empty cluster on the point farthest from its center.
        double worst = -1.0;
        std::size_t worst_i = 0;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
          const double d = wh_distance(boxes[i], centers[assignment[i]]);
          if (d > worst) {
            worst = d;
            worst_i = i;
          }
        }
        centers[c] = boxes[worst_i];
        assignment[worst_i] = c;
        continue;
      }
      centers[c] = {sums[c][0] / static_cast<double>(counts[c]),
                    sums[c][1] / static_cast<double>(counts[c])};
    }
  }

  auto area = [](const WH& wh) { return wh[0] * wh[1]; };
  std::sort(centers.begin(), centers.end(),
            [&](const WH& a, const WH& b) { return area(a) < area(b); });

  AnchorSet set;
  set.n_per_level = config.n_per_level;
  set.levels.resize(static_cast<std::size_t>(config.levels));
  for (int level = 0; level < config.levels; ++level) {
    const auto begin = centers.begin() + level * config.n_per_level;
    set.levels[static_cast<std::size_t>(level)] =
        std::vector<WH>(begin, begin + config.n_per_level);
  }
  set.bpr = best_possible_recall_wh(centers, boxes, config.ratio_threshold);

  if (report != nullptr) {
    report->boxes_used = boxes.size();
    report->boxes_excluded = excluded;
    report->iterations = iteration + 1;
    report->objective_trajectory = trajectory;
    double fitness = 0.0;
    for (const auto& box : boxes) {
      double d = 0.0;
      nearest_center(box, centers, &d);
      fitness += 1.0 - d;
    }
    report->mean_fitness = fitness / static_cast<double>(boxes.size());
  }
  return set;
}

double best_possible_recall_wh(const std::vector<WH>& anchors,
                               const std::vector<WH>& boxes,
                               double ratio_threshold) {
  if (boxes.empty()) {
    throw ValidationError("best_possible_recall: no boxes");
  }
  if (anchors.empty()) {
    throw ValidationError("best_possible_recall: no anchors");
  }
  std::size_t covered = 0;
  for (const auto& box : boxes) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& anchor : anchors) {
      const double rw = std::max(box[0] / anchor[0], anchor[0] / box[0]);
      const double rh = std::max(box[1] / anchor[1], anchor[1] / box[1]);
      best = std::min(best, std::max(rw, rh));
    }
    if (best < ratio_threshold) {
      ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(boxes.size());
}

double best_possible_recall(const AnchorSet& anchors, const Dataset& dataset,
                            double img_size, double ratio_threshold) {
  const std::vector<WH> boxes = collect_scaled_wh(dataset, img_size, 2.0);
  return best_possible_recall_wh(anchors.flat(), boxes, ratio_threshold);
}

std::string format_anchor_config(const AnchorSet& anchors) {
  std::string out = "anchors:\n";
  for (const auto& level : anchors.levels) {
    out += "  - [";
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (i > 0) {
        out += ", ";
      }
      out += std::to_string(static_cast<long>(std::lround(level[i][0])));
      out += ',';
      out += std::to_string(static_cast<long>(std::lround(level[i][1])));
    }
    out += "]\n";
  }
  return out;
}

}  // namespace surgkit
