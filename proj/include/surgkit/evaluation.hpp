#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "surgkit/types.hpp"

namespace surgkit {

// Which geometry the evaluator operates on. All annotations on both sides
// must hold the corresponding variant alternative.
enum class GeometryKind { AxisAligned, Rotated, ThreeD };

GeometryKind geometry_kind_from_string(const std::string& token);
std::string to_string(GeometryKind kind);

using IouFn = std::function<double(const Geometry&, const Geometry&)>;

// IoU between two geometries of the same kind; mismatched kinds are a
// ValidationError.
double annotation_iou(const Geometry& a, const Geometry& b);

// IoU function that additionally checks both operands hold `kind`.
IouFn iou_fn_for(GeometryKind kind);

// Greedy detection-to-ground-truth matching within one frame and class.
// `iou[d][g]` holds IoU between detection d and ground truth g; detections
// must already be ordered by descending confidence. Each detection takes the
// unmatched ground truth with the highest IoU >= threshold; equal IoUs
// resolve to the lower ground-truth index. Returns the matched ground-truth
// index per detection, -1 when unmatched.
std::vector<int> greedy_match(const std::vector<std::vector<double>>& iou,
                              double threshold);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision, recall and F1 from raw counts. Zero denominators yield zero;
// negative counts are a ValidationError.
Prf1 prf1(long long tp, long long fp, long long fn);

// Raw precision/recall points after each detection in ranked order.
struct PRCurve {
  std::vector<double> recall;
  std::vector<double> precision;
};

PRCurve pr_curve(const std::vector<int>& tp_flags, std::size_t n_gt);

enum class ApInterpolation { Coco101, AllPoints };

ApInterpolation ap_interpolation_from_string(const std::string& token);

// Average precision over a ranked true/false-positive sequence.
// Coco101 averages the precision envelope sampled at recalls 0.00..1.00 in
// steps of 0.01; AllPoints integrates the envelope over every recall change.
double average_precision(const std::vector<int>& tp_flags, std::size_t n_gt,
                         ApInterpolation interp);

// Arithmetic mean of per-class APs; empty input is a ValidationError.
double mean_average_precision(std::span<const double> per_class_ap);

struct EvalOptions {
  double primary_iou = 0.5;          // threshold for AP@primary, recall, F1
  std::vector<double> iou_thresholds;  // empty -> 0.50:0.05:0.95
  ApInterpolation interp = ApInterpolation::Coco101;
  std::vector<int> class_ids;        // empty -> every catalog class
};

struct EvalRow {
  int class_id = 0;
  std::string class_name;
  std::size_t n_gt = 0;
  std::size_t n_det = 0;
  double recall = 0.0;      // matched fraction at primary IoU, all detections
  double ap_primary = 0.0;  // AP at the primary IoU threshold
  double ap_range = 0.0;    // mean AP over iou_thresholds
};

struct EvalReport {
  std::vector<EvalRow> rows;      // one per evaluated class, id ascending
  double map_primary = 0.0;       // mean over classes with ground truth
  double map_range = 0.0;
  double mean_recall = 0.0;       // mean class recall at the primary IoU
  double micro_f1 = 0.0;          // best confidence cut, classes pooled
  double f1_score_cut = 0.0;      // confidence producing micro_f1
  double precision_at_f1 = 0.0;
  double recall_at_f1 = 0.0;
  double primary_iou = 0.5;
  std::vector<double> iou_thresholds;
  ApInterpolation interp = ApInterpolation::Coco101;
  std::size_t n_frames = 0;       // ground-truth frames considered
};

// Evaluate detections against ground truth. Both datasets must share one
// class catalog; every detection frame id must exist in the ground truth and
// every detection needs a confidence score. Ground-truth scores are ignored.
EvalReport evaluate(const Dataset& ground_truth, const Dataset& detections,
                    GeometryKind kind, const EvalOptions& options = {});

std::string render_eval_table(const EvalReport& report);
nlohmann::json eval_report_json(const EvalReport& report);

}  // namespace surgkit
