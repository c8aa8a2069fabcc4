#include "surgkit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "surgkit/error.hpp"
#include "surgkit/geometry.hpp"

namespace surgkit {

namespace {

bool holds_kind(const Geometry& g, GeometryKind kind) {
  switch (kind) {
    case GeometryKind::AxisAligned:
      return std::holds_alternative<BoxAA>(g);
    case GeometryKind::Rotated:
      return std::holds_alternative<BoxRot>(g);
    case GeometryKind::ThreeD:
      return std::holds_alternative<Box3D>(g);
  }
  return false;
}

void check_threshold(double t, const char* what) {
  if (!std::isfinite(t) || t <= 0.0 || t > 1.0) {
    throw ValidationError(std::string(what) + " must lie in (0, 1], got " +
                          std::to_string(t));
  }
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  if (s.size() >= width) {
    return s;
  }
  return std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  if (s.size() >= width) {
    return s;
  }
  return s + std::string(width - s.size(), ' ');
}

}  // namespace

GeometryKind geometry_kind_from_string(const std::string& token) {
  if (token == "aa") {
    return GeometryKind::AxisAligned;
  }
  if (token == "rot") {
    return GeometryKind::Rotated;
  }
  if (token == "3d") {
    return GeometryKind::ThreeD;
  }
  throw ValidationError("unknown geometry '" + token +
                        "' (expected aa, rot or 3d)");
}

std::string to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::AxisAligned:
      return "aa";
    case GeometryKind::Rotated:
      return "rot";
    case GeometryKind::ThreeD:
      return "3d";
  }
  return "?";
}

double annotation_iou(const Geometry& a, const Geometry& b) {
  if (a.index() != b.index()) {
    throw ValidationError("iou: mismatched geometry kinds");
  }
  if (std::holds_alternative<BoxAA>(a)) {
    return iou_aa(std::get<BoxAA>(a), std::get<BoxAA>(b));
  }
  if (std::holds_alternative<BoxRot>(a)) {
    return iou_rot(std::get<BoxRot>(a), std::get<BoxRot>(b));
  }
  return iou_3d(std::get<Box3D>(a), std::get<Box3D>(b));
}

IouFn iou_fn_for(GeometryKind kind) {
  return [kind](const Geometry& a, const Geometry& b) {
    if (!holds_kind(a, kind) || !holds_kind(b, kind)) {
      throw ValidationError("iou: expected " + to_string(kind) + " geometry");
    }
    return annotation_iou(a, b);
  };
}

std::vector<int> greedy_match(const std::vector<std::vector<double>>& iou,
                              double threshold) {
  check_threshold(threshold, "iou threshold");
  const std::size_t n_det = iou.size();
  const std::size_t n_gt = n_det > 0 ? iou[0].size() : 0;
  std::vector<int> matched(n_det, -1);
  std::vector<char> taken(n_gt, 0);
  for (std::size_t d = 0; d < n_det; ++d) {
    if (iou[d].size() != n_gt) {
      throw ValidationError("greedy_match: ragged IoU matrix");
    }
    double best_v = -1.0;
    int best_g = -1;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (taken[g]) {
        continue;
      }
      const double v = iou[d][g];
      if (v >= threshold && v > best_v) {
        best_v = v;
        best_g = static_cast<int>(g);
      }
    }
    if (best_g >= 0) {
      taken[static_cast<std::size_t>(best_g)] = 1;
      matched[d] = best_g;
    }
  }
  return matched;
}

Prf1 prf1(long long tp, long long fp, long long fn) {
  if (tp < 0 || fp < 0 || fn < 0) {
    throw ValidationError("prf1: negative count");
  }
  Prf1 out;
  const double tpd = static_cast<double>(tp);
  if (tp + fp > 0) {
    out.precision = tpd / static_cast<double>(tp + fp);
  }
  if (tp + fn > 0) {
    out.recall = tpd / static_cast<double>(tp + fn);
  }
  if (out.precision + out.recall > 0.0) {
    out.f1 =
        2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

PRCurve pr_curve(const std::vector<int>& tp_flags, std::size_t n_gt) {
  if (n_gt == 0) {
    throw ValidationError("pr_curve: no ground truth");
  }
  PRCurve curve;
  curve.recall.reserve(tp_flags.size());
  curve.precision.reserve(tp_flags.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < tp_flags.size(); ++i) {
    if (tp_flags[i] != 0) {
      ++tp;
    }
    curve.recall.push_back(static_cast<double>(tp) /
                           static_cast<double>(n_gt));
    curve.precision.push_back(static_cast<double>(tp) /
                              static_cast<double>(i + 1));
  }
  return curve;
}

ApInterpolation ap_interpolation_from_string(const std::string& token) {
  if (token == "coco101") {
    return ApInterpolation::Coco101;
  }
  if (token == "allpoints") {
    return ApInterpolation::AllPoints;
  }
  throw ValidationError("unknown interpolation '" + token +
                        "' (expected coco101 or allpoints)");
}

double average_precision(const std::vector<int>& tp_flags, std::size_t n_gt,
                         ApInterpolation interp) {
  if (n_gt == 0) {
    throw ValidationError("average_precision: no ground truth");
  }
  if (tp_flags.empty()) {
    return 0.0;
  }
  const PRCurve curve = pr_curve(tp_flags, n_gt);
  const std::size_t n = tp_flags.size();

  if (interp == ApInterpolation::Coco101) {
    // Sample the precision envelope at recalls 0.00, 0.01, ..., 1.00.
    // Points with recall >= r form a suffix, so walk once from the back.
    double total = 0.0;
    double envelope = 0.0;
    std::size_t idx = n;
    for (int j = 100; j >= 0; --j) {
      const double r = static_cast<double>(j) / 100.0;
      while (idx > 0 && curve.recall[idx - 1] >= r) {
        --idx;
        envelope = std::max(envelope, curve.precision[idx]);
      }
      total += envelope;
    }
    return total / 101.0;
  }

  // All-points integration over every recall change.
  std::vector<double> mrec;
  std::vector<double> mpre;
  mrec.reserve(n + 2);
  mpre.reserve(n + 2);
  mrec.push_back(0.0);
  mrec.insert(mrec.end(), curve.recall.begin(), curve.recall.end());
  mrec.push_back(1.0);
  mpre.push_back(0.0);
  mpre.insert(mpre.end(), curve.precision.begin(), curve.precision.end());
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i > 0; --i) {
    mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
  }
  double ap = 0.0;
  for (std::size_t i = 0; i + 1 < mrec.size(); ++i) {
    if (mrec[i + 1] != mrec[i]) {
      ap += (mrec[i + 1] - mrec[i]) * mpre[i + 1];
    }
  }
  return ap;
}

double mean_average_precision(std::span<const double> per_class_ap) {
  if (per_class_ap.empty()) {
    throw ValidationError("mean_average_precision: no classes");
  }
  double sum = 0.0;
  for (const double ap : per_class_ap) {
    sum += ap;
  }
  return sum / static_cast<double>(per_class_ap.size());
}

namespace {

// One ground-truth frame and class: ground-truth indices, detections sorted
// by descending score, their IoU matrix, and match flags per threshold.
struct Cell {
  std::vector<std::size_t> gts;
  std::vector<std::pair<double, std::size_t>> dets;  // (score, annotation idx)
  std::vector<std::vector<double>> iou;
  std::vector<std::vector<char>> tp;  // [threshold][det]
};

struct PooledRef {
  double score = 0.0;
  const std::string* frame_id = nullptr;
  std::size_t det_idx = 0;
  std::size_t frame_pos = 0;
  std::size_t local = 0;
  std::size_t class_pos = 0;
};

bool pooled_before(const PooledRef& a, const PooledRef& b) {
  if (a.score != b.score) {
    return a.score > b.score;
  }
  if (*a.frame_id != *b.frame_id) {
    return *a.frame_id < *b.frame_id;
  }
  return a.det_idx < b.det_idx;
}

}  // namespace

EvalReport evaluate(const Dataset& ground_truth, const Dataset& detections,
                    GeometryKind kind, const EvalOptions& options) {
  if (!(ground_truth.catalog == detections.catalog)) {
    throw ValidationError(
        "evaluate: ground truth and detections use different class catalogs");
  }
  validate_dataset(ground_truth);
  validate_dataset(detections);

  EvalOptions opts = options;
  if (opts.iou_thresholds.empty()) {
    for (int i = 0; i < 10; ++i) {
      opts.iou_thresholds.push_back(0.50 + 0.05 * static_cast<double>(i));
    }
  }
  check_threshold(opts.primary_iou, "primary iou threshold");
  for (const double t : opts.iou_thresholds) {
    check_threshold(t, "iou threshold");
  }

  // Thresholds to match at: the range plus the primary when absent.
  std::vector<double> all_thr = opts.iou_thresholds;
  std::size_t primary_pos = all_thr.size();
  for (std::size_t i = 0; i < all_thr.size(); ++i) {
    if (std::abs(all_thr[i] - opts.primary_iou) < 1e-9) {
      primary_pos = i;
      break;
    }
  }
  if (primary_pos == all_thr.size()) {
    all_thr.push_back(opts.primary_iou);
  }
  const std::size_t n_range = opts.iou_thresholds.size();

  // Class selection, ascending ids.
  std::vector<int> class_ids = opts.class_ids;
  if (class_ids.empty()) {
    for (std::size_t i = 0; i < ground_truth.catalog.size(); ++i) {
      class_ids.push_back(static_cast<int>(i));
    }
  } else {
    std::sort(class_ids.begin(), class_ids.end());
    class_ids.erase(std::unique(class_ids.begin(), class_ids.end()),
                    class_ids.end());
    for (const int id : class_ids) {
      if (!ground_truth.catalog.contains(id)) {
        throw ValidationError("evaluate: unknown class id " +
                              std::to_string(id));
      }
    }
  }
  std::unordered_map<int, std::size_t> class_pos;
  for (std::size_t i = 0; i < class_ids.size(); ++i) {
    class_pos[class_ids[i]] = i;
  }

  std::unordered_map<std::string, std::size_t> frame_pos;
  frame_pos.reserve(ground_truth.frames.size());
  for (std::size_t i = 0; i < ground_truth.frames.size(); ++i) {
    frame_pos[ground_truth.frames[i].id] = i;
  }

  std::vector<std::vector<Cell>> cells(
      ground_truth.frames.size(), std::vector<Cell>(class_ids.size()));

  for (std::size_t f = 0; f < ground_truth.frames.size(); ++f) {
    const Frame& frame = ground_truth.frames[f];
    for (std::size_t j = 0; j < frame.annotations.size(); ++j) {
      const Annotation& ann = frame.annotations[j];
      const auto it = class_pos.find(ann.class_id);
      if (it == class_pos.end()) {
        continue;
      }
      if (!holds_kind(ann.geometry, kind)) {
        throw ValidationError("evaluate: frame '" + frame.id +
                              "' holds a non-" + to_string(kind) +
                              " ground-truth geometry");
      }
      cells[f][it->second].gts.push_back(j);
    }
  }

  for (const Frame& frame : detections.frames) {
    const auto fit = frame_pos.find(frame.id);
    if (fit == frame_pos.end()) {
      throw ValidationError("evaluate: detections reference unknown frame '" +
                            frame.id + "'");
    }
    for (std::size_t j = 0; j < frame.annotations.size(); ++j) {
      const Annotation& ann = frame.annotations[j];
      const auto it = class_pos.find(ann.class_id);
      if (it == class_pos.end()) {
        continue;
      }
      if (!holds_kind(ann.geometry, kind)) {
        throw ValidationError("evaluate: frame '" + frame.id +
                              "' holds a non-" + to_string(kind) +
                              " detection geometry");
      }
      if (!ann.score.has_value()) {
        throw ValidationError("evaluate: detection without score in frame '" +
                              frame.id + "'");
      }
      if (!std::isfinite(*ann.score)) {
        throw ValidationError("evaluate: non-finite score in frame '" +
                              frame.id + "'");
      }
      cells[fit->second][it->second].dets.emplace_back(*ann.score, j);
    }
  }

  // Per-cell IoU matrices and matches, computed once and reused across
  // thresholds.
  std::unordered_map<std::string, const Frame*> det_frames;
  for (const Frame& frame : detections.frames) {
    det_frames[frame.id] = &frame;
  }
  for (std::size_t f = 0; f < cells.size(); ++f) {
    const Frame& gt_frame = ground_truth.frames[f];
    const auto dit = det_frames.find(gt_frame.id);
    const Frame* det_frame = dit == det_frames.end() ? nullptr : dit->second;
    for (auto& cell : cells[f]) {
      std::sort(cell.dets.begin(), cell.dets.end(),
                [](const auto& a, const auto& b) {
                  if (a.first != b.first) {
                    return a.first > b.first;
                  }
                  return a.second < b.second;
                });
      cell.iou.assign(cell.dets.size(),
                      std::vector<double>(cell.gts.size(), 0.0));
      for (std::size_t d = 0; d < cell.dets.size(); ++d) {
        const Annotation& det = det_frame->annotations[cell.dets[d].second];
        for (std::size_t g = 0; g < cell.gts.size(); ++g) {
          const Annotation& gt = gt_frame.annotations[cell.gts[g]];
          cell.iou[d][g] = annotation_iou(det.geometry, gt.geometry);
        }
      }
      cell.tp.assign(all_thr.size(), std::vector<char>(cell.dets.size(), 0));
      for (std::size_t ti = 0; ti < all_thr.size(); ++ti) {
        const std::vector<int> match = greedy_match(cell.iou, all_thr[ti]);
        for (std::size_t d = 0; d < match.size(); ++d) {
          cell.tp[ti][d] = match[d] >= 0 ? 1 : 0;
        }
      }
    }
  }

  EvalReport report;
  report.primary_iou = opts.primary_iou;
  report.iou_thresholds = opts.iou_thresholds;
  report.interp = opts.interp;
  report.n_frames = ground_truth.frames.size();

  std::vector<PooledRef> micro;
  std::size_t total_gt = 0;
  double sum_ap_primary = 0.0;
  double sum_ap_range = 0.0;
  double sum_recall = 0.0;
  std::size_t counted_classes = 0;

  for (std::size_t c = 0; c < class_ids.size(); ++c) {
    EvalRow row;
    row.class_id = class_ids[c];
    row.class_name = ground_truth.catalog.name_of(class_ids[c]);

    std::vector<PooledRef> pooled;
    for (std::size_t f = 0; f < cells.size(); ++f) {
      const Cell& cell = cells[f][c];
      row.n_gt += cell.gts.size();
      for (std::size_t l = 0; l < cell.dets.size(); ++l) {
        pooled.push_back({cell.dets[l].first, &ground_truth.frames[f].id,
                          cell.dets[l].second, f, l, c});
      }
    }
    row.n_det = pooled.size();
    std::sort(pooled.begin(), pooled.end(), pooled_before);

    if (row.n_gt > 0) {
      std::vector<int> flags(pooled.size(), 0);
      double range_sum = 0.0;
      for (std::size_t ti = 0; ti < all_thr.size(); ++ti) {
        for (std::size_t k = 0; k < pooled.size(); ++k) {
          flags[k] = cells[pooled[k].frame_pos][c].tp[ti][pooled[k].local];
        }
        const double ap = average_precision(flags, row.n_gt, opts.interp);
        if (ti < n_range) {
          range_sum += ap;
        }
        if (ti == primary_pos) {
          row.ap_primary = ap;
          std::size_t matched = 0;
          for (const int flag : flags) {
            matched += static_cast<std::size_t>(flag);
          }
          row.recall =
              static_cast<double>(matched) / static_cast<double>(row.n_gt);
        }
      }
      row.ap_range = range_sum / static_cast<double>(n_range);
      sum_ap_primary += row.ap_primary;
      sum_ap_range += row.ap_range;
      sum_recall += row.recall;
      ++counted_classes;
    }

    total_gt += row.n_gt;
    micro.insert(micro.end(), pooled.begin(), pooled.end());
    report.rows.push_back(std::move(row));
  }

  if (counted_classes == 0) {
    throw ValidationError("evaluate: no ground-truth instances");
  }
  report.map_primary = sum_ap_primary / static_cast<double>(counted_classes);
  report.map_range = sum_ap_range / static_cast<double>(counted_classes);
  report.mean_recall = sum_recall / static_cast<double>(counted_classes);

  // Micro F1: all classes pooled, best confidence cut at the primary IoU.
  std::sort(micro.begin(), micro.end(), pooled_before);
  long long tp = 0;
  for (std::size_t k = 0; k < micro.size(); ++k) {
    const PooledRef& ref = micro[k];
    tp += cells[ref.frame_pos][ref.class_pos].tp[primary_pos][ref.local];
    const bool cut_here =
        k + 1 == micro.size() || micro[k + 1].score < ref.score;
    if (!cut_here) {
      continue;
    }
    const long long kept = static_cast<long long>(k) + 1;
    const Prf1 stats =
        prf1(tp, kept - tp, static_cast<long long>(total_gt) - tp);
    if (stats.f1 > report.micro_f1) {
      report.micro_f1 = stats.f1;
      report.f1_score_cut = ref.score;
      report.precision_at_f1 = stats.precision;
      report.recall_at_f1 = stats.recall;
    }
  }

  return report;
}

std::string render_eval_table(const EvalReport& report) {
  const std::string ap_label = "AP@" + fmt2(report.primary_iou);
  std::string range_label = "AP";
  if (!report.iou_thresholds.empty()) {
    range_label = "AP@" + fmt2(report.iou_thresholds.front()) + ":" +
                  fmt2(report.iou_thresholds.back());
  }

  std::size_t name_w = std::string("Class").size();
  for (const EvalRow& row : report.rows) {
    name_w = std::max(name_w, row.class_name.size());
  }
  name_w = std::max(name_w, std::string("all").size());

  const std::size_t num_w = 8;
  const std::size_t ap_w = std::max<std::size_t>(ap_label.size() + 2, 9);
  const std::size_t range_w = std::max<std::size_t>(range_label.size() + 2, 9);

  std::string out;
  out += pad_right("Class", name_w) + pad_left("Gts", num_w) +
         pad_left("Dets", num_w) + pad_left("Recall", num_w) +
         pad_left(ap_label, ap_w) + pad_left(range_label, range_w) + "\n";

  std::size_t total_gt = 0;
  std::size_t total_det = 0;
  for (const EvalRow& row : report.rows) {
    total_gt += row.n_gt;
    total_det += row.n_det;
    out += pad_right(row.class_name, name_w);
    out += pad_left(std::to_string(row.n_gt), num_w);
    out += pad_left(std::to_string(row.n_det), num_w);
    if (row.n_gt > 0) {
      out += pad_left(fmt3(row.recall), num_w);
      out += pad_left(fmt3(row.ap_primary), ap_w);
      out += pad_left(fmt3(row.ap_range), range_w);
    } else {
      out += pad_left("-", num_w);
      out += pad_left("-", ap_w);
      out += pad_left("-", range_w);
    }
    out += "\n";
  }
  out += pad_right("all", name_w);
  out += pad_left(std::to_string(total_gt), num_w);
  out += pad_left(std::to_string(total_det), num_w);
  out += pad_left(fmt3(report.mean_recall), num_w);
  out += pad_left(fmt3(report.map_primary), ap_w);
  out += pad_left(fmt3(report.map_range), range_w);
  out += "\n";
  return out;
}

nlohmann::json eval_report_json(const EvalReport& report) {
  nlohmann::json classes = nlohmann::json::array();
  for (const EvalRow& row : report.rows) {
    classes.push_back({{"id", row.class_id},
                       {"name", row.class_name},
                       {"gts", row.n_gt},
                       {"dets", row.n_det},
                       {"recall", row.recall},
                       {"ap", row.ap_primary},
                       {"ap_range", row.ap_range}});
  }
  return nlohmann::json{
      {"schema", "surgkit.eval/1"},
      {"primary_iou", report.primary_iou},
      {"iou_thresholds", report.iou_thresholds},
      {"interpolation",
       report.interp == ApInterpolation::Coco101 ? "coco101" : "allpoints"},
      {"frames", report.n_frames},
      {"classes", classes},
      {"map", report.map_primary},
      {"map_range", report.map_range},
      {"mean_recall", report.mean_recall},
      {"micro_f1",
       {{"f1", report.micro_f1},
        {"score_cut", report.f1_score_cut},
        {"precision", report.precision_at_f1},
        {"recall", report.recall_at_f1}}}};
}

}  // namespace surgkit
