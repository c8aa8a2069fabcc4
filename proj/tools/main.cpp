// surgkit command line: annotation conversion, dataset bookkeeping,
// detection evaluation, point-cloud preprocessing, tube linking and local
// graph construction.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "surgkit/anchors.hpp"
#include "surgkit/coco.hpp"
#include "surgkit/dataset_ops.hpp"
#include "surgkit/error.hpp"
#include "surgkit/evaluation.hpp"
#include "surgkit/kitti.hpp"
#include "surgkit/labels.hpp"
#include "surgkit/pointcloud.hpp"
#include "surgkit/pointcloud_io.hpp"
#include "surgkit/tubes.hpp"
#include "surgkit/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw surgkit::IoError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw surgkit::IoError("cannot create directory '" +
                             path.parent_path().string() +
                             "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw surgkit::IoError("cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) {
    throw surgkit::IoError("write failed on '" + path.string() + "'");
  }
}

std::vector<double> parse_csv_doubles(const std::string& text,
                                      std::size_t expected,
                                      const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) {
        throw std::invalid_argument(tok);
      }
    } catch (const std::exception&) {
      throw surgkit::ValidationError(what + ": bad number '" + tok + "'");
    }
  }
  if (expected != 0 && values.size() != expected) {
    throw surgkit::ValidationError(what + ": expected " +
                                   std::to_string(expected) + " values, got " +
                                   std::to_string(values.size()));
  }
  return values;
}

std::vector<int> parse_csv_ints(const std::string& text,
                                const std::string& what) {
  std::vector<int> values;
  for (const double v : parse_csv_doubles(text, 0, what)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      throw surgkit::ValidationError(what + ": expected integers");
    }
    values.push_back(i);
  }
  return values;
}

surgkit::ClassCatalog load_catalog(const std::string& names_file) {
  if (names_file.empty()) {
    return surgkit::endoscope_catalog();
  }
  std::vector<std::string> names;
  std::istringstream in(read_file(names_file));
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (!line.empty()) {
      names.push_back(line);
    }
  }
  return surgkit::ClassCatalog(names);
}

surgkit::RangeSpec parse_range_args(const std::string& min_s,
                                    const std::string& max_s) {
  const auto mn = parse_csv_doubles(min_s, 3, "--min");
  const auto mx = parse_csv_doubles(max_s, 3, "--max");
  surgkit::RangeSpec range{mn[0], mx[0], mn[1], mx[1], mn[2], mx[2]};
  surgkit::validate_range(range);
  return range;
}

surgkit::CloudEncoding encoding_from_string(const std::string& token) {
  if (token == "ascii") {
    return surgkit::CloudEncoding::Ascii;
  }
  if (token == "binary") {
    return surgkit::CloudEncoding::Binary;
  }
  throw surgkit::ValidationError("unknown encoding '" + token +
                                 "' (expected ascii or binary)");
}

// Detections come either as a COCO JSON file (scores on the annotations) or
// as a directory of YOLO label files. The YOLO path needs image dimensions,
// taken from the ground-truth frames.
surgkit::Dataset load_detections_aa(const std::string& path,
                                    const surgkit::Dataset& gt) {
  if (fs::is_directory(path)) {
    std::vector<surgkit::FrameMeta> metas;
    for (const auto& frame : gt.frames) {
      if (fs::exists(fs::path(path) / (frame.id + ".txt"))) {
        metas.push_back({frame.id, frame.image_width, frame.image_height,
                         frame.source});
      }
    }
    return surgkit::read_yolo_labels(path, metas, gt.catalog);
  }
  return surgkit::read_coco_file(path);
}

void print_or_write(const std::string& output, const std::string& text) {
  if (output.empty()) {
    std::cout << text;
  } else {
    write_file(output, text);
  }
}

// --- subcommand bodies ---

struct ConvertCocoArgs {
  std::string input;
  std::string output;
};

void run_coco2yolo(const ConvertCocoArgs& args) {
  surgkit::CocoParseInfo info;
  const surgkit::Dataset ds = surgkit::read_coco_file(args.input, &info);
  const auto written = surgkit::write_yolo_labels(ds, args.output);
  std::cout << "wrote " << written.size() << " label files to " << args.output
            << "\n";
  for (std::size_t i = 0; i < ds.catalog.size(); ++i) {
    const int id = static_cast<int>(i);
    const auto it = info.instances_per_class.find(id);
    const std::size_t count =
        it == info.instances_per_class.end() ? 0 : it->second;
    std::cout << "class " << id << ": " << ds.catalog.name_of(id) << " ("
              << count << " instances)\n";
  }
  if (info.boxes_clamped > 0) {
    std::cout << "clamped " << info.boxes_clamped
              << " boxes to image bounds\n";
  }
  if (info.segmentation_fields_ignored > 0) {
    std::cout << "ignored " << info.segmentation_fields_ignored
              << " segmentation fields\n";
  }
}

struct CloudConvertArgs {
  std::string input;
  std::string output;
  std::string encoding = "binary";
};

void run_cloud_convert(const CloudConvertArgs& args,
                       surgkit::CloudFormat in_fmt,
                       surgkit::CloudFormat out_fmt) {
  const surgkit::PointCloud cloud =
      surgkit::read_pointcloud(args.input, in_fmt);
  surgkit::write_pointcloud(args.output, cloud, out_fmt,
                            encoding_from_string(args.encoding));
  std::cout << "wrote " << cloud.size() << " points to " << args.output
            << "\n";
}

struct Json2KittiArgs {
  std::string input;
  std::string output;
};

void run_json2kitti(const Json2KittiArgs& args) {
  const auto boxes =
      surgkit::parse_boxes3d_json(read_file(args.input), args.input);
  print_or_write(args.output, surgkit::format_kitti_lines(boxes));
  if (!args.output.empty()) {
    std::cout << "wrote " << boxes.size() << " boxes to " << args.output
              << "\n";
  }
}

struct SplitArgs {
  std::string input;
  std::string output;
  double ratio = 0.7;
  std::uint64_t seed = 0;
  bool stratify = false;
};

void run_split(const SplitArgs& args) {
  const surgkit::Dataset ds = surgkit::read_coco_file(args.input);
  surgkit::SplitSpec spec{args.ratio, args.seed, args.stratify};
  const surgkit::SplitResult result = surgkit::split_dataset(ds, spec);
  surgkit::write_split_manifests(result, args.output);
  std::cout << "train: " << result.train_ids.size() << " frames\n"
            << "val: " << result.val_ids.size() << " frames\n";
}

struct StatsArgs {
  std::string input;
  bool as_json = false;
};

void run_stats(const StatsArgs& args) {
  const surgkit::Dataset ds = surgkit::read_coco_file(args.input);
  const surgkit::DatasetStats stats = surgkit::compute_stats(ds);
  if (args.as_json) {
    std::cout << surgkit::stats_json(stats).dump(2) << "\n";
  } else {
    std::cout << surgkit::render_stats_table(stats);
  }
}

struct AnchorsArgs {
  std::string input;
  int per_level = 3;
  int levels = 3;
  double img_size = 640.0;
  std::uint64_t seed = 0;
  bool as_json = false;
};

void run_anchors(const AnchorsArgs& args) {
  const surgkit::Dataset ds = surgkit::read_coco_file(args.input);
  surgkit::AnchorConfig config;
  config.n_per_level = args.per_level;
  config.levels = args.levels;
  config.img_size = args.img_size;
  config.seed = args.seed;
  surgkit::AnchorReport report;
  const surgkit::AnchorSet anchors =
      surgkit::generate_anchors(ds, config, &report);
  if (args.as_json) {
    json levels = json::array();
    for (const auto& level : anchors.levels) {
      json flat = json::array();
      for (const auto& wh : level) {
        flat.push_back(wh[0]);
        flat.push_back(wh[1]);
      }
      levels.push_back(std::move(flat));
    }
    const json doc{{"schema", "surgkit.anchors/1"},
                   {"levels", std::move(levels)},
                   {"bpr", anchors.bpr},
                   {"img_size", args.img_size},
                   {"boxes_used", report.boxes_used},
                   {"boxes_excluded", report.boxes_excluded},
                   {"iterations", report.iterations},
                   {"mean_fitness", report.mean_fitness}};
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::cout << surgkit::format_anchor_config(anchors);
  char line[128];
  std::snprintf(line, sizeof line, "bpr: %.4f\n", anchors.bpr);
  std::cout << line << "boxes: " << report.boxes_used << " used, "
            << report.boxes_excluded << " excluded\n"
            << "iterations: " << report.iterations << "\n";
}

struct EvalArgs {
  std::string gt;
  std::string det;
  std::string geometry = "aa";
  double iou = 0.5;
  std::string interp = "coco101";
  std::string classes;
  std::string names_file;
  bool per_class = false;
  bool as_json = false;
};

void run_eval(const EvalArgs& args) {
  const surgkit::GeometryKind kind =
      surgkit::geometry_kind_from_string(args.geometry);

  surgkit::Dataset gt;
  surgkit::Dataset det;
  switch (kind) {
    case surgkit::GeometryKind::AxisAligned:
      gt = surgkit::read_coco_file(args.gt);
      det = load_detections_aa(args.det, gt);
      break;
    case surgkit::GeometryKind::Rotated: {
      const surgkit::ClassCatalog catalog = load_catalog(args.names_file);
      gt = surgkit::read_rot_labels(args.gt, catalog);
      det = surgkit::read_rot_labels(args.det, catalog);
      break;
    }
    case surgkit::GeometryKind::ThreeD: {
      const surgkit::ClassCatalog catalog = load_catalog(args.names_file);
      gt = surgkit::read_kitti_labels(args.gt, catalog);
      det = surgkit::read_kitti_labels(args.det, catalog);
      break;
    }
  }

  surgkit::EvalOptions options;
  options.primary_iou = args.iou;
  options.interp = surgkit::ap_interpolation_from_string(args.interp);
  if (!args.classes.empty()) {
    std::stringstream ss(args.classes);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      options.class_ids.push_back(
          surgkit::resolve_class_token(gt.catalog, tok).id);
    }
  }

  const surgkit::EvalReport report =
      surgkit::evaluate(gt, det, kind, options);
  if (args.as_json) {
    std::cout << surgkit::eval_report_json(report).dump(2) << "\n";
    return;
  }
  if (args.per_class) {
    std::cout << surgkit::render_eval_table(report);
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "frames: %zu\nmAP@%.2f: %.4f\nmAP@%.2f:%.2f: %.4f\n"
                "mean recall@%.2f: %.4f\n"
                "micro F1: %.4f (P=%.4f R=%.4f cut=%.4f)\n",
                report.n_frames, report.primary_iou, report.map_primary,
                report.iou_thresholds.front(), report.iou_thresholds.back(),
                report.map_range, report.primary_iou, report.mean_recall,
                report.micro_f1, report.precision_at_f1, report.recall_at_f1,
                report.f1_score_cut);
  std::cout << buf;
}

struct PclArgs {
  std::string input;
  std::string output;
  double leaf = 0.0;
  std::string min_corner;
  std::string max_corner;
  std::string voxel_size;
  std::size_t max_points = 32;
  std::string encoding = "binary";
};

void run_pcl_downsample(const PclArgs& args) {
  const surgkit::PointCloud cloud = surgkit::read_pointcloud(args.input);
  const surgkit::PointCloud out = surgkit::voxel_downsample(cloud, args.leaf);
  surgkit::write_pointcloud(args.output, out,
                            surgkit::cloud_format_from_extension(args.output),
                            encoding_from_string(args.encoding));
  std::cout << cloud.size() << " -> " << out.size() << " points\n";
}

void run_pcl_crop(const PclArgs& args) {
  const surgkit::PointCloud cloud = surgkit::read_pointcloud(args.input);
  const surgkit::RangeSpec range =
      parse_range_args(args.min_corner, args.max_corner);
  const surgkit::PointCloud out = surgkit::crop_range(cloud, range);
  surgkit::write_pointcloud(args.output, out,
                            surgkit::cloud_format_from_extension(args.output),
                            encoding_from_string(args.encoding));
  std::cout << cloud.size() << " -> " << out.size() << " points\n";
}

void run_pcl_voxelize(const PclArgs& args) {
  const surgkit::PointCloud cloud = surgkit::read_pointcloud(args.input);
  const surgkit::RangeSpec range =
      parse_range_args(args.min_corner, args.max_corner);
  auto sizes = parse_csv_doubles(args.voxel_size, 0, "--voxel-size");
  if (sizes.size() == 1) {
    sizes = {sizes[0], sizes[0], sizes[0]};
  }
  if (sizes.size() != 3) {
    throw surgkit::ValidationError("--voxel-size: expected 1 or 3 values");
  }
  const surgkit::VoxelGrid grid = surgkit::voxelize(
      cloud, {sizes[0], sizes[1], sizes[2]}, range, args.max_points);
  const json doc{{"schema", "surgkit.voxels/1"},
                 {"voxel_size", {grid.voxel_size[0], grid.voxel_size[1],
                                 grid.voxel_size[2]}},
                 {"dims", {grid.dims[0], grid.dims[1], grid.dims[2]}},
                 {"max_points_per_voxel", grid.max_points_per_voxel},
                 {"occupied_voxels", grid.voxels.size()},
                 {"stored_points", grid.stored_points()},
                 {"total_points", grid.total_points()}};
  print_or_write(args.output, doc.dump(2) + "\n");
}

struct TubesArgs {
  std::string det;
  std::string output;
  double iou = 0.3;
  int max_gap = 2;
  bool hungarian = false;
  double img_width = 0.0;
  double img_height = 0.0;
  std::string names_file;
  std::string video;
};

void run_tubes(const TubesArgs& args) {
  surgkit::Dataset ds;
  if (fs::is_directory(args.det)) {
    if (args.img_width <= 0 || args.img_height <= 0) {
      throw surgkit::ValidationError(
          "reading YOLO labels needs --img-width and --img-height");
    }
    const surgkit::ClassCatalog catalog = load_catalog(args.names_file);
    std::vector<surgkit::FrameMeta> metas;
    for (const auto& stem : surgkit::list_label_stems(args.det)) {
      metas.push_back({stem, args.img_width, args.img_height, ""});
    }
    ds = surgkit::read_yolo_labels(args.det, metas, catalog);
  } else {
    ds = surgkit::read_coco_file(args.det);
  }

  surgkit::LinkOptions options;
  options.iou_threshold = args.iou;
  options.max_gap = args.max_gap;
  options.hungarian = args.hungarian;
  const std::vector<surgkit::Tube> tubes = surgkit::link_tubes(ds, options);
  print_or_write(args.output,
                 surgkit::tubes_json(tubes, args.video).dump(2) + "\n");
  std::size_t entries = 0;
  for (const auto& tube : tubes) {
    entries += tube.entries.size();
  }
  std::cout << "tubes: " << tubes.size() << " (" << entries
            << " detections over " << ds.frames.size() << " frames)\n";
}

struct GraphsArgs {
  std::string tubes;
  std::string output;
  std::string windows = "12,18,24,30";
  int stride = 0;
  std::string topology = "scene";
  int frames = 0;
};

void run_graphs(const GraphsArgs& args) {
  json doc;
  try {
    doc = json::parse(read_file(args.tubes));
  } catch (const json::parse_error& e) {
    throw surgkit::ParseError(args.tubes, -1,
                              std::string("invalid JSON: ") + e.what());
  }
  const std::vector<surgkit::Tube> tubes =
      surgkit::tubes_from_json(doc, args.tubes);
  const std::string video = doc.value("video", "");

  int n_frames = args.frames;
  if (n_frames <= 0) {
    for (const auto& tube : tubes) {
      n_frames = std::max(n_frames, tube.end_frame() + 1);
    }
  }
  const surgkit::GraphTopology topology =
      surgkit::topology_from_string(args.topology);
  const std::vector<surgkit::LocalGraph> graphs = surgkit::build_local_graphs(
      tubes, n_frames, parse_csv_ints(args.windows, "--windows"), args.stride,
      topology);
  print_or_write(args.output,
                 surgkit::graphs_json(graphs, video).dump(2) + "\n");
  std::cout << "graphs: " << graphs.size() << " over " << n_frames
            << " frames\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surgical scene dataset toolkit"};
  app.require_subcommand(1);
  app.set_config("--config")->envname("SURGKIT_CONFIG");

  // convert
  auto* convert =
      app.add_subcommand("convert", "Convert annotation and cloud formats");
  convert->require_subcommand(1);

  ConvertCocoArgs c2y_args;
  auto* c2y =
      convert->add_subcommand("coco2yolo", "COCO JSON to YOLO label files");
  c2y->add_option("-i,--input", c2y_args.input, "COCO annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  c2y->add_option("-o,--output", c2y_args.output, "Output label directory")
      ->required();
  c2y->callback([&] { run_coco2yolo(c2y_args); });

  CloudConvertArgs p2p_args;
  auto* p2p = convert->add_subcommand("ply2pcd", "PLY cloud to PCD");
  p2p->add_option("-i,--input", p2p_args.input, "Input .ply")
      ->required()
      ->check(CLI::ExistingFile);
  p2p->add_option("-o,--output", p2p_args.output, "Output .pcd")->required();
  p2p->add_option("--encoding", p2p_args.encoding,
                  "Output encoding: ascii or binary");
  p2p->callback([&] {
    run_cloud_convert(p2p_args, surgkit::CloudFormat::Ply,
                      surgkit::CloudFormat::Pcd);
  });

  CloudConvertArgs p2b_args;
  auto* p2b = convert->add_subcommand("pcd2bin", "PCD cloud to raw float32");
  p2b->add_option("-i,--input", p2b_args.input, "Input .pcd")
      ->required()
      ->check(CLI::ExistingFile);
  p2b->add_option("-o,--output", p2b_args.output, "Output .bin")->required();
  p2b->callback([&] {
    run_cloud_convert(p2b_args, surgkit::CloudFormat::Pcd,
                      surgkit::CloudFormat::Bin);
  });

  Json2KittiArgs j2k_args;
  auto* j2k =
      convert->add_subcommand("json2kitti", "3D annotation JSON to label text");
  j2k->add_option("-i,--input", j2k_args.input, "Annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  j2k->add_option("-o,--output", j2k_args.output,
                  "Output label file (stdout when omitted)");
  j2k->callback([&] { run_json2kitti(j2k_args); });

  // split
  SplitArgs split_args;
  auto* split = app.add_subcommand("split", "Random train/val split");
  split->add_option("-i,--input", split_args.input, "COCO annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  split->add_option("-o,--output", split_args.output,
                    "Directory for train.txt / val.txt")
      ->required();
  split->add_option("--ratio", split_args.ratio, "Train fraction (0, 1)");
  split->add_option("--seed", split_args.seed, "Shuffle seed");
  split->add_flag("--stratify", split_args.stratify,
                  "Split each source at the ratio separately");
  split->callback([&] { run_split(split_args); });

  // stats
  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "Per-source, per-class counts");
  stats->add_option("-i,--input", stats_args.input, "COCO annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  stats->add_flag("--json", stats_args.as_json, "Emit JSON");
  stats->callback([&] { run_stats(stats_args); });

  // anchors
  AnchorsArgs anchors_args;
  auto* anchors =
      app.add_subcommand("anchors", "K-means anchor priors from a dataset");
  anchors->add_option("-i,--input", anchors_args.input, "COCO annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  anchors->add_option("--per-level", anchors_args.per_level,
                      "Anchors per detection level");
  anchors->add_option("--levels", anchors_args.levels, "Detection levels");
  anchors->add_option("--img-size", anchors_args.img_size,
                      "Square training resolution");
  anchors->add_option("--seed", anchors_args.seed, "Clustering seed");
  anchors->add_flag("--json", anchors_args.as_json, "Emit JSON");
  anchors->callback([&] { run_anchors(anchors_args); });

  // eval
  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Detection evaluation (mAP, F1)");
  eval->add_option("--gt", eval_args.gt,
                   "Ground truth: COCO JSON (aa) or label directory (rot, 3d)")
      ->required();
  eval->add_option("--det", eval_args.det,
                   "Detections: COCO JSON, YOLO directory (aa) or label "
                   "directory (rot, 3d)")
      ->required();
  eval->add_option("--geometry", eval_args.geometry, "aa, rot or 3d");
  eval->add_option("--iou", eval_args.iou, "Primary IoU threshold");
  eval->add_option("--interp", eval_args.interp, "coco101 or allpoints");
  eval->add_option("--classes", eval_args.classes,
                   "Comma list of class names or ids to evaluate");
  eval->add_option("--names", eval_args.names_file,
                   "Class name file for label directories (one per line)");
  eval->add_flag("--per-class", eval_args.per_class, "Print per-class table");
  eval->add_flag("--json", eval_args.as_json, "Emit JSON");
  eval->callback([&] { run_eval(eval_args); });

  // pcl
  auto* pcl = app.add_subcommand("pcl", "Point-cloud preprocessing");
  pcl->require_subcommand(1);

  PclArgs down_args;
  auto* down = pcl->add_subcommand("downsample", "Voxel-grid downsample");
  down->add_option("-i,--input", down_args.input, "Input cloud")
      ->required()
      ->check(CLI::ExistingFile);
  down->add_option("-o,--output", down_args.output, "Output cloud")
      ->required();
  down->add_option("--leaf", down_args.leaf, "Leaf size (meters)")->required();
  down->add_option("--encoding", down_args.encoding, "ascii or binary");
  down->callback([&] { run_pcl_downsample(down_args); });

  PclArgs crop_args;
  auto* crop = pcl->add_subcommand("crop", "Keep points inside a range");
  crop->add_option("-i,--input", crop_args.input, "Input cloud")
      ->required()
      ->check(CLI::ExistingFile);
  crop->add_option("-o,--output", crop_args.output, "Output cloud")
      ->required();
  crop->add_option("--min", crop_args.min_corner, "x,y,z lower corner")
      ->required();
  crop->add_option("--max", crop_args.max_corner, "x,y,z upper corner")
      ->required();
  crop->add_option("--encoding", crop_args.encoding, "ascii or binary");
  crop->callback([&] { run_pcl_crop(crop_args); });

  PclArgs vox_args;
  auto* vox = pcl->add_subcommand("voxelize", "Bucket points into a grid");
  vox->add_option("-i,--input", vox_args.input, "Input cloud")
      ->required()
      ->check(CLI::ExistingFile);
  vox->add_option("-o,--output", vox_args.output,
                  "Grid summary JSON (stdout when omitted)");
  vox->add_option("--voxel-size", vox_args.voxel_size,
                  "Voxel size: one value or x,y,z")
      ->required();
  vox->add_option("--min", vox_args.min_corner, "x,y,z lower corner")
      ->required();
  vox->add_option("--max", vox_args.max_corner, "x,y,z upper corner")
      ->required();
  vox->add_option("--max-points", vox_args.max_points,
                  "Stored points per voxel");
  vox->callback([&] { run_pcl_voxelize(vox_args); });

  // tubes
  TubesArgs tubes_args;
  auto* tubes = app.add_subcommand("tubes", "Link detections into tubes");
  tubes->add_option("--det", tubes_args.det,
                    "Detections: COCO JSON or YOLO label directory")
      ->required();
  tubes->add_option("-o,--output", tubes_args.output,
                    "Tube JSON (stdout when omitted)");
  tubes->add_option("--iou", tubes_args.iou, "Link IoU threshold");
  tubes->add_option("--max-gap", tubes_args.max_gap,
                    "Frames a tube may skip and stay alive");
  tubes->add_flag("--hungarian", tubes_args.hungarian,
                  "Optimal per-frame assignment");
  tubes->add_option("--img-width", tubes_args.img_width,
                    "Image width for YOLO label input");
  tubes->add_option("--img-height", tubes_args.img_height,
                    "Image height for YOLO label input");
  tubes->add_option("--names", tubes_args.names_file,
                    "Class name file for YOLO label input");
  tubes->add_option("--video", tubes_args.video, "Video tag for the output");
  tubes->callback([&] { run_tubes(tubes_args); });

  // graphs
  GraphsArgs graphs_args;
  auto* graphs =
      app.add_subcommand("graphs", "Local graphs over tube windows");
  graphs->add_option("--tubes", graphs_args.tubes, "Tube JSON")
      ->required()
      ->check(CLI::ExistingFile);
  graphs->add_option("-o,--output", graphs_args.output,
                     "Graph JSON (stdout when omitted)");
  graphs->add_option("--windows", graphs_args.windows,
                     "Comma list of window lengths");
  graphs->add_option("--stride", graphs_args.stride,
                     "Window stride (0 = window length)");
  graphs->add_option("--topology", graphs_args.topology,
                     "fully_connected, scene or scene_same_label");
  graphs->add_option("--frames", graphs_args.frames,
                     "Total frame count (0 = derive from tubes)");
  graphs->callback([&] { run_graphs(graphs_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const surgkit::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const surgkit::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const surgkit::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
