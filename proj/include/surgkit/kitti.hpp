#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surgkit/types.hpp"

namespace surgkit {

// One 3D box with its class name, as read from label text or annotation
// JSON before names are resolved against a catalog.
struct Named3DBox {
  std::string name;
  Box3D box;
  std::optional<double> score;
};

// --- KITTI-style label text: "name x y z dx dy dz yaw" per line (minimal
// 8-field layout; detections carry a trailing confidence). Numbers use
// shortest-form %.9g formatting. ---

std::string format_kitti_lines(const Frame& frame, const ClassCatalog& catalog);
std::string format_kitti_lines(const std::vector<Named3DBox>& boxes);
std::vector<Named3DBox> parse_kitti_lines(std::string_view text,
                                          const std::string& source_name);

// One "<frame id>.txt" per frame; every annotation must be a Box3D.
std::vector<std::filesystem::path> write_kitti_labels(
    const Dataset& dataset, const std::filesystem::path& dir);

// Reads every "*.txt" under dir; frame id = file stem, class names resolved
// against the catalog.
Dataset read_kitti_labels(const std::filesystem::path& dir,
                          const ClassCatalog& catalog);

// --- 3D annotation JSON -> named boxes. Accepts either the flat layout
//   {"boxes": [{"name", "x", "y", "z", "dx", "dy", "dz", "yaw"}, ...]}
// or the annotation-platform export layout
//   {"objects": [{"key", "classTitle"}, ...],
//    "figures": [{"objectKey", "geometry": {"position": {x,y,z},
//                 "dimensions": {x,y,z}, "rotation": {x,y,z}}}, ...]}
// where rotation.z is taken as yaw. ---
std::vector<Named3DBox> parse_boxes3d_json(std::string_view text,
                                           const std::string& source_name);

}  // namespace surgkit
