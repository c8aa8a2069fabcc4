#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "surgkit/types.hpp"

namespace surgkit {

// Frame identity needed to read label files back into a dataset.
struct FrameMeta {
  std::string id;
  double image_width = 0.0;
  double image_height = 0.0;
  std::string source;
};

// --- YOLO label text: "class cx cy w h" per line, normalized to [0,1],
// detections carry a trailing confidence as a sixth field. Floats are
// written with 6 decimal places, LF line endings. ---

std::string format_yolo_lines(const Frame& frame);
Frame parse_yolo_lines(std::string_view text, const FrameMeta& meta,
                       const std::string& source_name);

// One "<frame id>.txt" per frame. Frames with no annotations produce an
// empty file. Throws ValidationError when a frame lacks dimensions or has
// non axis-aligned geometry.
std::vector<std::filesystem::path> write_yolo_labels(
    const Dataset& dataset, const std::filesystem::path& dir);

// Inverse of write_yolo_labels: expects one label file per listed frame.
Dataset read_yolo_labels(const std::filesystem::path& dir,
                         const std::vector<FrameMeta>& frames,
                         const ClassCatalog& catalog);

// --- Rotated label text: "class cx cy w h theta" in absolute pixels,
// theta in radians; detections carry a trailing confidence field. ---

std::string format_rot_lines(const Frame& frame);
Frame parse_rot_lines(std::string_view text, const FrameMeta& meta,
                      const std::string& source_name);

std::vector<std::filesystem::path> write_rot_labels(
    const Dataset& dataset, const std::filesystem::path& dir);

// Reads every "*.txt" under dir; frame id = file stem. Rotated boxes live
// in pixel space, so no image dimensions are needed.
Dataset read_rot_labels(const std::filesystem::path& dir,
                        const ClassCatalog& catalog);

// File stems of every "*.txt" directly under dir, sorted ascending.
std::vector<std::string> list_label_stems(const std::filesystem::path& dir);

}  // namespace surgkit
