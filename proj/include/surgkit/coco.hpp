#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "surgkit/types.hpp"

namespace surgkit {

// Side output of parse_coco: how input categories were remapped and what
// was skipped, for the machine-readable conversion report.
struct CocoParseInfo {
  // Original COCO category id -> contiguous catalog id (sorted by original id).
  std::map<long, int> category_id_map;
  std::map<int, std::size_t> instances_per_class;
  std::size_t images = 0;
  std::size_t annotations = 0;
  std::size_t segmentation_fields_ignored = 0;
  std::size_t boxes_clamped = 0;  // boxes pulled back inside image bounds
};

// Parses a COCO-style JSON document. One Frame per image (id = file name
// stem), bbox [x, y, w, h] converted to corner form and clamped to image
// bounds. Category ids need not be contiguous; they are remapped to a
// catalog sorted by original id.
//
// Throws ParseError on malformed documents, dangling image/category
// references, negative bbox dimensions, or duplicate frame ids.
Dataset parse_coco(std::string_view text, const std::string& source_name,
                   CocoParseInfo* info = nullptr);

Dataset read_coco_file(const std::filesystem::path& path,
                       CocoParseInfo* info = nullptr);

// Strip directory and extension: "images/frame_0001.jpg" -> "frame_0001".
std::string file_name_stem(std::string_view file_name);

}  // namespace surgkit
