#include "surgkit/coco.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "surgkit/error.hpp"

namespace surgkit {

namespace {

using nlohmann::json;

double require_number(const json& obj, const char* key, const std::string& src,
                      long record) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ParseError(src, record, std::string("missing numeric field '") + key + "'");
  }
  return it->get<double>();
}

}  // namespace

std::string file_name_stem(std::string_view file_name) {
  const auto slash = file_name.find_last_of("/\\");
  if (slash != std::string_view::npos) {
    file_name.remove_prefix(slash + 1);
  }
  const auto dot = file_name.find_last_of('.');
  if (dot != std::string_view::npos && dot > 0) {
    file_name = file_name.substr(0, dot);
  }
  return std::string(file_name);
}

Dataset parse_coco(std::string_view text, const std::string& source_name,
                   CocoParseInfo* info) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source_name, -1, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError(source_name, -1, "top-level value is not an object");
  }
  for (const char* key : {"images", "annotations", "categories"}) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw ParseError(source_name, -1,
                       std::string("missing array field '") + key + "'");
    }
  }

  // Categories, sorted by original id, become contiguous catalog ids.
  std::vector<std::pair<long, std::string>> categories;
  long cat_record = 0;
  for (const auto& cat : doc["categories"]) {
    if (!cat.is_object() || !cat.contains("id") || !cat.contains("name") ||
        !cat["name"].is_string()) {
      throw ParseError(source_name, cat_record, "malformed category entry");
    }
    categories.emplace_back(cat["id"].get<long>(), cat["name"].get<std::string>());
    ++cat_record;
  }
  std::sort(categories.begin(), categories.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::unordered_map<long, int> cat_map;
  std::vector<std::string> names;
  for (const auto& [orig_id, name] : categories) {
    if (cat_map.count(orig_id) != 0) {
      throw ParseError(source_name, -1,
                       "duplicate category id " + std::to_string(orig_id));
    }
    cat_map[orig_id] = static_cast<int>(names.size());
    names.push_back(name);
  }

  Dataset ds;
  try {
    ds.catalog = ClassCatalog(names);
  } catch (const ValidationError& e) {
    throw ParseError(source_name, -1, e.what());
  }

  // Images -> frames, keyed by COCO image id.
  std::unordered_map<long, std::size_t> frame_index;
  std::unordered_set<std::string> seen_ids;
  long img_record = 0;
  for (const auto& img : doc["images"]) {
    if (!img.is_object() || !img.contains("id") || !img.contains("file_name") ||
        !img["file_name"].is_string()) {
      throw ParseError(source_name, img_record, "malformed image entry");
    }
    Frame frame;
    frame.id = file_name_stem(img["file_name"].get<std::string>());
    frame.image_width = require_number(img, "width", source_name, img_record);
    frame.image_height = require_number(img, "height", source_name, img_record);
    if (frame.image_width <= 0 || frame.image_height <= 0) {
      throw ParseError(source_name, img_record, "non-positive image dimensions");
    }
    if (img.contains("source") && img["source"].is_string()) {
      frame.source = img["source"].get<std::string>();
    }
    if (!seen_ids.insert(frame.id).second) {
      throw ParseError(source_name, img_record,
                       "duplicate frame id '" + frame.id + "'");
    }
    const long image_id = img["id"].get<long>();
    if (frame_index.count(image_id) != 0) {
      throw ParseError(source_name, img_record,
                       "duplicate image id " + std::to_string(image_id));
    }
    frame_index[image_id] = ds.frames.size();
    ds.frames.push_back(std::move(frame));
    ++img_record;
  }

  CocoParseInfo local_info;
  local_info.images = ds.frames.size();
  for (const auto& [orig, mapped] : cat_map) {
    local_info.category_id_map[orig] = mapped;
  }

  long ann_record = 0;
  for (const auto& ann : doc["annotations"]) {
    if (!ann.is_object() || !ann.contains("image_id") ||
        !ann.contains("category_id") || !ann.contains("bbox") ||
        !ann["bbox"].is_array() || ann["bbox"].size() != 4) {
      throw ParseError(source_name, ann_record, "malformed annotation entry");
    }
    const long image_id = ann["image_id"].get<long>();
    auto frame_it = frame_index.find(image_id);
    if (frame_it == frame_index.end()) {
      throw ParseError(source_name, ann_record,
                       "annotation references absent image id " +
                           std::to_string(image_id));
    }
    const long category_id = ann["category_id"].get<long>();
    auto cat_it = cat_map.find(category_id);
    if (cat_it == cat_map.end()) {
      throw ParseError(source_name, ann_record,
                       "annotation references absent category id " +
                           std::to_string(category_id));
    }
    double bbox[4];
    for (int i = 0; i < 4; ++i) {
      if (!ann["bbox"][i].is_number()) {
        throw ParseError(source_name, ann_record, "non-numeric bbox field");
      }
      bbox[i] = ann["bbox"][i].get<double>();
    }
    if (bbox[2] < 0 || bbox[3] < 0) {
      throw ParseError(source_name, ann_record, "negative bbox dimensions");
    }
    if (ann.contains("segmentation")) {
      ++local_info.segmentation_fields_ignored;
    }

    Frame& frame = ds.frames[frame_it->second];
    BoxAA box{bbox[0], bbox[1], bbox[0] + bbox[2], bbox[1] + bbox[3]};
    BoxAA clamped{std::clamp(box.x_min, 0.0, frame.image_width),
                  std::clamp(box.y_min, 0.0, frame.image_height),
                  std::clamp(box.x_max, 0.0, frame.image_width),
                  std::clamp(box.y_max, 0.0, frame.image_height)};
    if (clamped.x_min != box.x_min || clamped.y_min != box.y_min ||
        clamped.x_max != box.x_max || clamped.y_max != box.y_max) {
      ++local_info.boxes_clamped;
    }

    Annotation a;
    a.class_id = cat_it->second;
    a.geometry = clamped;
    if (ann.contains("score") && ann["score"].is_number()) {
      a.score = ann["score"].get<double>();
    }
    frame.annotations.push_back(a);
    ++local_info.instances_per_class[a.class_id];
    ++local_info.annotations;
    ++ann_record;
  }

  if (info != nullptr) {
    *info = std::move(local_info);
  }
  return ds;
}

Dataset read_coco_file(const std::filesystem::path& path, CocoParseInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_coco(buffer.str(), path.string(), info);
}

}  // namespace surgkit
