#include "surgkit/kitti.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "surgkit/error.hpp"
#include "surgkit/labels.hpp"

namespace surgkit {

namespace {

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

double json_number(const nlohmann::json& obj, const char* key,
                   const std::string& src, long record) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ParseError(src, record, std::string("missing numeric field '") + key + "'");
  }
  return it->get<double>();
}

void check_box(const Box3D& box, const std::string& src, long record) {
  for (double v : {box.x, box.y, box.z, box.dx, box.dy, box.dz, box.yaw}) {
    if (!std::isfinite(v)) {
      throw ParseError(src, record, "non-finite box parameter");
    }
  }
  if (box.dx <= 0 || box.dy <= 0 || box.dz <= 0) {
    throw ParseError(src, record, "box extents must be positive");
  }
}

}  // namespace

std::string format_kitti_lines(const Frame& frame, const ClassCatalog& catalog) {
  std::string out;
  for (const auto& ann : frame.annotations) {
    const Box3D* box = std::get_if<Box3D>(&ann.geometry);
    if (box == nullptr) {
      throw ValidationError("kitti write: frame '" + frame.id +
                            "' has non-3D geometry");
    }
    out += catalog.name_of(ann.class_id);
    for (double v : {box->x, box->y, box->z, box->dx, box->dy, box->dz, box->yaw}) {
      out += ' ';
      out += format_g9(v);
    }
    if (ann.score) {
      out += ' ';
      out += format_g9(*ann.score);
    }
    out += '\n';
  }
  return out;
}

std::string format_kitti_lines(const std::vector<Named3DBox>& boxes) {
  std::string out;
  for (const auto& entry : boxes) {
    out += entry.name;
    for (double v : {entry.box.x, entry.box.y, entry.box.z, entry.box.dx,
                     entry.box.dy, entry.box.dz, entry.box.yaw}) {
      out += ' ';
      out += format_g9(v);
    }
    if (entry.score) {
      out += ' ';
      out += format_g9(*entry.score);
    }
    out += '\n';
  }
  return out;
}

std::vector<Named3DBox> parse_kitti_lines(std::string_view text,
                                          const std::string& src) {
  std::vector<Named3DBox> boxes;
  std::istringstream iss{std::string(text)};
  std::string line;
  long record = 0;
  while (std::getline(iss, line)) {
    ++record;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream fields(line);
    Named3DBox entry;
    if (!(fields >> entry.name)) {
      throw ParseError(src, record, "missing class name");
    }
    double values[8];
    int n = 0;
    while (n < 8 && (fields >> values[n])) {
      ++n;
    }
    std::string extra;
    if (fields.clear(), fields >> extra) {
      throw ParseError(src, record, "trailing fields after box parameters");
    }
    if (n != 7 && n != 8) {
      throw ParseError(src, record,
                       "expected 7 box parameters (or 8 with confidence), got " +
                           std::to_string(n));
    }
    entry.box = {values[0], values[1], values[2], values[3],
                 values[4], values[5], values[6]};
    check_box(entry.box, src, record);
    if (n == 8) {
      if (values[7] < 0.0 || values[7] > 1.0) {
        throw ParseError(src, record, "confidence out of [0,1] range");
      }
      entry.score = values[7];
    }
    boxes.push_back(std::move(entry));
  }
  return boxes;
}

std::vector<std::filesystem::path> write_kitti_labels(
    const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  written.reserve(dataset.frames.size());
  for (const auto& frame : dataset.frames) {
    const auto path = dir / (frame.id + ".txt");
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << format_kitti_lines(frame, dataset.catalog);
    if (!out) {
      throw IoError("write failed on '" + path.string() + "'");
    }
    written.push_back(path);
  }
  return written;
}

std::vector<Named3DBox> parse_boxes3d_json(std::string_view text,
                                           const std::string& src) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(src, -1, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError(src, -1, "top-level value is not an object");
  }

  std::vector<Named3DBox> boxes;

  if (doc.contains("boxes")) {
    if (!doc["boxes"].is_array()) {
      throw ParseError(src, -1, "'boxes' is not an array");
    }
    long record = 0;
    for (const auto& item : doc["boxes"]) {
      if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
        throw ParseError(src, record, "box entry lacks a 'name'");
      }
      Named3DBox entry;
      entry.name = item["name"].get<std::string>();
      entry.box = {json_number(item, "x", src, record),
                   json_number(item, "y", src, record),
                   json_number(item, "z", src, record),
                   json_number(item, "dx", src, record),
                   json_number(item, "dy", src, record),
                   json_number(item, "dz", src, record),
                   item.contains("yaw") ? json_number(item, "yaw", src, record) : 0.0};
      check_box(entry.box, src, record);
      if (item.contains("score") && item["score"].is_number()) {
        entry.score = item["score"].get<double>();
      }
      boxes.push_back(std::move(entry));
      ++record;
    }
    return boxes;
  }

  if (doc.contains("figures")) {
    std::unordered_map<std::string, std::string> class_by_key;
    if (doc.contains("objects") && doc["objects"].is_array()) {
      for (const auto& obj : doc["objects"]) {
        if (obj.is_object() && obj.contains("key") && obj.contains("classTitle") &&
            obj["key"].is_string() && obj["classTitle"].is_string()) {
          class_by_key[obj["key"].get<std::string>()] =
              obj["classTitle"].get<std::string>();
        }
      }
    }
    if (!doc["figures"].is_array()) {
      throw ParseError(src, -1, "'figures' is not an array");
    }
    long record = 0;
    for (const auto& fig : doc["figures"]) {
      if (!fig.is_object() || !fig.contains("geometry") ||
          !fig["geometry"].is_object()) {
        throw ParseError(src, record, "figure lacks a 'geometry' object");
      }
      const auto& geom = fig["geometry"];
      for (const char* key : {"position", "dimensions", "rotation"}) {
        if (!geom.contains(key) || !geom[key].is_object()) {
          throw ParseError(src, record,
                           std::string("geometry lacks '") + key + "' object");
        }
      }
      Named3DBox entry;
      if (fig.contains("objectKey") && fig["objectKey"].is_string()) {
        auto it = class_by_key.find(fig["objectKey"].get<std::string>());
        if (it == class_by_key.end()) {
          throw ParseError(src, record, "figure references unknown object key");
        }
        entry.name = it->second;
      } else if (fig.contains("classTitle") && fig["classTitle"].is_string()) {
        entry.name = fig["classTitle"].get<std::string>();
      } else {
        throw ParseError(src, record, "figure lacks a class reference");
      }
      entry.box = {json_number(geom["position"], "x", src, record),
                   json_number(geom["position"], "y", src, record),
                   json_number(geom["position"], "z", src, record),
                   json_number(geom["dimensions"], "x", src, record),
                   json_number(geom["dimensions"], "y", src, record),
                   json_number(geom["dimensions"], "z", src, record),
                   json_number(geom["rotation"], "z", src, record)};
      check_box(entry.box, src, record);
      boxes.push_back(std::move(entry));
      ++record;
    }
    return boxes;
  }

  throw ParseError(src, -1, "expected a 'boxes' or 'figures' array");
}

Dataset read_kitti_labels(const std::filesystem::path& dir,
                          const ClassCatalog& catalog) {
  Dataset ds;
  ds.catalog = catalog;
  for (const auto& stem : list_label_stems(dir)) {
    const auto path = dir / (stem + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();

    Frame frame;
    frame.id = stem;
    for (auto& named : parse_kitti_lines(buffer.str(), path.string())) {
      Annotation ann;
      ann.class_id = resolve_class(catalog, named.name).id;
      ann.geometry = named.box;
      ann.score = named.score;
      frame.annotations.push_back(std::move(ann));
    }
    ds.frames.push_back(std::move(frame));
  }
  validate_dataset(ds);
  return ds;
}

}  // namespace surgkit
