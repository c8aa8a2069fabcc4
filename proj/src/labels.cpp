#include "surgkit/labels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "surgkit/error.hpp"
#include "surgkit/geometry.hpp"

namespace surgkit {

namespace {

std::string format_fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<double> parse_fields(const std::string& line, const std::string& src,
                                 long record) {
  std::istringstream iss(line);
  std::vector<double> fields;
  std::string tok;
  while (iss >> tok) {
    try {
      std::size_t pos = 0;
      fields.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) {
        throw std::invalid_argument(tok);
      }
    } catch (const std::exception&) {
      throw ParseError(src, record, "non-numeric field '" + tok + "'");
    }
  }
  return fields;
}

int parse_class_id(double v, const std::string& src, long record) {
  if (v < 0 || v != std::floor(v)) {
    throw ParseError(src, record, "class id must be a non-negative integer");
  }
  return static_cast<int>(v);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) {
    throw IoError("write failed on '" + path.string() + "'");
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string format_yolo_lines(const Frame& frame) {
  if (frame.image_width <= 0 || frame.image_height <= 0) {
    throw ValidationError("yolo write: frame '" + frame.id +
                          "' has unknown image dimensions");
  }
  std::string out;
  for (const auto& ann : frame.annotations) {
    const BoxAA* box = std::get_if<BoxAA>(&ann.geometry);
    if (box == nullptr) {
      throw ValidationError("yolo write: frame '" + frame.id +
                            "' has non axis-aligned geometry");
    }
    const double cx = (box->x_min + box->x_max) / 2.0 / frame.image_width;
    const double cy = (box->y_min + box->y_max) / 2.0 / frame.image_height;
    const double w = box->width() / frame.image_width;
    const double h = box->height() / frame.image_height;
    out += std::to_string(ann.class_id);
    out += ' ';
    out += format_fixed6(cx);
    out += ' ';
    out += format_fixed6(cy);
    out += ' ';
    out += format_fixed6(w);
    out += ' ';
    out += format_fixed6(h);
    if (ann.score) {
      out += ' ';
      out += format_fixed6(*ann.score);
    }
    out += '\n';
  }
  return out;
}

Frame parse_yolo_lines(std::string_view text, const FrameMeta& meta,
                       const std::string& source_name) {
  if (meta.image_width <= 0 || meta.image_height <= 0) {
    throw ValidationError("yolo read: frame '" + meta.id +
                          "' has unknown image dimensions");
  }
  Frame frame;
  frame.id = meta.id;
  frame.image_width = meta.image_width;
  frame.image_height = meta.image_height;
  frame.source = meta.source;

  std::istringstream iss{std::string(text)};
  std::string line;
  long record = 0;
  while (std::getline(iss, line)) {
    ++record;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    auto fields = parse_fields(line, source_name, record);
    if (fields.size() != 5 && fields.size() != 6) {
      throw ParseError(source_name, record,
                       "expected 5 fields (or 6 with confidence), got " +
                           std::to_string(fields.size()));
    }
    Annotation ann;
    ann.class_id = parse_class_id(fields[0], source_name, record);
    const double cx = fields[1], cy = fields[2], w = fields[3], h = fields[4];
    for (double v : {cx, cy, w, h}) {
      if (v < 0.0 || v > 1.0) {
        throw ParseError(source_name, record,
                         "normalized value out of [0,1] range");
      }
    }
    BoxAA box{(cx - w / 2.0) * meta.image_width, (cy - h / 2.0) * meta.image_height,
              (cx + w / 2.0) * meta.image_width, (cy + h / 2.0) * meta.image_height};
    box.x_min = std::clamp(box.x_min, 0.0, meta.image_width);
    box.y_min = std::clamp(box.y_min, 0.0, meta.image_height);
    box.x_max = std::clamp(box.x_max, 0.0, meta.image_width);
    box.y_max = std::clamp(box.y_max, 0.0, meta.image_height);
    ann.geometry = box;
    if (fields.size() == 6) {
      if (fields[5] < 0.0 || fields[5] > 1.0) {
        throw ParseError(source_name, record, "confidence out of [0,1] range");
      }
      ann.score = fields[5];
    }
    frame.annotations.push_back(ann);
  }
  return frame;
}

std::vector<std::filesystem::path> write_yolo_labels(
    const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  written.reserve(dataset.frames.size());
  for (const auto& frame : dataset.frames) {
    const auto path = dir / (frame.id + ".txt");
    write_text_file(path, format_yolo_lines(frame));
    written.push_back(path);
  }
  return written;
}

Dataset read_yolo_labels(const std::filesystem::path& dir,
                         const std::vector<FrameMeta>& frames,
                         const ClassCatalog& catalog) {
  Dataset ds;
  ds.catalog = catalog;
  for (const auto& meta : frames) {
    const auto path = dir / (meta.id + ".txt");
    if (!std::filesystem::exists(path)) {
      throw IoError("missing label file '" + path.string() + "' for frame '" +
                    meta.id + "'");
    }
    ds.frames.push_back(parse_yolo_lines(read_text_file(path), meta, path.string()));
  }
  validate_dataset(ds);
  return ds;
}

std::string format_rot_lines(const Frame& frame) {
  std::string out;
  for (const auto& ann : frame.annotations) {
    const BoxRot* box = std::get_if<BoxRot>(&ann.geometry);
    if (box == nullptr) {
      throw ValidationError("rot write: frame '" + frame.id +
                            "' has non-rotated geometry");
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f %.9g", ann.class_id,
                  box->cx, box->cy, box->w, box->h, box->theta);
    out += buf;
    if (ann.score) {
      out += ' ';
      out += format_fixed6(*ann.score);
    }
    out += '\n';
  }
  return out;
}

Frame parse_rot_lines(std::string_view text, const FrameMeta& meta,
                      const std::string& source_name) {
  Frame frame;
  frame.id = meta.id;
  frame.image_width = meta.image_width;
  frame.image_height = meta.image_height;
  frame.source = meta.source;

  std::istringstream iss{std::string(text)};
  std::string line;
  long record = 0;
  while (std::getline(iss, line)) {
    ++record;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    auto fields = parse_fields(line, source_name, record);
    if (fields.size() != 6 && fields.size() != 7) {
      throw ParseError(source_name, record,
                       "expected 6 fields (or 7 with confidence), got " +
                           std::to_string(fields.size()));
    }
    Annotation ann;
    ann.class_id = parse_class_id(fields[0], source_name, record);
    if (fields[3] <= 0 || fields[4] <= 0) {
      throw ParseError(source_name, record, "box sides must be positive");
    }
    ann.geometry =
        BoxRot{fields[1], fields[2], fields[3], fields[4], normalize_theta(fields[5])};
    if (fields.size() == 7) {
      if (fields[6] < 0.0 || fields[6] > 1.0) {
        throw ParseError(source_name, record, "confidence out of [0,1] range");
      }
      ann.score = fields[6];
    }
    frame.annotations.push_back(ann);
  }
  return frame;
}

std::vector<std::filesystem::path> write_rot_labels(
    const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  written.reserve(dataset.frames.size());
  for (const auto& frame : dataset.frames) {
    const auto path = dir / (frame.id + ".txt");
    write_text_file(path, format_rot_lines(frame));
    written.push_back(path);
  }
  return written;
}

Dataset read_rot_labels(const std::filesystem::path& dir,
                        const ClassCatalog& catalog) {
  Dataset ds;
  ds.catalog = catalog;
  for (const auto& stem : list_label_stems(dir)) {
    const auto path = dir / (stem + ".txt");
    FrameMeta meta;
    meta.id = stem;
    ds.frames.push_back(
        parse_rot_lines(read_text_file(path), meta, path.string()));
  }
  validate_dataset(ds);
  return ds;
}

std::vector<std::string> list_label_stems(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("not a directory: '" + dir.string() + "'");
  }
  std::vector<std::string> stems;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      stems.push_back(entry.path().stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

}  // namespace surgkit
