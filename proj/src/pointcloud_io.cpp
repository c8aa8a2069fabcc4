#include "surgkit/pointcloud_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "surgkit/error.hpp"

namespace surgkit {

namespace {

uint32_t load_le32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint64_t load_le64(const unsigned char* p) {
  return static_cast<uint64_t>(load_le32(p)) |
         (static_cast<uint64_t>(load_le32(p + 4)) << 32);
}

void store_le32(uint32_t v, std::string& out) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void append_float_le(float f, std::string& out) {
  store_le32(std::bit_cast<uint32_t>(f), out);
}

// 9 significant digits: enough for an exact float32 text round trip.
std::string format_float9(float v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  return buf;
}

float parse_float_token(const std::string& tok, const std::string& src, long record) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const float v = std::strtof(begin, &end);
  if (end != begin + tok.size()) {
    throw ParseError(src, record, "non-numeric value '" + tok + "'");
  }
  return v;
}

struct AsciiTokens {
  std::istringstream stream;
  long consumed = 0;

  explicit AsciiTokens(std::string body) : stream(std::move(body)) {}

  bool next(std::string& tok) {
    if (stream >> tok) {
      ++consumed;
      return true;
    }
    return false;
  }
};

std::size_t ply_type_size(const std::string& type, const std::string& src) {
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") {
    return 1;
  }
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") {
    return 2;
  }
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32" ||
      type == "float" || type == "float32") {
    return 4;
  }
  if (type == "double" || type == "float64") {
    return 8;
  }
  throw ParseError(src, -1, "unsupported PLY property type '" + type + "'");
}

bool is_float_type(const std::string& type) {
  return type == "float" || type == "float32" || type == "double" ||
         type == "float64";
}

}  // namespace

CloudFormat cloud_format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".ply") {
    return CloudFormat::Ply;
  }
  if (ext == ".pcd") {
    return CloudFormat::Pcd;
  }
  if (ext == ".bin") {
    return CloudFormat::Bin;
  }
  throw ValidationError("unrecognized point-cloud extension '" + ext + "'");
}

PointCloud parse_ply(std::string_view bytes, const std::string& src) {
  // Header is line-oriented text up to "end_header".
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    if (pos >= bytes.size()) {
      throw ParseError(src, -1, "unexpected end of header");
    }
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) {
      eol = bytes.size();
    }
    std::string line(bytes.substr(pos, eol - pos));
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    return line;
  };

  if (next_line() != "ply") {
    throw ParseError(src, 1, "missing 'ply' magic line");
  }

  bool binary = false;
  bool format_seen = false;
  std::size_t vertex_count = 0;
  bool in_vertex_element = false;
  bool vertex_seen = false;
  struct Property {
    std::string name;
    std::string type;
    std::size_t size;
  };
  std::vector<Property> props;
  long header_line = 1;

  for (;;) {
    const std::string line = next_line();
    ++header_line;
    if (line == "end_header") {
      break;
    }
    std::istringstream iss(line);
    std::string word;
    iss >> word;
    if (word == "comment" || word == "obj_info" || word.empty()) {
      continue;
    }
    if (word == "format") {
      std::string fmt, version;
      iss >> fmt >> version;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        throw ParseError(src, header_line, "unsupported PLY format '" + fmt + "'");
      }
      format_seen = true;
      continue;
    }
    if (word == "element") {
      std::string name;
      std::size_t count = 0;
      iss >> name >> count;
      if (name == "vertex") {
        vertex_count = count;
        in_vertex_element = true;
        vertex_seen = true;
      } else {
        if (!vertex_seen) {
          // Cannot skip unknown element data that precedes the vertices.
          throw ParseError(src, header_line,
                           "element '" + name + "' precedes vertex element");
        }
        in_vertex_element = false;
      }
      continue;
    }
    if (word == "property") {
      if (!in_vertex_element) {
        continue;  // properties of trailing elements are never read
      }
      std::string type;
      iss >> type;
      if (type == "list") {
        throw ParseError(src, header_line, "list properties are unsupported");
      }
      std::string name;
      iss >> name;
      props.push_back({name, type, ply_type_size(type, src)});
      continue;
    }
    throw ParseError(src, header_line, "unrecognized header line '" + line + "'");
  }

  if (!format_seen) {
    throw ParseError(src, -1, "missing 'format' line");
  }
  if (!vertex_seen) {
    throw ParseError(src, -1, "missing vertex element");
  }

  int ix = -1, iy = -1, iz = -1, ii = -1;
  for (std::size_t p = 0; p < props.size(); ++p) {
    if (props[p].name == "x") ix = static_cast<int>(p);
    if (props[p].name == "y") iy = static_cast<int>(p);
    if (props[p].name == "z") iz = static_cast<int>(p);
    if (props[p].name == "intensity") ii = static_cast<int>(p);
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw ParseError(src, -1, "vertex element lacks x/y/z properties");
  }
  for (int idx : {ix, iy, iz}) {
    if (!is_float_type(props[static_cast<std::size_t>(idx)].type)) {
      throw ParseError(src, -1, "x/y/z must be float or double properties");
    }
  }
  if (ii >= 0 && !is_float_type(props[static_cast<std::size_t>(ii)].type)) {
    throw ParseError(src, -1, "intensity must be a float or double property");
  }

  PointCloud cloud;
  cloud.source_id = src;
  cloud.points.reserve(vertex_count);

  if (binary) {
    std::size_t row_size = 0;
    for (const auto& prop : props) {
      row_size += prop.size;
    }
    if (bytes.size() - pos < vertex_count * row_size) {
      throw ParseError(src, -1,
                       "truncated binary payload: declared " +
                           std::to_string(vertex_count) + " vertices");
    }
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
    for (std::size_t v = 0; v < vertex_count; ++v) {
      const unsigned char* row = data + v * row_size;
      auto read_prop = [&](int idx) -> float {
        std::size_t offset = 0;
        for (int p = 0; p < idx; ++p) {
          offset += props[static_cast<std::size_t>(p)].size;
        }
        const Property& prop = props[static_cast<std::size_t>(idx)];
        if (prop.size == 8) {
          return static_cast<float>(std::bit_cast<double>(load_le64(row + offset)));
        }
        return std::bit_cast<float>(load_le32(row + offset));
      };
      PointXYZI p;
      p.x = read_prop(ix);
      p.y = read_prop(iy);
      p.z = read_prop(iz);
      p.intensity = ii >= 0 ? read_prop(ii) : 0.0f;
      cloud.points.push_back(p);
    }
  } else {
    AsciiTokens tokens{std::string(bytes.substr(pos))};
    std::string tok;
    for (std::size_t v = 0; v < vertex_count; ++v) {
      std::vector<float> row(props.size(), 0.0f);
      for (std::size_t p = 0; p < props.size(); ++p) {
        if (!tokens.next(tok)) {
          throw ParseError(src, -1,
                           "vertex data ends early: declared " +
                               std::to_string(vertex_count) + " vertices, found " +
                               std::to_string(v));
        }
        row[p] = parse_float_token(tok, src, static_cast<long>(v));
      }
      PointXYZI point;
      point.x = row[static_cast<std::size_t>(ix)];
      point.y = row[static_cast<std::size_t>(iy)];
      point.z = row[static_cast<std::size_t>(iz)];
      point.intensity = ii >= 0 ? row[static_cast<std::size_t>(ii)] : 0.0f;
      cloud.points.push_back(point);
    }
  }
  return cloud;
}

PointCloud parse_pcd(std::string_view bytes, const std::string& src) {
  std::size_t pos = 0;
  long header_line = 0;
  auto next_line = [&]() -> std::string {
    if (pos >= bytes.size()) {
      throw ParseError(src, header_line, "unexpected end of header");
    }
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) {
      eol = bytes.size();
    }
    std::string line(bytes.substr(pos, eol - pos));
    pos = eol + 1;
    ++header_line;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    return line;
  };

  std::vector<std::string> fields;
  std::vector<std::string> types;
  std::vector<int> sizes;
  std::vector<int> counts;
  long declared_points = -1;
  long width = -1, height = -1;
  std::string data_mode;

  while (data_mode.empty()) {
    std::string line = next_line();
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::istringstream iss(line);
    std::string key;
    iss >> key;
    if (key == "VERSION") {
      continue;  // accept any 0.x header version
    } else if (key == "FIELDS") {
      std::string f;
      while (iss >> f) fields.push_back(f);
    } else if (key == "SIZE") {
      int v;
      while (iss >> v) sizes.push_back(v);
    } else if (key == "TYPE") {
      std::string t;
      while (iss >> t) types.push_back(t);
    } else if (key == "COUNT") {
      int v;
      while (iss >> v) counts.push_back(v);
    } else if (key == "WIDTH") {
      iss >> width;
    } else if (key == "HEIGHT") {
      iss >> height;
    } else if (key == "VIEWPOINT") {
      continue;
    } else if (key == "POINTS") {
      iss >> declared_points;
    } else if (key == "DATA") {
      iss >> data_mode;
    } else {
      throw ParseError(src, header_line, "unrecognized PCD header key '" + key + "'");
    }
  }

  const bool has_intensity = fields.size() == 4;
  if (!((fields.size() == 3 || has_intensity) && fields[0] == "x" &&
        fields[1] == "y" && fields[2] == "z" &&
        (!has_intensity || fields[3] == "intensity"))) {
    throw ParseError(src, -1,
                     "unsupported field layout (expected x y z [intensity])");
  }
  if (types.size() != fields.size() || sizes.size() != fields.size()) {
    throw ParseError(src, -1, "FIELDS/SIZE/TYPE arity mismatch");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (types[i] != "F" || sizes[i] != 4) {
      throw ParseError(src, -1, "unsupported field layout (need TYPE F SIZE 4)");
    }
    if (!counts.empty() && counts[i] != 1) {
      throw ParseError(src, -1, "unsupported field layout (need COUNT 1)");
    }
  }
  if (declared_points < 0) {
    declared_points = (width >= 0 && height >= 0) ? width * height : -1;
  }
  if (declared_points < 0) {
    throw ParseError(src, -1, "missing POINTS (or WIDTH/HEIGHT) declaration");
  }

  const std::size_t n = static_cast<std::size_t>(declared_points);
  const std::size_t n_fields = fields.size();
  PointCloud cloud;
  cloud.source_id = src;
  cloud.points.reserve(n);

  if (data_mode == "ascii") {
    AsciiTokens tokens{std::string(bytes.substr(pos))};
    std::string tok;
    for (std::size_t v = 0; v < n; ++v) {
      float row[4] = {0, 0, 0, 0};
      for (std::size_t f = 0; f < n_fields; ++f) {
        if (!tokens.next(tok)) {
          throw ParseError(src, -1,
                           "count mismatch: declared " + std::to_string(n) +
                               " points, found " + std::to_string(v));
        }
        row[f] = parse_float_token(tok, src, static_cast<long>(v));
      }
      cloud.points.push_back({row[0], row[1], row[2], has_intensity ? row[3] : 0.0f});
    }
    if (tokens.next(tok)) {
      throw ParseError(src, -1,
                       "count mismatch: data continues past declared " +
                           std::to_string(n) + " points");
    }
  } else if (data_mode == "binary") {
    const std::size_t needed = n * n_fields * 4;
    const std::size_t available = bytes.size() - pos;
    if (available < needed) {
      throw ParseError(src, -1,
                       "count mismatch: binary payload holds " +
                           std::to_string(available / (n_fields * 4)) +
                           " of declared " + std::to_string(n) + " points");
    }
    if (available > needed) {
      throw ParseError(src, -1, "count mismatch: binary payload has trailing bytes");
    }
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
    for (std::size_t v = 0; v < n; ++v) {
      const unsigned char* row = data + v * n_fields * 4;
      PointXYZI p;
      p.x = std::bit_cast<float>(load_le32(row));
      p.y = std::bit_cast<float>(load_le32(row + 4));
      p.z = std::bit_cast<float>(load_le32(row + 8));
      p.intensity = has_intensity ? std::bit_cast<float>(load_le32(row + 12)) : 0.0f;
      cloud.points.push_back(p);
    }
  } else {
    throw ParseError(src, -1, "unsupported DATA mode '" + data_mode + "'");
  }
  return cloud;
}

PointCloud parse_bin(std::string_view bytes, const std::string& src) {
  if (bytes.size() % 16 != 0) {
    throw ParseError(src, -1,
                     "truncated payload: " + std::to_string(bytes.size()) +
                         " bytes is not a multiple of 16");
  }
  PointCloud cloud;
  cloud.source_id = src;
  const std::size_t n = bytes.size() / 16;
  cloud.points.reserve(n);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t v = 0; v < n; ++v) {
    const unsigned char* row = data + v * 16;
    cloud.points.push_back({std::bit_cast<float>(load_le32(row)),
                            std::bit_cast<float>(load_le32(row + 4)),
                            std::bit_cast<float>(load_le32(row + 8)),
                            std::bit_cast<float>(load_le32(row + 12))});
  }
  return cloud;
}

std::string format_ply(const PointCloud& cloud, CloudEncoding encoding) {
  std::string out = "ply\n";
  out += encoding == CloudEncoding::Binary ? "format binary_little_endian 1.0\n"
                                           : "format ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.points.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "property float intensity\n";
  out += "end_header\n";
  if (encoding == CloudEncoding::Binary) {
    out.reserve(out.size() + cloud.points.size() * 16);
    for (const auto& p : cloud.points) {
      append_float_le(p.x, out);
      append_float_le(p.y, out);
      append_float_le(p.z, out);
      append_float_le(p.intensity, out);
    }
  } else {
    for (const auto& p : cloud.points) {
      out += format_float9(p.x) + " " + format_float9(p.y) + " " +
             format_float9(p.z) + " " + format_float9(p.intensity) + "\n";
    }
  }
  return out;
}

std::string format_pcd(const PointCloud& cloud, CloudEncoding encoding) {
  const std::string n = std::to_string(cloud.points.size());
  std::string out = "# .PCD v0.7 - Point Cloud Data file format\n";
  out += "VERSION 0.7\n";
  out += "FIELDS x y z intensity\n";
  out += "SIZE 4 4 4 4\n";
  out += "TYPE F F F F\n";
  out += "COUNT 1 1 1 1\n";
  out += "WIDTH " + n + "\n";
  out += "HEIGHT 1\n";
  out += "VIEWPOINT 0 0 0 1 0 0 0\n";
  out += "POINTS " + n + "\n";
  if (encoding == CloudEncoding::Binary) {
    out += "DATA binary\n";
    out.reserve(out.size() + cloud.points.size() * 16);
    for (const auto& p : cloud.points) {
      append_float_le(p.x, out);
      append_float_le(p.y, out);
      append_float_le(p.z, out);
      append_float_le(p.intensity, out);
    }
  } else {
    out += "DATA ascii\n";
    for (const auto& p : cloud.points) {
      out += format_float9(p.x) + " " + format_float9(p.y) + " " +
             format_float9(p.z) + " " + format_float9(p.intensity) + "\n";
    }
  }
  return out;
}

std::string format_bin(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.points.size() * 16);
  for (const auto& p : cloud.points) {
    append_float_le(p.x, out);
    append_float_le(p.y, out);
    append_float_le(p.z, out);
    append_float_le(p.intensity, out);
  }
  return out;
}

PointCloud read_pointcloud(const std::filesystem::path& path, CloudFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  switch (format) {
    case CloudFormat::Ply:
      return parse_ply(bytes, path.string());
    case CloudFormat::Pcd:
      return parse_pcd(bytes, path.string());
    case CloudFormat::Bin:
      return parse_bin(bytes, path.string());
  }
  throw ValidationError("unknown cloud format");
}

PointCloud read_pointcloud(const std::filesystem::path& path) {
  return read_pointcloud(path, cloud_format_from_extension(path));
}

void write_pointcloud(const std::filesystem::path& path, const PointCloud& cloud,
                      CloudFormat format, CloudEncoding encoding) {
  std::string bytes;
  switch (format) {
    case CloudFormat::Ply:
      bytes = format_ply(cloud, encoding);
      break;
    case CloudFormat::Pcd:
      bytes = format_pcd(cloud, encoding);
      break;
    case CloudFormat::Bin:
      bytes = format_bin(cloud);
      break;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed on '" + path.string() + "'");
  }
}

}  // namespace surgkit
