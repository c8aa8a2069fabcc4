#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "surgkit/pointcloud.hpp"

namespace surgkit {

enum class CloudFormat { Ply, Pcd, Bin };
enum class CloudEncoding { Ascii, Binary };

// Maps ".ply"/".pcd"/".bin" (case-insensitive); throws ValidationError
// on anything else.
CloudFormat cloud_format_from_extension(const std::filesystem::path& path);

// In-memory parsers/writers. `bytes` is the raw file content; `source_name`
// names the input in error messages.
//
// PLY: ascii and binary_little_endian 1.0; needs a vertex element with
// float/double x, y, z and optional intensity; other scalar properties are
// skipped, list properties are rejected.
// PCD: v0.7, FIELDS exactly "x y z" or "x y z intensity" with TYPE F
// SIZE 4 COUNT 1, DATA ascii or binary.
// Bin: headerless little-endian float32 quadruples (x, y, z, intensity).
// Missing intensity reads as 0.
PointCloud parse_ply(std::string_view bytes, const std::string& source_name);
PointCloud parse_pcd(std::string_view bytes, const std::string& source_name);
PointCloud parse_bin(std::string_view bytes, const std::string& source_name);

std::string format_ply(const PointCloud& cloud, CloudEncoding encoding);
std::string format_pcd(const PointCloud& cloud, CloudEncoding encoding);
std::string format_bin(const PointCloud& cloud);

PointCloud read_pointcloud(const std::filesystem::path& path, CloudFormat format);
PointCloud read_pointcloud(const std::filesystem::path& path);  // by extension

void write_pointcloud(const std::filesystem::path& path, const PointCloud& cloud,
                      CloudFormat format,
                      CloudEncoding encoding = CloudEncoding::Ascii);

}  // namespace surgkit
