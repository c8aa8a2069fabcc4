#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "surgkit/types.hpp"

namespace surgkit {

// 32-bit fields throughout: the on-disk formats (bin, PCD/PLY float
// properties) are float32 and round trips must be bit-exact.
struct PointXYZI {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float intensity = 0.0f;
};

struct PointCloud {
  std::vector<PointXYZI> points;
  std::string source_id;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Axis-aligned region of interest, half-open on every axis: a point at
// the max face is outside.
struct RangeSpec {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double z_min = 0.0, z_max = 0.0;

  bool contains(const PointXYZI& p) const {
    return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max &&
           p.z >= z_min && p.z < z_max;
  }
};

// Throws ValidationError unless min < max on every axis.
void validate_range(const RangeSpec& range);

struct VoxelIndex {
  int i = 0, j = 0, k = 0;
  bool operator==(const VoxelIndex&) const = default;
};

struct VoxelIndexHash {
  std::size_t operator()(const VoxelIndex& v) const {
    std::size_t h = static_cast<std::size_t>(v.i) * 73856093u;
    h ^= static_cast<std::size_t>(v.j) * 19349663u;
    h ^= static_cast<std::size_t>(v.k) * 83492791u;
    return h;
  }
};

struct Voxel {
  std::vector<PointXYZI> points;  // truncated to max_points, input order
  std::size_t true_count = 0;     // points that fell in this cell
};

struct VoxelGrid {
  std::array<double, 3> voxel_size{};
  RangeSpec range;
  std::array<std::size_t, 3> dims{};  // ceil(extent / voxel_size) per axis
  std::size_t max_points_per_voxel = 0;
  std::unordered_map<VoxelIndex, Voxel, VoxelIndexHash> voxels;

  std::size_t stored_points() const;
  std::size_t total_points() const;  // sum of true counts
};

// One output point per occupied leaf cell: the centroid of its points,
// intensity averaged. Cells are emitted in order of first occurrence.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

// Keeps points inside the half-open range.
PointCloud crop_range(const PointCloud& cloud, const RangeSpec& range);

// Buckets in-range points by floor((p - min) / voxel_size); per-voxel
// storage is truncated to max_points_per_voxel in input order while the
// true count keeps growing. Out-of-range points are dropped.
VoxelGrid voxelize(const PointCloud& cloud, std::array<double, 3> voxel_size,
                   const RangeSpec& range, std::size_t max_points_per_voxel);

// Per-axis arithmetic mean of box extents. Throws on an empty list.
std::array<double, 3> anchor_size_estimate(const std::vector<Box3D>& boxes);

}  // namespace surgkit
