#include "surgkit/pointcloud.hpp"

#include <algorithm>
#include <cmath>

#include "surgkit/error.hpp"

namespace surgkit {

namespace {

VoxelIndex leaf_index(const PointXYZI& p, double leaf) {
  return {static_cast<int>(std::floor(p.x / leaf)),
          static_cast<int>(std::floor(p.y / leaf)),
          static_cast<int>(std::floor(p.z / leaf))};
}

}  // namespace

void validate_range(const RangeSpec& range) {
  if (!(range.x_min < range.x_max) || !(range.y_min < range.y_max) ||
      !(range.z_min < range.z_max)) {
    throw ValidationError("range: min must be strictly below max on every axis");
  }
}

std::size_t VoxelGrid::stored_points() const {
  std::size_t n = 0;
  for (const auto& [idx, voxel] : voxels) {
    n += voxel.points.size();
  }
  return n;
}

std::size_t VoxelGrid::total_points() const {
  std::size_t n = 0;
  for (const auto& [idx, voxel] : voxels) {
    n += voxel.true_count;
  }
  return n;
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (leaf <= 0.0) {
    throw ValidationError("voxel_downsample: leaf size must be positive");
  }
  struct Accum {
    double x = 0, y = 0, z = 0, intensity = 0;
    std::size_t count = 0;
    std::size_t order = 0;  // first-occurrence rank, keeps output deterministic
  };
  std::unordered_map<VoxelIndex, Accum, VoxelIndexHash> cells;
  cells.reserve(cloud.points.size());
  std::size_t next_order = 0;
  for (const auto& p : cloud.points) {
    Accum& acc = cells[leaf_index(p, leaf)];
    if (acc.count == 0) {
      acc.order = next_order++;
    }
    acc.x += p.x;
    acc.y += p.y;
    acc.z += p.z;
    acc.intensity += p.intensity;
    ++acc.count;
  }

  PointCloud out;
  out.source_id = cloud.source_id;
  out.points.resize(cells.size());
  for (const auto& [idx, acc] : cells) {
    const double n = static_cast<double>(acc.count);
    out.points[acc.order] = {static_cast<float>(acc.x / n),
                             static_cast<float>(acc.y / n),
                             static_cast<float>(acc.z / n),
                             static_cast<float>(acc.intensity / n)};
  }
  return out;
}

PointCloud crop_range(const PointCloud& cloud, const RangeSpec& range) {
  validate_range(range);
  PointCloud out;
  out.source_id = cloud.source_id;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    if (range.contains(p)) {
      out.points.push_back(p);
    }
  }
  return out;
}

VoxelGrid voxelize(const PointCloud& cloud, std::array<double, 3> voxel_size,
                   const RangeSpec& range, std::size_t max_points_per_voxel) {
  validate_range(range);
  for (double v : voxel_size) {
    if (v <= 0.0) {
      throw ValidationError("voxelize: voxel size must be positive");
    }
  }
  if (max_points_per_voxel < 1) {
    throw ValidationError("voxelize: max_points_per_voxel must be at least 1");
  }

  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  grid.range = range;
  grid.max_points_per_voxel = max_points_per_voxel;
  grid.dims = {
      static_cast<std::size_t>(std::ceil((range.x_max - range.x_min) / voxel_size[0])),
      static_cast<std::size_t>(std::ceil((range.y_max - range.y_min) / voxel_size[1])),
      static_cast<std::size_t>(std::ceil((range.z_max - range.z_min) / voxel_size[2]))};

  for (const auto& p : cloud.points) {
    if (!range.contains(p)) {
      continue;
    }
    VoxelIndex idx{
        static_cast<int>(std::floor((p.x - range.x_min) / voxel_size[0])),
        static_cast<int>(std::floor((p.y - range.y_min) / voxel_size[1])),
        static_cast<int>(std::floor((p.z - range.z_min) / voxel_size[2]))};
    // A contained point can still land on the upper cell boundary through
    // rounding; keep it in the last cell.
    idx.i = std::min(idx.i, static_cast<int>(grid.dims[0]) - 1);
    idx.j = std::min(idx.j, static_cast<int>(grid.dims[1]) - 1);
    idx.k = std::min(idx.k, static_cast<int>(grid.dims[2]) - 1);
    Voxel& voxel = grid.voxels[idx];
    if (voxel.points.size() < max_points_per_voxel) {
      voxel.points.push_back(p);
    }
    ++voxel.true_count;
  }
  return grid;
}

std::array<double, 3> anchor_size_estimate(const std::vector<Box3D>& boxes) {
  if (boxes.empty()) {
    throw ValidationError("anchor_size_estimate: empty box list");
  }
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  for (const auto& box : boxes) {
    mean[0] += box.dx;
    mean[1] += box.dy;
    mean[2] += box.dz;
  }
  const double n = static_cast<double>(boxes.size());
  return {mean[0] / n, mean[1] / n, mean[2] / n};
}

}  // namespace surgkit
