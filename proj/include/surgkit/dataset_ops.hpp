#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "surgkit/types.hpp"

namespace surgkit {

// Identity permutation of n elements shuffled in place with Fisher-Yates,
// drawing j = rng() % (i + 1). Written out explicitly (instead of
// std::shuffle) so the result is identical across standard libraries.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng);

struct SplitSpec {
  double train_ratio = 0.7;
  std::uint64_t seed = 0;
  bool stratify_by_source = false;
};

struct SplitResult {
  std::vector<std::string> train_ids;  // sorted ascending
  std::vector<std::string> val_ids;    // sorted ascending
};

// Random train/val split over frame ids. Default mode shuffles the whole
// frame list and takes floor(train_ratio * N) for train. Stratified mode
// does the same per source (sources visited in ascending order, one shared
// generator), so each source keeps the requested ratio. Either side ending
// up empty is a ValidationError.
SplitResult split_dataset(const Dataset& dataset, const SplitSpec& spec);

// Writes train.txt / val.txt under `dir`, one frame id per line.
void write_split_manifests(const SplitResult& split,
                           const std::filesystem::path& dir);

struct SourceStats {
  std::string source;  // empty when frames carry no source tag
  std::size_t frames = 0;
  std::vector<std::size_t> instances;  // per class, catalog order
  std::size_t total_instances = 0;
};

struct DatasetStats {
  std::vector<std::string> class_names;     // catalog order
  std::vector<SourceStats> sources;         // ascending by source name
  std::vector<std::size_t> instances_per_class;
  std::size_t total_frames = 0;
  std::size_t total_instances = 0;
};

DatasetStats compute_stats(const Dataset& dataset);

std::string render_stats_table(const DatasetStats& stats);
nlohmann::json stats_json(const DatasetStats& stats);

}  // namespace surgkit
