#include "surgkit/dataset_ops.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "surgkit/error.hpp"

namespace surgkit {

std::vector<std::size_t> shuffled_indices(std::size_t n,
                                          std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = i;
  }
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

SplitResult split_dataset(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.train_ratio > 0.0 && spec.train_ratio < 1.0)) {
    throw ValidationError("split: train ratio must lie in (0, 1)");
  }
  validate_dataset(dataset);
  if (dataset.frames.empty()) {
    throw ValidationError("split: empty dataset");
  }

  std::mt19937_64 rng(spec.seed);
  SplitResult result;

  auto split_group = [&](const std::vector<const std::string*>& ids) {
    const std::vector<std::size_t> order = shuffled_indices(ids.size(), rng);
    const std::size_t n_train = static_cast<std::size_t>(
        std::floor(spec.train_ratio * static_cast<double>(ids.size())));
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (k < n_train) {
        result.train_ids.push_back(*ids[order[k]]);
      } else {
        result.val_ids.push_back(*ids[order[k]]);
      }
    }
  };

  if (spec.stratify_by_source) {
    std::map<std::string, std::vector<const std::string*>> by_source;
    for (const Frame& frame : dataset.frames) {
      by_source[frame.source].push_back(&frame.id);
    }
    for (const auto& [source, ids] : by_source) {
      split_group(ids);
    }
  } else {
    std::vector<const std::string*> ids;
    ids.reserve(dataset.frames.size());
    for (const Frame& frame : dataset.frames) {
      ids.push_back(&frame.id);
    }
    split_group(ids);
  }

  if (result.train_ids.empty() || result.val_ids.empty()) {
    throw ValidationError("split: a side came out empty; adjust the ratio");
  }
  std::sort(result.train_ids.begin(), result.train_ids.end());
  std::sort(result.val_ids.begin(), result.val_ids.end());
  return result;
}

void write_split_manifests(const SplitResult& split,
                           const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir.string() + ": " +
                  ec.message());
  }
  auto write_one = [&](const char* name,
                       const std::vector<std::string>& ids) {
    const std::filesystem::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw IoError("cannot open " + path.string() + " for writing");
    }
    for (const std::string& id : ids) {
      out << id << '\n';
    }
    if (!out) {
      throw IoError("write failed for " + path.string());
    }
  };
  write_one("train.txt", split.train_ids);
  write_one("val.txt", split.val_ids);
}

DatasetStats compute_stats(const Dataset& dataset) {
  validate_dataset(dataset);
  DatasetStats stats;
  stats.class_names = dataset.catalog.names();
  stats.instances_per_class.assign(stats.class_names.size(), 0);

  std::map<std::string, SourceStats> by_source;
  for (const Frame& frame : dataset.frames) {
    SourceStats& src = by_source[frame.source];
    if (src.instances.empty()) {
      src.source = frame.source;
      src.instances.assign(stats.class_names.size(), 0);
    }
    ++src.frames;
    ++stats.total_frames;
    for (const Annotation& ann : frame.annotations) {
      const auto c = static_cast<std::size_t>(ann.class_id);
      ++src.instances[c];
      ++src.total_instances;
      ++stats.instances_per_class[c];
      ++stats.total_instances;
    }
  }
  for (auto& [name, src] : by_source) {
    stats.sources.push_back(std::move(src));
  }
  return stats;
}

namespace {

std::string pad_left(const std::string& s, std::size_t width) {
  if (s.size() >= width) {
    return s;
  }
  return std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  if (s.size() >= width) {
    return s;
  }
  return s + std::string(width - s.size(), ' ');
}

std::string source_label(const std::string& source) {
  return source.empty() ? std::string("(none)") : source;
}

}  // namespace

std::string render_stats_table(const DatasetStats& stats) {
  std::size_t src_w = std::string("Source").size();
  for (const SourceStats& src : stats.sources) {
    src_w = std::max(src_w, source_label(src.source).size());
  }
  src_w = std::max(src_w, std::string("total").size());

  std::vector<std::size_t> col_w;
  col_w.reserve(stats.class_names.size());
  for (const std::string& name : stats.class_names) {
    col_w.push_back(std::max<std::size_t>(name.size() + 2, 8));
  }

  std::string out = pad_right("Source", src_w) + pad_left("Frames", 8);
  for (std::size_t c = 0; c < stats.class_names.size(); ++c) {
    out += pad_left(stats.class_names[c], col_w[c]);
  }
  out += pad_left("Instances", 11);
  out += "\n";

  auto row = [&](const std::string& label, std::size_t frames,
                 const std::vector<std::size_t>& instances,
                 std::size_t total) {
    out += pad_right(label, src_w);
    out += pad_left(std::to_string(frames), 8);
    for (std::size_t c = 0; c < instances.size(); ++c) {
      out += pad_left(std::to_string(instances[c]), col_w[c]);
    }
    out += pad_left(std::to_string(total), 11);
    out += "\n";
  };

  for (const SourceStats& src : stats.sources) {
    row(source_label(src.source), src.frames, src.instances,
        src.total_instances);
  }
  row("total", stats.total_frames, stats.instances_per_class,
      stats.total_instances);
  return out;
}

nlohmann::json stats_json(const DatasetStats& stats) {
  nlohmann::json sources = nlohmann::json::array();
  for (const SourceStats& src : stats.sources) {
    sources.push_back({{"source", src.source},
                       {"frames", src.frames},
                       {"instances", src.instances},
                       {"total_instances", src.total_instances}});
  }
  return nlohmann::json{{"schema", "surgkit.stats/1"},
                        {"classes", stats.class_names},
                        {"sources", std::move(sources)},
                        {"frames", stats.total_frames},
                        {"instances_per_class", stats.instances_per_class},
                        {"instances", stats.total_instances}};
}

}  // namespace surgkit
