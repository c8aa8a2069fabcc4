#include "surgkit/tubes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "surgkit/error.hpp"
#include "surgkit/geometry.hpp"

namespace surgkit {

namespace {

constexpr double kForbidden = 1e9;  // cost for pairs below the IoU threshold

struct Det {
  BoxAA box;
  double score = 0.0;
  int class_id = 0;
};

void check_link_options(const LinkOptions& options) {
  if (!std::isfinite(options.iou_threshold) || options.iou_threshold <= 0.0 ||
      options.iou_threshold > 1.0) {
    throw ValidationError("link_tubes: iou threshold must lie in (0, 1]");
  }
  if (options.max_gap < 0) {
    throw ValidationError("link_tubes: max_gap must be >= 0");
  }
}

Det to_det(const Annotation& ann, int frame) {
  if (!std::holds_alternative<BoxAA>(ann.geometry)) {
    throw ValidationError("link_tubes: frame " + std::to_string(frame) +
                          " holds a non-axis-aligned box");
  }
  if (!ann.score.has_value() || !std::isfinite(*ann.score)) {
    throw ValidationError("link_tubes: detection without score in frame " +
                          std::to_string(frame));
  }
  return {std::get<BoxAA>(ann.geometry), *ann.score, ann.class_id};
}

}  // namespace

double Tube::mean_score() const {
  if (entries.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const TubeEntry& entry : entries) {
    sum += entry.score;
  }
  return sum / static_cast<double>(entries.size());
}

std::vector<int> hungarian_min_assign(
    const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) {
    return {};
  }
  const std::size_t m = cost[0].size();
  if (n > m) {
    throw ValidationError("hungarian: more rows than columns");
  }
  for (const auto& row : cost) {
    if (row.size() != m) {
      throw ValidationError("hungarian: ragged cost matrix");
    }
    for (const double c : row) {
      if (!std::isfinite(c)) {
        throw ValidationError("hungarian: non-finite cost");
      }
    }
  }

  // Potentials-based shortest augmenting path, O(n^2 m); 1-based internals.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) {
      row_to_col[p[j] - 1] = static_cast<int>(j - 1);
    }
  }
  return row_to_col;
}

std::vector<Tube> link_tubes(const std::vector<FrameDetections>& frames,
                             const LinkOptions& options) {
  check_link_options(options);

  std::vector<const FrameDetections*> ordered;
  ordered.reserve(frames.size());
  for (const FrameDetections& f : frames) {
    ordered.push_back(&f);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const FrameDetections* a, const FrameDetections* b) {
              return a->frame < b->frame;
            });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->frame == ordered[i - 1]->frame) {
      throw ValidationError("link_tubes: duplicate frame index " +
                            std::to_string(ordered[i]->frame));
    }
  }

  std::vector<Tube> tubes;
  // Active tube indices per class, kept in creation (id) order.
  std::map<int, std::vector<std::size_t>> active;

  for (const FrameDetections* fd : ordered) {
    const int f = fd->frame;

    // Group this frame's detections by class, remembering input order.
    std::map<int, std::vector<Det>> by_class;
    for (const Annotation& ann : fd->dets) {
      by_class[ann.class_id].push_back(to_det(ann, f));
    }

    for (auto& [class_id, dets] : by_class) {
      auto& act = active[class_id];
      // Retire tubes that fell past the allowed gap.
      act.erase(std::remove_if(act.begin(), act.end(),
                               [&](std::size_t t) {
                                 return f - tubes[t].end_frame() >
                                        options.max_gap + 1;
                               }),
                act.end());

      std::vector<char> claimed(dets.size(), 0);
      if (options.hungarian && !act.empty() && !dets.empty()) {
        // Cost matrix rows = whichever side is smaller.
        const bool tubes_as_rows = act.size() <= dets.size();
        const std::size_t rows = tubes_as_rows ? act.size() : dets.size();
        const std::size_t cols = tubes_as_rows ? dets.size() : act.size();
        std::vector<std::vector<double>> cost(
            rows, std::vector<double>(cols, kForbidden));
        auto pair_iou = [&](std::size_t t, std::size_t d) {
          return iou_aa(tubes[act[t]].entries.back().box, dets[d].box);
        };
        for (std::size_t t = 0; t < act.size(); ++t) {
          for (std::size_t d = 0; d < dets.size(); ++d) {
            const double v = pair_iou(t, d);
            if (v >= options.iou_threshold) {
              const double c = -v;
              if (tubes_as_rows) {
                cost[t][d] = c;
              } else {
                cost[d][t] = c;
              }
            }
          }
        }
        const std::vector<int> assign = hungarian_min_assign(cost);
        for (std::size_t r = 0; r < assign.size(); ++r) {
          if (assign[r] < 0) {
            continue;
          }
          const std::size_t t = tubes_as_rows ? r
                                              : static_cast<std::size_t>(
                                                    assign[r]);
          const std::size_t d = tubes_as_rows
                                    ? static_cast<std::size_t>(assign[r])
                                    : r;
          if (pair_iou(t, d) < options.iou_threshold) {
            continue;  // padded pairing, not a real link
          }
          tubes[act[t]].entries.push_back({f, dets[d].box, dets[d].score});
          claimed[d] = 1;
        }
      } else {
        for (const std::size_t t : act) {
          const BoxAA& last = tubes[t].entries.back().box;
          double best_v = -1.0;
          int best_d = -1;
          for (std::size_t d = 0; d < dets.size(); ++d) {
            if (claimed[d]) {
              continue;
            }
            const double v = iou_aa(last, dets[d].box);
            if (v >= options.iou_threshold && v > best_v) {
              best_v = v;
              best_d = static_cast<int>(d);
            }
          }
          if (best_d >= 0) {
            claimed[static_cast<std::size_t>(best_d)] = 1;
            tubes[t].entries.push_back(
                {f, dets[static_cast<std::size_t>(best_d)].box,
                 dets[static_cast<std::size_t>(best_d)].score});
          }
        }
      }

      for (std::size_t d = 0; d < dets.size(); ++d) {
        if (claimed[d]) {
          continue;
        }
        Tube tube;
        tube.id = static_cast<int>(tubes.size());
        tube.class_id = class_id;
        tube.entries.push_back({f, dets[d].box, dets[d].score});
        tubes.push_back(std::move(tube));
        act.push_back(tubes.size() - 1);
      }
    }
  }

  return tubes;
}

std::vector<Tube> link_tubes(const Dataset& detections,
                             const LinkOptions& options) {
  std::vector<const Frame*> ordered;
  ordered.reserve(detections.frames.size());
  for (const Frame& frame : detections.frames) {
    ordered.push_back(&frame);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const Frame* a, const Frame* b) { return a->id < b->id; });
  std::vector<FrameDetections> frames;
  frames.reserve(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    frames.push_back({static_cast<int>(i), ordered[i]->annotations});
  }
  return link_tubes(frames, options);
}

GraphTopology topology_from_string(const std::string& token) {
  if (token == "fully_connected") {
    return GraphTopology::FullyConnected;
  }
  if (token == "scene") {
    return GraphTopology::Scene;
  }
  if (token == "scene_same_label") {
    return GraphTopology::SceneSameLabel;
  }
  throw ValidationError(
      "unknown topology '" + token +
      "' (expected fully_connected, scene or scene_same_label)");
}

std::string to_string(GraphTopology topology) {
  switch (topology) {
    case GraphTopology::FullyConnected:
      return "fully_connected";
    case GraphTopology::Scene:
      return "scene";
    case GraphTopology::SceneSameLabel:
      return "scene_same_label";
  }
  return "?";
}

std::vector<std::vector<int>> LocalGraph::adjacency_matrix() const {
  std::vector<std::vector<int>> adj(nodes.size(),
                                    std::vector<int>(nodes.size(), 0));
  for (const auto& [i, j] : edges) {
    adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
    adj[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
  }
  return adj;
}

std::vector<GraphWindow> make_windows(int n_frames, int length, int stride) {
  if (n_frames < 0) {
    throw ValidationError("make_windows: negative frame count");
  }
  if (length <= 0) {
    throw ValidationError("make_windows: window length must be positive");
  }
  if (stride <= 0) {
    stride = length;
  }
  std::vector<GraphWindow> windows;
  for (int start = 0; start < n_frames; start += stride) {
    windows.push_back({start, length});
  }
  return windows;
}

LocalGraph build_local_graph(const std::vector<Tube>& tubes,
                             GraphWindow window, GraphTopology topology) {
  if (window.length <= 0) {
    throw ValidationError("build_local_graph: window length must be positive");
  }
  LocalGraph graph;
  graph.window = window;
  graph.topology = topology;

  const int lo = window.start;
  const int hi = window.start + window.length;  // exclusive
  std::vector<const Tube*> alive;
  for (const Tube& tube : tubes) {
    bool inside = false;
    for (const TubeEntry& entry : tube.entries) {
      if (entry.frame >= lo && entry.frame < hi) {
        inside = true;
        break;
      }
    }
    if (inside) {
      alive.push_back(&tube);
    }
  }
  std::sort(alive.begin(), alive.end(),
            [](const Tube* a, const Tube* b) { return a->id < b->id; });

  for (const Tube* tube : alive) {
    graph.nodes.push_back({tube->id, tube->class_id, false});
  }
  const int n_tubes = static_cast<int>(alive.size());

  switch (topology) {
    case GraphTopology::FullyConnected:
      for (int i = 0; i < n_tubes; ++i) {
        for (int j = i + 1; j < n_tubes; ++j) {
          graph.edges.emplace_back(i, j);
        }
      }
      break;
    case GraphTopology::Scene:
    case GraphTopology::SceneSameLabel: {
      graph.nodes.push_back({-1, -1, true});
      const int scene = n_tubes;
      if (topology == GraphTopology::SceneSameLabel) {
        for (int i = 0; i < n_tubes; ++i) {
          for (int j = i + 1; j < n_tubes; ++j) {
            if (alive[static_cast<std::size_t>(i)]->class_id ==
                alive[static_cast<std::size_t>(j)]->class_id) {
              graph.edges.emplace_back(i, j);
            }
          }
        }
      }
      for (int i = 0; i < n_tubes; ++i) {
        graph.edges.emplace_back(i, scene);
      }
      break;
    }
  }
  return graph;
}

std::vector<LocalGraph> build_local_graphs(
    const std::vector<Tube>& tubes, int n_frames,
    const std::vector<int>& window_lengths, int stride,
    GraphTopology topology) {
  std::vector<LocalGraph> graphs;
  for (const int length : window_lengths) {
    for (const GraphWindow& window : make_windows(n_frames, length, stride)) {
      graphs.push_back(build_local_graph(tubes, window, topology));
    }
  }
  return graphs;
}

nlohmann::json tubes_json(const std::vector<Tube>& tubes,
                          const std::string& video) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Tube& tube : tubes) {
    nlohmann::json entries = nlohmann::json::array();
    for (const TubeEntry& entry : tube.entries) {
      entries.push_back({{"frame", entry.frame},
                         {"box", {entry.box.x_min, entry.box.y_min,
                                  entry.box.x_max, entry.box.y_max}},
                         {"score", entry.score}});
    }
    arr.push_back({{"id", tube.id},
                   {"class", tube.class_id},
                   {"mean_score", tube.mean_score()},
                   {"entries", std::move(entries)}});
  }
  nlohmann::json out{{"schema", "surgkit.tubes/1"}, {"tubes", std::move(arr)}};
  if (!video.empty()) {
    out["video"] = video;
  }
  return out;
}

std::vector<Tube> tubes_from_json(const nlohmann::json& doc,
                                  const std::string& source_name) {
  if (!doc.is_object() || doc.value("schema", "") != "surgkit.tubes/1") {
    throw ParseError(source_name, -1, "not a surgkit.tubes/1 document");
  }
  if (!doc.contains("tubes") || !doc["tubes"].is_array()) {
    throw ParseError(source_name, -1, "missing 'tubes' array");
  }
  std::vector<Tube> tubes;
  long record = 0;
  for (const auto& jt : doc["tubes"]) {
    if (!jt.is_object() || !jt.contains("id") || !jt.contains("class") ||
        !jt.contains("entries") || !jt["entries"].is_array()) {
      throw ParseError(source_name, record, "malformed tube entry");
    }
    Tube tube;
    tube.id = jt["id"].get<int>();
    tube.class_id = jt["class"].get<int>();
    for (const auto& je : jt["entries"]) {
      if (!je.is_object() || !je.contains("frame") || !je.contains("box") ||
          !je["box"].is_array() || je["box"].size() != 4) {
        throw ParseError(source_name, record, "malformed tube entry box");
      }
      TubeEntry entry;
      entry.frame = je["frame"].get<int>();
      entry.box = {je["box"][0].get<double>(), je["box"][1].get<double>(),
                   je["box"][2].get<double>(), je["box"][3].get<double>()};
      entry.score = je.value("score", 0.0);
      tube.entries.push_back(entry);
    }
    if (tube.entries.empty()) {
      throw ParseError(source_name, record, "tube without entries");
    }
    tubes.push_back(std::move(tube));
    ++record;
  }
  return tubes;
}

nlohmann::json graphs_json(const std::vector<LocalGraph>& graphs,
                           const std::string& video) {
  nlohmann::json arr = nlohmann::json::array();
  for (const LocalGraph& graph : graphs) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const GraphNode& node : graph.nodes) {
      if (node.is_scene) {
        nodes.push_back({{"scene", true}});
      } else {
        nodes.push_back({{"tube", node.tube_id}, {"class", node.class_id}});
      }
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [i, j] : graph.edges) {
      edges.push_back({i, j});
    }
    arr.push_back({{"start", graph.window.start},
                   {"length", graph.window.length},
                   {"topology", to_string(graph.topology)},
                   {"nodes", std::move(nodes)},
                   {"edges", std::move(edges)}});
  }
  nlohmann::json out{{"schema", "surgkit.graphs/1"},
                     {"graphs", std::move(arr)}};
  if (!video.empty()) {
    out["video"] = video;
  }
  return out;
}

}  // namespace surgkit
