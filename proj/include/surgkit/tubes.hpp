#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "surgkit/types.hpp"

namespace surgkit {

// One detection claimed by a tube.
struct TubeEntry {
  int frame = 0;  // temporal frame index within the video
  BoxAA box;
  double score = 0.0;
};

// A per-class chain of detections across consecutive (or nearly consecutive)
// frames of one video.
struct Tube {
  int id = 0;        // creation order, starting at 0
  int class_id = 0;
  std::vector<TubeEntry> entries;  // frame ascending

  int start_frame() const { return entries.front().frame; }
  int end_frame() const { return entries.back().frame; }
  double mean_score() const;
};

struct LinkOptions {
  double iou_threshold = 0.3;  // minimum IoU to extend a tube
  int max_gap = 2;             // frames a tube may miss and stay active
  bool hungarian = false;      // optimal per-frame assignment instead of greedy
};

// Detections of one frame, temporal position given explicitly.
struct FrameDetections {
  int frame = 0;
  std::vector<Annotation> dets;  // axis-aligned boxes with scores
};

// Link detections into tubes, per class. Frames are processed in ascending
// frame order; a tube last extended at frame f stays active through frame
// f + max_gap + 1. Greedy mode walks active tubes in creation order, each
// claiming the unclaimed detection with the highest IoU against the tube's
// latest box (>= iou_threshold, ties to the lower detection index). With
// `hungarian` the per-frame assignment maximizes total IoU instead.
// Unclaimed detections open new tubes in detection order.
std::vector<Tube> link_tubes(const std::vector<FrameDetections>& frames,
                             const LinkOptions& options = {});

// Dataset adapter: frames sorted by id ascending become frame indices
// 0..n-1. Every annotation must be an axis-aligned detection with a score.
std::vector<Tube> link_tubes(const Dataset& detections,
                             const LinkOptions& options = {});

// Minimum-cost assignment (e.g. cost = -IoU) over an n x m matrix with
// n <= m. Returns the column picked for each row. Exposed for testing.
std::vector<int> hungarian_min_assign(
    const std::vector<std::vector<double>>& cost);

enum class GraphTopology { FullyConnected, Scene, SceneSameLabel };

// Accepts "fully_connected", "scene" or "scene_same_label".
GraphTopology topology_from_string(const std::string& token);
std::string to_string(GraphTopology topology);

// Half-open frame window [start, start + length).
struct GraphWindow {
  int start = 0;
  int length = 0;
};

struct GraphNode {
  int tube_id = -1;   // -1 for the scene node
  int class_id = -1;  // -1 for the scene node
  bool is_scene = false;
};

// Graph over the tubes alive inside one window. Tube nodes come first,
// sorted by tube id; the scene node, when present, is last.
struct LocalGraph {
  GraphWindow window;
  GraphTopology topology = GraphTopology::Scene;
  std::vector<GraphNode> nodes;
  std::vector<std::pair<int, int>> edges;  // node index pairs, i < j

  std::vector<std::vector<int>> adjacency_matrix() const;
};

// Tiling windows of `length` frames over [0, n_frames); stride <= 0 means
// stride = length. The final window may extend past the end.
std::vector<GraphWindow> make_windows(int n_frames, int length, int stride = 0);

// Nodes are the tubes with at least one entry inside the window.
// FullyConnected joins every tube pair. Scene adds a scene node joined to
// every tube. SceneSameLabel additionally joins tube pairs sharing a class.
LocalGraph build_local_graph(const std::vector<Tube>& tubes,
                             GraphWindow window, GraphTopology topology);

std::vector<LocalGraph> build_local_graphs(
    const std::vector<Tube>& tubes, int n_frames,
    const std::vector<int>& window_lengths, int stride,
    GraphTopology topology);

nlohmann::json tubes_json(const std::vector<Tube>& tubes,
                          const std::string& video = "");
// Inverse of tubes_json; validates the schema tag.
std::vector<Tube> tubes_from_json(const nlohmann::json& doc,
                                  const std::string& source_name);
nlohmann::json graphs_json(const std::vector<LocalGraph>& graphs,
                           const std::string& video = "");

}  // namespace surgkit
