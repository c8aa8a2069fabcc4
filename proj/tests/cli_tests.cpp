// End-to-end checks of the command-line tool: each case runs the installed
// binary in a shell, captures combined output and the exit code, and checks
// files it leaves behind.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "surgkit/pointcloud_io.hpp"
#include "test_util.hpp"

#ifndef SURGKIT_CLI_PATH
#error "SURGKIT_CLI_PATH must point at the surgkit executable"
#endif

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(SURGKIT_CLI_PATH) + " " + args + " 2>&1";
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
    result.output.append(buf, n);
  }
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

// COCO document with `n` 64x48 frames; frame i carries one class-0 box at
// x = 2 * i. `with_scores` adds a confidence, making the boxes detections.
std::string coco_frames(int n, bool with_scores, const char* source = "") {
  nlohmann::json images = nlohmann::json::array();
  nlohmann::json annotations = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "f_%03d.png", i);
    nlohmann::json img{{"id", i}, {"file_name", name}, {"width", 64},
                       {"height", 48}};
    if (source[0] != '\0') {
      img["source"] = source;
    }
    images.push_back(img);
    nlohmann::json ann{{"id", i},
                       {"image_id", i},
                       {"category_id", 1},
                       {"bbox", {2.0 * i, 4, 20, 20}}};
    if (with_scores) {
      ann["score"] = 0.9;
    }
    annotations.push_back(ann);
  }
  nlohmann::json doc{{"images", images},
                     {"annotations", annotations},
                     {"categories", {{{"id", 1}, {"name", "grasper"}}}}};
  return doc.dump(2);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and bad invocations") {
  CHECK(run_cli("--help").code == 0);
  CHECK(contains(run_cli("--help").output, "convert"));
  CHECK(run_cli("").code == 1);             // a subcommand is required
  CHECK(run_cli("frobnicate").code == 1);   // unknown subcommand
  CHECK(run_cli("split -i /no/such/file.json -o /tmp/x").code == 1);
}

TEST_CASE("coco2yolo writes one label file per frame") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path / "in.json", coco_frames(2, false));
  const auto run = run_cli("convert coco2yolo -i " +
                           (tmp.path / "in.json").string() + " -o " +
                           (tmp.path / "labels").string());
  CHECK(run.code == 0);
  CHECK(contains(run.output, "wrote 2 label files"));
  CHECK(contains(run.output, "class 0: grasper (2 instances)"));
  // Frame 0 box: x [0, 20], y [4, 24] on 64x48.
  CHECK(testutil::read_file(tmp.path / "labels" / "f_000.txt") ==
        "0 0.156250 0.291667 0.312500 0.416667\n");

  // Garbage input is a parse failure, not an I/O failure.
  testutil::write_file(tmp.path / "bad.json", "{oops");
  CHECK(run_cli("convert coco2yolo -i " + (tmp.path / "bad.json").string() +
                " -o " + (tmp.path / "l2").string())
            .code == 1);
}

TEST_CASE("split writes manifests and reports counts") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path / "in.json", coco_frames(10, false));
  const auto run = run_cli("split -i " + (tmp.path / "in.json").string() +
                           " -o " + (tmp.path / "split").string() +
                           " --ratio 0.7 --seed 0");
  CHECK(run.code == 0);
  CHECK(contains(run.output, "train: 7 frames"));
  CHECK(contains(run.output, "val: 3 frames"));
  const std::string train = testutil::read_file(tmp.path / "split" / "train.txt");
  CHECK(std::count(train.begin(), train.end(), '\n') == 7);

  // Unwritable output directory maps to the I/O exit code.
  CHECK(run_cli("split -i " + (tmp.path / "in.json").string() +
                " -o /proc/surgkit_nope/split --ratio 0.7")
            .code == 2);
}

TEST_CASE("stats emits a parsable json report") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path / "in.json", coco_frames(4, false, "pilot1"));
  const auto run = run_cli("stats -i " + (tmp.path / "in.json").string() +
                           " --json");
  CHECK(run.code == 0);
  const auto doc = nlohmann::json::parse(run.output);
  CHECK(doc.at("schema") == "surgkit.stats/1");
  CHECK(doc.at("frames") == 4);
  CHECK(doc.at("instances") == 4);
  CHECK(doc.at("sources")[0].at("source") == "pilot1");

  const auto table = run_cli("stats -i " + (tmp.path / "in.json").string());
  CHECK(table.code == 0);
  CHECK(contains(table.output, "pilot1"));
  CHECK(contains(table.output, "total"));
}

TEST_CASE("anchors reports clusters and recall") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path / "in.json", coco_frames(12, false));
  const std::string base = "anchors -i " + (tmp.path / "in.json").string() +
                           " --per-level 2 --levels 2";
  const auto text = run_cli(base);
  CHECK(text.code == 0);
  CHECK(contains(text.output, "anchors:"));
  CHECK(contains(text.output, "bpr:"));
  CHECK(contains(text.output, "boxes: 12 used"));

  const auto js = run_cli(base + " --json");
  CHECK(js.code == 0);
  const auto doc = nlohmann::json::parse(js.output);
  CHECK(doc.at("schema") == "surgkit.anchors/1");
  CHECK(doc.at("levels").size() == 2);
  CHECK(doc.at("boxes_used") == 12);
}

TEST_CASE("eval scores a detector against ground truth") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path / "gt.json", coco_frames(5, false));
  testutil::write_file(tmp.path / "det.json", coco_frames(5, true));

  const auto run = run_cli("eval --gt " + (tmp.path / "gt.json").string() +
                           " --det " + (tmp.path / "det.json").string());
  CHECK(run.code == 0);
  CHECK(contains(run.output, "frames: 5"));
  CHECK(contains(run.output, "mAP@0.50: 1.0000"));
  CHECK(contains(run.output, "mAP@0.50:0.95: 1.0000"));
  CHECK(contains(run.output, "micro F1: 1.0000"));

  const auto js = run_cli("eval --gt " + (tmp.path / "gt.json").string() +
                          " --det " + (tmp.path / "det.json").string() +
                          " --json");
  CHECK(js.code == 0);
  const auto doc = nlohmann::json::parse(js.output);
  CHECK(doc.at("schema") == "surgkit.eval/1");
  CHECK(doc.at("map").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("eval accepts a yolo label directory as detections") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path / "gt.json", coco_frames(3, false));
  testutil::write_file(tmp.path / "det.json", coco_frames(3, true));
  REQUIRE(run_cli("convert coco2yolo -i " + (tmp.path / "det.json").string() +
                  " -o " + (tmp.path / "labels").string())
              .code == 0);

  const auto run = run_cli("eval --gt " + (tmp.path / "gt.json").string() +
                           " --det " + (tmp.path / "labels").string());
  CHECK(run.code == 0);
  CHECK(contains(run.output, "mAP@0.50: 1.0000"));
}

TEST_CASE("cloud conversion chain preserves every byte") {
  testutil::TempDir tmp;
  surgkit::PointCloud cloud;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> coord(-10.0f, 10.0f);
  for (int i = 0; i < 100; ++i) {
    cloud.points.push_back({coord(rng), coord(rng), coord(rng), 0.5f});
  }
  surgkit::write_pointcloud(tmp.path / "in.ply", cloud,
                            surgkit::CloudFormat::Ply,
                            surgkit::CloudEncoding::Binary);

  const auto ply2pcd = run_cli("convert ply2pcd -i " +
                               (tmp.path / "in.ply").string() + " -o " +
                               (tmp.path / "mid.pcd").string());
  CHECK(ply2pcd.code == 0);
  CHECK(contains(ply2pcd.output, "wrote 100 points"));
  const auto pcd2bin = run_cli("convert pcd2bin -i " +
                               (tmp.path / "mid.pcd").string() + " -o " +
                               (tmp.path / "out.bin").string());
  CHECK(pcd2bin.code == 0);
  CHECK(testutil::read_file(tmp.path / "out.bin") == surgkit::format_bin(cloud));
}

TEST_CASE("json2kitti prints label lines") {
  testutil::TempDir tmp;
  testutil::write_file(
      tmp.path / "boxes.json",
      R"({"boxes": [
        {"name": "human", "x": 0, "y": 0, "z": 1, "dx": 0.6, "dy": 0.6, "dz": 1.8},
        {"name": "trocar", "x": 1, "y": 2, "z": 0.1, "dx": 0.1, "dy": 0.1, "dz": 0.2, "yaw": 0.5}
      ]})");
  const auto run = run_cli("convert json2kitti -i " +
                           (tmp.path / "boxes.json").string());
  CHECK(run.code == 0);
  CHECK(run.output ==
        "human 0 0 1 0.6 0.6 1.8 0\n"
        "trocar 1 2 0.1 0.1 0.1 0.2 0.5\n");
}

TEST_CASE("pcl subcommands run the preprocessing chain") {
  testutil::TempDir tmp;
  surgkit::PointCloud cloud;
  for (int i = 0; i < 8; ++i) {
    const float v = 0.25f * static_cast<float>(i);  // 0 .. 1.75
    cloud.points.push_back({v, v, v, 1.0f});
  }
  surgkit::write_pointcloud(tmp.path / "in.ply", cloud,
                            surgkit::CloudFormat::Ply,
                            surgkit::CloudEncoding::Ascii);

  const auto down = run_cli("pcl downsample -i " +
                            (tmp.path / "in.ply").string() + " -o " +
                            (tmp.path / "down.pcd").string() + " --leaf 0.5");
  CHECK(down.code == 0);
  CHECK(contains(down.output, "8 -> 4 points"));

  const auto crop = run_cli("pcl crop -i " + (tmp.path / "in.ply").string() +
                            " -o " + (tmp.path / "crop.bin").string() +
                            " --min 0,0,0 --max 1,1,1");
  CHECK(crop.code == 0);
  CHECK(contains(crop.output, "8 -> 4 points"));  // 0, 0.25, 0.5, 0.75

  const auto vox = run_cli("pcl voxelize -i " + (tmp.path / "in.ply").string() +
                           " --voxel-size 0.5 --min 0,0,0 --max 2,2,2" +
                           " --max-points 1");
  CHECK(vox.code == 0);
  const auto doc = nlohmann::json::parse(vox.output);
  CHECK(doc.at("schema") == "surgkit.voxels/1");
  CHECK(doc.at("dims") == nlohmann::json::array({4, 4, 4}));
  CHECK(doc.at("occupied_voxels") == 4);
  CHECK(doc.at("stored_points") == 4);
  CHECK(doc.at("total_points") == 8);
}

TEST_CASE("tubes then graphs round trip through files") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path / "det.json", coco_frames(4, true));

  const auto tubes = run_cli("tubes --det " + (tmp.path / "det.json").string() +
                             " -o " + (tmp.path / "tubes.json").string() +
                             " --video vid7");
  CHECK(tubes.code == 0);
  CHECK(contains(tubes.output, "tubes: 1 (4 detections over 4 frames)"));
  const auto tube_doc =
      nlohmann::json::parse(testutil::read_file(tmp.path / "tubes.json"));
  CHECK(tube_doc.at("schema") == "surgkit.tubes/1");
  CHECK(tube_doc.at("video") == "vid7");
  REQUIRE(tube_doc.at("tubes").size() == 1);
  CHECK(tube_doc.at("tubes")[0].at("entries").size() == 4);

  const auto graphs = run_cli("graphs --tubes " +
                              (tmp.path / "tubes.json").string() + " -o " +
                              (tmp.path / "graphs.json").string() +
                              " --windows 2 --topology scene");
  CHECK(graphs.code == 0);
  CHECK(contains(graphs.output, "graphs: 2 over 4 frames"));
  const auto graph_doc =
      nlohmann::json::parse(testutil::read_file(tmp.path / "graphs.json"));
  CHECK(graph_doc.at("schema") == "surgkit.graphs/1");
  CHECK(graph_doc.at("video") == "vid7");
  REQUIRE(graph_doc.at("graphs").size() == 2);
  CHECK(graph_doc.at("graphs")[0].at("topology") == "scene");
}

}  // TEST_SUITE
