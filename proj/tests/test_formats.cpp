#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "surgkit/coco.hpp"
#include "surgkit/error.hpp"
#include "surgkit/kitti.hpp"
#include "surgkit/labels.hpp"
#include "surgkit/pointcloud_io.hpp"
#include "test_util.hpp"

using namespace surgkit;

namespace {

const char* kCocoSample = R"({
  "images": [
    {"id": 10, "file_name": "video1/frame_0002.png", "width": 1280, "height": 720, "source": "pilot1"},
    {"id": 11, "file_name": "video1/frame_0001.png", "width": 1280, "height": 720, "source": "pilot1"}
  ],
  "annotations": [
    {"id": 1, "image_id": 10, "category_id": 7, "bbox": [100, 50, 40, 30]},
    {"id": 2, "image_id": 10, "category_id": 3, "bbox": [0, 0, 10, 10], "segmentation": [[0,0,1,0,1,1]]},
    {"id": 3, "image_id": 11, "category_id": 7, "bbox": [1270, 700, 40, 40], "score": 0.75}
  ],
  "categories": [
    {"id": 7, "name": "scissors"},
    {"id": 3, "name": "grasper"}
  ]
})";

std::uint32_t float_bits(float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, sizeof(u));
  return u;
}

bool clouds_bit_equal(const PointCloud& a, const PointCloud& b) {
  if (a.points.size() != b.points.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (float_bits(a.points[i].x) != float_bits(b.points[i].x) ||
        float_bits(a.points[i].y) != float_bits(b.points[i].y) ||
        float_bits(a.points[i].z) != float_bits(b.points[i].z) ||
        float_bits(a.points[i].intensity) != float_bits(b.points[i].intensity)) {
      return false;
    }
  }
  return true;
}

PointCloud random_cloud(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> coord(-50.0f, 50.0f);
  std::uniform_real_distribution<float> inten(0.0f, 1.0f);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.push_back({coord(rng), coord(rng), coord(rng), inten(rng)});
  }
  return cloud;
}

}  // namespace

TEST_SUITE("formats") {

TEST_CASE("file_name_stem strips directories and extensions") {
  CHECK(file_name_stem("images/frame_0001.jpg") == "frame_0001");
  CHECK(file_name_stem("frame_0001.png") == "frame_0001");
  CHECK(file_name_stem("a/b\\c/frame.2.png") == "frame.2");
  CHECK(file_name_stem("noext") == "noext");
}

TEST_CASE("coco parse remaps categories and keeps frame identity") {
  CocoParseInfo info;
  Dataset ds = parse_coco(kCocoSample, "sample.json", &info);

  // Categories sorted by original id: 3 -> 0 (grasper), 7 -> 1 (scissors).
  REQUIRE(ds.catalog.size() == 2);
  CHECK(ds.catalog.name_of(0) == "grasper");
  CHECK(ds.catalog.name_of(1) == "scissors");
  CHECK(info.category_id_map.at(3) == 0);
  CHECK(info.category_id_map.at(7) == 1);

  REQUIRE(ds.frames.size() == 2);
  const Frame* f1 = nullptr;
  const Frame* f2 = nullptr;
  for (const auto& f : ds.frames) {
    if (f.id == "frame_0001") f1 = &f;
    if (f.id == "frame_0002") f2 = &f;
  }
  REQUIRE(f1 != nullptr);
  REQUIRE(f2 != nullptr);
  CHECK(f1->image_width == 1280);
  CHECK(f1->image_height == 720);
  CHECK(f1->source == "pilot1");

  REQUIRE(f2->annotations.size() == 2);
  const auto& box = std::get<BoxAA>(f2->annotations[0].geometry);
  CHECK(box.x_min == doctest::Approx(100.0));
  CHECK(box.y_min == doctest::Approx(50.0));
  CHECK(box.x_max == doctest::Approx(140.0));
  CHECK(box.y_max == doctest::Approx(80.0));
  CHECK(f2->annotations[0].class_id == 1);
  CHECK_FALSE(f2->annotations[0].is_detection());

  // Detection score passes through; the out-of-bounds box is clamped.
  REQUIRE(f1->annotations.size() == 1);
  CHECK(f1->annotations[0].is_detection());
  CHECK(*f1->annotations[0].score == doctest::Approx(0.75));
  const auto& clamped = std::get<BoxAA>(f1->annotations[0].geometry);
  CHECK(clamped.x_max == doctest::Approx(1280.0));
  CHECK(clamped.y_max == doctest::Approx(720.0));

  CHECK(info.images == 2);
  CHECK(info.annotations == 3);
  CHECK(info.segmentation_fields_ignored == 1);
  CHECK(info.boxes_clamped == 1);
  CHECK(info.instances_per_class.at(0) == 1);
  CHECK(info.instances_per_class.at(1) == 2);
}

TEST_CASE("coco parse rejects malformed documents") {
  SUBCASE("invalid json") {
    CHECK_THROWS_AS(parse_coco("{not json", "x"), ParseError);
  }
  SUBCASE("top level must be an object with the three arrays") {
    CHECK_THROWS_AS(parse_coco("[]", "x"), ParseError);
    CHECK_THROWS_AS(parse_coco(R"({"images": [], "annotations": []})", "x"),
                    ParseError);
  }
  SUBCASE("dangling image reference") {
    CHECK_THROWS_AS(
        parse_coco(R"({"images": [], "annotations": [{"image_id": 1,
          "category_id": 1, "bbox": [0,0,1,1]}],
          "categories": [{"id": 1, "name": "a"}]})",
                   "x"),
        ParseError);
  }
  SUBCASE("dangling category reference") {
    CHECK_THROWS_AS(
        parse_coco(R"({"images": [{"id": 1, "file_name": "f.png",
          "width": 10, "height": 10}],
          "annotations": [{"image_id": 1, "category_id": 9, "bbox": [0,0,1,1]}],
          "categories": [{"id": 1, "name": "a"}]})",
                   "x"),
        ParseError);
  }
  SUBCASE("negative bbox size") {
    CHECK_THROWS_AS(
        parse_coco(R"({"images": [{"id": 1, "file_name": "f.png",
          "width": 10, "height": 10}],
          "annotations": [{"image_id": 1, "category_id": 1, "bbox": [0,0,-1,1]}],
          "categories": [{"id": 1, "name": "a"}]})",
                   "x"),
        ParseError);
  }
  SUBCASE("duplicate category id") {
    CHECK_THROWS_AS(
        parse_coco(R"({"images": [], "annotations": [],
          "categories": [{"id": 1, "name": "a"}, {"id": 1, "name": "b"}]})",
                   "x"),
        ParseError);
  }
  SUBCASE("duplicate image id or file stem") {
    CHECK_THROWS_AS(
        parse_coco(R"({"images": [
          {"id": 1, "file_name": "f.png", "width": 4, "height": 4},
          {"id": 1, "file_name": "g.png", "width": 4, "height": 4}],
          "annotations": [], "categories": [{"id": 1, "name": "a"}]})",
                   "x"),
        ParseError);
    CHECK_THROWS_AS(
        parse_coco(R"({"images": [
          {"id": 1, "file_name": "d1/f.png", "width": 4, "height": 4},
          {"id": 2, "file_name": "d2/f.png", "width": 4, "height": 4}],
          "annotations": [], "categories": [{"id": 1, "name": "a"}]})",
                   "x"),
        ParseError);
  }
  SUBCASE("non-positive image size") {
    CHECK_THROWS_AS(
        parse_coco(R"({"images": [{"id": 1, "file_name": "f.png",
          "width": 0, "height": 10}],
          "annotations": [], "categories": [{"id": 1, "name": "a"}]})",
                   "x"),
        ParseError);
  }
}

TEST_CASE("yolo lines use six decimals and normalized center form") {
  Frame frame;
  frame.id = "f";
  frame.image_width = 100;
  frame.image_height = 100;
  frame.annotations.push_back({2, BoxAA{10, 20, 30, 60}, std::nullopt});
  frame.annotations.push_back({0, BoxAA{0, 0, 50, 50}, 0.75});
  CHECK(format_yolo_lines(frame) ==
        "2 0.200000 0.400000 0.200000 0.400000\n"
        "0 0.250000 0.250000 0.500000 0.500000 0.750000\n");

  FrameMeta meta{"f", 100, 100, ""};
  Frame back = parse_yolo_lines(format_yolo_lines(frame), meta, "f.txt");
  REQUIRE(back.annotations.size() == 2);
  CHECK(back.annotations[0].class_id == 2);
  CHECK_FALSE(back.annotations[0].is_detection());
  CHECK(*back.annotations[1].score == doctest::Approx(0.75));
}

TEST_CASE("yolo round trip stays within half a pixel") {
  std::mt19937_64 rng(7);
  const double iw = 1280, ih = 720;
  Frame frame;
  frame.id = "rt";
  frame.image_width = iw;
  frame.image_height = ih;
  for (int i = 0; i < 200; ++i) {
    frame.annotations.push_back({i % 5, testutil::random_box_aa(rng, iw, ih),
                                 std::nullopt});
  }
  FrameMeta meta{"rt", iw, ih, ""};
  Frame back = parse_yolo_lines(format_yolo_lines(frame), meta, "rt.txt");
  REQUIRE(back.annotations.size() == frame.annotations.size());
  for (std::size_t i = 0; i < frame.annotations.size(); ++i) {
    const auto& a = std::get<BoxAA>(frame.annotations[i].geometry);
    const auto& b = std::get<BoxAA>(back.annotations[i].geometry);
    CHECK(std::abs(a.x_min - b.x_min) <= 0.5);
    CHECK(std::abs(a.y_min - b.y_min) <= 0.5);
    CHECK(std::abs(a.x_max - b.x_max) <= 0.5);
    CHECK(std::abs(a.y_max - b.y_max) <= 0.5);
  }
}

TEST_CASE("yolo parse validates fields") {
  FrameMeta meta{"f", 100, 100, ""};
  CHECK_THROWS_AS(parse_yolo_lines("0 0.5 0.5 0.1\n", meta, "x"), ParseError);
  CHECK_THROWS_AS(parse_yolo_lines("0 0.5 0.5 0.1 0.1 0.9 1\n", meta, "x"),
                  ParseError);
  CHECK_THROWS_AS(parse_yolo_lines("0 1.5 0.5 0.1 0.1\n", meta, "x"), ParseError);
  CHECK_THROWS_AS(parse_yolo_lines("0 0.5 0.5 0.1 0.1 1.5\n", meta, "x"),
                  ParseError);
  CHECK_THROWS_AS(parse_yolo_lines("a 0.5 0.5 0.1 0.1\n", meta, "x"), ParseError);
  CHECK_THROWS_AS(parse_yolo_lines("-1 0.5 0.5 0.1 0.1\n", meta, "x"), ParseError);
  CHECK_THROWS_AS(parse_yolo_lines("0 0.5 0.5 0.1 0.1\n", FrameMeta{"f", 0, 100, ""},
                                   "x"),
                  ValidationError);
  // Blank lines are skipped.
  Frame ok = parse_yolo_lines("\n0 0.5 0.5 0.1 0.1\n\n", meta, "x");
  CHECK(ok.annotations.size() == 1);
}

TEST_CASE("yolo label directory round trip") {
  testutil::TempDir tmp;
  Dataset ds;
  ds.catalog = ClassCatalog({"a", "b"});
  Frame f1{"frame_a", 64, 48, "s1", {{0, BoxAA{4, 4, 20, 24}, std::nullopt}}};
  Frame f2{"frame_b", 64, 48, "s1", {}};
  ds.frames = {f1, f2};

  auto written = write_yolo_labels(ds, tmp.path / "labels");
  REQUIRE(written.size() == 2);
  CHECK(testutil::read_file(tmp.path / "labels" / "frame_b.txt").empty());

  std::vector<FrameMeta> metas = {{"frame_a", 64, 48, "s1"},
                                  {"frame_b", 64, 48, "s1"}};
  Dataset back = read_yolo_labels(tmp.path / "labels", metas, ds.catalog);
  REQUIRE(back.frames.size() == 2);
  CHECK(back.frames[0].annotations.size() == 1);
  CHECK(back.frames[1].annotations.empty());

  metas.push_back({"frame_c", 64, 48, "s1"});
  CHECK_THROWS_AS(read_yolo_labels(tmp.path / "labels", metas, ds.catalog),
                  IoError);
}

TEST_CASE("rotated label lines round trip and normalize theta") {
  Frame frame;
  frame.id = "r";
  frame.annotations.push_back({1, BoxRot{120.5, 80.25, 30, 12, 0.7}, std::nullopt});
  frame.annotations.push_back({0, BoxRot{10, 20, 5, 5, -1.2}, 0.5});
  const std::string text = format_rot_lines(frame);

  Frame back = parse_rot_lines(text, FrameMeta{"r", 0, 0, ""}, "r.txt");
  REQUIRE(back.annotations.size() == 2);
  const auto& b0 = std::get<BoxRot>(back.annotations[0].geometry);
  CHECK(b0.cx == doctest::Approx(120.5));
  CHECK(b0.cy == doctest::Approx(80.25));
  CHECK(b0.w == doctest::Approx(30));
  CHECK(b0.h == doctest::Approx(12));
  CHECK(b0.theta == doctest::Approx(0.7));
  CHECK(*back.annotations[1].score == doctest::Approx(0.5));

  // Angles outside [-pi/2, pi/2) are folded back on read.
  Frame folded = parse_rot_lines("0 10 10 4 4 2.0\n", FrameMeta{"t", 0, 0, ""}, "x");
  const auto& fb = std::get<BoxRot>(folded.annotations[0].geometry);
  CHECK(fb.theta == doctest::Approx(2.0 - 3.14159265358979323846).epsilon(1e-9));

  CHECK_THROWS_AS(parse_rot_lines("0 10 10 0 4 0.0\n", FrameMeta{"t", 0, 0, ""}, "x"),
                  ParseError);
  CHECK_THROWS_AS(parse_rot_lines("0 10 10 4 4\n", FrameMeta{"t", 0, 0, ""}, "x"),
                  ParseError);
}

TEST_CASE("rotated label directory round trip") {
  testutil::TempDir tmp;
  Dataset ds;
  ds.catalog = ClassCatalog({"a", "b"});
  ds.frames.push_back(
      {"v1_000", 0, 0, "", {{1, BoxRot{50, 50, 20, 10, 0.3}, std::nullopt}}});
  ds.frames.push_back({"v1_001", 0, 0, "", {}});
  write_rot_labels(ds, tmp.path / "rot");

  auto stems = list_label_stems(tmp.path / "rot");
  CHECK(stems == std::vector<std::string>{"v1_000", "v1_001"});

  Dataset back = read_rot_labels(tmp.path / "rot", ds.catalog);
  REQUIRE(back.frames.size() == 2);
  CHECK(back.frames[0].id == "v1_000");
  CHECK(back.frames[0].annotations.size() == 1);
  CHECK(back.frames[1].annotations.empty());

  CHECK_THROWS_AS(list_label_stems(tmp.path / "nope"), IoError);
}

TEST_CASE("kitti lines use shortest g format") {
  std::vector<Named3DBox> boxes;
  boxes.push_back({"Human", Box3D{0, 0, 1, 0.6, 0.6, 1.8, 0}, std::nullopt});
  CHECK(format_kitti_lines(boxes) == "Human 0 0 1 0.6 0.6 1.8 0\n");

  boxes[0].score = 0.5;
  CHECK(format_kitti_lines(boxes) == "Human 0 0 1 0.6 0.6 1.8 0 0.5\n");

  Frame frame{"f", 0, 0, "", {{0, Box3D{1.5, -2, 0.25, 1, 2, 3, -0.5}, std::nullopt}}};
  CHECK(format_kitti_lines(frame, ClassCatalog({"trocar"})) ==
        "trocar 1.5 -2 0.25 1 2 3 -0.5\n");
}

TEST_CASE("kitti parse validates shape and ranges") {
  auto boxes = parse_kitti_lines("Human 0 0 1 0.6 0.6 1.8 0\n"
                                 "Tool 1 2 3 0.5 0.5 0.5 0.1 0.9\n",
                                 "x");
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0].name == "Human");
  CHECK_FALSE(boxes[0].score.has_value());
  CHECK(boxes[1].box.yaw == doctest::Approx(0.1));
  CHECK(*boxes[1].score == doctest::Approx(0.9));

  CHECK_THROWS_AS(parse_kitti_lines("Human 0 0 1 0.6 0.6 1.8\n", "x"), ParseError);
  CHECK_THROWS_AS(parse_kitti_lines("Human 0 0 1 0.6 0.6 1.8 0 0.5 junk\n", "x"),
                  ParseError);
  CHECK_THROWS_AS(parse_kitti_lines("Human 0 0 1 0 0.6 1.8 0\n", "x"), ParseError);
  CHECK_THROWS_AS(parse_kitti_lines("Human 0 0 1 0.6 0.6 1.8 0 1.5\n", "x"),
                  ParseError);
}

TEST_CASE("kitti label directory round trip resolves names") {
  testutil::TempDir tmp;
  Dataset ds;
  ds.catalog = ClassCatalog({"human", "trocar"});
  ds.frames.push_back(
      {"000000", 0, 0, "", {{0, Box3D{0, 0, 1, 0.6, 0.6, 1.8, 0}, std::nullopt}}});
  ds.frames.push_back(
      {"000001", 0, 0, "", {{1, Box3D{2, 1, 0.5, 0.1, 0.1, 0.3, 0.2}, 0.8}}});
  write_kitti_labels(ds, tmp.path / "kitti");

  Dataset back = read_kitti_labels(tmp.path / "kitti", ds.catalog);
  REQUIRE(back.frames.size() == 2);
  CHECK(back.frames[0].annotations[0].class_id == 0);
  CHECK(back.frames[1].annotations[0].class_id == 1);
  CHECK(*back.frames[1].annotations[0].score == doctest::Approx(0.8));
  const auto& b = std::get<Box3D>(back.frames[0].annotations[0].geometry);
  CHECK(b.dz == doctest::Approx(1.8));

  // Unknown class names in the files are rejected on read.
  CHECK_THROWS_AS(read_kitti_labels(tmp.path / "kitti", ClassCatalog({"other"})),
                  ValidationError);
}

TEST_CASE("3d annotation json accepts flat and platform layouts") {
  auto flat = parse_boxes3d_json(
      R"({"boxes": [
        {"name": "human", "x": 1, "y": 2, "z": 0.9, "dx": 0.6, "dy": 0.6, "dz": 1.8, "yaw": 0.3, "score": 0.9},
        {"name": "trocar", "x": 0, "y": 0, "z": 0.1, "dx": 0.1, "dy": 0.1, "dz": 0.2}
      ]})",
      "flat.json");
  REQUIRE(flat.size() == 2);
  CHECK(flat[0].name == "human");
  CHECK(flat[0].box.yaw == doctest::Approx(0.3));
  CHECK(*flat[0].score == doctest::Approx(0.9));
  CHECK(flat[1].box.yaw == 0.0);  // yaw defaults to 0
  CHECK_FALSE(flat[1].score.has_value());

  auto platform = parse_boxes3d_json(
      R"({"objects": [{"key": "k1", "classTitle": "human"}],
          "figures": [{"objectKey": "k1", "geometry": {
            "position": {"x": 1, "y": 2, "z": 0.9},
            "dimensions": {"x": 0.6, "y": 0.7, "z": 1.8},
            "rotation": {"x": 0, "y": 0, "z": 0.4}}}]})",
      "platform.json");
  REQUIRE(platform.size() == 1);
  CHECK(platform[0].name == "human");
  CHECK(platform[0].box.dy == doctest::Approx(0.7));
  CHECK(platform[0].box.yaw == doctest::Approx(0.4));

  CHECK_THROWS_AS(parse_boxes3d_json("{}", "x"), ParseError);
  CHECK_THROWS_AS(parse_boxes3d_json(R"({"boxes": [{"name": "a", "x": 1}]})", "x"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_boxes3d_json(
          R"({"figures": [{"objectKey": "missing", "geometry": {
            "position": {"x": 0, "y": 0, "z": 0},
            "dimensions": {"x": 1, "y": 1, "z": 1},
            "rotation": {"x": 0, "y": 0, "z": 0}}}]})",
          "x"),
      ParseError);
}

TEST_CASE("bin records are 16-byte little-endian float quadruples") {
  PointCloud cloud;
  cloud.points.push_back({1.0f, -2.0f, 0.5f, 3.0f});
  const std::string bytes = format_bin(cloud);
  REQUIRE(bytes.size() == 16);
  const unsigned char expect[16] = {0x00, 0x00, 0x80, 0x3F,   // 1.0f
                                    0x00, 0x00, 0x00, 0xC0,   // -2.0f
                                    0x00, 0x00, 0x00, 0x3F,   // 0.5f
                                    0x00, 0x00, 0x40, 0x40};  // 3.0f
  CHECK(std::memcmp(bytes.data(), expect, 16) == 0);

  PointCloud back = parse_bin(bytes, "x");
  CHECK(clouds_bit_equal(cloud, back));
  CHECK_THROWS_AS(parse_bin(bytes.substr(0, 13), "x"), ParseError);
}

TEST_CASE("ply round trips are bit exact in both encodings") {
  PointCloud cloud = random_cloud(257, 42);
  CHECK(clouds_bit_equal(cloud, parse_ply(format_ply(cloud, CloudEncoding::Ascii),
                                          "a.ply")));
  CHECK(clouds_bit_equal(cloud, parse_ply(format_ply(cloud, CloudEncoding::Binary),
                                          "b.ply")));
}

TEST_CASE("ply parser handles layout variants") {
  SUBCASE("xyz only reads intensity as zero") {
    const std::string text =
        "ply\nformat ascii 1.0\nelement vertex 2\n"
        "property float x\nproperty float y\nproperty float z\n"
        "end_header\n1 2 3\n4 5 6\n";
    PointCloud cloud = parse_ply(text, "x");
    REQUIRE(cloud.points.size() == 2);
    CHECK(cloud.points[1].y == 5.0f);
    CHECK(cloud.points[0].intensity == 0.0f);
  }
  SUBCASE("extra scalar properties and comments are skipped") {
    const std::string text =
        "ply\ncomment made somewhere\nformat ascii 1.0\nelement vertex 1\n"
        "property float x\nproperty uchar red\nproperty float y\n"
        "property float z\nproperty float intensity\n"
        "end_header\n1 99 2 3 0.5\n";
    PointCloud cloud = parse_ply(text, "x");
    REQUIRE(cloud.points.size() == 1);
    CHECK(cloud.points[0].x == 1.0f);
    CHECK(cloud.points[0].y == 2.0f);
    CHECK(cloud.points[0].z == 3.0f);
    CHECK(cloud.points[0].intensity == 0.5f);
  }
  SUBCASE("double coordinates are accepted") {
    const std::string text =
        "ply\nformat ascii 1.0\nelement vertex 1\n"
        "property double x\nproperty double y\nproperty double z\n"
        "end_header\n0.25 -1.5 8\n";
    PointCloud cloud = parse_ply(text, "x");
    CHECK(cloud.points[0].y == -1.5f);
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(parse_ply("solid\n", "x"), ParseError);
    CHECK_THROWS_AS(parse_ply("ply\nformat big_endian 1.0\nend_header\n", "x"),
                    ParseError);
    CHECK_THROWS_AS(
        parse_ply("ply\nformat ascii 1.0\nelement vertex 1\n"
                  "property list uchar int vertex_indices\nend_header\n",
                  "x"),
        ParseError);
    CHECK_THROWS_AS(parse_ply("ply\nformat ascii 1.0\nelement vertex 1\n"
                              "property float x\nproperty float y\n"
                              "property float z\nend_header\n1 2\n",
                              "x"),
                    ParseError);
    // Binary payload shorter than declared.
    PointCloud cloud = random_cloud(4, 1);
    std::string bin = format_ply(cloud, CloudEncoding::Binary);
    CHECK_THROWS_AS(parse_ply(std::string_view(bin).substr(0, bin.size() - 8), "x"),
                    ParseError);
  }
}

TEST_CASE("pcd round trips are bit exact in both encodings") {
  PointCloud cloud = random_cloud(193, 9);
  CHECK(clouds_bit_equal(cloud, parse_pcd(format_pcd(cloud, CloudEncoding::Ascii),
                                          "a.pcd")));
  CHECK(clouds_bit_equal(cloud, parse_pcd(format_pcd(cloud, CloudEncoding::Binary),
                                          "b.pcd")));
}

TEST_CASE("pcd parser enforces the strict header contract") {
  const std::string xyz =
      "VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n"
      "WIDTH 2\nHEIGHT 1\nPOINTS 2\nDATA ascii\n1 2 3\n4 5 6\n";
  PointCloud cloud = parse_pcd(xyz, "x");
  REQUIRE(cloud.points.size() == 2);
  CHECK(cloud.points[0].intensity == 0.0f);
  CHECK(cloud.points[1].z == 6.0f);

  SUBCASE("width*height substitutes for POINTS") {
    const std::string wh =
        "FIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nWIDTH 2\nHEIGHT 1\n"
        "DATA ascii\n1 2 3\n4 5 6\n";
    CHECK(parse_pcd(wh, "x").points.size() == 2);
  }
  SUBCASE("field layout rejections") {
    CHECK_THROWS_AS(
        parse_pcd("FIELDS x y z rgb\nSIZE 4 4 4 4\nTYPE F F F F\n"
                  "POINTS 0\nDATA ascii\n",
                  "x"),
        ParseError);
    CHECK_THROWS_AS(
        parse_pcd("FIELDS x y z\nSIZE 4 4 8\nTYPE F F F\nPOINTS 0\nDATA ascii\n",
                  "x"),
        ParseError);
    CHECK_THROWS_AS(
        parse_pcd("FIELDS x y z\nSIZE 4 4 4\nTYPE F F U\nPOINTS 0\nDATA ascii\n",
                  "x"),
        ParseError);
    CHECK_THROWS_AS(
        parse_pcd("FIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nPOINTS 0\nDATA weird\n",
                  "x"),
        ParseError);
  }
  SUBCASE("count mismatches") {
    CHECK_THROWS_AS(
        parse_pcd("FIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nPOINTS 2\n"
                  "DATA ascii\n1 2 3\n",
                  "x"),
        ParseError);
    CHECK_THROWS_AS(
        parse_pcd("FIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nPOINTS 1\n"
                  "DATA ascii\n1 2 3\n4 5 6\n",
                  "x"),
        ParseError);
    PointCloud two = random_cloud(2, 3);
    std::string bin = format_pcd(two, CloudEncoding::Binary);
    CHECK_THROWS_AS(parse_pcd(std::string_view(bin).substr(0, bin.size() - 4), "x"),
                    ParseError);
    CHECK_THROWS_AS(parse_pcd(bin + "zzzz", "x"), ParseError);
  }
}

TEST_CASE("ply to pcd to bin conversion chain is bit exact") {
  testutil::TempDir tmp;
  PointCloud original = random_cloud(512, 2026);

  write_pointcloud(tmp.path / "cloud.ply", original, CloudFormat::Ply,
                   CloudEncoding::Binary);
  PointCloud from_ply = read_pointcloud(tmp.path / "cloud.ply");
  write_pointcloud(tmp.path / "cloud.pcd", from_ply, CloudFormat::Pcd,
                   CloudEncoding::Binary);
  PointCloud from_pcd = read_pointcloud(tmp.path / "cloud.pcd");
  write_pointcloud(tmp.path / "cloud.bin", from_pcd, CloudFormat::Bin,
                   CloudEncoding::Binary);
  PointCloud from_bin = read_pointcloud(tmp.path / "cloud.bin");

  CHECK(clouds_bit_equal(original, from_ply));
  CHECK(clouds_bit_equal(original, from_pcd));
  CHECK(clouds_bit_equal(original, from_bin));
  CHECK(testutil::read_file(tmp.path / "cloud.bin") == format_bin(original));

  CHECK_THROWS_AS(read_pointcloud(tmp.path / "missing.ply"), IoError);
}

TEST_CASE("cloud format from extension") {
  CHECK(cloud_format_from_extension("a/b.ply") == CloudFormat::Ply);
  CHECK(cloud_format_from_extension("c.PCD") == CloudFormat::Pcd);
  CHECK(cloud_format_from_extension("d.BiN") == CloudFormat::Bin);
  CHECK_THROWS_AS(cloud_format_from_extension("e.xyz"), ValidationError);
}

}  // TEST_SUITE
