#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace surgkit {

// Axis-aligned box, corner representation. Units are pixels unless the
// surrounding format says otherwise (YOLO label files store normalized
// values; they are denormalized on read).
struct BoxAA {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
};

// Oriented box: center, side lengths, rotation angle.
// Convention: theta in [-pi/2, pi/2), w measured along the theta direction.
struct BoxRot {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double theta = 0.0;

  double area() const { return w * h; }
};

// 3D box: center (x, y, z) in meters, extents (dx, dy, dz), yaw about +z.
struct Box3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;
  double yaw = 0.0;

  double volume() const { return dx * dy * dz; }
};

using Geometry = std::variant<BoxAA, BoxRot, Box3D>;

// A labeled box. Ground truth when score is absent, detection when present.
struct Annotation {
  int class_id = 0;
  Geometry geometry;
  std::optional<double> score;

  bool is_detection() const { return score.has_value(); }
};

struct Frame {
  std::string id;
  double image_width = 0.0;
  double image_height = 0.0;
  std::string source;  // e.g. "pilot1", "pilot2", a session tag; may be empty
  std::vector<Annotation> annotations;
};

struct ClassEntry {
  int id = 0;
  std::string name;
};

// Ordered class list with contiguous ids starting at 0. Name lookups are
// case-insensitive and whitespace-normalized.
class ClassCatalog {
 public:
  ClassCatalog() = default;

  // Names become ids 0..n-1 in the given order. Throws ValidationError on
  // empty or duplicate names (after normalization).
  explicit ClassCatalog(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

  bool contains(int id) const {
    return id >= 0 && static_cast<std::size_t>(id) < names_.size();
  }
  const std::string& name_of(int id) const;  // throws on unknown id
  std::optional<int> find(std::string_view name) const;

  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const ClassCatalog& other) const = default;

 private:
  std::vector<std::string> names_;
};

// The eight instrument classes of the endoscope set, ids in listing order.
ClassCatalog endoscope_catalog();

// Lowercase, trim, collapse internal whitespace runs to single spaces.
std::string normalize_class_name(std::string_view name);

// Lookup by name (normalized) or by id. Throws ValidationError when the
// catalog is empty or the entry does not exist.
ClassEntry resolve_class(const ClassCatalog& catalog, std::string_view name);
ClassEntry resolve_class(const ClassCatalog& catalog, int id);
// Accepts either a decimal id or a class name in one string.
ClassEntry resolve_class_token(const ClassCatalog& catalog,
                               std::string_view name_or_id);

struct Dataset {
  ClassCatalog catalog;
  std::vector<Frame> frames;
};

// Checks frame-id uniqueness, image dimensions (positive whenever a frame
// carries image-plane boxes) and that every annotation's class id resolves
// against the catalog.
void validate_dataset(const Dataset& dataset);

}  // namespace surgkit
