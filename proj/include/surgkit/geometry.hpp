#pragma once

#include <vector>

#include "surgkit/types.hpp"

namespace surgkit {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Counter-clockwise convex polygon; empty means empty region.
using Polygon = std::vector<Point2>;

// Shoelace area. Expects CCW winding; returns the absolute value so CW
// input does not produce negative areas.
double polygon_area(const Polygon& poly);

// Sutherland-Hodgman clip of a convex subject against a convex clip
// polygon. Both CCW. On-edge vertices are kept (epsilon 1e-9); results
// with area below 1e-12 collapse to the empty polygon.
Polygon convex_clip(const Polygon& subject, const Polygon& clip);

// Corners of an oriented box in CCW order.
Polygon box_rot_corners(const BoxRot& box);

// Wrap an angle into [-pi/2, pi/2). A rectangle is invariant under a
// half-turn, so this keeps the represented box unchanged.
double normalize_theta(double theta);

// Intersection over union. Degenerate (zero-area / zero-volume) inputs
// yield 0 rather than an error.
double iou_aa(const BoxAA& a, const BoxAA& b);
double iou_rot(const BoxRot& a, const BoxRot& b);
// Bird's-eye-view rotated footprint overlap times vertical overlap,
// over the volume union.
double iou_3d(const Box3D& a, const Box3D& b);

// Aspect-preserving resize plus symmetric padding to a fixed target.
struct LetterboxTransform {
  double scale = 1.0;
  double pad_x = 0.0;  // padding added on each side
  double pad_y = 0.0;
  double target_w = 640.0;
  double target_h = 640.0;
};

// Throws ValidationError for non-positive source dimensions.
LetterboxTransform letterbox(double src_w, double src_h, double target_w = 640.0,
                             double target_h = 640.0);

BoxAA letterbox_apply(const LetterboxTransform& t, const BoxAA& box);
BoxAA letterbox_invert(const LetterboxTransform& t, const BoxAA& box);

}  // namespace surgkit
