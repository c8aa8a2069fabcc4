#include "surgkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "surgkit/error.hpp"

namespace surgkit {

namespace {

constexpr double kOnEdgeEps = 1e-9;
constexpr double kMinArea = 1e-12;

// Twice the signed area of triangle (a, b, p); > 0 when p is left of a->b.
double cross(const Point2& a, const Point2& b, const Point2& p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

Point2 edge_intersection(const Point2& a, const Point2& b, double da, double db) {
  const double t = da / (da - db);
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

double interval_overlap(double a_min, double a_max, double b_min, double b_max) {
  return std::max(0.0, std::min(a_max, b_max) - std::max(a_min, b_min));
}

}  // namespace

double polygon_area(const Polygon& poly) {
  if (poly.size() < 3) {
    return 0.0;
  }
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return std::abs(twice) / 2.0;
}

Polygon convex_clip(const Polygon& subject, const Polygon& clip) {
  if (subject.size() < 3 || clip.size() < 3) {
    return {};
  }
  Polygon output = subject;
  for (std::size_t i = 0; i < clip.size() && !output.empty(); ++i) {
    const Point2& ca = clip[i];
    const Point2& cb = clip[(i + 1) % clip.size()];
    Polygon input;
    input.swap(output);
    for (std::size_t j = 0; j < input.size(); ++j) {
      const Point2& cur = input[j];
      const Point2& nxt = input[(j + 1) % input.size()];
      const double d_cur = cross(ca, cb, cur);
      const double d_nxt = cross(ca, cb, nxt);
      const bool cur_in = d_cur >= -kOnEdgeEps;
      const bool nxt_in = d_nxt >= -kOnEdgeEps;
      if (cur_in) {
        output.push_back(cur);
        if (!nxt_in) {
          output.push_back(edge_intersection(cur, nxt, d_cur, d_nxt));
        }
      } else if (nxt_in) {
        output.push_back(edge_intersection(cur, nxt, d_cur, d_nxt));
      }
    }
  }
  if (polygon_area(output) < kMinArea) {
    return {};
  }
  return output;
}

Polygon box_rot_corners(const BoxRot& box) {
  const double c = std::cos(box.theta);
  const double s = std::sin(box.theta);
  const double hw = box.w / 2.0;
  const double hh = box.h / 2.0;
  // Local CCW corners (+,+), (-,+), (-,-), (+,-), rotated then translated.
  const double lx[4] = {hw, -hw, -hw, hw};
  const double ly[4] = {hh, hh, -hh, -hh};
  Polygon corners(4);
  for (int i = 0; i < 4; ++i) {
    corners[i] = {box.cx + c * lx[i] - s * ly[i], box.cy + s * lx[i] + c * ly[i]};
  }
  return corners;
}

double normalize_theta(double theta) {
  const double pi = std::numbers::pi;
  double t = std::fmod(theta + pi / 2.0, pi);
  if (t < 0) {
    t += pi;
  }
  return t - pi / 2.0;
}

double iou_aa(const BoxAA& a, const BoxAA& b) {
  const double inter = interval_overlap(a.x_min, a.x_max, b.x_min, b.x_max) *
                       interval_overlap(a.y_min, a.y_max, b.y_min, b.y_max);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0 || inter <= 0.0) {
    return 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_rot(const BoxRot& a, const BoxRot& b) {
  if (a.w <= 0 || a.h <= 0 || b.w <= 0 || b.h <= 0) {
    return 0.0;
  }
  const double inter = polygon_area(convex_clip(box_rot_corners(a), box_rot_corners(b)));
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0 || inter <= 0.0) {
    return 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  if (a.volume() <= 0 || b.volume() <= 0) {
    return 0.0;
  }
  const BoxRot bev_a{a.x, a.y, a.dx, a.dy, a.yaw};
  const BoxRot bev_b{b.x, b.y, b.dx, b.dy, b.yaw};
  const double bev_inter =
      polygon_area(convex_clip(box_rot_corners(bev_a), box_rot_corners(bev_b)));
  const double z_overlap = interval_overlap(a.z - a.dz / 2.0, a.z + a.dz / 2.0,
                                            b.z - b.dz / 2.0, b.z + b.dz / 2.0);
  const double inter = bev_inter * z_overlap;
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0 || inter <= 0.0) {
    return 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

LetterboxTransform letterbox(double src_w, double src_h, double target_w,
                             double target_h) {
  if (src_w <= 0 || src_h <= 0) {
    throw ValidationError("letterbox: source dimensions must be positive");
  }
  if (target_w <= 0 || target_h <= 0) {
    throw ValidationError("letterbox: target dimensions must be positive");
  }
  LetterboxTransform t;
  t.target_w = target_w;
  t.target_h = target_h;
  t.scale = std::min(target_w / src_w, target_h / src_h);
  t.pad_x = (target_w - src_w * t.scale) / 2.0;
  t.pad_y = (target_h - src_h * t.scale) / 2.0;
  return t;
}

BoxAA letterbox_apply(const LetterboxTransform& t, const BoxAA& box) {
  return {box.x_min * t.scale + t.pad_x, box.y_min * t.scale + t.pad_y,
          box.x_max * t.scale + t.pad_x, box.y_max * t.scale + t.pad_y};
}

BoxAA letterbox_invert(const LetterboxTransform& t, const BoxAA& box) {
  return {(box.x_min - t.pad_x) / t.scale, (box.y_min - t.pad_y) / t.scale,
          (box.x_max - t.pad_x) / t.scale, (box.y_max - t.pad_y) / t.scale};
}

}  // namespace surgkit
