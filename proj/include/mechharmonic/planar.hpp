#pragma once

// Planar geometry substrate: points, circle intersection, two-branch RR
// dyad closure and transmission angle.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace mechharmonic {

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline Point2 operator*(Point2 p, double s) { return s * p; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline Point2 perp(Point2 p) { return {-p.y, p.x}; }
inline Point2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline double direction_angle(Point2 p) { return std::atan2(p.y, p.x); }

inline bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Wraps an angle difference into (-pi, pi].
inline double wrap_signed(double angle) {
  double w = std::remainder(angle, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

inline double deg_from_rad(double rad) { return rad * 180.0 / kPi; }
inline double rad_from_deg(double deg) { return deg * kPi / 180.0; }

// The two assembly configurations of an RR dyad. Open is the solution whose
// elbow lies on the counter-clockwise side of the base->target segment.
enum class Branch { Open, Crossed };

struct CircleIntersections {
  int count = 0;                    // 0, 1 (tangent) or 2
  std::array<Point2, 2> points{};   // two-point results are ordered Open first
};

/// Intersects two circles. Tangent configurations within 1e-9*max(r1,r2)
/// of stretch/fold collapse to a single point. Concentric centers are a
/// degenerate input.
inline CircleIntersections circle_intersect(Point2 c1, double r1, Point2 c2, double r2) {
  if (!(r1 > 0.0) || !(r2 > 0.0)) {
    throw std::invalid_argument("circle_intersect: radii must be positive");
  }
  const double scale = std::max(r1, r2);
  const double tol = 1e-9 * scale;
  const Point2 axis = c2 - c1;
  const double d = norm(axis);
  if (d <= tol) {
    throw std::invalid_argument("circle_intersect: concentric centers");
  }

  const double gap_out = d - (r1 + r2);
  const double gap_in = std::abs(r1 - r2) - d;
  if (gap_out > tol || gap_in > tol) {
    return {};  // circles do not meet
  }

  CircleIntersections out;
  if (std::abs(gap_out) <= tol || std::abs(gap_in) <= tol) {
    // Tangent: touch point lies on the center line.
    const double sign = (std::abs(gap_out) <= tol || r1 >= r2) ? 1.0 : -1.0;
    out.count = 1;
    out.points[0] = c1 + (sign * r1 / d) * axis;
    return out;
  }

  const double a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
  const double h2 = r1 * r1 - a * a;
  const double h = std::sqrt(std::max(h2, 0.0));
  const Point2 mid = c1 + (a / d) * axis;
  const Point2 offset = (h / d) * perp(axis);
  out.count = 2;
  out.points[0] = mid + offset;  // positive cross side: Open
  out.points[1] = mid - offset;
  return out;
}

struct DyadPose {
  Point2 elbow;
  double theta_base = 0.0;    // absolute angle of link base->elbow
  double theta_target = 0.0;  // absolute angle of link elbow->target
};

/// Closes a two-link dyad from base onto target on the requested branch.
/// Returns nullopt when the target is out of reach; that is a mobility
/// signal, not a fault.
inline std::optional<DyadPose> dyad_pose(Point2 base, double l1, Point2 target, double l2,
                                         Branch branch) {
  const CircleIntersections hits = circle_intersect(base, l1, target, l2);
  if (hits.count == 0) return std::nullopt;
  const Point2 elbow = (hits.count == 1 || branch == Branch::Open) ? hits.points[0]
                                                                   : hits.points[1];
  DyadPose pose;
  pose.elbow = elbow;
  pose.theta_base = direction_angle(elbow - base);
  pose.theta_target = direction_angle(target - elbow);
  return pose;
}

/// Acute angle in degrees between segments elbow->a and elbow->b, folded
/// into [0, 90]: 90 transmits force ideally, 0 is a dead point.
inline double transmission_angle(Point2 elbow, Point2 a, Point2 b) {
  const Point2 u = a - elbow;
  const Point2 v = b - elbow;
  const double nu = norm(u);
  const double nv = norm(v);
  const double scale = std::max(nu, nv);
  if (nu <= 1e-12 * scale || nv <= 1e-12 * scale || scale == 0.0) {
    throw std::invalid_argument("transmission_angle: zero-length segment");
  }
  double c = dot(u, v) / (nu * nv);
  c = std::clamp(c, -1.0, 1.0);
  const double mu = deg_from_rad(std::acos(c));
  return std::min(mu, 180.0 - mu);
}

}  // namespace mechharmonic
