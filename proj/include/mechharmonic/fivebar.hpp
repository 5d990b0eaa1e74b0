#pragma once

// Position analysis of the hybrid five-bar: a CV crank p and coupler q drive
// the end effector along a desired path while a servo crank s and coupler r
// close the loop. The end effector is the revolute joint between q and r.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mechharmonic/planar.hpp"

namespace mechharmonic {

struct FiveBarGeometry {
  Point2 cv_pivot;     // ground pivot of the CV crank
  Point2 servo_pivot;  // ground pivot of the servo crank
  double p = 1.0;      // CV crank
  double q = 1.0;      // driving coupler
  double r = 1.0;      // closing coupler
  double s = 1.0;      // servo crank

  // Ground link length is derived from the pivots, never stored.
  double ground_length() const { return distance(cv_pivot, servo_pivot); }

  void validate() const {
    if (!(p > 0.0 && q > 0.0 && r > 0.0 && s > 0.0)) {
      throw std::invalid_argument("FiveBarGeometry: link lengths must be positive");
    }
    if (!finite(cv_pivot) || !finite(servo_pivot)) {
      throw std::invalid_argument("FiveBarGeometry: non-finite pivot");
    }
    if (ground_length() <= 1e-12 * std::max({p, q, r, s})) {
      throw std::invalid_argument("FiveBarGeometry: pivots must be distinct");
    }
  }
};

// Desired end-effector positions, one per uniformly spaced CV crank angle
// theta(i) = theta0 + 2*pi*i/n.
struct PathSpec {
  std::vector<Point2> points;
  double theta0 = 0.0;

  std::size_t size() const { return points.size(); }
  double cv_angle(std::size_t i) const {
    return theta0 + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(points.size());
  }

  void validate() const {
    if (points.size() < 4) {
      throw std::invalid_argument("PathSpec: need at least 4 points");
    }
    for (const Point2& pt : points) {
      if (!finite(pt)) throw std::invalid_argument("PathSpec: non-finite point");
    }
  }
};

struct ServoCandidate {
  double theta5 = 0.0;  // direction angle of servo crank, radians
  Branch branch = Branch::Open;
};

struct PositionSolution {
  double theta_cv = 0.0;
  Point2 knee;             // end of link p
  double theta_q = 0.0;    // direction angle of link q
  Point2 actual_end;       // achieved end-effector position
  double point_error = 0.0;
  int candidate_count = 0;
  std::array<ServoCandidate, 2> servo_candidates{};
};

struct ClosureTrace {
  std::vector<double> theta5;       // unwrapped servo angles, one per position
  std::vector<Branch> branches;
  std::vector<double> theta_cv;     // CV crank angle per position
  std::vector<Point2> end_points;   // achieved end effector per position
  bool feasible = false;
  int mobility = 0;                 // 0 .. 2n
};

/// Driving-dyad construction: the end effector is placed at distance q from
/// the knee along the line toward the desired point; the error is the
/// leftover distance mismatch.
inline PositionSolution driving_dyad_solve(const FiveBarGeometry& geom, double theta_cv,
                                           Point2 desired) {
  geom.validate();
  PositionSolution sol;
  sol.theta_cv = theta_cv;
  sol.knee = geom.cv_pivot + geom.p * unit_vector(theta_cv);
  const Point2 toward = desired - sol.knee;
  const double reach = norm(toward);
  if (reach <= 1e-12 * std::max(geom.p, geom.q)) {
    throw std::invalid_argument("driving_dyad_solve: desired point coincides with knee");
  }
  sol.theta_q = direction_angle(toward);
  sol.actual_end = sol.knee + (geom.q / reach) * toward;
  sol.point_error = std::abs(reach - geom.q);
  return sol;
}

/// Servo-dyad closures that place the joint between r and s so the chain
/// reaches actual_end. Zero, one or two candidates; empty is the mobility
/// signal, not an error.
inline std::array<ServoCandidate, 2> closing_dyad_solutions(const FiveBarGeometry& geom,
                                                            Point2 actual_end,
                                                            int* count_out = nullptr) {
  std::array<ServoCandidate, 2> out{};
  int count = 0;
  // Dyad from the servo pivot (crank s) to the end effector (coupler r).
  const double separation = distance(geom.servo_pivot, actual_end);
  if (separation > 1e-12 * std::max(geom.r, geom.s)) {
    const CircleIntersections hits =
        circle_intersect(geom.servo_pivot, geom.s, actual_end, geom.r);
    count = hits.count;
    for (int i = 0; i < hits.count; ++i) {
      out[static_cast<std::size_t>(i)] = {
          direction_angle(hits.points[static_cast<std::size_t>(i)] - geom.servo_pivot),
          i == 0 ? Branch::Open : Branch::Crossed};
    }
  }
  if (count_out) *count_out = count;
  return out;
}

/// Full position analysis at one crank angle: driving dyad plus servo
/// closure candidates.
inline PositionSolution solve_position(const FiveBarGeometry& geom, double theta_cv,
                                       Point2 desired) {
  PositionSolution sol = driving_dyad_solve(geom, theta_cv, desired);
  sol.servo_candidates = closing_dyad_solutions(geom, sol.actual_end, &sol.candidate_count);
  return sol;
}

/// Sum over positions of the unreachable servo closures (2 - candidates);
/// ranges 0..2n. A tangent position counts one reachable closure.
inline int mobility_count(const FiveBarGeometry& geom, const PathSpec& path) {
  path.validate();
  int mobility = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const PositionSolution sol = solve_position(geom, path.cv_angle(i), path.points[i]);
    mobility += 2 - sol.candidate_count;
  }
  return mobility;
}

namespace detail {

struct TrackerStep {
  std::size_t pick = 0;
  double next_theta = 0.0;
};

// Candidate choice rule: minimize the change in servo velocity, overriding
// the trend when continuing it costs a displacement step more than
// trend_override_k times larger than reversing.
inline TrackerStep choose_candidate(const std::vector<double>& unwrapped,
                                    const std::vector<ServoCandidate>& candidates,
                                    double trend_override_k) {
  const std::size_t n_done = unwrapped.size();
  const double prev = unwrapped[n_done - 1];

  std::vector<double> deltas(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    deltas[c] = wrap_signed(candidates[c].theta5 - prev);
  }

  std::size_t pick = 0;
  if (n_done == 1) {
    // No velocity history yet: smallest displacement step wins.
    for (std::size_t c = 1; c < candidates.size(); ++c) {
      if (std::abs(deltas[c]) < std::abs(deltas[pick])) pick = c;
    }
  } else {
    const double v_prev = unwrapped[n_done - 1] - unwrapped[n_done - 2];
    for (std::size_t c = 1; c < candidates.size(); ++c) {
      if (std::abs(deltas[c] - v_prev) < std::abs(deltas[pick] - v_prev)) pick = c;
    }
    if (candidates.size() == 2) {
      const std::size_t other = 1 - pick;
      if (std::abs(deltas[pick]) > trend_override_k * std::abs(deltas[other])) {
        pick = other;
      }
    }
  }
  return {pick, prev + deltas[pick]};
}

}  // namespace detail

/// Core closure tracker over per-position candidate sets. Position 0 takes
/// the open closure; later positions follow the velocity-trend rule.
inline ClosureTrace trace_candidate_sets(
    const std::vector<std::vector<ServoCandidate>>& candidate_sets,
    double trend_override_k = 5.0) {
  ClosureTrace trace;
  trace.mobility = 0;
  for (const auto& set : candidate_sets) {
    trace.mobility += 2 - static_cast<int>(std::min<std::size_t>(set.size(), 2));
    if (set.empty()) trace.feasible = false;
  }
  for (const auto& set : candidate_sets) {
    if (set.empty()) return trace;  // infeasible: no angles reported
  }

  trace.feasible = true;
  trace.theta5.reserve(candidate_sets.size());
  trace.branches.reserve(candidate_sets.size());

  // Start in the open closure.
  std::size_t first = 0;
  for (std::size_t c = 0; c < candidate_sets[0].size(); ++c) {
    if (candidate_sets[0][c].branch == Branch::Open) first = c;
  }
  trace.theta5.push_back(candidate_sets[0][first].theta5);
  trace.branches.push_back(candidate_sets[0][first].branch);

  for (std::size_t i = 1; i < candidate_sets.size(); ++i) {
    const detail::TrackerStep step =
        detail::choose_candidate(trace.theta5, candidate_sets[i], trend_override_k);
    trace.theta5.push_back(step.next_theta);
    trace.branches.push_back(candidate_sets[i][step.pick].branch);
  }
  return trace;
}

/// Tracks the servo angle through the cycle, choosing closures that keep the
/// velocity profile smooth.
inline ClosureTrace trace_closures(const FiveBarGeometry& geom, const PathSpec& path,
                                   double trend_override_k = 5.0) {
  path.validate();
  std::vector<std::vector<ServoCandidate>> sets(path.size());
  std::vector<Point2> ends(path.size());
  std::vector<double> cv_angles(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    cv_angles[i] = path.cv_angle(i);
    const PositionSolution sol = solve_position(geom, cv_angles[i], path.points[i]);
    ends[i] = sol.actual_end;
    sets[i].assign(sol.servo_candidates.begin(),
                   sol.servo_candidates.begin() + sol.candidate_count);
  }
  ClosureTrace trace = trace_candidate_sets(sets, trend_override_k);
  if (trace.feasible) {
    trace.end_points = std::move(ends);
    trace.theta_cv = std::move(cv_angles);
  }
  return trace;
}

struct MotionDerivatives {
  std::vector<double> velocity;
  std::vector<double> acceleration;
};

/// Cyclic central differences of the traced servo angle. The seam between
/// the last and first position is closed modulo 2*pi.
inline MotionDerivatives differentiate_profile(const ClosureTrace& trace, double cv_speed) {
  if (!trace.feasible) {
    throw std::invalid_argument("differentiate_profile: infeasible trace");
  }
  const std::size_t n = trace.theta5.size();
  if (n < 4) {
    throw std::invalid_argument("differentiate_profile: need at least 4 positions");
  }
  if (!(cv_speed > 0.0)) {
    throw std::invalid_argument("differentiate_profile: cv_speed must be positive");
  }
  const double dt = (2.0 * kPi / cv_speed) / static_cast<double>(n);

  // Per-step wrapped increments; the seam increment wraps back to the start.
  std::vector<double> inc(n);
  for (std::size_t i = 0; i + 1 < n; ++i) inc[i] = trace.theta5[i + 1] - trace.theta5[i];
  inc[n - 1] = wrap_signed(trace.theta5[0] - trace.theta5[n - 1]);

  MotionDerivatives d;
  d.velocity.resize(n);
  d.acceleration.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double before = inc[(i + n - 1) % n];
    const double after = inc[i];
    d.velocity[i] = (before + after) / (2.0 * dt);
    d.acceleration[i] = (after - before) / (dt * dt);
  }
  return d;
}

/// Forward closure of the coupler joint given both input angles: the end
/// effector at distance q from the knee and r from the servo crank tip, on
/// the requested side of the knee->tip line.
inline std::optional<Point2> assemble_end_effector(const FiveBarGeometry& geom,
                                                   double theta_cv, double theta5,
                                                   Branch coupler_branch) {
  const Point2 knee = geom.cv_pivot + geom.p * unit_vector(theta_cv);
  const Point2 tip = geom.servo_pivot + geom.s * unit_vector(theta5);
  if (distance(knee, tip) <= 1e-12 * std::max(geom.q, geom.r)) return std::nullopt;
  const CircleIntersections hits = circle_intersect(knee, geom.q, tip, geom.r);
  if (hits.count == 0) return std::nullopt;
  if (hits.count == 1 || coupler_branch == Branch::Open) return hits.points[0];
  return hits.points[1];
}

/// Side of the knee->tip line the end effector sits on; identifies the
/// coupler assembly branch of a traced position.
inline Branch coupler_branch_of(const FiveBarGeometry& geom, double theta_cv, double theta5,
                                Point2 end_effector) {
  const Point2 knee = geom.cv_pivot + geom.p * unit_vector(theta_cv);
  const Point2 tip = geom.servo_pivot + geom.s * unit_vector(theta5);
  return cross(tip - knee, end_effector - knee) >= 0.0 ? Branch::Open : Branch::Crossed;
}

}  // namespace mechharmonic
