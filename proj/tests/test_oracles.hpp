#pragma once

// Independent oracles shared by the unit and acceptance suites. These stay on
// brute-force or analytic routes so they cannot inherit implementation bugs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mechharmonic/fivebar.hpp"
#include "mechharmonic/planar.hpp"

namespace oracles {

using mechharmonic::kPi;
using mechharmonic::Point2;

// Deterministic uniform stream for test data.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Brute-force circle intersection: scan the first circle for angles where the
// distance to the second circle's rim crosses zero, then bisect each crossing.
inline std::vector<Point2> circle_intersect_bruteforce(Point2 c1, double r1, Point2 c2,
                                                       double r2) {
  auto gap = [&](double phi) {
    const Point2 p{c1.x + r1 * std::cos(phi), c1.y + r1 * std::sin(phi)};
    return mechharmonic::distance(p, c2) - r2;
  };
  const int coarse = 5000;
  std::vector<Point2> hits;
  for (int i = 0; i < coarse; ++i) {
    double a = 2.0 * kPi * i / coarse;
    double b = 2.0 * kPi * (i + 1) / coarse;
    double ga = gap(a);
    double gb = gap(b);
    if (ga == 0.0) {
      hits.push_back({c1.x + r1 * std::cos(a), c1.y + r1 * std::sin(a)});
      continue;
    }
    if (ga * gb > 0.0) continue;
    for (int it = 0; it < 90; ++it) {  // bisection to ~1e-14 radians of arc
      const double mid = 0.5 * (a + b);
      const double gm = gap(mid);
      if (ga * gm <= 0.0) {
        b = mid;
        gb = gm;
      } else {
        a = mid;
        ga = gm;
      }
    }
    const double phi = 0.5 * (a + b);
    hits.push_back({c1.x + r1 * std::cos(phi), c1.y + r1 * std::sin(phi)});
  }
  return hits;
}

// Exhaustive branch-sequence search: minimal total velocity fluctuation over
// every choice of one candidate angle per position.
inline double min_total_fluctuation(
    const std::vector<std::vector<mechharmonic::ServoCandidate>>& sets) {
  const std::size_t n = sets.size();
  std::uint64_t combos = 1;
  for (const auto& s : sets) combos *= s.size();

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> theta(n);
  for (std::uint64_t mask = 0; mask < combos; ++mask) {
    std::uint64_t m = mask;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick = m % sets[i].size();
      m /= sets[i].size();
      theta[i] = sets[i][pick].theta5;
    }
    // Unwrapped consecutive differences, then fluctuation of those.
    double fluct = 0.0;
    double prev_v = 0.0;
    bool have_v = false;
    double prev_angle = theta[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double v = mechharmonic::wrap_signed(theta[i] - prev_angle);
      prev_angle += v;
      if (have_v) fluct += std::abs(v - prev_v);
      prev_v = v;
      have_v = true;
    }
    best = std::min(best, fluct);
  }
  return best;
}

// Total velocity fluctuation of one already-chosen angle sequence.
inline double total_fluctuation(const std::vector<double>& theta) {
  double fluct = 0.0;
  double prev_v = 0.0;
  bool have_v = false;
  for (std::size_t i = 1; i < theta.size(); ++i) {
    const double v = theta[i] - theta[i - 1];
    if (have_v) fluct += std::abs(v - prev_v);
    prev_v = v;
    have_v = true;
  }
  return fluct;
}

// Servo profile used by the forward generators. Phasing the swing against
// the crank keeps the chain inside its reach band: pass amp < 0 for the
// standard geometry, amp > 0 with a negative mean for its x-axis mirror.
inline double forward_theta5(double theta_cv, double mean, double amp) {
  return mean + amp * std::cos(theta_cv);
}

// Reference-family geometry mirrored across the x-axis: its smooth closure
// family carries the open branch label, matching the tracker's start rule.
inline mechharmonic::FiveBarGeometry open_family_geometry() {
  mechharmonic::FiveBarGeometry geom;
  geom.cv_pivot = {0.0, -1.0};
  geom.servo_pivot = {27.0, 2.0};
  geom.p = 16.0;
  geom.q = 24.0;
  geom.r = 30.0;
  geom.s = 16.0;
  return geom;
}

// Forward-generated path: exactly trackable by the generating geometry.
// Nullopt when the chain cannot close at some position.
inline std::optional<mechharmonic::PathSpec> forward_path(
    const mechharmonic::FiveBarGeometry& geom, std::size_t n, double mean, double amp,
    mechharmonic::Branch coupler_branch = mechharmonic::Branch::Crossed) {
  mechharmonic::PathSpec path;
  for (std::size_t i = 0; i < n; ++i) {
    const double theta_cv = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    const auto end = mechharmonic::assemble_end_effector(
        geom, theta_cv, forward_theta5(theta_cv, mean, amp), coupler_branch);
    if (!end) return std::nullopt;
    path.points.push_back(*end);
  }
  return path;
}

}  // namespace oracles
