#pragma once

// Inverse dynamics of a traced five-bar: generalized torques at the CV and
// servo axes from the virtual-work sum over the four moving links, with
// slender-rod inertia and finite-difference configuration Jacobians.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mechharmonic/fivebar.hpp"
#include "mechharmonic/harmonics.hpp"

namespace mechharmonic {

struct InertiaModel {
  double density = 1.0;   // mass per unit length, uniform slender rods
  Point2 gravity{0.0, 0.0};
  std::array<double, 4> link_mass_scale{1.0, 1.0, 1.0, 1.0};  // p, q, r, s
  double fd_step = 1e-6;  // rad, configuration-space perturbation
  int oversample = 1;     // band-limited refinement of the trace (1 = raw)

  void validate() const {
    if (!(density > 0.0)) throw std::invalid_argument("InertiaModel: density must be positive");
    for (double s : link_mass_scale) {
      if (s < 0.0) throw std::invalid_argument("InertiaModel: negative mass scale");
    }
    if (!(fd_step > 0.0) || oversample < 1) {
      throw std::invalid_argument("InertiaModel: invalid numerical parameters");
    }
  }
};

struct TorqueProfile {
  std::vector<double> cv_torque;     // one entry per trace position
  std::vector<double> servo_torque;
  std::vector<std::uint8_t> valid;   // 0 where closure perturbation failed
  double peak_cv = 0.0;
  double peak_servo = 0.0;
  double rms_cv = 0.0;
  double rms_servo = 0.0;
  double energy_residual = 0.0;      // |sum of axis power * dt| over the cycle
  double energy_throughput = 0.0;    // sum of |power| * dt
  int flagged_positions = 0;
};

struct HybridQuality {
  double peak_ratio = 0.0;  // servo peak / CV peak
  double rms_ratio = 0.0;
  bool hybrid = false;      // both ratios below one
  bool defined = false;     // false when the CV torque is identically zero
};

namespace detail {

// Pose of the four moving links at one configuration.
struct LinkState {
  std::array<Point2, 4> centroid;  // p, q, r, s
  std::array<double, 4> phi;
  Point2 end;                      // coupler joint actually used
};

// Coupler closure resolved toward a reference end-effector position; this
// keeps the assembly continuous through branch-label boundaries.
inline std::optional<LinkState> link_state(const FiveBarGeometry& geom, double theta_cv,
                                           double theta5, Point2 end_reference) {
  const Point2 knee = geom.cv_pivot + geom.p * unit_vector(theta_cv);
  const Point2 tip = geom.servo_pivot + geom.s * unit_vector(theta5);
  if (distance(knee, tip) <= 1e-12 * std::max(geom.q, geom.r)) return std::nullopt;
  const CircleIntersections hits = circle_intersect(knee, geom.q, tip, geom.r);
  if (hits.count == 0) return std::nullopt;
  Point2 end = hits.points[0];
  if (hits.count == 2 &&
      distance(hits.points[1], end_reference) < distance(hits.points[0], end_reference)) {
    end = hits.points[1];
  }
  LinkState st;
  st.end = end;
  st.centroid[0] = 0.5 * (geom.cv_pivot + knee);
  st.phi[0] = theta_cv;
  st.centroid[1] = 0.5 * (knee + end);
  st.phi[1] = direction_angle(end - knee);
  st.centroid[2] = 0.5 * (end + tip);
  st.phi[2] = direction_angle(tip - end);
  st.centroid[3] = 0.5 * (geom.servo_pivot + tip);
  st.phi[3] = theta5;
  return st;
}

// Cyclic central differences; angle sequences difference through the wrap.
inline void cyclic_derivatives(const std::vector<double>& v, double dt, bool angular,
                               std::vector<double>& vel, std::vector<double>& acc) {
  const std::size_t n = v.size();
  std::vector<double> inc(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = v[(i + 1) % n] - v[i];
    inc[i] = angular ? wrap_signed(raw) : raw;
  }
  vel.resize(n);
  acc.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double before = inc[(i + n - 1) % n];
    const double after = inc[i];
    vel[i] = (before + after) / (2.0 * dt);
    acc[i] = (after - before) / (dt * dt);
  }
}

}  // namespace detail

/// Per-position CV-axis and servo-axis torques for a feasible trace. The
/// trace is optionally refined by band-limited interpolation before
/// differentiation; positions whose closure perturbation fails are flagged
/// and their torque omitted.
inline TorqueProfile inverse_dynamics(const FiveBarGeometry& geom, const ClosureTrace& trace,
                                      double cv_speed, const InertiaModel& model = {}) {
  geom.validate();
  model.validate();
  if (!trace.feasible) throw std::invalid_argument("inverse_dynamics: infeasible trace");
  const std::size_t n = trace.theta5.size();
  if (n < 4 || trace.end_points.size() != n || trace.theta_cv.size() != n) {
    throw std::invalid_argument("inverse_dynamics: trace lacks position data");
  }
  if (cv_speed < 0.0) throw std::invalid_argument("inverse_dynamics: negative cv_speed");

  const std::array<double, 4> lengths{geom.p, geom.q, geom.r, geom.s};
  std::array<double, 4> mass{};
  std::array<double, 4> inertia{};
  for (std::size_t l = 0; l < 4; ++l) {
    mass[l] = model.density * lengths[l] * model.link_mass_scale[l];
    inertia[l] = mass[l] * lengths[l] * lengths[l] / 12.0;
  }

  // Working grid: the raw trace, or its band-limited refinement.
  const std::size_t oversample =
      cv_speed > 0.0 ? static_cast<std::size_t>(model.oversample) : 1;
  const std::size_t nf = n * oversample;
  std::vector<double> theta_cv_f(nf);
  std::vector<double> theta5_f(nf);
  std::vector<Point2> end_ref(nf);  // continuity reference for the coupler
  std::vector<std::size_t> origin(nf);  // owning original position index
  if (oversample == 1) {
    theta_cv_f = trace.theta_cv;
    theta5_f = trace.theta5;
    end_ref = trace.end_points;
    for (std::size_t i = 0; i < n; ++i) origin[i] = i;
  } else {
    // Winding-free part of theta5 interpolates through its full spectrum;
    // the end-effector path interpolates component-wise.
    double winding = 0.0;
    std::vector<double> periodic(n), ex(n), ey(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double raw = trace.theta5[(i + 1) % n] - trace.theta5[i];
      winding += i + 1 == n ? wrap_signed(raw) : raw;
      ex[i] = trace.end_points[i].x;
      ey[i] = trace.end_points[i].y;
    }
    for (std::size_t i = 0; i < n; ++i) {
      periodic[i] = trace.theta5[i] - winding * static_cast<double>(i) / static_cast<double>(n);
    }
    const int orders = max_alias_free_order(n);
    const HarmonicSpectrum spec = compute_spectrum(SampledSignal(periodic), orders);
    const HarmonicSpectrum spec_x = compute_spectrum(SampledSignal(ex), orders);
    const HarmonicSpectrum spec_y = compute_spectrum(SampledSignal(ey), orders);
    const double cv_step = 2.0 * kPi / static_cast<double>(nf);
    for (std::size_t k = 0; k < nf; ++k) {
      const double phase = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(nf);
      theta_cv_f[k] = trace.theta_cv[0] + cv_step * static_cast<double>(k);
      theta5_f[k] = reconstruct(spec, phase) + winding * phase / (2.0 * kPi);
      end_ref[k] = {reconstruct(spec_x, phase), reconstruct(spec_y, phase)};
      origin[k] = k / oversample;
    }
  }

  TorqueProfile out;
  out.cv_torque.assign(n, 0.0);
  out.servo_torque.assign(n, 0.0);
  out.valid.assign(n, 1);

  // Poses over the working grid; a failed closure flags the owning position.
  std::vector<detail::LinkState> states(nf);
  std::vector<std::uint8_t> state_ok(nf, 1);
  for (std::size_t k = 0; k < nf; ++k) {
    const std::optional<detail::LinkState> st =
        detail::link_state(geom, theta_cv_f[k], theta5_f[k], end_ref[k]);
    if (!st) {
      state_ok[k] = 0;
      out.valid[origin[k]] = 0;
      continue;
    }
    states[k] = *st;
  }

  const bool static_case = cv_speed == 0.0;
  const double dt = static_case
                        ? 1.0
                        : (2.0 * kPi / cv_speed) / static_cast<double>(nf);

  // Centroid and orientation derivatives over the cycle.
  std::array<std::array<std::vector<double>, 2>, 4> acc_xy;   // [link][x/y]
  std::array<std::vector<double>, 4> alpha;
  std::vector<double> scratch_vel;
  if (!static_case) {
    for (std::size_t l = 0; l < 4; ++l) {
      for (int axis = 0; axis < 2; ++axis) {
        std::vector<double> coords(nf);
        for (std::size_t k = 0; k < nf; ++k) {
          coords[k] = axis == 0 ? states[k].centroid[l].x : states[k].centroid[l].y;
        }
        detail::cyclic_derivatives(coords, dt, false, scratch_vel, acc_xy[l][axis]);
      }
      std::vector<double> phis(nf);
      for (std::size_t k = 0; k < nf; ++k) phis[k] = states[k].phi[l];
      detail::cyclic_derivatives(phis, dt, true, scratch_vel, alpha[l]);
    }
  }
  std::vector<double> theta5_vel(nf, 0.0), theta5_acc;
  if (!static_case) detail::cyclic_derivatives(theta5_f, dt, true, theta5_vel, theta5_acc);

  double energy_sum = 0.0;
  double energy_abs = 0.0;
  const double delta = model.fd_step;
  for (std::size_t k = 0; k < nf; ++k) {
    const std::size_t owner = origin[k];
    if (!out.valid[owner] || !state_ok[k]) continue;

    // Configuration Jacobians by central differences about this position;
    // perturbed closures resolve toward the unperturbed end effector.
    const Point2 anchor = states[k].end;
    const auto plus_cv = detail::link_state(geom, theta_cv_f[k] + delta, theta5_f[k], anchor);
    const auto minus_cv = detail::link_state(geom, theta_cv_f[k] - delta, theta5_f[k], anchor);
    const auto plus_s = detail::link_state(geom, theta_cv_f[k], theta5_f[k] + delta, anchor);
    const auto minus_s = detail::link_state(geom, theta_cv_f[k], theta5_f[k] - delta, anchor);
    if (!plus_cv || !minus_cv || !plus_s || !minus_s) {
      out.valid[owner] = 0;
      continue;
    }

    double tau_cv = 0.0;
    double tau_servo = 0.0;
    for (std::size_t l = 0; l < 4; ++l) {
      const Point2 jac_cv = (1.0 / (2.0 * delta)) * (plus_cv->centroid[l] - minus_cv->centroid[l]);
      const Point2 jac_s = (1.0 / (2.0 * delta)) * (plus_s->centroid[l] - minus_s->centroid[l]);
      const double jphi_cv = wrap_signed(plus_cv->phi[l] - minus_cv->phi[l]) / (2.0 * delta);
      const double jphi_s = wrap_signed(plus_s->phi[l] - minus_s->phi[l]) / (2.0 * delta);
      const Point2 accel = static_case ? Point2{0.0, 0.0}
                                       : Point2{acc_xy[l][0][k], acc_xy[l][1][k]};
      const Point2 net_force = mass[l] * (accel - model.gravity);
      const double net_moment = static_case ? 0.0 : inertia[l] * alpha[l][k];
      tau_cv += dot(net_force, jac_cv) + net_moment * jphi_cv;
      tau_servo += dot(net_force, jac_s) + net_moment * jphi_s;
    }

    if (k % oversample == 0) {
      out.cv_torque[owner] = tau_cv;
      out.servo_torque[owner] = tau_servo;
    }
    if (!static_case) {
      const double power = tau_cv * cv_speed + tau_servo * theta5_vel[k];
      energy_sum += power * dt;
      energy_abs += std::abs(power) * dt;
    }
  }

  out.energy_residual = std::abs(energy_sum);
  out.energy_throughput = energy_abs;

  double sum_sq_cv = 0.0, sum_sq_servo = 0.0;
  std::size_t valid_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.valid[i]) continue;
    ++valid_count;
    out.peak_cv = std::max(out.peak_cv, std::abs(out.cv_torque[i]));
    out.peak_servo = std::max(out.peak_servo, std::abs(out.servo_torque[i]));
    sum_sq_cv += out.cv_torque[i] * out.cv_torque[i];
    sum_sq_servo += out.servo_torque[i] * out.servo_torque[i];
  }
  if (valid_count > 0) {
    out.rms_cv = std::sqrt(sum_sq_cv / static_cast<double>(valid_count));
    out.rms_servo = std::sqrt(sum_sq_servo / static_cast<double>(valid_count));
  }
  out.flagged_positions = static_cast<int>(n - valid_count);
  return out;
}

/// Torque distribution between the axes; the hybrid property holds when the
/// servo needs less torque than the CV motor on both measures.
inline HybridQuality hybrid_quality(const TorqueProfile& profile) {
  if (profile.cv_torque.empty()) {
    throw std::invalid_argument("hybrid_quality: empty profile");
  }
  HybridQuality hq;
  if (profile.peak_cv <= 0.0 || profile.rms_cv <= 0.0) {
    return hq;  // undefined ratios
  }
  hq.defined = true;
  hq.peak_ratio = profile.peak_servo / profile.peak_cv;
  hq.rms_ratio = profile.rms_servo / profile.rms_cv;
  hq.hybrid = hq.peak_ratio < 1.0 && hq.rms_ratio < 1.0;
  return hq;
}

}  // namespace mechharmonic
