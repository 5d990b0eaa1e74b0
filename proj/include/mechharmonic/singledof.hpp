#pragma once

// Single-degree-of-freedom chain: a Grashof four-bar crank-rocker whose
// rocker carries an arm driving a slider-crank on a fixed vertical axis.
// Nine free scalars parameterize the design.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mechharmonic/harmonics.hpp"
#include "mechharmonic/objectives.hpp"
#include "mechharmonic/planar.hpp"

namespace mechharmonic {

inline constexpr std::size_t kNeedleParamCount = 9;
using NeedleParams = std::array<double, kNeedleParamCount>;

struct NeedleMechanism {
  double crank = 1.0;          // a, input crank at the origin pivot
  double coupler = 4.0;        // b
  double rocker = 3.0;         // c
  Point2 fixed_pivot2{4.0, 0.0};
  double rocker_arm = 1.0;     // e, rigid arm on the rocker
  double rod = 4.0;            // L, connecting rod to the slider
  double slider_axis_x = 4.0;  // vertical slider line
  double arm_phase = 0.5 * kPi;  // beta, arm angle relative to the rocker

  double ground_length() const { return norm(fixed_pivot2); }

  // Grashof crank-rocker: the crank is the shortest link and rotates fully.
  void validate() const {
    const double t4 = ground_length();
    if (!(crank > 0.0 && coupler > 0.0 && rocker > 0.0 && rocker_arm > 0.0 && rod > 0.0)) {
      throw std::invalid_argument("NeedleMechanism: lengths must be positive");
    }
    if (!(t4 > 0.0)) {
      throw std::invalid_argument("NeedleMechanism: coincident ground pivots");
    }
    const double longest = std::max({coupler, rocker, t4});
    const double others = coupler + rocker + t4 - longest;
    if (crank >= std::min({coupler, rocker, t4}) || crank + longest >= others) {
      throw std::invalid_argument("NeedleMechanism: Grashof crank-rocker condition fails");
    }
  }

  static NeedleMechanism from_params(std::span<const double, kNeedleParamCount> v) {
    NeedleMechanism m;
    m.crank = v[0];
    m.coupler = v[1];
    m.rocker = v[2];
    m.fixed_pivot2 = {v[3], v[4]};
    m.rocker_arm = v[5];
    m.rod = v[6];
    m.slider_axis_x = v[7];
    m.arm_phase = v[8];
    m.validate();
    return m;
  }

  NeedleParams to_params() const {
    return {crank,      coupler, rocker,        fixed_pivot2.x, fixed_pivot2.y,
            rocker_arm, rod,     slider_axis_x, arm_phase};
  }
};

struct StrokeSpec {
  double upper = 1.0;
  double lower = -1.0;
  double min_transmission_deg = 30.0;

  void validate() const {
    if (!(upper > lower)) throw std::invalid_argument("StrokeSpec: upper must exceed lower");
    if (!(min_transmission_deg > 0.0 && min_transmission_deg < 90.0)) {
      throw std::invalid_argument("StrokeSpec: min_transmission must lie in (0, 90)");
    }
  }
};

struct ChainPosition {
  Point2 crank_tip;
  Point2 rocker_joint;
  Point2 arm_tip;
  Point2 slider;
  double slider_y = 0.0;
  double mu_fourbar = 0.0;  // transmission angle coupler/rocker, degrees
  double mu_slider = 0.0;   // rod against the slider-line normal, degrees
};

/// Position solution of the whole chain at one crank angle. Nullopt when the
/// four-bar cannot close or the rod cannot reach the slider line.
inline std::optional<ChainPosition> chain_position(const NeedleMechanism& mech,
                                                   double crank_angle,
                                                   Branch branch = Branch::Open) {
  ChainPosition out;
  out.crank_tip = mech.crank * unit_vector(crank_angle);

  const std::optional<DyadPose> fourbar =
      dyad_pose(out.crank_tip, mech.coupler, mech.fixed_pivot2, mech.rocker, branch);
  if (!fourbar) return std::nullopt;
  out.rocker_joint = fourbar->elbow;

  const double rocker_angle = direction_angle(out.rocker_joint - mech.fixed_pivot2);
  out.arm_tip = mech.fixed_pivot2 + mech.rocker_arm * unit_vector(rocker_angle + mech.arm_phase);

  const double dx = mech.slider_axis_x - out.arm_tip.x;
  const double under = mech.rod * mech.rod - dx * dx;
  if (under < 0.0) return std::nullopt;
  // Upper rod solution; the chain stays on one circuit over the cycle.
  out.slider_y = out.arm_tip.y + std::sqrt(under);
  out.slider = {mech.slider_axis_x, out.slider_y};

  out.mu_fourbar = transmission_angle(out.rocker_joint, out.crank_tip, mech.fixed_pivot2);
  out.mu_slider = transmission_angle(out.slider, out.arm_tip, out.slider + Point2{1.0, 0.0});
  return out;
}

struct NeedleEvaluation {
  double objective = 0.0;        // harmonic penalty + transmission penalty
  double stroke_upper_gap = 0.0; // h1 = max displacement - upper
  double stroke_lower_gap = 0.0; // h2 = min displacement - lower
  int infeasible_samples = 0;
  bool constructed = true;
  double min_mu_fourbar = 90.0;
  double min_mu_slider = 90.0;
  HarmonicSpectrum spectrum;
  std::vector<double> displacement;
};

inline constexpr double kNeedleInfeasiblePenalty = 1e6;

/// Samples the slider displacement over one crank cycle and scores harmonic
/// content plus transmission-angle shortfall. Stroke equalities are reported
/// separately for the penalty wrapper.
inline NeedleEvaluation needle_objective(const NeedleMechanism& mech, const StrokeSpec& stroke,
                                         int n_samples = 24) {
  mech.validate();
  stroke.validate();
  if (n_samples < 12) {
    throw std::invalid_argument("needle_objective: need at least 12 samples");
  }

  NeedleEvaluation eval;
  eval.displacement.reserve(static_cast<std::size_t>(n_samples));
  double transmission_penalty = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double angle = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n_samples);
    const std::optional<ChainPosition> pos = chain_position(mech, angle);
    if (!pos) {
      ++eval.infeasible_samples;
      continue;
    }
    eval.displacement.push_back(pos->slider_y);
    eval.min_mu_fourbar = std::min(eval.min_mu_fourbar, pos->mu_fourbar);
    eval.min_mu_slider = std::min(eval.min_mu_slider, pos->mu_slider);
    const double short1 = std::max(0.0, stroke.min_transmission_deg - pos->mu_fourbar);
    const double short2 = std::max(0.0, stroke.min_transmission_deg - pos->mu_slider);
    transmission_penalty += short1 * short1 + short2 * short2;
  }

  if (eval.infeasible_samples > 0) {
    eval.objective = kNeedleInfeasiblePenalty + eval.infeasible_samples;
    return eval;
  }

  eval.spectrum = compute_spectrum(SampledSignal(eval.displacement), 5);
  eval.objective = singledof_harmonic_penalty(eval.spectrum) + transmission_penalty;

  double y_max = eval.displacement[0];
  double y_min = eval.displacement[0];
  for (double y : eval.displacement) {
    y_max = std::max(y_max, y);
    y_min = std::min(y_min, y);
  }
  eval.stroke_upper_gap = y_max - stroke.upper;
  eval.stroke_lower_gap = y_min - stroke.lower;
  return eval;
}

/// Raw-parameter evaluation for the optimizer: designs that fail mechanism
/// invariants score as fully infeasible instead of throwing.
inline NeedleEvaluation needle_design_evaluation(const NeedleParams& params,
                                                 const StrokeSpec& stroke,
                                                 int n_samples = 24) {
  NeedleMechanism mech;
  try {
    mech = NeedleMechanism::from_params(params);
  } catch (const std::invalid_argument&) {
    NeedleEvaluation eval;
    eval.constructed = false;
    eval.infeasible_samples = n_samples;
    eval.objective = kNeedleInfeasiblePenalty + n_samples;
    return eval;
  }
  return needle_objective(mech, stroke, n_samples);
}

}  // namespace mechharmonic
