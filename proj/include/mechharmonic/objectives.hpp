#pragma once

// Objective components for mechanism synthesis: cycle error, mobility
// penalty, harmonic content, swept area, their weighted composite, and the
// single-DOF harmonic suppression penalty.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "mechharmonic/fivebar.hpp"
#include "mechharmonic/harmonics.hpp"

namespace mechharmonic {

struct ObjectiveWeights {
  double w_err = 1.0;
  double w_mob = 1.0;
  double w_harm = 1.0;
  double w_swept = 1.0;

  void validate() const {
    if (w_err < 0.0 || w_mob < 0.0 || w_harm < 0.0 || w_swept < 0.0) {
      throw std::invalid_argument("ObjectiveWeights: weights must be non-negative");
    }
    if (w_err + w_mob + w_harm + w_swept <= 0.0) {
      throw std::invalid_argument("ObjectiveWeights: at least one weight must be positive");
    }
  }
};

// The literal form squares the cycle sum; sum-of-squares is the alternative.
enum class ErrorForm { SquaredSum, SumOfSquares };

struct ObjectiveOptions {
  ErrorForm error_form = ErrorForm::SquaredSum;
  int harmonic_orders = 5;
  double trend_override_k = 5.0;
};

struct ObjectiveBreakdown {
  double err = 0.0;
  double mob = 0.0;
  double harm = 0.0;
  double swept = 0.0;
  double composite = 0.0;
  bool trace_feasible = false;  // harm/swept are zeroed when false
};

inline double obj_err(std::span<const double> errors,
                      ErrorForm form = ErrorForm::SquaredSum) {
  double acc = 0.0;
  for (double e : errors) {
    if (!std::isfinite(e)) throw std::invalid_argument("obj_err: non-finite entry");
    acc += form == ErrorForm::SquaredSum ? e : e * e;
  }
  return form == ErrorForm::SquaredSum ? acc * acc : acc;
}

inline double obj_mob(int mobility) {
  const double m = static_cast<double>(mobility);
  return m * m * m;
}

/// Each harmonic magnitude raised to its order plus one: low orders with
/// large magnitudes are hit hardest.
inline double obj_harm(const HarmonicSpectrum& spectrum) {
  if (spectrum.max_order() < 1) {
    throw std::invalid_argument("obj_harm: spectrum has no harmonic terms");
  }
  double acc = 0.0;
  for (int order = 1; order <= spectrum.max_order(); ++order) {
    acc += std::pow(magnitude(spectrum, order), order + 1);
  }
  return acc;
}

/// Swept area: RMS of the servo displacement scaled by the servo crank
/// length; angles enter as traced, relative to the x-axis.
inline double obj_swept(const ClosureTrace& trace, double s) {
  if (!trace.feasible) throw std::invalid_argument("obj_swept: infeasible trace");
  if (trace.theta5.empty()) throw std::invalid_argument("obj_swept: empty trace");
  double acc = 0.0;
  for (double t : trace.theta5) acc += t * t;
  return s * std::sqrt(acc / static_cast<double>(trace.theta5.size()));
}

/// Harmonic-suppression penalty for single-DOF output motion: squared
/// magnitudes of orders two through five.
inline double singledof_harmonic_penalty(const HarmonicSpectrum& spectrum) {
  if (spectrum.max_order() < 5) {
    throw std::invalid_argument("singledof_harmonic_penalty: need orders up to 5");
  }
  double acc = 0.0;
  for (int order = 2; order <= 5; ++order) {
    const double h = magnitude(spectrum, order);
    acc += h * h;
  }
  return acc;
}

/// Evaluates all four components for one geometry against a path. When the
/// closure trace is infeasible, harm and swept are zeroed and the cubed
/// mobility term carries the penalty.
inline ObjectiveBreakdown composite_objective(const FiveBarGeometry& geom,
                                              const PathSpec& path,
                                              const ObjectiveWeights& weights,
                                              const ObjectiveOptions& options = {}) {
  weights.validate();
  path.validate();

  std::vector<double> errors(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    errors[i] = driving_dyad_solve(geom, path.cv_angle(i), path.points[i]).point_error;
  }

  const ClosureTrace trace = trace_closures(geom, path, options.trend_override_k);

  ObjectiveBreakdown out;
  out.err = obj_err(errors, options.error_form);
  out.mob = obj_mob(trace.mobility);
  out.trace_feasible = trace.feasible;
  if (trace.feasible) {
    const int orders =
        std::min(options.harmonic_orders, max_alias_free_order(trace.theta5.size()));
    const HarmonicSpectrum spec =
        compute_spectrum(SampledSignal(trace.theta5), std::max(orders, 1));
    out.harm = obj_harm(spec);
    out.swept = obj_swept(trace, geom.s);
  }
  out.composite = weights.w_err * out.err + weights.w_mob * out.mob +
                  weights.w_harm * out.harm + weights.w_swept * out.swept;
  return out;
}

}  // namespace mechharmonic
